import numpy as np

from dyadmorrey.corpus import make_corpus, make_families, make_pairs, random_step
from dyadmorrey.lattice import relation


def test_mix_and_ids():
    c = make_corpus(10, 1, J0=1, j_max=6)
    kinds = [it.item_id.split("-")[0] for it in c]
    assert kinds.count("indicator") == 4 and kinds.count("power_law") == 3 and kinds.count("step") == 3
    assert len({it.item_id for it in c}) == 10


def test_deterministic():
    a = make_corpus(6, 5, J0=1, j_max=6)
    b = make_corpus(6, 5, J0=1, j_max=6)
    assert all(np.array_equal(x.f.values, y.f.values) for x, y in zip(a, b))
    c = make_corpus(6, 6, J0=1, j_max=6)
    assert any(not np.array_equal(x.f.values, y.f.values) for x, y in zip(a, c))
    # an item does not depend on the corpus size
    d = make_corpus(3, 5, J0=1, j_max=6)
    assert np.array_equal(d[0].f.values, a[0].f.values)


def test_random_step_heights_and_levels():
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = random_step(rng, 1, 1, 6)
        v = f.values[f.values > 0]
        assert len(v) and v.min() >= 2**-4 * (1 - 1e-12) and v.max() <= 2**4 * (1 + 1e-12)


def test_families_supported_in_cubes():
    for fam in make_families(20, 3, J0=1, j_max=6):
        for f, Q in fam.members:
            assert f.integrate(Q) == f.integrate() > 0


def test_nested_family_cubes_nest():
    from dyadmorrey.corpus import random_family
    rng = np.random.default_rng(4)
    members = random_family(rng, 1, 1, 6, nested=True)
    cubes = [Q for _, Q in members]
    for a in cubes:
        for b in cubes:
            assert relation(a, b) != "disjoint"


def test_pairs_refine_and_dilate():
    p = make_pairs(2, 0, J0=1, j_max=5)[0]
    r = p.refined()
    assert r.f1.j_max == 6 and r.f1.integrate() == p.f1.integrate()
    d = p.dilated(1)
    assert d.f1.J0 == 0 and d.f1.j_max == 6
