"""
Bilinear boundedness between Morrey spaces
==========================================

Given the input spaces and alpha, the target exponents follow from the
index relations.  Which statement applies depends on where s and t fall.
"""
from dyadmorrey import check_boundedness, solve_params
from dyadmorrey.corpus import make_pairs

cases = {
    "target below L^1": (1 / 6, 1.5, 1.2, 1.5, 1.2),
    "target straddles 1": (3 / 35, 2.5, 1.5, 2.5, 1.5),
    "target above 1": (1 / 12, 4.0, 3.0, 4.0, 3.0),
}
pairs = make_pairs(30, seed=2, J0=1, j_max=9)
for label, (alpha, p1, q1, p2, q2) in cases.items():
    tp = solve_params(1, alpha, p1, q1, p2, q2)
    ratios = [check_boundedness(tp, it.f1, it.f2).ratio for it in pairs]
    print(f"{label:20s} p={tp.p:.3f} q={tp.q:.3f} s={tp.s:.3f} t={tp.t:.3f} -> {tp.regime}: "
          f"max ratio {max(ratios):.3f}")

# the ratio ignores dyadic dilations of the pair
tp = solve_params(1, 3 / 35, 2.5, 1.5, 2.5, 1.5)
it = pairs[0]
for m in (-1, 0, 1):
    d = it.dilated(m)
    print(f"dilation {m:+d}: {check_boundedness(tp, d.f1, d.f2).ratio:.10f}")
