"""
Powered maximal function on Morrey spaces
=========================================

M^(eta) f = (M |f|^eta)^(1/eta) is bounded on M^p_q when eta < q.
"""
from dyadmorrey import maximal, morrey_norm
from dyadmorrey.corpus import make_corpus
from dyadmorrey.verifier import chiarenza_frasca_ratio

p, q = 2.0, 1.5
corpus = make_corpus(30, seed=1, J0=1, j_max=9, p_near=(p,))
for eta in (q / 2, 3 * q / 4):
    ratios = []
    for it in corpus:
        top, bottom = chiarenza_frasca_ratio(it.f, (p, q), eta)
        ratios.append(top / bottom)
    print(f"eta={eta:.3f}: max ||M f|| / ||f|| = {max(ratios):.4f}")

f = corpus[0].f
M = maximal(f)
print(f"\n{corpus[0].item_id}: M f >= |f| everywhere: {bool((M.values >= abs(f.values)).all())}")
print(f"||f|| = {morrey_norm(f, (p, q)):.4f}, ||M f|| = {morrey_norm(M, (p, q)):.4f}")
