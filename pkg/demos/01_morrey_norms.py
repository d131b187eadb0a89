"""
Morrey norms of step functions
==============================

The norm is a supremum over dyadic cubes of |Q|^(1/p - 1/q) ||f||_{L^q(Q)}.
On a step function it is computed exactly, one generation at a time.
"""
from dyadmorrey import DyadicCube, indicator, lq_norm, morrey_norm, power_law

# the indicator of [0, 1) has norm 1 for every admissible pair (p, q)
f = indicator(DyadicCube(0, (0,)), n=1, J0=2, j_max=8)
for p, q in [(2, 1), (3, 0.5), (1.5, 1.5)]:
    print(f"unit interval, p={p}, q={q}: {morrey_norm(f, (p, q)):.12f}")

# a power law |x|^(-1/p) sits in M^p_q for q < p but not in L^p
g = power_law(2.0, n=1, J0=2, j_max=8, center=[0.0], support=DyadicCube(-1, (0,)))
print()
for j_max in (6, 8, 10):
    gj = power_law(2.0, n=1, J0=2, j_max=j_max, center=[0.0], support=DyadicCube(-1, (0,)))
    print(f"j_max={j_max:2d}  M^2_1 = {morrey_norm(gj, (2, 1)):.4f}   L^2 = {lq_norm(gj, 2):.4f}")

# scaling: f(2^m x) has norm 2^(-m/p) times the original
print()
for m in (-2, 0, 2):
    ratio = morrey_norm(g.dilate_dyadic(m), (2, 1)) / morrey_norm(g, (2, 1))
    print(f"m={m:+d}: ratio {ratio:.6f}, expected {2.0 ** (-m / 2):.6f}")
