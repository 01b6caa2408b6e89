"""Signed Haar sums on the dyadic grid.

Builds the r-functions for one random sign assignment, confirms that each has
modulus one everywhere, and compares the sup norm of their sum with the L2
floor that orthogonality gives for free.
"""
from smallball import (build_hyperbolic_sum, build_rfunction, count_shapes, enumerate_shapes,
                       inner_product, lp_norm, moment, random_signs)

n, d, seed = 5, 3, 1
alpha = random_signs(seed, n, d)
shapes = enumerate_shapes(n, d)
print(f"n={n}, d={d}: {len(shapes)} shapes, {alpha.n_signs} signs, grid 2^{d * (n + 1)} cells")

# each r-function is a +-1 step function
for r in shapes[:4]:
    f = build_rfunction(r, alpha)
    print(f"  shape {r}: min {f.min()}, max {f.max_abs()}, mean {f.mean()}")

# pairwise orthonormal, so ||H||_2^2 counts shapes exactly
f0, f1 = build_rfunction(shapes[0], alpha), build_rfunction(shapes[1], alpha)
print("<f_r, f_r> =", inner_product(f0, f0), " <f_r, f_s> =", inner_product(f0, f1))

H = build_hyperbolic_sum(alpha)
print(f"E H^2 = {moment(H, 2)} (= #shapes {count_shapes(n, d)})")
for p in (4, 6, 8):
    print(f"||H||_{p} = {float(lp_norm(H, p)):.4f}")
print(f"||H||_inf = {H.max_abs()}, L2 floor = {count_shapes(n, d) ** 0.5:.4f}")
