"""Searching for sign assignments with small sup norm.

Exhaustive search settles the tiny cases; annealing with incremental flips
handles the rest.  In two dimensions every assignment gives the same sup
norm, n + 1, so the interesting searches are three-dimensional.
"""
from smallball import random_signs
from smallball.search import exhaustive_min, linf, local_search
from smallball.sums import l2_floor

for n in (1, 2):
    res = exhaustive_min(n, 2)
    print(f"d=2, n={n}: exhaustive min {res.best_value} over {res.evaluations} assignments")

res = exhaustive_min(1, 3)
print(f"d=3, n=1: exhaustive min {res.best_value} over {res.evaluations} assignments")

for n in (2, 3, 4, 5):
    start = linf(random_signs(0, n, 3))
    found = local_search(n, 3, "anneal", seed=0, budget=3000, restarts=2)
    print(f"d=3, n={n}: random {start}, annealed {found.best_value}, "
          f"L2 floor {l2_floor(n, 3):.3f}")
