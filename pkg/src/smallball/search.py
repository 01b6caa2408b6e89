"""Minimizing ``||H||_inf`` over sign assignments.

Every search works on a :class:`FlipState`, which keeps ``H`` on the
canonical grid together with a histogram of cell values and the running
sum of ``H^4``.  Flipping one rectangle changes ``H`` by ``+-2`` on the
cells of that rectangle only, so a flip costs O(cells per rectangle).
"""
from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dyadic import count_shapes, haar_pattern
from .errors import InstanceTooLargeError, ParameterError
from .grid import check_budget
from .riesz import theorem_exponent
from .rng import Xoshiro256StarStar
from .signs import SignAssignment, random_signs
from .sums import build_hyperbolic_sum, canonical_m

EXHAUSTIVE_CAP = 16
STRATEGIES = ("exhaustive", "hillclimb", "anneal")


class FlipState:
    """Mutable ``H`` with incremental single-rectangle flips."""

    def __init__(self, alpha: SignAssignment):
        self.n, self.d = alpha.n, alpha.d
        self.m = canonical_m(self.n)
        check_budget(self.d, self.m)
        self.shapes = alpha.shapes
        self.size = 1 << self.n
        self.signs = alpha.flatten().astype(np.int8)
        self.H = build_hyperbolic_sum(alpha, fast=True).values.copy()
        self.offset = len(self.shapes)
        self.hist = np.bincount((self.H + self.offset).ravel(),
                                minlength=2 * self.offset + 1).astype(np.int64)
        self.l4 = int((self.H.astype(np.int64) ** 4).sum())
        self._patterns = [self._local_pattern(r) for r in self.shapes]

    def _local_pattern(self, r) -> np.ndarray:
        # Haar sign pattern of one rectangle of shape r, restricted to its own box
        pat = np.ones((1,) * self.d, dtype=np.int64)
        for axis, k in enumerate(r):
            shape = [1] * self.d
            shape[axis] = 1 << (self.m - k)
            pat = pat * haar_pattern(0, self.m - k).astype(np.int64).reshape(shape)
        return pat

    @property
    def n_signs(self) -> int:
        return self.signs.size

    def box(self, index: int) -> tuple[slice, ...]:
        s, pos = divmod(index, self.size)
        r = self.shapes[s]
        coords = []
        for k in reversed(r):
            coords.append(pos & ((1 << k) - 1))
            pos >>= k
        coords.reverse()
        return tuple(slice(c << (self.m - k), (c + 1) << (self.m - k)) for c, k in zip(coords, r))

    def max_abs(self) -> int:
        nz = np.flatnonzero(self.hist)
        return int(max(abs(nz[0] - self.offset), abs(nz[-1] - self.offset)))

    def objective(self) -> tuple[int, int]:
        """``(||H||_inf, sum H^4)``; compared lexicographically."""
        return self.max_abs(), self.l4

    def flip(self, index: int) -> None:
        """Flip sign ``index`` (flat order) and update ``H``, histogram and ``sum H^4``."""
        s = index // self.size
        sl = self.box(index)
        old = self.H[sl]
        delta = -2 * int(self.signs[index]) * self._patterns[s]
        new = old + delta
        off, width = self.offset, self.hist.size
        self.hist -= np.bincount((old + off).ravel(), minlength=width)
        self.hist += np.bincount((new + off).ravel(), minlength=width)
        self.l4 += int((new.astype(np.int64) ** 4).sum() - (old.astype(np.int64) ** 4).sum())
        self.H[sl] = new
        self.signs[index] = -self.signs[index]

    def trial(self, index: int) -> tuple[int, int]:
        """Objective after flipping ``index``, leaving the state unchanged."""
        self.flip(index)
        value = self.objective()
        self.flip(index)
        return value

    def assignment(self) -> SignAssignment:
        return SignAssignment.from_flat(self.n, self.d, self.signs.copy())

    def bit_pattern(self) -> tuple[int, ...]:
        return tuple(int(b) for b in (self.signs > 0))


@dataclass
class SearchResult:
    best_signs: SignAssignment
    best_value: int
    evaluations: int
    strategy: str
    seed: int | None
    budget: int | None
    restarts: int = 1
    best_l4: int | None = None
    initial_value: int | None = None
    trace: list = field(default_factory=list)

    def metadata(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "budget": self.budget,
            "restarts": self.restarts,
            "evaluations": self.evaluations,
            "best_value": self.best_value,
        }

    def dumps(self) -> str:
        return self.best_signs.dumps(self.metadata())

    def save(self, path) -> None:
        self.best_signs.save(path, self.metadata())


def linf(alpha: SignAssignment) -> int:
    return int(build_hyperbolic_sum(alpha).max_abs())


def exhaustive_min(n: int, d: int, cap: int = EXHAUSTIVE_CAP) -> SearchResult:
    """Global minimum of ``||H||_inf`` over all ``2^(#signs)`` assignments.

    Walks the reflected Gray code starting from all ``-1`` signs, one
    incremental flip per step.  Ties go to the lexicographically smallest bit
    pattern (first sign first, bit 1 meaning ``+1``).
    """
    total = count_shapes(n, d) << n
    if total > cap:
        raise InstanceTooLargeError(
            f"exhaustive search over {total} signs exceeds the cap of {cap}"
        )
    start = SignAssignment.from_flat(n, d, -np.ones(total, dtype=np.int8))
    state = FlipState(start)
    best_value, best_bits = state.max_abs(), state.bit_pattern()
    for k in range(1, 1 << total):
        # Gray code step k flips the lowest set bit of k
        state.flip((k & -k).bit_length() - 1)
        value = state.max_abs()
        if value < best_value:
            best_value, best_bits = value, state.bit_pattern()
        elif value == best_value:
            bits = state.bit_pattern()
            if bits < best_bits:
                best_bits = bits
    best = SignAssignment.from_bits(n, d, best_bits)
    return SearchResult(best, best_value, 1 << total, "exhaustive", None, None)


def _hillclimb(state: FlipState, budget: int, trace: list) -> int:
    evaluations = 0
    current = state.objective()
    while evaluations < budget:
        best_idx, best_obj = None, current
        for i in range(state.n_signs):
            if evaluations >= budget:
                break
            obj = state.trial(i)
            evaluations += 1
            if obj < best_obj:
                best_idx, best_obj = i, obj
        if best_idx is None:
            break
        state.flip(best_idx)
        current = best_obj
        trace.append({"evaluations": evaluations, "value": current[0], "l4": current[1]})
    return evaluations


def _anneal(state: FlipState, budget: int, rng: Xoshiro256StarStar, trace: list,
            t0: float, ratio: float):
    """Metropolis on single flips; returns (evaluations, best signs, best objective)."""
    temperature = t0
    current = state.objective()
    best, best_signs = current, state.signs.copy()
    n_cells = state.H.size
    for step in range(budget):
        i = rng.below(state.n_signs)
        state.flip(i)
        cand = state.objective()
        if cand[0] != current[0]:
            delta = float(cand[0] - current[0])
        else:
            # change of the L4 norm, orders plateaus of the sup norm
            delta = (cand[1] / n_cells) ** 0.25 - (current[1] / n_cells) ** 0.25
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            current = cand
            temperature *= ratio
            if current < best:
                best, best_signs = current, state.signs.copy()
                trace.append({"evaluations": step + 1, "value": best[0], "l4": best[1]})
        else:
            state.flip(i)
    return budget, best_signs, best


def _one_restart(n, d, strategy, stream, budget, t0, ratio):
    start = random_signs(stream, n, d)
    state = FlipState(start)
    initial = state.objective()
    trace = [{"evaluations": 0, "value": initial[0], "l4": initial[1]}]
    if strategy == "hillclimb":
        evaluations = _hillclimb(state, budget, trace)
        signs, obj = state.signs.copy(), state.objective()
    else:
        rng = Xoshiro256StarStar(stream ^ 0xA5A5A5A5A5A5A5A5)
        evaluations, signs, obj = _anneal(state, budget, rng, trace, t0, ratio)
    bits = tuple(int(b) for b in (signs > 0))
    return obj, bits, signs, evaluations, trace


def local_search(n: int, d: int, strategy: str = "anneal", seed: int = 0, budget: int = 1000,
                 restarts: int = 1, *, t0: float | None = None, ratio: float = 0.995,
                 workers: int = 1) -> SearchResult:
    """Single-flip local search from seeded random starts.

    Restart ``i`` starts from ``random_signs(seed + i, n, d)`` and spends up to
    ``budget`` objective evaluations.  ``hillclimb`` takes the steepest
    improving flip until none improves; ``anneal`` runs Metropolis with
    temperature ``t0`` (default ``n``) multiplied by ``ratio`` after each
    accepted move.  The objective is ``(||H||_inf, sum H^4)`` in
    lexicographic order; the best restart wins, ties broken by bit pattern.
    """
    if strategy not in ("hillclimb", "anneal"):
        raise ParameterError(f"unknown local strategy {strategy!r}")
    if budget < 0 or restarts < 1:
        raise ParameterError("budget must be >= 0 and restarts >= 1")
    t0 = float(n if t0 is None else t0) or 1.0
    jobs = [seed + i for i in range(restarts)]
    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(lambda s: _one_restart(n, d, strategy, s, budget, t0, ratio), jobs))
    else:
        outs = [_one_restart(n, d, strategy, s, budget, t0, ratio) for s in jobs]
    best = min(outs, key=lambda o: (o[0], o[1]))
    obj, _, signs, _, trace = best
    return SearchResult(
        best_signs=SignAssignment.from_flat(n, d, signs), best_value=obj[0],
        evaluations=sum(o[3] for o in outs), strategy=strategy, seed=seed, budget=budget,
        restarts=restarts, best_l4=obj[1], initial_value=outs[0][4][0]["value"], trace=trace,
    )


SCALING_COLUMNS = ("n", "d", "trial", "seed", "linf_random", "linf_searched", "l2_floor",
                   "ref_half", "ref_conj", "ref_thm")


def scaling_study(d: int, n_range, trials: int, seed: int, strategy: str = "anneal",
                  budget: int = 200) -> list[dict]:
    """Per ``(n, trial)``: sup norm of random signs and of searched signs.

    Trial ``i`` uses seed ``seed + i`` for the random assignment and as the
    search seed.  Reference curves ``n^((d-1)/2)``, ``n^(d/2)`` and
    ``n^((d-1)/2 + 1/(8d))`` are attached to every row.
    """
    rows = []
    eta = theorem_exponent(d)
    for n in n_range:
        check_budget(d, canonical_m(n))
        for trial in range(trials):
            s = seed + trial
            if strategy in ("hillclimb", "anneal"):
                res = local_search(n, d, strategy, s, budget)
                random_value, searched = res.initial_value, res.best_value
            else:
                random_value = linf(random_signs(s, n, d))
                searched = exhaustive_min(n, d).best_value if strategy == "exhaustive" \
                    else random_value
            rows.append({
                "n": n, "d": d, "trial": trial, "seed": s,
                "linf_random": random_value, "linf_searched": searched,
                "l2_floor": math.sqrt(count_shapes(n, d)),
                "ref_half": n ** ((d - 1) / 2), "ref_conj": n ** (d / 2), "ref_thm": n ** eta,
            })
    return rows


def summarize_scaling(rows: list[dict]) -> dict:
    """Medians/minima per ``n`` and log-log slopes of the medians."""
    by_n: dict[int, list] = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row)
    table = []
    for n in sorted(by_n):
        rs = by_n[n]
        table.append({
            "n": n,
            "median_random": statistics.median(r["linf_random"] for r in rs),
            "min_random": min(r["linf_random"] for r in rs),
            "median_searched": statistics.median(r["linf_searched"] for r in rs),
            "min_searched": min(r["linf_searched"] for r in rs),
        })
    ns = [t["n"] for t in table]
    out = {"table": table}
    if len(ns) >= 2 and min(ns) > 0:
        x = np.log(ns)
        for key in ("median_random", "median_searched"):
            out[f"slope_{key}"] = float(np.polyfit(x, np.log([t[key] for t in table]), 1)[0])
    return out
