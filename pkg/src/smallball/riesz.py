"""Riesz-product dual functions and certified lower bounds for ``||H||_inf``.

The dual function is the short product ``Psi = prod_t (1 + rt F_t)`` with a
deliberately small normalization ``rt``.  Since ``|<H, Psi>| <= ||H||_inf
||Psi||_1``, every computed pair ``(<H, Psi>, ||Psi||_1)`` certifies a lower
bound for the sup norm of ``H``.

Two scalar modes are used.  With a rational ``rt`` (``rho_tilde_rational``)
all grids are exact and identities are checked with zero tolerance; otherwise
float64 is used.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import count_shapes
from .errors import DegenerateQError, ModeError, ParameterError
from .grid import (DEFAULT_RATIONAL_BUDGET, FLOAT, RATIONAL, GridFunction, inner_product,
                   lp_norm, moment)
from .signs import SignAssignment
from .sums import (BlockPartition, build_block_sum, build_coincidence_sum,
                   build_hyperbolic_sum, canonical_m, count_block)

B_EXPONENT = Fraction(1, 4)


@dataclass(frozen=True)
class RieszParams:
    n: int
    d: int
    a: float
    kappa: float
    epsilon: float
    b: float
    q: int
    q_formula: int
    q_overridden: bool
    rho_tilde: float
    rho: float
    partition: BlockPartition
    rho_tilde_rational: Fraction | None = None

    @property
    def rho_tilde_value(self):
        """The normalization actually used: the rational override if present."""
        return self.rho_tilde if self.rho_tilde_rational is None else self.rho_tilde_rational

    @property
    def override_exceeds_formula(self) -> bool:
        return self.q_overridden and self.q > self.q_formula

    @property
    def eta(self) -> float:
        return theorem_exponent(self.d)

    def default_mode(self) -> str:
        cells = 1 << (self.d * canonical_m(self.n))
        if self.rho_tilde_rational is not None and cells <= DEFAULT_RATIONAL_BUDGET:
            return RATIONAL
        return FLOAT

    def diagnostics(self) -> dict:
        return {
            "q_formula": self.q_formula,
            "q_overridden": self.q_overridden,
            "override_exceeds_formula": self.override_exceeds_formula,
            "rho_tilde_le_rho": float(self.rho_tilde_value) <= self.rho,
            "eta": self.eta,
            "gain_q_b": self.q ** self.b,
            "n_eta": self.n ** self.eta,
            "predicted_principal": float(self.a) ** 1.25 * self.n ** (
                (self.d - 1) / 2 + self.epsilon / 4),
        }

    def to_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "a": float(self.a), "kappa": float(self.kappa),
            "epsilon": self.epsilon, "b": self.b, "q": self.q,
            "rho_tilde": self.rho_tilde, "rho": self.rho,
            "rho_tilde_rational": None if self.rho_tilde_rational is None
            else _fmt_exact(self.rho_tilde_rational),
            "partition": self.partition.as_lists(),
        }


def theorem_exponent(d: int) -> float:
    """Supremum of the admissible exponents: ``(d - 1)/2 + 1/(8d)``."""
    return (d - 1) / 2 + 1 / (8 * d)


def derive_params(n: int, d: int, a=1.0, kappa=None, q_override: int | None = None,
                  rho_tilde_rational=None) -> RieszParams:
    """Parameter schedule for the Riesz product.

    ``q = floor(a n^eps)`` with ``eps = 1/(2d) - kappa``; ``rt = a q^(1/4) n^(-(d-1)/2)``
    and ``rho = sqrt(q) n^(-(d-1)/2)``.  At desk scale the formulaic ``q`` is
    0 or 1, so ``q_override`` is usually needed; ``rho_tilde_rational`` replaces
    ``rt`` by an exact rational for zero-tolerance checks.
    """
    if n < 1 or d < 2:
        raise ParameterError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    if not 0 < a <= 1:
        raise ParameterError(f"a={a} must lie in (0, 1]")
    if kappa is None:
        kappa = Fraction(1, 4 * d)
    if not 0 < kappa < Fraction(1, 2 * d):
        raise ParameterError(f"kappa={kappa} must lie in (0, 1/{2 * d})")
    epsilon = 1 / (2 * d) - float(kappa)
    # guard against a*n^eps landing a hair below an integer
    q_formula = math.floor(float(a) * n ** epsilon * (1 + 1e-12))
    if q_override is None:
        if q_formula < 1:
            raise DegenerateQError(
                f"formulaic q = floor({float(a)} * {n}^{epsilon:.6g}) = {q_formula}; "
                "pass an explicit q override"
            )
        q = q_formula
    else:
        q = int(q_override)
        if q < 1:
            raise ParameterError(f"q override must be >= 1, got {q}")
    b = float(B_EXPONENT)
    scale = n ** (-(d - 1) / 2)
    if rho_tilde_rational is not None:
        if isinstance(rho_tilde_rational, float):
            raise ModeError("rho_tilde_rational must be an exact rational, not a float")
        rho_tilde_rational = Fraction(rho_tilde_rational)
        if rho_tilde_rational < 0:
            raise ParameterError("rho_tilde must be non-negative")
    return RieszParams(
        n=n, d=d, a=a, kappa=kappa, epsilon=epsilon, b=b, q=q, q_formula=q_formula,
        q_overridden=q_override is not None, rho_tilde=float(a) * q ** b * scale,
        rho=math.sqrt(q) * scale, partition=BlockPartition.build(n, q),
        rho_tilde_rational=rho_tilde_rational,
    )


def _resolve_mode(P: RieszParams, mode: str | None) -> str:
    mode = mode or P.default_mode()
    if mode == RATIONAL and P.rho_tilde_rational is None:
        raise ModeError("rational mode requires rho_tilde_rational")
    if mode not in (RATIONAL, FLOAT):
        raise ModeError(f"Riesz products use rational or float mode, not {mode!r}")
    return mode


def _rt(P: RieszParams, mode: str):
    return P.rho_tilde_value if mode == RATIONAL else float(P.rho_tilde_value)


def riesz_factor(F: GridFunction, rt, mode: str) -> GridFunction:
    """``1 + rt F`` in the requested mode."""
    if mode == FLOAT:
        return GridFunction(F.d, F.m, 1.0 + float(rt) * F.to_float().values, FLOAT)
    rt = Fraction(rt)
    num, den = rt.numerator, rt.denominator
    bound = den + abs(num) * int(np.abs(F.values).max())
    vals = F.values if bound < (1 << 62) else F.values.astype(object)
    return GridFunction(F.d, F.m, den + num * vals, RATIONAL, den)


def _product(factors, d, m, mode) -> GridFunction:
    out = GridFunction.constant(d, m, 1)
    out = out.to_float() if mode == FLOAT else out.to_rational()
    for f in factors:
        out = out * f
    return out


@dataclass
class _System:
    """Block sums and factors for one (params, signs, mode) triple."""

    P: RieszParams
    alpha: SignAssignment
    mode: str
    blocks: list = field(default_factory=list)
    factors: list = field(default_factory=list)

    @classmethod
    def build(cls, P: RieszParams, alpha: SignAssignment, mode: str | None = None):
        if (P.n, P.d) != (alpha.n, alpha.d):
            raise ParameterError(f"params are for (n={P.n}, d={P.d}), "
                                 f"signs for (n={alpha.n}, d={alpha.d})")
        mode = _resolve_mode(P, mode)
        system = cls(P, alpha, mode)
        rt = _rt(P, mode)
        for t in range(1, P.q + 1):
            F = build_block_sum(t, P.partition, alpha)
            system.blocks.append(F)
            system.factors.append(riesz_factor(F, rt, mode))
        return system

    @property
    def m(self):
        return canonical_m(self.P.n)

    def psi(self) -> GridFunction:
        return _product(self.factors, self.P.d, self.m, self.mode)

    def psi_excluding(self, j: int) -> GridFunction:
        self.P.partition.block(j)
        return _product([f for t, f in enumerate(self.factors, 1) if t != j],
                        self.P.d, self.m, self.mode)

    def prefix(self, V: int) -> GridFunction:
        return _product(self.factors[:V], self.P.d, self.m, self.mode)

    def hyperbolic(self) -> GridFunction:
        total = self.blocks[0]
        for F in self.blocks[1:]:
            total = total + F
        return total


def build_riesz_product(P: RieszParams, alpha: SignAssignment, mode: str | None = None) -> GridFunction:
    """``Psi = prod_t (1 + rt F_t)``.  Mean one in every mode."""
    return _System.build(P, alpha, mode).psi()


def build_riesz_product_excluding(j: int, P: RieszParams, alpha: SignAssignment,
                                  mode: str | None = None) -> GridFunction:
    """``Psi_{!=j}``: the product with factor ``j`` left out (constant 1 when q = 1)."""
    P.partition.block(j)
    return _System.build(P, alpha, mode).psi_excluding(j)


def _scale(x, rt, mode):
    return rt * x if mode == RATIONAL else float(rt) * float(x)


@dataclass(frozen=True)
class IdentityReport:
    j: int
    lhs: object
    rhs: object
    residual: object
    diagonal: object
    coincidence: object
    exact: bool

    @property
    def holds(self) -> bool:
        if self.exact:
            return self.residual == 0
        return abs(self.residual) <= 1e-9 * (1 + abs(self.lhs))


def verify_main_identity(j: int, P: RieszParams, alpha: SignAssignment,
                         mode: str | None = None, *, _system=None) -> IdentityReport:
    """Compare ``<F_j, Psi>`` against ``rt #A_j + rt <Phi_j, Psi_{!=j}>``.

    The left side is an inner product with the full product; the right side is
    assembled from the shape count and the coincidence sum, without touching
    ``F_j`` itself.
    """
    system = _system or _System.build(P, alpha, mode)
    P.partition.block(j)
    rt = _rt(P, system.mode)
    lhs = inner_product(system.blocks[j - 1], system.psi())
    diagonal = _scale(count_block(j, P.partition, P.n, P.d), rt, system.mode)
    phi = build_coincidence_sum(j, P.partition, alpha)
    coincidence = _scale(inner_product(phi, system.psi_excluding(j)), rt, system.mode)
    rhs = diagonal + coincidence
    return IdentityReport(j, lhs, rhs, lhs - rhs, diagonal, coincidence,
                          system.mode == RATIONAL)


@dataclass
class Certificate:
    """``||H||_inf >= |<H, Psi>| / ||Psi||_1`` with every constituent."""

    inner: object
    psi_l1: object
    bound: object
    linf_exact: int
    principal: object
    error_terms: list
    mode: str
    block_counts: list
    block_inner: list
    identity_residuals: list
    decomposition_residual: object
    l2_floor: float
    psi_min: object
    params: dict
    diagnostics: dict

    @property
    def sound(self) -> bool:
        if self.mode == RATIONAL:
            return self.bound <= self.linf_exact
        return float(self.bound) <= self.linf_exact * (1 + 1e-9)

    @property
    def decomposition_ok(self) -> bool:
        if self.mode == RATIONAL:
            return self.decomposition_residual == 0
        return abs(self.decomposition_residual) <= 1e-9 * (1 + abs(self.inner))

    def to_dict(self) -> dict:
        doc = asdict(self)
        return _jsonable(doc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def block_rows(self) -> list[dict]:
        return [
            {"block": j, "count": c, "inner_F_psi": _jsonable(bi),
             "error_term": _jsonable(e), "identity_residual": _jsonable(res)}
            for j, (c, bi, e, res) in enumerate(
                zip(self.block_counts, self.block_inner, self.error_terms,
                    self.identity_residuals), start=1)
        ]


def certificate(P: RieszParams, alpha: SignAssignment, mode: str | None = None) -> Certificate:
    system = _System.build(P, alpha, mode)
    mode = system.mode
    rt = _rt(P, mode)
    H = build_hyperbolic_sum(alpha)
    psi = system.psi()
    inner = inner_product(H, psi)
    psi_l1 = lp_norm(psi, 1)
    bound = abs(inner) / psi_l1
    principal = _scale(count_shapes(P.n, P.d), rt, mode)
    reports = [verify_main_identity(j, P, alpha, _system=system) for j in range(1, P.q + 1)]
    error_terms = [r.coincidence for r in reports]
    total = principal
    for e in error_terms:
        total = total + e
    return Certificate(
        inner=inner, psi_l1=psi_l1, bound=bound, linf_exact=int(H.max_abs()),
        principal=principal, error_terms=error_terms, mode=mode,
        block_counts=[count_block(j, P.partition, P.n, P.d) for j in range(1, P.q + 1)],
        block_inner=[r.lhs for r in reports],
        identity_residuals=[r.residual for r in reports],
        decomposition_residual=inner - total,
        l2_floor=math.sqrt(count_shapes(P.n, P.d)),
        psi_min=psi.min(), params=P.to_dict(), diagnostics=P.diagnostics(),
    )


def _p_label(p) -> str:
    return "inf" if p == math.inf else str(p)


def _row(quantity, value, block="", p="", exact=None):
    return {"quantity": quantity, "block": block, "p": _p_label(p) if p != "" else "",
            "value": float(value), "exact": "" if exact is None else _fmt_exact(exact)}


def lemma_checks(P: RieszParams, alpha: SignAssignment, p_list=(1, 2, 4, math.inf),
                 mode: str | None = None) -> list[dict]:
    """Desk-scale values of the quantities that control the certificate bound.

    Rows carry ``quantity, block, p, value, exact``.  Nothing here asserts an
    inequality: implied constants are unknown, so the values are reported.
    """
    system = _System.build(P, alpha, mode)
    exact = system.mode == RATIONAL
    rows = []
    psi = system.psi()

    def l2_row(quantity, f, block=""):
        # exact column carries E f^2 in rational mode
        return _row(quantity, lp_norm(f, 2), block=block, exact=moment(f, 2) if exact else None)

    rows.append(_row("psi_l1", lp_norm(psi, 1), exact=lp_norm(psi, 1) if exact else None))
    rows.append(l2_row("psi_l2", psi))
    excl = []
    for j in range(1, P.q + 1):
        f = system.psi_excluding(j)
        excl.append(float(lp_norm(f, 2)))
        rows.append(l2_row("psi_excl_l2", f, block=j))
    rows.append(_row("psi_excl_l2_max", max(excl)))
    for V in range(1, P.q + 1):
        rows.append(l2_row("prefix_l2", system.prefix(V), block=V))
    neg = psi.measure_where(psi.values < 0)
    rows.append(_row("prob_psi_negative", neg, exact=neg))
    union = Fraction(0)
    for t, F in enumerate(system.blocks, 1):
        # rt F_t < -1
        if exact:
            rt = P.rho_tilde_rational
            mask = rt.numerator * F.values < -rt.denominator
        else:
            mask = float(P.rho_tilde_value) * F.values < -1.0
        union += F.measure_where(mask)
    rows.append(_row("union_bound_negative", union, exact=union))
    for t in range(1, P.q + 1):
        phi = build_coincidence_sum(t, P.partition, alpha)
        for p in p_list:
            v = lp_norm(phi, p)
            ex = None
            if p != math.inf and float(p).is_integer():
                ex = moment(phi, int(p))
            elif p == math.inf:
                ex = Fraction(v)
            rows.append(_row("phi_norm", v, block=t, p=p, exact=ex))
    d, n, q = P.d, P.n, P.q
    for p in p_list:
        if p == math.inf:
            continue
        rows.append(_row("bg_reference", p ** (d - 0.5) * n ** (d - 1.5) * q ** -0.5, p=p))
        rows.append(_row("bg_conjecture_reference", (p * n) ** (d - 1.5) * q ** -0.5, p=p))
    return rows


def tail_profile(t: int, P: RieszParams, alpha: SignAssignment, x_grid) -> list[dict]:
    """Exact measure of ``{|rho F_t| > x}`` next to ``exp(-x^2)``."""
    F = build_block_sum(t, P.partition, alpha)
    absF = np.abs(F.values)
    rows = []
    for x in x_grid:
        measure = F.measure_where(P.rho * absF > x)
        rows.append({"block": t, "x": float(x), "measure": _fmt_exact(measure),
                     "measure_float": float(measure), "gaussian_ref": math.exp(-float(x) ** 2)})
    return rows


def lp_growth_scan(f: GridFunction, p_list) -> dict:
    """Least-squares slope of ``log ||f||_p`` against ``log p``."""
    p_list = [float(p) for p in p_list]
    if len(p_list) < 3 or min(p_list) < 2:
        raise ParameterError("need at least three exponents p >= 2")
    norms = [float(lp_norm(f, int(p) if p.is_integer() else p)) for p in p_list]
    x, y = np.log(p_list), np.log(norms)
    slope, intercept = np.polyfit(x, y, 1)
    return {
        "slope": float(slope) + 0.0,
        "intercept": float(intercept) + 0.0,
        "table": [{"p": p, "norm": v} for p, v in zip(p_list, norms)],
    }


def _fmt_exact(x) -> str | int:
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return _fmt_exact(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x

