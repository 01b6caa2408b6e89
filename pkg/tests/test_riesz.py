import json
import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import mean, rfunction_cells
from smallball.dyadic import count_shapes
from smallball.errors import DegenerateQError, InvalidBlockError, ModeError, ParameterError
from smallball.grid import GridFunction, lp_norm, moment
from smallball.riesz import (build_riesz_product, build_riesz_product_excluding, certificate,
                             derive_params, lemma_checks, lp_growth_scan, tail_profile,
                             theorem_exponent, verify_main_identity)
from smallball.signs import all_plus, random_signs
from smallball.sums import BlockPartition, build_block_sum, build_hyperbolic_sum, \
    build_rfunction, count_block


def test_params_formulaic_example():
    P = derive_params(64, 3, a=1, kappa=Fraction(1, 12))
    assert P.epsilon == pytest.approx(1 / 12)
    assert P.q == P.q_formula == 1
    assert P.rho == P.rho_tilde == 1 / 64


def test_params_override_partition():
    P = derive_params(6, 3, q_override=2)
    assert P.partition.blocks == (range(0, 4), range(4, 7))
    assert P.q_overridden and P.override_exceeds_formula


def test_params_degenerate_q():
    with pytest.raises(DegenerateQError):
        derive_params(4, 3, a=Fraction(1, 2), kappa=Fraction(1, 12))


@pytest.mark.parametrize("kwargs", [
    {"kappa": Fraction(1, 6)}, {"kappa": 0}, {"a": 0}, {"a": 2}, {"q_override": 0},
])
def test_params_out_of_range(kwargs):
    with pytest.raises(ParameterError):
        derive_params(8, 3, **{"q_override": 1, **kwargs})


def test_params_float_rho_tilde_rejected_for_rational():
    with pytest.raises(ModeError):
        derive_params(4, 3, q_override=1, rho_tilde_rational=0.125)


def test_theorem_exponent():
    assert theorem_exponent(3) == 1 + 1 / 24


def _P(n, d, q, rt):
    return derive_params(n, d, q_override=q, rho_tilde_rational=rt)


def test_psi_q1_is_one_plus_rt_H():
    alpha = random_signs(2, 4, 3)
    P = _P(4, 3, 1, Fraction(1, 16))
    psi = build_riesz_product(P, alpha)
    H = build_hyperbolic_sum(alpha)
    assert psi.equals(H.scale(Fraction(1, 16)) + 1)
    assert psi.mean() == 1


def test_psi_with_zero_rt_is_one():
    psi = build_riesz_product(_P(4, 3, 2, 0), random_signs(2, 4, 3))
    assert psi.equals(GridFunction.constant(3, 5, 1))


def test_psi_mean_exact_d3_n4():
    for seed in range(3):
        psi = build_riesz_product(_P(4, 3, 2, Fraction(1, 16)), random_signs(seed, 4, 3))
        assert psi.mode == "rational" and psi.mean() == 1


def test_psi_mean_float_mode():
    P = derive_params(4, 3, q_override=3)
    psi = build_riesz_product(P, random_signs(5, 4, 3))
    assert psi.mode == "float"
    assert abs(psi.mean() - 1) <= 1e-12


def test_rational_mode_needs_rational_rt():
    with pytest.raises(ModeError):
        build_riesz_product(derive_params(4, 3, q_override=2), random_signs(5, 4, 3), "rational")


def test_excluding():
    alpha = random_signs(4, 4, 3)
    one = build_riesz_product_excluding(1, _P(4, 3, 1, Fraction(1, 8)), alpha)
    assert one.equals(GridFunction.constant(3, 5, 1))
    P = _P(4, 3, 3, Fraction(1, 8))
    psi = build_riesz_product(P, alpha)
    for j in (1, 2, 3):
        excl = build_riesz_product_excluding(j, P, alpha)
        F = build_block_sum(j, P.partition, alpha)
        assert ((F.scale(Fraction(1, 8)) + 1) * excl).equals(psi)
        assert excl.mean() == 1
    with pytest.raises(InvalidBlockError):
        build_riesz_product_excluding(4, P, alpha)


def test_main_identity_example():
    P = _P(4, 3, 2, Fraction(1, 16))
    for j in (1, 2):
        rep = verify_main_identity(j, P, random_signs(1, 4, 3))
        assert rep.exact and rep.residual == 0 and rep.holds


def test_main_identity_d2_has_no_coincidence_term():
    for n in (2, 5):
        rep = verify_main_identity(1, _P(n, 2, 1, Fraction(1, 8)), random_signs(3, n, 2))
        assert rep.residual == 0 and rep.coincidence == 0


def test_main_identity_zero_rt():
    rep = verify_main_identity(1, _P(4, 3, 2, 0), random_signs(3, 4, 3))
    assert rep.lhs == 0 and rep.rhs == 0


def test_main_identity_float_mode():
    P = derive_params(5, 3, q_override=2)
    for j in (1, 2):
        rep = verify_main_identity(j, P, random_signs(8, 5, 3))
        assert not rep.exact and rep.holds


def test_main_identity_against_definition_oracle():
    # Psi and <F_j, Psi> rebuilt cell by cell from Haar definitions
    n, d, rt = 2, 3, Fraction(1, 4)
    alpha = random_signs(6, n, d)
    P = _P(n, d, 2, rt)
    m = n + 1
    cells = {r: rfunction_cells(r, alpha[r], m) for r in alpha.shapes}
    blocks = {t: [r for r in alpha.shapes if r[0] in P.partition.block(t)] for t in (1, 2)}
    keys = list(next(iter(cells.values())))
    F = {t: {c: sum(cells[r][c] for r in blocks[t]) for c in keys} for t in (1, 2)}
    psi = {c: (1 + rt * F[1][c]) * (1 + rt * F[2][c]) for c in keys}
    assert mean(psi.values()) == 1
    for j in (1, 2):
        lhs = mean(F[j][c] * psi[c] for c in keys)
        rep = verify_main_identity(j, P, alpha)
        assert rep.lhs == lhs == rep.rhs


def test_certificate_example_d2():
    alpha = random_signs(1, 4, 2)
    cert = certificate(_P(4, 2, 1, Fraction(1, 8)), alpha)
    assert cert.sound and cert.decomposition_ok
    assert cert.bound <= cert.linf_exact == build_hyperbolic_sum(alpha).max_abs()


def test_certificate_all_plus_d2():
    P = _P(5, 2, 1, Fraction(1, 8))
    cert = certificate(P, all_plus(5, 2))
    assert cert.inner == Fraction(1, 8) * count_shapes(5, 2) == cert.principal
    assert cert.error_terms == [0]


def test_certificate_zero_rt():
    cert = certificate(_P(4, 3, 2, 0), random_signs(1, 4, 3))
    assert cert.bound == 0 and cert.psi_l1 == 1


def test_certificate_json_fields():
    cert = certificate(_P(3, 3, 2, Fraction(1, 8)), random_signs(1, 3, 3))
    doc = json.loads(cert.to_json())
    for key in ("inner", "psi_l1", "bound", "linf_exact", "principal", "error_terms"):
        assert key in doc
    assert isinstance(doc["linf_exact"], int)
    assert Fraction(doc["inner"]) == cert.inner
    assert len(cert.block_rows()) == 2


def test_certificate_float_mode_sound():
    P = derive_params(5, 3, q_override=2)
    cert = certificate(P, random_signs(2, 5, 3))
    assert cert.mode == "float" and cert.sound and cert.decomposition_ok


def _rows(rows, quantity):
    return [r for r in rows if r["quantity"] == quantity]


def test_lemma_checks_d2_phi_zero():
    rows = lemma_checks(_P(5, 2, 2, Fraction(1, 8)), random_signs(1, 5, 2))
    phi = _rows(rows, "phi_norm")
    assert phi and all(r["value"] == 0 for r in phi)


def test_lemma_checks_positive_psi_has_unit_l1():
    # 1 + F_t / 64 > 0 because |F_t| <= 15
    rows = lemma_checks(_P(4, 3, 2, Fraction(1, 64)), random_signs(1, 4, 3))
    assert _rows(rows, "psi_l1")[0]["exact"] == 1
    assert _rows(rows, "prob_psi_negative")[0]["value"] == 0


def test_lemma_checks_phi_l2_fixture(fixtures_dir):
    frozen = Fraction(json.loads((fixtures_dir / "values.json").read_text())
                      ["phi1_l2_squared_d3_n4_q1_seed1"])
    rows = lemma_checks(_P(4, 3, 1, Fraction(1, 16)), random_signs(1, 4, 3), (2,))
    (row,) = _rows(rows, "phi_norm")
    assert Fraction(row["exact"]) == frozen
    assert row["value"] == pytest.approx(math.sqrt(frozen), rel=1e-15)


def test_lemma_checks_prefix_and_union():
    P = _P(5, 3, 3, Fraction(1, 2))
    rows = lemma_checks(P, random_signs(3, 5, 3))
    assert len(_rows(rows, "prefix_l2")) == 3
    neg = _rows(rows, "prob_psi_negative")[0]["value"]
    union = _rows(rows, "union_bound_negative")[0]["value"]
    assert neg <= union


def test_tail_profile():
    alpha = random_signs(1, 6, 3)
    P = derive_params(6, 3, q_override=2)
    count = count_block(1, P.partition, 6, 3)
    rows = tail_profile(1, P, alpha, [0.0, 0.5, 1.0, 2.0, P.rho * count + 1e-9])
    assert rows[-1]["measure"] == 0
    F = build_block_sum(1, P.partition, alpha)
    assert Fraction(rows[0]["measure"]) == 1 - F.measure_where(F.values == 0)
    measures = [Fraction(r["measure"]) for r in rows]
    assert measures == sorted(measures, reverse=True)


def test_lp_scan_trivial_cases():
    assert lp_growth_scan(GridFunction.constant(2, 2, 1), [2, 4, 6])["slope"] == pytest.approx(0, abs=1e-15)
    f = build_rfunction((2, 1), random_signs(1, 3, 2))
    assert lp_growth_scan(f, [2, 4, 6, 8])["slope"] == pytest.approx(0, abs=1e-15)
    with pytest.raises(ParameterError):
        lp_growth_scan(f, [2, 4])


def test_lp_scan_fixture(fixtures_dir):
    frozen = json.loads((fixtures_dir / "values.json").read_text())["lp_moments_d2_n8_seed1"]
    H = build_hyperbolic_sum(random_signs(1, 8, 2))
    for p, v in frozen.items():
        assert moment(H, int(p)) == Fraction(v)
    res = lp_growth_scan(H, [2, 4, 6, 8])
    ps = [2, 4, 6, 8]
    norms = [float(Fraction(frozen[str(p)])) ** (1 / p) for p in ps]
    expected = np.polyfit(np.log(ps), np.log(norms), 1)[0]
    assert res["slope"] == pytest.approx(expected, rel=1e-12)
    assert [r["norm"] for r in res["table"]] == pytest.approx(norms, rel=1e-14)


def test_lp_norm_of_H_is_consistent():
    H = build_hyperbolic_sum(random_signs(1, 8, 2))
    assert lp_norm(H, 2) == 3
