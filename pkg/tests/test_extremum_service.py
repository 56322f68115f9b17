import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import BudgetExhausted, ConfigError, HypothesisError, PrecisionError
from app.models.data_models import BasisDecl, SpectralNode, SpectrumConfig
from app.models.report_models import GroupDecomposition, TheoremId, Verdict
from app.services import extremum_service, structure_service
from tests.factories import SQRT2_M1, SQRT3_M1, angle, basis, cosine, paired, random_unit_config


def _with_minus_one(basis_decl, terms):
    nodes = paired(basis_decl, terms).nodes
    half = SpectralNode(b=1, angle=angle(Fraction(1, 2), (0,) * basis_decl.size))
    return SpectrumConfig(basis=basis_decl, nodes=nodes + (half,))


def _torus(rows):
    return GroupDecomposition(torsion_order=1, torsion_exponents=(0,) * len(rows), d=len(rows[0]),
                              exponent_matrix=tuple(tuple(r) for r in rows))


# --- Discrete scans ---

def test_scan_of_zeta_example(zeta4):
    result = extremum_service.scan_infimum(zeta4, K=100)
    assert result.value_best == pytest.approx(-1, abs=1e-12)
    assert result.k_best % 5 != 0


def test_scan_of_quarter_turns():
    cfg = paired(BasisDecl(), [(1, Fraction(1, 4), ())])
    result = extremum_service.scan_infimum(cfg, K=4)
    assert result.k_best == 2
    assert result.value_best == pytest.approx(-2, abs=1e-15)


def test_scan_approaches_the_supremum_of_minus_sum():
    cfg = paired(basis("s5"), [(1, 0, (1,))])
    result = extremum_service.scan_infimum(cfg, K=100_000)
    assert -2 <= result.value_best <= -1.99


def test_scan_is_monotone_in_K(independent4):
    shorter = extremum_service.scan_infimum(independent4, K=1000, history=True)
    longer = extremum_service.scan_infimum(independent4, K=2000)
    assert longer.value_best <= shorter.value_best

    trace = [value for _, value in shorter.history]
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert trace[-1] == shorter.value_best


def test_scan_does_not_depend_on_worker_count(independent4, small_blocks):
    single = extremum_service.scan_infimum(independent4, K=200_000, workers=1)
    pooled = extremum_service.scan_infimum(independent4, K=200_000, workers=4)
    assert (single.k_best, single.value_best) == (pooled.k_best, pooled.value_best)


def test_restricted_scans(basis2):
    cfg = paired(basis2, [(1, Fraction(1, 3), (1, 0)), (1, 0, (0, 1))])
    odd = extremum_service.scan_infimum(cfg, K=1000, restrict="odd")
    assert odd.k_best % 2 == 1
    torsion = extremum_service.scan_infimum(cfg, K=1000, restrict="torsion")
    assert torsion.k_best % 3 == 0
    with pytest.raises(ConfigError):
        extremum_service.scan_infimum(cfg, K=10, restrict="even")
    with pytest.raises(ConfigError):
        extremum_service.scan_infimum(cfg, K=0)
    with pytest.raises(ConfigError):
        extremum_service.scan_infimum(cfg, K=10, start=2**31)


@pytest.mark.parametrize("pairs", [1, 2])
def test_minus_one_reduction_matches_the_odd_scan(basis2, pairs):
    terms = [(1, 0, (1, 0)), (1, 0, (0, 1))][:pairs]
    cfg = _with_minus_one(basis2, terms)
    reduced, offset = structure_service.reduce_minus_one(cfg)
    K = 10_000
    via_reduction = extremum_service.scan_infimum(reduced, K=K, start=0)
    direct = extremum_service.scan_infimum(cfg, K=K, restrict="odd")
    assert via_reduction.value_best + offset == pytest.approx(direct.value_best, abs=1e-9)
    assert direct.value_best < -math.log(cfg.n) / math.pi ** 4


def test_cosine_scan():
    cfg = cosine(BasisDecl(), [(1, Fraction(1, 5), ()), (1, Fraction(2, 5), ())])
    result = extremum_service.scan_cosine_infimum(cfg, K=10)
    assert result.value_best == pytest.approx(-0.5, abs=1e-12)


# --- Continuous minima ---

def test_continuous_minimum_of_a_single_cosine():
    result = extremum_service.continuous_minimum_time(cosine(BasisDecl(), [(1, Fraction(1, 4), ())]))
    assert result.value == pytest.approx(-1, abs=1e-12)
    assert result.t_star == pytest.approx(2, abs=1e-6)


def test_continuous_minimum_of_two_rational_cosines():
    cfg = cosine(BasisDecl(), [(1, Fraction(1, 6), ()), (1, Fraction(1, 3), ())])
    assert extremum_service.continuous_minimum_time(cfg).value == pytest.approx(-9 / 8, abs=1e-10)


def test_continuous_minimum_of_independent_cosines():
    cfg = cosine(basis("s2", "s5"), [(1, 0, (1, 0)), (1, 0, (0, 1))])
    result = extremum_service.continuous_minimum_time(cfg)
    assert -2 - 1e-12 <= result.value <= -1.99


def test_continuous_minimum_resolution_guard():
    cfg = cosine(BasisDecl(), [(1, Fraction(2, 5), ())])
    with pytest.raises(PrecisionError):
        extremum_service.continuous_minimum_time(cfg, resolution=2.0)


@pytest.mark.parametrize("rows, b, expected", [
    ([(1,), (-1,)], [1, 1], -2),
    ([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 1, 1, 1], -4),
    ([(1, 0), (-1, 0), (1, 1), (-1, -1)], [1, 1, 1, 1], -4),
])
def test_torus_minimum_examples(rows, b, expected):
    result = extremum_service.continuous_minimum_torus(_torus(rows), b)
    assert result.value == pytest.approx(expected, abs=1e-9)
    assert result.method == "torus-grid+polish"


def test_torus_minimum_at_half_turn():
    result = extremum_service.continuous_minimum_torus(_torus([(1,), (-1,)]), [1, 1])
    assert result.torus_point[0] == pytest.approx(0.5, abs=1e-9)


def test_torus_minimum_in_four_dimensions():
    rows = []
    for i in range(4):
        unit = tuple(1 if j == i else 0 for j in range(4))
        rows += [unit, tuple(-v for v in unit)]
    result = extremum_service.continuous_minimum_torus(_torus(rows), [1] * 8, seed=7)
    assert result.method == "torus-multistart+polish"
    assert result.value <= -8 + 1e-6
    again = extremum_service.continuous_minimum_torus(_torus(rows), [1] * 8, seed=7)
    assert again.value == result.value


def test_torus_minimum_needs_a_free_part():
    with pytest.raises(HypothesisError):
        extremum_service.continuous_minimum_torus(
            GroupDecomposition(torsion_order=5, torsion_exponents=(1, 4), d=0, exponent_matrix=((), ())), [1, 1])


def test_rational_config_falls_back_to_one_period(zeta4):
    result = extremum_service.continuous_minimum_periodic(zeta4)
    assert result.method == "period-exhaustive"
    assert result.value == pytest.approx(-1, abs=1e-12)
    assert result.t_star in (1.0, 2.0, 3.0, 4.0)

    quarter = paired(BasisDecl(), [(1, Fraction(1, 4), ())])
    assert extremum_service.continuous_minimum_periodic(quarter).value == pytest.approx(-2, abs=1e-15)
    with pytest.raises(HypothesisError):
        extremum_service.continuous_minimum_periodic(paired(basis("s5"), [(1, 0, (1,))]))


def test_torus_minimum_bounds_the_line():
    cfg = cosine(basis("s2", "s5"), [(1, 0, (1, 0)), (2, 0, (0, 1))])
    line = extremum_service.continuous_minimum_time(cfg)
    torus = extremum_service.continuous_minimum_torus(_torus([(1, 0), (0, 1)]), [1, 2])
    assert torus.value <= line.value + 1e-9


# --- Kronecker witnesses ---

def test_witness_for_integer_time():
    report = extremum_service.kronecker_witness(basis("s2"), 3, 0.01)
    assert report.method == "exact"
    assert report.k == 3
    assert report.delta_achieved == 0


def test_witness_matches_brute_force_in_one_dimension():
    report = extremum_service.kronecker_witness(basis("s2"), 0.5, 0.05, effort=10_000)
    beta = float(SQRT2_M1)
    ks = np.arange(0, 10_000)
    x = beta * (0.5 - ks)
    hits = np.nonzero(np.abs(x - np.round(x)) < 0.05)[0]
    assert report.k == int(ks[hits[0]])
    assert report.succeeded


def test_witness_matches_brute_force_in_two_dimensions(basis2):
    report = extremum_service.kronecker_witness(basis2, 0, 0.01, effort=1_000_000, min_k=1)
    betas = np.asarray([float(SQRT2_M1), float(SQRT3_M1)])
    ks = np.arange(1, 1_000_001)
    x = np.outer(ks, betas)
    err = np.max(np.abs(x - np.round(x)), axis=1)
    assert report.k == int(ks[np.nonzero(err < 0.01)[0][0]])
    assert report.delta_achieved < 0.01


def test_witness_budget_exhaustion(basis2, monkeypatch):
    monkeypatch.setattr(extremum_service, "_lattice_candidates", lambda *args, **kwargs: [])
    with pytest.raises(BudgetExhausted) as excinfo:
        extremum_service.kronecker_witness(basis2, 0.3, 1e-6, effort=5)
    best = excinfo.value.best
    assert best.effort_used == 5
    assert best.delta_achieved >= 1e-6


def test_witness_argument_checks(basis2):
    with pytest.raises(ConfigError):
        extremum_service.kronecker_witness(BasisDecl(), 0.5, 0.1)
    with pytest.raises(ConfigError):
        extremum_service.kronecker_witness(basis2, 0.5, 0)
    unasserted = basis2.model_copy(update={"independence_asserted": False})
    with pytest.raises(HypothesisError):
        extremum_service.kronecker_witness(unasserted, 0.5, 0.1)


def test_dirichlet_return(independent4):
    report = extremum_service.dirichlet_return(independent4, delta=0.01)
    assert report.k >= 1
    assert report.supremum == pytest.approx(4)
    assert report.gap <= report.gap_bound + 1e-9


def test_dirichlet_return_respects_torsion():
    cfg = paired(basis("s2"), [(1, Fraction(1, 3), (1,))])
    report = extremum_service.dirichlet_return(cfg, delta=0.01)
    assert report.k % 3 == 0
    assert report.sum_at_k >= report.supremum - report.gap_bound - 1e-9


# --- Certification ---

def test_certify_single_irrational_cosine():
    report = extremum_service.certify_cs_equals_ct(cosine(basis("s2"), [(1, 0, (1,))]), epsilon=1e-3)
    assert report.certified
    assert report.c_T == pytest.approx(1, abs=1e-9)
    assert report.f_k <= -1 + 2e-3


@pytest.mark.slow
def test_certify_two_independent_cosines():
    cfg = cosine(basis("s2", "s5"), [(1, 0, (1, 0)), (1, 0, (0, 1))])
    report = extremum_service.certify_cs_equals_ct(cfg, epsilon=1e-3)
    assert report.certified
    assert report.c_T == pytest.approx(2, abs=1e-9)
    assert report.f_k <= -2 + 2e-3


def test_certify_refuses_rational_angles():
    with pytest.raises(HypothesisError):
        extremum_service.certify_cs_equals_ct(cosine(BasisDecl(), [(1, Fraction(1, 4), ())]))


# --- Verification ---

def test_verify_zeta_example(zeta4):
    record = extremum_service.verify_theorem(zeta4, TheoremId.THM1, budget=1000)
    assert record.verdict is Verdict.PASS
    assert record.exhaustive
    assert record.min_found == pytest.approx(-1, abs=1e-12)

    record = extremum_service.verify_theorem(zeta4, "Thm4", budget=1000)
    assert record.verdict is Verdict.HYPOTHESIS_FAIL


@pytest.mark.parametrize("restrict, verdict, exhaustive", [
    ("all", Verdict.PASS, True),
    ("odd", Verdict.INCONCLUSIVE, False),
    ("torsion", Verdict.INCONCLUSIVE, False),
])
def test_restricted_verification_never_claims_a_full_period(restrict, verdict, exhaustive):
    # 2 cos(pi k / 2): 0 on odd k, 2 on multiples of 4, -2 only at k = 2 mod 4
    quarter = paired(BasisDecl(), [(1, Fraction(1, 4), ())])
    record = extremum_service.verify_theorem(quarter, TheoremId.THM1, budget=1000, restrict=restrict)
    assert record.verdict is verdict
    assert record.exhaustive is exhaustive
    assert record.bound == pytest.approx(-1)


def test_verify_small_budget_is_inconclusive():
    cfg = paired(basis("s5"), [(1, 0, (1,))])
    record = extremum_service.verify_theorem(cfg, TheoremId.THM1, budget=1)
    assert record.verdict is Verdict.INCONCLUSIVE
    assert not record.exhaustive
    assert record.margin < 0


def test_verify_logarithmic_bounds(independent4):
    for theorem in (TheoremId.THM4, TheoremId.COR3):
        record = extremum_service.verify_theorem(independent4, theorem, budget=10_000)
        assert record.verdict is Verdict.PASS, theorem
        assert record.strict

    unit = paired(basis("s5"), [(1, 0, (1,))])
    assert extremum_service.verify_theorem(unit, TheoremId.COR3, budget=1000).verdict is Verdict.PASS


def _check_cor3_at_desk_scale(rng, basis_decl, budget):
    for i in range(20):
        half = (1, 2, 3)[i % 3]
        cfg = random_unit_config(rng, basis_decl, half)
        assert structure_service.detect_degeneracy(cfg).verdict == "NonDegenerate"
        record = extremum_service.verify_theorem(cfg, TheoremId.COR3, budget=budget)
        assert record.verdict is Verdict.PASS, cfg
        assert record.bound == pytest.approx(-math.log(2 * half) / math.pi ** 4)
        assert record.min_found < record.bound


def test_logarithmic_bound_for_unit_coefficients(rng, basis3):
    _check_cor3_at_desk_scale(rng, basis3, 10_000)


@pytest.mark.slow
def test_logarithmic_bound_for_unit_coefficients_full_budget(rng, basis3):
    _check_cor3_at_desk_scale(rng, basis3, 1_000_000)


def test_verify_lemmas_through_the_projection(independent4):
    lemma1 = extremum_service.verify_theorem(independent4, TheoremId.LEMMA1)
    assert lemma1.verdict is Verdict.PASS
    assert lemma1.min_found >= lemma1.bound

    lemma2 = extremum_service.verify_theorem(independent4, TheoremId.LEMMA2)
    assert lemma2.verdict is Verdict.PASS
    assert lemma2.min_found == pytest.approx(-4, abs=1e-9)


def test_verify_cosine_bounds():
    rational = cosine(BasisDecl(), [(1, Fraction(1, 5), ()), (1, Fraction(2, 5), ())])
    record = extremum_service.verify_theorem(rational, TheoremId.COR4, budget=100)
    assert record.verdict is Verdict.PASS
    assert record.exhaustive

    irrational = cosine(basis("s2", "s5"), [(1, 0, (1, 0)), (1, 0, (0, 1))])
    assert extremum_service.verify_theorem(irrational, TheoremId.COR5, budget=10_000).verdict is Verdict.PASS


def test_verify_cosine_theorem_needs_a_cosine_config(zeta4):
    with pytest.raises(ConfigError):
        extremum_service.verify_theorem(zeta4, TheoremId.COR4)
