import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import trapezoid

from app.core.errors import ConfigError, HypothesisError
from app.models.data_models import BasisDecl, SpectralNode, SpectrumConfig
from app.models.report_models import TheoremId
from app.services import bounds_service, spectrum_service
from app.services.spectrum_service import to_spectrum
from app.services.structure_service import detect_degeneracy
from tests.factories import angle, basis, cosine, paired, random_rational_config


def test_thm1_examples(zeta4, basis2):
    assert bounds_service.bound_thm1(zeta4).value == pytest.approx(-1)
    assert bounds_service.bound_thm1(zeta4).applicable

    doubled = paired(basis2, [(2, 0, (1, 0))])
    assert bounds_service.bound_thm1(doubled).value == pytest.approx(-2)

    gaussian = paired(basis2, [(complex(1, 1), 0, (1, 0))])
    assert bounds_service.bound_thm1(gaussian).value == pytest.approx(-math.sqrt(2))


def test_cor1_never_below_thm1(basis2):
    cfg = paired(basis2, [(1, 0, (1, 0)), (2, 0, (0, 1))])
    assert bounds_service.bound_thm1(cfg).value == pytest.approx(-10 / 6)
    assert bounds_service.bound_cor1(cfg).value == pytest.approx(-1.5)


def test_bound_chain_on_random_configs(rng):
    for _ in range(50):
        cfg = random_rational_config(rng)
        assert bounds_service.bound_thm1(cfg).value <= bounds_service.bound_cor1(cfg).value + 1e-12


def test_bounds_scale_with_coefficients(basis2):
    small = paired(basis2, [(1, 0, (1, 0)), (2, Fraction(1, 3), (0, 1))])
    large = paired(basis2, [(3, 0, (1, 0)), (6, Fraction(1, 3), (0, 1))])
    for bound in (bounds_service.bound_thm1, bounds_service.bound_cor1):
        assert bound(large).value == pytest.approx(3 * bound(small).value)
    small_token = detect_degeneracy(small).token
    large_token = detect_degeneracy(large).token
    assert bounds_service.bound_thm4(large, large_token).value == pytest.approx(
        3 * bounds_service.bound_thm4(small, small_token).value)


def test_thm1_flags_missing_hypotheses(zeta4):
    with_unit = SpectrumConfig(nodes=zeta4.nodes + (SpectralNode(b=1, angle=angle(0)),))
    report = bounds_service.bound_thm1(with_unit)
    assert not report.applicable
    assert [h.label for h in report.hypotheses_met if not h.met] == ["no z = 1"]


def test_thm2_uses_the_original_coefficients():
    cfg = paired(BasisDecl(), [(1, Fraction(1, 5), ()), (3, Fraction(1, 5), ())])
    report = bounds_service.bound_thm2(cfg)
    assert report.applicable
    assert report.value == pytest.approx(-20 / 8)
    assert ("repeats merge to distinct nodes", True) in [(h.label, h.met) for h in report.hypotheses_met]
    # merged weights (4, 4) give -32/8, below the repeated-node value
    merged = bounds_service.bound_thm1(spectrum_service.collapse_repeats(cfg))
    assert merged.value == pytest.approx(-4)
    assert merged.value <= report.value


def test_thm2_needs_positive_coefficients_to_merge():
    cfg = paired(BasisDecl(), [(complex(1, 1), Fraction(1, 5), ()), (2, Fraction(2, 5), ())])
    report = bounds_service.bound_thm2(cfg)
    assert not report.applicable
    assert {h.label for h in report.hypotheses_met if not h.met} == {
        "b positive real", "repeats merge to distinct nodes"}


def test_thm4_value_and_token(independent4, zeta4):
    token = detect_degeneracy(independent4).token
    report = bounds_service.bound_thm4(independent4, token)
    assert report.applicable
    assert report.strict
    assert report.value == pytest.approx(-math.log(4) / math.pi ** 4)
    assert report.value == pytest.approx(-0.0142316, abs=1e-6)

    unmet = bounds_service.bound_thm4(zeta4, detect_degeneracy(zeta4).token)
    assert not unmet.applicable

    with pytest.raises(HypothesisError):
        bounds_service.bound_thm4(zeta4, token)


def test_thm4_does_not_cover_minus_one(basis2):
    cfg = SpectrumConfig(basis=basis2, nodes=paired(basis2, [(1, 0, (1, 0))]).nodes
                         + (SpectralNode(b=1, angle=angle(Fraction(1, 2), (0, 0))),))
    token = detect_degeneracy(cfg, allow_minus_one=True).token
    report = bounds_service.bound_thm4(cfg, token)
    assert not report.covered
    assert not report.applicable


@pytest.mark.parametrize("n", [2, 3, 10])
def test_cor3_values(n):
    report = bounds_service.bound_cor3(n)
    assert report.value == pytest.approx(-math.log(n) / math.pi ** 4)


def test_cor3_literal_values():
    assert bounds_service.bound_cor3(2).value == pytest.approx(-0.0071158, abs=1e-6)
    assert bounds_service.bound_cor3(10).value == pytest.approx(-0.0236383, abs=1e-6)
    with pytest.raises(ConfigError):
        bounds_service.bound_cor3(1)


def test_cor3_accepts_minus_one(basis2):
    cfg = SpectrumConfig(basis=basis2, nodes=paired(basis2, [(1, 0, (1, 0))]).nodes
                         + (SpectralNode(b=1, angle=angle(Fraction(1, 2), (0, 0))),))
    token = detect_degeneracy(cfg, allow_minus_one=True).token
    assert bounds_service.bound_cor3(3, cfg, token).applicable


def test_cor4_value():
    cfg = cosine(BasisDecl(), [(1, Fraction(1, 7), ()), (2, Fraction(2, 7), ()), (3, Fraction(3, 7), ())])
    report = bounds_service.bound_cor4(cfg)
    assert report.value == pytest.approx(-1)
    assert not report.strict


def test_cor5_value():
    cfg = cosine(basis("s2", "s5"), [(1, 0, (1, 0)), (1, 0, (0, 1))])
    token = detect_degeneracy(to_spectrum(cfg)).token
    report = bounds_service.bound_cor5(cfg, token)
    assert report.applicable
    assert report.value == pytest.approx(-math.log(4) / (2 * math.pi ** 4))

    single = cosine(basis("s2"), [(1, 0, (1,))])
    single_token = detect_degeneracy(to_spectrum(single)).token
    assert bounds_service.bound_cor5(single, single_token).value == pytest.approx(-0.0035579, abs=1e-6)


def test_littlewood_lower_bound_values():
    assert bounds_service.littlewood_lower_bound([1] * 10) == pytest.approx(4 / math.pi ** 3 * math.log(10))
    assert bounds_service.littlewood_lower_bound([1] * 10) == pytest.approx(0.2970, abs=1e-3)
    assert bounds_service.littlewood_lower_bound([0.5, 1, 1, 2]) == pytest.approx(
        4 / math.pi ** 3 * 0.5 * math.log(4))
    assert bounds_service.littlewood_lower_bound([3]) == 0
    with pytest.raises(ConfigError):
        bounds_service.littlewood_lower_bound([])


def test_l1_norm_closed_cases():
    assert bounds_service.l1_norm([(1, 1), (1, -1)]) == pytest.approx(8, rel=1e-6)
    assert bounds_service.l1_norm([(1, 1)]) == pytest.approx(2 * math.pi, rel=1e-6)
    with pytest.raises(ConfigError):
        bounds_service.l1_norm([(1, 2), (1, 2)])
    with pytest.raises(ConfigError):
        bounds_service.l1_norm([])


@pytest.mark.parametrize("n", [2, 5, 10, 20])
def test_l1_norm_of_dirichlet_kernel(n):
    pairs = [(1, j) for j in range(1, n + 1)]
    value = bounds_service.l1_norm(pairs)
    assert value >= bounds_service.littlewood_lower_bound([1] * n)

    t = np.linspace(-np.pi, np.pi, 200_001)
    dense = np.abs(np.exp(1j * np.outer(t, np.arange(1, n + 1))).sum(axis=1))
    assert value == pytest.approx(trapezoid(dense, t), rel=1e-4)


def test_l1_norm_respects_the_lower_bound(rng):
    for _ in range(50):
        count = int(rng.integers(1, 5))
        qs = rng.choice(np.arange(1, 31), size=count, replace=False)
        bs = rng.normal(size=count)
        pairs = [(float(b), int(q)) for b, q in zip(bs, qs)] + [(float(b), -int(q)) for b, q in zip(bs, qs)]
        bound = bounds_service.littlewood_lower_bound([b for b, _ in pairs])
        assert bounds_service.l1_norm(pairs) >= bound - 1e-6


def test_lemma_reports():
    lemma1 = bounds_service.bound_lemma1([1, 1, 1, 1])
    lemma2 = bounds_service.bound_lemma2([1, 1, 1, 1])
    assert lemma1.theorem_id is TheoremId.LEMMA1
    assert lemma2.value == pytest.approx(-math.log(4) / math.pi ** 4)
    assert not bounds_service.bound_lemma1([1, 0]).applicable


def test_applicable_bounds_lists_every_bound(zeta4, independent4):
    reports = {r.theorem_id: r for r in bounds_service.applicable_bounds(zeta4)}
    assert set(reports) == {TheoremId.THM1, TheoremId.COR1, TheoremId.THM2, TheoremId.THM4, TheoremId.COR3}
    assert reports[TheoremId.THM1].value == pytest.approx(-1)
    assert not reports[TheoremId.THM4].applicable

    reports = {r.theorem_id: r for r in bounds_service.applicable_bounds(independent4)}
    assert reports[TheoremId.THM4].applicable
    assert reports[TheoremId.COR3].applicable

    cos_cfg = cosine(BasisDecl(), [(1, Fraction(1, 5), ()), (1, Fraction(2, 5), ())])
    reports = {r.theorem_id: r for r in bounds_service.applicable_bounds(cos_cfg)}
    assert reports[TheoremId.COR4].value == pytest.approx(-0.5)
    assert not reports[TheoremId.COR5].applicable
