# Closed-form one-sided bounds and the L1 quantities behind the logarithmic bound
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from app.core.config import settings
from app.core.errors import ConfigError, HypothesisError, QuadratureError
from app.models.data_models import CosineConfig, ExactAngle, SpectrumConfig
from app.models.report_models import (
    BoundReport,
    HypothesisCheck,
    NondegeneracyToken,
    TheoremId,
)
from app.services import spectrum_service, structure_service

logger = logging.getLogger(__name__)

PI4 = math.pi ** 4
LITTLEWOOD_CONSTANT = 4 / math.pi ** 3


def _abs_sums(coefficients: Sequence) -> Tuple[float, float]:
    """(sum |b_j|, sum |b_j|^2), exact when every b_j is rational."""
    if all(isinstance(b, Fraction) for b in coefficients):
        first = sum((abs(b) for b in coefficients), Fraction(0))
        second = sum((b * b for b in coefficients), Fraction(0))
        return float(first), float(second)
    magnitudes = [abs(complex(b)) for b in coefficients]
    return math.fsum(magnitudes), math.fsum(m * m for m in magnitudes)


def _min_abs(coefficients: Sequence) -> float:
    return min(abs(complex(b)) for b in coefficients)


def _has_minus_one(cfg: SpectrumConfig) -> bool:
    for angle in cfg.angles:
        if isinstance(angle, ExactAngle):
            if angle.is_rational and angle.rational == Fraction(1, 2):
                return True
        elif spectrum_service.same_angle(angle, ExactAngle(rational=Fraction(1, 2), coeffs=(0,) * cfg.basis.size),
                                         cfg.basis):
            return True
    return False


def _theorem1_checks(cfg: SpectrumConfig) -> List[HypothesisCheck]:
    report = spectrum_service.validate_config(cfg)
    return [
        HypothesisCheck(label="conjugate closed", met=report.conjugate_closed),
        HypothesisCheck(label="no z = 1", met=report.no_unit_node),
        HypothesisCheck(label="distinct z", met=report.distinct),
        HypothesisCheck(label="b nonzero", met=report.all_b_nonzero),
    ]


def bound_thm1(cfg: SpectrumConfig) -> BoundReport:
    """liminf s_k <= -sum|b_j|^2 / sum|b_j|."""
    checks = _theorem1_checks(cfg)
    first, second = _abs_sums(cfg.coefficients)
    value = -second / first if first > 0 else 0.0
    return BoundReport(theorem_id=TheoremId.THM1, name="quadratic mean bound",
                       value=value, strict=False, hypotheses_met=checks)


def bound_cor1(cfg: SpectrumConfig) -> BoundReport:
    """liminf s_k <= -(1/n) sum|b_j|, never below the Thm1 value."""
    checks = _theorem1_checks(cfg)
    first, _ = _abs_sums(cfg.coefficients)
    value = -first / cfg.n
    thm1 = bound_thm1(cfg).value
    if thm1 > value + 1e-12 * max(1.0, abs(value)):
        logger.error(f"Mean bound ordering violated: {thm1} > {value}")
        raise ArithmeticError("Thm1 bound exceeds the mean bound.")
    return BoundReport(theorem_id=TheoremId.COR1, name="mean bound",
                       value=value, strict=False, hypotheses_met=checks)


def bound_thm2(cfg: SpectrumConfig) -> BoundReport:
    """
    Repeated z allowed for positive real b: the Thm1 value of the original b still holds,
    since merging repeats keeps sum b and only grows sum b^2.
    """
    report = spectrum_service.validate_config(cfg)
    checks = [
        HypothesisCheck(label="conjugate closed", met=report.conjugate_closed),
        HypothesisCheck(label="no z = 1", met=report.no_unit_node),
        HypothesisCheck(label="b positive real", met=report.all_b_positive_real),
    ]
    first, second = _abs_sums(cfg.coefficients)
    value = -second / first if first > 0 else 0.0
    merged_ok = False
    if report.all_b_positive_real:
        collapsed = spectrum_service.collapse_repeats(cfg)
        merged = spectrum_service.validate_config(collapsed)
        merged_ok = merged.distinct and merged.all_b_nonzero
        collapsed_first, collapsed_second = _abs_sums(collapsed.coefficients)
        collapsed_value = -collapsed_second / collapsed_first
        if collapsed_value > value + 1e-12 * max(1.0, abs(value)):
            logger.error(f"Collapsed bound {collapsed_value} exceeds the repeated-node bound {value}")
            raise ArithmeticError("Merging repeats lowered sum b^2.")
        logger.debug(f"Thm2: {cfg.n} nodes merge to {collapsed.n}, bound {value} (merged {collapsed_value})")
    checks.append(HypothesisCheck(label="repeats merge to distinct nodes", met=merged_ok))
    return BoundReport(theorem_id=TheoremId.THM2, name="repeated-node quadratic mean bound",
                       value=value, strict=False, hypotheses_met=checks)


def _check_token(token: Optional[NondegeneracyToken], target: SpectrumConfig) -> bool:
    if token is None:
        return False
    if not token.certifies(target):
        logger.error("Non-degeneracy token was issued for a different config")
        raise HypothesisError("Non-degeneracy token does not certify this config.")
    return True


def bound_thm4(cfg: SpectrumConfig, token: Optional[NondegeneracyToken] = None) -> BoundReport:
    """
    inf_k s_k < -(1/pi^4) min|b_j| log n in the non-degenerate case.

    Raises:
        HypothesisError: the token certifies a different config.
    """
    report = spectrum_service.validate_config(cfg)
    certified = _check_token(token, cfg) and not token.allow_minus_one
    minus_one = _has_minus_one(cfg)
    checks = [
        HypothesisCheck(label="conjugate closed", met=report.conjugate_closed),
        HypothesisCheck(label="no z = -1", met=not minus_one),
        HypothesisCheck(label="non-degeneracy certified", met=certified),
    ]
    value = -_min_abs(cfg.coefficients) * math.log(cfg.n) / PI4
    return BoundReport(theorem_id=TheoremId.THM4, name="non-degenerate logarithmic bound",
                       value=value, strict=True, hypotheses_met=checks,
                       covered=not minus_one)


def bound_cor3(n: int, cfg: Optional[SpectrumConfig] = None,
               token: Optional[NondegeneracyToken] = None) -> BoundReport:
    """-(1/pi^4) log n for b_j = 1; a node at z = -1 is allowed."""
    if n < 2:
        raise ConfigError("The unit-coefficient bound needs n >= 2.", field="n")
    checks: List[HypothesisCheck] = []
    if cfg is not None:
        report = spectrum_service.validate_config(cfg)
        checks = [
            HypothesisCheck(label="conjugate closed", met=report.conjugate_closed),
            HypothesisCheck(label="b = 1", met=all(b == 1 for b in cfg.coefficients)),
            HypothesisCheck(label="non-degeneracy certified", met=_check_token(token, cfg)),
        ]
    return BoundReport(theorem_id=TheoremId.COR3, name="unit-coefficient logarithmic bound",
                       value=-math.log(n) / PI4, strict=True, hypotheses_met=checks)


def bound_cor4(cfg: CosineConfig) -> BoundReport:
    """inf_k sum_j b_j cos(2 pi alpha_j k) <= -(1/2m) sum|b_j|."""
    spectrum_service.validate_cosine_config(cfg)
    first, _ = _abs_sums(cfg.coefficients)
    checks = [HypothesisCheck(label="b nonzero", met=all(b != 0 for b in cfg.coefficients))]
    return BoundReport(theorem_id=TheoremId.COR4, name="cosine mean bound",
                       value=-first / (2 * cfg.m), strict=False, hypotheses_met=checks)


def bound_cor5(cfg: CosineConfig, token: Optional[NondegeneracyToken] = None) -> BoundReport:
    """-log(2m) / (2 pi^4) min|b_j| when no alpha_i -+ alpha_j is rational."""
    spectrum_service.validate_cosine_config(cfg)
    certified = _check_token(token, spectrum_service.to_spectrum(cfg))
    checks = [
        HypothesisCheck(label="b nonzero", met=all(b != 0 for b in cfg.coefficients)),
        HypothesisCheck(label="non-degeneracy certified", met=certified),
    ]
    value = -math.log(2 * cfg.m) / (2 * PI4) * _min_abs(cfg.coefficients)
    return BoundReport(theorem_id=TheoremId.COR5, name="cosine logarithmic bound",
                       value=value, strict=True, hypotheses_met=checks)


def littlewood_lower_bound(b: Sequence) -> float:
    """(4/pi^3) min|b_j| log n, the lower bound on the L1 norm over one period."""
    if len(b) < 1:
        raise ConfigError("At least one coefficient is required.", field="b")
    return LITTLEWOOD_CONSTANT * _min_abs(b) * math.log(len(b))


def bound_lemma1(b: Sequence) -> BoundReport:
    nonzero = all(abs(complex(x)) > 0 for x in b)
    return BoundReport(theorem_id=TheoremId.LEMMA1, name="L1 lower bound",
                       value=littlewood_lower_bound(b), strict=False,
                       hypotheses_met=[HypothesisCheck(label="b nonzero", met=nonzero)])


def bound_lemma2(b: Sequence) -> BoundReport:
    if len(b) < 1:
        raise ConfigError("At least one coefficient is required.", field="b")
    nonzero = all(abs(complex(x)) > 0 for x in b)
    return BoundReport(theorem_id=TheoremId.LEMMA2, name="real trigonometric minimum bound",
                       value=-_min_abs(b) * math.log(len(b)) / PI4, strict=True,
                       hypotheses_met=[HypothesisCheck(label="b nonzero", met=nonzero)])


# --- L1 norm ---

def _trig_abs(b: np.ndarray, q: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.abs(np.exp(1j * np.outer(np.atleast_1d(t), q)) @ b)


def _kinks(b: np.ndarray, q: np.ndarray) -> List[float]:
    """Points in (-pi, pi) where |f| touches zero."""
    points = max(4096, 64 * int(np.max(np.abs(q))) + 1)
    grid = np.linspace(-np.pi, np.pi, points)
    values = _trig_abs(b, q, grid)
    scale = float(np.sum(np.abs(b)))
    candidates = np.nonzero((values[1:-1] <= values[:-2]) & (values[1:-1] <= values[2:])
                            & (values[1:-1] < 0.05 * scale))[0] + 1

    kinks = []
    for idx in candidates:
        res = optimize.minimize_scalar(lambda t: float(_trig_abs(b, q, t)[0]),
                                       bounds=(grid[idx - 1], grid[idx + 1]), method="bounded",
                                       options={"xatol": 1e-13})
        if res.fun < 1e-6 * scale:
            kinks.append(float(res.x))
    return kinks


def l1_norm(pairs: Sequence[Tuple[Union[complex, float, Fraction], int]],
            rel_tol: Optional[float] = None) -> float:
    """
    Integral of |sum_j b_j exp(i q_j t)| over [-pi, pi].

    The integrand is split at the zeros of f, where |f| has kinks, and each
    smooth piece goes to adaptive quadrature.

    Raises:
        QuadratureError: estimated error above rel_tol times the value.
    """
    rel_tol = rel_tol or settings.quad_rel_tol
    if not pairs:
        raise ConfigError("At least one (b, q) pair is required.", field="pairs")
    q = np.asarray([int(p[1]) for p in pairs], dtype=np.int64)
    if len(set(q.tolist())) != len(q):
        raise ConfigError("Frequencies q_j must be distinct.", field="pairs")
    b = np.asarray([complex(p[0]) for p in pairs], dtype=np.complex128)

    edges = [-math.pi] + sorted(_kinks(b, q)) + [math.pi]
    scale = 2 * math.pi * float(np.sum(np.abs(b)))
    integrand = lambda t: float(_trig_abs(b, q, t)[0])
    total, error, failed = 0.0, 0.0, False
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        result = integrate.quad(integrand, lo, hi, epsabs=1e-3 * rel_tol * scale / len(edges),
                                epsrel=rel_tol / 10, limit=200, full_output=1)
        total += result[0]
        error += result[1]
        if len(result) == 4:
            failed = True
            logger.warning(f"Quadrature on [{lo:.6f}, {hi:.6f}]: {result[3]}")

    if failed or error > rel_tol * max(total, 1e-300):
        logger.error(f"L1 quadrature did not converge: value {total}, error estimate {error:.3e}")
        raise QuadratureError("L1 quadrature did not reach the target accuracy.", total, error)
    logger.debug(f"L1 norm over {len(pairs)} terms: {total} (error <= {error:.3e}, {len(edges) - 2} kinks)")
    return total


# --- Collections ---

def applicable_bounds(cfg: Union[SpectrumConfig, CosineConfig]) -> List[BoundReport]:
    """Every bound for the config, with hypothesis flags; inapplicable ones are listed, not dropped."""
    if isinstance(cfg, CosineConfig):
        spectrum = spectrum_service.to_spectrum(cfg)
        verdict = structure_service.detect_degeneracy(spectrum)
        return [bound_cor4(cfg), bound_cor5(cfg, verdict.token)]

    reports = [bound_thm1(cfg), bound_cor1(cfg), bound_thm2(cfg)]
    reports.append(bound_thm4(cfg, structure_service.detect_degeneracy(cfg).token))
    if cfg.n >= 2:
        relaxed = structure_service.detect_degeneracy(cfg, allow_minus_one=True)
        reports.append(bound_cor3(cfg.n, cfg, relaxed.token))
    logger.info(f"Computed {len(reports)} bounds for n={cfg.n}")
    return reports
