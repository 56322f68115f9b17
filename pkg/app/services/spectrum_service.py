# Angle arithmetic, power sum / cosine sum evaluation and closed-form partial sums
import logging
import math
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import ClosedFormError, ConfigError, ConjugacyError, HypothesisError
from app.models.data_models import (
    BasisDecl,
    CosineConfig,
    ExactAngle,
    FloatAngle,
    SpectralNode,
    SpectrumConfig,
    abs_coefficient,
    conj,
    is_positive_real,
)
from app.models.report_models import AveragingCertificate, ValidationReport

logger = logging.getLogger(__name__)

AnyAngle = Union[ExactAngle, FloatAngle]

# Fractional bits kept in the high part of a split phase; k * hi stays exact for |k| < 2**31.
_SPLIT_BITS = 22


# --- Angles ---

def _check_angle(angle: AnyAngle, basis: BasisDecl, field: str = "angle") -> None:
    if isinstance(angle, ExactAngle) and len(angle.coeffs) != basis.size:
        raise ConfigError(
            f"Angle has {len(angle.coeffs)} basis coefficients but the basis declares {basis.size}.",
            field=f"{field}.coeffs",
        )


def _irrational_total(angle: AnyAngle, basis: BasisDecl) -> mpf:
    """sum_i c_i beta_i (unreduced) for exact angles, the value itself for float angles."""
    if isinstance(angle, FloatAngle):
        return mpf(str(angle.value))
    total = mpf(0)
    for c, beta in zip(angle.coeffs, basis.values):
        if c:
            total += c * mpf(str(beta))
    return total


def angle_value(angle: AnyAngle, basis: BasisDecl, precision_bits: Optional[int] = None) -> mpf:
    """Returns (r + sum_i c_i beta_i) mod 1 at the working precision."""
    _check_angle(angle, basis)
    with mp.workprec(precision_bits or settings.precision_bits):
        if isinstance(angle, FloatAngle):
            return mpf(str(angle.value))
        x = mpf(angle.rational.numerator) / angle.rational.denominator + _irrational_total(angle, basis)
        return x - mp.floor(x)


def _node_phase(angle: AnyAngle, basis: BasisDecl, k: int) -> mpf:
    """k * alpha mod 1; the rational part is reduced exactly. Call inside a workprec block."""
    if isinstance(angle, FloatAngle):
        x = k * mpf(str(angle.value))
        return x - mp.floor(x)
    rational = (k * angle.rational) % 1
    irrational = k * _irrational_total(angle, basis)
    x = mpf(rational.numerator) / rational.denominator + irrational - mp.floor(irrational)
    return x - mp.floor(x)


def _circular_distance(x: float, y: float) -> float:
    d = abs(x - y) % 1.0
    return min(d, 1.0 - d)


def _angle_tolerance(a: AnyAngle, b: AnyAngle) -> float:
    bits = min(
        a.precision_bits if isinstance(a, FloatAngle) else 1024,
        b.precision_bits if isinstance(b, FloatAngle) else 1024,
    )
    return max(settings.conjugate_tol, 2.0 ** -(bits - 2))


def same_angle(a: AnyAngle, b: AnyAngle, basis: BasisDecl) -> bool:
    if isinstance(a, ExactAngle) and isinstance(b, ExactAngle):
        return a.rational == b.rational and a.coeffs == b.coeffs
    xa = float(angle_value(a, basis))
    xb = float(angle_value(b, basis))
    return _circular_distance(xa, xb) <= _angle_tolerance(a, b)


def is_unit_angle(angle: AnyAngle, basis: BasisDecl) -> bool:
    """True when z = exp(2 pi i alpha) equals 1."""
    if isinstance(angle, ExactAngle):
        return angle.is_zero
    return _circular_distance(float(angle.value), 0.0) <= _angle_tolerance(angle, angle)


def _coefficients_close(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(complex(a) - complex(b)) <= settings.conjugate_tol * max(1.0, abs(complex(a)))


# --- Validation ---

def _require_structure(cfg: SpectrumConfig) -> None:
    if cfg.n == 0:
        raise ConfigError("Config has no nodes.", field="nodes")
    for idx, node in enumerate(cfg.nodes):
        _check_angle(node.angle, cfg.basis, field=f"nodes[{idx}].angle")


def conjugate_partners(cfg: SpectrumConfig) -> Optional[Tuple[int, ...]]:
    """Matches every node to a node carrying (conj b, -alpha); None if the multiset is not closed."""
    used = [False] * cfg.n
    partners: List[int] = []
    for node in cfg.nodes:
        target_angle = node.angle.negate()
        target_b = conj(node.b)
        for j, other in enumerate(cfg.nodes):
            if used[j]:
                continue
            if same_angle(other.angle, target_angle, cfg.basis) and _coefficients_close(other.b, target_b):
                used[j] = True
                partners.append(j)
                break
        else:
            return None
    return tuple(partners)


def _pairwise_distinct(angles: Sequence[AnyAngle], basis: BasisDecl) -> bool:
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            if same_angle(angles[i], angles[j], basis):
                return False
    return True


def validate_config(cfg: SpectrumConfig) -> ValidationReport:
    """
    Checks the hypotheses shared by the one-sided theorems.

    Structural errors (no nodes, basis mismatch) raise ConfigError; hypothesis
    failures are only reported.
    """
    _require_structure(cfg)
    problems: List[str] = []

    partners = conjugate_partners(cfg)
    if partners is None:
        problems.append("Config is not conjugate-closed.")
    unit_nodes = [i for i, node in enumerate(cfg.nodes) if is_unit_angle(node.angle, cfg.basis)]
    if unit_nodes:
        problems.append(f"z = 1 present at node(s) {unit_nodes}.")
    distinct = _pairwise_distinct(cfg.angles, cfg.basis)
    if not distinct:
        problems.append("Angles are not pairwise distinct.")
    nonzero = all(abs(complex(b)) > 0 for b in cfg.coefficients)
    if not nonzero:
        problems.append("Zero coefficient present.")
    positive = all(is_positive_real(b) for b in cfg.coefficients)

    report = ValidationReport(
        n=cfg.n,
        conjugate_closed=partners is not None,
        no_unit_node=not unit_nodes,
        distinct=distinct,
        all_b_nonzero=nonzero,
        all_b_positive_real=positive,
        exact=cfg.is_exact,
        conjugate_partner=partners,
        problems=tuple(problems),
    )
    logger.debug(f"Validated config n={cfg.n}: Thm1 hypotheses {report.thm1_hypotheses}, "
                 f"Thm2 hypotheses {report.thm2_hypotheses}")
    return report


def validate_cosine_config(cfg: CosineConfig) -> None:
    """Raises ConfigError unless the alphas are distinct and strictly inside (0, 1/2)."""
    if cfg.m == 0:
        raise ConfigError("Cosine config has no pairs.", field="pairs")
    for idx, pair in enumerate(cfg.pairs):
        _check_angle(pair.alpha, cfg.basis, field=f"pairs[{idx}].alpha")
        value = angle_value(pair.alpha, cfg.basis)
        if not (0 < value < mpf(1) / 2):
            raise ConfigError("alpha must lie strictly between 0 and 1/2.", field=f"pairs[{idx}].alpha")
    if not _pairwise_distinct(cfg.alphas, cfg.basis):
        raise ConfigError("alphas must be pairwise distinct.", field="pairs")


# --- Evaluation ---

def imag_tolerance(cfg: SpectrumConfig) -> float:
    max_b = max((abs_coefficient(b) for b in cfg.coefficients), default=1.0)
    return settings.imag_tol * max(1.0, cfg.n * max_b)


def _mp_parts(b) -> Tuple[mpf, mpf]:
    if isinstance(b, Fraction):
        return mpf(b.numerator) / b.denominator, mpf(0)
    return mpf(b.real), mpf(b.imag)


def eval_power_sum(cfg: SpectrumConfig, k: int, precision_bits: Optional[int] = None) -> float:
    """Re(sum_j b_j exp(2 pi i k alpha_j)); the imaginary residue must vanish."""
    _require_structure(cfg)
    with mp.workprec(precision_bits or settings.precision_bits):
        re = mpf(0)
        im = mpf(0)
        for node in cfg.nodes:
            theta = _node_phase(node.angle, cfg.basis, int(k))
            c = mp.cospi(2 * theta)
            s = mp.sinpi(2 * theta)
            br, bi = _mp_parts(node.b)
            re += br * c - bi * s
            im += br * s + bi * c
        residue = float(abs(im))
        value = float(re)
    tolerance = imag_tolerance(cfg)
    if residue >= tolerance:
        logger.error(f"Conjugate closure broken: imaginary residue {residue:.3e} at k={k}")
        raise ConjugacyError(int(k), residue, tolerance)
    return value


def _mp_real(t) -> mpf:
    if isinstance(t, mpf):
        return t
    if isinstance(t, Fraction):
        return mpf(t.numerator) / t.denominator
    return mpf(str(t))


def eval_cosine_sum(cfg: CosineConfig, t, precision_bits: Optional[int] = None) -> float:
    """sum_j b_j cos(2 pi alpha_j t) for real or integer t."""
    prec = precision_bits or settings.precision_bits
    with mp.workprec(prec):
        total = mpf(0)
        for pair in cfg.pairs:
            _check_angle(pair.alpha, cfg.basis)
            if isinstance(t, (int, np.integer)):
                theta = _node_phase(pair.alpha, cfg.basis, int(t))
            else:
                theta = angle_value(pair.alpha, cfg.basis, prec) * _mp_real(t)
            b = pair.b
            weight = mpf(b.numerator) / b.denominator if isinstance(b, Fraction) else mpf(b)
            total += weight * mp.cospi(2 * theta)
        return float(total)


class PhaseTable(NamedTuple):
    """Per-node phase data: alpha = num/den + (hi + lo) with hi on a 2**-22 grid."""

    num: np.ndarray
    den: np.ndarray
    hi: np.ndarray
    lo: np.ndarray


def _split(value: mpf) -> Tuple[float, float]:
    """Splits value mod 1 into a 2**-22 grid part and a float remainder. Call inside a workprec block."""
    value -= mp.floor(value)
    scale = 2 ** _SPLIT_BITS
    high = mp.floor(value * scale) / scale
    return float(high), float(value - high)


def build_phase_table(angles: Sequence[AnyAngle], basis: BasisDecl,
                      precision_bits: Optional[int] = None) -> PhaseTable:
    num, den, hi, lo = [], [], [], []
    with mp.workprec(precision_bits or settings.precision_bits):
        for angle in angles:
            _check_angle(angle, basis)
            if isinstance(angle, ExactAngle):
                num.append(angle.rational.numerator)
                den.append(angle.rational.denominator)
            else:
                num.append(0)
                den.append(1)
            high, low = _split(_irrational_total(angle, basis))
            hi.append(high)
            lo.append(low)
    return PhaseTable(
        num=np.asarray(num, dtype=np.int64),
        den=np.asarray(den, dtype=np.int64),
        hi=np.asarray(hi, dtype=np.float64),
        lo=np.asarray(lo, dtype=np.float64),
    )


def phase_table_from_values(values: Sequence[mpf], precision_bits: Optional[int] = None) -> PhaseTable:
    """Phase table for raw real frequencies (no rational part)."""
    with mp.workprec(precision_bits or settings.precision_bits):
        parts = [_split(mpf(v)) for v in values]
    size = len(parts)
    return PhaseTable(
        num=np.zeros(size, dtype=np.int64),
        den=np.ones(size, dtype=np.int64),
        hi=np.asarray([p[0] for p in parts], dtype=np.float64),
        lo=np.asarray([p[1] for p in parts], dtype=np.float64),
    )


def phases_at(table: PhaseTable, ks) -> np.ndarray:
    """k * alpha_j mod 1 for every k (rows) and node (columns)."""
    ks = np.asarray(ks, dtype=np.int64).reshape(-1, 1)
    rational = (((ks % table.den) * table.num) % table.den) / table.den
    irrational = np.mod(ks * table.hi, 1.0) + ks * table.lo
    return np.mod(rational + irrational, 1.0)


def _coefficient_arrays(coefficients: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    values = np.asarray([complex(b) for b in coefficients], dtype=np.complex128)
    return values.real.copy(), values.imag.copy()


def power_sum_complex(cfg: SpectrumConfig, ks, table: Optional[PhaseTable] = None) -> np.ndarray:
    table = table or build_phase_table(cfg.angles, cfg.basis)
    theta = 2 * np.pi * phases_at(table, ks)
    br, bi = _coefficient_arrays(cfg.coefficients)
    re = np.zeros(theta.shape[0])
    im = np.zeros(theta.shape[0])
    # fixed node order keeps results independent of block size
    for j in range(theta.shape[1]):
        c = np.cos(theta[:, j])
        s = np.sin(theta[:, j])
        re += br[j] * c - bi[j] * s
        im += br[j] * s + bi[j] * c
    return re + 1j * im


def power_sum_values(cfg: SpectrumConfig, ks, table: Optional[PhaseTable] = None) -> np.ndarray:
    """Vectorized eval_power_sum for |k| < 2**31, with the same imaginary residue check."""
    ks = np.asarray(ks, dtype=np.int64)
    values = power_sum_complex(cfg, ks, table)
    if values.size:
        worst = int(np.argmax(np.abs(values.imag)))
        residue = float(abs(values.imag[worst]))
        tolerance = imag_tolerance(cfg)
        if residue >= tolerance:
            logger.error(f"Conjugate closure broken: imaginary residue {residue:.3e} at k={int(ks[worst])}")
            raise ConjugacyError(int(ks[worst]), residue, tolerance)
    return values.real


def cosine_values(cfg: CosineConfig, ts: np.ndarray) -> np.ndarray:
    """Float evaluation on a grid of real t; integer k go through cosine_values_at_integers."""
    alphas = np.asarray([float(angle_value(a, cfg.basis)) for a in cfg.alphas])
    bs = np.asarray([float(b) for b in cfg.coefficients])
    ts = np.asarray(ts, dtype=np.float64)
    total = np.zeros_like(ts)
    for alpha, b in zip(alphas, bs):
        total += b * np.cos(2 * np.pi * alpha * ts)
    return total


def cosine_values_at_integers(cfg: CosineConfig, ks, table: Optional[PhaseTable] = None) -> np.ndarray:
    table = table or build_phase_table(cfg.alphas, cfg.basis)
    theta = 2 * np.pi * phases_at(table, ks)
    bs = [float(b) for b in cfg.coefficients]
    total = np.zeros(theta.shape[0])
    for j, b in enumerate(bs):
        total += b * np.cos(theta[:, j])
    return total


def period(angles: Sequence[AnyAngle]) -> Optional[int]:
    """Common period L of k -> exp(2 pi i k alpha_j) when every angle is rational."""
    if not all(isinstance(a, ExactAngle) and a.is_rational for a in angles):
        return None
    return math.lcm(*(a.rational.denominator for a in angles)) if angles else 1


# --- Closed-form partial sums ---

def _unit_powers(table: PhaseTable, k: int) -> np.ndarray:
    return np.exp(2j * np.pi * phases_at(table, [k])[0])


def direct_sums(cfg: SpectrumConfig, N: int, K: int, block: Optional[int] = None) -> Tuple[complex, float]:
    """(sum_k s_k, sum_k s_k^2) over k = N .. N+K-1 by direct evaluation."""
    table = build_phase_table(cfg.angles, cfg.basis)
    block = block or settings.scan_block
    sigma1 = 0j
    sigma2 = 0.0
    for start in range(N, N + K, block):
        ks = np.arange(start, min(start + block, N + K), dtype=np.int64)
        values = power_sum_complex(cfg, ks, table)
        sigma1 += complex(values.sum())
        sigma2 += float(np.sum(np.abs(values) ** 2))
    return sigma1, sigma2


def _require_K(K: int) -> None:
    if K < 1:
        raise ConfigError("K must be at least 1.", field="K")


def sigma1_closed_form(cfg: SpectrumConfig, N: int, K: int, verify: bool = False) -> AveragingCertificate:
    """
    Sigma_1 = sum_j b_j (z_j^N - z_j^{N+K}) / (1 - z_j) with C_1 = sum_j 2|b_j| / |1 - z_j|.

    Args:
        verify: also compare against direct summation within closed_form_tol.
    """
    _require_structure(cfg)
    _require_K(K)
    if any(is_unit_angle(a, cfg.basis) for a in cfg.angles):
        raise HypothesisError("Sigma_1 closed form needs every z_j != 1.")
    table = build_phase_table(cfg.angles, cfg.basis)
    b = np.asarray([complex(x) for x in cfg.coefficients])
    z = _unit_powers(table, 1)
    denominator = 1 - z
    sigma1 = complex(np.sum(b * (_unit_powers(table, N) - _unit_powers(table, N + K)) / denominator))
    C1 = float(np.sum(2 * np.abs(b) / np.abs(denominator)))
    sum_abs_b2 = float(np.sum(np.abs(b) ** 2))

    if verify:
        direct, _ = direct_sums(cfg, N, K)
        scale = max(1.0, K * float(np.sum(np.abs(b))))
        if abs(sigma1 - direct) > settings.closed_form_tol * scale:
            raise ClosedFormError(f"Sigma_1 closed form {sigma1} disagrees with direct sum {direct}.")
    return AveragingCertificate(N=N, K=K, sigma1=sigma1, C1=C1, sum_abs_b2=sum_abs_b2)


def sigma2_closed_form(cfg: SpectrumConfig, N: int, K: int, verify: bool = False) -> AveragingCertificate:
    """
    Sigma_2 = K sum|b_i|^2 + sum_{i != j} b_i conj(b_j) ((z_i/z_j)^N - (z_i/z_j)^{N+K}) / (1 - z_i/z_j)
    with C_2 = sum_{i != j} 2|b_i b_j| / |1 - z_i/z_j|.
    """
    _require_structure(cfg)
    _require_K(K)
    if not _pairwise_distinct(cfg.angles, cfg.basis):
        raise HypothesisError("Sigma_2 closed form needs pairwise distinct z_j; collapse repeats first.")
    table = build_phase_table(cfg.angles, cfg.basis)
    b = np.asarray([complex(x) for x in cfg.coefficients])
    z1 = _unit_powers(table, 1)
    zN = _unit_powers(table, N)
    zNK = _unit_powers(table, N + K)

    off_diagonal = ~np.eye(cfg.n, dtype=bool)
    ratio = np.outer(z1, z1.conj())
    ratio_N = np.outer(zN, zN.conj())
    ratio_NK = np.outer(zNK, zNK.conj())
    weights = np.outer(b, b.conj())
    denominator = np.where(off_diagonal, 1 - ratio, 1.0)
    cross = np.where(off_diagonal, weights * (ratio_N - ratio_NK) / denominator, 0.0)
    sum_abs_b2 = float(np.sum(np.abs(b) ** 2))
    sigma2 = complex(K * sum_abs_b2 + np.sum(cross))
    C2 = float(np.sum(np.where(off_diagonal, 2 * np.abs(weights) / np.abs(denominator), 0.0)))

    if verify:
        _, direct = direct_sums(cfg, N, K)
        scale = max(1.0, K * sum_abs_b2 + C2)
        if abs(sigma2 - direct) > settings.closed_form_tol * scale:
            raise ClosedFormError(f"Sigma_2 closed form {sigma2} disagrees with direct sum {direct}.")
    return AveragingCertificate(N=N, K=K, sigma2=sigma2, C2=C2, sum_abs_b2=sum_abs_b2)


def averaging_certificate(cfg: SpectrumConfig, N: int, K: int, verify: bool = False) -> AveragingCertificate:
    first = sigma1_closed_form(cfg, N, K, verify=verify)
    second = sigma2_closed_form(cfg, N, K, verify=verify)
    return first.model_copy(update={"sigma2": second.sigma2, "C2": second.C2})


# --- Repeated angles ---

def collapse_repeats(cfg: SpectrumConfig) -> SpectrumConfig:
    """Merges equal angles by summing their (positive real) coefficients."""
    _require_structure(cfg)
    groups: List[List[int]] = []
    for idx, node in enumerate(cfg.nodes):
        for group in groups:
            if same_angle(cfg.nodes[group[0]].angle, node.angle, cfg.basis):
                group.append(idx)
                break
        else:
            groups.append([idx])
    if len(groups) == cfg.n:
        return cfg
    if not all(is_positive_real(b) for b in cfg.coefficients):
        raise HypothesisError("Repeated angles can only be merged when every b_j is a positive real.")

    merged = []
    for group in groups:
        total = sum((cfg.nodes[i].b for i in group), Fraction(0))
        merged.append(SpectralNode(b=total, angle=cfg.nodes[group[0]].angle))
    collapsed = SpectrumConfig(basis=cfg.basis, nodes=tuple(merged))

    before_sum = sum(cfg.coefficients, Fraction(0))
    after_sum = sum(collapsed.coefficients, Fraction(0))
    exact = all(isinstance(b, Fraction) for b in cfg.coefficients)
    if exact:
        sums_agree = before_sum == after_sum
        squares_grow = sum(b * b for b in collapsed.coefficients) >= sum(b * b for b in cfg.coefficients)
    else:
        sums_agree = abs(complex(before_sum) - complex(after_sum)) <= settings.conjugate_tol * max(1.0, abs(complex(before_sum)))
        squares_grow = (sum(abs(complex(b)) ** 2 for b in collapsed.coefficients)
                        >= sum(abs(complex(b)) ** 2 for b in cfg.coefficients) * (1 - settings.conjugate_tol))
    if not (sums_agree and squares_grow):
        raise ArithmeticError("Collapsing repeats violated coefficient conservation.")
    logger.info(f"Collapsed {cfg.n} nodes into {collapsed.n} distinct angles.")
    return collapsed


# --- Generators ---

def extremal_example(n: int) -> SpectrumConfig:
    """b_j = 1, alpha_j = j / (n + 1): the sum is n at multiples of n + 1 and -1 elsewhere."""
    if n < 1:
        raise ConfigError("n must be at least 1.", field="n")
    nodes = tuple(SpectralNode(b=Fraction(1), angle=ExactAngle(rational=Fraction(j, n + 1)))
                  for j in range(1, n + 1))
    return SpectrumConfig(nodes=nodes)


def to_spectrum(cfg: CosineConfig) -> SpectrumConfig:
    """Nodes (b_j, alpha_j) then (b_m, -alpha_m) ... (b_1, -alpha_1); sums to 2 * cosine sum."""
    forward = [SpectralNode(b=pair.b, angle=pair.alpha) for pair in cfg.pairs]
    backward = [SpectralNode(b=pair.b, angle=pair.alpha.negate()) for pair in reversed(cfg.pairs)]
    return SpectrumConfig(basis=cfg.basis, nodes=tuple(forward + backward))
