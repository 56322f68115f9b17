# Infimum scans, continuous minima, Kronecker witnesses and theorem verification
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpf
from scipy import optimize
from sympy import Matrix, Rational

from app.core.config import settings
from app.core.errors import BudgetExhausted, ConfigError, HypothesisError, PrecisionError
from app.models.data_models import BasisDecl, CosineConfig, ExactAngle, SpectrumConfig
from app.models.report_models import (
    BoundReport,
    CertificationReport,
    ContinuousMinimum,
    GroupDecomposition,
    HypothesisCheck,
    ReturnTimeReport,
    ScanResult,
    TheoremId,
    Verdict,
    VerificationRecord,
    WitnessReport,
)
from app.services import bounds_service, spectrum_service, structure_service
from app.services.lattice_service import lll_reduce, simultaneous_approximation_basis

logger = logging.getLogger(__name__)

RESTRICT_POLICIES = ("all", "odd", "torsion")

# phases_at keeps k * hi exact only below this
_K_LIMIT = 2 ** 31
_POLISH_CANDIDATES = 8
_EXACT_SLACK = 1e-9

AnyConfig = Union[SpectrumConfig, CosineConfig]


# --- Discrete scans ---

def _torsion_order(angles: Sequence) -> int:
    denominators = [a.rational.denominator for a in angles if isinstance(a, ExactAngle)]
    return math.lcm(*denominators) if denominators else 1


def _progression(restrict: str, start: int, K: int, torsion: int) -> Tuple[int, int]:
    """First scanned k and stride for a restrict policy."""
    if restrict not in RESTRICT_POLICIES:
        raise ConfigError(f"Unknown restrict policy '{restrict}'.", field="restrict")
    if K < 1:
        raise ConfigError("Scan budget K must be at least 1.", field="K")
    if restrict == "odd":
        first, stride = (start if start % 2 else start + 1), 2
    elif restrict == "torsion":
        first, stride = -(-start // torsion) * torsion, torsion
    else:
        first, stride = start, 1
    if abs(first) + stride * (K - 1) >= _K_LIMIT:
        raise ConfigError(f"Scanned k would exceed {_K_LIMIT}; lower the budget.", field="K")
    return first, stride


def _scan(evaluate: Callable[[np.ndarray], np.ndarray], first: int, stride: int, K: int,
          restrict: str, workers: Optional[int], history: bool) -> ScanResult:
    block = settings.scan_block
    step = max(1, K // settings.history_points)

    def run_block(offset: int):
        count = min(block, K - offset)
        ks = first + stride * np.arange(offset, offset + count, dtype=np.int64)
        values = evaluate(ks)
        idx = int(np.argmin(values))
        samples = []
        if history:
            prefix = np.minimum.accumulate(values)
            for g in range(offset, offset + count):
                if (g + 1) % step == 0 or g == K - 1:
                    samples.append((int(ks[g - offset]), float(prefix[g - offset])))
        return int(ks[idx]), float(values[idx]), samples

    offsets = range(0, K, block)
    workers = workers or settings.scan_workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, offsets))
    else:
        results = [run_block(offset) for offset in offsets]

    # ordered reduction: strict improvement only, so the smallest k wins ties
    best_k, best_value = first, math.inf
    trace: List[Tuple[int, float]] = []
    for k, value, samples in results:
        trace.extend((sk, min(sv, best_value)) for sk, sv in samples)
        if value < best_value:
            best_k, best_value = k, value
    return ScanResult(k_best=best_k, value_best=best_value, K_budget=K, restrict=restrict,
                      history=trace if history else None)


def scan_infimum(cfg: SpectrumConfig, K: Optional[int] = None, restrict: str = "all", start: int = 1,
                 torsion: Optional[int] = None, workers: Optional[int] = None,
                 history: bool = False) -> ScanResult:
    """
    Minimum of s_k over K scanned k >= start.

    restrict selects the progression: every k, odd k only (the z = -1 reduction), or
    multiples of the torsion order |T| (lcm of the rational-part denominators unless given).
    Blocks may run on several threads; the reduction is ordered, so results do not depend
    on the worker count.
    """
    K = settings.scan_budget if K is None else int(K)
    torsion = torsion or _torsion_order(cfg.angles)
    first, stride = _progression(restrict, start, K, torsion)
    table = spectrum_service.build_phase_table(cfg.angles, cfg.basis)
    logger.info(f"Scanning n={cfg.n} config: K={K}, restrict={restrict}, first k={first}")
    result = _scan(lambda ks: spectrum_service.power_sum_values(cfg, ks, table),
                   first, stride, K, restrict, workers, history)
    logger.info(f"Scan finished: min {result.value_best} at k={result.k_best}")
    return result


def scan_cosine_infimum(cfg: CosineConfig, K: Optional[int] = None, restrict: str = "all", start: int = 1,
                        workers: Optional[int] = None, history: bool = False) -> ScanResult:
    """Minimum of sum_j b_j cos(2 pi alpha_j k) over K scanned k."""
    spectrum_service.validate_cosine_config(cfg)
    K = settings.scan_budget if K is None else int(K)
    first, stride = _progression(restrict, start, K, _torsion_order(cfg.alphas))
    table = spectrum_service.build_phase_table(cfg.alphas, cfg.basis)
    result = _scan(lambda ks: spectrum_service.cosine_values_at_integers(cfg, ks, table),
                   first, stride, K, restrict, workers, history)
    logger.info(f"Cosine scan finished: min {result.value_best} at k={result.k_best}")
    return result


# --- Continuous minima ---

def _polish_line(f: Callable[[float], float], fprime: Callable[[float], float],
                 t: float, h: float, polish_iters: int) -> float:
    lo, hi = t - h, t + h
    if fprime(lo) < 0 < fprime(hi):
        return optimize.brentq(fprime, lo, hi, xtol=1e-15, maxiter=max(polish_iters, 100))
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12, "maxiter": max(polish_iters, 100)})
    return float(res.x)


def continuous_minimum_time(cfg: CosineConfig, resolution: Optional[float] = None,
                            polish_iters: int = 100, horizon: Optional[float] = None) -> ContinuousMinimum:
    """
    Grid scan of f(t) = sum_j b_j cos(2 pi alpha_j t) over [0, T_scan] and local polish.

    T_scan is the common period for rational alphas (f is even, so one period suffices),
    otherwise the configured horizon.

    Raises:
        PrecisionError: resolution above 1 / (4 max alpha_j).
    """
    spectrum_service.validate_cosine_config(cfg)
    resolution = resolution or settings.time_resolution
    alphas = np.asarray([float(spectrum_service.angle_value(a, cfg.basis)) for a in cfg.alphas])
    bs = np.asarray([float(b) for b in cfg.coefficients])
    limit = 1.0 / (4.0 * float(alphas.max()))
    if resolution > limit:
        raise PrecisionError(f"Resolution {resolution} is coarser than {limit:.6g} for these frequencies.")

    L = spectrum_service.period(cfg.alphas)
    t_scan = float(L) if L is not None else float(horizon or settings.time_horizon)
    points = int(math.ceil(t_scan / resolution)) + 1
    step = t_scan / (points - 1)

    def f(t: float) -> float:
        return float(np.dot(bs, np.cos(2 * np.pi * alphas * t)))

    def fprime(t: float) -> float:
        return float(-2 * np.pi * np.dot(bs * alphas, np.sin(2 * np.pi * alphas * t)))

    candidates: List[Tuple[float, float]] = []
    chunk = 1 << 20
    for offset in range(0, points, chunk):
        ts = np.arange(offset, min(offset + chunk, points), dtype=np.float64) * step
        values = spectrum_service.cosine_values(cfg, ts)
        top = np.argsort(values, kind="stable")[:_POLISH_CANDIDATES]
        candidates.extend((float(values[i]), float(ts[i])) for i in top)
    candidates.sort()

    best_t, best_value = None, math.inf
    for _, t in candidates[:_POLISH_CANDIDATES]:
        t_star = _polish_line(f, fprime, t, step, polish_iters)
        value = f(t_star)
        if value < best_value or (value == best_value and t_star < best_t):
            best_t, best_value = t_star, value
    logger.info(f"Continuous minimum over [0, {t_scan}]: {best_value} at t={best_t}")
    return ContinuousMinimum(t_star=best_t, value=best_value, method="grid+polish",
                             certified_resolution=step)


def _torus_values(A: np.ndarray, br: np.ndarray, bi: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    phases = 2 * np.pi * (thetas @ A.T)
    return np.cos(phases) @ br - np.sin(phases) @ bi


def continuous_minimum_periodic(cfg: SpectrumConfig, workers: Optional[int] = None) -> ContinuousMinimum:
    """Exact minimum over one full period when every angle is rational (no free torus part)."""
    L = spectrum_service.period(cfg.angles)
    if L is None:
        raise HypothesisError("Config has irrational angles; it is not periodic in k.")
    scan = scan_infimum(cfg, K=L, restrict="all", workers=workers)
    logger.info(f"Periodic config: exhaustive minimum {scan.value_best} over period {L}")
    return ContinuousMinimum(t_star=float(scan.k_best), value=scan.value_best,
                             method="period-exhaustive", certified_resolution=0.0)


def continuous_minimum_torus(g: GroupDecomposition, coefficients: Sequence,
                             grid_per_dim: Optional[int] = None, polish_iters: int = 200,
                             seed: Optional[int] = None) -> ContinuousMinimum:
    """
    Minimum of Re sum_j b_j omega^{a_j} over the torus (S^1)^d on the identity torsion coset.

    d <= 3 uses a full grid (capped at torus_max_points), d >= 4 a seeded random multistart;
    the best candidates are polished with L-BFGS. Torus points are returned in turns.

    Raises:
        HypothesisError: d = 0 (pure torsion; evaluate exhaustively instead).
    """
    if g.d == 0:
        raise HypothesisError("Torus dimension is 0; the sum is periodic, scan one period instead.")
    A = np.asarray(g.exponent_matrix, dtype=np.float64).reshape(len(g.exponent_matrix), g.d)
    b = np.asarray([complex(x) for x in coefficients], dtype=np.complex128)
    br, bi = b.real.copy(), b.imag.copy()

    def value(theta: np.ndarray) -> float:
        return float(_torus_values(A, br, bi, theta.reshape(1, -1))[0])

    def gradient(theta: np.ndarray) -> np.ndarray:
        phases = 2 * np.pi * (A @ theta)
        weights = -br * np.sin(phases) - bi * np.cos(phases)
        return 2 * np.pi * (A.T @ weights)

    candidates: List[Tuple[float, Tuple[float, ...]]] = []
    if g.d <= 3:
        per_dim = grid_per_dim or settings.torus_grid
        per_dim = max(2, min(per_dim, int(round(settings.torus_max_points ** (1.0 / g.d)))))
        total = per_dim ** g.d
        chunk = 1 << 18
        for offset in range(0, total, chunk):
            flat = np.arange(offset, min(offset + chunk, total))
            thetas = np.stack(np.unravel_index(flat, (per_dim,) * g.d), axis=1) / per_dim
            values = _torus_values(A, br, bi, thetas)
            top = np.argsort(values, kind="stable")[:_POLISH_CANDIDATES]
            candidates.extend((float(values[i]), tuple(thetas[i])) for i in top)
        method, resolution = "torus-grid+polish", 1.0 / per_dim
    else:
        rng = np.random.default_rng(settings.seed if seed is None else seed)
        cloud_size = max(4096, 64 * settings.torus_multistart)
        thetas = rng.random((cloud_size, g.d))
        values = _torus_values(A, br, bi, thetas)
        top = np.argsort(values, kind="stable")[:settings.torus_multistart]
        candidates.extend((float(values[i]), tuple(thetas[i])) for i in top)
        method, resolution = "torus-multistart+polish", cloud_size ** (-1.0 / g.d)
    candidates.sort()

    best_point, best_value = None, math.inf
    limit = _POLISH_CANDIDATES if g.d <= 3 else settings.torus_multistart
    for start_value, point in candidates[:limit]:
        res = optimize.minimize(value, np.asarray(point), jac=gradient, method="L-BFGS-B",
                                options={"maxiter": polish_iters, "gtol": 1e-10})
        polished, x = float(res.fun), np.mod(res.x, 1.0)
        if start_value < polished:
            polished, x = start_value, np.asarray(point)
        if polished < best_value:
            best_point, best_value = tuple(float(v) for v in x), polished
    logger.info(f"Torus minimum (d={g.d}, {method}): {best_value}")
    return ContinuousMinimum(torus_point=best_point, value=best_value, method=method,
                             certified_resolution=resolution)


# --- Kronecker witnesses ---

def _mp_number(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, (int, np.integer)):
        return mpf(int(x))
    return mpf(x)


def _is_integer(x) -> bool:
    if isinstance(x, (int, np.integer)):
        return True
    if isinstance(x, Fraction):
        return x.denominator == 1
    return float(x).is_integer()


def _witness_report(betas: Sequence[mpf], t0, k: int, delta: float, lambdas, Lambda: int,
                    torsion: int, method: str, effort_used: int) -> Tuple[WitnessReport, float]:
    """Exact re-check of a candidate k at twice the working precision."""
    with mp.workprec(2 * settings.precision_bits):
        t = _mp_number(t0)
        raw = [beta * (t - k) for beta in betas]
        m = [int(mp.nint(x)) for x in raw]
        residuals = [x - mi for x, mi in zip(raw, m)]
        worst_beta = float(max(abs(r) for r in residuals))
        k_corrections = tuple(sum(l * mi for l, mi in zip(row, m)) for row in lambdas)
        achieved = float(max(abs(mp.fsum(l * r for l, r in zip(row, residuals))) for row in lambdas))
    report = WitnessReport(k=int(k), m=tuple(m), k_corrections=k_corrections, t0=float(t0), delta=delta,
                           delta_achieved=achieved, Lambda=Lambda, torsion=torsion, method=method,
                           effort_used=effort_used)
    return report, worst_beta


def _lattice_candidates(betas: Sequence[mpf], t0, target: float, torsion: int) -> List[int]:
    """Integers kappa with kappa * torsion * beta_i - beta_i * t0 near Z, via LLL on the embedding basis."""
    d = len(betas)
    expected = max(2, int(math.ceil(target ** (-d))))
    found: List[int] = []
    with mp.workprec(settings.precision_bits + 64):
        t = _mp_number(t0)
        for boost in range(6):
            scale = int(mp.ceil(mpf(expected) * 2 ** boost / target))
            steps = [int(mp.nint(scale * torsion * beta)) for beta in betas]
            targets = [int(mp.nint(scale * beta * t)) for beta in betas]
            rows = lll_reduce(simultaneous_approximation_basis(steps, targets, scale, expected))
            for row in rows:
                for kappa in (row[0], -row[0]):
                    if kappa not in found:
                        found.append(kappa)
    return found


def _witness_search(betas: Sequence[mpf], t0, delta: float, effort: Optional[int], torsion: int,
                    min_k: int, lambdas: Optional[Sequence[Sequence[int]]]) -> WitnessReport:
    if delta <= 0:
        raise ConfigError("delta must be positive.", field="delta")
    if torsion < 1:
        raise ConfigError("Torsion order must be at least 1.", field="torsion")
    d = len(betas)
    if lambdas is None:
        lambdas = tuple(tuple(1 if i == j else 0 for i in range(d)) for j in range(d))
    lambdas = tuple(tuple(int(x) for x in row) for row in lambdas)
    if any(len(row) != d for row in lambdas):
        raise ConfigError(f"Every lambda row needs {d} entries.", field="lambdas")
    Lambda = max([1] + [sum(abs(x) for x in row) for row in lambdas])
    target = delta / Lambda
    effort = int(effort or settings.witness_effort)

    if _is_integer(t0) and int(t0) % torsion == 0 and int(t0) >= min_k:
        report, _ = _witness_report(betas, t0, int(t0), delta, lambdas, Lambda, torsion, "exact", 0)
        return report

    kappa0 = -(-min_k // torsion) if min_k > 0 else 0
    if abs(kappa0 + effort) * torsion >= _K_LIMIT:
        effort = max(1, _K_LIMIT // torsion - abs(kappa0) - 1)
        logger.warning(f"Witness effort clamped to {effort} to keep k below {_K_LIMIT}")
    table = spectrum_service.phase_table_from_values(betas)
    with mp.workprec(settings.precision_bits):
        t = _mp_number(t0)
        goal = np.asarray([float((beta * t) - mp.floor(beta * t)) for beta in betas])

    best_k, best_err, used = None, math.inf, 0
    for offset in range(0, effort, settings.scan_block):
        count = min(settings.scan_block, effort - offset)
        ks = torsion * (kappa0 + np.arange(offset, offset + count, dtype=np.int64))
        diff = goal - spectrum_service.phases_at(table, ks)
        err = np.max(np.abs(diff - np.round(diff)), axis=1)
        used += count
        idx = int(np.argmin(err))
        if err[idx] < best_err:
            best_k, best_err = int(ks[idx]), float(err[idx])
        for hit in np.nonzero(err < target)[0]:
            report, worst = _witness_report(betas, t0, int(ks[hit]), delta, lambdas, Lambda, torsion, "scan", used)
            if worst < target:
                logger.info(f"Kronecker witness k={report.k} after {used} candidates "
                            f"(delta achieved {report.delta_achieved:.3e})")
                return report

    logger.info(f"Scan of {used} candidates found no witness; trying lattice reduction")
    for kappa in _lattice_candidates(betas, t0, target, torsion):
        k = kappa * torsion
        if k < min_k:
            continue
        report, worst = _witness_report(betas, t0, k, delta, lambdas, Lambda, torsion, "lattice", used)
        if worst < target:
            logger.info(f"Lattice witness k={k} (delta achieved {report.delta_achieved:.3e})")
            return report

    best, _ = _witness_report(betas, t0, best_k, delta, lambdas, Lambda, torsion, "scan", used)
    logger.warning(f"Witness budget exhausted: best delta {best.delta_achieved:.3e} at k={best_k}")
    raise BudgetExhausted(f"No witness within delta={delta} after {used} candidates.", best=best)


def kronecker_witness(basis: BasisDecl, t0, delta: float, effort: Optional[int] = None, torsion: int = 1,
                      min_k: int = 0, lambdas: Optional[Sequence[Sequence[int]]] = None) -> WitnessReport:
    """
    Integer k (a multiple of torsion, k >= min_k) and m_i with |beta_i t0 - beta_i k - m_i| < delta / Lambda.

    With lambdas (rows alpha_j = sum_i lambda_ji beta_i) the corrections k_j = sum_i lambda_ji m_i
    give |alpha_j t0 - alpha_j k - k_j| < delta. Strategies in order: exact hit for integer
    t0, vectorized scan over k, LLL simultaneous approximation.

    Raises:
        BudgetExhausted: carrying the best report found; not a disproof.
    """
    if basis.size == 0:
        raise ConfigError("Kronecker witnesses need a non-empty basis.", field="basis")
    if not basis.independence_asserted:
        raise HypothesisError("Basis independence is not asserted.")
    with mp.workprec(settings.precision_bits):
        betas = [mpf(str(v)) for v in basis.values]
    return _witness_search(betas, t0, delta, effort, torsion, min_k, lambdas)


def dirichlet_return(cfg: SpectrumConfig, delta: float = 0.01, effort: Optional[int] = None) -> ReturnTimeReport:
    """
    Return time k >= 1 with every k alpha_j within delta of an integer, where s_k is
    within 2 pi delta sum|b_j| of sum_j b_j, the supremum of the sum.
    """
    spectrum_service.validate_config(cfg)
    if cfg.is_exact:
        torsion = _torsion_order(cfg.angles)
        rows = [tuple(a.coeffs) for a in cfg.angles]
        with mp.workprec(settings.precision_bits):
            betas = [mpf(str(v)) for v in cfg.basis.values]
        if not betas or not any(any(row) for row in rows):
            k, achieved = torsion, 0.0
        else:
            witness = _witness_search(betas, 0, delta, effort, torsion, 1, rows)
            k, achieved = witness.k, witness.delta_achieved
    else:
        betas = [spectrum_service.angle_value(a, cfg.basis) for a in cfg.angles]
        witness = _witness_search(betas, 0, delta, effort, 1, 1, None)
        k, achieved = witness.k, witness.delta_achieved

    value = spectrum_service.eval_power_sum(cfg, k)
    supremum = float(sum(complex(b) for b in cfg.coefficients).real)
    total_abs = math.fsum(abs(complex(b)) for b in cfg.coefficients)
    report = ReturnTimeReport(k=k, delta_achieved=achieved, sum_at_k=value, supremum=supremum,
                              gap=supremum - value, gap_bound=2 * math.pi * achieved * total_abs)
    logger.info(f"Return time k={k}: s_k={value}, sum b={supremum}")
    return report


# --- c_S = c_T certification ---

def _shifted_basis(cfg: CosineConfig) -> List[mpf]:
    """
    Basis beta'_i = beta_i + y_i with alpha_j = sum_i c_ji beta'_i exactly.

    Raises:
        HypothesisError: the Q-span of the alphas contains 1.
    """
    C = Matrix([[Rational(c) for c in a.coeffs] for a in cfg.alphas])
    with mp.workprec(settings.precision_bits):
        betas = [mpf(str(v)) for v in cfg.basis.values]
        shifts = []
        for a in cfg.alphas:
            total = mpf(a.rational.numerator) / a.rational.denominator + mp.fsum(
                c * beta for c, beta in zip(a.coeffs, betas))
            shifts.append(Rational(a.rational.numerator, a.rational.denominator) - int(mp.floor(total)))
    r = Matrix(shifts)
    if C.rank() != C.row_join(r).rank():
        raise HypothesisError("The Q-span of the alphas contains 1; c_S < c_T is possible.")
    solution, params = C.gauss_jordan_solve(r)
    solution = solution.subs({p: 0 for p in params})
    with mp.workprec(settings.precision_bits):
        return [beta + mpf(int(y.p)) / int(y.q) for beta, y in zip(betas, solution)]


def certify_cs_equals_ct(cfg: CosineConfig, epsilon: float = 1e-3, effort: Optional[int] = None) -> CertificationReport:
    """
    Witness for inf over integers = inf over reals: an integer k with f(k) <= -c_T + 2 epsilon.

    t0 is the polished continuous minimizer (horizon doubled until f(t0) < -c_T + epsilon);
    delta halves from 0.1 until |f(t0) - f(k)| < epsilon for the witnessed k.

    Raises:
        HypothesisError: inexact angles, or the Q-span of the alphas contains 1.
    """
    spectrum_service.validate_cosine_config(cfg)
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive.", field="epsilon")
    if not cfg.is_exact or cfg.basis.size == 0:
        raise HypothesisError("Certification needs exact angles over a non-empty basis.")
    if not cfg.basis.independence_asserted:
        raise HypothesisError("Basis independence is not asserted.")
    betas = _shifted_basis(cfg)
    rows = tuple(tuple(a.coeffs) for a in cfg.alphas)

    torus = GroupDecomposition(torsion_order=1, torsion_exponents=(0,) * cfg.m, d=cfg.basis.size,
                               exponent_matrix=rows, basis_labels=cfg.basis.labels)
    torus_min = continuous_minimum_torus(torus, cfg.coefficients).value

    horizon = settings.time_horizon
    while True:
        line = continuous_minimum_time(cfg, horizon=horizon)
        c_T = -min(torus_min, line.value)
        if line.value < -c_T + epsilon or horizon >= settings.time_horizon_cap:
            break
        horizon *= 2
        logger.debug(f"Continuous minimum {line.value} not within epsilon of {-c_T}; horizon {horizon}")
    t0, f_t0 = line.t_star, line.value

    partial = CertificationReport(status="PARTIAL", c_T=c_T, t0=t0, f_t0=f_t0, epsilon=epsilon)
    if f_t0 >= -c_T + epsilon:
        logger.warning(f"No t0 within epsilon of the torus minimum up to horizon {horizon}")
        return partial

    delta = 0.1
    witness: Optional[WitnessReport] = None
    while delta >= settings.witness_min_delta:
        try:
            witness = _witness_search(betas, t0, delta, effort, 1, 0, rows)
        except BudgetExhausted as e:
            logger.warning(f"Certification stopped at delta={delta}: {e}")
            best = e.best
            f_best = spectrum_service.eval_cosine_sum(cfg, best.k)
            best = best.model_copy(update={"sum_at_k": f_best, "gap_to_cT": f_best + c_T})
            return partial.model_copy(update={"k": best.k, "f_k": f_best, "delta_used": delta, "witness": best})
        f_k = spectrum_service.eval_cosine_sum(cfg, witness.k)
        witness = witness.model_copy(update={"sum_at_k": f_k, "gap_to_cT": f_k + c_T})
        if abs(f_t0 - f_k) < epsilon:
            status = "CERTIFIED" if f_k <= -c_T + 2 * epsilon else "PARTIAL"
            logger.info(f"{status}: k={witness.k}, f(k)={f_k}, -c_T={-c_T}, delta={delta}")
            return CertificationReport(status=status, c_T=c_T, t0=t0, f_t0=f_t0, k=witness.k, f_k=f_k,
                                       epsilon=epsilon, delta_used=delta, witness=witness)
        delta /= 2

    logger.warning(f"delta fell below {settings.witness_min_delta} without meeting epsilon")
    return partial.model_copy(update={"k": witness.k if witness else None,
                                      "f_k": witness.sum_at_k if witness else None,
                                      "witness": witness})


# --- Verification ---

def _verdict(bound: float, minimum: float, exhaustive: bool, slack: float) -> Verdict:
    if minimum <= bound + slack:
        return Verdict.PASS
    return Verdict.FAIL if exhaustive else Verdict.INCONCLUSIVE


def _scan_minimum(cfg: AnyConfig, K: int, restrict: str, workers: Optional[int]) -> Tuple[ScanResult, bool]:
    angles = cfg.alphas if isinstance(cfg, CosineConfig) else cfg.angles
    L = spectrum_service.period(angles)
    # a restricted progression covers only part of the period
    exhaustive = restrict == "all" and L is not None and L <= K
    budget = L if exhaustive else K
    if isinstance(cfg, CosineConfig):
        return scan_cosine_infimum(cfg, budget, restrict, workers=workers), exhaustive
    return scan_infimum(cfg, budget, restrict, workers=workers), exhaustive


def _record(report: BoundReport, budget: int, **fields) -> VerificationRecord:
    return VerificationRecord(theorem_id=report.theorem_id, bound=report.value, strict=report.strict,
                              budget=budget, hypotheses_met=report.hypotheses_met, **fields)


def _projected_polynomial(cfg: SpectrumConfig) -> List[Tuple[complex, int]]:
    g = structure_service.group_decompose(cfg)
    projection = structure_service.choose_projection(g)
    return [(complex(b), q) for b, q in zip(cfg.coefficients, projection.q)]


def verify_theorem(cfg: AnyConfig, theorem_id: Union[TheoremId, str], budget: Optional[int] = None,
                   restrict: str = "all", workers: Optional[int] = None) -> VerificationRecord:
    """
    Checks hypotheses, computes the bound and compares it with a scanned minimum.

    PASS when the minimum is at or below the bound (slack 1e-9 on exhaustive periods).
    A finite scan that misses the bound is INCONCLUSIVE, never FAIL; FAIL is reserved
    for an exhaustive period above the bound.
    """
    theorem_id = TheoremId(theorem_id)
    K = settings.scan_budget if budget is None else int(budget)

    if theorem_id in (TheoremId.COR4, TheoremId.COR5):
        if not isinstance(cfg, CosineConfig):
            raise ConfigError(f"{theorem_id.value} needs a cosine config.", field="cosine")
        if theorem_id == TheoremId.COR4:
            report = bounds_service.bound_cor4(cfg)
        else:
            spectrum = spectrum_service.to_spectrum(cfg)
            report = bounds_service.bound_cor5(cfg, structure_service.detect_degeneracy(spectrum).token)
    else:
        spectrum = spectrum_service.to_spectrum(cfg) if isinstance(cfg, CosineConfig) else cfg
        if theorem_id == TheoremId.THM1:
            report = bounds_service.bound_thm1(spectrum)
        elif theorem_id == TheoremId.COR1:
            report = bounds_service.bound_cor1(spectrum)
        elif theorem_id == TheoremId.THM2:
            report = bounds_service.bound_thm2(spectrum)
        elif theorem_id == TheoremId.COR3:
            token = structure_service.detect_degeneracy(spectrum, allow_minus_one=True).token
            report = bounds_service.bound_cor3(spectrum.n, spectrum, token)
        else:
            token = structure_service.detect_degeneracy(spectrum).token
            if theorem_id == TheoremId.THM4:
                report = bounds_service.bound_thm4(spectrum, token)
            elif theorem_id == TheoremId.LEMMA1:
                report = bounds_service.bound_lemma1(spectrum.coefficients)
            else:
                report = bounds_service.bound_lemma2(spectrum.coefficients)
            if theorem_id in (TheoremId.LEMMA1, TheoremId.LEMMA2):
                certified = token is not None
                report = report.model_copy(update={"hypotheses_met": report.hypotheses_met + [
                    HypothesisCheck(label="non-degeneracy certified", met=certified)]})
        cfg = spectrum

    if not report.applicable:
        logger.info(f"{theorem_id.value}: hypotheses not met")
        return _record(report, K, verdict=Verdict.HYPOTHESIS_FAIL)

    if theorem_id == TheoremId.LEMMA1:
        value = bounds_service.l1_norm(_projected_polynomial(cfg))
        tolerance = settings.quad_rel_tol * max(1.0, value)
        verdict = Verdict.PASS if value >= report.value - tolerance else Verdict.FAIL
        return _record(report, K, min_found=value, verdict=verdict, margin=value - report.value,
                       slack=tolerance, exhaustive=True)

    if theorem_id == TheoremId.LEMMA2:
        pairs = _projected_polynomial(cfg)
        largest = max(abs(q) for _, q in pairs)
        line = GroupDecomposition(torsion_order=1, torsion_exponents=(0,) * len(pairs), d=1,
                                  exponent_matrix=tuple((q,) for _, q in pairs))
        minimum = continuous_minimum_torus(line, [b for b, _ in pairs],
                                           grid_per_dim=max(settings.torus_grid, 16 * largest))
        verdict = _verdict(report.value, minimum.value, False, 0.0)
        return _record(report, K, min_found=minimum.value, verdict=verdict,
                       margin=report.value - minimum.value)

    scan, exhaustive = _scan_minimum(cfg, K, restrict, workers)
    slack = _EXACT_SLACK if exhaustive else 0.0
    verdict = _verdict(report.value, scan.value_best, exhaustive, slack)
    record = _record(report, scan.K_budget, min_found=scan.value_best, k_best=scan.k_best,
                     verdict=verdict, margin=report.value - scan.value_best, slack=slack,
                     exhaustive=exhaustive)
    logger.info(f"{theorem_id.value}: {verdict.value} (bound {report.value}, min {scan.value_best})")
    return record
