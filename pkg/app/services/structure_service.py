# Degeneracy detection, torsion/free decomposition and integer projections
import logging
import math
from decimal import Decimal
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from mpmath import mp, mpf
from sympy import Matrix, Rational

from app.core.config import settings
from app.core.errors import ConfigError, HypothesisError, PrecisionError
from app.models.data_models import ExactAngle, FloatAngle, SpectralNode, SpectrumConfig
from app.models.report_models import (
    DegeneracyVerdict,
    DegeneracyWitness,
    GroupDecomposition,
    IntegerRelation,
    NondegeneracyToken,
    Projection,
)
from app.services import spectrum_service
from app.services.lattice_service import lll_reduce, relation_basis

logger = logging.getLogger(__name__)

_HALF = Fraction(1, 2)


def _is_minus_one(angle) -> bool:
    return isinstance(angle, ExactAngle) and angle.is_rational and angle.rational == _HALF


# --- Degeneracy ---

def detect_degeneracy(cfg: SpectrumConfig, allow_minus_one: bool = False) -> DegeneracyVerdict:
    """
    Decides whether some ratio z_i / z_j (i != j) or some z_i is a root of unity.

    On exact angles the verdict is definitive and a NonDegenerate verdict carries a
    proof token. With allow_minus_one, a node at z = -1 is tolerated (the setting of
    the b = 1 corollary). Float angles fall back to numeric_relation_scan and can at
    best be HeuristicNonDegenerate.

    Witness indices are 1-based.
    """
    spectrum_service.validate_config(cfg)
    if not cfg.is_exact:
        return _detect_degeneracy_numeric(cfg, allow_minus_one)

    for idx, angle in enumerate(cfg.angles):
        if angle.is_rational:
            if allow_minus_one and angle.rational == _HALF:
                continue
            witness = DegeneracyWitness(i=idx + 1, order=angle.rational.denominator)
            logger.info(f"Degenerate: z_{idx + 1} is a root of unity of order {witness.order}")
            return DegeneracyVerdict(verdict="Degenerate", witness=witness,
                                     note="node is itself a root of unity")

    for i in range(cfg.n):
        for j in range(i + 1, cfg.n):
            difference = cfg.angles[i].minus(cfg.angles[j])
            if difference.is_rational:
                order = difference.rational.denominator
                witness = DegeneracyWitness(i=i + 1, j=j + 1, order=order)
                logger.info(f"Degenerate: (z_{i + 1}/z_{j + 1})^{order} = 1")
                return DegeneracyVerdict(verdict="Degenerate", witness=witness,
                                         note="ratio is a root of unity")

    token = NondegeneracyToken(fingerprint=cfg.fingerprint(), allow_minus_one=allow_minus_one)
    logger.info(f"Non-degenerate config certified (n={cfg.n})")
    return DegeneracyVerdict(verdict="NonDegenerate", token=token)


def _detect_degeneracy_numeric(cfg: SpectrumConfig, allow_minus_one: bool) -> DegeneracyVerdict:
    precision = settings.relation_precision_bits
    with mp.workprec(precision + 16):
        values = [spectrum_service.angle_value(a, cfg.basis, precision + 16) for a in cfg.angles]
        candidates: List[Tuple[Optional[int], Optional[int], mpf]] = [(i, None, v) for i, v in enumerate(values)]
        candidates += [(i, j, values[i] - values[j]) for i in range(cfg.n) for j in range(i + 1, cfg.n)]

    effective = min(
        [a.precision_bits for a in cfg.angles if isinstance(a, FloatAngle)] + [precision]
    )
    for i, j, x in candidates:
        if j is None and allow_minus_one and abs(float(x) - 0.5) <= 2.0 ** -(effective - 2):
            continue
        relations = numeric_relation_scan([x], height_limit=settings.relation_height,
                                          precision_bits=effective, strict=False)
        if relations:
            order = abs(relations[0].coefficients[1])
            witness = DegeneracyWitness(i=i + 1, j=None if j is None else j + 1, order=order)
            logger.info(f"Degenerate (numeric): relation {relations[0].coefficients}")
            return DegeneracyVerdict(verdict="Degenerate", witness=witness,
                                     note="numeric relation; exactness not checked")

    return DegeneracyVerdict(
        verdict="HeuristicNonDegenerate",
        note=f"no rational relation of height <= {settings.relation_height} at {effective} bits",
    )


# --- Integer relations ---

def numeric_relation_scan(angles: Sequence, height_limit: Optional[int] = None,
                          precision_bits: Optional[int] = None,
                          strict: bool = True) -> List[IntegerRelation]:
    """
    Searches integer vectors (c_0, c_1, ..., c_n), max |c| <= height_limit, with
    c_0 + sum_j c_j alpha_j ~= 0 within 2**(-precision/2), by LLL on the standard
    relation lattice. Heuristic: an empty result only suggests independence.

    Args:
        angles: values as decimal strings, Decimals, floats or mpf.
        strict: raise PrecisionError when the precision cannot support the height
            limit; otherwise the height limit is lowered to what the precision supports.

    Returns:
        Relations normalized by gcd and sign (first nonzero c_j, j >= 1, positive),
        sorted by height.
    """
    height_limit = height_limit or settings.relation_height
    precision_bits = precision_bits or settings.relation_precision_bits
    size = len(angles) + 1
    guard = 8
    needed = size * math.log2(max(height_limit, 2)) + guard
    if needed > precision_bits - guard:
        if strict:
            raise PrecisionError(
                f"{precision_bits} bits cannot separate relations of height {height_limit} "
                f"among {size - 1} values (needs about {int(needed) + guard} bits)."
            )
        height_limit = max(2, int(2 ** ((precision_bits - 2 * guard) / size)))

    with mp.workprec(precision_bits + 32):
        xs = [mpf(1)] + [v if isinstance(v, mpf) else mpf(str(v)) for v in angles]
        weight = mpf(2) ** (precision_bits - guard)
        scaled = [int(mp.nint(weight * x)) for x in xs]
        tolerance = mpf(2) ** (-(precision_bits // 2))
        reduced = lll_reduce(relation_basis(scaled))

        found = {}
        for row in reduced:
            coefficients = row[:size]
            if not any(coefficients):
                continue
            coefficients = _normalize_relation(coefficients)
            if max(abs(c) for c in coefficients) > height_limit:
                continue
            residual = abs(mp.fsum(c * x for c, x in zip(coefficients, xs)))
            if residual < tolerance and coefficients not in found:
                found[coefficients] = float(residual)

    relations = [IntegerRelation(coefficients=c, residual=r) for c, r in found.items()]
    relations.sort(key=lambda rel: (rel.height, rel.coefficients))
    logger.debug(f"Relation scan over {size - 1} values found {len(relations)} relation(s)")
    return relations


def _normalize_relation(coefficients: Sequence[int]) -> Tuple[int, ...]:
    g = 0
    for c in coefficients:
        g = math.gcd(g, c)
    values = [c // g for c in coefficients]
    lead = next((c for c in values[1:] if c), values[0])
    if lead < 0:
        values = [-c for c in values]
    return tuple(values)


# --- Group decomposition ---

def group_decompose(cfg: SpectrumConfig) -> GroupDecomposition:
    """
    Torsion/free decomposition read off the exact encoding:
    |T| = lcm of the rational-part denominators, r_j = |T| * rational_j, and the
    exponent matrix rows are the basis coefficient vectors.
    """
    report = spectrum_service.validate_config(cfg)
    if not cfg.is_exact:
        raise ConfigError("Exact decomposition needs exact angles.", field="nodes")
    torsion_order = math.lcm(*(a.rational.denominator for a in cfg.angles))
    exponents = tuple(int(a.rational * torsion_order) for a in cfg.angles)
    matrix = tuple(tuple(a.coeffs) for a in cfg.angles)

    partners = report.conjugate_partner
    if partners is not None:
        for j, partner in enumerate(partners):
            if matrix[partner] != tuple(-c for c in matrix[j]):
                raise ArithmeticError(f"Conjugate pairing violated between rows {j} and {partner}.")

    return GroupDecomposition(
        torsion_order=torsion_order,
        torsion_exponents=exponents,
        d=cfg.basis.size,
        exponent_matrix=matrix,
        basis_labels=cfg.basis.labels,
        conjugate_partner=partners,
    )


def reconstruct_angle(g: GroupDecomposition, j: int) -> ExactAngle:
    """Angle of z_j = mu^{r_j} prod_i w_i^{a_ji}."""
    return ExactAngle(rational=Fraction(g.torsion_exponents[j], g.torsion_order),
                      coeffs=g.exponent_matrix[j])


def choose_projection(g: GroupDecomposition, start_M: Optional[int] = None) -> Projection:
    """
    Picks p = (1, M, ..., M^{d-1}) so that q = a p has distinct nonzero entries.

    Starting from M = 1 + 2 max|a_jh| (balanced base-M digits, already injective) and
    escalating M by one on failure.
    """
    rows = g.exponent_matrix
    if g.d == 0 or any(not any(row) for row in rows):
        raise HypothesisError("Every exponent row must be nonzero (no node may be a root of unity).")
    if len(set(rows)) != len(rows):
        raise HypothesisError("Exponent rows must be pairwise distinct (no ratio may be a root of unity).")

    largest = max(abs(v) for row in rows for v in row)
    M = start_M or 1 + 2 * largest
    while True:
        p = tuple(M ** h for h in range(g.d))
        q = tuple(sum(a * ph for a, ph in zip(row, p)) for row in rows)
        if len(set(q)) == len(q) and all(q):
            logger.debug(f"Projection chosen with M={M}: q={q}")
            return Projection(p=p, q=q, M=M)
        M += 1


# --- Corollary-3 reduction ---

def reduce_minus_one(cfg: SpectrumConfig) -> Tuple[SpectrumConfig, float]:
    """
    Odd-k substitution k = 2 kappa + 1 for b_j = 1 with one node at z = -1:
    s_{2 kappa + 1} = -1 + sum_{j != n} z_j (z_j^2)^kappa.

    Returns:
        The (n-1)-node config with b'_j = z_j at angles 2 alpha_j, and the offset -1.
    """
    spectrum_service.validate_config(cfg)
    if any(b != 1 for b in cfg.coefficients):
        raise HypothesisError("The odd-k reduction needs b_j = 1 for every node.")
    minus = [i for i, a in enumerate(cfg.angles) if _is_minus_one(a)
             or (isinstance(a, FloatAngle) and a.value == Decimal("0.5"))]
    if len(minus) != 1:
        raise HypothesisError(f"Expected exactly one node at z = -1, found {len(minus)}.")

    nodes = []
    with mp.workprec(settings.precision_bits):
        for idx, node in enumerate(cfg.nodes):
            if idx == minus[0]:
                continue
            theta = spectrum_service.angle_value(node.angle, cfg.basis)
            z = complex(float(mp.cospi(2 * theta)), float(mp.sinpi(2 * theta)))
            nodes.append(SpectralNode(b=z, angle=node.angle.scaled(2)))
    reduced = SpectrumConfig(basis=cfg.basis, nodes=tuple(nodes))
    logger.info(f"Reduced n={cfg.n} config with z=-1 to n'={reduced.n} over odd k")
    return reduced, -1.0


# --- Maximal independence ---

def independent_infimum(cfg: SpectrumConfig) -> Optional[float]:
    """
    inf_k s_k = -sum|b_j| when one angle from every conjugate pair, together with 1,
    is Q-linearly independent; None when that cannot be established exactly.
    """
    report = spectrum_service.validate_config(cfg)
    if not cfg.is_exact or report.conjugate_partner is None:
        return None
    partners = report.conjugate_partner
    if any(partners[j] == j for j in range(cfg.n)):
        return None  # self-paired node (z = -1)
    representatives = sorted({min(j, partners[j]) for j in range(cfg.n)})
    g = group_decompose(cfg)
    if g.d == 0:
        return None
    half = Matrix([[Rational(v) for v in g.exponent_matrix[j]] for j in representatives])
    if half.rank() < len(representatives):
        return None
    return -sum(abs(complex(b)) for b in cfg.coefficients)
