from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class TheoremId(str, Enum):
    THM1 = "Thm1"
    COR1 = "Cor1"
    THM2 = "Thm2"
    THM4 = "Thm4"
    COR3 = "Cor3"
    COR4 = "Cor4"
    COR5 = "Cor5"
    LEMMA1 = "Lemma1"
    LEMMA2 = "Lemma2"


class Verdict(str, Enum):
    PASS = "PASS"
    INCONCLUSIVE = "INCONCLUSIVE"
    HYPOTHESIS_FAIL = "HYPOTHESIS-FAIL"
    FAIL = "FAIL"


class HypothesisCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    met: bool


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    conjugate_closed: bool
    no_unit_node: bool
    distinct: bool
    all_b_nonzero: bool
    all_b_positive_real: bool
    exact: bool
    conjugate_partner: Optional[Tuple[int, ...]] = None
    problems: Tuple[str, ...] = ()

    @property
    def thm1_hypotheses(self) -> bool:
        return self.conjugate_closed and self.no_unit_node and self.distinct and self.all_b_nonzero

    @property
    def thm2_hypotheses(self) -> bool:
        return self.conjugate_closed and self.no_unit_node and self.all_b_positive_real


class AveragingCertificate(BaseModel):
    """Closed-form partial sums over k = N .. N+K-1 and their constant bounds."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int
    K: int
    sigma1: Optional[complex] = None
    C1: Optional[float] = None
    sigma2: Optional[complex] = None
    C2: Optional[float] = None
    sum_abs_b2: float = 0.0

    def sigma1_within_bound(self, slack: float = 1e-9) -> bool:
        return abs(self.sigma1) <= self.C1 * (1 + slack) + slack

    def sigma2_within_bound(self, slack: float = 1e-9) -> bool:
        excess = abs(self.sigma2 - self.K * self.sum_abs_b2)
        return excess <= self.C2 * (1 + slack) + slack * self.K * max(self.sum_abs_b2, 1.0)


class BoundReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    theorem_id: TheoremId
    name: str
    value: float
    strict: bool
    hypotheses_met: List[HypothesisCheck] = Field(default_factory=list)
    covered: bool = True

    @property
    def applicable(self) -> bool:
        return self.covered and all(h.met for h in self.hypotheses_met)


class NondegeneracyToken(BaseModel):
    """Issued by detect_degeneracy for one specific config."""

    model_config = ConfigDict(frozen=True)

    fingerprint: str
    allow_minus_one: bool = False

    def certifies(self, cfg: Any) -> bool:
        return self.fingerprint == cfg.fingerprint()


class DegeneracyWitness(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int
    j: Optional[int] = None  # None for a single node that is itself a root of unity
    order: int


class DegeneracyVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Literal["NonDegenerate", "Degenerate", "HeuristicNonDegenerate"]
    witness: Optional[DegeneracyWitness] = None
    note: Optional[str] = None
    token: Optional[NondegeneracyToken] = None

    @property
    def is_nondegenerate(self) -> bool:
        return self.verdict == "NonDegenerate"


class GroupDecomposition(BaseModel):
    """z_j = mu^{r_j} w_1^{a_j1} ... w_d^{a_jd} with mu a primitive |T|-th root of unity."""

    model_config = ConfigDict(frozen=True)

    torsion_order: int
    torsion_exponents: Tuple[int, ...]
    d: int
    exponent_matrix: Tuple[Tuple[int, ...], ...]
    basis_labels: Tuple[str, ...] = ()
    conjugate_partner: Optional[Tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return len(self.torsion_exponents)


class Projection(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: Tuple[int, ...]
    q: Tuple[int, ...]
    M: int


class IntegerRelation(BaseModel):
    """c_0 + sum_j c_j x_j ~= 0."""

    model_config = ConfigDict(frozen=True)

    coefficients: Tuple[int, ...]
    residual: float

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.coefficients)


class ScanResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    k_best: int
    value_best: float
    K_budget: int
    restrict: str = "all"
    history: Optional[List[Tuple[int, float]]] = None


class ContinuousMinimum(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_star: Optional[float] = None
    torus_point: Optional[Tuple[float, ...]] = None  # in turns, each coordinate in [0, 1)
    value: float
    method: Literal["grid+polish", "torus-grid+polish", "torus-multistart+polish", "period-exhaustive"]
    certified_resolution: float


class WitnessReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    m: Tuple[int, ...]
    k_corrections: Tuple[int, ...]
    t0: float
    delta: float
    delta_achieved: float
    Lambda: int
    torsion: int = 1
    method: Literal["exact", "scan", "lattice"] = "scan"
    effort_used: int = 0
    sum_at_k: Optional[float] = None
    gap_to_cT: Optional[float] = None

    @property
    def succeeded(self) -> bool:
        return self.delta_achieved < self.delta


class ReturnTimeReport(BaseModel):
    """Dirichlet return: all k alpha_j close to integers, so s_k is near sum_j b_j."""

    model_config = ConfigDict(frozen=True)

    k: int
    delta_achieved: float
    sum_at_k: float
    supremum: float
    gap: float
    gap_bound: float


class CertificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: Literal["CERTIFIED", "PARTIAL"]
    c_T: float
    t0: float
    f_t0: float
    k: Optional[int] = None
    f_k: Optional[float] = None
    epsilon: float
    delta_used: Optional[float] = None
    witness: Optional[WitnessReport] = None

    @property
    def certified(self) -> bool:
        return self.status == "CERTIFIED"


class VerificationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    theorem_id: TheoremId
    bound: Optional[float] = None
    strict: bool = False
    min_found: Optional[float] = None
    k_best: Optional[int] = None
    budget: int
    verdict: Verdict
    margin: Optional[float] = None
    slack: float = 0.0
    exhaustive: bool = False
    hypotheses_met: List[HypothesisCheck] = Field(default_factory=list)


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: str
    config_path: Optional[str] = None
    budgets: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    output_format: Literal["json", "csv", "text"] = "json"
