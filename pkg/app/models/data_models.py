import hashlib
from decimal import Decimal
from fractions import Fraction
from typing import Annotated, Any, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Coefficient = Union[Fraction, complex]


def as_coefficient(value: Any) -> Coefficient:
    """Normalizes a coefficient: exact rationals stay exact, everything else becomes complex."""
    if isinstance(value, bool):
        raise ValueError("Coefficient must be numeric, not boolean.")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (float, complex)):
        return complex(value)
    raise ValueError(f"Unsupported coefficient {value!r}.")


def conj(b: Coefficient) -> Coefficient:
    return b if isinstance(b, Fraction) else b.conjugate()


def is_positive_real(b: Coefficient) -> bool:
    if isinstance(b, Fraction):
        return b > 0
    return b.imag == 0 and b.real > 0


class BasisDecl(BaseModel):
    """Declared irrational basis values beta_i, asserted Q-independent together with 1."""

    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...] = ()
    values: Tuple[Decimal, ...] = ()
    independence_asserted: bool = True

    @field_validator("values", mode="before")
    @classmethod
    def parse_values(cls, v: Any) -> Tuple[Decimal, ...]:
        return tuple(x if isinstance(x, Decimal) else Decimal(str(x)) for x in v)

    @model_validator(mode="after")
    def check_declaration(self) -> "BasisDecl":
        if len(self.labels) != len(self.values):
            raise ValueError("Basis labels and values must have equal length.")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("Basis labels must be distinct.")
        for label, value in zip(self.labels, self.values):
            if not (0 < value < 1):
                raise ValueError(f"Basis value for '{label}' must lie in (0, 1).")
        return self

    @property
    def size(self) -> int:
        return len(self.values)


class ExactAngle(BaseModel):
    """Angle r + sum_i c_i beta_i (mod 1) with r reduced into [0, 1)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["exact"] = "exact"
    rational: Fraction = Fraction(0)
    coeffs: Tuple[int, ...] = ()

    @field_validator("rational", mode="before")
    @classmethod
    def reduce_rational(cls, v: Any) -> Fraction:
        return Fraction(v) % 1

    @property
    def is_rational(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return self.is_rational and self.rational == 0

    def negate(self) -> "ExactAngle":
        return ExactAngle(rational=-self.rational, coeffs=tuple(-c for c in self.coeffs))

    def minus(self, other: "ExactAngle") -> "ExactAngle":
        if len(self.coeffs) != len(other.coeffs):
            raise ValueError("Angles are expressed over different bases.")
        return ExactAngle(
            rational=self.rational - other.rational,
            coeffs=tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def scaled(self, factor: int) -> "ExactAngle":
        return ExactAngle(rational=self.rational * factor, coeffs=tuple(factor * c for c in self.coeffs))


class FloatAngle(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["float"] = "float"
    value: Decimal
    precision_bits: int = 53

    @field_validator("value", mode="before")
    @classmethod
    def parse_value(cls, v: Any) -> Decimal:
        return v if isinstance(v, Decimal) else Decimal(str(v))

    @field_validator("value")
    @classmethod
    def check_range(cls, v: Decimal) -> Decimal:
        if not (0 <= v < 1):
            raise ValueError("Float angle must lie in [0, 1).")
        return v

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def negate(self) -> "FloatAngle":
        return FloatAngle(value=Decimal(0) if self.value == 0 else 1 - self.value,
                          precision_bits=self.precision_bits)

    def scaled(self, factor: int) -> "FloatAngle":
        return FloatAngle(value=(self.value * factor) % 1, precision_bits=self.precision_bits)


Angle = Annotated[Union[ExactAngle, FloatAngle], Field(discriminator="kind")]


class SpectralNode(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    b: Any
    angle: Angle

    @field_validator("b", mode="before")
    @classmethod
    def parse_b(cls, v: Any) -> Coefficient:
        return as_coefficient(v)


class SpectrumConfig(BaseModel):
    """Conjugate-closed list of (b_j, alpha_j) defining s_k = sum_j b_j exp(2 pi i k alpha_j)."""

    model_config = ConfigDict(frozen=True)

    basis: BasisDecl = BasisDecl()
    nodes: Tuple[SpectralNode, ...] = ()

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def coefficients(self) -> Tuple[Coefficient, ...]:
        return tuple(node.b for node in self.nodes)

    @property
    def angles(self) -> Tuple[Union[ExactAngle, FloatAngle], ...]:
        return tuple(node.angle for node in self.nodes)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(a, ExactAngle) for a in self.angles)

    def fingerprint(self) -> str:
        payload = repr((self.basis.labels, self.basis.values,
                        tuple((node.b, node.angle.model_dump()) for node in self.nodes)))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class CosinePair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    b: Any
    alpha: Angle

    @field_validator("b", mode="before")
    @classmethod
    def parse_b(cls, v: Any) -> Union[Fraction, float]:
        if isinstance(v, bool):
            raise ValueError("Coefficient must be numeric.")
        if isinstance(v, (int, Fraction, Decimal, str)):
            return Fraction(v)
        if isinstance(v, complex):
            if v.imag != 0:
                raise ValueError("Cosine coefficients must be real.")
            return float(v.real)
        return float(v)


class CosineConfig(BaseModel):
    """Cosine sum sum_j b_j cos(2 pi alpha_j t) with real b_j and 0 < alpha_j < 1/2."""

    model_config = ConfigDict(frozen=True)

    basis: BasisDecl = BasisDecl()
    pairs: Tuple[CosinePair, ...] = ()

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def coefficients(self) -> Tuple[Union[Fraction, float], ...]:
        return tuple(pair.b for pair in self.pairs)

    @property
    def alphas(self) -> Tuple[Union[ExactAngle, FloatAngle], ...]:
        return tuple(pair.alpha for pair in self.pairs)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(a, ExactAngle) for a in self.alphas)


def abs_coefficient(b: Any) -> float:
    return float(abs(b))


def angle_key(angle: Union[ExactAngle, FloatAngle]) -> Optional[tuple]:
    """Hashable identity for exact angles; None for float angles."""
    if isinstance(angle, ExactAngle):
        return (angle.rational, angle.coeffs)
    return None
