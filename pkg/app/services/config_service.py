# Config document ingestion and emission
import json
import logging
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from pydantic import ValidationError

from app.core.errors import ConfigError
from app.models.data_models import (
    BasisDecl,
    CosineConfig,
    CosinePair,
    ExactAngle,
    FloatAngle,
    SpectralNode,
    SpectrumConfig,
)
from app.models.report_models import IntegerRelation
from app.services import structure_service

logger = logging.getLogger(__name__)

AnyConfig = Union[SpectrumConfig, CosineConfig]


def load_config(source: Union[str, Path, Mapping[str, Any]]) -> AnyConfig:
    """
    Parses a config document into a SpectrumConfig or, for documents with
    "cosine": true, a CosineConfig.

    Args:
        source: A path to a JSON file, a JSON string, or an already parsed mapping.

    Raises:
        ConfigError: naming the offending field.
    """
    document = _read_document(source)
    if not isinstance(document, dict):
        raise ConfigError("Config document must be a JSON object.", field="<document>")

    basis = _parse_basis(document.get("basis", []))
    check_basis_relations(basis)
    if document.get("cosine", False):
        pairs = document.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            raise ConfigError("Cosine config needs a non-empty 'pairs' list.", field="pairs")
        parsed_pairs = []
        for idx, item in enumerate(pairs):
            field = f"pairs[{idx}]"
            if not isinstance(item, dict):
                raise ConfigError("Pair must be an object.", field=field)
            b = _parse_real(item.get("b"), f"{field}.b")
            alpha = _parse_angle(item.get("alpha"), basis, f"{field}.alpha")
            parsed_pairs.append(_build(CosinePair, f"{field}", b=b, alpha=alpha))
        cfg = _build(CosineConfig, "pairs", basis=basis, pairs=tuple(parsed_pairs))
        logger.debug(f"Loaded cosine config with m={cfg.m}")
        return cfg

    nodes = document.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise ConfigError("Config needs a non-empty 'nodes' list.", field="nodes")
    parsed_nodes = []
    for idx, item in enumerate(nodes):
        field = f"nodes[{idx}]"
        if not isinstance(item, dict):
            raise ConfigError("Node must be an object.", field=field)
        b = _parse_coefficient(item.get("b"), f"{field}.b")
        angle = _parse_angle(item.get("angle"), basis, f"{field}.angle")
        parsed_nodes.append(_build(SpectralNode, field, b=b, angle=angle))
    cfg = _build(SpectrumConfig, "nodes", basis=basis, nodes=tuple(parsed_nodes))
    logger.debug(f"Loaded spectrum config with n={cfg.n}")
    return cfg


def check_basis_relations(basis: BasisDecl) -> List[IntegerRelation]:
    """
    Relation scan over 1 and the declared basis values. Independence is trusted,
    so a detected relation only logs a warning.
    """
    if basis.size == 0:
        return []
    relations = structure_service.numeric_relation_scan(basis.values, strict=False)
    for relation in relations:
        logger.warning(f"Declared basis {list(basis.labels)} satisfies integer relation "
                       f"{list(relation.coefficients)} (residual {relation.residual:.3g}); "
                       f"exact results assume independence")
    return relations


def _read_document(source: Union[str, Path, Mapping[str, Any]]) -> Any:
    if isinstance(source, Mapping):
        return dict(source)
    text = None
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config file: {e}", field="<file>") from e
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON at line {e.lineno} column {e.colno}: {e.msg}",
                          field="<document>") from e


def _build(model: Any, field: str, **kwargs: Any) -> Any:
    try:
        return model(**kwargs)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigError(first.get("msg", str(e)), field=f"{field}.{loc}" if loc else field) from e


def _parse_basis(raw: Any) -> BasisDecl:
    if not isinstance(raw, list):
        raise ConfigError("Basis must be a list.", field="basis")
    labels: List[str] = []
    values: List[Decimal] = []
    for idx, item in enumerate(raw):
        field = f"basis[{idx}]"
        if not isinstance(item, dict):
            raise ConfigError("Basis entry must be an object.", field=field)
        label = item.get("label")
        if not isinstance(label, str) or not label:
            raise ConfigError("Label must be a non-empty string.", field=f"{field}.label")
        value = item.get("value")
        if not isinstance(value, str):
            # JSON floats would silently truncate to double precision
            raise ConfigError("Basis value must be a decimal string.", field=f"{field}.value")
        try:
            values.append(Decimal(value))
        except InvalidOperation as e:
            raise ConfigError(f"Invalid decimal '{value}'.", field=f"{field}.value") from e
        labels.append(label)
    return _build(BasisDecl, "basis", labels=tuple(labels), values=tuple(values))


def _parse_coefficient(raw: Any, field: str) -> Any:
    if isinstance(raw, list):
        if len(raw) != 2:
            raise ConfigError("Complex coefficient must be [re, im].", field=field)
        try:
            return complex(float(raw[0]), float(raw[1]))
        except (TypeError, ValueError) as e:
            raise ConfigError("Complex coefficient parts must be numbers.", field=field) from e
    return _parse_real(raw, field)


def _parse_real(raw: Any, field: str) -> Any:
    if isinstance(raw, bool) or raw is None:
        raise ConfigError("Coefficient is missing or not numeric.", field=field)
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"Invalid rational '{raw}'.", field=field) from e
    raise ConfigError("Coefficient must be a number, a decimal string or [re, im].", field=field)


def _parse_angle(raw: Any, basis: BasisDecl, field: str) -> Union[ExactAngle, FloatAngle]:
    if not isinstance(raw, dict):
        raise ConfigError("Angle must be an object.", field=field)
    if "float" in raw:
        value = raw["float"]
        if not isinstance(value, str):
            raise ConfigError("Float angle must be a decimal string.", field=f"{field}.float")
        try:
            decimal_value = Decimal(value)
        except InvalidOperation as e:
            raise ConfigError(f"Invalid decimal '{value}'.", field=f"{field}.float") from e
        precision = raw.get("precision_bits", 53)
        return _build(FloatAngle, field, value=decimal_value, precision_bits=precision)

    rational = raw.get("rational", "0")
    if not isinstance(rational, (str, int)) or isinstance(rational, bool):
        raise ConfigError("Rational part must be a 'p/q' string.", field=f"{field}.rational")
    try:
        rational_value = Fraction(rational)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"Invalid rational '{rational}'.", field=f"{field}.rational") from e
    coeffs = raw.get("coeffs", [0] * basis.size)
    if not isinstance(coeffs, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in coeffs):
        raise ConfigError("Coefficients must be a list of integers.", field=f"{field}.coeffs")
    if len(coeffs) != basis.size:
        raise ConfigError(f"Expected {basis.size} basis coefficients, got {len(coeffs)}.",
                          field=f"{field}.coeffs")
    return _build(ExactAngle, field, rational=rational_value, coeffs=tuple(coeffs))


def config_to_dict(cfg: AnyConfig) -> Dict[str, Any]:
    """Inverse of load_config for the emitted schema."""
    document: Dict[str, Any] = {
        "basis": [{"label": label, "value": str(value)}
                  for label, value in zip(cfg.basis.labels, cfg.basis.values)],
    }
    if isinstance(cfg, CosineConfig):
        document["cosine"] = True
        document["pairs"] = [{"b": _dump_coefficient(p.b), "alpha": _dump_angle(p.alpha)} for p in cfg.pairs]
    else:
        document["nodes"] = [{"b": _dump_coefficient(node.b), "angle": _dump_angle(node.angle)}
                             for node in cfg.nodes]
    return document


def _dump_coefficient(b: Any) -> Any:
    if isinstance(b, Fraction):
        return str(b)
    if isinstance(b, complex):
        return [b.real, b.imag]
    return float(b)


def _dump_angle(angle: Union[ExactAngle, FloatAngle]) -> Dict[str, Any]:
    if isinstance(angle, ExactAngle):
        return {"rational": str(angle.rational), "coeffs": list(angle.coeffs)}
    return {"float": str(angle.value), "precision_bits": angle.precision_bits}
