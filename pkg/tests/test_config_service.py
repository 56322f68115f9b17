import json
import logging
from fractions import Fraction

import pytest

from app.core.config import Settings
from app.core.errors import ConfigError
from app.models.data_models import CosineConfig, FloatAngle, SpectrumConfig
from app.services.config_service import check_basis_relations, config_to_dict, load_config
from app.utils.serialization import csv_text, dumps
from tests.factories import SQRT2_M1, basis, irrational_document, zeta_document


def test_load_zeta_document(zeta4):
    cfg = load_config(zeta_document(4))
    assert isinstance(cfg, SpectrumConfig)
    assert cfg == zeta4


def test_load_from_file_and_json_text(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(irrational_document()), encoding="utf-8")
    from_file = load_config(str(path))
    from_text = load_config(json.dumps(irrational_document()))
    assert from_file == from_text
    assert from_file.basis.labels == ("s5",)
    assert from_file.angles[1].rational == 0
    assert from_file.angles[1].coeffs == (-1,)


def test_emitted_document_loads_back():
    document = {
        "basis": [{"label": "s2", "value": SQRT2_M1}],
        "nodes": [
            {"b": [1.5, -0.5], "angle": {"rational": "1/7", "coeffs": [2]}},
            {"b": [1.5, 0.5], "angle": {"rational": "6/7", "coeffs": [-2]}},
            {"b": "3/2", "angle": {"float": "0.5"}},
        ],
    }
    cfg = load_config(document)
    assert cfg.nodes[0].b == complex(1.5, -0.5)
    assert cfg.nodes[2].b == Fraction(3, 2)
    assert isinstance(cfg.nodes[2].angle, FloatAngle)
    assert load_config(config_to_dict(cfg)) == cfg


def test_cosine_document():
    cfg = load_config({"cosine": True, "pairs": [{"b": 1, "alpha": {"rational": "1/5"}},
                                                 {"b": 2.5, "alpha": {"rational": "2/5"}}]})
    assert isinstance(cfg, CosineConfig)
    assert cfg.m == 2
    assert cfg.coefficients == (Fraction(1), 2.5)
    assert config_to_dict(cfg)["cosine"] is True


@pytest.mark.parametrize("source, field", [
    ("{bad json", "<document>"),
    ({"nodes": []}, "nodes"),
    ({"basis": [{"label": "s2", "value": 0.414}], "nodes": [{"b": 1, "angle": {}}]}, "basis[0].value"),
    ({"basis": [{"label": "s2", "value": SQRT2_M1}],
      "nodes": [{"b": 1, "angle": {"coeffs": [1]}}, {"b": 1, "angle": {"coeffs": [1, 0]}}]},
     "nodes[1].angle.coeffs"),
    ({"nodes": [{"b": True, "angle": {"rational": "1/3"}}]}, "nodes[0].b"),
    ({"nodes": [{"b": 1, "angle": {"rational": "1/0"}}]}, "nodes[0].angle.rational"),
    ({"nodes": [{"b": [1, 2, 3], "angle": {"rational": "1/3"}}]}, "nodes[0].b"),
    ({"cosine": True, "pairs": []}, "pairs"),
])
def test_invalid_documents_name_the_field(source, field):
    with pytest.raises(ConfigError) as excinfo:
        load_config(source)
    assert excinfo.value.field == field
    assert str(excinfo.value).startswith(field)


def test_basis_value_out_of_range():
    with pytest.raises(ConfigError) as excinfo:
        load_config({"basis": [{"label": "x", "value": "1.5"}], "nodes": [{"b": 1, "angle": {"coeffs": [1]}}]})
    assert excinfo.value.field.startswith("basis")


def test_missing_file():
    with pytest.raises(ConfigError) as excinfo:
        load_config("/nonexistent/config.json")
    assert excinfo.value.field == "<file>"


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("ONESIDED_PRECISION_BITS", "200")
    monkeypatch.setenv("ONESIDED_SCAN_BUDGET", "5000")
    fresh = Settings()
    assert fresh.precision_bits == 200
    assert fresh.scan_budget == 5000


def test_settings_reject_low_precision(monkeypatch):
    monkeypatch.setenv("ONESIDED_PRECISION_BITS", "32")
    with pytest.raises(ValueError):
        Settings()


def test_json_output_is_deterministic():
    payload = {"b": 0.1, "a": [1, Fraction(1, 3), complex(1, -2)], "c": None}
    assert dumps(payload) == '{"a":[1,"1/3",[1.0,-2.0]],"b":0.1,"c":null}'
    assert dumps(payload) == dumps(dict(reversed(list(payload.items()))))


def test_csv_output():
    text = csv_text(["k", "value"], [[1, -1.0], [2, 0.5]])
    assert text == "k,value\n1,-1.0\n2,0.5\n"


SQRT2_COMPLEMENT = "0.58578643762690495119831127579030192143032812462306"


def test_dependent_basis_is_reported_at_load(caplog):
    document = {
        "basis": [{"label": "s2", "value": SQRT2_M1}, {"label": "c2", "value": SQRT2_COMPLEMENT}],
        "nodes": [{"b": 1, "angle": {"coeffs": [1, 0]}}, {"b": 1, "angle": {"rational": "1", "coeffs": [-1, 0]}}],
    }
    with caplog.at_level(logging.WARNING, logger="app.services.config_service"):
        cfg = load_config(document)
    assert cfg.basis.size == 2
    assert any("integer relation [-1, 1, 1]" in record.getMessage() for record in caplog.records)


def test_independent_basis_loads_quietly(caplog):
    with caplog.at_level(logging.WARNING, logger="app.services.config_service"):
        load_config(irrational_document("s2"))
    assert not [r for r in caplog.records if r.name == "app.services.config_service"]
    assert check_basis_relations(basis("s2", "s3")) == []
