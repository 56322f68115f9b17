import pytest
from fastapi.testclient import TestClient

from app.main import app
from tests.factories import irrational_document, zeta_document


@pytest.fixture
def client():
    with TestClient(app) as test_client:
        yield test_client


def test_status_endpoints(client):
    assert client.get("/").status_code == 200
    assert client.get("/health").json() == {"status": "ok"}


def test_eval(client):
    response = client.post("/eval", json={"config": zeta_document(4), "k_start": 1, "k_end": 6})
    assert response.status_code == 200
    values = [row["value"] for row in response.json()]
    assert values == pytest.approx([-1, -1, -1, -1, 4, -1], abs=1e-12)


def test_bounds(client):
    response = client.post("/bounds", json={"config": zeta_document(4)})
    assert response.status_code == 200
    by_id = {report["theorem_id"]: report for report in response.json()}
    assert by_id["Thm1"]["value"] == pytest.approx(-1)
    assert "Thm4" in by_id


def test_verify(client):
    response = client.post("/verify", json={"config": zeta_document(4), "theorem": "Thm1", "budget": 100})
    assert response.status_code == 200
    assert response.json()["verdict"] == "PASS"

    response = client.post("/verify", json={"config": irrational_document(), "theorem": "Thm1", "budget": 1})
    assert response.json()["verdict"] == "INCONCLUSIVE"


def test_verify_rejects_unknown_theorem(client):
    response = client.post("/verify", json={"config": zeta_document(4), "theorem": "Thm9"})
    assert response.status_code == 422


def test_degeneracy_and_decompose(client):
    response = client.post("/degeneracy", json={"config": irrational_document()})
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"] == "NonDegenerate"
    assert body["token"]["fingerprint"]

    response = client.post("/decompose", json={"config": irrational_document()})
    body = response.json()
    assert body["decomposition"]["exponent_matrix"] == [[1], [-1]]
    assert body["projection"]["q"] == [1, -1]


def test_invalid_config_names_the_field(client):
    document = irrational_document()
    document["nodes"][1]["angle"]["coeffs"] = []
    response = client.post("/bounds", json={"config": document})
    assert response.status_code == 422
    body = response.json()
    assert body["error"] == "ConfigError"
    assert body["field"] == "nodes[1].angle.coeffs"


def test_extremal(client):
    response = client.get("/extremal/2")
    assert response.status_code == 200
    assert [node["angle"]["rational"] for node in response.json()["nodes"]] == ["1/3", "2/3"]
    assert client.get("/extremal/0").status_code == 422
