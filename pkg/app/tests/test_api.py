import pytest
from fastapi.testclient import TestClient
from unittest.mock import patch

from app.agent.inference import build_agent
from app.errors import CSyntaxError, MissingModelError
from app.server import app
from app.serving.service import PredictionService
from app.serving.views import NestPrediction

from app.tests.conftest import DOT_PRODUCT, TWO_LOOPS

client = TestClient(app)


@pytest.fixture
def mock_service():
    """Fixture to mock the prediction service"""
    with patch('app.server.prediction_service') as mock_prediction_service:
        mock_prediction_service.is_ready.return_value = True
        mock_prediction_service.predict.return_value = (
            [NestPrediction(nest_id="dot.c:7", line=7, vf=4, if_=4)],
            None,
        )
        yield mock_prediction_service


@pytest.fixture
def trained_service(tmp_path, dot_nest, small_embedding, small_space, small_ppo):
    """Service backed by an untrained agent saved to disk"""
    agent = build_agent([dot_nest], small_embedding, small_space, small_ppo)
    path = agent.save(tmp_path / "checkpoint.json", {"seed": 0})
    return PredictionService(str(path))


def test_extract_endpoint():
    """Extraction works without a checkpoint"""
    response = client.post("/extract", json={"source": TWO_LOOPS, "file": "two.c"})

    assert response.status_code == 200
    nests = response.json()["nests"]
    assert [nest["nest_id"] for nest in nests] == ["two.c:3", "two.c:6"]
    assert nests[0]["depth"] == 1
    assert "a[i]" in nests[0]["embed_snippet"]


def test_extract_syntax_error():
    response = client.post("/extract", json={"source": "void f(void)\n{\n    x = ;\n}\n"})

    assert response.status_code == 400
    assert response.json()["detail"]["error_code"] == "syntax_error"


def test_predict_endpoint(mock_service):
    response = client.post("/predict", json={"source": DOT_PRODUCT, "file": "dot.c"})

    assert response.status_code == 200
    data = response.json()
    assert data["predictions"] == [{"nest_id": "dot.c:7", "line": 7, "vf": 4, "if": 4}]
    assert data["source"] is None
    assert "execution_time_ms" in data
    mock_service.predict.assert_called_once_with(DOT_PRODUCT, "dot.c", False)


def test_predict_without_checkpoint(mock_service):
    mock_service.predict.side_effect = MissingModelError(detail="No checkpoint loaded")
    response = client.post("/predict", json={"source": DOT_PRODUCT})

    assert response.status_code == 423
    assert response.json()["detail"]["error_code"] == "missing_model"


def test_predict_syntax_error(mock_service):
    mock_service.predict.side_effect = CSyntaxError(detail="Unexpected token")
    response = client.post("/predict", json={"source": "for"})

    assert response.status_code == 400
    assert response.json()["detail"]["message"] == "Unexpected token"


def test_predict_unexpected_error(mock_service):
    mock_service.predict.side_effect = RuntimeError("boom")
    response = client.post("/predict", json={"source": DOT_PRODUCT})

    assert response.status_code == 500
    assert response.json()["detail"] == "boom"


def test_predict_rejects_empty_source():
    response = client.post("/predict", json={"source": ""})
    assert response.status_code == 422


def test_inject_endpoint():
    request = {"source": TWO_LOOPS, "file": "two.c", "vf": 8, "if": 2, "nest": "two.c:6"}
    response = client.post("/inject", json=request)

    assert response.status_code == 200
    data = response.json()
    assert data["nests"] == ["two.c:6"]
    assert data["source"].count("vectorize_width(8) interleave_count(2)") == 1


def test_inject_every_nest():
    response = client.post("/inject", json={"source": TWO_LOOPS, "vf": 2, "if": 1})

    assert response.status_code == 200
    assert response.json()["source"].count("/*nv*/") == 2


@pytest.mark.parametrize("vf, if_", [(3, 1), (4, 0), (4, 6)])
def test_inject_rejects_bad_factors(vf, if_):
    response = client.post("/inject", json={"source": TWO_LOOPS, "vf": vf, "if": if_})
    assert response.status_code == 422


def test_inject_unknown_nest():
    response = client.post("/inject", json={"source": TWO_LOOPS, "vf": 2, "if": 1, "nest": "9"})

    assert response.status_code == 404
    assert response.json()["detail"]["error_code"] == "nest_not_found"


def test_ready_endpoint():
    """Test the ready endpoint"""
    with patch('app.server.prediction_service') as mock_service:
        # Test when service is ready
        mock_service.is_ready.return_value = True
        response = client.get("/ready")
        assert response.status_code == 200

        # Test when service is not ready
        mock_service.is_ready.return_value = False
        response = client.get("/ready")
        assert response.status_code == 423


def test_root_endpoint():
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["docs_url"] == "/docs"


def test_service_without_checkpoint():
    service = PredictionService("")
    assert not service.is_ready()
    with pytest.raises(MissingModelError):
        service.predict(DOT_PRODUCT, "dot.c")


def test_service_with_unreadable_checkpoint(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert not PredictionService(str(path)).is_ready()


def test_service_predicts_and_rewrites(trained_service, dot_nest):
    assert trained_service.is_ready()
    predictions, rewritten = trained_service.predict(DOT_PRODUCT, "dot.c", rewrite=True)

    action = trained_service.agent.greedy(dot_nest)
    assert predictions == [NestPrediction(nest_id="dot.c:7", line=7, vf=action.vf, if_=action.if_)]
    assert f"vectorize_width({action.vf}) interleave_count({action.if_}) /*nv*/" in rewritten
    assert trained_service.predict(DOT_PRODUCT, "dot.c")[1] is None
