"""
Integration tests for the HTTP API.
Uses pytest-asyncio + HTTPX against the ASGI app.
"""
import inspect

import pytest
from httpx import ASGITransport, AsyncClient

from app.main import app
from app.services.io import to_document
from app.services.sequences import a3_sequence


@pytest.fixture
def a3_two_document():
    return to_document(a3_sequence(2)).model_dump(mode="json")


@pytest.mark.asyncio
class TestSequenceAPI:
    async def test_health_check(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    async def test_stored_a3(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/sequences/a3/2")
        assert resp.status_code == 200
        body = resp.json()
        assert body["hamiltonians"] == [1, 2, 3, 2, 1]
        assert body["times"][0] == "0.1666666666666667"
        assert body["pulses"] == ["P", "P", "Pinv", "Pinv", "none"]

    async def test_qdd3(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/sequences/qdd3")
        assert resp.status_code == 200
        assert len(resp.json()["hamiltonians"]) == 26

    async def test_unknown_group(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/sequences/bogus/1")
        assert resp.status_code == 404

    async def test_negative_order(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/sequences/a3/-1")
        assert resp.status_code == 422
        assert resp.json()["error"] == "InputError"

    async def test_solve(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/sequences/solve", json={"hamiltonians": [1, 2, 3], "order": 1})
        assert resp.status_code == 200
        times = [float(t) for t in resp.json()["times"]]
        assert times == pytest.approx([1 / 3, 2 / 3], abs=1e-13)
        assert resp.json()["group"] == "custom"

    async def test_solve_wrong_length(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/sequences/solve", json={"hamiltonians": [1, 2, 3], "order": 2})
        assert resp.status_code == 422
        assert resp.json()["error"] == "SequenceValidationError"

    async def test_solve_rejects_bad_labels(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/sequences/solve", json={"hamiltonians": [1, 9], "order": 1})
        assert resp.status_code == 422


@pytest.mark.asyncio
class TestVerifyAPI:
    async def test_classical(self, a3_two_document):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/verify/classical", json={"sequence": a3_two_document, "order": 2})
        assert resp.status_code == 200
        body = resp.json()
        assert body["passed"] is True
        assert body["families"] == ["f1", "f2"]

    async def test_quantum(self, a3_two_document):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/verify/quantum", json={"sequence": a3_two_document, "order": 2})
        assert resp.status_code == 200
        body = resp.json()
        assert body["verdict"] >= 2
        assert set(body["spreads"]) == {"1", "2"}

    async def test_pulses_must_close(self, a3_two_document):
        a3_two_document["pulses"][-1] = "P"
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/verify/classical", json={"sequence": a3_two_document, "order": 2})
        assert resp.status_code == 422
        assert resp.json()["error"] == "SequenceValidationError"

    async def test_order_limit(self, a3_two_document):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.post("/v1/verify/quantum", json={"sequence": a3_two_document, "order": 7})
        assert resp.status_code == 422


@pytest.mark.asyncio
class TestFilterAPI:
    async def test_udd_curve(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/filters/udd/1", params={"points": 10})
        assert resp.status_code == 200
        body = resp.json()
        assert body["functions"] == ["f"]
        assert len(body["omega_t"]) == 10
        assert body["low_frequency_slopes"]["f"] == pytest.approx(4.0, rel=0.05)

    async def test_inverted_range(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/filters/a3/1", params={"omega_min": 10.0, "omega_max": 1.0})
        assert resp.status_code == 422

    async def test_unknown_group(self):
        async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
            resp = await c.get("/v1/filters/custom/1")
        assert resp.status_code == 404


class TestRoutes:
    def test_handlers_are_coroutines(self):
        endpoints = [r.endpoint for r in app.routes if getattr(r, "path", "").startswith("/v1")]
        assert len(endpoints) == 6
        assert all(inspect.iscoroutinefunction(e) for e in endpoints)
