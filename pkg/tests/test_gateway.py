"""Gateway service: REST surface, durable log, replay, crash recovery."""

import pytest
from fastapi.testclient import TestClient

from nlbeam.gateway import Gateway, GatewayConfig, create_app, replay_session
from nlbeam.gateway.store import LogRow, LogStore
from nlbeam.gateway.transport import DirectoryChannel, InProcessChannel, poll, publish
from nlbeam.backends import Rule, scripted_backend
from nlbeam.errors import ChannelUnavailable, SchemaMismatch


@pytest.fixture
def client(gateway_config):
    return TestClient(create_app(Gateway(gateway_config)))


MEASURE = "Measure sample for 5 seconds."


def test_healthz(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_input_confirm_flow(client):
    resp = client.post("/input", json={"text": MEASURE, "session": "s1"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["command_class"] == "Op"
    assert body["status"] == "pending"
    assert body["payload"]["code"] == "sam.measure(5)"

    pending = client.get("/pending", params={"session": "s1"}).json()["pending"]
    assert pending["action_id"] == body["action_id"]

    confirm = client.post("/confirm", json={"action_id": body["action_id"]}).json()
    assert confirm["status"] == "executed"
    assert confirm["final_time"] == 5.0
    measures = [e for e in confirm["trace"] if e["kind"] == "Measure"]
    assert len(measures) == 1
    assert measures[0]["t_start"] == 0.0
    assert measures[0]["args"] == {"exposure_s": 5.0, "saved": True}

    rows = client.get("/log", params={"session": "s1"}).json()["rows"]
    assert len(rows) == 1
    assert rows[0]["confirmed"] is True
    assert rows[0]["executed_ok"] is True
    assert rows[0]["cog_output"] == "sam.measure(5)"


def test_second_input_blocked_while_pending(client):
    first = client.post("/input", json={"text": MEASURE, "session": "s2"})
    assert first.status_code == 200
    second = client.post("/input", json={"text": MEASURE, "session": "s2"})
    assert second.status_code == 409


def test_edit_logged(client):
    body = client.post("/input", json={"text": MEASURE, "session": "s3"}).json()
    confirm = client.post(
        "/confirm", json={"action_id": body["action_id"], "edited_code": "sam.measure(10)"}
    ).json()
    assert confirm["trace"][0]["args"]["exposure_s"] == 10.0
    row = client.get("/log", params={"session": "s3"}).json()["rows"][0]
    assert row["cog_output"] == "sam.measure(5)"  # original survives
    assert row["edited_output"] == "sam.measure(10)"


def test_reject(client):
    body = client.post("/input", json={"text": MEASURE, "session": "s4"}).json()
    out = client.post(
        "/confirm", json={"action_id": body["action_id"], "reject": True}
    ).json()
    assert out["status"] == "rejected"
    row = client.get("/log", params={"session": "s4"}).json()["rows"][0]
    assert row["confirmed"] is False


def test_confirm_error_codes(client):
    assert client.post("/confirm", json={"action_id": "nope"}).status_code == 404
    body = client.post("/input", json={"text": MEASURE, "session": "s5"}).json()
    client.post("/confirm", json={"action_id": body["action_id"]})
    again = client.post("/confirm", json={"action_id": body["action_id"]})
    assert again.status_code == 409


def test_audio_unsupported_without_transcriber(client):
    resp = client.post("/input", json={"audio": "AAAA", "session": "s6"})
    assert resp.status_code == 501


def test_missing_text(client):
    assert client.post("/input", json={"session": "s7"}).status_code == 422


def test_function_preview_and_commit(gateway_config):
    gateway_config.backends["refiner"] = scripted_backend(
        [Rule("", '{"input": "check the beamstop", "output": "wbs()"}', mode="substring")]
    )
    client = TestClient(create_app(Gateway(gateway_config)))
    preview = client.post(
        "/functions", json={"description": "a beamstop checking function"}
    ).json()
    assert preview["committed"] is False
    assert preview["preview"]["output"] == "wbs()"

    commit = client.post(
        "/functions",
        json={"entry": {"id": "wbs", "input": "check the beamstop", "output": "wbs()"}},
    ).json()
    assert commit["committed"] is True
    assert commit["version"] == 1

    # the committed function is now part of the classifier prompt examples
    gw = Gateway(gateway_config)
    from nlbeam.registry import build_classifier_prompt

    prompt = build_classifier_prompt(gw.registry, gateway_config.style)
    assert "check the beamstop" in prompt


def test_chat_endpoint(gateway_config, tmp_path):
    from conftest import write_corpus

    gateway_config.corpus_dir = str(write_corpus(tmp_path / "corpus"))
    gateway_config.backends["chat"] = scripted_backend(
        [Rule("", "scientific, high-level: pixels are 172 microns", mode="substring")]
    )
    client = TestClient(create_app(Gateway(gateway_config)))
    out = client.post(
        "/chat", json={"query": "how big are the detector pixels", "session": "s8"}
    ).json()
    assert out["route"] == "scientific_high_level"
    assert out["chunks"]


def test_replay_reproduces_outputs(gateway_config):
    gw = Gateway(gateway_config)
    resp = gw.handle_input("replayed", MEASURE)
    gw.handle_confirm(resp["action_id"])
    results = replay_session(gateway_config, "replayed", store=gw.store)
    assert results == [(MEASURE, "Op", "sam.measure(5)")]


def test_crash_restart_represents_pending(gateway_config):
    gw = Gateway(gateway_config)
    resp = gw.handle_input("s9", MEASURE)
    assert resp["status"] == "pending"
    del gw  # simulated crash: no confirm, no clean shutdown

    revived = Gateway(gateway_config)
    pending = revived.pending_for("s9")
    assert pending is not None
    assert pending.payload.code == "sam.measure(5)"
    out = revived.handle_confirm(pending.action_id)
    assert out["status"] == "executed"


def test_config_from_file(tmp_path, registry_file):
    import json

    path = tmp_path / "config.json"
    path.write_text(
        json.dumps({"registry_path": str(registry_file), "instrument": "cms"})
    )
    config = GatewayConfig.from_file(path)
    assert config.instrument == "cms"

    path.write_text(json.dumps({"db_path": "x"}))
    from nlbeam.errors import BadConfig

    with pytest.raises(BadConfig):
        GatewayConfig.from_file(path)


# --- store and transport -------------------------------------------------


def test_store_filters(tmp_path):
    store = LogStore(str(tmp_path / "log.db"))
    store.ensure_session("a")
    store.record(LogRow(session_id="a", input_text="x", cog_invoked="Operator", confirmed=True))
    store.record(LogRow(session_id="a", input_text="y", cog_invoked="Analyst"))
    store.record(LogRow(session_id="b", input_text="z", cog_invoked="Operator"))

    assert len(store.query_log(session="a")) == 2
    assert len(store.query_log(cog="Operator")) == 2
    assert len(store.query_log(confirmed=True)) == 1
    assert [r.input_text for r in store.query_log()] == ["x", "y", "z"]


def test_store_schema_mismatch(tmp_path):
    path = str(tmp_path / "log.db")
    store = LogStore(path)
    store._conn.execute("UPDATE meta SET value='99' WHERE key='schema_version'")
    store._conn.commit()
    store.close()
    with pytest.raises(SchemaMismatch):
        LogStore(path)


def test_inprocess_channel_ordering():
    channel = InProcessChannel()
    publish(channel, "s", "console", "user_input", {"text": "a"})
    publish(channel, "s", "gateway", "execution_result", {"ok": True})
    envelopes = poll(channel)
    assert [e.id for e in envelopes] == [1, 2]
    assert poll(channel, after_id=1)[0].kind == "execution_result"


def test_channel_rejects_unknown_kind():
    with pytest.raises(ChannelUnavailable):
        publish(InProcessChannel(), "s", "console", "telepathy", {})


def test_directory_channel_roundtrip(tmp_path):
    channel = DirectoryChannel(str(tmp_path))
    channel.publish("s", "console", "user_input", {"text": "a"})
    channel.publish("s", "gateway", "chat", {"q": "b"})
    envelopes = channel.poll()
    assert [e.id for e in envelopes] == [1, 2]
    assert envelopes[0].payload == {"text": "a"}
    assert channel.poll(after_id=2) == []
