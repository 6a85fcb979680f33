import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from guidedplan.llm import (AuthenticationError, ChatClient, LlmConfig, MalformedResponseError,
                            TransportExhaustedError, complete)

LAYER1 = ("DRIVE-TRUCK {'?truck': 't1', '?loc-from': 'l10', '?loc-to': 'l11', '?city': 'c1'}\n"
          "DRIVE-TRUCK {'?truck': 't0', '?loc-from': 'l00', '?loc-to': 'l01', '?city': 'c0'}")


class Stub:
    """Local chat-completion endpoint driven by a script of (status, body) replies."""

    def __init__(self, script, require_key=None):
        self.script = list(script)
        self.require_key = require_key
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                n = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(n))
                stub.requests.append((self.path, dict(self.headers), body))
                if stub.require_key and self.headers.get("Authorization") != f"Bearer {stub.require_key}":
                    status, payload = 401, {"error": "bad key"}
                else:
                    status, payload = stub.script.pop(0) if len(stub.script) > 1 else stub.script[0]
                data = payload.encode() if isinstance(payload, str) else json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1"
        threading.Thread(target=self.server.serve_forever, daemon=True).start()

    def close(self):
        self.server.shutdown()
        self.server.server_close()


def reply(text):
    return 200, {"choices": [{"message": {"role": "assistant", "content": text}}]}


@pytest.fixture
def stub_factory():
    made = []

    def make(script, **kw):
        s = Stub(script, **kw)
        made.append(s)
        return s

    yield make
    for s in made:
        s.close()


def config(url, **kw):
    return LlmConfig(base_url=url, model="stub", api_key="k", backoff_base=0.001, **kw)


def test_echo(stub_factory):
    stub = stub_factory([reply(LAYER1)])
    assert complete(config(stub.url), "prompt") == LAYER1
    path, headers, body = stub.requests[0]
    assert path == "/v1/chat/completions"
    assert headers["Authorization"] == "Bearer k"
    assert body["messages"] == [{"role": "user", "content": "prompt"}]
    assert body["temperature"] == 0


def test_retries_on_429(stub_factory):
    stub = stub_factory([(429, {}), (429, {}), reply("ok")])
    client = ChatClient(config(stub.url, trace=True), sleep=lambda s: None)
    assert client.complete("p") == "ok"
    assert client.last_retries == 2
    assert client.transcripts[0]["retries"] == 2


def test_retry_budget(stub_factory):
    stub = stub_factory([(503, {})])
    client = ChatClient(config(stub.url, max_retries=2), sleep=lambda s: None)
    with pytest.raises(TransportExhaustedError) as e:
        client.complete("p")
    assert e.value.attempts == 3 and e.value.code == "transport-exhausted"
    assert len(stub.requests) == 3


def test_malformed(stub_factory):
    stub = stub_factory([(200, {"choices": [{"message": {}}]})])
    with pytest.raises(MalformedResponseError):
        complete(config(stub.url), "p")


def test_auth_failure(stub_factory):
    stub = stub_factory([reply("never")], require_key="secret")
    with pytest.raises(AuthenticationError):
        complete(config(stub.url), "p")
    assert len(stub.requests) == 1


def test_connection_refused_is_exhaustion():
    client = ChatClient(LlmConfig(base_url="http://127.0.0.1:9", max_retries=1, backoff_base=0.001),
                        sleep=lambda s: None)
    with pytest.raises(TransportExhaustedError):
        client.complete("p")


def test_config_from_env():
    cfg = LlmConfig.from_env({"LLM_API_KEY": "sk-hidden", "LLM_BASE_URL": "http://h", "LLM_MODEL": "m"})
    assert (cfg.api_key, cfg.base_url, cfg.model) == ("sk-hidden", "http://h", "m")
    assert "sk-hidden" not in repr(cfg)
    with pytest.raises(ValueError):
        LlmConfig(max_retries=-1)


def test_backoff_grows_and_is_capped():
    import random
    client = ChatClient(LlmConfig(backoff_base=1.0, backoff_cap=4.0), rng=random.Random(1))
    delays = [client._delay(i) for i in range(6)]
    assert 0.5 <= delays[0] <= 1.0
    assert all(2.0 <= d <= 4.0 for d in delays[2:])
