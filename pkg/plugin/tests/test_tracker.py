"""Plugin integration tests against a real service process.

The service is driven purely through its external surfaces: the
``energyvis serve`` command and the HTTP API.
"""

import json
import socket
import subprocess
import sys
import time
import urllib.error
import urllib.request

import pytest

from energyvis_client import SESSION_URL_ENV, TrackerError, track

UNREACHABLE = "http://127.0.0.1:9/"  # discard port: refused immediately


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _get(url: str):
    with urllib.request.urlopen(url, timeout=5) as response:
        return json.loads(response.read())


@pytest.fixture(scope="module")
def service_url():
    port = _free_port()
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "energyvis.cli",
            "serve",
            "--port",
            str(port),
            "--sampler",
            "simulated",
            "--waveform",
            "constant:100",
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 15
        while True:
            try:
                if _get(f"{base}/health") == {"status": "ok"}:
                    break
            except (urllib.error.URLError, ConnectionError):
                if time.monotonic() > deadline:
                    proc.kill()
                    raise RuntimeError("service did not come up")
                time.sleep(0.1)
        yield base
    finally:
        proc.terminate()
        proc.wait(timeout=10)


HARDWARE = [("NVIDIA T4", 1)]


class TestAgainstRealService:
    def test_three_epoch_calls_yield_three_epochs(self, service_url):
        with track(model_name="plugin-run", hardware=HARDWARE, region="GA",
                   url=service_url) as run:
            assert run.active
            session_url = run.session_url
            for _ in range(3):
                record = run.epoch()
                assert record is not None
        profile = _get(session_url + "/profile")
        assert len(profile["epochs"]) == 3
        assert profile["live"] is False  # halted on exit

    def test_exception_halts_and_propagates(self, service_url):
        with pytest.raises(RuntimeError, match="boom"):
            with track(model_name="crashing", hardware=HARDWARE, region="GA",
                       url=service_url) as run:
                session_url = run.session_url
                run.epoch()
                raise RuntimeError("boom")
        profile = _get(session_url + "/profile")
        assert profile["live"] is False
        assert profile["state"] == "halted"

    def test_attached_session_is_left_running(self, service_url, monkeypatch):
        # simulate the CLI flow: the session exists and arrives via env
        body = json.dumps({
            "model_name": "cli-owned",
            "hardware": [{"catalog_key": "NVIDIA T4", "quantity": 1}],
            "region_code": "GA",
        }).encode()
        request = urllib.request.Request(
            service_url + "/sessions", data=body, method="POST",
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request, timeout=5) as response:
            session = json.loads(response.read())
        monkeypatch.setenv(SESSION_URL_ENV, session["url"])

        with track() as run:
            assert run.active and not run.owns_session
            run.epoch()
        profile = _get(session["url"] + "/profile")
        assert profile["state"] == "running"  # detach, not halt
        assert len(profile["epochs"]) == 1

    def test_close_is_idempotent(self, service_url):
        with track(model_name="idem", hardware=HARDWARE, region="GA",
                   url=service_url) as run:
            run.epoch()
        run.close()  # second close: no error, no second halt attempt
        assert _get(run.session_url + "/profile")["state"] == "halted"


class TestFailureModes:
    def test_fail_open_noop_run(self, monkeypatch):
        monkeypatch.delenv(SESSION_URL_ENV, raising=False)
        with track(model_name="x", hardware=HARDWARE, region="GA",
                   url=UNREACHABLE) as run:
            assert not run.active
            assert run.epoch() is None

    def test_fail_open_makes_no_network_calls_after_first_failure(self, monkeypatch):
        monkeypatch.delenv(SESSION_URL_ENV, raising=False)
        calls = []
        real_urlopen = urllib.request.urlopen

        def counting_urlopen(*args, **kwargs):
            calls.append(args)
            return real_urlopen(*args, **kwargs)

        monkeypatch.setattr(urllib.request, "urlopen", counting_urlopen)
        with track(model_name="x", hardware=HARDWARE, region="GA",
                   url=UNREACHABLE) as run:
            after_enter = len(calls)
            for _ in range(50):
                run.epoch()
            assert len(calls) == after_enter

    def test_fail_open_overhead_under_1ms(self, monkeypatch):
        monkeypatch.delenv(SESSION_URL_ENV, raising=False)
        with track(model_name="x", hardware=HARDWARE, region="GA",
                   url=UNREACHABLE) as run:
            iterations = 1000
            started = time.perf_counter()
            for _ in range(iterations):
                run.epoch()
            per_call = (time.perf_counter() - started) / iterations
        assert per_call < 1e-3, f"epoch() took {per_call * 1e6:.1f} us in no-op mode"

    def test_fail_closed_raises(self, monkeypatch):
        monkeypatch.delenv(SESSION_URL_ENV, raising=False)
        with pytest.raises(TrackerError):
            with track(model_name="x", hardware=HARDWARE, region="GA",
                       url=UNREACHABLE, fail_open=False):
                pass

    def test_no_configuration_fail_open(self, monkeypatch):
        monkeypatch.delenv(SESSION_URL_ENV, raising=False)
        with track() as run:
            assert not run.active
            assert run.epoch() is None
