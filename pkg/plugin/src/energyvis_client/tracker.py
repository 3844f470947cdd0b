"""Session attach/open logic and the epoch-marking context manager."""

from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from contextlib import contextmanager

log = logging.getLogger("energyvis_client")

SESSION_URL_ENV = "ENERGYVIS_SESSION_URL"
DEFAULT_TIMEOUT_S = 2.0
EPOCH_RETRIES = 3


class TrackerError(RuntimeError):
    """Raised in fail-closed mode when the service cannot be used."""


def _request(url: str, method: str, body: dict | None = None, timeout: float = DEFAULT_TIMEOUT_S):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(
        url, data=data, method=method, headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return json.loads(response.read())


class TrackedRun:
    """Handle the wrapped training code calls ``epoch()`` on.

    After the first connection-level failure (fail-open mode) the handle
    goes inert: no further network calls, every method returns immediately.
    """

    def __init__(self, session_url: str | None, owns_session: bool, fail_open: bool,
                 timeout: float = DEFAULT_TIMEOUT_S):
        self.session_url = session_url
        self.owns_session = owns_session
        self.fail_open = fail_open
        self.timeout = timeout
        self._dead = session_url is None
        self._closed = False

    @property
    def active(self) -> bool:
        return not self._dead

    def epoch(self) -> dict | None:
        """Mark an epoch boundary; returns the closed epoch record.

        Network failures are retried up to 3 times, then logged. A
        connection-level failure turns the handle inert in fail-open mode
        and raises in fail-closed mode.
        """
        if self._dead or self._closed:
            return None
        last_error: Exception | None = None
        for _ in range(EPOCH_RETRIES):
            try:
                return _request(self.session_url + "/epoch", "POST", timeout=self.timeout)
            except urllib.error.HTTPError as exc:
                # the service answered; a state error will not heal by retrying
                log.warning("epoch mark rejected: %s", exc)
                return None
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                last_error = exc
        log.warning("epoch mark failed after %d attempts: %s", EPOCH_RETRIES, last_error)
        if not self.fail_open:
            raise TrackerError(f"epoch mark failed: {last_error}")
        self._dead = True
        return None

    def close(self) -> None:
        """Halt (owned sessions) or detach (attached sessions). Idempotent."""
        if self._closed:
            return
        self._closed = True
        if self._dead or not self.owns_session:
            return
        try:
            _request(
                self.session_url + "/halt",
                "POST",
                {"close_open_epoch": False},
                timeout=self.timeout,
            )
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            log.warning("halt failed: %s", exc)


def _open_session(base_url: str, model_name, hardware, region, pue, timeout) -> str:
    specs = []
    for item in hardware or ():
        if isinstance(item, dict):
            specs.append({"catalog_key": item["catalog_key"], "quantity": int(item.get("quantity", 1))})
        elif isinstance(item, (tuple, list)):
            specs.append({"catalog_key": item[0], "quantity": int(item[1]) if len(item) > 1 else 1})
        else:
            specs.append({"catalog_key": str(item), "quantity": 1})
    body = _request(
        base_url.rstrip("/") + "/sessions",
        "POST",
        {
            "model_name": model_name or "tracked-run",
            "hardware": specs,
            "region_code": region,
            "pue": pue,
        },
        timeout=timeout,
    )
    return body["url"]


@contextmanager
def track(
    model_name: str | None = None,
    hardware=None,
    region: str | None = None,
    pue: float = 1.0,
    url: str | None = None,
    fail_open: bool = True,
    timeout: float = DEFAULT_TIMEOUT_S,
):
    """Context manager wrapping a training run.

    Resolution order: an explicit session URL (or ENERGYVIS_SESSION_URL)
    attaches to a CLI-owned session; a service base URL opens a new session
    (model_name/hardware/region required) that is halted on exit, clean or
    not. With no reachable service: fail_open warns once and the wrapped
    code runs untracked; fail_open=False raises TrackerError.
    """
    env_url = os.environ.get(SESSION_URL_ENV)
    session_url: str | None = None
    owns = False
    try:
        if url and "/sessions/" in url:
            session_url = url.rstrip("/")
        elif env_url:
            session_url = env_url.rstrip("/")
        elif url:
            session_url = _open_session(url, model_name, hardware, region, pue, timeout)
            owns = True
        else:
            raise urllib.error.URLError("no service URL configured")
        if not owns:
            _request(session_url + "/profile", "GET", timeout=timeout)  # reachability probe
    except (urllib.error.URLError, OSError, TimeoutError, KeyError, ValueError) as exc:
        if not fail_open:
            raise TrackerError(f"tracking service unavailable: {exc}") from exc
        log.warning("tracking disabled (fail-open): %s", exc)
        session_url = None
        owns = False

    run = TrackedRun(session_url, owns_session=owns, fail_open=fail_open, timeout=timeout)
    if run.active:
        print(f"energyvis session: {run.session_url}")
    try:
        yield run
    finally:
        run.close()
