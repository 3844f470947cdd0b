"""Live-tracking service: session lifecycle, epoch marks, live snapshots,
what-if evaluation, and profile storage.

``TrackingService`` is the transport-independent core; ``create_app`` wraps
it in an HTTP API (all bodies are interchange-format JSON, errors are
``{error_code, message, detail}``). Sessions keep state in memory with an
optional append-only journal on disk so a crashed host can recover the
epochs of a long run.
"""

from __future__ import annotations

import json
import logging
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import emission, profile_io, sampling
from .catalog import (
    HardwareCatalog,
    IntensityTable,
    default_hardware_catalog,
    default_intensity_table,
    load_reference_footprints,
)
from .errors import (
    DomainError,
    EnergyVisError,
    InsufficientDataError,
    InvalidStateError,
    ProfileValidationError,
    SessionNotFoundError,
    UnknownHardwareError,
    UnknownRegionError,
)
from .types import Counterfactual, EnergyProfile, EpochRecord, HardwareSpec, Metric

log = logging.getLogger(__name__)

RUNNING = "running"
PAUSED = "paused"
HALTED = "halted"


class _OffsetClock:
    """Monotonic clock rebased to zero at session start."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


@dataclass
class _Session:
    id: str
    model_name: str
    hardware: tuple[HardwareSpec, ...]
    region_code: str
    pue: float
    interval_s: float
    simulated: bool
    clock: object
    devices: list
    sink: sampling.SampleSink
    created_at_profile: EnergyProfile
    state: str = RUNNING
    epochs: list[EpochRecord] = field(default_factory=list)
    open_epoch_start: float = 0.0
    next_tick: float = 0.0
    pauses: list[tuple[float, float]] = field(default_factory=list)  # within open epoch
    pause_started: float | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    stop_event: threading.Event = field(default_factory=threading.Event)
    thread: threading.Thread | None = None


class TrackingService:
    """In-memory session and profile registry plus the what-if evaluator."""

    def __init__(
        self,
        hardware_catalog: HardwareCatalog | None = None,
        intensity_table: IntensityTable | None = None,
        journal_dir: str | Path | None = None,
        default_sampler: dict | None = None,
        base_url: str = "http://127.0.0.1:8000",
    ):
        self.hardware_catalog = hardware_catalog or default_hardware_catalog()
        self.intensity_table = intensity_table or default_intensity_table()
        self.journal_dir = Path(journal_dir) if journal_dir else None
        self.default_sampler = default_sampler or {"kind": "real"}
        self.base_url = base_url.rstrip("/")
        self.sessions: dict[str, _Session] = {}
        self.profiles: dict[str, EnergyProfile] = {}
        self._store_lock = threading.Lock()
        if self.journal_dir:
            self.journal_dir.mkdir(parents=True, exist_ok=True)
            self._recover_journals()

    # -- session lifecycle -------------------------------------------------

    def start_session(
        self,
        model_name: str,
        hardware: list[HardwareSpec],
        region_code: str,
        pue: float = 1.0,
        sampler: dict | None = None,
    ) -> _Session:
        if not hardware:
            raise DomainError("a tracked session needs at least one hardware spec")
        for spec in hardware:  # misses raise with catalog suggestions
            self.hardware_catalog.lookup(spec.catalog_key)
        region = self.intensity_table.lookup(region_code).region_code

        sampler = sampler or self.default_sampler
        kind = sampler.get("kind", "real")
        interval = float(sampler.get("interval_s", sampling.DEFAULT_INTERVAL_S))
        if kind == "simulated":
            clock = sampling.SimulatedClock()
            waveform = sampling.waveform_from_dict(
                sampler.get("waveform", {"kind": "constant", "watts": 100.0})
            )
            count = int(sampler.get("devices", 1))
            devices = [
                sampling.SimulatedDevice(waveform, device_id=f"sim:{i}") for i in range(count)
            ]
            simulated = True
        elif kind == "real":
            clock = _OffsetClock()
            devices = sampling.discover_devices(
                powercap_root=Path(sampler.get("powercap_root", sampling.POWERCAP_ROOT)),
                gpu_tool=sampler.get("gpu_tool", sampling.GPU_QUERY_TOOL),
            )
            if not devices:
                raise DomainError(
                    "no power-reporting devices found; use a simulated sampler on this host"
                )
            simulated = False
        else:
            raise DomainError(f"unknown sampler kind {kind!r}")

        session_id = secrets.token_urlsafe(24)
        profile = EnergyProfile(
            model_name=model_name,
            region_code=region,
            pue=pue,
            hardware=tuple(hardware),
            epochs=(),
            live=True,
        )
        session = _Session(
            id=session_id,
            model_name=model_name,
            hardware=tuple(hardware),
            region_code=region,
            pue=pue,
            interval_s=interval,
            simulated=simulated,
            clock=clock,
            devices=devices,
            sink=sampling.SampleSink(),
            created_at_profile=profile,
        )
        if simulated:
            # materialize the t=0 tick so every epoch starts on a sample
            self._materialize(session, upto=0.0)
        else:
            config = sampling.SamplerConfig(interval_s=interval, devices=devices, clock=clock)
            session.thread = threading.Thread(
                target=sampling.sampling_loop,
                args=(config, session.sink, session.stop_event),
                kwargs={"gate": lambda: session.state == RUNNING},
                name=f"sampler-{session_id[:8]}",
                daemon=True,
            )
            session.thread.start()
        with self._store_lock:
            self.sessions[session_id] = session
        self._journal(session, {"event": "start", "profile": self._base_document(session)})
        return session

    def _get_session(self, session_id: str) -> _Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionNotFoundError(f"no session {session_id!r}")
        return session

    def session_url(self, session_id: str) -> str:
        return f"{self.base_url}/sessions/{session_id}"

    def _materialize(self, session: _Session, upto: float) -> None:
        """Generate simulated ticks in (last_tick, upto]; call with lock held
        (or before the session is published)."""
        while session.next_tick <= upto + 1e-12:
            t = session.next_tick
            for device in session.devices:
                sample = device.read(t)
                if sample is not None:
                    session.sink.append(sample)
            session.next_tick = t + session.interval_s

    def _boundary_sample(self, session: _Session, t: float) -> None:
        """Exact-value samples at an epoch/pause boundary (simulated only)."""
        for device in session.devices:
            sample = device.read(t)
            if sample is not None:
                session.sink.append(sample)

    def advance(self, session_id: str, seconds: float) -> dict:
        """Move a simulated session's clock forward, materializing ticks.

        Real sessions advance with wall time; asking them is a state error.
        """
        session = self._get_session(session_id)
        if not session.simulated:
            raise InvalidStateError("only simulated sessions can be advanced")
        if session.state == HALTED:
            raise InvalidStateError("cannot advance a halted session")
        if seconds < 0:
            raise DomainError(f"seconds must be >= 0, got {seconds!r}")
        with session.lock:
            now = session.clock.advance(seconds)
            if session.state == RUNNING:
                self._materialize(session, upto=now)
            else:
                session.next_tick = now  # paused: skip the gap entirely
            return {"now": now, "samples": len(session.sink)}

    def _segments(
        self, session: _Session, start: float, end: float
    ) -> list[tuple[float, float]]:
        """The open-epoch window minus its paused intervals."""
        pauses = list(session.pauses)
        if session.pause_started is not None:
            pauses.append((session.pause_started, end))
        segments = []
        cursor = start
        for p_start, p_end in sorted(pauses):
            p_start, p_end = max(p_start, start), min(p_end, end)
            if p_start > cursor:
                segments.append((cursor, p_start))
            cursor = max(cursor, p_end)
        if cursor < end:
            segments.append((cursor, end))
        return segments

    def _open_epoch_figures(self, session: _Session, now: float) -> tuple[float, float, int]:
        """(energy_kwh, active_duration_s, aggregated_sample_count) of the
        open epoch. The count is post-aggregation: duplicate boundary
        timestamps collapse, so it reflects what integration can use."""
        start = session.open_epoch_start
        samples = [s for s in session.sink.snapshot() if start <= s.timestamp <= now]
        segments = self._segments(session, start, now)
        energy = 0.0
        count = 0
        for seg_start, seg_end in segments:
            seg = [s for s in samples if seg_start <= s.timestamp <= seg_end]
            aggregated = emission.aggregate_samples(seg)
            count += len(aggregated)
            if len(aggregated) >= 2:
                energy += emission.integrate_epoch_energy(aggregated, session.pue)
        duration = sum(e - s for s, e in segments)
        return energy, duration, count

    def _close_open_epoch(self, session: _Session, now: float) -> EpochRecord:
        """Integrate the open window into an EpochRecord; lock held."""
        if session.simulated:
            self._materialize(session, upto=now)
            self._boundary_sample(session, now)
        energy, duration, count = self._open_epoch_figures(session, now)
        degraded = count < 2
        record = EpochRecord(
            index=len(session.epochs),
            duration_s=duration,
            energy_kwh=0.0 if degraded else energy,
            degraded=degraded,
            paused=bool(session.pauses),
        )
        session.epochs.append(record)
        session.open_epoch_start = now
        session.pauses = []
        return record

    def mark_epoch(self, session_id: str) -> EpochRecord:
        session = self._get_session(session_id)
        with session.lock:
            if session.state != RUNNING:
                raise InvalidStateError(f"cannot mark an epoch on a {session.state} session")
            record = self._close_open_epoch(session, session.clock.now())
            # journal under the lock so concurrent marks cannot interleave
            # epochs out of order
            self._journal(session, {"event": "epoch", "epoch": _epoch_dict(record)})
        return record

    def pause_session(self, session_id: str) -> str:
        session = self._get_session(session_id)
        with session.lock:
            if session.state != RUNNING:
                raise InvalidStateError(f"cannot pause a {session.state} session")
            now = session.clock.now()
            if session.simulated:
                self._materialize(session, upto=now)
                self._boundary_sample(session, now)
            session.pause_started = now
            session.state = PAUSED
        return PAUSED

    def resume_session(self, session_id: str) -> str:
        session = self._get_session(session_id)
        with session.lock:
            if session.state != PAUSED:
                raise InvalidStateError(f"cannot resume a {session.state} session")
            now = session.clock.now()
            session.pauses.append((session.pause_started, now))
            session.pause_started = None
            session.state = RUNNING
            if session.simulated:
                session.next_tick = now
                self._materialize(session, upto=now)
        return RUNNING

    def halt_session(self, session_id: str, close_open_epoch: bool = True) -> EnergyProfile:
        """Stop sampling permanently and mark the profile no longer live.

        By default the in-progress epoch is integrated and closed so no
        measured energy is dropped. Callers whose children own the epoch
        boundaries (the CLI's tracked runs) pass False: time after the
        last mark is teardown, not an epoch.
        """
        session = self._get_session(session_id)
        with session.lock:
            if session.state == HALTED:
                raise InvalidStateError("session already halted")
            now = session.clock.now()
            if session.pause_started is not None:
                session.pauses.append((session.pause_started, now))
                session.pause_started = None
            if close_open_epoch:
                _, open_duration, count = self._open_epoch_figures(session, now)
                if open_duration > 0 or count >= 2:
                    record = self._close_open_epoch(session, now)
                    self._journal(session, {"event": "epoch", "epoch": _epoch_dict(record)})
            session.state = HALTED
            session.stop_event.set()
        if session.thread is not None:
            session.thread.join(timeout=max(2 * session.interval_s, 2.0))
        self._journal(session, {"event": "halt"})
        return self._session_profile(session)

    def _session_profile(self, session: _Session) -> EnergyProfile:
        base = session.created_at_profile
        return EnergyProfile(
            model_name=base.model_name,
            region_code=base.region_code,
            pue=base.pue,
            hardware=base.hardware,
            epochs=tuple(session.epochs),
            created_at=base.created_at,
            live=session.state != HALTED,
        )

    def _base_document(self, session: _Session) -> dict:
        return profile_io.profile_to_document(self._session_profile(session))

    def get_live_profile(self, session_id: str) -> dict:
        """Consistent snapshot: closed epochs plus provisional open-epoch
        figures in separate fields (downstream math only sees closed data)."""
        session = self._get_session(session_id)
        with session.lock:
            now = session.clock.now()
            doc = self._base_document(session)
            doc["state"] = session.state
            doc["degraded_devices"] = sorted(session.sink.degraded)
            if session.state != HALTED:
                energy, duration, count = self._open_epoch_figures(session, now)
                latest: dict[str, float] = {}
                for s in session.sink.snapshot():
                    latest[s.device_id] = s.power_w
                doc["open_epoch"] = {
                    "index": len(session.epochs),
                    "started_at_s": session.open_epoch_start,
                    "duration_s": duration,
                    "energy_kwh": energy,
                    "samples": count,
                    "power_w": emission.instantaneous_power(list(latest.values()), session.pue),
                }
            return doc

    # -- profile store -----------------------------------------------------

    def import_profile(self, doc: dict) -> str:
        profile = profile_io.profile_from_document(doc)
        profile_id = f"p-{secrets.token_hex(6)}"
        with self._store_lock:
            self.profiles[profile_id] = profile
        return profile_id

    def export_profile(self, ref: str) -> dict:
        return profile_io.profile_to_document(self._resolve_profile(ref))

    def list_profiles(self) -> list[dict]:
        with self._store_lock:
            items = list(self.profiles.items())
        return [
            {
                "profile_id": pid,
                "model_name": p.model_name,
                "region_code": p.region_code,
                "epochs": len(p.epochs),
                "live": p.live,
                "created_at": profile_io.format_rfc3339(p.created_at),
            }
            for pid, p in items
        ]

    def _resolve_profile(self, ref: str) -> EnergyProfile:
        with self._store_lock:
            profile = self.profiles.get(ref)
        if profile is not None:
            return profile
        session = self.sessions.get(ref)
        if session is not None:
            with session.lock:
                return self._session_profile(session)
        raise SessionNotFoundError(f"no profile or session {ref!r}")

    # -- what-if -----------------------------------------------------------

    def what_if(
        self,
        profile: EnergyProfile,
        cf: Counterfactual | None,
        metric: Metric,
        horizon: int = 0,
    ) -> dict:
        """Baseline and alternative series plus the variable values behind
        the three emission equations, so UIs never re-derive math."""
        baseline = emission.project_profile(profile, metric, self.intensity_table, horizon)
        result: dict = {"baseline": baseline.to_dict(), "alternative": None}
        breakdown = {"baseline": self._equation_variables(profile, factor=1.0)}
        if cf is not None:
            alternative = emission.apply_counterfactual(
                profile, cf, metric, self.hardware_catalog, self.intensity_table, horizon
            )
            result["alternative"] = alternative.to_dict()
            transformed = emission.counterfactual_profile(
                profile, cf, self.hardware_catalog, self.intensity_table
            )
            factor = 1.0
            if cf.alt_hardware is not None:
                factor = emission.hardware_rescale_factor(
                    profile.hardware, cf.alt_hardware, self.hardware_catalog
                )
            breakdown["alternative"] = self._equation_variables(transformed, factor=factor)
        result["breakdown"] = breakdown
        return result

    def _equation_variables(self, profile: EnergyProfile, factor: float) -> dict:
        intensity = None
        try:
            intensity = self.intensity_table.intensity(profile.region_code)
        except UnknownRegionError:
            pass
        epoch_kwh = profile.epoch_energies_kwh
        total_kwh = sum(epoch_kwh)
        return {
            "pue": profile.pue,
            "region_code": profile.region_code,
            "intensity_lbs_per_kwh": intensity,
            "hardware_factor": factor,
            "epoch_kwh": epoch_kwh,
            "total_kwh": total_kwh,
            "total_co2_lbs": None if intensity is None else total_kwh * intensity,
        }

    # -- journal -----------------------------------------------------------

    def _journal(self, session: _Session, event: dict) -> None:
        if not self.journal_dir:
            return
        path = self.journal_dir / f"{session.id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def _recover_journals(self) -> None:
        """Re-import profiles of sessions that never halted (host crash)."""
        for path in sorted(self.journal_dir.glob("*.jsonl")):
            try:
                profile = recover_profile_from_journal(path)
            except (EnergyVisError, ValueError, KeyError) as exc:
                log.warning("unreadable journal %s: %s", path, exc)
                continue
            if profile is None:
                continue
            profile_id = f"recovered-{path.stem[:12]}"
            self.profiles[profile_id] = profile
            log.info("recovered %d epochs from %s as %s", len(profile.epochs), path, profile_id)


def _epoch_dict(record: EpochRecord) -> dict:
    d: dict = {
        "index": record.index,
        "duration_s": record.duration_s,
        "energy_kwh": record.energy_kwh,
    }
    if record.degraded:
        d["degraded"] = True
    if record.paused:
        d["paused"] = True
    return d


def recover_profile_from_journal(path: str | Path) -> EnergyProfile | None:
    """Rebuild a profile from an append-only session journal.

    Returns None for journals that end in a clean halt (nothing to
    recover; the session exported normally).
    """
    start_doc = None
    epochs: list[dict] = []
    halted = False
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        event = json.loads(line)
        if event.get("event") == "start":
            start_doc = event["profile"]
        elif event.get("event") == "epoch":
            epochs.append(event["epoch"])
        elif event.get("event") == "halt":
            halted = True
    if halted or start_doc is None:
        return None
    doc = dict(start_doc)
    doc["epochs"] = epochs
    doc["live"] = False
    return profile_io.profile_from_document(doc)


# --------------------------------------------------------------------------
# HTTP layer
# --------------------------------------------------------------------------


def _error_response(exc: EnergyVisError):
    from fastapi.responses import JSONResponse

    status = 400
    if isinstance(exc, SessionNotFoundError):
        status = 404
    elif isinstance(exc, InvalidStateError):
        status = 409
    detail: dict = {}
    if isinstance(exc, UnknownHardwareError):
        detail["suggestions"] = list(exc.suggestions)
    elif isinstance(exc, UnknownRegionError):
        detail["known_regions"] = list(exc.known)
    elif isinstance(exc, ProfileValidationError):
        detail["field_path"] = exc.field_path
    return JSONResponse(
        status_code=status,
        content={"error_code": exc.code, "message": str(exc), "detail": detail},
    )


def _parse_hardware(raw, path: str = "hardware") -> list[HardwareSpec]:
    if not isinstance(raw, list):
        raise ProfileValidationError(path, "expected array of {catalog_key, quantity}")
    specs = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "catalog_key" not in item:
            raise ProfileValidationError(f"{path}[{i}]", "expected {catalog_key, quantity}")
        try:
            specs.append(
                HardwareSpec(
                    catalog_key=item["catalog_key"], quantity=int(item.get("quantity", 1))
                )
            )
        except (TypeError, ValueError, DomainError) as exc:
            raise ProfileValidationError(f"{path}[{i}]", str(exc)) from None
    return specs


def _parse_counterfactual(raw) -> Counterfactual | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ProfileValidationError("counterfactual", "expected object or null")
    alt_hardware = None
    if raw.get("alt_hardware") is not None:
        alt_hardware = tuple(_parse_hardware(raw["alt_hardware"], "counterfactual.alt_hardware"))
    alt_pue = raw.get("alt_pue")
    if alt_pue is not None:
        alt_pue = float(alt_pue)
    return Counterfactual(
        alt_region=raw.get("alt_region"),
        alt_hardware=alt_hardware,
        alt_pue=alt_pue,
    )


def create_app(service: TrackingService | None = None, static_dir: str | Path | None = None):
    """Build the HTTP app around a TrackingService."""
    from fastapi import Body, FastAPI, Request
    from fastapi.responses import FileResponse, HTMLResponse

    service = service or TrackingService()
    app = FastAPI(title="energyvis", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(EnergyVisError)
    async def handle_package_error(request: Request, exc: EnergyVisError):
        return _error_response(exc)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions")
    def start_session(payload: dict = Body(...)):
        for key in ("model_name", "hardware", "region_code"):
            if key not in payload:
                raise ProfileValidationError(key, "missing required key")
        session = service.start_session(
            model_name=payload["model_name"],
            hardware=_parse_hardware(payload["hardware"]),
            region_code=payload["region_code"],
            pue=float(payload.get("pue", 1.0)),
            sampler=payload.get("sampler"),
        )
        return {
            "session_id": session.id,
            "url": service.session_url(session.id),
            "profile": service.get_live_profile(session.id),
        }

    @app.get("/sessions/{session_id}/profile")
    def live_profile(session_id: str):
        return service.get_live_profile(session_id)

    @app.post("/sessions/{session_id}/epoch")
    def mark_epoch(session_id: str):
        return _epoch_dict(service.mark_epoch(session_id))

    @app.post("/sessions/{session_id}/pause")
    def pause(session_id: str):
        return {"state": service.pause_session(session_id)}

    @app.post("/sessions/{session_id}/resume")
    def resume(session_id: str):
        return {"state": service.resume_session(session_id)}

    @app.post("/sessions/{session_id}/halt")
    def halt(session_id: str, payload: dict | None = Body(None)):
        close_open = bool((payload or {}).get("close_open_epoch", True))
        profile = service.halt_session(session_id, close_open_epoch=close_open)
        return {"state": HALTED, "profile": profile_io.profile_to_document(profile)}

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str, payload: dict = Body(...)):
        return service.advance(session_id, float(payload.get("seconds", 0.0)))

    @app.get("/profiles")
    def list_profiles():
        return {"profiles": service.list_profiles()}

    @app.post("/profiles")
    def import_profile(payload: dict = Body(...)):
        return {"profile_id": service.import_profile(payload)}

    @app.get("/profiles/{ref}/export")
    def export_profile(ref: str):
        return service.export_profile(ref)

    @app.post("/whatif")
    def what_if(payload: dict = Body(...)):
        if "profile" in payload:
            profile = profile_io.profile_from_document(payload["profile"])
        elif "profile_id" in payload:
            profile = service._resolve_profile(payload["profile_id"])
        else:
            raise ProfileValidationError("profile_id", "provide profile_id or inline profile")
        metric = Metric.parse(payload.get("metric", "kwh"))
        horizon = int(payload.get("horizon", 0))
        cf = _parse_counterfactual(payload.get("counterfactual"))
        return service.what_if(profile, cf, metric, horizon)

    @app.get("/catalog/hardware")
    def catalog_hardware():
        entries = [
            {
                "name": e.name,
                "kind": e.kind.value,
                "power_draw_w": e.power_draw_w,
                "flops": e.flops,
            }
            for e in sorted(service.hardware_catalog.entries.values(), key=lambda e: e.name)
        ]
        return {"entries": entries, "warnings": list(service.hardware_catalog.warnings)}

    @app.get("/catalog/intensity")
    def catalog_intensity():
        table = service.intensity_table
        rows = [
            {"region_code": c, "intensity_lbs_per_kwh": r.intensity_lbs_per_kwh}
            for c, r in sorted(table.rows.items())
        ]
        return {"vintage": table.vintage, "rows": rows, "gaps": list(table.gaps)}

    @app.get("/catalog/reference")
    def catalog_reference():
        return {"rows": load_reference_footprints()}

    static_root = Path(static_dir) if static_dir else None

    @app.get("/")
    def index():
        if static_root and (static_root / "index.html").exists():
            return FileResponse(static_root / "index.html")
        return HTMLResponse(
            "<html><body><h1>energyvis</h1><p>Tracking service is running. "
            "The web UI assets are not installed; see README.</p></body></html>"
        )

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/assets", StaticFiles(directory=str(static_root)), name="assets")

    return app
