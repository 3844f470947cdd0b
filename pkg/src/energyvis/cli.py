"""Operator command line: serve the tracking service, track child
commands, and analyze profile documents without the web UI.

Subcommands: serve, track, report, whatif, import, export, catalog.
Exit codes: 0 ok, 1 usage/operational, 2 validation; ``track`` propagates
the child's exit code. Tracked children find their session at
``ENERGYVIS_SESSION_URL``.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import threading
import time
from pathlib import Path

from . import emission, profile_io
from .catalog import (
    default_hardware_catalog,
    default_intensity_table,
    load_hardware_catalog,
    load_intensity_table,
    load_reference_footprints,
)
from .errors import EnergyVisError, UnknownHardwareError, UnknownRegionError
from .types import Counterfactual, HardwareSpec, Metric

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2

SESSION_URL_ENV = "ENERGYVIS_SESSION_URL"
DEFAULT_SERVICE_URL = "http://127.0.0.1:8000"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; our contract reserves 2 for
    validation failures, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _say(message: str) -> None:
    """CLI chatter goes to stderr so tracked children own stdout."""
    print(message, file=sys.stderr)


# --------------------------------------------------------------------------
# shared option parsing
# --------------------------------------------------------------------------


def _add_catalog_opts(parser) -> None:
    parser.add_argument("--hardware-catalog", metavar="CSV", help="device catalog file")
    parser.add_argument("--intensity-table", metavar="CSV", help="region intensity file")


def _load_catalogs(args):
    hardware = (
        load_hardware_catalog(args.hardware_catalog)
        if getattr(args, "hardware_catalog", None)
        else default_hardware_catalog()
    )
    intensity = (
        load_intensity_table(args.intensity_table)
        if getattr(args, "intensity_table", None)
        else default_intensity_table()
    )
    return hardware, intensity


def _parse_hardware_flags(values: list[str]) -> list[HardwareSpec]:
    specs = []
    for value in values:
        name, _, qty = value.rpartition("=")
        if name and qty.isdigit():
            specs.append(HardwareSpec(catalog_key=name, quantity=int(qty)))
        else:
            specs.append(HardwareSpec(catalog_key=value, quantity=1))
    return specs


def _parse_waveform_flag(text: str) -> dict:
    """constant:W | ramp:START:END:DURATION | sinusoid:MEAN:AMP:PERIOD"""
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "constant" and len(parts) == 2:
            return {"kind": "constant", "watts": float(parts[1])}
        if kind == "ramp" and len(parts) == 4:
            return {
                "kind": "ramp",
                "start_w": float(parts[1]),
                "end_w": float(parts[2]),
                "duration_s": float(parts[3]),
            }
        if kind == "sinusoid" and len(parts) == 4:
            return {
                "kind": "sinusoid",
                "mean_w": float(parts[1]),
                "amplitude_w": float(parts[2]),
                "period_s": float(parts[3]),
            }
    except ValueError:
        pass
    raise EnergyVisError(
        f"bad waveform {text!r}; expected constant:W, ramp:S:E:D, or sinusoid:M:A:P"
    )


# --------------------------------------------------------------------------
# report / whatif (local analysis over a profile document)
# --------------------------------------------------------------------------


def _series_pair(profile, intensity_table, horizon: int, region_override: str | None):
    """kWh series plus the intensity used for the CO2 column."""
    kwh = emission.project_profile(profile, Metric.KWH, intensity_table, horizon)
    region = region_override or profile.region_code
    intensity = intensity_table.intensity(region)
    return kwh, region, intensity


def cmd_report(args) -> int:
    _, intensity_table = _load_catalogs(args)
    profile = profile_io.load_profile(args.profile)
    horizon = args.horizon
    if horizon and len(profile.epochs) < 2:
        horizon = 0
        _say("note: fewer than 2 recorded epochs; skipping extrapolation")
    kwh, region, intensity = _series_pair(profile, intensity_table, horizon, args.region)

    rows = []
    for e, value in zip(profile.epochs, kwh.recorded):
        rows.append((str(e.index), f"{e.duration_s:.1f}", value, value * intensity, False))
    next_index = len(profile.epochs)
    for i, value in enumerate(kwh.extrapolated):
        rows.append((f"{next_index + i}*", "-", value, value * intensity, True))

    total_kwh = sum(kwh.recorded)
    total_co2 = total_kwh * intensity
    grand_kwh = total_kwh + sum(kwh.extrapolated)
    grand_co2 = grand_kwh * intensity

    if args.format == "document":
        doc = {
            "model_name": profile.model_name,
            "region_code": region,
            "intensity_lbs_per_kwh": intensity,
            "pue": profile.pue,
            "epochs": [
                {
                    "epoch": r[0].rstrip("*"),
                    "duration_s": None if r[4] else float(r[1]),
                    "kwh": r[2],
                    "co2_lbs": r[3],
                    "predicted": r[4],
                }
                for r in rows
            ],
            "totals": {
                "recorded_kwh": total_kwh,
                "recorded_co2_lbs": total_co2,
                "with_predicted_kwh": grand_kwh,
                "with_predicted_co2_lbs": grand_co2,
            },
        }
        print(json.dumps(doc, indent=2))
    else:
        region_note = f"{profile.region_code} -> {region}" if args.region else region
        print(f"model: {profile.model_name}")
        print(f"region: {region_note} ({intensity:.3f} lbs CO2/kWh)   pue: {profile.pue:.2f}")
        print(f"{'epoch':>6} {'duration_s':>11} {'kWh':>12} {'CO2_lbs':>12}")
        for label, duration, value, co2, _ in rows:
            print(f"{label:>6} {duration:>11} {value:>12.6f} {co2:>12.6f}")
        print("-" * 44)
        print(f"{'total':>6} {'':>11} {total_kwh:>12.6f} {total_co2:>12.6f}")
        if kwh.extrapolated:
            print(f"{'+pred':>6} {'':>11} {grand_kwh:>12.6f} {grand_co2:>12.6f}")
        print(
            f"{len(profile.epochs)} recorded epochs"
            + (f", {len(kwh.extrapolated)} predicted (*)" if kwh.extrapolated else "")
        )

    if args.figure:
        from . import figures

        metric = Metric.parse(args.metric)
        series = emission.project_profile(profile, Metric.KWH, intensity_table, horizon)
        if metric is Metric.CO2_LBS:
            from .types import ProjectionSeries

            series = ProjectionSeries(
                metric=metric,
                recorded=tuple(v * intensity for v in series.recorded),
                extrapolated=tuple(v * intensity for v in series.extrapolated),
                fit_slope=None if series.fit_slope is None else series.fit_slope * intensity,
                fit_intercept=(
                    None if series.fit_intercept is None else series.fit_intercept * intensity
                ),
                clamped=series.clamped,
            )
        figures.render_consumption_chart(
            args.figure,
            series,
            title=profile.model_name,
            baseline_label=profile.model_name,
        )
        _say(f"figure written to {args.figure}")
    return EXIT_OK


def cmd_whatif(args) -> int:
    hardware_catalog, intensity_table = _load_catalogs(args)
    profile = profile_io.load_profile(args.profile)
    metric = Metric.parse(args.metric)
    alt_hardware = tuple(_parse_hardware_flags(args.hardware)) if args.hardware else None
    cf = Counterfactual(
        alt_region=args.region,
        alt_hardware=alt_hardware,
        alt_pue=args.pue,
    )
    horizon = args.horizon
    baseline = emission.project_profile(profile, metric, intensity_table, horizon)
    alternative = emission.apply_counterfactual(
        profile, cf, metric, hardware_catalog, intensity_table, horizon
    )

    base_total = sum(baseline.values)
    alt_total = sum(alternative.values)
    delta_pct = 0.0 if base_total == 0 else (alt_total - base_total) / base_total * 100.0

    changes = []
    if args.region:
        changes.append(f"region {profile.region_code} -> {args.region.upper()}")
    if args.hardware:
        changes.append("hardware " + ", ".join(args.hardware))
    if args.pue is not None:
        changes.append(f"pue {profile.pue:g} -> {args.pue:g}")

    if args.format == "document":
        print(
            json.dumps(
                {
                    "model_name": profile.model_name,
                    "metric": metric.value,
                    "horizon": horizon,
                    "counterfactual": {
                        "alt_region": args.region,
                        "alt_hardware": [
                            {"catalog_key": h.catalog_key, "quantity": h.quantity}
                            for h in (alt_hardware or ())
                        ],
                        "alt_pue": args.pue,
                    },
                    "baseline": baseline.to_dict(),
                    "alternative": alternative.to_dict(),
                    "totals": {
                        "baseline": base_total,
                        "alternative": alt_total,
                        "delta_pct": delta_pct,
                    },
                },
                indent=2,
            )
        )
    else:
        unit = "kWh" if metric is Metric.KWH else "lbs CO2"
        print(f"what-if on {profile.model_name} ({'; '.join(changes)})")
        print(f"metric: {metric.value}   epochs: {len(baseline.recorded)} recorded" +
              (f" + {len(baseline.extrapolated)} predicted" if horizon else ""))
        print(f"  baseline total:    {base_total:12.6f} {unit}")
        print(f"  alternative total: {alt_total:12.6f} {unit}")
        print(f"  delta:             {delta_pct:+11.2f}%")

    if args.figure:
        from . import figures

        figures.render_consumption_chart(
            args.figure,
            baseline,
            alternative,
            title=f"{profile.model_name} what-if",
            baseline_label="baseline",
            alternative_label="alternative",
        )
        _say(f"figure written to {args.figure}")
    return EXIT_OK


# --------------------------------------------------------------------------
# catalog listing
# --------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    hardware_catalog, intensity_table = _load_catalogs(args)
    needle = (args.search or "").lower()
    if args.table == "hardware":
        print(f"{'name':<28} {'kind':<5} {'power_w':>8} {'flops':>12}")
        for name in hardware_catalog.names():
            if needle and needle not in name.lower():
                continue
            e = hardware_catalog.lookup(name)
            print(f"{e.name:<28} {e.kind.value:<5} {e.power_draw_w:>8.1f} {e.flops:>12.3g}")
    elif args.table == "intensity":
        print(f"# vintage: {intensity_table.vintage}")
        print(f"{'region':<7} {'lbs_CO2_per_kWh':>16}")
        for code in sorted(intensity_table.rows):
            if needle and needle not in code.lower():
                continue
            print(f"{code:<7} {intensity_table.rows[code].intensity_lbs_per_kwh:>16.3f}")
        if intensity_table.gaps:
            print(f"# missing regions: {', '.join(intensity_table.gaps)}")
    else:
        print(f"{'label':<38} {'category':<15} {'CO2e_tons':>10}")
        for row in load_reference_footprints():
            print(f"{row['label']:<38} {row['category']:<15} {row['co2e_tons']:>10.2f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# service-backed commands
# --------------------------------------------------------------------------


def _client(base_url: str):
    import httpx

    return httpx.Client(base_url=base_url, timeout=10.0)


def _raise_for_error(response) -> None:
    if response.status_code < 400:
        return
    try:
        body = response.json()
    except ValueError:
        body = {"message": response.text}
    message = body.get("message", "service error")
    detail = body.get("detail") or {}
    if detail.get("suggestions"):
        message += f" (closest: {', '.join(detail['suggestions'])})"
    raise EnergyVisError(message)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import TrackingService, create_app

    hardware_catalog, intensity_table = _load_catalogs(args)
    sampler: dict = {"kind": args.sampler}
    if args.sampler == "simulated":
        sampler["waveform"] = _parse_waveform_flag(args.waveform)
        sampler["interval_s"] = args.interval
    service = TrackingService(
        hardware_catalog=hardware_catalog,
        intensity_table=intensity_table,
        journal_dir=args.journal_dir,
        default_sampler=sampler,
        base_url=f"http://{args.host}:{args.port}",
    )
    static_dir = args.static_dir or os.environ.get("ENERGYVIS_STATIC_DIR")
    app = create_app(service, static_dir=static_dir)
    _say(f"tracking service at http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _start_embedded_service(args) -> tuple[str, object, threading.Thread]:
    """Run the tracking service on an ephemeral loopback port for the
    lifetime of a tracked command."""
    import uvicorn

    from .service import TrackingService, create_app

    hardware_catalog, intensity_table = _load_catalogs(args)
    service = TrackingService(
        hardware_catalog=hardware_catalog,
        intensity_table=intensity_table,
        journal_dir=getattr(args, "journal_dir", None),
    )
    app = create_app(service)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="energyvis-service", daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline or not thread.is_alive():
            raise EnergyVisError("embedded tracking service failed to start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    base_url = f"http://127.0.0.1:{port}"
    service.base_url = base_url
    return base_url, server, thread


def _service_is_up(base_url: str) -> bool:
    import httpx

    try:
        return httpx.get(f"{base_url}/health", timeout=1.0).status_code == 200
    except httpx.HTTPError:
        return False


def cmd_track(args) -> int:
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        _say("track: no command given (use: energyvis track [flags] -- cmd args...)")
        return EXIT_USAGE
    if not args.hardware:
        _say("track: at least one --hardware entry is required")
        return EXIT_USAGE

    server = None
    if args.service_url and _service_is_up(args.service_url):
        base_url = args.service_url
    else:
        base_url, server, _ = _start_embedded_service(args)

    sampler: dict = {"kind": args.sampler, "interval_s": args.interval}
    if args.sampler == "simulated":
        sampler["waveform"] = _parse_waveform_flag(args.waveform)

    exit_code = EXIT_OK
    stop_pumps = threading.Event()
    with _client(base_url) as client:
        response = client.post(
            "/sessions",
            json={
                "model_name": args.model_name or Path(command[0]).name,
                "hardware": [
                    {"catalog_key": h.catalog_key, "quantity": h.quantity}
                    for h in _parse_hardware_flags(args.hardware)
                ],
                "region_code": args.region,
                "pue": args.pue,
                "sampler": sampler,
            },
        )
        _raise_for_error(response)
        session = response.json()
        session_id = session["session_id"]
        session_url = session["url"]
        _say(f"live session: {session_url}")

        pumps: list[threading.Thread] = []
        if args.sampler == "simulated":
            # map wall time onto the session's simulated clock
            def _advance_pump():
                last = time.monotonic()
                while not stop_pumps.wait(0.05):
                    now = time.monotonic()
                    dt = (now - last) * args.time_scale
                    last = now
                    try:
                        client.post(f"/sessions/{session_id}/advance", json={"seconds": dt})
                    except Exception:
                        return

            pumps.append(threading.Thread(target=_advance_pump, daemon=True))

        if args.epoch_interval:
            def _epoch_pump():
                while not stop_pumps.wait(args.epoch_interval):
                    try:
                        client.post(f"/sessions/{session_id}/epoch")
                    except Exception:
                        return

            pumps.append(threading.Thread(target=_epoch_pump, daemon=True))
        for pump in pumps:
            pump.start()

        env = dict(os.environ)
        env[SESSION_URL_ENV] = session_url
        try:
            child = subprocess.Popen(command, env=env)
        except OSError as exc:
            stop_pumps.set()
            client.post(f"/sessions/{session_id}/halt")
            _say(f"track: cannot run {command[0]!r}: {exc}")
            if server is not None:
                server.should_exit = True
            return EXIT_USAGE
        exit_code = child.wait()

        stop_pumps.set()
        for pump in pumps:
            pump.join(timeout=2.0)
        # the child owned the epoch boundaries; its teardown tail is not one
        halt = client.post(
            f"/sessions/{session_id}/halt", json={"close_open_epoch": False}
        )
        if halt.status_code == 409:  # child already halted its own session
            halt = client.get(f"/sessions/{session_id}/profile")
        _raise_for_error(halt)
        body = halt.json()
        doc = body.get("profile", body)
        doc.pop("state", None)
        doc.pop("degraded_devices", None)
        doc.pop("open_epoch", None)
        output = args.output or "energy-profile.json"
        Path(output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        _say(f"profile written to {output} ({len(doc.get('epochs', []))} epochs)")

    if server is not None:
        server.should_exit = True
    return exit_code


def cmd_import(args) -> int:
    doc = json.loads(Path(args.document).read_text(encoding="utf-8"))
    with _client(args.service_url) as client:
        response = client.post("/profiles", json=doc)
        _raise_for_error(response)
        print(response.json()["profile_id"])
    return EXIT_OK


def cmd_export(args) -> int:
    with _client(args.service_url) as client:
        response = client.get(f"/profiles/{args.ref}/export")
        _raise_for_error(response)
        text = json.dumps(response.json(), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        _say(f"profile written to {args.output}")
    else:
        print(text, end="")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="energyvis", description=__doc__)
    parser.add_argument("--service-url", default=DEFAULT_SERVICE_URL, help="tracking service URL")
    parser.add_argument(
        "--format", choices=["table", "document"], default="table", help="output style"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("serve", help="run the tracking service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--journal-dir", help="append-only session journals for crash recovery")
    p.add_argument("--sampler", choices=["real", "simulated"], default="real")
    p.add_argument("--waveform", default="constant:100", help="simulated waveform spec")
    p.add_argument("--interval", type=float, default=1.0, help="sampling interval seconds")
    p.add_argument("--static-dir", help="web UI asset directory served at /")
    _add_catalog_opts(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("track", help="run a command inside a tracked session")
    p.add_argument("--model-name", help="profile label (default: command name)")
    p.add_argument(
        "--hardware",
        action="append",
        default=[],
        metavar="NAME[=QTY]",
        help="catalog device, repeatable",
    )
    p.add_argument("--region", required=True, help="training region code")
    p.add_argument("--pue", type=float, default=1.0)
    p.add_argument("--sampler", choices=["real", "simulated"], default="real")
    p.add_argument("--waveform", default="constant:100")
    p.add_argument("--interval", type=float, default=1.0)
    p.add_argument("--time-scale", type=float, default=1.0,
                   help="simulated seconds per wall second")
    p.add_argument("--epoch-interval", type=float,
                   help="mark epochs on a timer for uninstrumented commands")
    p.add_argument("--output", "-o", help="profile document path")
    p.add_argument("--journal-dir")
    _add_catalog_opts(p)
    p.add_argument("command", nargs=argparse.REMAINDER, help="-- command args...")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("report", help="per-epoch table for a profile document")
    p.add_argument("profile", help="profile document path")
    p.add_argument("--metric", default="kwh", help="kwh or co2 (figure output)")
    p.add_argument("--horizon", type=int, default=0, help="extrapolated epochs")
    p.add_argument("--region", help="override region for the CO2 column")
    p.add_argument("--figure", help="write a consumption chart image here")
    _add_catalog_opts(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("whatif", help="counterfactual comparison for a profile document")
    p.add_argument("profile", help="profile document path")
    p.add_argument("--region", help="alternative region code")
    p.add_argument(
        "--hardware", action="append", default=[], metavar="NAME[=QTY]",
        help="alternative device, repeatable",
    )
    p.add_argument("--pue", type=float, help="alternative PUE")
    p.add_argument("--metric", default="kwh")
    p.add_argument("--horizon", type=int, default=0)
    p.add_argument("--figure", help="write a comparison chart image here")
    _add_catalog_opts(p)
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("import", help="import a profile document into the service")
    p.add_argument("document")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="export a stored profile from the service")
    p.add_argument("ref", help="profile or session id")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("catalog", help="list catalog data")
    p.add_argument("table", choices=["hardware", "intensity", "reference"])
    p.add_argument("--search", help="filter by substring")
    _add_catalog_opts(p)
    p.set_defaults(func=cmd_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownHardwareError as exc:
        _say(f"error: {exc}")
        return EXIT_VALIDATION
    except UnknownRegionError as exc:
        _say(f"error: {exc}")
        if exc.known:
            _say(f"known regions: {', '.join(exc.known)}")
        return EXIT_VALIDATION
    except EnergyVisError as exc:
        _say(f"error: {exc}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
