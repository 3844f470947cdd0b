"""Power acquisition: CPU energy counters, GPU telemetry, and a
deterministic simulated source.

CPU domains expose cumulative microjoule counters through the powercap
filesystem; we difference successive reads (mod the wrap range) and
attribute the average watts at the interval midpoint. GPUs report
instantaneous draw through the vendor query tool as a subprocess. Both
feed the same PowerSample stream so the integration pipeline upstream
never cares where a reading came from. All filesystem paths and the query
tool name are injectable so tests can run on fixtures.
"""

from __future__ import annotations

import logging
import math
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

from .errors import (
    DeviceUnsupportedError,
    DomainError,
    InconsistentCounterError,
    TelemetryParseError,
)
from .types import PowerSample

log = logging.getLogger(__name__)

POWERCAP_ROOT = Path("/sys/class/powercap")
GPU_QUERY_TOOL = "nvidia-smi"
GPU_QUERY_ARGS = ["--query-gpu=power.draw", "--format=csv,noheader"]

DEFAULT_INTERVAL_S = 1.0
MIN_INTERVAL_S = 0.1


@dataclass(frozen=True)
class CounterSnapshot:
    """One read of a cumulative energy counter."""

    raw_energy_uj: int
    max_range_uj: int
    timestamp: float

    def __post_init__(self):
        if self.max_range_uj <= 0:
            raise DomainError(f"max_range_uj must be > 0, got {self.max_range_uj}")
        if not 0 <= self.raw_energy_uj < self.max_range_uj:
            raise DomainError(
                f"raw_energy_uj must lie in [0, {self.max_range_uj}), got {self.raw_energy_uj}"
            )


def cpu_energy_delta(prev: CounterSnapshot, curr: CounterSnapshot) -> float:
    """Energy consumed between two counter reads, wraparound-safe, in joules.

    The counter wraps at max_range_uj, so the modular difference is always
    in [0, max_range) -- one wrap per interval is recovered exactly, which
    is why polling must be much faster than the wrap period.
    """
    if prev.max_range_uj != curr.max_range_uj:
        raise InconsistentCounterError(
            f"counter ranges differ: {prev.max_range_uj} vs {curr.max_range_uj}"
        )
    if curr.timestamp < prev.timestamp:
        raise DomainError("counter snapshots out of order")
    delta_uj = (curr.raw_energy_uj - prev.raw_energy_uj) % curr.max_range_uj
    return delta_uj / 1e6


def counter_to_power(delta_j: float, dt: float) -> float:
    """Average watts over a polling interval."""
    if dt <= 0:
        raise DomainError(f"interval must be > 0, got {dt!r}")
    return delta_j / dt


def parse_gpu_power(line: str) -> float:
    """Parse one power-draw field from the GPU query tool's CSV output.

    Accepts "87.50 W" and bare "87.50"; the documented "[N/A]" sentinel
    means the device cannot report power.
    """
    text = line.strip()
    if text in ("N/A", "[N/A]", "[Not Supported]"):
        raise DeviceUnsupportedError(f"device does not report power draw: {text!r}")
    value_s = text
    if value_s.endswith(("W", "w")):
        value_s = value_s[:-1].strip()
    try:
        value = float(value_s)
    except ValueError:
        raise TelemetryParseError(f"unparseable power value {line!r}", line=line) from None
    if not math.isfinite(value) or value < 0:
        raise TelemetryParseError(f"power must be finite and >= 0, got {line!r}", line=line)
    return value


# --------------------------------------------------------------------------
# Waveforms (simulated power sources)
# --------------------------------------------------------------------------


class Waveform(Protocol):
    def power_at(self, t: float) -> float: ...


@dataclass(frozen=True)
class ConstantWaveform:
    watts: float

    def power_at(self, t: float) -> float:
        return self.watts


@dataclass(frozen=True)
class RampWaveform:
    """Linear ramp from start_w to end_w over duration_s, then flat."""

    start_w: float
    end_w: float
    duration_s: float

    def power_at(self, t: float) -> float:
        if t >= self.duration_s:
            return self.end_w
        frac = max(t, 0.0) / self.duration_s
        return self.start_w + (self.end_w - self.start_w) * frac


@dataclass(frozen=True)
class SinusoidWaveform:
    """mean_w + amplitude_w * sin(2*pi*t / period_s), floored at zero."""

    mean_w: float
    amplitude_w: float
    period_s: float

    def power_at(self, t: float) -> float:
        return max(
            0.0, self.mean_w + self.amplitude_w * math.sin(2 * math.pi * t / self.period_s)
        )


def waveform_from_dict(spec: dict) -> Waveform:
    """Build a waveform from a config/service payload."""
    kind = spec.get("kind")
    try:
        if kind == "constant":
            return ConstantWaveform(watts=float(spec["watts"]))
        if kind == "ramp":
            return RampWaveform(
                start_w=float(spec["start_w"]),
                end_w=float(spec["end_w"]),
                duration_s=float(spec["duration_s"]),
            )
        if kind == "sinusoid":
            return SinusoidWaveform(
                mean_w=float(spec["mean_w"]),
                amplitude_w=float(spec["amplitude_w"]),
                period_s=float(spec["period_s"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad waveform spec {spec!r}: {exc}") from None
    raise DomainError(f"unknown waveform kind {kind!r}")


def simulated_samples(
    waveform: Waveform, interval_s: float, count: int, device_id: str = "sim:0", start_t: float = 0.0
) -> list[PowerSample]:
    """Deterministic sample stream: same parameters, same samples."""
    if interval_s <= 0:
        raise DomainError(f"interval must be > 0, got {interval_s!r}")
    return [
        PowerSample(start_t + i * interval_s, device_id, waveform.power_at(start_t + i * interval_s))
        for i in range(count)
    ]


# --------------------------------------------------------------------------
# Devices
# --------------------------------------------------------------------------


class PowerDevice(Protocol):
    """One pollable power source."""

    device_id: str

    def read(self, now: float) -> PowerSample | None:
        """Sample at monotonic time ``now``; None when no reading is ready
        yet (energy counters need two reads before the first power value)."""
        ...


class RaplDomainDevice:
    """One powercap domain, differenced into average-power samples.

    The sample timestamp is the midpoint of the polling interval, which is
    where an interval-average belongs on the time axis.
    """

    def __init__(self, domain_dir: Path, device_id: str | None = None):
        self.domain_dir = Path(domain_dir)
        name_file = self.domain_dir / "name"
        label = name_file.read_text().strip() if name_file.exists() else self.domain_dir.name
        self.device_id = device_id or f"cpu:{label}"
        self._max_range = int((self.domain_dir / "max_energy_range_uj").read_text())
        self._prev: CounterSnapshot | None = None

    def _snapshot(self, now: float) -> CounterSnapshot:
        raw = int((self.domain_dir / "energy_uj").read_text())
        return CounterSnapshot(raw_energy_uj=raw, max_range_uj=self._max_range, timestamp=now)

    def read(self, now: float) -> PowerSample | None:
        curr = self._snapshot(now)
        prev, self._prev = self._prev, curr
        if prev is None or curr.timestamp <= prev.timestamp:
            return None
        delta = cpu_energy_delta(prev, curr)
        dt = curr.timestamp - prev.timestamp
        midpoint = prev.timestamp + dt / 2.0
        return PowerSample(midpoint, self.device_id, counter_to_power(delta, dt))


class GpuTelemetryDevice:
    """One GPU polled through the vendor query tool."""

    def __init__(self, index: int, tool: str = GPU_QUERY_TOOL):
        self.index = index
        self.tool = tool
        self.device_id = f"gpu:{index}"

    def read(self, now: float) -> PowerSample | None:
        out = subprocess.run(
            [self.tool, f"--id={self.index}", *GPU_QUERY_ARGS],
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        watts = parse_gpu_power(out.stdout.strip().splitlines()[0])
        return PowerSample(now, self.device_id, watts)


class SimulatedDevice:
    """Deterministic waveform-backed device."""

    def __init__(self, waveform: Waveform, device_id: str = "sim:0"):
        self.waveform = waveform
        self.device_id = device_id

    def read(self, now: float) -> PowerSample | None:
        return PowerSample(now, self.device_id, self.waveform.power_at(now))


def discover_rapl_domains(root: Path = POWERCAP_ROOT) -> list[RaplDomainDevice]:
    """Top-level RAPL package domains (subzones would double-count)."""
    devices = []
    rapl_root = Path(root) / "intel-rapl"
    if not rapl_root.is_dir():
        return devices
    for child in sorted(rapl_root.iterdir()):
        # package domains look like intel-rapl:0; subzones intel-rapl:0:0
        if not child.is_dir() or child.name.count(":") != 1:
            continue
        if not (child / "energy_uj").exists() or not (child / "max_energy_range_uj").exists():
            continue
        try:
            devices.append(RaplDomainDevice(child))
        except (OSError, ValueError, DomainError) as exc:
            log.warning("skipping unreadable RAPL domain %s: %s", child, exc)
    return devices


def discover_gpus(tool: str = GPU_QUERY_TOOL) -> list[GpuTelemetryDevice]:
    try:
        out = subprocess.run(
            [tool, "--query-gpu=index", "--format=csv,noheader"],
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return []
    devices = []
    for line in out.stdout.splitlines():
        line = line.strip()
        if line.isdigit():
            devices.append(GpuTelemetryDevice(int(line), tool=tool))
    return devices


def discover_devices(
    powercap_root: Path = POWERCAP_ROOT, gpu_tool: str = GPU_QUERY_TOOL
) -> list[PowerDevice]:
    """Everything measurable on this host. Absent hardware is fine; an
    empty result is the caller's startup error."""
    devices: list[PowerDevice] = []
    devices.extend(discover_rapl_domains(powercap_root))
    devices.extend(discover_gpus(gpu_tool))
    return devices


# --------------------------------------------------------------------------
# Clock and sampling loop
# --------------------------------------------------------------------------


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class MonotonicClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class SimulatedClock:
    """Manually advanced clock for accelerated deterministic runs."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise DomainError(f"cannot advance a clock backwards ({seconds!r})")
        self._now += seconds
        return self._now


class SampleSink:
    """Append-only sample log: one writer, many snapshot readers."""

    def __init__(self):
        self._samples: list[PowerSample] = []
        self._lock = threading.Lock()
        self.degraded: set[str] = set()

    def append(self, sample: PowerSample) -> None:
        with self._lock:
            self._samples.append(sample)

    def extend(self, samples: Iterable[PowerSample]) -> None:
        with self._lock:
            self._samples.extend(samples)

    def snapshot(self) -> list[PowerSample]:
        """A consistent prefix of the stream."""
        with self._lock:
            return list(self._samples)

    def __len__(self) -> int:
        with self._lock:
            return len(self._samples)


@dataclass
class SamplerConfig:
    interval_s: float = DEFAULT_INTERVAL_S
    devices: list[PowerDevice] = field(default_factory=list)
    clock: Clock = field(default_factory=MonotonicClock)

    def __post_init__(self):
        if self.interval_s < MIN_INTERVAL_S:
            raise DomainError(
                f"interval must be >= {MIN_INTERVAL_S}s, got {self.interval_s!r}"
            )


def sampling_loop(
    config: SamplerConfig,
    sink: SampleSink,
    stop: threading.Event,
    gate: Callable[[], bool] | None = None,
    on_tick: Callable[[float], None] | None = None,
) -> None:
    """Poll every device each tick until ``stop`` is set.

    ``gate`` suspends appends while it returns False (session paused)
    without tearing the loop down. A device read failure is logged, the
    device is marked degraded, and it reports 0 W from then on -- a metrics
    loop must never take down the training run it watches. Returns within
    two intervals of the stop signal; nothing is appended afterwards.
    """
    if not config.devices:
        raise DomainError("sampling needs at least one device")
    clock = config.clock
    while not stop.is_set():
        now = clock.now()
        if gate is not None and not gate():
            clock.sleep(config.interval_s)
            continue
        for device in config.devices:
            if device.device_id in sink.degraded:
                sink.append(PowerSample(now, device.device_id, 0.0))
                continue
            try:
                sample = device.read(now)
            except Exception as exc:
                log.warning("device %s read failed: %s", device.device_id, exc)
                sink.degraded.add(device.device_id)
                sink.append(PowerSample(now, device.device_id, 0.0))
                continue
            if sample is not None:
                sink.append(sample)
        if on_tick is not None:
            on_tick(now)
        if stop.is_set():
            break
        clock.sleep(config.interval_s)
