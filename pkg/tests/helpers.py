"""Independent oracles and generators shared by the test modules.

The oracles deliberately use different formulations than the code under
test: the trend-fit oracle solves the normal equations with numpy, and the
integration oracle is the closed-form antiderivative of the waveform.
"""

from __future__ import annotations

import math
import random
from datetime import datetime, timezone

import numpy as np

from energyvis.types import EnergyProfile, EpochRecord, HardwareSpec


def normal_equation_fit(values) -> tuple[float, float]:
    """Least-squares (slope, intercept) via the normal equations
    [[sum x^2, sum x], [sum x, n]] @ [m, b] = [sum xy, sum y]."""
    n = len(values)
    x = np.arange(n, dtype=float)
    y = np.asarray(values, dtype=float)
    a = np.array([[np.sum(x * x), np.sum(x)], [np.sum(x), float(n)]])
    rhs = np.array([np.sum(x * y), np.sum(y)])
    slope, intercept = np.linalg.solve(a, rhs)
    return float(slope), float(intercept)


def sinusoid_energy_joules(mean_w, amplitude_w, period_s, t0, t1) -> float:
    """Closed-form integral of mean + amp*sin(2*pi*t/period) over [t0, t1]."""
    w = 2 * math.pi / period_s
    return mean_w * (t1 - t0) - (amplitude_w / w) * (math.cos(w * t1) - math.cos(w * t0))


def random_profile(rng: random.Random, region_codes=("GA", "WY", "CA")) -> EnergyProfile:
    """A structurally valid randomized profile for round-trip tests."""
    n_epochs = rng.randint(0, 12)
    epochs = tuple(
        EpochRecord(
            index=i,
            duration_s=rng.uniform(0.5, 3600.0),
            energy_kwh=rng.uniform(0.0, 5.0),
            degraded=rng.random() < 0.1,
            paused=rng.random() < 0.1,
        )
        for i in range(n_epochs)
    )
    hardware = tuple(
        HardwareSpec(catalog_key=f"device-{rng.randint(0, 5)}", quantity=rng.randint(1, 8))
        for _ in range(rng.randint(0, 3))
    )
    live = bool(hardware) and rng.random() < 0.3
    created = datetime(
        2026, rng.randint(1, 12), rng.randint(1, 28), rng.randint(0, 23), tzinfo=timezone.utc
    )
    extras = {"notes": f"run-{rng.randint(0, 999)}"} if rng.random() < 0.5 else {}
    return EnergyProfile(
        model_name=f"model-{rng.randint(0, 99)}",
        region_code=rng.choice(list(region_codes)),
        pue=1.0 + rng.random(),
        hardware=hardware,
        epochs=epochs,
        created_at=created,
        live=live,
        extras=extras,
    )
