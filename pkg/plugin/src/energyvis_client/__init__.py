"""Training-loop client for the energyvis tracking service.

Wrap the training code and mark epoch boundaries from inside it:

    from energyvis_client import track

    with track(model_name="bert", region="GA",
               hardware=[("NVIDIA T4", 1)], url="http://127.0.0.1:8000") as run:
        for _ in range(epochs):
            train_one_epoch()
            run.epoch()

Under ``energyvis track`` the session already exists and its URL arrives in
ENERGYVIS_SESSION_URL; ``track()`` then attaches and leaves the session's
lifecycle to the CLI. The client is deliberately stdlib-only and fails open
by default: a metrics tool must never kill a multi-hour training run.
"""

from .tracker import SESSION_URL_ENV, TrackedRun, TrackerError, track

__version__ = "0.1.0"

__all__ = ["SESSION_URL_ENV", "TrackedRun", "TrackerError", "track"]
