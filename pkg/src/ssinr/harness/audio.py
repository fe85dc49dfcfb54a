"""Repeated audio fits: vanilla vs scale-and-shift, summarised over trials."""
from __future__ import annotations

from ..metrics import aggregate_trials
from ..numerics import derive_seed
from .config import merge
from .runner import execute, write_csv

AUDIO_DESK = {"input": "chord.wav", "width": 128, "epochs": 500, "precision": "single", "signal": "audio", "ssim_every": 0}
COLUMNS = ("method", "backbone", "trials", "mse_mean", "mse_std")

VARIANTS = (
    ("vanilla", {"input_transform": "identity", "output_transform": "identity"}),
    ("ss", {"input_transform": "ss-default", "output_transform": "adaptive-shift"}),
)


def run_audio(base=None, backbones=("siren",), trials=10, out_path=None):
    """Fit each backbone with and without SS over ``trials`` seeds.

    Trial ``k`` uses the same derived seed for both variants, so the two
    columns differ only by the transformation.
    """
    base = merge(AUDIO_DESK, base or {})
    base_seed = int(base["seed"])
    rows = []
    for backbone in backbones:
        for name, overrides in VARIANTS:
            mses = []
            for k in range(int(trials)):
                cfg = {**base, **overrides, "backbone": backbone, "seed": derive_seed(base_seed, k)}
                mses.append(execute(cfg)["final"]["mse"])
            st = aggregate_trials(mses)
            label = name if name == "vanilla" else f"ss-{backbone}"
            rows.append({"method": label, "backbone": backbone, "trials": st.count,
                         "mse_mean": st.mean, "mse_std": st.std})
    if out_path is not None:
        write_csv(out_path, COLUMNS, rows)
    return rows
