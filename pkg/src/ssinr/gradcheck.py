"""Analytic-vs-finite-difference gradient checks over the transform matrix."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .backbones import KINDS, BackboneConfig, forward, init_model, layer_views, prepare_inputs
from .numerics import Rng, finite_diff_gradient, max_relative_error, uniform_fill
from .training import loss_and_grad, mse_loss
from .transforms import (
    Transform,
    TransformSpec,
    apply_input_transform,
    compute_adaptive_shift,
    forward_output_transform,
)

TOLERANCE = 1e-4

INPUT_VARIANTS = {
    "identity": Transform(),
    "scale:5": Transform("scale", 5.0),
    "kernel:gaussian": Transform("kernel", kernel="gaussian"),
}
OUTPUT_VARIANTS = {
    "identity": Transform(),
    "shift:0.3": Transform("shift", 0.3),
    "adaptive-shift": Transform("adaptive_shift"),
}


@dataclass(frozen=True)
class GradcheckResult:
    backbone: str
    input_transform: str
    output_transform: str
    max_rel_error: float

    @property
    def ok(self):
        return self.max_rel_error < TOLERANCE

    @property
    def label(self):
        return f"{self.backbone} / in={self.input_transform} / out={self.output_transform}"


def check_gradient(kind, spec, seed=0, n_points=32, width=8, hidden_layers=1):
    """Compare backward() with central differences on a small random network.

    Model is in_dim=2 -> width -> ... -> 1, double precision, with random
    (non-zero) biases so every parameter sits in general position.
    """
    rng = Rng(seed)
    cfg = BackboneConfig(kind, hidden_layers=hidden_layers, width=width, in_dim=2, out_dim=1)
    model = init_model(cfg, rng.split(1))
    for _, b in layer_views(cfg, model.params):
        b[...] = uniform_fill(rng.split(2, b.size), b.shape, -0.5, 0.5)
    model.touch()
    coords = uniform_fill(rng.split(3), (n_points, 2), -1.0, 1.0)
    targets = uniform_fill(rng.split(4), (n_points, 1), -1.0, 1.0)
    beta = compute_adaptive_shift(targets) if spec.output.kind == "adaptive_shift" else None
    inputs = prepare_inputs(cfg, apply_input_transform(coords, spec.input))

    _, analytic, _ = loss_and_grad(model, inputs, targets, spec, beta)

    probe = model.copy()

    def objective(theta):
        probe.params[...] = theta
        probe.touch()
        raw, _ = forward(probe, inputs)
        return mse_loss(forward_output_transform(raw, spec, beta), targets)[0]

    numeric = finite_diff_gradient(objective, model.params.copy())
    return max_relative_error(analytic, numeric)


def run_matrix(seed=0):
    results = []
    for kind, (in_name, tin), (out_name, tout) in itertools.product(
        KINDS, INPUT_VARIANTS.items(), OUTPUT_VARIANTS.items()
    ):
        err = check_gradient(kind, TransformSpec(tin, tout), seed=seed)
        results.append(GradcheckResult(kind, in_name, out_name, err))
    return results
