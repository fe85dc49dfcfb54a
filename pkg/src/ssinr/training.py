"""MSE objective, Adam, and the fitting loop."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics
from .backbones import MlpModel, backward, forward, init_model, param_count, prepare_inputs
from .errors import ConfigError, ContractViolation, NumericError
from .numerics import Rng, dtype_for
from .transforms import (
    TransformSpec,
    apply_input_transform,
    compute_adaptive_shift,
    forward_output_transform,
    output_backward,
    output_shift,
)

_BATCH_STREAM = 0xBA7C4


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch: int | str = "full"
    seed: int = 0
    precision: str = "double"
    ssim_every: int = 50

    def __post_init__(self):
        if int(self.epochs) < 1:
            raise ContractViolation(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ContractViolation(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0 <= getattr(self, name) < 1:
                raise ContractViolation(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if not self.adam_eps > 0:
            raise ContractViolation(f"adam_eps must be positive, got {self.adam_eps}")
        if self.batch != "full" and int(self.batch) < 1:
            raise ContractViolation(f"batch must be 'full' or a positive size, got {self.batch!r}")
        dtype_for(self.precision)

    @property
    def dtype(self):
        return dtype_for(self.precision)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n, dtype=np.float64):
        return cls(np.zeros(n, dtype=dtype), np.zeros(n, dtype=dtype), 0)

    def copy(self):
        return AdamState(self.m.copy(), self.v.copy(), self.t)


@dataclass
class EpochRecord:
    epoch: int
    mse: float
    psnr: float
    ssim: float | None = None


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    final: dict = field(default_factory=dict)
    seconds: float = 0.0
    config: dict = field(default_factory=dict)
    beta: float | list | None = None
    state: AdamState | None = field(default=None, repr=False, compare=False)


def mse_loss(pred, target):
    """Mean squared error over every entry and its gradient w.r.t. ``pred``."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ContractViolation(f"mse_loss shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = diff * diff.dtype.type(2.0 / diff.size)
    return loss, grad


def adam_step(params, grads, state, config, epoch=None):
    """Bias-corrected Adam update, applied in place. Returns (params, state)."""
    if not (params.shape == grads.shape == state.m.shape == state.v.shape):
        raise ContractViolation(
            f"adam_step size mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    if not np.all(np.isfinite(grads)):
        raise NumericError(f"non-finite gradient at epoch {epoch}", epoch=epoch)
    b1, b2 = config.adam_beta1, config.adam_beta2
    state.t += 1
    state.m *= b1
    state.m += (1.0 - b1) * grads
    state.v *= b2
    state.v += (1.0 - b2) * (grads * grads)
    m_hat = state.m / (1.0 - b1**state.t)
    v_hat = state.v / (1.0 - b2**state.t)
    params -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return params, state


def _pipeline_inputs(dataset, backbone, spec, dtype):
    coords = np.asarray(dataset.coords, dtype=np.float64)
    x = apply_input_transform(coords, spec.input)
    return np.ascontiguousarray(prepare_inputs(backbone, x), dtype=dtype)


def _resolve_beta(dataset, spec):
    if spec.output.kind != "adaptive_shift":
        return None
    if dataset.targets is None or np.asarray(dataset.targets).size == 0:
        raise ConfigError("adaptive shift needs target values to average")
    return compute_adaptive_shift(dataset.targets, per_channel=spec.per_channel_shift)


def loss_and_grad(model, inputs, targets, spec, beta, shifted_targets=None):
    """One forward/backward pass through transform -> model -> transform -> MSE.

    For shift-type outputs (and identity) the residual is formed as
    ``raw - (targets - shift)``. That makes a shifted run and an unshifted run
    on pre-shifted targets execute the exact same float operations.
    """
    raw, cache = forward(model, inputs)
    if spec.output.kind in ("identity", "shift", "adaptive_shift"):
        if shifted_targets is None:
            shifted_targets = targets - np.asarray(output_shift(spec, beta), dtype=targets.dtype)
        loss, graw = mse_loss(raw, shifted_targets)
    else:
        pred = forward_output_transform(raw, spec, beta)
        loss, gpred = mse_loss(pred, targets)
        graw = output_backward(raw, gpred, spec)
    return loss, backward(model, cache, graw), raw


def predict(model, dataset, spec, beta=None):
    """Prediction in the dataset's normalised target range."""
    x = _pipeline_inputs(dataset, model.config, spec, model.dtype)
    raw, _ = forward(model, x)
    return forward_output_transform(raw, spec, beta)


def _ssim_of(dataset, pred):
    if dataset.meta.kind != "image":
        return None
    return metrics.ssim(dataset.as_image(dataset.to_unit(pred)), dataset.as_image(dataset.to_unit(dataset.targets)))


def fit(dataset, backbone, transform=None, train=None, model=None, state=None, start_epoch=0):
    """Fit ``backbone`` to ``dataset`` and return ``(model, report)``.

    Pass ``model``/``state``/``start_epoch`` (e.g. from a checkpoint) to
    continue an earlier run; the continuation is bitwise identical to an
    uninterrupted run of the combined length.
    """
    transform = transform or TransformSpec()
    train = train or TrainConfig()
    if (backbone.in_dim, backbone.out_dim) != (dataset.coords.shape[1], dataset.targets.shape[1]):
        raise ConfigError(
            f"backbone maps {backbone.in_dim}->{backbone.out_dim} but dataset is "
            f"{dataset.coords.shape[1]}->{dataset.targets.shape[1]}"
        )
    dtype = train.dtype
    rng = Rng(train.seed)
    if model is None:
        model = init_model(backbone, rng.split(0), dtype=dtype)
    elif model.config != backbone or model.dtype != dtype:
        raise ConfigError("resumed model does not match the requested backbone/precision")
    if state is None:
        state = AdamState.zeros(param_count(backbone), dtype=dtype)

    beta = _resolve_beta(dataset, transform)
    inputs = _pipeline_inputs(dataset, backbone, transform, dtype)
    targets = np.asarray(dataset.targets, dtype=dtype)
    shifted = None
    if transform.output.kind in ("identity", "shift", "adaptive_shift"):
        shifted = targets - np.asarray(output_shift(transform, beta), dtype=dtype)
    span2 = float(dataset.norm.output_span) ** 2
    n = inputs.shape[0]
    batch = n if train.batch == "full" else min(int(train.batch), n)

    report = RunReport(config=_echo(dataset, backbone, transform, train), beta=_beta_echo(beta))
    t0 = time.perf_counter()
    best = (-np.inf, -1)
    # divergence is detected explicitly below; numpy's overflow warnings are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(start_epoch, start_epoch + train.epochs):
            if batch == n:
                loss, grad, raw = loss_and_grad(model, inputs, targets, transform, beta, shifted)
                if not np.isfinite(loss):
                    raise NumericError(f"non-finite loss at epoch {epoch}", epoch=epoch)
                adam_step(model.params, grad, state, train, epoch=epoch)
                model.touch()
            else:
                order = rng.split(_BATCH_STREAM, epoch).permutation(n)
                total = 0.0
                for lo in range(0, n, batch):
                    idx = np.sort(order[lo:lo + batch])
                    sub_shift = None if shifted is None else shifted[idx]
                    bl, grad, _ = loss_and_grad(model, inputs[idx], targets[idx], transform, beta, sub_shift)
                    if not np.isfinite(bl):
                        raise NumericError(f"non-finite loss at epoch {epoch}", epoch=epoch)
                    adam_step(model.params, grad, state, train, epoch=epoch)
                    model.touch()
                    total += bl * idx.size
                loss, raw = total / n, None
            psnr = metrics.psnr_from_mse(loss / span2)
            ssim = None
            if train.ssim_every and (epoch + 1) % train.ssim_every == 0 and raw is not None:
                ssim = _ssim_of(dataset, forward_output_transform(raw, transform, beta))
            report.records.append(EpochRecord(epoch, loss, psnr, ssim))
            if psnr > best[0]:
                best = (psnr, epoch)

    pred = predict(model, dataset, transform, beta)
    final_mse = float(np.mean((pred - targets) ** 2))
    report.final = {
        "mse": final_mse,
        "psnr": metrics.psnr(dataset.to_unit(pred), dataset.to_unit(targets)),
        "ssim": _ssim_of(dataset, pred),
        "best_psnr": float(best[0]),
        "best_epoch": int(best[1]),
    }
    report.seconds = time.perf_counter() - t0
    report.state = state
    return model, report


def _beta_echo(beta):
    if beta is None:
        return None
    if np.ndim(beta) == 0:
        return float(beta)
    return [float(b) for b in np.ravel(beta)]


def _echo(dataset, backbone, transform, train):
    return {
        "dataset": dataset.meta.describe(),
        "backbone": backbone.to_dict(),
        "input_transform": str(transform.input),
        "output_transform": str(transform.output),
        "kernel_params": asdict(transform.input.params if transform.input.kind == "kernel" else transform.output.params),
        "per_channel_shift": transform.per_channel_shift,
        "train": asdict(train),
    }


__all__ = [
    "AdamState",
    "EpochRecord",
    "MlpModel",
    "RunReport",
    "TrainConfig",
    "adam_step",
    "fit",
    "loss_and_grad",
    "mse_loss",
    "predict",
]
