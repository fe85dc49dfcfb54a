"""Input/output transformations wrapped around the coordinate network.

Input side: the model sees ``T_in(coords)`` instead of the coordinates.
Output side: the prediction is ``T_out(f(x))`` and the loss compares it with
untouched targets. Linear transforms are scalar scale and shift; the
nonlinear ones are five classic kernels evaluated per component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractViolation, NumericError

KERNELS = ("polynomial", "gaussian", "radial", "exponential", "laplacian")
INPUT_KINDS = ("identity", "scale", "shift", "kernel")
OUTPUT_KINDS = ("identity", "scale", "shift", "adaptive_shift", "kernel")


@dataclass(frozen=True)
class KernelParams:
    a: float = 1.0
    c: float = 1.0
    d: int = 3
    sigma: float = 1.0
    gamma: float = 1.0

    def validate(self):
        if int(self.d) != self.d or self.d < 1:
            raise ContractViolation(f"polynomial degree must be an integer >= 1, got {self.d}")
        if not self.sigma > 0:
            raise ContractViolation(f"sigma must be positive, got {self.sigma}")
        if not self.gamma > 0:
            raise ContractViolation(f"gamma must be positive, got {self.gamma}")
        return self


@dataclass(frozen=True)
class Transform:
    kind: str = "identity"
    value: float = 0.0
    kernel: str | None = None
    params: KernelParams = field(default_factory=KernelParams)

    def __str__(self):
        if self.kind in ("scale", "shift"):
            return f"{self.kind}:{self.value:g}"
        if self.kind == "kernel":
            return f"kernel:{self.kernel}"
        return self.kind.replace("_", "-")


@dataclass(frozen=True)
class TransformSpec:
    input: Transform = field(default_factory=Transform)
    output: Transform = field(default_factory=Transform)
    per_channel_shift: bool = False

    def __post_init__(self):
        validate_transform(self.input, side="input")
        validate_transform(self.output, side="output")

    @property
    def shifts_output(self):
        return self.output.kind in ("shift", "adaptive_shift")


def validate_transform(t, side):
    allowed = INPUT_KINDS if side == "input" else OUTPUT_KINDS
    if t.kind not in allowed:
        if t.kind == "adaptive_shift":
            raise ContractViolation("adaptive shift is only valid on the output side")
        raise ContractViolation(f"unknown {side} transform {t.kind!r}")
    if t.kind == "scale" and t.value == 0:
        raise ContractViolation("scale factor must be non-zero")
    if t.kind == "kernel":
        if t.kernel not in KERNELS:
            raise ContractViolation(f"unknown kernel {t.kernel!r}; expected one of {KERNELS}")
        t.params.validate()


def parse_transform(text, params=None, side="input"):
    """Parse the config syntax: ``identity``, ``scale:5``, ``shift:-0.2``,
    ``adaptive-shift`` or ``kernel:gaussian``."""
    params = params or KernelParams()
    text = str(text).strip().lower()
    head, _, arg = text.partition(":")
    head = head.replace("-", "_")
    try:
        if head in ("identity", "none") and not arg:
            t = Transform()
        elif head in ("scale", "shift"):
            t = Transform(head, float(arg))
        elif head == "adaptive_shift" and not arg:
            t = Transform("adaptive_shift")
        elif head == "kernel":
            t = Transform("kernel", kernel=arg, params=params)
        else:
            raise ConfigError(f"cannot parse {side} transform {text!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse {side} transform {text!r}: {exc}") from None
    try:
        validate_transform(t, side)
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from None
    return t


def _check_finite(out, kind):
    if not np.all(np.isfinite(out)):
        raise NumericError(f"{kind} kernel overflowed to a non-finite value")
    return out


def apply_nonlinear_kernel(values, kind, params=KernelParams()):
    """Evaluate a kernel per entry; the output keeps the input's shape."""
    params.validate()
    v = np.asarray(values)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == "polynomial":
            out = (params.a * v + params.c) ** int(params.d)
        elif kind == "gaussian":
            out = np.exp(-(v * v) / (2.0 * params.sigma**2))
        elif kind == "radial":
            out = np.exp(-params.gamma * (v * v))
        elif kind == "exponential":
            out = np.exp(-np.abs(v) / (2.0 * params.sigma**2))
        elif kind == "laplacian":
            out = np.exp(-np.abs(v) / params.sigma)
        else:
            raise ContractViolation(f"unknown kernel {kind!r}; expected one of {KERNELS}")
    return _check_finite(np.asarray(out, dtype=v.dtype), kind)


def kernel_derivative(values, kind, params=KernelParams()):
    """Elementwise d k(v) / d v. The |v| kink uses sign(0) = 0."""
    v = np.asarray(values)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == "polynomial":
            d = int(params.d)
            out = params.a * d * (params.a * v + params.c) ** (d - 1)
        else:
            k = apply_nonlinear_kernel(v, kind, params)
            if kind == "gaussian":
                out = -v / params.sigma**2 * k
            elif kind == "radial":
                out = -2.0 * params.gamma * v * k
            elif kind == "exponential":
                out = -np.sign(v) / (2.0 * params.sigma**2) * k
            else:
                out = -np.sign(v) / params.sigma * k
    return _check_finite(np.asarray(out, dtype=v.dtype), kind)


def apply_linear(values, scale=1.0, shift=0.0):
    v = np.asarray(values)
    out = v * v.dtype.type(scale) + v.dtype.type(shift)
    if not np.all(np.isfinite(out)):
        raise NumericError("linear transform produced a non-finite value")
    return out


def compute_adaptive_shift(targets, per_channel=False):
    """Mean of the (normalised) targets: a float, or a 1 x C row when per channel."""
    t = np.asarray(targets, dtype=np.float64)
    if t.size == 0:
        raise ContractViolation("adaptive shift needs a non-empty target signal")
    # fsum keeps the mean of a constant signal exactly equal to that constant
    if per_channel:
        cols = t.reshape(t.shape[0], -1)
        return np.array([[math.fsum(c) / c.size for c in cols.T]])
    return math.fsum(t.ravel()) / t.size


def apply_input_transform(coords, t):
    if t.kind == "identity":
        return coords
    if t.kind == "scale":
        return apply_linear(coords, t.value, 0.0)
    if t.kind == "shift":
        return apply_linear(coords, 1.0, t.value)
    if t.kind == "kernel":
        return apply_nonlinear_kernel(coords, t.kernel, t.params)
    raise ContractViolation(f"{t.kind} is not an input transform")


def output_shift(spec, beta):
    """The additive offset implied by the output transform (0 if none)."""
    kind = spec.output.kind
    if kind == "shift":
        return spec.output.value
    if kind == "adaptive_shift":
        if beta is None:
            raise ConfigError("adaptive shift requested but no beta was computed")
        return beta
    return 0.0


def forward_output_transform(raw, spec, beta=None):
    """Map raw network output to the prediction compared against targets."""
    t = spec.output
    if t.kind == "identity":
        return raw
    if t.kind in ("shift", "adaptive_shift"):
        return raw + np.asarray(output_shift(spec, beta), dtype=raw.dtype)
    if t.kind == "scale":
        return apply_linear(raw, t.value, 0.0)
    return apply_nonlinear_kernel(raw, t.kernel, t.params)


def output_backward(raw, grad_pred, spec):
    """Chain rule through the output transform: dL/draw from dL/dpred."""
    t = spec.output
    if t.kind in ("identity", "shift", "adaptive_shift"):
        return grad_pred
    if t.kind == "scale":
        return grad_pred * raw.dtype.type(t.value)
    return grad_pred * kernel_derivative(raw, t.kernel, t.params)
