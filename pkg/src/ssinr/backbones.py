"""Coordinate MLP backbones: ReLU + positional encoding, SIREN, and Finer.

All parameters of a model live in one flat vector (``model.params``); the
per-layer weight and bias matrices are views into it. Layout, per layer in
order: weight (fan_in x fan_out, row-major), then bias (1 x fan_out). The
optimizer and the checkpoint format both work on that flat vector.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .errors import ContractViolation
from .numerics import uniform_fill

KINDS = ("relu_pe", "siren", "finer")

# test-only hook: backbone kinds whose activation derivative is deliberately wrong
_DERIVATIVE_FAULTS: set[str] = set()


@dataclass(frozen=True)
class BackboneConfig:
    kind: str = "siren"
    hidden_layers: int = 3
    width: int = 256
    in_dim: int = 2
    out_dim: int = 3
    omega0: float = 30.0
    pe_bands: int = 10

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown backbone {self.kind!r}; expected one of {KINDS}")
        for name in ("hidden_layers", "width", "in_dim", "out_dim", "pe_bands"):
            if int(getattr(self, name)) < 1:
                raise ContractViolation(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.omega0 > 0:
            raise ContractViolation(f"omega0 must be positive, got {self.omega0}")

    @property
    def eff_in(self):
        if self.kind == "relu_pe":
            return 2 * self.pe_bands * self.in_dim
        return self.in_dim

    def layer_shapes(self):
        """(fan_in, fan_out) of every weight matrix: input map, hidden maps, output map."""
        dims = [self.eff_in] + [self.width] * (self.hidden_layers + 1) + [self.out_dim]
        return list(zip(dims[:-1], dims[1:]))

    def to_dict(self):
        return asdict(self)


def param_count(config):
    return sum(fi * fo + fo for fi, fo in config.layer_shapes())


def layer_views(config, flat):
    """Split a flat parameter-shaped vector into [(W, b), ...] views."""
    if flat.size != param_count(config):
        raise ContractViolation(f"flat vector has {flat.size} entries, model needs {param_count(config)}")
    views = []
    pos = 0
    for fi, fo in config.layer_shapes():
        w = flat[pos:pos + fi * fo].reshape(fi, fo)
        pos += fi * fo
        b = flat[pos:pos + fo].reshape(1, fo)
        pos += fo
        views.append((w, b))
    return views


class MlpModel:
    def __init__(self, config, params):
        params = np.ascontiguousarray(params)
        if params.ndim != 1 or params.size != param_count(config):
            raise ContractViolation(f"parameter vector of length {params.size} does not fit {config}")
        self.config = config
        self.params = params
        self.revision = 0
        views = layer_views(config, self.params)
        self.weights = [w for w, _ in views]
        self.biases = [b for _, b in views]

    @property
    def dtype(self):
        return self.params.dtype

    def touch(self):
        """Mark parameters as modified; invalidates outstanding forward caches."""
        self.revision += 1

    def copy(self):
        return MlpModel(self.config, self.params.copy())

    def __repr__(self):
        return f"MlpModel({self.config.kind}, params={self.params.size}, dtype={self.dtype})"


def init_model(config, rng, dtype=np.float64):
    """Draw initial parameters following each backbone's published scheme.

    Weights: siren/finer first layer U(-1/fan_in, 1/fan_in), later layers
    U(-sqrt(6/fan_in)/omega0, +...); relu_pe U(-sqrt(6/fan_in), +...).
    Biases: the first layer gets U(-1/sqrt(fan_in), +...) (U(-1, 1) for
    finer); hidden and output biases start at zero. A zero first-layer bias
    would make a sine network an odd function of its input at step 0.
    Draws happen in float64 so single and double models agree.
    """
    flat = np.zeros(param_count(config), dtype=np.float64)
    for i, (w, b) in enumerate(layer_views(config, flat)):
        fan_in = w.shape[0]
        if config.kind == "relu_pe":
            bound = math.sqrt(6.0 / fan_in)
        elif i == 0:
            bound = 1.0 / fan_in
        else:
            bound = math.sqrt(6.0 / fan_in) / config.omega0
        w[...] = uniform_fill(rng, w.shape, -bound, bound)
        if i == 0:
            bb = 1.0 if config.kind == "finer" else 1.0 / math.sqrt(fan_in)
            b[...] = uniform_fill(rng, b.shape, -bb, bb)
    return MlpModel(config, flat.astype(dtype))


def positional_encoding(coords, bands):
    """Per coordinate v and band k: (sin(2^k pi v), cos(2^k pi v)), band-major."""
    if int(bands) < 1:
        raise ContractViolation(f"positional encoding needs at least one band, got {bands}")
    coords = np.ascontiguousarray(coords)
    if coords.ndim != 2:
        raise ContractViolation(f"coords must be N x in_dim, got shape {coords.shape}")
    return _kernels.positional_encoding(coords, int(bands))


def prepare_inputs(config, coords):
    """Backbone-specific input encoding (positional encoding for relu_pe)."""
    if config.kind == "relu_pe":
        return positional_encoding(coords, config.pe_bands)
    return coords


def activation(kind, z, omega0):
    """Return (sigma(z), sigma'(z)) for a hidden layer pre-activation."""
    if kind == "siren":
        a, da = _kernels.sine_act(z, omega0)
    elif kind == "finer":
        a, da = _kernels.finer_act(z, omega0)
    else:
        a = np.maximum(z, 0)
        da = (z > 0).astype(z.dtype)
    if kind in _DERIVATIVE_FAULTS:
        da = da * z.dtype.type(1.01)
    return a, da


@dataclass
class ForwardCache:
    model_id: int
    revision: int
    inputs: list      # input to each layer
    dacts: list       # activation derivative of each hidden layer


def forward(model, x):
    """Run the network on already-encoded inputs. Returns (raw_output, cache)."""
    cfg = model.config
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != cfg.eff_in:
        raise ContractViolation(f"{cfg.kind} expects inputs of shape N x {cfg.eff_in}, got {x.shape}")
    if x.dtype != model.dtype:
        x = x.astype(model.dtype)
    inputs, dacts = [], []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(h)
        z = h @ w
        z += b
        if i == last:
            h = z
        else:
            h, da = activation(cfg.kind, z, cfg.omega0)
            dacts.append(da)
    return h, ForwardCache(id(model), model.revision, inputs, dacts)


def backward(model, cache, output_grad):
    """Gradient of the loss w.r.t. the flat parameter vector.

    ``output_grad`` is dL/d(raw output). Returns an array shaped like
    ``model.params``; use ``layer_views`` for per-layer dW, db.
    """
    if cache is None or cache.model_id != id(model) or cache.revision != model.revision:
        raise ContractViolation("backward called with a missing or stale forward cache")
    g = np.asarray(output_grad, dtype=model.dtype)
    n_out = model.config.out_dim
    if g.shape != (cache.inputs[0].shape[0], n_out):
        raise ContractViolation(f"output gradient shape {g.shape} does not match forward output")
    grad = np.empty_like(model.params)
    views = layer_views(model.config, grad)
    last = len(model.weights) - 1
    for i in range(last, -1, -1):
        if i != last:
            g = g * cache.dacts[i]
        dw, db = views[i]
        np.matmul(cache.inputs[i].T, g, out=dw)
        db[...] = g.sum(axis=0, keepdims=True)
        if i > 0:
            g = g @ model.weights[i].T
    return grad
