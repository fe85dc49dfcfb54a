"""Run configuration: a flat JSON document of known keys.

Anything not listed in ``DEFAULTS`` is rejected, so a typo in a sweep
definition fails loudly instead of silently running the default.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from ..backbones import BackboneConfig
from ..errors import ConfigError, ContractViolation
from ..signals import load_audio, load_image
from ..training import TrainConfig
from ..transforms import KernelParams, TransformSpec, parse_transform

DEFAULTS = {
    "input": "natural64.png",
    "signal": None,            # "image" | "audio"; inferred from the extension when null
    "channels": None,          # "rgb" | "gray" | null (keep the file's channels)
    "crop": None,
    "max_seconds": None,
    "input_range": [-1.0, 1.0],
    "output_range": [-1.0, 1.0],
    "backbone": "siren",
    "hidden_layers": 3,
    "width": 256,
    "omega0": 30.0,
    "pe_bands": 10,
    "input_transform": "identity",
    "output_transform": "identity",
    "kernel_a": 1.0,
    "kernel_c": 1.0,
    "kernel_d": 3,
    "kernel_sigma": 1.0,
    "kernel_gamma": 1.0,
    "per_channel_shift": False,
    "epochs": 500,
    "learning_rate": 1e-4,
    "adam_beta1": 0.9,
    "adam_beta2": 0.999,
    "adam_eps": 1e-8,
    "batch": "full",
    "seed": 0,
    "precision": "single",
    "ssim_every": 50,
    "out_dir": None,
}

# backbone-specific input scale used by "ss-default"
SS_DEFAULT_SCALE = {"relu_pe": 0.3, "siren": 5.0, "finer": 2.0}

OUT_ROOT_ENV = "SSINR_OUT"
JOBS_ENV = "SSINR_JOBS"


def out_root():
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


def default_jobs():
    env = os.environ.get(JOBS_ENV)
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def check_keys(doc, where="config"):
    unknown = sorted(set(doc) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")


def load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    check_keys(doc)
    return doc


def merge(*layers):
    """Later layers win; ``None`` values in a layer mean 'not given'."""
    out = dict(DEFAULTS)
    for layer in layers:
        check_keys(layer)
        out.update({k: v for k, v in layer.items() if v is not None})
    return out


def signal_kind(cfg):
    if cfg["signal"]:
        if cfg["signal"] not in ("image", "audio"):
            raise ConfigError(f"signal must be 'image' or 'audio', got {cfg['signal']!r}")
        return cfg["signal"]
    return "audio" if str(cfg["input"]).lower().endswith(".wav") else "image"


def _range(value, key):
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a pair of numbers, got {value!r}") from None
    if not hi > lo:
        raise ConfigError(f"{key} must be increasing, got {value!r}")
    return lo, hi


def resolve(cfg):
    """Fill derived values (ss-default scale, batch type) and validate."""
    cfg = dict(cfg)
    check_keys(cfg)
    cfg["signal"] = signal_kind(cfg)
    if cfg["backbone"] not in SS_DEFAULT_SCALE:
        raise ConfigError(f"unknown backbone {cfg['backbone']!r}; expected one of {sorted(SS_DEFAULT_SCALE)}")
    if str(cfg["input_transform"]).strip().lower() == "ss-default":
        cfg["input_transform"] = f"scale:{SS_DEFAULT_SCALE[cfg['backbone']]:g}"
    if cfg["batch"] != "full":
        try:
            cfg["batch"] = int(cfg["batch"])
        except (TypeError, ValueError):
            raise ConfigError(f"batch must be 'full' or an integer, got {cfg['batch']!r}") from None
    cfg["input_range"] = list(_range(cfg["input_range"], "input_range"))
    cfg["output_range"] = list(_range(cfg["output_range"], "output_range"))
    build_transform(cfg)
    build_train(cfg)
    return cfg


def build_transform(cfg):
    try:
        params = KernelParams(cfg["kernel_a"], cfg["kernel_c"], int(cfg["kernel_d"]),
                              cfg["kernel_sigma"], cfg["kernel_gamma"]).validate()
        tin = parse_transform(cfg["input_transform"], params, side="input")
        tout = parse_transform(cfg["output_transform"], params, side="output")
        return TransformSpec(tin, tout, per_channel_shift=bool(cfg["per_channel_shift"]))
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from None


def build_train(cfg):
    try:
        return TrainConfig(
            epochs=int(cfg["epochs"]),
            learning_rate=float(cfg["learning_rate"]),
            adam_beta1=float(cfg["adam_beta1"]),
            adam_beta2=float(cfg["adam_beta2"]),
            adam_eps=float(cfg["adam_eps"]),
            batch=cfg["batch"],
            seed=int(cfg["seed"]),
            precision=cfg["precision"],
            ssim_every=int(cfg["ssim_every"]),
        )
    except (ContractViolation, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_dataset(cfg):
    if cfg["signal"] == "audio":
        return load_audio(cfg["input"], cfg["max_seconds"], tuple(cfg["output_range"]), tuple(cfg["input_range"]))
    return load_image(cfg["input"], cfg["channels"], tuple(cfg["output_range"]), tuple(cfg["input_range"]),
                      crop=cfg["crop"])


def build_backbone(cfg, dataset):
    try:
        return BackboneConfig(
            kind=cfg["backbone"],
            hidden_layers=int(cfg["hidden_layers"]),
            width=int(cfg["width"]),
            in_dim=dataset.coords.shape[1],
            out_dim=dataset.targets.shape[1],
            omega0=float(cfg["omega0"]),
            pe_bands=int(cfg["pe_bands"]),
        )
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from None
