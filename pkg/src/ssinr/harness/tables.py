"""Ablation tables: row layouts for each input/output transformation study.

Each table is a list of rows; a row carries its label columns plus the
run-config overrides that produce it. Every row is fitted on every image in
the dataset directory and PSNR/SSIM are averaged over images.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..backbones import BackboneConfig, param_count
from ..errors import ConfigError
from .config import SS_DEFAULT_SCALE, merge
from .runner import execute, write_csv

IMAGE_SUFFIXES = {".png", ".ppm", ".pgm"}

DESK = {"width": 128, "epochs": 300, "crop": 64, "precision": "single"}
FULL = {"width": 256, "epochs": 500, "crop": 256, "precision": "single"}


def _kernel_table():
    rows = [({"method": "vanilla", "side": "input"}, {}), ({"method": "vanilla", "side": "output"}, {})]
    for k in ("polynomial", "laplacian", "gaussian", "exponential", "radial"):
        rows.append(({"method": k, "side": "input"}, {"input_transform": f"kernel:{k}"}))
        rows.append(({"method": k, "side": "output"}, {"output_transform": f"kernel:{k}"}))
    return rows


def _sweep(key, column, values, fmt):
    return [({column: v}, {key: fmt(v)}) for v in values]


def _depth_table():
    ss = {"input_transform": "ss-default", "output_transform": "adaptive-shift"}
    return [
        ({"action": "remove one FC", "layers": 4}, {"hidden_layers": 2}),
        ({"action": "baseline", "layers": 5}, {"hidden_layers": 3}),
        ({"action": "add one FC", "layers": 6}, {"hidden_layers": 4}),
        ({"action": "add two FC", "layers": 7}, {"hidden_layers": 5}),
        ({"action": "add two LT", "layers": 7}, {"hidden_layers": 3, **ss}),
    ]


def _table_rows(table_id, backbone):
    scale = SS_DEFAULT_SCALE[backbone]
    if table_id == "t1_kernels":
        return _kernel_table()
    if table_id == "t2_out_scale":
        return _sweep("output_transform", "scale", [0.25, 0.5, 1, 2, 4], lambda v: f"scale:{v}")
    if table_id == "t3_in_shift":
        return _sweep("input_transform", "shift", [-100, -10, 0, 10, 100], lambda v: f"shift:{v}")
    if table_id == "t4_out_shift":
        return _sweep("output_transform", "shift", [-0.5, -0.2, 0, 0.2, 0.5], lambda v: f"shift:{v}")
    if table_id == "t5_adaptive":
        return [
            ({"method": "baseline"}, {}),
            ({"method": "shift (fixed -0.2)"}, {"output_transform": "shift:-0.2"}),
            ({"method": "shift (adaptive)"}, {"output_transform": "adaptive-shift"}),
        ]
    if table_id == "t6_ss":
        return [
            ({"method": "baseline"}, {}),
            ({"method": "scale (input)"}, {"input_transform": f"scale:{scale:g}"}),
            ({"method": "shift (output)"}, {"output_transform": "adaptive-shift"}),
            ({"method": "scale-and-shift"}, {"input_transform": f"scale:{scale:g}", "output_transform": "adaptive-shift"}),
        ]
    if table_id == "t10_depth":
        return _depth_table()
    if table_id == "t11_norm":
        return [
            ({"method": "input [0,255]"}, {"input_range": [0.0, 255.0]}),
            ({"method": "input [-1,1]"}, {}),
            ({"method": "input [-5,5]"}, {"input_range": [-5.0, 5.0]}),
            ({"method": "output [0,255]"}, {"output_range": [0.0, 255.0]}),
            ({"method": "output [-1,1]"}, {}),
            ({"method": "output adaptive"}, {"output_transform": "adaptive-shift"}),
        ]
    raise ConfigError(f"unknown table id {table_id!r}; expected one of {', '.join(TABLE_IDS)}")


TABLE_IDS = ("t1_kernels", "t2_out_scale", "t3_in_shift", "t4_out_shift", "t5_adaptive", "t6_ss",
             "t10_depth", "t11_norm")


def dataset_images(dataset_dir):
    d = Path(dataset_dir)
    if d.is_file():
        return [d]
    images = sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES) if d.is_dir() else []
    if not images:
        raise ConfigError(f"no PNG/PPM/PGM images found in {dataset_dir}")
    return images


def full_param_count(hidden_layers):
    """Parameter count at full image-fitting scale (2 -> 256 wide -> 3)."""
    return param_count(BackboneConfig("siren", hidden_layers=hidden_layers, width=256, in_dim=2, out_dim=3))


def run_table(table_id, dataset_dir, base=None, full_scale=False, out_path=None):
    """Compute a table; returns (columns, rows) and writes a CSV if ``out_path``."""
    if table_id not in TABLE_IDS:
        raise ConfigError(f"unknown table id {table_id!r}; expected one of {', '.join(TABLE_IDS)}")
    base = merge(FULL if full_scale else DESK, base or {})
    images = dataset_images(dataset_dir)
    layout = _table_rows(table_id, base["backbone"])

    memo = {}
    rows = []
    for labels, overrides in layout:
        psnrs, ssims, counts = [], [], []
        for img in images:
            cfg = {**base, **overrides, "input": str(img)}
            if cfg["crop"]:
                cfg["crop"] = _fit_crop(img, int(cfg["crop"]))
            key = json.dumps(cfg, sort_keys=True)
            if key not in memo:
                memo[key] = execute(cfg)
            s = memo[key]
            psnrs.append(s["final"]["psnr"])
            ssims.append(s["final"]["ssim"])
            counts.append(s["param_count"])
        row = {**labels, "psnr": float(np.mean(psnrs)), "ssim": float(np.mean(ssims)), "images": len(images)}
        if table_id == "t10_depth":
            row["parameters"] = full_param_count(overrides["hidden_layers"])
            row["run_parameters"] = counts[0]
        rows.append(row)

    label_cols = list(layout[0][0].keys())
    extra = ["parameters", "run_parameters"] if table_id == "t10_depth" else []
    columns = label_cols + ["psnr", "ssim", "images"] + extra
    if out_path is not None:
        write_csv(out_path, columns, rows)
    return columns, rows


def _fit_crop(path, crop):
    """Crop size clipped to the image (images smaller than the crop are used whole)."""
    from .._imageio import read_image
    from ..signals import resolve_path

    h, w = read_image(resolve_path(path)).shape[:2]
    return None if crop >= h and crop >= w else [min(crop, h), min(crop, w)]
