"""Execute one resolved run configuration and write its artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .. import checkpoint
from ..signals import export_audio, export_image
from ..training import fit, predict
from .config import build_backbone, build_dataset, build_train, build_transform, merge, resolve

METRICS_COLUMNS = ("epoch", "mse", "psnr", "ssim")


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, columns, rows):
    """Rows may be dicts keyed by column or plain sequences."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            cells = [row.get(c) for c in columns] if isinstance(row, dict) else row
            w.writerow([fmt(v) for v in cells])


def write_metrics(path, report):
    rows = [(r.epoch, r.mse, r.psnr, r.ssim) for r in report.records]
    f = report.final
    rows.append((-1, f["mse"], f["psnr"], f.get("ssim")))
    write_csv(path, METRICS_COLUMNS, rows)


def execute(cfg, out_dir=None, artifacts=True):
    """Run one fit. Returns a summary dict; writes artifacts when ``out_dir`` is set.

    ``cfg`` may be partial; missing keys take their defaults.
    """
    cfg = resolve(merge(cfg))
    dataset = build_dataset(cfg)
    backbone = build_backbone(cfg, dataset)
    spec = build_transform(cfg)
    train = build_train(cfg)
    model, report = fit(dataset, backbone, spec, train)
    summary = {
        "config": cfg,
        "final": report.final,
        "beta": report.beta,
        "param_count": int(model.params.size),
        "seconds": report.seconds,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics(out / "metrics.csv", report)
        echo = {"config": {**cfg, "out_dir": None}, "final": report.final, "beta": report.beta,
                "param_count": summary["param_count"]}
        (out / "run.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if artifacts:
            pred = predict(model, dataset, spec, report.beta if report.beta is not None else None)
            if dataset.meta.kind == "image":
                export_image(pred, dataset, out / "reconstruction.png")
            else:
                export_audio(pred, dataset, out / "reconstruction.wav")
            meta = {"input_transform": str(spec.input), "output_transform": str(spec.output),
                    "beta": report.beta, "epochs_done": train.epochs}
            checkpoint.save_checkpoint(model, out / "checkpoint.ssir", state=report.state, meta=meta)
    return summary
