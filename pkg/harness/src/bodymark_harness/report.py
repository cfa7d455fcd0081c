"""Report rendering: JSON + markdown tables + CSV + accuracy figure."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .experiment import CONDITIONS, SPLITS, ExperimentConfig, ResultsTable

_SPLIT_TITLES = {
    "small": "a) small split",
    "large": "b) large split",
}
_CONDITION_TITLES = {
    "baseline": "baseline (no pre-training)",
    "pre3": "pre3 (pre-trained on basic3)",
    "pre36": "pre36 (pre-trained on regions36)",
}


def _split_subtitle(split: str, datasets: dict) -> str:
    key = "eval_small" if split == "small" else "eval_large"
    d = datasets[key]
    return f"{d['train_images']} train / {d['test_images']} test"


def write_reports(
    table: ResultsTable,
    config: ExperimentConfig,
    datasets: dict,
    out_dir: str | Path,
) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "markdown": out / "report.md",
        "csv": out / "results.csv",
        "figure": out / "accuracy.png",
    }
    _write_json(table, config, datasets, paths["json"])
    _write_markdown(table, config, datasets, paths["markdown"])
    _write_csv(table, paths["csv"])
    _write_figure(table, datasets, paths["figure"])
    return paths


def _write_json(table, config, datasets, path: Path) -> None:
    doc = {
        "config": asdict(config),
        "datasets": datasets,
        "cells": [
            {
                "condition": c.condition,
                "split": c.split,
                "seed": c.seed,
                "accuracy": c.accuracy,
                "oracle_accuracy": c.oracle_accuracy,
                "confusion": c.confusion,
            }
            for c in table.cells
        ],
        "aggregates": {
            split: {
                condition: {
                    "mean": table.mean(condition, split),
                    "spread": table.spread(condition, split),
                }
                for condition in CONDITIONS
            }
            for split in SPLITS
        },
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_markdown(table, config, datasets, path: Path) -> None:
    lines = [
        "# Synthetic pre-training vs. from-scratch fine-tuning",
        "",
        "Small fixed CNN, trained from scratch or pre-trained on synthetic mark",
        "datasets, then fine-tuned on the five-diagnosis task. Accuracies are",
        f"means ± spread over seeds {list(config.seeds)}.",
        "",
    ]
    for split in SPLITS:
        lines.append(f"## {_SPLIT_TITLES[split]} ({_split_subtitle(split, datasets)})")
        lines.append("")
        lines.append("| Model | Accuracy (%) |")
        lines.append("|-------|--------------|")
        for condition in CONDITIONS:
            mean = table.mean(condition, split) * 100
            spread = table.spread(condition, split) * 100
            lines.append(
                f"| {_CONDITION_TITLES[condition]} | {mean:.1f} ± {spread:.1f} |"
            )
        lines.append("")
    lines.append("## Per-cell results")
    lines.append("")
    lines.append("| condition | split | seed | accuracy |")
    lines.append("|-----------|-------|------|----------|")
    for c in table.cells:
        lines.append(f"| {c.condition} | {c.split} | {c.seed} | {c.accuracy:.4f} |")
    lines.append("")
    lines.append("## Inputs")
    lines.append("")
    lines.append("| dataset | family | train | test | config digest |")
    lines.append("|---------|--------|-------|------|---------------|")
    for name, d in datasets.items():
        lines.append(
            f"| {name} | {d['family']} | {d['train_images']} | {d['test_images']} "
            f"| `{d['config_digest'][:16]}` |"
        )
    lines.append("")
    lines.append("## Hyperparameters")
    lines.append("")
    lines.append(
        f"- input size {config.image_width}x{config.image_height}, "
        f"batch size {config.batch_size}, AdamW weight decay {config.weight_decay}, "
        "random flip augmentation (off for region-labeled pretraining)"
    )
    lines.append(
        f"- pretrain: {config.pretrain_epochs} epochs, lr {config.pretrain_lr}, "
        f"seed {config.pretrain_seed}"
    )
    lines.append(
        f"- fine-tune: {config.finetune_epochs_small} epochs (small split) / "
        f"{config.finetune_epochs_large} epochs (large split), lr {config.finetune_lr}"
    )
    lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")


def _write_csv(table, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["condition", "split", "seed", "accuracy"])
        for c in table.cells:
            writer.writerow([c.condition, c.split, c.seed, repr(c.accuracy)])


def _write_figure(table, datasets, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, split in zip(axes, SPLITS):
        means = [table.mean(c, split) * 100 for c in CONDITIONS]
        spreads = [table.spread(c, split) * 100 for c in CONDITIONS]
        ax.bar(CONDITIONS, means, yerr=spreads, capsize=4, color=["#888", "#2a7", "#27a"])
        ax.set_title(f"{_SPLIT_TITLES[split]} ({_split_subtitle(split, datasets)})")
        ax.set_ylim(0, 100)
        ax.grid(axis="y", alpha=0.3)
    axes[0].set_ylabel("test accuracy (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
