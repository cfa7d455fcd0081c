"""Harness CLI: prepare datasets via the generator CLI, run the experiment."""

from __future__ import annotations

import argparse
import shlex
import subprocess
import sys
from importlib import resources
from pathlib import Path

from .experiment import ExperimentConfig, run_experiment
from .report import write_reports


def _bodymark(cmd: str, args: list[str]) -> None:
    full = shlex.split(cmd) + args
    proc = subprocess.run(full)
    if proc.returncode != 0:
        raise SystemExit(f"'{' '.join(full)}' failed with exit code {proc.returncode}")


def experiment_scenario_path() -> Path:
    """The packaged kind-combination scenario used for the study."""
    return Path(
        str(resources.files("bodymark_harness").joinpath("data/experiment_scenario.json"))
    )


def cmd_prepare(args: argparse.Namespace) -> int:
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    size = f"{args.canvas_width}x{args.canvas_height}"
    if args.scenario == "experiment":
        scenario_args = ["--scenario", str(experiment_scenario_path())]
    elif args.scenario == "default":
        scenario_args = []  # generator's built-in colored scenario
    else:
        scenario_args = ["--scenario", args.scenario]
    _bodymark(
        args.bodymark,
        [
            "generate", "basic3",
            "--out", str(root / "basic3"),
            "--seed", str(args.seed),
            "--per-class-train", str(args.basic3_per_class),
            "--per-class-test", "20",
            "--size", size,
        ],
    )
    _bodymark(
        args.bodymark,
        [
            "generate", "regions36",
            "--out", str(root / "regions36"),
            "--seed", str(args.seed + 1),
            "--per-class-train", str(args.regions36_per_class),
            "--per-class-test", "0",
            "--size", size,
        ],
    )
    _bodymark(
        args.bodymark,
        [
            "generate", "diagnoses",
            "--out", str(root / "diagnoses"),
            "--seed", str(args.seed + 2),
            "--size", size,
            *scenario_args,
        ],
    )
    _bodymark(
        args.bodymark,
        [
            "subset",
            "--in", str(root / "diagnoses"),
            "--out", str(root / "diagnoses_small"),
            "--train-per-class", "5",
            "--test-per-class", "4",
        ],
    )
    print(f"datasets ready under {root}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        pretrain3_dir=args.pretrain3,
        pretrain36_dir=args.pretrain36,
        eval_dir=args.eval,
        eval_small_dir=args.eval_small,
        out_dir=args.out,
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        image_width=args.image_width,
        image_height=args.image_height,
        pretrain_epochs=args.pretrain_epochs,
        finetune_epochs_small=args.small_epochs,
        finetune_epochs_large=args.large_epochs,
        pretrain_lr=args.pretrain_lr,
        finetune_lr=args.finetune_lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
    )
    table, datasets = run_experiment(config)
    paths = write_reports(table, config, datasets, config.out_dir)
    for split in ("small", "large"):
        means = ", ".join(
            f"{c}={table.mean(c, split) * 100:.1f}%" for c in ("baseline", "pre3", "pre36")
        )
        print(f"{split}: {means}")
    print(f"reports: {', '.join(str(p) for p in paths.values())}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bodymark-harness",
        description="Pre-train on synthetic mark datasets, fine-tune on diagnoses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prep = sub.add_parser("prepare", help="build the experiment datasets")
    prep.add_argument("--out", required=True, help="dataset root directory")
    prep.add_argument("--seed", type=int, default=42)
    prep.add_argument("--bodymark", default="bodymark", help="generator CLI command")
    prep.add_argument("--canvas-width", type=int, default=250)
    prep.add_argument("--canvas-height", type=int, default=200)
    prep.add_argument("--basic3-per-class", type=int, default=200)
    prep.add_argument("--regions36-per-class", type=int, default=25)
    prep.add_argument(
        "--scenario",
        default="experiment",
        help="'experiment' (packaged kind-combination rules), 'default' "
        "(generator's colored rules), or a scenario JSON path",
    )
    prep.set_defaults(func=cmd_prepare)

    run = sub.add_parser("run", help="run the full experiment grid")
    run.add_argument("--pretrain3", required=True)
    run.add_argument("--pretrain36", required=True)
    run.add_argument("--eval", required=True)
    run.add_argument("--eval-small", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seeds", default="0,1,2,3,4")
    run.add_argument("--image-width", type=int, default=125)
    run.add_argument("--image-height", type=int, default=100)
    run.add_argument("--pretrain-epochs", type=int, default=15)
    run.add_argument("--small-epochs", type=int, default=100)
    run.add_argument("--large-epochs", type=int, default=60)
    run.add_argument("--pretrain-lr", type=float, default=1e-3)
    run.add_argument("--finetune-lr", type=float, default=1e-3)
    run.add_argument("--weight-decay", type=float, default=0.05)
    run.add_argument("--batch-size", type=int, default=32)
    run.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
