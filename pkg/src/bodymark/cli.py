"""Command-line interface: generate, subset, validate, regions.

Exit codes: 0 success, 2 configuration error, 3 generation failure,
4 I/O error, 5 validation violations. Precedence for settings is
flags > --config file > built-in defaults; the effective config is
what the manifest digest covers.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import png
from .bodymap import build_partition, default_mask, load_mask
from .dataset import (
    INCOMPLETE_MARKER,
    DatasetConfig,
    DatasetManifest,
    build_dataset,
    extract_subset,
    validate_dataset,
)
from .errors import ConfigurationError, GenerationError, PngDecodeError
from .primitives import ClusterParams, DashPattern, LineParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_IO = 4
EXIT_VIOLATIONS = 5

# 12 visually distinct region colors; none is the white background.
_REGION_PALETTE = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
    (60, 40, 160),
    (255, 187, 120),
)

_CONFIG_FILE_KEYS = {
    "family",
    "out",
    "seed",
    "per_class_train",
    "per_class_test",
    "width",
    "height",
    "margin",
    "mask",
    "region_map",
    "template",
    "scenario",
    "rows",
    "cols",
    "jobs",
    "line",
    "cluster",
    "dash",
    "style",
}
_NESTED_KEYS = {
    "line": {"endpoint_radius", "control_deviation"},
    "cluster": {"n_min", "n_max", "step_radius"},
    "dash": {"on_length", "off_length"},
    "style": {"stroke_width", "color", "point_radius"},
}


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigurationError(f"--size wants WxH, got {text!r}") from None


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _CONFIG_FILE_KEYS
    if unknown:
        raise ConfigurationError(f"config file {path}: unknown keys {sorted(unknown)}")
    for key, allowed in _NESTED_KEYS.items():
        if key in raw:
            if not isinstance(raw[key], dict):
                raise ConfigurationError(f"config file {path}: {key} must be an object")
            bad = set(raw[key]) - allowed
            if bad:
                raise ConfigurationError(
                    f"config file {path}: unknown keys {sorted(bad)} under {key!r}"
                )
    return raw


def _resolve(flag_value, file_value, default):
    if flag_value is not None:
        return flag_value
    if file_value is not None:
        return file_value
    return default


def _abspath(value: str | None) -> str | None:
    return None if value is None else str(Path(value).resolve())


def _effective_config(args: argparse.Namespace) -> tuple[DatasetConfig, str, int]:
    file_cfg = _load_config_file(args.config) if args.config else {}
    size = _parse_size(args.size) if args.size else None
    width = _resolve(size[0] if size else None, file_cfg.get("width"), 1000)
    height = _resolve(size[1] if size else None, file_cfg.get("height"), 800)
    out = _resolve(args.out, file_cfg.get("out"), None)
    if not out:
        raise ConfigurationError("--out is required (flag or config file)")
    family = _resolve(getattr(args, "family", None), file_cfg.get("family"), None)
    if family is None:
        raise ConfigurationError("a dataset family is required")
    line_cfg = file_cfg.get("line", {})
    cluster_cfg = file_cfg.get("cluster", {})
    dash_cfg = file_cfg.get("dash", {})
    style_cfg = file_cfg.get("style", {})
    try:
        config = DatasetConfig(
            family=family,
            master_seed=_resolve(args.seed, file_cfg.get("seed"), 0),
            images_per_class_train=_resolve(
                args.per_class_train, file_cfg.get("per_class_train"), None
            ),
            images_per_class_test=_resolve(
                args.per_class_test, file_cfg.get("per_class_test"), None
            ),
            width=width,
            height=height,
            margin=_resolve(None, file_cfg.get("margin"), 40),
            mask_file=_abspath(_resolve(args.mask, file_cfg.get("mask"), None)),
            region_map_file=_abspath(file_cfg.get("region_map")),
            partition_rows=_resolve(None, file_cfg.get("rows"), 3),
            partition_cols=_resolve(None, file_cfg.get("cols"), 4),
            line=LineParams(
                endpoint_radius=line_cfg.get("endpoint_radius", 200.0),
                control_deviation=line_cfg.get("control_deviation", 30.0),
            ),
            cluster=ClusterParams(
                n_min=cluster_cfg.get("n_min", 3),
                n_max=cluster_cfg.get("n_max", 20),
                step_radius=cluster_cfg.get("step_radius", 20.0),
            ),
            dash=DashPattern(
                on_length=dash_cfg.get("on_length", 12.0),
                off_length=dash_cfg.get("off_length", 8.0),
            ),
            stroke_width=style_cfg.get("stroke_width", 3.0),
            stroke_color=tuple(style_cfg.get("color", (0, 0, 0, 255))),
            point_radius=style_cfg.get("point_radius", 3.0),
            template_file=_abspath(
                _resolve(args.template, file_cfg.get("template"), None)
            ),
            scenario_file=_abspath(
                _resolve(args.scenario, file_cfg.get("scenario"), None)
            ),
        )
    except (TypeError, ValueError) as e:
        raise ConfigurationError(str(e)) from e
    jobs = _resolve(args.jobs, file_cfg.get("jobs"), 1)
    return config, out, jobs


def cmd_generate(args: argparse.Namespace) -> int:
    config, out, jobs = _effective_config(args)
    manifest = build_dataset(config, out, jobs=jobs)
    train = sum(1 for e in manifest.entries if e.split == "train")
    test = len(manifest.entries) - train
    if args.porcelain:
        print(
            json.dumps(
                {
                    "command": "generate",
                    "family": config.family,
                    "out": str(out),
                    "train": train,
                    "test": test,
                    "seed": config.master_seed,
                    "digest": manifest.config_digest,
                },
                sort_keys=True,
            )
        )
    else:
        print(
            f"generated {config.family}: {train} train + {test} test images "
            f"in {out} (seed {config.master_seed}, digest {manifest.config_digest[:12]})"
        )
    return EXIT_OK


def cmd_subset(args: argparse.Namespace) -> int:
    src = Path(args.in_dir)
    dst = Path(args.out)
    manifest = DatasetManifest.load(src)
    sub = extract_subset(manifest, args.train_per_class, args.test_per_class)
    dst.mkdir(parents=True, exist_ok=True)
    marker = dst / INCOMPLETE_MARKER
    marker.write_text("subset in progress or aborted; do not use\n", encoding="utf-8")
    copied: list[Path] = []
    try:
        for entry in sub.entries:
            target = dst / entry.path
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src / entry.path, target)
            copied.append(target)
        sub.save(dst)
    except BaseException:
        for p in copied:
            if p.exists():
                p.unlink()
        raise
    marker.unlink()
    train = sum(1 for e in sub.entries if e.split == "train")
    test = len(sub.entries) - train
    if args.porcelain:
        print(
            json.dumps(
                {
                    "command": "subset",
                    "out": str(dst),
                    "train": train,
                    "test": test,
                    "digest": sub.config_digest,
                },
                sort_keys=True,
            )
        )
    else:
        print(f"subset: {train} train + {test} test images in {dst}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = validate_dataset(args.in_dir)
    if args.porcelain:
        print(
            json.dumps(
                {
                    "command": "validate",
                    "ok": report.ok,
                    "entries_checked": report.entries_checked,
                    "violations": [
                        {"path": v.path, "kind": v.kind, "message": v.message}
                        for v in report.violations
                    ],
                },
                sort_keys=True,
            )
        )
    else:
        for v in report.violations:
            print(v)
        status = "OK" if report.ok else f"{len(report.violations)} violation(s)"
        print(f"validated {report.entries_checked} entries: {status}")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_regions(args: argparse.Namespace) -> int:
    width, height = _parse_size(args.size) if args.size else (1000, 800)
    if args.mask:
        mask = load_mask(args.mask)
        width, height = mask.width, mask.height
    else:
        mask = default_mask(width, height, args.margin)
    partition = build_partition(mask, args.rows, args.cols)
    pixels = np.full((height, width, 4), 255, dtype=np.uint8)
    for rid, color in enumerate(_REGION_PALETTE):
        sel = partition.region_id == rid
        pixels[sel, 0] = color[0]
        pixels[sel, 1] = color[1]
        pixels[sel, 2] = color[2]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(png.encode(pixels))
    print(f"wrote region visualization to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bodymark",
        description="Deterministic synthetic body-map mark dataset generator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a dataset family")
    gen.add_argument("family", choices=("basic3", "regions36", "diagnoses"))
    gen.add_argument("--out", help="output dataset directory")
    gen.add_argument("--seed", type=int, help="master seed (default 0)")
    gen.add_argument("--per-class-train", type=int, dest="per_class_train")
    gen.add_argument("--per-class-test", type=int, dest="per_class_test")
    gen.add_argument("--size", help="canvas WxH (default 1000x800)")
    gen.add_argument("--mask", help="mask PNG (luminance > 127 is drawable)")
    gen.add_argument("--template", help="background template PNG")
    gen.add_argument("--scenario", help="scenario JSON (diagnoses only)")
    gen.add_argument("--config", help="JSON config file; flags override it")
    gen.add_argument("--jobs", type=int, help="parallel workers (default 1)")
    gen.add_argument("--porcelain", action="store_true", help="JSON summary line")
    gen.set_defaults(func=cmd_generate)

    subs = sub.add_parser("subset", help="extract a first-k-per-class subset")
    subs.add_argument("--in", dest="in_dir", required=True)
    subs.add_argument("--out", required=True)
    subs.add_argument("--train-per-class", type=int, required=True)
    subs.add_argument("--test-per-class", type=int, required=True)
    subs.add_argument("--porcelain", action="store_true")
    subs.set_defaults(func=cmd_subset)

    val = sub.add_parser("validate", help="re-check a dataset against its manifest")
    val.add_argument("--in", dest="in_dir", required=True)
    val.add_argument("--porcelain", action="store_true")
    val.set_defaults(func=cmd_validate)

    reg = sub.add_parser("regions", help="write a PNG visualizing the 12 regions")
    reg.add_argument("--out", required=True)
    reg.add_argument("--size", help="canvas WxH (default 1000x800)")
    reg.add_argument("--mask", help="mask PNG")
    reg.add_argument("--margin", type=int, default=40)
    reg.add_argument("--rows", type=int, default=3)
    reg.add_argument("--cols", type=int, default=4)
    reg.set_defaults(func=cmd_regions)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationError as e:
        print(f"generation failed: {e}", file=sys.stderr)
        return EXIT_GENERATION
    except PngDecodeError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
