"""Dataset assembly, manifests, subsets, and manifest-driven validation.

Three dataset families:

* ``basic3`` — one mark per image anywhere in the mask; classes are the
  three mark kinds;
* ``regions36`` — one mark per image constrained to one of the 12 regions;
  classes are the 36 (kind, region) pairs;
* ``diagnoses`` — five classes drawn from scenario rules (counts, kinds,
  regions, colors per diagnosis), 50 train + 10 test per class by default.

Every image gets its own random stream derived from the master seed and the
label ``"{family}/{class}/{split}/{index}"``, so builds are reproducible
byte-for-byte and independent of build order or worker count. The manifest
embeds the effective config (digested) and the full generated geometry, so
a dataset can be re-verified without any image analysis.

Layout on disk: ``<root>/<split>/<class>/<index>.png`` + ``manifest.json``.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .bodymap import (
    BodyMask,
    RegionPartition,
    SampleDomain,
    build_partition,
    contains,
    default_mask,
    load_mask,
    load_region_map,
)
from .errors import ConfigurationError, GenerationError
from .geometry import FLATTEN_TOLERANCE, BezierCurve, Point, derive_stream, flatten
from .primitives import (
    ClusterParams,
    DashPattern,
    LineParams,
    Primitive,
    PrimitiveKind,
    gen_cluster,
    gen_dashed_line,
    gen_line,
)
from .raster import RGBA, Canvas, StrokeStyle, composite_template, encode_png, render
from . import png

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"
INCOMPLETE_MARKER = "_INCOMPLETE"

FAMILY_BASIC3 = "basic3"
FAMILY_REGIONS36 = "regions36"
FAMILY_DIAGNOSES = "diagnoses"
FAMILIES = (FAMILY_BASIC3, FAMILY_REGIONS36, FAMILY_DIAGNOSES)

BASIC_CLASSES = tuple(k.value for k in PrimitiveKind)

DIAGNOSIS_CLASSES = (
    "pelvic_contusion",
    "atrophy_hypertrophy_forelimb",
    "atrophy_hypertrophy_hindlimb",
    "low_blood_pressure",
    "high_blood_pressure",
)

# (train, test) images per class when the config leaves counts unset.
_FAMILY_DEFAULT_COUNTS = {
    FAMILY_BASIC3: (1000, 100),
    FAMILY_REGIONS36: (1000, 100),
    FAMILY_DIAGNOSES: (50, 10),
}


# ---------------------------------------------------------------------- #
# configuration
# ---------------------------------------------------------------------- #


@dataclass(frozen=True)
class DatasetConfig:
    family: str
    master_seed: int = 0
    images_per_class_train: int | None = None
    images_per_class_test: int | None = None
    width: int = 1000
    height: int = 800
    margin: int = 40
    mask_file: str | None = None
    region_map_file: str | None = None
    partition_rows: int = 3
    partition_cols: int = 4
    line: LineParams = LineParams()
    cluster: ClusterParams = ClusterParams()
    dash: DashPattern = DashPattern()
    stroke_width: float = 3.0
    stroke_color: RGBA = (0, 0, 0, 255)
    point_radius: float = 3.0
    template_file: str | None = None
    scenario_file: str | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        for count in (self.images_per_class_train, self.images_per_class_test):
            if count is not None and count < 0:
                raise ConfigurationError("per-class counts must be non-negative")

    @property
    def train_count(self) -> int:
        if self.images_per_class_train is not None:
            return self.images_per_class_train
        return _FAMILY_DEFAULT_COUNTS[self.family][0]

    @property
    def test_count(self) -> int:
        if self.images_per_class_test is not None:
            return self.images_per_class_test
        return _FAMILY_DEFAULT_COUNTS[self.family][1]


@dataclass(frozen=True)
class ScenarioRule:
    """One drawing rule: N primitives of one kind/color in one region."""

    kind: PrimitiveKind
    region: int | None
    color: RGBA
    count_min: int
    count_max: int
    line: LineParams | None = None
    cluster: ClusterParams | None = None
    dash: DashPattern | None = None
    stroke_width: float | None = None
    point_radius: float | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    rules: dict[str, tuple[ScenarioRule, ...]]
    notes: str = ""


_RULE_KEYS = {
    "kind",
    "region",
    "color",
    "count",
    "line",
    "cluster",
    "dash",
    "stroke_width",
    "point_radius",
    "notes",
}


def _parse_color(value, where: str) -> RGBA:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 4
        or not all(isinstance(c, int) and 0 <= c <= 255 for c in value)
    ):
        raise ConfigurationError(f"{where}: color must be 4 ints in 0..255")
    return tuple(value)


def _parse_rule(diagnosis: str, idx: int, raw: dict) -> ScenarioRule:
    where = f"scenario rule {diagnosis}[{idx}]"
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{where}: rule must be an object")
    unknown = set(raw) - _RULE_KEYS
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        kind = PrimitiveKind(raw["kind"])
    except (KeyError, ValueError):
        raise ConfigurationError(f"{where}: bad or missing primitive kind") from None
    region = raw.get("region", "any")
    if region == "any":
        region = None
    elif not (isinstance(region, int) and 0 <= region < 12):
        raise ConfigurationError(f"{where}: region must be 0..11 or 'any'")
    color = _parse_color(raw.get("color", [0, 0, 0, 255]), where)
    count = raw.get("count", [1, 1])
    if (
        not isinstance(count, (list, tuple))
        or len(count) != 2
        or not all(isinstance(c, int) and c >= 0 for c in count)
        or count[0] > count[1]
    ):
        raise ConfigurationError(f"{where}: count must be [min, max] with 0 <= min <= max")
    try:
        line = LineParams(**raw["line"]) if "line" in raw else None
        cluster = ClusterParams(**raw["cluster"]) if "cluster" in raw else None
        dash = DashPattern(**raw["dash"]) if "dash" in raw else None
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{where}: {e}") from None
    return ScenarioRule(
        kind=kind,
        region=region,
        color=color,
        count_min=count[0],
        count_max=count[1],
        line=line,
        cluster=cluster,
        dash=dash,
        stroke_width=raw.get("stroke_width"),
        point_radius=raw.get("point_radius"),
    )


def parse_scenario(data: dict) -> ScenarioSpec:
    if not isinstance(data, dict) or "diagnoses" not in data:
        raise ConfigurationError("scenario must be an object with a 'diagnoses' key")
    rules: dict[str, tuple[ScenarioRule, ...]] = {}
    for diagnosis in DIAGNOSIS_CLASSES:
        raw_rules = data["diagnoses"].get(diagnosis)
        if not raw_rules:
            raise ConfigurationError(f"scenario has no rules for {diagnosis!r}")
        rules[diagnosis] = tuple(
            _parse_rule(diagnosis, i, r) for i, r in enumerate(raw_rules)
        )
    extra = set(data["diagnoses"]) - set(DIAGNOSIS_CLASSES)
    if extra:
        raise ConfigurationError(f"scenario names unknown diagnoses {sorted(extra)}")
    return ScenarioSpec(rules=rules, notes=str(data.get("notes", "")))


def load_scenario(path: str | Path) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"scenario file {path} is not valid JSON: {e}") from e
    return parse_scenario(data)


def default_scenario() -> ScenarioSpec:
    raw = resources.files("bodymark").joinpath("data/default_scenario.json")
    return parse_scenario(json.loads(raw.read_text(encoding="utf-8")))


# ---------------------------------------------------------------------- #
# labels
# ---------------------------------------------------------------------- #


def class_labels(family: str, partition_regions: int = 12) -> tuple[str, ...]:
    if family == FAMILY_BASIC3:
        return BASIC_CLASSES
    if family == FAMILY_REGIONS36:
        return tuple(
            f"{kind}_r{region:02d}"
            for kind in BASIC_CLASSES
            for region in range(partition_regions)
        )
    return DIAGNOSIS_CLASSES


def split_region_label(label: str) -> tuple[str, int]:
    """``"line_r07"`` -> (``"line"``, 7)."""
    kind, _, region = label.rpartition("_r")
    if kind not in BASIC_CLASSES or not region.isdigit():
        raise ConfigurationError(f"not a regions36 label: {label!r}")
    return kind, int(region)


# ---------------------------------------------------------------------- #
# manifest
# ---------------------------------------------------------------------- #


@dataclass
class ManifestEntry:
    path: str
    label: str
    split: str
    index: int
    geometry: list[dict]

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "label": self.label,
            "split": self.split,
            "index": self.index,
            "geometry": self.geometry,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestEntry":
        return cls(
            path=d["path"],
            label=d["label"],
            split=d["split"],
            index=d["index"],
            geometry=d["geometry"],
        )


@dataclass
class DatasetManifest:
    version: int
    family: str
    master_seed: int
    config: dict
    config_digest: str
    entries: list[ManifestEntry]

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "family": self.family,
            "master_seed": self.master_seed,
            "config": self.config,
            "config_digest": self.config_digest,
            "entries": [e.to_dict() for e in self.entries],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def save(self, directory: str | Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, directory: str | Path) -> "DatasetManifest":
        path = Path(directory) / MANIFEST_NAME
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise OSError(f"corrupt manifest {path}: {e}") from e
        try:
            return cls(
                version=doc["version"],
                family=doc["family"],
                master_seed=doc["master_seed"],
                config=doc["config"],
                config_digest=doc["config_digest"],
                entries=[ManifestEntry.from_dict(e) for e in doc["entries"]],
            )
        except (KeyError, TypeError) as e:
            raise OSError(f"corrupt manifest {path}: missing field {e}") from e


def config_digest(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _scenario_to_dict(scenario: ScenarioSpec) -> dict:
    return {
        "notes": scenario.notes,
        "diagnoses": {
            diagnosis: [
                {
                    "kind": rule.kind.value,
                    "region": rule.region,
                    "color": list(rule.color),
                    "count": [rule.count_min, rule.count_max],
                    "line": None
                    if rule.line is None
                    else {
                        "endpoint_radius": rule.line.endpoint_radius,
                        "control_deviation": rule.line.control_deviation,
                    },
                    "cluster": None
                    if rule.cluster is None
                    else {
                        "n_min": rule.cluster.n_min,
                        "n_max": rule.cluster.n_max,
                        "step_radius": rule.cluster.step_radius,
                    },
                    "dash": None
                    if rule.dash is None
                    else {
                        "on_length": rule.dash.on_length,
                        "off_length": rule.dash.off_length,
                    },
                    "stroke_width": rule.stroke_width,
                    "point_radius": rule.point_radius,
                }
                for rule in rules
            ]
            for diagnosis, rules in scenario.rules.items()
        },
    }


def config_to_dict(config: DatasetConfig, scenario: ScenarioSpec | None) -> dict:
    """Canonical config mapping: what the digest is computed over."""
    return {
        "family": config.family,
        "master_seed": config.master_seed,
        "images_per_class_train": config.train_count,
        "images_per_class_test": config.test_count,
        "width": config.width,
        "height": config.height,
        "margin": config.margin,
        "mask_file": config.mask_file,
        "region_map_file": config.region_map_file,
        "partition": {"rows": config.partition_rows, "cols": config.partition_cols},
        "line": {
            "endpoint_radius": config.line.endpoint_radius,
            "control_deviation": config.line.control_deviation,
        },
        "cluster": {
            "n_min": config.cluster.n_min,
            "n_max": config.cluster.n_max,
            "step_radius": config.cluster.step_radius,
        },
        "dash": {
            "on_length": config.dash.on_length,
            "off_length": config.dash.off_length,
        },
        "style": {
            "stroke_width": config.stroke_width,
            "color": list(config.stroke_color),
            "point_radius": config.point_radius,
        },
        "template_file": config.template_file,
        "scenario": None if scenario is None else _scenario_to_dict(scenario),
    }


# ---------------------------------------------------------------------- #
# build context
# ---------------------------------------------------------------------- #


class BuildContext:
    """Mask, partition, template, and scenario resolved once per process."""

    def __init__(self, config: DatasetConfig, scenario: ScenarioSpec | None = None):
        self.config = config
        if config.mask_file:
            self.mask = load_mask(config.mask_file)
            if (self.mask.width, self.mask.height) != (config.width, config.height):
                raise ConfigurationError(
                    f"mask {config.mask_file} is {self.mask.width}x{self.mask.height},"
                    f" config says {config.width}x{config.height}"
                )
        else:
            self.mask = default_mask(config.width, config.height, config.margin)
        if config.family == FAMILY_BASIC3:
            self.partition = None  # basic3 never samples per region
        elif config.region_map_file:
            self.partition = load_region_map(config.region_map_file, self.mask)
        else:
            self.partition = build_partition(
                self.mask, config.partition_rows, config.partition_cols
            )
        self.template = None
        if config.template_file:
            from .raster import decode_png

            self.template = decode_png(Path(config.template_file).read_bytes())
        if config.family == FAMILY_DIAGNOSES:
            if scenario is None:
                scenario = (
                    load_scenario(config.scenario_file)
                    if config.scenario_file
                    else default_scenario()
                )
        else:
            scenario = None
        self.scenario = scenario
        self.config_dict = config_to_dict(config, scenario)
        self.digest = config_digest(self.config_dict)
        self._domains: dict[int | None, SampleDomain] = {}

    def domain(self, region: int | None) -> SampleDomain:
        if region not in self._domains:
            self._domains[region] = SampleDomain(
                self.mask, self.partition if region is not None else None, region
            )
        return self._domains[region]


def _primitive_geometry(
    prim: Primitive, region: int | None, color: RGBA, stroke_width: float, rule: int | None
) -> dict:
    geo: dict = {
        "kind": prim.kind.value,
        "region": region,
        "color": list(color),
    }
    if rule is not None:
        geo["rule"] = rule
    if prim.kind is PrimitiveKind.POINT_CLUSTER:
        geo["points"] = [[p.x, p.y] for p in prim.points]
        geo["point_radius"] = prim.point_radius
    else:
        geo["control_points"] = [[p.x, p.y] for p in prim.curve.control_points]
        geo["stroke_width"] = stroke_width
        if prim.kind is PrimitiveKind.DASHED_LINE:
            geo["dash"] = [prim.dash.on_length, prim.dash.off_length]
    return geo


def _generate_for_label(ctx: BuildContext, label: str, stream) -> list[tuple[Primitive, StrokeStyle, dict]]:
    """Generate all primitives for one image: (primitive, style, geometry)."""
    cfg = ctx.config
    out: list[tuple[Primitive, StrokeStyle, dict]] = []
    if cfg.family == FAMILY_BASIC3 or cfg.family == FAMILY_REGIONS36:
        if cfg.family == FAMILY_BASIC3:
            kind, region = label, None
        else:
            kind, region = split_region_label(label)
        domain = ctx.domain(region)
        style = StrokeStyle(
            width=cfg.stroke_width, color=cfg.stroke_color, point_radius=cfg.point_radius
        )
        if kind == PrimitiveKind.LINE.value:
            prim = gen_line(domain, stream, cfg.line)
        elif kind == PrimitiveKind.DASHED_LINE.value:
            prim = gen_dashed_line(domain, stream, cfg.line, cfg.dash)
        else:
            prim = gen_cluster(domain, stream, cfg.cluster, point_radius=cfg.point_radius)
        out.append(
            (prim, style, _primitive_geometry(prim, region, cfg.stroke_color, cfg.stroke_width, None))
        )
        return out
    # diagnoses: every rule in order, count drawn per image
    for rule_idx, rule in enumerate(ctx.scenario.rules[label]):
        count = stream.randint(rule.count_min, rule.count_max)
        domain = ctx.domain(rule.region)
        line_params = rule.line or cfg.line
        cluster_params = rule.cluster or cfg.cluster
        dash = rule.dash or cfg.dash
        stroke_width = rule.stroke_width or cfg.stroke_width
        point_radius = rule.point_radius or cfg.point_radius
        style = StrokeStyle(width=stroke_width, color=rule.color, point_radius=point_radius)
        for _ in range(count):
            if rule.kind is PrimitiveKind.LINE:
                prim = gen_line(domain, stream, line_params)
            elif rule.kind is PrimitiveKind.DASHED_LINE:
                prim = gen_dashed_line(domain, stream, line_params, dash)
            else:
                prim = gen_cluster(
                    domain, stream, cluster_params, point_radius=point_radius
                )
            out.append(
                (
                    prim,
                    style,
                    _primitive_geometry(prim, rule.region, rule.color, stroke_width, rule_idx),
                )
            )
    return out


def entry_relpath(split: str, label: str, index: int) -> str:
    return f"{split}/{label}/{index:06d}.png"


def _build_one(ctx: BuildContext, label: str, split: str, index: int) -> tuple[str, bytes, ManifestEntry]:
    cfg = ctx.config
    stream = derive_stream(cfg.master_seed, f"{cfg.family}/{label}/{split}/{index}")
    try:
        generated = _generate_for_label(ctx, label, stream)
    except GenerationError as e:
        raise GenerationError(f"{cfg.family}/{label}/{split}/{index}: {e}") from e
    canvas = Canvas.transparent(cfg.width, cfg.height)
    for prim, style, _ in generated:
        render(canvas, prim, style)
    background = ctx.template if ctx.template is not None else Canvas.solid(cfg.width, cfg.height)
    final = composite_template(canvas, background)
    relpath = entry_relpath(split, label, index)
    entry = ManifestEntry(
        path=relpath,
        label=label,
        split=split,
        index=index,
        geometry=[geo for _, _, geo in generated],
    )
    return relpath, encode_png(final), entry


# module-level worker state for process pools
_WORKER_CTX: BuildContext | None = None
_WORKER_OUT: Path | None = None


def _init_worker(config: DatasetConfig, scenario: ScenarioSpec | None, out_dir: str) -> None:
    global _WORKER_CTX, _WORKER_OUT
    _WORKER_CTX = BuildContext(config, scenario)
    _WORKER_OUT = Path(out_dir)


def _worker_build(item: tuple[str, str, int]) -> ManifestEntry:
    label, split, index = item
    relpath, data, entry = _build_one(_WORKER_CTX, label, split, index)
    (_WORKER_OUT / relpath).write_bytes(data)
    return entry


def _work_items(config: DatasetConfig) -> list[tuple[str, str, int]]:
    items = []
    for label in class_labels(config.family):
        for split, count in (("train", config.train_count), ("test", config.test_count)):
            for index in range(count):
                items.append((label, split, index))
    return items


def build_dataset(
    config: DatasetConfig,
    out_dir: str | Path,
    jobs: int = 1,
    scenario: ScenarioSpec | None = None,
) -> DatasetManifest:
    """Build one dataset family to ``out_dir`` and return its manifest.

    Identical (config, scenario) inputs produce identical manifests and
    pixel-identical images for any ``jobs`` value. On failure, written
    images are removed again and an ``_INCOMPLETE`` marker is left behind.
    """
    ctx = BuildContext(config, scenario)  # fail fast on bad config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / INCOMPLETE_MARKER
    marker.write_text("build in progress or aborted; do not use\n", encoding="utf-8")
    items = _work_items(config)
    for label in class_labels(config.family):
        for split in ("train", "test"):
            (out / split / label).mkdir(parents=True, exist_ok=True)
    try:
        if jobs <= 1:
            entries = []
            for item in items:
                relpath, data, entry = _build_one(ctx, *item)
                (out / relpath).write_bytes(data)
                entries.append(entry)
        else:
            with ProcessPoolExecutor(
                max_workers=jobs,
                initializer=_init_worker,
                initargs=(config, scenario, str(out)),
            ) as pool:
                entries = list(pool.map(_worker_build, items, chunksize=8))
    except BaseException:
        for label, split, index in items:
            p = out / entry_relpath(split, label, index)
            if p.exists():
                p.unlink()
        raise
    entries.sort(key=lambda e: (e.split != "train", e.label, e.index))
    manifest = DatasetManifest(
        version=MANIFEST_VERSION,
        family=config.family,
        master_seed=config.master_seed,
        config=ctx.config_dict,
        config_digest=ctx.digest,
        entries=entries,
    )
    manifest.save(out)
    marker.unlink()
    return manifest


def build_basic3(config: DatasetConfig, out_dir: str | Path, jobs: int = 1) -> DatasetManifest:
    if config.family != FAMILY_BASIC3:
        raise ConfigurationError(f"expected family basic3, got {config.family}")
    return build_dataset(config, out_dir, jobs)


def build_regions36(config: DatasetConfig, out_dir: str | Path, jobs: int = 1) -> DatasetManifest:
    if config.family != FAMILY_REGIONS36:
        raise ConfigurationError(f"expected family regions36, got {config.family}")
    return build_dataset(config, out_dir, jobs)


def build_diagnoses(
    config: DatasetConfig,
    out_dir: str | Path,
    scenario: ScenarioSpec | None = None,
    jobs: int = 1,
) -> DatasetManifest:
    if config.family != FAMILY_DIAGNOSES:
        raise ConfigurationError(f"expected family diagnoses, got {config.family}")
    return build_dataset(config, out_dir, jobs, scenario)


# ---------------------------------------------------------------------- #
# subsets
# ---------------------------------------------------------------------- #


def extract_subset(
    manifest: DatasetManifest, per_class_train: int, per_class_test: int
) -> DatasetManifest:
    """First-k-by-image-index selection per class and split."""
    wanted = {"train": per_class_train, "test": per_class_test}
    kept: list[ManifestEntry] = []
    for label in class_labels(manifest.family):
        for split, k in wanted.items():
            pool = sorted(
                (e for e in manifest.entries if e.label == label and e.split == split),
                key=lambda e: e.index,
            )
            if len(pool) < k:
                raise ConfigurationError(
                    f"subset wants {k} {split} images for {label}, only {len(pool)} available"
                )
            kept.extend(pool[:k])
    kept.sort(key=lambda e: (e.split != "train", e.label, e.index))
    return DatasetManifest(
        version=manifest.version,
        family=manifest.family,
        master_seed=manifest.master_seed,
        config=manifest.config,
        config_digest=manifest.config_digest,
        entries=kept,
    )


# ---------------------------------------------------------------------- #
# validation
# ---------------------------------------------------------------------- #


@dataclass
class Violation:
    path: str
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.path}: {self.message}"


@dataclass
class ValidationReport:
    directory: str
    entries_checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _mask_from_config(cfg: dict) -> BodyMask:
    if cfg.get("mask_file"):
        return load_mask(cfg["mask_file"])
    return default_mask(cfg["width"], cfg["height"], cfg["margin"])


def _partition_from_config(cfg: dict, mask: BodyMask) -> RegionPartition:
    if cfg.get("region_map_file"):
        return load_region_map(cfg["region_map_file"], mask)
    return build_partition(mask, cfg["partition"]["rows"], cfg["partition"]["cols"])


def _geometry_points(geo: dict) -> list[Point]:
    """All geometry sample points: flattened curve vertices or cluster points."""
    if geo["kind"] == PrimitiveKind.POINT_CLUSTER.value:
        return [Point(x, y) for x, y in geo["points"]]
    curve = BezierCurve(tuple(Point(x, y) for x, y in geo["control_points"]))
    return list(flatten(curve, FLATTEN_TOLERANCE).vertices)


def _check_geometry(
    family: str,
    entry: ManifestEntry,
    geo: dict,
    cfg: dict,
    mask: BodyMask,
    partition: RegionPartition | None,
    report: ValidationReport,
) -> None:
    def bad(kind: str, message: str) -> None:
        report.violations.append(Violation(entry.path, kind, message))

    line_params = LineParams(**cfg["line"])
    cluster_params = ClusterParams(**cfg["cluster"])
    expected_region: int | None = None
    if family == FAMILY_BASIC3:
        if geo["kind"] != entry.label:
            bad("label", f"label {entry.label!r} but geometry kind {geo['kind']!r}")
            return
    elif family == FAMILY_REGIONS36:
        kind, expected_region = split_region_label(entry.label)
        if geo["kind"] != kind:
            bad("label", f"label {entry.label!r} but geometry kind {geo['kind']!r}")
            return
    else:
        rule_idx = geo.get("rule")
        rules = (cfg.get("scenario") or {}).get("diagnoses", {}).get(entry.label, [])
        if rule_idx is None or not 0 <= rule_idx < len(rules):
            bad("label", f"geometry references unknown rule {rule_idx!r}")
            return
        rule = rules[rule_idx]
        if geo["kind"] != rule["kind"] or geo.get("region") != rule["region"]:
            bad(
                "label",
                f"geometry ({geo['kind']}, region {geo.get('region')}) does not match "
                f"rule {rule_idx} of {entry.label!r} ({rule['kind']}, region {rule['region']})",
            )
            return
        if rule.get("line"):
            line_params = LineParams(**rule["line"])
        if rule.get("cluster"):
            cluster_params = ClusterParams(**rule["cluster"])
        expected_region = rule["region"]

    if geo["kind"] == PrimitiveKind.POINT_CLUSTER.value:
        pts = [Point(x, y) for x, y in geo["points"]]
        n = len(pts)
        if not cluster_params.n_min <= n <= cluster_params.n_max:
            bad("bound", f"cluster size {n} outside [{cluster_params.n_min}, {cluster_params.n_max}]")
        tol = 1e-9
        for a, b in zip(pts, pts[1:]):
            step = ((a.x - b.x) ** 2 + (a.y - b.y) ** 2) ** 0.5
            if step > cluster_params.step_radius + tol:
                bad("bound", f"cluster step {step:.3f} exceeds {cluster_params.step_radius}")
                break
    else:
        cps = geo["control_points"]
        if len(cps) not in (3, 4):
            bad("bound", f"{len(cps)} control points")
            return
        start, end = Point(*cps[0]), Point(*cps[-1])
        span = ((start.x - end.x) ** 2 + (start.y - end.y) ** 2) ** 0.5
        tol = 1e-9
        if span > line_params.endpoint_radius + tol:
            bad("bound", f"endpoint span {span:.3f} exceeds {line_params.endpoint_radius}")
        degree = len(cps) - 1
        for k in range(1, degree):
            chord = Point(
                start.x + (end.x - start.x) * k / degree,
                start.y + (end.y - start.y) * k / degree,
            )
            ctrl = Point(*cps[k])
            dev = ((ctrl.x - chord.x) ** 2 + (ctrl.y - chord.y) ** 2) ** 0.5
            if dev > line_params.control_deviation + tol:
                bad("bound", f"control deviation {dev:.3f} exceeds {line_params.control_deviation}")

    try:
        points = _geometry_points(geo)
    except (ValueError, KeyError) as e:
        bad("bound", f"unusable geometry: {e}")
        return
    mask_domain = SampleDomain(mask)
    outside = [p for p in points if not contains(mask_domain, p)]
    if outside:
        bad("containment", f"{len(outside)} geometry points outside the mask")
        return

    if expected_region is not None:
        regions = {
            int(partition.region_id[math.floor(p.y), math.floor(p.x)]) for p in points
        }
        if regions != {expected_region}:
            bad(
                "region-mismatch",
                f"geometry occupies regions {sorted(regions)}, label/rule says {expected_region}",
            )


def validate_dataset(directory: str | Path) -> ValidationReport:
    """Re-check a built dataset against its manifest; I/O errors raise."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"dataset directory {directory} does not exist")
    manifest = DatasetManifest.load(directory)
    report = ValidationReport(directory=str(directory))
    if (directory / INCOMPLETE_MARKER).exists():
        report.violations.append(
            Violation(INCOMPLETE_MARKER, "incomplete-build", "partial-output marker present")
        )
    cfg = manifest.config
    if config_digest(cfg) != manifest.config_digest:
        report.violations.append(
            Violation(MANIFEST_NAME, "digest", "config digest does not match embedded config")
        )
    mask = _mask_from_config(cfg)
    partition = None
    if manifest.family != FAMILY_BASIC3:
        partition = _partition_from_config(cfg, mask)
    labels = set(class_labels(manifest.family))
    seen_paths: set[str] = set()
    for entry in manifest.entries:
        report.entries_checked += 1
        if entry.path in seen_paths:
            report.violations.append(
                Violation(entry.path, "duplicate-path", "file path repeated in manifest")
            )
        seen_paths.add(entry.path)
        if entry.label not in labels:
            report.violations.append(
                Violation(entry.path, "label", f"unknown label {entry.label!r}")
            )
            continue
        img_path = directory / entry.path
        if not img_path.is_file():
            report.violations.append(
                Violation(entry.path, "missing-file", "image file not found")
            )
            continue
        try:
            pixels = png.decode(img_path.read_bytes())
        except Exception as e:
            report.violations.append(Violation(entry.path, "undecodable", str(e)))
            continue
        h, w = pixels.shape[:2]
        if (w, h) != (cfg["width"], cfg["height"]):
            report.violations.append(
                Violation(
                    entry.path,
                    "dimension-mismatch",
                    f"image is {w}x{h}, config says {cfg['width']}x{cfg['height']}",
                )
            )
        for geo in entry.geometry:
            _check_geometry(manifest.family, entry, geo, cfg, mask, partition, report)
    return report
