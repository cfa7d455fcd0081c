"""Dataset build, manifest, subset, and validation tests (small configs)."""

import json
import math

import numpy as np
import pytest

from bodymark import png
from bodymark.dataset import (
    BASIC_CLASSES,
    DIAGNOSIS_CLASSES,
    DatasetConfig,
    DatasetManifest,
    ManifestEntry,
    build_basic3,
    build_diagnoses,
    build_regions36,
    class_labels,
    config_digest,
    default_scenario,
    extract_subset,
    load_scenario,
    parse_scenario,
    split_region_label,
    validate_dataset,
)
from bodymark.errors import ConfigurationError
from bodymark.primitives import ClusterParams, LineParams

SMALL = dict(
    width=400,
    height=320,
    margin=16,
    line=LineParams(endpoint_radius=60.0, control_deviation=10.0),
    cluster=ClusterParams(n_min=3, n_max=8, step_radius=10.0),
)


def small_config(family, train=2, test=1, seed=7, **kw):
    merged = {**SMALL, **kw}
    return DatasetConfig(
        family=family,
        master_seed=seed,
        images_per_class_train=train,
        images_per_class_test=test,
        **merged,
    )


def small_scenario():
    return parse_scenario(
        {
            "diagnoses": {
                "pelvic_contusion": [
                    {
                        "kind": "point_cluster",
                        "region": 7,
                        "color": [255, 0, 0, 255],
                        "count": [1, 3],
                        "cluster": {"n_min": 3, "n_max": 6, "step_radius": 8.0},
                    }
                ],
                "atrophy_hypertrophy_forelimb": [
                    {
                        "kind": "line",
                        "region": 9,
                        "color": [0, 128, 0, 255],
                        "count": [1, 2],
                        "line": {"endpoint_radius": 50.0, "control_deviation": 8.0},
                    }
                ],
                "atrophy_hypertrophy_hindlimb": [
                    {
                        "kind": "line",
                        "region": 10,
                        "color": [128, 0, 128, 255],
                        "count": [1, 2],
                        "line": {"endpoint_radius": 50.0, "control_deviation": 8.0},
                    }
                ],
                "low_blood_pressure": [
                    {
                        "kind": "dashed_line",
                        "region": 5,
                        "color": [0, 0, 255, 255],
                        "count": [1, 2],
                        "line": {"endpoint_radius": 50.0, "control_deviation": 8.0},
                    }
                ],
                "high_blood_pressure": [
                    {
                        "kind": "dashed_line",
                        "region": 5,
                        "color": [255, 140, 0, 255],
                        "count": [1, 2],
                        "line": {"endpoint_radius": 50.0, "control_deviation": 8.0},
                    }
                ],
            }
        }
    )


# ---------------------------------------------------------------------- #
# labels
# ---------------------------------------------------------------------- #


def test_label_enumeration():
    assert class_labels("basic3") == ("line", "dashed_line", "point_cluster")
    r36 = class_labels("regions36")
    assert len(r36) == 36
    assert len(set(r36)) == 36
    assert class_labels("diagnoses") == DIAGNOSIS_CLASSES
    assert split_region_label("dashed_line_r07") == ("dashed_line", 7)
    with pytest.raises(ConfigurationError):
        split_region_label("nonsense")


# ---------------------------------------------------------------------- #
# basic3
# ---------------------------------------------------------------------- #


def test_basic3_balance_and_layout(tmp_path):
    cfg = small_config("basic3", train=4, test=2)
    manifest = build_basic3(cfg, tmp_path)
    train = [e for e in manifest.entries if e.split == "train"]
    test = [e for e in manifest.entries if e.split == "test"]
    assert len(train) == 12 and len(test) == 6
    for label in BASIC_CLASSES:
        assert sum(1 for e in train if e.label == label) == 4
        assert sum(1 for e in test if e.label == label) == 2
    for e in manifest.entries:
        assert (tmp_path / e.path).is_file()
    assert (tmp_path / "manifest.json").is_file()
    assert not (tmp_path / "_INCOMPLETE").exists()


def test_basic3_line_bounds_from_manifest(tmp_path):
    cfg = small_config("basic3", train=6, test=0)
    manifest = build_basic3(cfg, tmp_path)
    for e in manifest.entries:
        if e.label != "line":
            continue
        cps = e.geometry[0]["control_points"]
        span = math.dist(cps[0], cps[-1])
        assert span <= cfg.line.endpoint_radius


def test_basic3_rebuild_identical(tmp_path):
    cfg = small_config("basic3", train=3, test=1)
    m1 = build_basic3(cfg, tmp_path / "a")
    m2 = build_basic3(cfg, tmp_path / "b")
    assert m1.to_json() == m2.to_json()
    for e in m1.entries:
        assert (tmp_path / "a" / e.path).read_bytes() == (
            tmp_path / "b" / e.path
        ).read_bytes()


def test_basic3_parallel_identical(tmp_path):
    cfg = small_config("basic3", train=3, test=1)
    m1 = build_basic3(cfg, tmp_path / "serial", jobs=1)
    m2 = build_basic3(cfg, tmp_path / "par", jobs=2)
    assert m1.to_json() == m2.to_json()
    for e in m1.entries:
        assert (tmp_path / "serial" / e.path).read_bytes() == (
            tmp_path / "par" / e.path
        ).read_bytes()


def test_family_mismatch_rejected(tmp_path):
    cfg = small_config("basic3")
    with pytest.raises(ConfigurationError):
        build_regions36(cfg, tmp_path)
    with pytest.raises(ConfigurationError):
        build_diagnoses(cfg, tmp_path)


# ---------------------------------------------------------------------- #
# regions36
# ---------------------------------------------------------------------- #


def test_regions36_covers_all_labels(tmp_path):
    cfg = small_config("regions36", train=1, test=0)
    manifest = build_regions36(cfg, tmp_path)
    labels = {e.label for e in manifest.entries}
    assert labels == set(class_labels("regions36"))
    assert len(manifest.entries) == 36


def test_regions36_geometry_in_labeled_region(tmp_path):
    from bodymark.bodymap import build_partition, default_mask
    from bodymark.dataset import _geometry_points

    cfg = small_config("regions36", train=1, test=0)
    manifest = build_regions36(cfg, tmp_path)
    mask = default_mask(cfg.width, cfg.height, cfg.margin)
    part = build_partition(mask, 3, 4)
    for e in manifest.entries:
        _, region = split_region_label(e.label)
        for geo in e.geometry:
            for p in _geometry_points(geo):
                assert int(part.region_id[math.floor(p.y), math.floor(p.x)]) == region


# ---------------------------------------------------------------------- #
# diagnoses
# ---------------------------------------------------------------------- #


def test_diagnoses_counts_and_pelvic_rule(tmp_path):
    cfg = small_config("diagnoses", train=3, test=1)
    manifest = build_diagnoses(cfg, tmp_path, scenario=small_scenario())
    assert len(manifest.entries) == 5 * 4
    pelvic = [e for e in manifest.entries if e.label == "pelvic_contusion"]
    assert len(pelvic) == 4
    for e in pelvic:
        reds = [
            g
            for g in e.geometry
            if g["color"] == [255, 0, 0, 255] and g["region"] == 7
        ]
        assert len(reds) >= 1


def test_diagnoses_empty_counts_blank_images(tmp_path):
    scenario = small_scenario()
    zeroed = {
        "diagnoses": {
            d: [
                {
                    "kind": "line",
                    "region": "any",
                    "color": [0, 0, 0, 255],
                    "count": [0, 0],
                }
            ]
            for d in DIAGNOSIS_CLASSES
        }
    }
    cfg = small_config("diagnoses", train=1, test=0)
    manifest = build_diagnoses(cfg, tmp_path, scenario=parse_scenario(zeroed))
    for e in manifest.entries:
        assert e.geometry == []
        pixels = png.decode((tmp_path / e.path).read_bytes())
        assert (pixels == 255).all()


def test_default_scenario_resolves():
    scenario = default_scenario()
    assert set(scenario.rules) == set(DIAGNOSIS_CLASSES)
    assert all(len(r) >= 1 for r in scenario.rules.values())


def test_scenario_file_round_trip(tmp_path):
    f = tmp_path / "scenario.json"
    zeroed = {
        "diagnoses": {
            d: [{"kind": "line", "color": [1, 2, 3, 255], "count": [1, 1]}]
            for d in DIAGNOSIS_CLASSES
        }
    }
    f.write_text(json.dumps(zeroed), encoding="utf-8")
    spec = load_scenario(f)
    assert spec.rules["pelvic_contusion"][0].color == (1, 2, 3, 255)


def test_scenario_validation_errors():
    with pytest.raises(ConfigurationError, match="pelvic_contusion"):
        parse_scenario({"diagnoses": {}})
    bad_rule = {
        "diagnoses": {
            **{d: [{"kind": "line", "count": [1, 1]}] for d in DIAGNOSIS_CLASSES},
            "pelvic_contusion": [{"kind": "squiggle", "count": [1, 1]}],
        }
    }
    with pytest.raises(ConfigurationError, match=r"pelvic_contusion\[0\]"):
        parse_scenario(bad_rule)
    unknown_key = {
        "diagnoses": {
            **{d: [{"kind": "line", "count": [1, 1]}] for d in DIAGNOSIS_CLASSES},
            "pelvic_contusion": [{"kind": "line", "count": [1, 1], "wat": 1}],
        }
    }
    with pytest.raises(ConfigurationError, match="unknown keys"):
        parse_scenario(unknown_key)


# ---------------------------------------------------------------------- #
# subsets
# ---------------------------------------------------------------------- #


def fake_diagnoses_manifest(train=50, test=10):
    entries = []
    for label in DIAGNOSIS_CLASSES:
        for split, count in (("train", train), ("test", test)):
            for i in range(count):
                entries.append(
                    ManifestEntry(
                        path=f"{split}/{label}/{i:06d}.png",
                        label=label,
                        split=split,
                        index=i,
                        geometry=[],
                    )
                )
    entries.sort(key=lambda e: (e.split != "train", e.label, e.index))
    cfg_dict = {"family": "diagnoses"}
    return DatasetManifest(
        version=1,
        family="diagnoses",
        master_seed=0,
        config=cfg_dict,
        config_digest=config_digest(cfg_dict),
        entries=entries,
    )


def test_subset_paper_counts():
    manifest = fake_diagnoses_manifest()
    sub = extract_subset(manifest, 5, 4)
    assert sum(1 for e in sub.entries if e.split == "train") == 25
    assert sum(1 for e in sub.entries if e.split == "test") == 20
    for label in DIAGNOSIS_CLASSES:
        idx = [e.index for e in sub.entries if e.label == label and e.split == "train"]
        assert idx == [0, 1, 2, 3, 4]  # first-k by image index


def test_subset_identity():
    manifest = fake_diagnoses_manifest()
    sub = extract_subset(manifest, 50, 10)
    assert sub.to_json() == manifest.to_json()


def test_subset_over_request():
    manifest = fake_diagnoses_manifest()
    with pytest.raises(ConfigurationError):
        extract_subset(manifest, 60, 10)


# ---------------------------------------------------------------------- #
# validation
# ---------------------------------------------------------------------- #


def build_small_regions36(tmp_path):
    cfg = small_config("regions36", train=1, test=0, seed=3)
    manifest = build_regions36(cfg, tmp_path)
    return cfg, manifest


def test_validate_fresh_dataset_clean(tmp_path):
    build_small_regions36(tmp_path)
    report = validate_dataset(tmp_path)
    assert report.ok
    assert report.entries_checked == 36


def test_validate_swapped_label(tmp_path):
    build_small_regions36(tmp_path)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    for e in doc["entries"]:
        if e["label"] == "line_r00":
            e["label"] = "line_r01"
            break
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    report = validate_dataset(tmp_path)
    mismatches = [v for v in report.violations if v.kind == "region-mismatch"]
    assert len(mismatches) == 1


def test_validate_deleted_file(tmp_path):
    _, manifest = build_small_regions36(tmp_path)
    victim = manifest.entries[5]
    (tmp_path / victim.path).unlink()
    report = validate_dataset(tmp_path)
    missing = [v for v in report.violations if v.kind == "missing-file"]
    assert len(missing) == 1
    assert missing[0].path == victim.path


def test_validate_edited_geometry(tmp_path):
    build_small_regions36(tmp_path)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    geo = doc["entries"][0]["geometry"][0]
    if "control_points" in geo:
        geo["control_points"][-1][0] += 500.0  # breaks the endpoint span bound
    else:
        geo["points"][-1][0] += 500.0
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    report = validate_dataset(tmp_path)
    assert not report.ok
    kinds = {v.kind for v in report.violations}
    assert kinds <= {"bound", "containment", "region-mismatch"}
    assert len(report.violations) >= 1


def test_validate_missing_manifest(tmp_path):
    (tmp_path / "train").mkdir()
    with pytest.raises(OSError):
        validate_dataset(tmp_path)


def test_validate_missing_directory(tmp_path):
    with pytest.raises(OSError):
        validate_dataset(tmp_path / "nothing_here")


def test_validate_detects_incomplete_marker(tmp_path):
    build_small_regions36(tmp_path)
    (tmp_path / "_INCOMPLETE").write_text("x")
    report = validate_dataset(tmp_path)
    assert any(v.kind == "incomplete-build" for v in report.violations)


def test_validate_corrupt_image(tmp_path):
    _, manifest = build_small_regions36(tmp_path)
    victim = manifest.entries[0]
    (tmp_path / victim.path).write_bytes(b"not a png at all")
    report = validate_dataset(tmp_path)
    assert any(v.kind == "undecodable" for v in report.violations)


# ---------------------------------------------------------------------- #
# config / digest
# ---------------------------------------------------------------------- #


def test_digest_changes_with_config(tmp_path):
    m1 = build_basic3(small_config("basic3", train=1, test=0, seed=1), tmp_path / "a")
    m2 = build_basic3(small_config("basic3", train=1, test=0, seed=2), tmp_path / "b")
    assert m1.config_digest != m2.config_digest
    assert config_digest(m1.config) == m1.config_digest


def test_config_validation():
    with pytest.raises(ConfigurationError):
        DatasetConfig(family="nope")
    with pytest.raises(ConfigurationError):
        DatasetConfig(family="basic3", images_per_class_train=-1)
    with pytest.raises(ConfigurationError):
        DatasetConfig(family="basic3", master_seed=-5)


def write_two_pixel_mask(tmp_path):
    # two isolated drawable pixels: endpoint rejection virtually never hits
    # the other island, so line generation exhausts its retries quickly
    gray = np.zeros((40, 40), dtype=np.uint8)
    gray[20, 5] = 255
    gray[20, 35] = 255
    rgba = np.empty((40, 40, 4), dtype=np.uint8)
    rgba[..., 0] = rgba[..., 1] = rgba[..., 2] = gray
    rgba[..., 3] = 255
    f = tmp_path / "sparse_mask.png"
    f.write_bytes(png.encode(rgba))
    return f


def test_generation_failure_cleans_up(tmp_path):
    cfg = DatasetConfig(
        family="basic3",
        images_per_class_train=1,
        images_per_class_test=0,
        width=40,
        height=40,
        mask_file=str(write_two_pixel_mask(tmp_path)),
        line=LineParams(endpoint_radius=500.0, control_deviation=30.0),
    )
    from bodymark.errors import GenerationError

    out = tmp_path / "broken"
    with pytest.raises(GenerationError):
        build_basic3(cfg, out)
    assert (out / "_INCOMPLETE").exists()
    assert not list(out.rglob("*.png"))
    assert not (out / "manifest.json").exists()
