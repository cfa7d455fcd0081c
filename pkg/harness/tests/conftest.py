"""Shared fixtures: tiny datasets built through the generator CLI."""

import subprocess
import sys

import pytest

GEN = [sys.executable, "-m", "bodymark.cli"]


def bodymark(*args):
    proc = subprocess.run([*GEN, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="session")
def tiny_basic3(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "basic3"
    bodymark(
        "generate", "basic3",
        "--out", str(out),
        "--seed", "5",
        "--per-class-train", "4",
        "--per-class-test", "2",
        "--size", "250x200",
    )
    return out


@pytest.fixture(scope="session")
def tiny_diagnoses(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "diagnoses"
    bodymark(
        "generate", "diagnoses",
        "--out", str(out),
        "--seed", "6",
        "--per-class-train", "3",
        "--per-class-test", "1",
        "--size", "250x200",
    )
    return out
