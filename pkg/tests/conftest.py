"""Shared pytest fixtures and path setup for ems-segment tests."""

import sys
from pathlib import Path

import numpy as np

# Add src/ to sys.path so `from levelset import ...` works
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import pytest

from levelset import LevelSetField, circle_sdf
from synth import SceneSpec, make_scene


def circle_field(size=128, cx=64.0, cy=64.0, r=20.0):
    """Exact signed distance to a circle, negative inside."""
    return LevelSetField(circle_sdf(size, size, cx, cy, r))


def write_pgm(path, samples, maxval=255):
    """Write integer samples as a plain P2 graymap."""
    samples = np.asarray(samples)
    height, width = samples.shape
    lines = [f"P2\n{width} {height}\n{maxval}"]
    lines += [" ".join(str(int(value)) for value in row) for row in samples]
    Path(path).write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def bimodal_scene():
    """Default 128x128 disk scene: disk 1.0 on background 0.0."""
    return make_scene(SceneSpec(kind="bimodal_disk"))


@pytest.fixture
def triple_scene():
    return make_scene(SceneSpec(kind="triple_junction"))


@pytest.fixture
def disk_phi():
    """Signed distance of the default scene's disk (center 64,64 radius 30)."""
    return circle_field(r=30.0)
