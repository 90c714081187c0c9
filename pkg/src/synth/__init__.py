"""Deterministic synthetic scenes, ground truth, and noise."""

from .noise import RNG_ALGORITHM, NoiseSpec, add_gaussian_noise, add_salt_pepper
from .registry import SceneNotFoundError, get_registry, register_builtins
from .scenes import GroundTruth, SceneSpec, SceneSpecError, make_scene

__all__ = [
    "GroundTruth",
    "NoiseSpec",
    "RNG_ALGORITHM",
    "SceneNotFoundError",
    "SceneSpec",
    "SceneSpecError",
    "add_gaussian_noise",
    "add_salt_pepper",
    "get_registry",
    "make_scene",
    "register_builtins",
]
