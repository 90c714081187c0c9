"""Central scene registry.

Each scene kind registers a builder plus the metadata the CLI needs
without building anything: object names, the primary object used by
``--truth auto``, default intensities, and default geometry for a size.

    registry.register(
        "bimodal_disk",
        build_bimodal_disk,
        objects=("disk",),
        primary="disk",
        intensities=(1.0, 0.0),
        default_geometry=bimodal_defaults,
    )
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np


Geometry = dict[str, Any]
SceneBuilder = Callable[
    [int, int, Geometry, tuple[float, ...]],
    tuple[np.ndarray, dict[str, np.ndarray]],
]
GeometryDefaults = Callable[[int, int], Geometry]


class SceneNotFoundError(LookupError):
    """Raised when a scene kind is not registered."""


@dataclass(frozen=True, slots=True)
class SceneInfo:
    """Metadata exposed without building the scene."""

    name: str
    objects: tuple[str, ...]
    primary: str
    intensities: tuple[float, ...]
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class _SceneEntry:
    info: SceneInfo
    builder: SceneBuilder
    default_geometry: GeometryDefaults


class SceneRegistry:
    """Name-to-builder map with alias resolution and introspection."""

    def __init__(self) -> None:
        self._entries: dict[str, _SceneEntry] = {}
        self._aliases: dict[str, str] = {}

    def register(
        self,
        name: str,
        builder: SceneBuilder,
        *,
        objects: tuple[str, ...],
        primary: str,
        intensities: tuple[float, ...],
        default_geometry: GeometryDefaults,
        aliases: tuple[str, ...] = (),
    ) -> None:
        if name in self._entries or name in self._aliases:
            raise ValueError(f"Scene {name!r} already registered")
        if primary not in objects:
            raise ValueError(f"Primary object {primary!r} is not one of {objects}")
        for alias in aliases:
            if alias in self._entries or alias in self._aliases:
                raise ValueError(f"Scene alias {alias!r} already registered")
            self._aliases[alias] = name
        self._entries[name] = _SceneEntry(
            info=SceneInfo(
                name=name,
                objects=tuple(objects),
                primary=primary,
                intensities=tuple(intensities),
                aliases=tuple(aliases),
            ),
            builder=builder,
            default_geometry=default_geometry,
        )

    def resolve(self, name: str) -> str:
        """Map an alias (``bimodal``) to its canonical kind (``bimodal_disk``)."""
        if name in self._entries:
            return name
        if name in self._aliases:
            return self._aliases[name]
        available = sorted(self._entries)
        raise SceneNotFoundError(f"Unknown scene kind {name!r}. Available: {available}")

    def get(self, name: str) -> _SceneEntry:
        return self._entries[self.resolve(name)]

    def info(self, name: str) -> SceneInfo:
        return self.get(name).info

    def list_scenes(self) -> dict[str, SceneInfo]:
        return {name: entry.info for name, entry in self._entries.items()}

    def __contains__(self, name: object) -> bool:
        return name in self._entries or name in self._aliases


_registry = SceneRegistry()


def get_registry() -> SceneRegistry:
    """Return the process-wide scene registry singleton."""
    return _registry


def register_builtins() -> None:
    """Register the built-in scene kinds. Safe to call more than once."""
    from synth import scenes

    reg = get_registry()
    for name, builder, options in scenes.BUILTIN_SCENES:
        if name not in reg:
            reg.register(name, builder, **options)
