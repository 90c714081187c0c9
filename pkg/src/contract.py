"""Pydantic models for the ems-segment v1.0 output contract."""

from __future__ import annotations

from datetime import datetime
from enum import Enum, IntEnum
from typing import Any, Literal
from uuid import UUID

from pydantic import BaseModel, ConfigDict, Field

from metrics import MaskScore, TraceSummary


SCHEMA_VERSION = "1.0"
TOOL_VERSION = "0.1.0"
ErrorCategory = Literal[
    "usage",
    "input",
    "storage",
    "numerical",
    "internal",
    "cancelled",
]
EventLevel = Literal["info", "warning", "error"]


class StrictModel(BaseModel):
    """Base for producer-owned contract models."""

    model_config = ConfigDict(extra="forbid")


class EventType(str, Enum):
    """NDJSON event vocabulary for schema version 1.0."""

    START = "start"
    PROGRESS = "progress"
    WARNING = "warning"
    ERROR = "error"
    END = "end"


class Status(str, Enum):
    OK = "ok"
    ERROR = "error"


class StatusCode(str, Enum):
    """Stable symbolic process outcomes exposed to consumers."""

    OK = "OK"
    USAGE_ERROR = "USAGE_ERROR"
    FILE_NOT_FOUND = "FILE_NOT_FOUND"
    IMAGE_INVALID = "IMAGE_INVALID"
    SCENE_INVALID = "SCENE_INVALID"
    SCENE_NOT_FOUND = "SCENE_NOT_FOUND"
    INIT_INVALID = "INIT_INVALID"
    CONFIG_INVALID = "CONFIG_INVALID"
    FRONT_VANISHED = "FRONT_VANISHED"
    VERIFY_FAILED = "VERIFY_FAILED"
    SOLVER_NOT_CONVERGED = "SOLVER_NOT_CONVERGED"
    OUTPUT_WRITE_FAILED = "OUTPUT_WRITE_FAILED"
    INTERNAL_ERROR = "INTERNAL_ERROR"
    USER_INTERRUPT = "USER_INTERRUPT"


class ExitCode(IntEnum):
    """Process exit values."""

    OK = 0
    USAGE = 1
    FRONT_VANISHED = 2
    VERIFY_FAILED = 3
    WRITE_FAILED = 4
    USER_INTERRUPT = 130


class Warning(StrictModel):
    """Structured non-fatal condition."""

    level: Literal["warning"] = "warning"
    code: str
    iteration: int | None = None
    detail: str


class Error(StrictModel):
    """Structured fatal failure detail."""

    code: str
    category: ErrorCategory
    message: str
    cause: dict[str, Any] | None = None


class Document(StrictModel):
    """Fields shared by every final JSON document."""

    schema_version: Literal["1.0"] = SCHEMA_VERSION
    tool_version: str = TOOL_VERSION
    command: str
    status: Status = Status.OK
    code: str = StatusCode.OK.value
    message: str = ""
    outputs: dict[str, str] = Field(default_factory=dict)
    warnings: list[Warning] = Field(default_factory=list)
    error: Error | None = None

    def summary_lines(self) -> list[str]:
        """Human-readable rendering, one entry per line."""
        return [self.message] if self.message else []


class RunSummary(Document):
    """Record of one segmentation; ``config`` alone is enough to replay it."""

    command: Literal["segment"] = "segment"
    termination: str | None = None
    iterations: int = 0
    config: dict[str, Any] = Field(default_factory=dict)
    scene: dict[str, Any] | None = None
    rng_algorithm: str
    truth_object: str | None = None
    score: MaskScore | None = None
    trace_summary: TraceSummary | None = None

    def summary_lines(self) -> list[str]:
        lines = super().summary_lines()
        if self.score is not None:
            lines.append(
                f"dice={self.score.dice:.4f} jaccard={self.score.jaccard:.4f}"
            )
        return lines


class SynthManifest(Document):
    command: Literal["synth"] = "synth"
    scene: dict[str, Any] | None = None
    noise: dict[str, Any] | None = None
    rng_algorithm: str
    objects: list[str] = Field(default_factory=list)
    primary: str | None = None


class SceneListing(Document):
    command: Literal["synth"] = "synth"
    scenes: list[dict[str, Any]] = Field(default_factory=list)

    def summary_lines(self) -> list[str]:
        return [
            f"{scene['name']}: objects={','.join(scene['objects'])} "
            f"primary={scene['primary']}"
            for scene in self.scenes
        ]


class CheckResult(StrictModel):
    """One oracle comparison ``lhs`` vs ``rhs`` at ``tolerance``."""

    suite: str
    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    detail: str | None = None


class VerifyReport(Document):
    command: Literal["verify"] = "verify"
    suites: list[str] = Field(default_factory=list)
    checks: list[CheckResult] = Field(default_factory=list)
    passed: bool = True

    def summary_lines(self) -> list[str]:
        lines = [
            f"{'PASS' if check.passed else 'FAIL'} {check.suite}/{check.name}: "
            f"lhs={check.lhs:.6g} rhs={check.rhs:.6g} tol={check.tolerance:g}"
            for check in self.checks
        ]
        return lines + super().summary_lines()


class MetricsReport(Document):
    command: Literal["metrics"] = "metrics"
    mask_a: str
    mask_b: str
    score: MaskScore | None = None

    def summary_lines(self) -> list[str]:
        if self.score is None:
            return super().summary_lines()
        return [
            f"dice={self.score.dice:.6f} jaccard={self.score.jaccard:.6f} "
            f"flipped_pixels={self.score.flipped_pixels}"
        ]


class ExperimentRun(StrictModel):
    """One segmentation inside an experiment."""

    name: str
    model: str
    init: str
    truth_object: str
    termination: str
    iterations: int
    score: MaskScore
    mask: str | None = None


class ExperimentReport(Document):
    command: Literal["experiment"] = "experiment"
    experiment: str
    scene: dict[str, Any] | None = None
    runs: list[ExperimentRun] = Field(default_factory=list)
    expectations: list[CheckResult] = Field(default_factory=list)
    passed: bool = True

    def summary_lines(self) -> list[str]:
        lines = [
            f"{run.name}: {run.termination} after {run.iterations} iterations, "
            f"dice={run.score.dice:.4f}"
            for run in self.runs
        ]
        lines += [
            f"{'PASS' if check.passed else 'FAIL'} {check.name}"
            for check in self.expectations
        ]
        return lines + super().summary_lines()


class Event(StrictModel):
    """One independently parseable NDJSON stream event."""

    schema_version: Literal["1.0"] = SCHEMA_VERSION
    request_id: UUID
    event_id: UUID
    sequence: int = Field(ge=0)
    time: datetime
    level: EventLevel
    type: EventType
    data: dict[str, Any]
