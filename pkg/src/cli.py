#!/usr/bin/env python3
"""
ems-segment CLI

Command-line interface for edge-mean separation level-set segmentation.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Any

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from config import ConfigError, SegmentConfig, parse_size, resolve_segment_config
from contract import (
    Document,
    Error,
    ErrorCategory,
    ExitCode,
    MetricsReport,
    RunSummary,
    SceneListing,
    Status,
    StatusCode,
    SynthManifest,
    VerifyReport,
)
from emitter import (
    Emitter,
    HumanEmitter,
    JSONEmitter,
    NDJSONEmitter,
    PlainEmitter,
    document_payload,
    dumps,
)
from engine import EvolveParams, Termination, evolve, write_trace_csv
from experiments import EXPERIMENTS, run_experiment
from levelset import InitSpecError, LevelSetField, front_pixels, init_from_spec
from metrics import score_masks, summarize_trace
from model import ModelKind
from raster import (
    GrayImage,
    ImageFormatError,
    load_image,
    save_image,
    save_mask,
    save_overlay,
    write_atomic,
)
from synth import (
    RNG_ALGORITHM,
    NoiseSpec,
    SceneNotFoundError,
    SceneSpec,
    SceneSpecError,
    get_registry,
    make_scene,
    register_builtins,
)
from verify import SUITE_NAMES, PoissonConvergenceError, run_suites


OUTPUT_MODES = ["human", "plain", "json", "ndjson"]


class UsageError(Exception):
    """argparse rejected the command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class CommandFailure(Exception):
    """A command stopped with a structured error."""

    def __init__(
        self,
        code: StatusCode,
        category: ErrorCategory,
        message: str,
        exit_code: ExitCode = ExitCode.USAGE,
    ) -> None:
        super().__init__(message)
        self.code = code
        self.category = category
        self.message = message
        self.exit_code = exit_code


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output",
        choices=OUTPUT_MODES,
        default=None,
        help="Output mode (default: human in TTY, ndjson when piped)",
    )
    parser.add_argument(
        "--json", action="store_true", default=False, help="Emit one JSON document"
    )
    parser.add_argument(
        "--ndjson", action="store_true", default=False, help="Emit streaming NDJSON"
    )
    parser.add_argument(
        "--plain", action="store_true", default=False, help="Emit plain human output"
    )
    parser.add_argument(
        "--quiet",
        action="store_true",
        default=False,
        help="Suppress human progress output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ems",
        description="Edge-mean separation level-set segmentation",
    )
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands.required = True

    # tunables default to SUPPRESS so only explicit flags override config sources
    segment = commands.add_parser(
        "segment",
        help="Segment an image file or a synthetic scene",
        argument_default=argparse.SUPPRESS,
    )
    source = segment.add_argument_group("image source (exactly one)")
    source.add_argument("--image", help="PGM (P2/P5) or 8-bit grayscale PNG")
    source.add_argument("--scene", help="Synthetic scene kind, e.g. bimodal")
    segment.add_argument("--size", help="Scene size WIDTHxHEIGHT (default 128x128)")
    segment.add_argument("--noise", help="Scene noise TYPE:PARAM[:SEED]")
    segment.add_argument(
        "--init",
        help="Initial contour: circle:cx,cy,r rect:x0,y0,x1,y1 "
        "grid:rows,cols,r,spacing mask:PATH, comma-joined for unions",
    )
    segment.add_argument("--model", choices=["ms", "ems"])
    segment.add_argument("--lambda", dest="lambda", type=float, help="Length weight")
    segment.add_argument("--sigma", type=float, help="Edge smoothing scale")
    segment.add_argument("--edge-gain", dest="edge_gain", type=float)
    segment.add_argument("--dt-safety", dest="dt_safety", type=float)
    segment.add_argument("--band-beta", dest="band_beta", type=float)
    segment.add_argument("--reinit-every", dest="reinit_every", type=int)
    segment.add_argument("--reinit-drift", dest="reinit_drift", type=float)
    segment.add_argument("--max-iters", dest="max_iters", type=int)
    segment.add_argument("--stop-flip-fraction", dest="stop_flip_fraction", type=float)
    segment.add_argument("--stop-window", dest="stop_window", type=int)
    segment.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    segment.add_argument("--progress-every", dest="progress_every", type=int)
    segment.add_argument("--presmooth", type=float, help="Gaussian pre-smoothing scale")
    segment.add_argument("--seed", type=int)
    segment.add_argument("--truth", help="Ground-truth mask PATH, or 'auto' for scenes")
    segment.add_argument("--truth-object", dest="truth_object")
    segment.add_argument("--out", help="Output directory")
    segment.add_argument("--config", dest="config_file", default=None)
    segment.add_argument("--replay", default=None, help="Re-run a summary.json")
    _add_output_flags(segment)

    synth = commands.add_parser("synth", help="Render a synthetic scene")
    synth.add_argument("--kind", default="bimodal_disk")
    synth.add_argument("--size", default="128x128")
    synth.add_argument("--noise", default=None)
    synth.add_argument("--out", default="scene")
    synth.add_argument("--list", action="store_true", help="List scene kinds")
    _add_output_flags(synth)

    verify = commands.add_parser("verify", help="Run numerical oracle suites")
    verify.add_argument("--suite", choices=[*SUITE_NAMES, "all"], default="all")
    verify.add_argument("--report", default=None, help="Write the JSON report here")
    _add_output_flags(verify)

    metrics = commands.add_parser("metrics", help="Score one mask against another")
    metrics.add_argument("mask_a")
    metrics.add_argument("mask_b")
    metrics.add_argument("--report", default=None)
    _add_output_flags(metrics)

    experiment = commands.add_parser("experiment", help="Run a synthetic study")
    experiment.add_argument("name")
    experiment.add_argument("--out", default=None)
    experiment.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    experiment.add_argument("--lambda", dest="lambda_", type=float, default=None)
    _add_output_flags(experiment)

    parser.epilog = (
        "Exit codes: 0 success, 1 usage or input error, 2 front vanished, "
        "3 checks failed, 4 output write failure, 130 interrupt."
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as error:
        emitter = _build_emitter(_fallback_args(argv))
        return _fail(
            emitter,
            Document(command=_command_name(argv)),
            CommandFailure(StatusCode.USAGE_ERROR, "usage", str(error)),
        )

    emitter = _build_emitter(args)
    handler = {
        "segment": run_segment,
        "synth": run_synth,
        "verify": run_verify,
        "metrics": run_metrics,
        "experiment": run_experiment_command,
    }[args.command]
    try:
        return handler(args, emitter)
    except CommandFailure as failure:
        return _fail(emitter, Document(command=args.command), failure)
    except KeyboardInterrupt:
        return _fail(
            emitter,
            Document(command=args.command),
            CommandFailure(
                StatusCode.USER_INTERRUPT,
                "cancelled",
                "Interrupted by user",
                ExitCode.USER_INTERRUPT,
            ),
        )
    except Exception as error:
        return _fail(
            emitter,
            Document(command=args.command),
            CommandFailure(
                StatusCode.INTERNAL_ERROR,
                "internal",
                f"{type(error).__name__}: {error}",
            ),
        )


def run_segment(args, emitter: Emitter) -> int:
    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in _COMMON_KEYS and key not in ("config_file", "replay")
    }
    try:
        config = resolve_segment_config(flags, args.config_file, args.replay)
    except ConfigError as error:
        raise CommandFailure(StatusCode.CONFIG_INVALID, "usage", str(error))
    if (config.image is None) == (config.scene is None):
        raise CommandFailure(
            StatusCode.USAGE_ERROR,
            "usage",
            "Exactly one image source is required: --image PATH or --scene KIND",
        )

    image, scene, truth_masks, primary = _segment_input(config)
    params = config.evolve_params()
    try:
        init = config.init_spec(image.width, image.height)
        phi0 = init_from_spec(init, image.width, image.height)
    except (InitSpecError, ImageFormatError) as error:
        raise CommandFailure(StatusCode.INIT_INVALID, "usage", str(error))
    truth, truth_object = _resolve_truth(config, image, truth_masks, primary)

    out_dir = Path(config.out)
    _make_dirs(out_dir)
    emitter.start(
        {
            "command": "segment",
            "source": config.image or f"scene:{scene.kind}",
            "width": image.width,
            "height": image.height,
            "model": config.model.value,
            "init": init.to_text(),
        }
    )
    emitter.log(
        f"Segmenting {image.width}x{image.height} with {config.model.value} ..."
    )
    result = evolve(image, phi0, params, emitter)

    outputs = {
        "mask": str(out_dir / "mask.pgm"),
        "overlay": str(out_dir / "overlay.pgm"),
        "trace": str(out_dir / "trace.csv"),
        "summary": str(out_dir / "summary.json"),
    }
    score = score_masks(result.final_mask, truth) if truth is not None else None
    try:
        save_mask(result.final_mask, outputs["mask"])
        save_overlay(image, front_pixels(result.final_phi), outputs["overlay"])
        write_trace_csv(result.energy_trace, outputs["trace"])
        if result.snapshots:
            snapshot_dir = out_dir / "snapshots"
            _make_dirs(snapshot_dir)
            for iteration, mask in result.snapshots:
                front = _mask_front(mask)
                save_overlay(image, front, snapshot_dir / f"iter_{iteration:05d}.pgm")
            outputs["snapshots"] = str(snapshot_dir)
    except OSError as error:
        raise CommandFailure(
            StatusCode.OUTPUT_WRITE_FAILED,
            "storage",
            f"Cannot write outputs: {error.strerror or error}",
            ExitCode.WRITE_FAILED,
        )

    vanished = result.termination is Termination.FRONT_VANISHED
    code = StatusCode.FRONT_VANISHED if vanished else StatusCode.OK
    summary = RunSummary(
        status=Status.OK,
        code=code.value,
        message=(
            f"Segmentation {result.termination.value} after "
            f"{result.iterations} iterations"
        ),
        termination=result.termination.value,
        iterations=result.iterations,
        config=config.to_record(),
        scene=scene.model_dump(mode="json") if scene is not None else None,
        rng_algorithm=RNG_ALGORITHM,
        truth_object=truth_object,
        score=score,
        trace_summary=summarize_trace(result.energy_trace, result.iterations),
        outputs=outputs,
        warnings=list(emitter.warnings),
    )
    _write_report(outputs["summary"], summary)
    emitter.end(
        {
            "status": "ok",
            "code": code.value,
            "termination": result.termination.value,
            "iterations": result.iterations,
            "outputs": outputs,
            "warnings": [w.model_dump(exclude_none=True) for w in emitter.warnings],
        }
    )
    emitter.finalize(summary)
    return ExitCode.FRONT_VANISHED if vanished else ExitCode.OK


def _mask_front(mask: np.ndarray) -> np.ndarray:
    return front_pixels(LevelSetField(np.where(mask, -1.0, 1.0)))


def _segment_input(config: SegmentConfig):
    """Load or render the image; scenes also yield their truth masks."""
    if config.image is not None:
        try:
            return load_image(config.image), None, None, None
        except ImageFormatError as error:
            code = (
                StatusCode.FILE_NOT_FOUND
                if not Path(config.image).exists()
                else StatusCode.IMAGE_INVALID
            )
            raise CommandFailure(code, "input", str(error))
    try:
        spec = config.scene_spec().resolved()
        image, truth = make_scene(spec)
        noise = config.noise_spec()
    except SceneNotFoundError as error:
        raise CommandFailure(StatusCode.SCENE_NOT_FOUND, "usage", str(error))
    except (SceneSpecError, ConfigError) as error:
        raise CommandFailure(StatusCode.SCENE_INVALID, "usage", str(error))
    if noise is not None:
        image = noise.apply(image)
    return image, spec, truth, truth.primary


def _resolve_truth(config: SegmentConfig, image: GrayImage, truth_masks, primary):
    if config.truth is None:
        return None, None
    if config.truth == "auto":
        if truth_masks is None:
            raise CommandFailure(
                StatusCode.USAGE_ERROR,
                "usage",
                "--truth auto needs a --scene source",
            )
        name = config.truth_object or primary
        try:
            return truth_masks[name], name
        except SceneSpecError as error:
            raise CommandFailure(StatusCode.SCENE_INVALID, "usage", str(error))
    mask = _load_mask(config.truth)
    if mask.shape != image.shape:
        raise CommandFailure(
            StatusCode.IMAGE_INVALID,
            "input",
            f"Truth mask shape {mask.shape} does not match image shape {image.shape}",
        )
    return mask, config.truth


def _load_mask(path: str) -> np.ndarray:
    try:
        return load_image(path).data >= 0.5
    except ImageFormatError as error:
        missing = not Path(path).exists()
        code = StatusCode.FILE_NOT_FOUND if missing else StatusCode.IMAGE_INVALID
        raise CommandFailure(code, "input", str(error))


def run_synth(args, emitter: Emitter) -> int:
    register_builtins()
    if args.list:
        listing = SceneListing(
            message="",
            scenes=[
                {
                    "name": info.name,
                    "objects": list(info.objects),
                    "primary": info.primary,
                    "intensities": list(info.intensities),
                    "aliases": list(info.aliases),
                }
                for info in get_registry().list_scenes().values()
            ],
        )
        emitter.start({"command": "synth", "list": True})
        emitter.end({"status": "ok", "code": "OK", "scenes": len(listing.scenes)})
        emitter.finalize(listing)
        return ExitCode.OK

    try:
        width, height = parse_size(args.size)
        spec = SceneSpec(kind=args.kind, width=width, height=height).resolved()
        image, truth = make_scene(spec)
        noise = NoiseSpec.parse(args.noise) if args.noise else None
    except SceneNotFoundError as error:
        raise CommandFailure(StatusCode.SCENE_NOT_FOUND, "usage", str(error))
    except (SceneSpecError, ConfigError, ValueError) as error:
        raise CommandFailure(StatusCode.SCENE_INVALID, "usage", str(error))
    if noise is not None:
        image = noise.apply(image)

    out_dir = Path(args.out)
    emitter.start(
        {"command": "synth", "kind": spec.kind, "width": width, "height": height}
    )
    outputs = {"image": str(out_dir / "image.pgm")}
    for name in truth.masks:
        outputs[f"truth_{name}"] = str(out_dir / f"truth_{name}.pgm")
    outputs["manifest"] = str(out_dir / "manifest.json")
    manifest = SynthManifest(
        message=f"Scene {spec.kind} written to {out_dir}",
        scene=spec.model_dump(mode="json"),
        noise=noise.model_dump(mode="json") if noise else None,
        rng_algorithm=RNG_ALGORITHM,
        objects=list(truth.masks),
        primary=truth.primary,
        outputs=outputs,
    )
    try:
        _make_dirs(out_dir)
        save_image(image, outputs["image"])
        for name, mask in truth.masks.items():
            save_mask(mask, outputs[f"truth_{name}"])
        _write_document(outputs["manifest"], manifest)
    except OSError as error:
        raise CommandFailure(
            StatusCode.OUTPUT_WRITE_FAILED,
            "storage",
            f"Cannot write scene: {error.strerror or error}",
            ExitCode.WRITE_FAILED,
        )
    emitter.end({"status": "ok", "code": "OK", "outputs": outputs})
    emitter.finalize(manifest)
    return ExitCode.OK


def run_verify(args, emitter: Emitter) -> int:
    suites = list(SUITE_NAMES) if args.suite == "all" else [args.suite]
    emitter.start({"command": "verify", "suites": suites})
    try:
        checks = run_suites(suites)
    except PoissonConvergenceError as error:
        raise CommandFailure(
            StatusCode.SOLVER_NOT_CONVERGED,
            "numerical",
            str(error),
            ExitCode.VERIFY_FAILED,
        )
    passed = all(check.passed for check in checks)
    failed = sum(not check.passed for check in checks)
    code = StatusCode.OK if passed else StatusCode.VERIFY_FAILED
    report = VerifyReport(
        code=code.value,
        message=(
            f"{len(checks) - failed}/{len(checks)} checks passed"
            if checks
            else "No checks ran"
        ),
        suites=suites,
        checks=checks,
        passed=passed,
    )
    if args.report:
        report = report.model_copy(update={"outputs": {"report": args.report}})
        _write_report(args.report, report)
    emitter.end(
        {"status": "ok", "code": code.value, "checks": len(checks), "failed": failed}
    )
    emitter.finalize(report)
    return ExitCode.OK if passed else ExitCode.VERIFY_FAILED


def run_metrics(args, emitter: Emitter) -> int:
    emitter.start({"command": "metrics", "mask_a": args.mask_a, "mask_b": args.mask_b})
    first, second = _load_mask(args.mask_a), _load_mask(args.mask_b)
    try:
        score = score_masks(first, second)
    except ValueError as error:
        raise CommandFailure(StatusCode.IMAGE_INVALID, "input", str(error))
    report = MetricsReport(
        message=f"dice={score.dice:.6f} jaccard={score.jaccard:.6f}",
        mask_a=args.mask_a,
        mask_b=args.mask_b,
        score=score,
    )
    if args.report:
        report = report.model_copy(update={"outputs": {"report": args.report}})
        _write_report(args.report, report)
    emitter.end({"status": "ok", "code": "OK", "score": score.model_dump()})
    emitter.finalize(report)
    return ExitCode.OK


def run_experiment_command(args, emitter: Emitter) -> int:
    if args.name not in EXPERIMENTS:
        raise CommandFailure(
            StatusCode.USAGE_ERROR,
            "usage",
            f"Unknown experiment {args.name!r}; choose from {', '.join(EXPERIMENTS)}",
        )
    overrides: dict[str, Any] = {}
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if args.lambda_ is not None:
        overrides["model"] = ModelKind(lambda_=args.lambda_)
    try:
        base = EvolveParams(**overrides)
    except ValueError as error:
        raise CommandFailure(StatusCode.CONFIG_INVALID, "usage", str(error))
    emitter.start({"command": "experiment", "experiment": args.name})
    try:
        report = run_experiment(args.name, base, args.out, emitter)
        if args.out:
            path = str(Path(args.out) / f"{args.name}_report.json")
            report = report.model_copy(
                update={"outputs": {**report.outputs, "report": path}}
            )
            _write_document(path, report)
    except OSError as error:
        raise CommandFailure(
            StatusCode.OUTPUT_WRITE_FAILED,
            "storage",
            f"Cannot write experiment outputs: {error.strerror or error}",
            ExitCode.WRITE_FAILED,
        )
    code = StatusCode.OK if report.passed else StatusCode.VERIFY_FAILED
    report = report.model_copy(update={"code": code.value})
    emitter.end({"status": "ok", "code": code.value, "runs": len(report.runs)})
    emitter.finalize(report)
    return ExitCode.OK if report.passed else ExitCode.VERIFY_FAILED


_COMMON_KEYS = frozenset({"command", "output", "json", "ndjson", "plain", "quiet"})


def _build_emitter(args) -> Emitter:
    """Select the requested output renderer from parsed CLI arguments."""
    mode = "json" if args.json else "ndjson" if args.ndjson else None
    mode = mode or ("plain" if args.plain else args.output)
    mode = mode or ("human" if sys.stdout.isatty() else "ndjson")
    emitter_class = {
        "human": HumanEmitter,
        "plain": PlainEmitter,
        "json": JSONEmitter,
        "ndjson": NDJSONEmitter,
    }[mode]
    return emitter_class(quiet=args.quiet)


def _fallback_args(argv: list[str]) -> argparse.Namespace:
    """Output flags scraped from a command line argparse rejected."""
    output = None
    for index, token in enumerate(argv):
        if token.startswith("--output="):
            output = token.partition("=")[2]
        elif token == "--output" and index + 1 < len(argv):
            output = argv[index + 1]
    return argparse.Namespace(
        json="--json" in argv,
        ndjson="--ndjson" in argv,
        plain="--plain" in argv,
        quiet="--quiet" in argv,
        output=output if output in OUTPUT_MODES else None,
    )


def _command_name(argv: list[str]) -> str:
    commands = ("segment", "synth", "verify", "metrics", "experiment")
    return next((token for token in argv if token in commands), "ems")


def _error_data(code: str, category: ErrorCategory, message: str) -> dict:
    """Build the stable event payload for one structured error."""
    return {"code": code, "category": category, "message": message}


def _fail(emitter: Emitter, document: Document, failure: CommandFailure) -> int:
    """Emit a complete failure stream and final document."""
    code = failure.code.value
    emitter.error(_error_data(code, failure.category, failure.message))
    emitter.end(
        {
            "status": "error",
            "code": code,
            "warnings": [w.model_dump(exclude_none=True) for w in emitter.warnings],
        }
    )
    emitter.finalize(
        document.model_copy(
            update={
                "status": Status.ERROR,
                "code": code,
                "message": failure.message,
                "warnings": list(emitter.warnings),
                "error": Error(
                    code=code, category=failure.category, message=failure.message
                ),
            }
        )
    )
    return int(failure.exit_code)


def _make_dirs(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise CommandFailure(
            StatusCode.OUTPUT_WRITE_FAILED,
            "storage",
            f"Cannot create {path}: {error.strerror or error}",
            ExitCode.WRITE_FAILED,
        )


def _document_bytes(document: Document) -> bytes:
    """Stable, timestamp-free rendering so replays compare byte for byte."""
    return (dumps(document_payload(document), pretty=True) + "\n").encode("utf-8")


def _write_document(path: str, document: Document) -> None:
    write_atomic(path, _document_bytes(document))


def _write_report(path: str, document: Document) -> None:
    try:
        parent = Path(path).parent
        if str(parent):
            _make_dirs(parent)
        _write_document(path, document)
    except OSError as error:
        raise CommandFailure(
            StatusCode.OUTPUT_WRITE_FAILED,
            "storage",
            f"Cannot write report {path}: {error.strerror or error}",
            ExitCode.WRITE_FAILED,
        )


if __name__ == "__main__":
    sys.exit(main())
