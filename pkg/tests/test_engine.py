"""Tests for the time step and the evolution loop."""

import numpy as np
import pytest

from conftest import circle_field
from contract import EventType
from emitter import Emitter
from engine import (
    TRACE_COLUMNS,
    EvolveParams,
    SegmentationResult,
    Termination,
    TraceRow,
    evolve,
    step,
    trace_csv,
    write_trace_csv,
)
from levelset import LevelSetField, interior_mask, parse_init_spec
from metrics import dice
from model import Model, ModelKind
from raster import GrayImage, ScalarField
from synth import SceneSpec, make_scene


class RecordingEmitter(Emitter):
    def __init__(self):
        super().__init__()
        self.events = []

    def _render_event(self, event):
        self.events.append(event)

    def _render_document(self, document):
        pass

    def of_type(self, event_type):
        return [event for event in self.events if event.type == event_type]


@pytest.fixture
def small_disk():
    """64x64 scene, disk of radius 15 at the center."""
    return make_scene(SceneSpec(width=64, height=64))


class TestStep:
    def test_moves_only_where_speed_is_nonzero(self):
        phi = circle_field(size=16, cx=8, cy=8, r=4)
        speed = np.zeros((16, 16))
        speed[8, 12] = 2.0
        norm = ScalarField(np.full((16, 16), 0.5))
        moved = step(phi, ScalarField(speed), 0.25, norm)
        assert moved.phi[8, 12] == phi.phi[8, 12] + 0.25
        changed = moved.phi != phi.phi
        assert changed.sum() == 1

    def test_computes_norm_when_missing(self):
        phi = circle_field(size=16, cx=8, cy=8, r=4)
        speed = ScalarField(np.ones((16, 16)))
        moved = step(phi, speed, 0.1)
        assert moved.phi[8, 12] == pytest.approx(phi.phi[8, 12] + 0.1)

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_rejects_nonpositive_dt(self, dt):
        phi = circle_field(size=8, cx=4, cy=4, r=2)
        with pytest.raises(ValueError, match="positive"):
            step(phi, ScalarField(np.zeros((8, 8))), dt)


class TestParams:
    def test_defaults(self):
        params = EvolveParams()
        assert params.model.kind is Model.EMS
        assert params.clamp == params.band_beta + 1.0
        assert params.dt_safety == 0.45

    def test_band_minimum(self):
        with pytest.raises(ValueError):
            EvolveParams(band_beta=1.0)


class TestEvolve:
    def test_segments_disk(self, small_disk):
        image, truth = small_disk
        result = evolve(image, parse_init_spec("circle:32,32,25"))
        assert result.termination is Termination.CONVERGED
        assert dice(result.final_mask, truth["disk"]) >= 0.95

    def test_ms_segments_disk(self, small_disk):
        image, truth = small_disk
        params = EvolveParams(model=ModelKind(kind=Model.MS))
        result = evolve(image, parse_init_spec("circle:32,32,25"), params)
        assert dice(result.final_mask, truth["disk"]) >= 0.95
        assert result.energy_trace[-1].energy < result.energy_trace[0].energy

    def test_zero_iterations_returns_init(self, small_disk):
        image, _ = small_disk
        init = circle_field(size=64, cx=20, cy=20, r=5)
        result = evolve(image, init, EvolveParams(max_iters=0))
        assert result.iterations == 0
        assert result.termination is Termination.MAX_ITERS
        assert result.final_phi is init
        assert result.energy_trace == ()

    def test_max_iters(self, small_disk):
        image, _ = small_disk
        params = EvolveParams(max_iters=3)
        result = evolve(image, parse_init_spec("circle:32,32,25"), params)
        assert result.termination is Termination.MAX_ITERS
        assert result.iterations == 3
        assert [row.iteration for row in result.energy_trace] == [0, 1, 2]

    def test_redistance_schedule(self, small_disk):
        image, _ = small_disk
        params = EvolveParams(max_iters=6, reinit_every=2, reinit_drift=100.0)
        result = evolve(image, parse_init_spec("circle:32,32,25"), params)
        assert result.redistances == 3
        flags = [row.after_redistance for row in result.energy_trace]
        assert flags == [True, False, True, False, True, False]
        assert result.max_redistance_flips == 0

    def test_snapshots_and_progress(self, small_disk):
        image, _ = small_disk
        emitter = RecordingEmitter()
        params = EvolveParams(
            max_iters=12, snapshot_every=5, progress_every=4, stop_window=50
        )
        result = evolve(image, parse_init_spec("circle:32,32,25"), params, emitter)
        assert [iteration for iteration, _ in result.snapshots] == [5, 10]
        assert result.snapshots[0][1].dtype == bool
        progress = emitter.of_type(EventType.PROGRESS)
        assert [event.data["iteration"] for event in progress] == [4, 8, 12]
        expected = {"energy", "mu1", "mu2", "area_in", "flips", "dt"}
        assert set(progress[0].data) >= expected

    def test_mirror_invariance(self, triple_scene):
        image, _ = triple_scene
        init = circle_field(r=50.0)
        params = EvolveParams(max_iters=30)
        plain = evolve(image, init, params)
        mirrored = evolve(GrayImage(image.data[:, ::-1]), init.mirrored(), params)
        assert np.array_equal(plain.final_mask[:, ::-1], mirrored.final_mask)
        assert [row.energy for row in mirrored.energy_trace] == pytest.approx(
            [row.energy for row in plain.energy_trace], rel=1e-12
        )

    def test_dissolves_unresolvable_pixel(self, small_disk):
        image, _ = small_disk
        phi = np.array(circle_field(size=64, cx=32, cy=32, r=20).phi)
        phi[4, 4] = -0.5
        emitter = RecordingEmitter()
        params = EvolveParams(max_iters=3, reinit_every=1)
        result = evolve(image, LevelSetField(phi), params, emitter)
        assert not interior_mask(result.final_phi)[4, 4]
        assert result.dissolved_pixels == 1
        (warning,) = emitter.of_type(EventType.WARNING)
        assert warning.data["code"] == "UNRESOLVABLE_REGION_DISSOLVED"
        assert warning.data["iteration"] == 1

    def test_front_vanishes_without_sign_change(self, small_disk):
        image, _ = small_disk
        result = evolve(image, LevelSetField(np.ones((64, 64))))
        assert result.termination is Termination.FRONT_VANISHED
        assert result.iterations == 0

    def test_shrinking_circle_vanishes(self):
        image = GrayImage.constant(32, 32, 0.5)
        params = EvolveParams(
            model=ModelKind(kind=Model.MS, lambda_=1.0), max_iters=500
        )
        result = evolve(image, parse_init_spec("circle:16,16,4"), params)
        assert result.termination is Termination.FRONT_VANISHED

    def test_shape_mismatch(self, small_disk):
        image, _ = small_disk
        with pytest.raises(ValueError, match="does not match"):
            evolve(image, circle_field(size=32, cx=16, cy=16, r=5))


class TestTrace:
    ROWS = (
        TraceRow(0, -0.25, 0.75, 0.125, 400, True),
        TraceRow(1, -0.3, 0.8, 0.1, 380),
    )

    def test_csv_layout(self):
        lines = trace_csv(self.ROWS).splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert lines[1] == "0,-0.25,0.75,0.125,400"
        assert len(lines) == 3

    def test_csv_accepts_numpy_scalars(self):
        row = TraceRow(0, np.float64(-0.5), np.float64(1.0), np.float64(0.0), 10)
        assert trace_csv([row]).splitlines()[1] == "0,-0.5,1.0,0.0,10"

    def test_write(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(self.ROWS, path)
        assert path.read_text() == trace_csv(self.ROWS)

    def test_result_mask(self):
        phi = circle_field(size=16, cx=8, cy=8, r=3)
        result = SegmentationResult(phi, 0, Termination.MAX_ITERS)
        assert np.array_equal(result.final_mask, phi.phi < 0)


class TestEvolutionInvariants:
    def test_curve_shortening_shrinks_between_redistances(self):
        image = GrayImage.constant(64, 64, 0.5)
        params = EvolveParams(model=ModelKind(kind=Model.MS, lambda_=1.0))
        result = evolve(image, parse_init_spec("circle:32,32,20"), params)
        areas = [row.area_in for row in result.energy_trace if row.after_redistance]
        assert result.termination is Termination.FRONT_VANISHED
        assert len(areas) > 5
        assert all(later < earlier for earlier, later in zip(areas, areas[1:]))

    def test_ms_energy_does_not_rise_over_windows(self, small_disk):
        image, _ = small_disk
        params = EvolveParams(model=ModelKind(kind=Model.MS, lambda_=1e-4))
        trace = evolve(image, parse_init_spec("circle:32,32,25"), params).energy_trace
        tolerance = 1e-6 * (1.0 + abs(trace[0].energy))
        for start, end in zip(trace, trace[10:]):
            if start.after_redistance or end.after_redistance:
                continue
            assert end.energy <= start.energy + tolerance, start.iteration

    def test_reruns_are_bit_identical(self, triple_scene):
        image, _ = triple_scene
        params = EvolveParams(max_iters=60)
        init = parse_init_spec("rect:22,22,105,105")
        first = evolve(image, init, params)
        second = evolve(image, init, params)
        assert np.array_equal(first.final_phi.phi, second.final_phi.phi)
        assert first.energy_trace == second.energy_trace

    def test_intensity_shift_keeps_masks(self):
        spec = SceneSpec(width=64, height=64, intensities=(0.6, 0.1))
        image, _ = make_scene(spec)
        shifted = GrayImage(image.data + 0.25)
        init = parse_init_spec("circle:32,32,25")
        params = EvolveParams(max_iters=150)
        plain = evolve(image, init, params)
        moved = evolve(shifted, init, params)
        assert np.array_equal(plain.final_mask, moved.final_mask)

    def test_redistance_perturbs_few_pixels(self, triple_scene):
        image, _ = triple_scene
        result = evolve(image, parse_init_spec("rect:22,22,105,105"))
        assert result.redistances > 0
        assert result.max_redistance_flips < 0.005 * image.data.size

    def test_window_mean_decides_convergence(self, small_disk):
        image, _ = small_disk
        params = EvolveParams(stop_window=1, stop_flip_fraction=1.0)
        result = evolve(image, parse_init_spec("circle:32,32,25"), params)
        assert result.termination is Termination.CONVERGED
        assert result.iterations == 1
