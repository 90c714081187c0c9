"""Tests for init specs, signed distances, redistancing and the narrow band."""

import numpy as np
import pytest

from conftest import circle_field, write_pgm
from synth import SceneSpec, make_scene
from levelset import (
    Circle,
    FrontVanishedError,
    Grid,
    InitSpecError,
    LevelSetField,
    MaskFile,
    Rect,
    band_taper,
    dissolve_isolated,
    front_pixels,
    front_segments,
    init_from_spec,
    interior_mask,
    narrow_band,
    parse_init_spec,
    redistance,
)


class TestParseInitSpec:
    def test_single_circle(self):
        spec = parse_init_spec("circle:64,64,20")
        assert spec.primitives == (Circle(cx=64, cy=64, r=20),)

    def test_union_of_shapes(self):
        spec = parse_init_spec("circle:20,20,8,rect:40,40,60,60")
        assert [p.shape for p in spec.primitives] == ["circle", "rect"]
        assert spec.primitives[1] == Rect(x0=40, y0=40, x1=60, y1=60)

    def test_grid_and_mask(self):
        spec = parse_init_spec("grid:2,3,5,20, mask:cells.pgm")
        assert spec.primitives[0] == Grid(rows=2, cols=3, r=5, spacing=20)
        assert spec.primitives[1] == MaskFile(path="cells.pgm")

    def test_text_form_reparses(self):
        text = "circle:10.5,20,3,rect:1,2,30,40"
        assert parse_init_spec(text).to_text() == text

    @pytest.mark.parametrize(
        "text,message",
        [
            ("", "empty"),
            ("10,20,5", "must start with"),
            ("ellipse:1,2,3", "Unknown init shape"),
            ("circle:1,2", "takes 3 numbers"),
            ("circle:a,2,3", "must be numbers"),
            ("circle:10,10,-1", "circle"),
            ("rect:10,10,5,20", "x1 > x0"),
            ("grid:1.5,2,3,4", "integers"),
            ("mask:", "exactly one path"),
        ],
    )
    def test_rejects(self, text, message):
        with pytest.raises(InitSpecError, match=message):
            parse_init_spec(text)


class TestInitFromSpec:
    def test_circle_is_exact_distance(self):
        phi = init_from_spec(parse_init_spec("circle:10,10,4"), 21, 21)
        assert phi.phi[10, 10] == -4.0
        assert phi.phi[10, 20] == 6.0

    def test_rect_distance(self):
        phi = init_from_spec(parse_init_spec("rect:5,5,15,15"), 21, 21)
        assert phi.phi[10, 10] == -5.0
        assert phi.phi[10, 18] == 3.0
        assert phi.phi[2, 2] == pytest.approx(np.hypot(3, 3))

    def test_union_takes_minimum(self):
        phi = init_from_spec(parse_init_spec("circle:5,10,3,circle:15,10,3"), 21, 21)
        inside = interior_mask(phi)
        assert inside[10, 5] and inside[10, 15] and not inside[10, 10]

    def test_grid_is_centered(self):
        phi = init_from_spec(parse_init_spec("grid:2,2,2,10"), 21, 21)
        inside = interior_mask(phi)
        for x, y in [(5, 5), (15, 5), (5, 15), (15, 15)]:
            assert inside[y, x]
        assert not inside[10, 10]

    def test_mask_file(self, tmp_path):
        samples = np.zeros((8, 8), dtype=int)
        samples[2:5, 3:6] = 255
        path = write_pgm(tmp_path / "init.pgm", samples)
        phi = init_from_spec(parse_init_spec(f"mask:{path}"), 8, 8)
        assert np.array_equal(interior_mask(phi), samples > 0)

    def test_mask_size_mismatch(self, tmp_path):
        path = write_pgm(tmp_path / "small.pgm", np.full((4, 4), 255))
        with pytest.raises(InitSpecError, match="is 4x4, image is 8x8"):
            init_from_spec(parse_init_spec(f"mask:{path}"), 8, 8)

    def test_mask_missing(self, tmp_path):
        with pytest.raises(InitSpecError, match="not found"):
            init_from_spec(parse_init_spec(f"mask:{tmp_path / 'x.pgm'}"), 8, 8)

    def test_circle_outside_image(self):
        with pytest.raises(InitSpecError, match="outside the image"):
            init_from_spec(parse_init_spec("circle:100,100,5"), 32, 32)

    def test_contour_pixels_count_as_inside(self):
        _, disk = make_scene(SceneSpec(kind="bimodal_disk"))
        phi = init_from_spec(parse_init_spec("circle:64,64,30"), 128, 128)
        assert np.array_equal(interior_mask(phi), disk["disk"])
        _, regions = make_scene(SceneSpec(kind="triple_junction"))
        square = init_from_spec(parse_init_spec("rect:32,32,95,95"), 128, 128)
        assert int(interior_mask(square).sum()) == int(regions["square"].sum()) == 4096


class TestFieldHelpers:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            LevelSetField(np.full((4, 4), np.nan))

    def test_front_pixels_straddle_contour(self):
        phi = np.ones((5, 5))
        phi[:, :2] = -1.0
        front = front_pixels(LevelSetField(phi))
        assert front[:, 1].all() and front[:, 2].all()
        assert not front[:, 0].any() and not front[:, 3:].any()

    def test_dissolve_single_pixels(self):
        phi = np.ones((7, 7))
        phi[1:6, 4:6] = -1.0
        phi[2, 1] = -1.0
        phi[3, 5] = 1.0
        dissolved, count = dissolve_isolated(LevelSetField(phi))
        assert count == 1
        inside = interior_mask(dissolved)
        assert not inside[2, 1]
        assert inside[3, 4]

    def test_dissolve_hole_inside_region(self):
        phi = -np.ones((7, 7))
        phi[:, 5:] = 1.0
        phi[3, 2] = 1.0
        dissolved, count = dissolve_isolated(LevelSetField(phi))
        assert count == 1
        assert interior_mask(dissolved)[3, 2]

    def test_dissolve_noop(self, disk_phi):
        same, count = dissolve_isolated(disk_phi)
        assert count == 0 and same is disk_phi

    def test_dissolve_keeps_pixels_held_by_speed(self):
        phi = np.ones((7, 7))
        phi[:, 5:] = -1.0
        phi[2, 1] = -1.0
        phi[4, 2] = -1.0
        speed = np.zeros((7, 7))
        speed[2, 1] = -1.0
        speed[4, 2] = 1.0
        dissolved, count = dissolve_isolated(LevelSetField(phi), speed)
        inside = interior_mask(dissolved)
        assert count == 1
        assert inside[2, 1] and not inside[4, 2]

    def test_band_taper_profile(self):
        phi = LevelSetField(np.tile(np.arange(-8.0, 9.0), (3, 1)) + 0.5)
        taper = band_taper(phi, 6.0)[1]
        size = np.abs(phi.phi[1])
        assert np.all(taper[size <= 3.0] == 1.0)
        assert np.all(taper[size >= 6.0] == 0.0)
        ramp = (size > 3.0) & (size < 6.0)
        assert np.all((taper[ramp] > 0.0) & (taper[ramp] < 1.0))


class TestRedistance:
    def test_recovers_circle_distance(self):
        exact = circle_field(size=64, cx=31.3, cy=32.6, r=12.2)
        squashed = LevelSetField(np.tanh(exact.phi / 3.0) * 7.0)
        redone = redistance(squashed)
        assert np.array_equal(interior_mask(redone), interior_mask(exact))
        near = np.abs(exact.phi) < 6
        assert np.abs(redone.phi - exact.phi)[near].max() < 0.5

    def test_idempotent(self):
        once = redistance(circle_field(size=64, cx=31.3, cy=32.6, r=12.2))
        twice = redistance(once)
        near = np.abs(once.phi) < 6
        assert np.abs(twice.phi - once.phi)[near].max() <= 0.1

    def test_clamp_caps_magnitude(self, disk_phi):
        redone = redistance(disk_phi, clamp=7.0)
        assert np.abs(redone.phi).max() == 7.0

    def test_signs_never_change(self):
        rng = np.random.default_rng(11)
        phi = LevelSetField(rng.normal(size=(24, 24)))
        assert np.array_equal(interior_mask(redistance(phi)), interior_mask(phi))

    def test_no_sign_change_vanishes(self):
        with pytest.raises(FrontVanishedError):
            redistance(LevelSetField(np.ones((8, 8))))

    def test_segments_approximate_perimeter(self):
        segments = front_segments(circle_field(size=96, cx=48, cy=48, r=30))
        assert segments.length == pytest.approx(2 * np.pi * 30, rel=0.02)


class TestNarrowBand:
    def test_band_contains_front_and_near_pixels(self, disk_phi):
        band = narrow_band(disk_phi, 3.0)
        mask = band.mask
        assert mask[front_pixels(disk_phi)].all()
        assert np.array_equal(mask, (np.abs(disk_phi.phi) <= 3.0) | front_pixels(disk_phi))
        assert len(band) == int(mask.sum())

    def test_minimum_width(self, disk_phi):
        with pytest.raises(ValueError, match=">= 2"):
            narrow_band(disk_phi, 1.0)
