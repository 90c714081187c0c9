"""Tests for mask overlap scores and trace summaries."""

import numpy as np
import pytest

from engine import TraceRow
from metrics import dice, jaccard, score_masks, summarize_trace


def _square(x0, x1, size=10):
    mask = np.zeros((size, size), dtype=bool)
    mask[x0:x1, x0:x1] = True
    return mask


def test_identical_masks():
    mask = _square(2, 6)
    assert dice(mask, mask) == 1.0
    assert jaccard(mask, mask) == 1.0


def test_disjoint_masks():
    a = _square(0, 2)
    b = _square(5, 8)
    assert dice(a, b) == 0.0
    assert jaccard(a, b) == 0.0


def test_partial_overlap():
    a = np.zeros((4, 4), dtype=bool)
    b = np.zeros((4, 4), dtype=bool)
    a[0, :2] = True
    b[0, 1:3] = True
    assert dice(a, b) == pytest.approx(0.5)
    assert jaccard(a, b) == pytest.approx(1 / 3)


def test_both_empty_agree():
    empty = np.zeros((5, 5), dtype=bool)
    assert dice(empty, empty) == 1.0
    assert jaccard(empty, empty) == 1.0


def test_shape_mismatch():
    with pytest.raises(ValueError, match="Mask shapes differ"):
        dice(np.zeros((3, 3)), np.zeros((4, 4)))


def test_score_counts_flips():
    a = _square(2, 6)
    b = _square(2, 5)
    score = score_masks(a, b)
    assert score.flipped_pixels == 16 - 9
    assert score.dice == pytest.approx(2 * 9 / 25)


def test_summarize_trace():
    trace = [
        TraceRow(0, -0.1, 0.6, 0.2, 300, True),
        TraceRow(1, -0.4, 0.9, 0.1, 250),
        TraceRow(2, -0.3, 0.95, 0.05, 240),
    ]
    summary = summarize_trace(trace, iterations=3)
    assert summary.iterations == 3
    assert summary.initial_energy == -0.1
    assert summary.min_energy == -0.4
    assert summary.final_energy == -0.3
    assert (summary.final_mu1, summary.final_mu2) == (0.95, 0.05)
    assert summary.final_area_in == 240


def test_summarize_empty_trace():
    summary = summarize_trace([])
    assert summary.iterations == 0
    assert summary.final_energy is None
