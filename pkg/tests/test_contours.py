import json

import numpy as np
import pytest
from PIL import Image

from vpscape.contours import (
    Contour,
    ContourMap,
    fallback_edges,
    filter_edges,
    load_contour_map,
    subdivide,
    trace_contours,
)
from vpscape.errors import DimensionMismatch, FormatError
from vpscape.geometry import Edge


def draw_polyline(canvas, pts):
    """Rasterize a polyline with simple supercover stepping."""
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
        for t in np.linspace(0.0, 1.0, n + 1):
            x = int(round(x0 + t * (x1 - x0)))
            y = int(round(y0 + t * (y1 - y0)))
            canvas[y, x] = 255
    return canvas


class TestLoadContourMap:
    def test_8bit_normalization(self, tmp_path):
        arr = np.zeros((10, 12), dtype=np.uint8)
        arr[3, 4] = 255
        arr[5, 5] = 51
        Image.fromarray(arr, mode="L").save(tmp_path / "m.png")
        cmap = load_contour_map(tmp_path / "m.png")
        assert (cmap.width, cmap.height) == (12, 10)
        assert cmap.weights[3, 4] == pytest.approx(1.0)
        assert cmap.weights[5, 5] == pytest.approx(0.2)

    def test_sidecar_roundtrip_and_mismatch(self, tmp_path):
        arr = np.zeros((8, 9), dtype=np.uint8)
        Image.fromarray(arr, mode="L").save(tmp_path / "m.png")
        (tmp_path / "m.json").write_text(json.dumps({"image_id": "img7", "width": 9, "height": 8}))
        assert load_contour_map(tmp_path / "m.png").image_id == "img7"
        (tmp_path / "m.json").write_text(json.dumps({"image_id": "img7", "width": 4, "height": 8}))
        with pytest.raises(DimensionMismatch):
            load_contour_map(tmp_path / "m.png")

    def test_bad_file_rejected(self, tmp_path):
        (tmp_path / "m.png").write_text("not a png")
        with pytest.raises(FormatError):
            load_contour_map(tmp_path / "m.png")

    def test_all_zero_map_traces_nothing(self):
        cmap = ContourMap(width=30, height=30, weights=np.zeros((30, 30)))
        assert trace_contours(cmap, 0.1) == []


class TestTraceContours:
    def test_single_segment(self):
        canvas = np.zeros((40, 60), dtype=np.uint8)
        draw_polyline(canvas, [(5, 20), (50, 20)])
        cmap = ContourMap(width=60, height=40, weights=canvas / 255.0)
        contours = trace_contours(cmap, 0.1)
        assert len(contours) == 1
        assert contours[0].points.shape[0] >= 40

    def test_plus_splits_into_four(self):
        canvas = np.zeros((41, 41), dtype=np.uint8)
        draw_polyline(canvas, [(5, 20), (35, 20)])
        draw_polyline(canvas, [(20, 5), (20, 35)])
        cmap = ContourMap(width=41, height=41, weights=canvas / 255.0)
        contours = trace_contours(cmap, 0.1)
        assert len(contours) == 4

    def test_synthetic_polylines_recovered(self):
        rng = np.random.default_rng(9)
        canvas = np.zeros((200, 200), dtype=np.uint8)
        truth = [
            [(20, 30), (170, 40)],
            [(30, 160), (160, 120)],
        ]
        for pts in truth:
            draw_polyline(canvas, pts)
        cmap = ContourMap(width=200, height=200, weights=canvas / 255.0)
        contours = trace_contours(cmap, 0.1)
        assert len(contours) == len(truth)
        drawn = {(x, y) for y, x in zip(*np.nonzero(canvas))}
        covered = set()
        for ct in contours:
            covered.update((int(x), int(y)) for x, y in ct.points)
        assert len(covered & drawn) / len(drawn) >= 0.99

    def test_closed_contour_cut_open(self):
        canvas = np.zeros((60, 60), dtype=np.uint8)
        draw_polyline(canvas, [(15, 15), (45, 15), (45, 45), (15, 45), (15, 15)])
        weights = canvas / 255.0
        weights[15, 30] = 0.3  # weakest pixel on the top side
        cmap = ContourMap(width=60, height=60, weights=weights)
        contours = trace_contours(cmap, 0.1)
        assert len(contours) == 1
        pts = contours[0].points
        assert not np.array_equal(pts[0], pts[-1])

    def test_chains_node_disjoint_except_junctions(self):
        canvas = np.zeros((41, 41), dtype=np.uint8)
        draw_polyline(canvas, [(5, 20), (35, 20)])
        draw_polyline(canvas, [(20, 5), (20, 35)])
        cmap = ContourMap(width=41, height=41, weights=canvas / 255.0)
        contours = trace_contours(cmap, 0.1)
        seen = {}
        for k, ct in enumerate(contours):
            for x, y in ct.points:
                seen.setdefault((x, y), []).append(k)
        shared = {p for p, ks in seen.items() if len(ks) > 1}
        # Only the junction may be shared.
        assert shared <= {(20.0, 20.0)}


class TestSubdivide:
    def test_straight_chain_single_edge(self):
        pts = np.column_stack([np.arange(0.0, 100.0), np.zeros(100)])
        edges = subdivide(Contour.from_points(pts), alpha=0.05)
        assert len(edges) == 1
        assert edges[0].length == pytest.approx(99.0)

    def test_right_angle_splits_in_two(self):
        arm1 = np.column_stack([np.arange(0.0, 51.0), np.zeros(51)])
        arm2 = np.column_stack([np.full(50, 50.0), np.arange(1.0, 51.0)])
        pts = np.vstack([arm1, arm2])
        edges = subdivide(Contour.from_points(pts), alpha=0.05)
        assert len(edges) == 2

    def test_shallow_arc_stays_whole(self):
        # Chord 100 px on a radius-2000 circle: sagitta ~0.625 < alpha*length.
        radius, chord = 2000.0, 100.0
        half = np.arcsin(chord / (2 * radius))
        theta = np.linspace(-half, half, 120)
        pts = np.column_stack([radius * np.sin(theta), radius * (1 - np.cos(theta))])
        sagitta = radius * (1 - np.cos(half))
        assert sagitta == pytest.approx(0.625, abs=0.01)
        edges = subdivide(Contour.from_points(pts), alpha=0.05)
        assert len(edges) == 1

    def test_scale_invariant_split_indices(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(10, 80))
            pts = np.cumsum(rng.normal(0.0, 2.0, size=(n, 2)), axis=0) + 50.0
            base = [e.points.shape[0] for e in subdivide(Contour.from_points(pts), 0.05)]
            for s in (0.5, 2.0, 3.0):
                scaled = [
                    e.points.shape[0] for e in subdivide(Contour.from_points(pts * s), 0.05)
                ]
                assert scaled == base

    def test_deviation_bound_or_tiny(self):
        rng = np.random.default_rng(31)
        pts = np.cumsum(rng.normal(0.0, 3.0, size=(60, 2)), axis=0)
        contour = Contour.from_points(pts)
        for e in subdivide(contour, 0.05):
            if e.points.shape[0] < 3:
                continue
            arclen = np.sum(np.linalg.norm(np.diff(e.points, axis=0), axis=1))
            a, b = e.points[0], e.points[-1]
            ab = b - a
            t = np.clip((e.points - a) @ ab / (ab @ ab), 0, 1)
            dev = np.linalg.norm(e.points - (a + t[:, None] * ab), axis=1).max()
            assert dev <= 0.05 * arclen + 1e-9

    def test_concatenation_reconstructs_chain(self):
        rng = np.random.default_rng(13)
        pts = np.cumsum(rng.normal(0.0, 2.5, size=(50, 2)), axis=0)
        edges = subdivide(Contour.from_points(pts), 0.05)
        rebuilt = edges[0].points
        for e in edges[1:]:
            assert np.array_equal(rebuilt[-1], e.points[0])  # shared split point
            rebuilt = np.vstack([rebuilt, e.points[1:]])
        assert np.array_equal(rebuilt, pts)


class TestFilterEdges:
    def make(self, length):
        return Edge.from_points([(0.0, 0.0), (length, 0.0)])

    def test_strict_threshold(self):
        edges = [self.make(10), self.make(39), self.make(41)]
        kept = filter_edges(edges, 40.0)
        assert [e.length for e in kept] == [41.0]

    def test_zero_threshold_is_identity(self):
        edges = [self.make(10), self.make(39)]
        assert filter_edges(edges, 0.0) == edges

    def test_all_short_gives_empty(self):
        assert filter_edges([self.make(5)], 40.0) == []


class TestFallbackEdges:
    def test_road_borders_detected(self):
        h, w = 200, 300
        img = np.full((h, w), 30.0)
        # Bright wedge between two lines converging toward (150, 20).
        ys, xs = np.mgrid[0:h, 0:w]
        left = (xs - 150) * (180 - 20) - (ys - 20) * (60 - 150)
        right = (xs - 150) * (180 - 20) - (ys - 20) * (240 - 150)
        img[(left >= 0) & (right <= 0) & (ys > 40)] = 220.0
        edges = fallback_edges(img, l_min=40.0)
        assert len(edges) >= 2
        from vpscape.geometry import HPoint, d_rms

        vp = HPoint.from_xy(150.0, 20.0)
        consistent = [e for e in edges if d_rms(e, vp) <= 5.0]
        assert len(consistent) >= 2

    def test_constant_image_yields_nothing(self):
        assert fallback_edges(np.full((100, 100), 77.0)) == []

    def test_output_edges_are_valid(self):
        rng = np.random.default_rng(2)
        img = np.zeros((150, 150))
        img[40:, 60:] = 200.0
        img += rng.normal(0, 2.0, size=img.shape)
        for e in fallback_edges(img, l_min=20.0):
            assert e.points.shape[0] >= 2
            steps = np.linalg.norm(np.diff(e.points, axis=0), axis=1)
            assert e.length == pytest.approx(float(steps.sum()))
