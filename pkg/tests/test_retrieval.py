import numpy as np
import pytest

from vpscape.errors import (
    DimensionMismatchFeature,
    EmptyIndex,
    FormatError,
    LevelMismatch,
    PointOutOfFrame,
    VersionMismatch,
)
from vpscape.geometry import Edge, HPoint
from vpscape.retrieval import (
    ImageRecord,
    PyramidHistogram,
    RetrievalIndex,
    RetrievalParams,
    SemanticFeature,
    build_pyramid,
    histogram_intersection,
    load_index,
    perspective_similarity,
    pyramid_match,
    query,
    save_index,
    total_similarity,
)
from vpscape.selection import VPDetection

from oracles import naive_bincount, pyramid_match_newmatch


def rand_pyramid(rng, n, width=500, height=400, L=4):
    pts = np.column_stack(
        [rng.uniform(0, width, size=n), rng.uniform(0, height, size=n)]
    )
    return build_pyramid(pts, width, height, L)


class TestBuildPyramid:
    def test_counts_match_naive_binning(self):
        rng = np.random.default_rng(1)
        pts = np.column_stack([rng.uniform(0, 500, 300), rng.uniform(0, 400, 300)])
        h = build_pyramid(pts, 500, 400, 5)
        for l in range(6):
            assert np.array_equal(h.levels[l], naive_bincount(pts, 500, 400, l))

    def test_boundary_points_clamp(self):
        pts = [(500.0, 400.0), (0.0, 0.0)]
        h = build_pyramid(pts, 500, 400, 2)
        assert h.levels[2][3, 3] == 1
        assert h.levels[2][0, 0] == 1
        assert h.total_points == 2

    def test_out_of_frame_rejected(self):
        with pytest.raises(PointOutOfFrame):
            build_pyramid([(501.0, 10.0)], 500, 400, 2)
        with pytest.raises(PointOutOfFrame):
            build_pyramid([(10.0, -0.5)], 500, 400, 2)

    def test_level_totals_preserved(self):
        rng = np.random.default_rng(2)
        h = rand_pyramid(rng, 123)
        for lvl in h.levels:
            assert lvl.sum() == 123


class TestPyramidMatch:
    def test_matches_newmatch_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            hi = rand_pyramid(rng, int(rng.integers(1, 200)))
            hj = rand_pyramid(rng, int(rng.integers(1, 200)))
            assert pyramid_match(hi, hj) == pytest.approx(
                pyramid_match_newmatch(hi, hj), abs=1e-12
            )

    def test_self_match_is_point_count(self):
        rng = np.random.default_rng(4)
        for n in (1, 17, 250):
            h = rand_pyramid(rng, n)
            assert pyramid_match(h, h) == pytest.approx(float(n), abs=1e-12)

    def test_two_point_corner_case(self):
        # Two points in opposite corners match only at level 0, scoring
        # 1 / 2^L with L = 1.
        ha = build_pyramid([(10.0, 10.0)], 500, 400, 1)
        hb = build_pyramid([(490.0, 390.0)], 500, 400, 1)
        assert pyramid_match(ha, hb) == pytest.approx(0.5)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        hi, hj = rand_pyramid(rng, 80), rand_pyramid(rng, 120)
        assert pyramid_match(hi, hj) == pytest.approx(pyramid_match(hj, hi), abs=0)

    def test_finer_colocation_scores_higher(self):
        # Same level-0 overlap, but co-located points earn more than
        # spread-out ones.
        close = build_pyramid([(10.0, 10.0), (12.0, 11.0)], 500, 400, 3)
        far = build_pyramid([(480.0, 390.0), (12.0, 11.0)], 500, 400, 3)
        probe = build_pyramid([(11.0, 10.5), (13.0, 12.0)], 500, 400, 3)
        assert pyramid_match(close, probe) > pyramid_match(far, probe)

    def test_incompatible_depths_rejected(self):
        rng = np.random.default_rng(6)
        hi = rand_pyramid(rng, 10, L=3)
        hj = rand_pyramid(rng, 10, L=4)
        with pytest.raises(LevelMismatch):
            pyramid_match(hi, hj)
        with pytest.raises(LevelMismatch):
            histogram_intersection(hi, hi, 9)


class TestSemanticFeature:
    def test_normalized(self):
        f = SemanticFeature.from_array([3.0, 4.0])
        assert np.allclose(f.vector, [0.6, 0.8])

    def test_rejects_zero_and_nonfinite(self):
        with pytest.raises(FormatError):
            SemanticFeature.from_array([0.0, 0.0])
        with pytest.raises(FormatError):
            SemanticFeature.from_array([1.0, np.nan])


def make_record(rid, vp_xy, feat, seed=0, width=500, height=400, L=4, n_pts=40):
    rng = np.random.default_rng(seed)
    pts = np.column_stack(
        [rng.uniform(0, width, n_pts), rng.uniform(0, height, n_pts)]
    )
    det = None
    if vp_xy is not None:
        det = VPDetection(
            vp=HPoint.from_xy(*vp_xy), edges=[Edge.from_points(pts)], strength=200.0
        )
    return ImageRecord.build(rid, width, height, feat, dominant=det, L=L)


class TestSimilarity:
    params = RetrievalParams(gamma1=0.5, gamma2=0.5, L=4, len=500)

    def test_identical_records_maximal(self):
        a = make_record("a", (250.0, 200.0), [1.0, 0.0], seed=7)
        assert perspective_similarity(a, a, self.params) == pytest.approx(1.0)
        assert total_similarity(a, a, self.params) == pytest.approx(2.0)

    def test_missing_dominant_gives_zero_perspective(self):
        a = make_record("a", (250.0, 200.0), [1.0, 0.0], seed=7)
        b = make_record("b", None, [1.0, 0.0], seed=8)
        assert perspective_similarity(a, b, self.params) == 0.0
        assert total_similarity(a, b, self.params) == pytest.approx(1.0)

    def test_vp_distance_term(self):
        a = make_record("a", (100.0, 100.0), [1.0, 0.0], seed=1)
        near = make_record("b", (150.0, 100.0), [1.0, 0.0], seed=1)
        far = make_record("c", (100.0, 700.0), [1.0, 0.0], seed=1)
        # Same pyramids (same seed), so only the distance term differs.
        assert perspective_similarity(a, near, self.params) - perspective_similarity(
            a, far, self.params
        ) == pytest.approx(0.5 * (1.0 - 50.0 / 500.0))

    def test_symmetric(self):
        rng = np.random.default_rng(9)
        a = make_record("a", (200.0, 150.0), rng.normal(size=8), seed=2)
        b = make_record("b", (260.0, 220.0), rng.normal(size=8), seed=3)
        assert total_similarity(a, b, self.params) == pytest.approx(
            total_similarity(b, a, self.params), abs=1e-12
        )

    def test_raw_kernel_mode(self):
        raw = RetrievalParams(gamma1=0.0, gamma2=1.0, L=4, len=500, raw_kernel=True)
        a = make_record("a", (250.0, 200.0), [1.0, 0.0], seed=4)
        assert perspective_similarity(a, a, raw) == pytest.approx(40.0)

    def test_feature_dim_mismatch(self):
        a = make_record("a", None, [1.0, 0.0], seed=5)
        b = make_record("b", None, [1.0, 0.0, 0.0], seed=6)
        with pytest.raises(DimensionMismatchFeature):
            total_similarity(a, b, self.params)


class TestQuery:
    def build_index(self, n=12):
        params = RetrievalParams(L=3)
        idx = RetrievalIndex(params=params)
        rng = np.random.default_rng(20)
        for i in range(n):
            idx.add(
                make_record(
                    f"img{i:02d}",
                    (float(rng.uniform(100, 400)), float(rng.uniform(100, 300))),
                    rng.normal(size=6),
                    seed=100 + i,
                    L=3,
                )
            )
        return idx

    def test_matches_linear_scan(self):
        idx = self.build_index()
        q = idx.records[4]
        got = query(idx, q, k=5)
        scored = sorted(
            ((r.id, total_similarity(q, r, idx.params)) for r in idx.records),
            key=lambda t: (-t[1], t[0]),
        )
        assert got == scored[:5]

    def test_self_ranks_first(self):
        idx = self.build_index()
        q = idx.records[7]
        assert query(idx, q, k=1)[0][0] == q.id

    def test_exclude_self(self):
        idx = self.build_index()
        q = idx.records[2]
        ids = [i for i, _ in query(idx, q, k=len(idx.records), exclude_self=True)]
        assert q.id not in ids
        assert len(ids) == len(idx.records) - 1

    def test_empty_index(self):
        idx = RetrievalIndex(params=RetrievalParams())
        with pytest.raises(EmptyIndex):
            query(idx, make_record("q", None, [1.0], seed=0), k=3)


class TestPersistence:
    def test_round_trip_preserves_scores(self, tmp_path):
        idx = TestQuery().build_index(n=6)
        save_index(idx, tmp_path / "idx.json")
        loaded = load_index(tmp_path / "idx.json")
        q0, q1 = idx.records[1], loaded.records[1]
        for r0, r1 in zip(idx.records, loaded.records):
            assert r0.id == r1.id
            assert total_similarity(q0, r0, idx.params) == pytest.approx(
                total_similarity(q1, r1, loaded.params), abs=1e-12
            )

    def test_round_trip_bytes_deterministic(self, tmp_path):
        idx = TestQuery().build_index(n=4)
        save_index(idx, tmp_path / "a.json")
        save_index(load_index(tmp_path / "a.json"), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_version_mismatch(self, tmp_path):
        import json

        (tmp_path / "bad1.json").write_text(json.dumps({"format": "other"}))
        with pytest.raises(VersionMismatch):
            load_index(tmp_path / "bad1.json")
        (tmp_path / "bad2.json").write_text(
            json.dumps({"format": "vpscape-index", "version": 99})
        )
        with pytest.raises(VersionMismatch):
            load_index(tmp_path / "bad2.json")
        (tmp_path / "bad3.json").write_text("{not json")
        with pytest.raises(FormatError):
            load_index(tmp_path / "bad3.json")
