import numpy as np
import pytest

from vpscape import kernels
from vpscape.kernels import _impl_py
from vpscape.geometry import Edge, HPoint, d_rms, edge_moments

from oracles import naive_strength

try:
    from vpscape.kernels import _ext
except ImportError:
    _ext = None

BACKENDS = [("python", _impl_py)] + ([("compiled", _ext)] if _ext else [])


@pytest.fixture
def random_edges():
    rng = np.random.default_rng(42)
    return [
        Edge.from_points(rng.uniform(0.0, 500.0, size=(int(rng.integers(5, 60)), 2)))
        for _ in range(12)
    ]


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_drms_matrix_matches_scalar(name, impl, random_edges):
    rng = np.random.default_rng(1)
    vps = rng.uniform(-300.0, 800.0, size=(9, 2))
    moments = np.array([e.moments for e in random_edges])
    mat = impl.drms_matrix(moments, vps)
    for i, e in enumerate(random_edges):
        for j, v in enumerate(vps):
            assert mat[i, j] == pytest.approx(d_rms(e, HPoint.from_xy(*v)), abs=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_drms_ideal_matches_scalar(name, impl, random_edges):
    rng = np.random.default_rng(2)
    angles = rng.uniform(0.0, np.pi, size=5)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    moments = np.array([e.moments for e in random_edges])
    mat = impl.drms_matrix_ideal(moments, dirs)
    for i, e in enumerate(random_edges):
        for j, d in enumerate(dirs):
            ideal = HPoint.from_array([d[0], d[1], 0.0])
            assert mat[i, j] == pytest.approx(d_rms(e, ideal), abs=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_strength_matches_naive(name, impl, random_edges):
    total = sum(impl.strength_sum(e.points, 210.0, 170.0, 100.0) for e in random_edges)
    assert total == pytest.approx(naive_strength(random_edges, 210.0, 170.0, 100.0), abs=1e-9)


@pytest.mark.skipif(_ext is None, reason="compiled extension not built")
def test_backends_agree_bitwise(random_edges):
    rng = np.random.default_rng(3)
    vps = rng.uniform(-500.0, 1000.0, size=(20, 2))
    moments = np.array([e.moments for e in random_edges])
    a = _impl_py.drms_matrix(moments, vps)
    b = _ext.drms_matrix(moments, vps)
    assert np.array_equal(a, b)
    angles = rng.uniform(0.0, np.pi, size=7)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    assert np.array_equal(
        _impl_py.drms_matrix_ideal(moments, dirs), _ext.drms_matrix_ideal(moments, dirs)
    )


def test_selected_backend_exports():
    assert kernels.BACKEND in ("python", "compiled")
    m = edge_moments(np.array([[0.0, 0.0], [4.0, 0.0]]))
    assert kernels.drms_matrix(m[None, :], np.array([[2.0, 3.0]])).shape == (1, 1)
