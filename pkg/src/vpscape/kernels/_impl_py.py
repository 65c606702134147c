"""Pure-numpy implementations of the hot kernels.

These mirror the compiled extension exactly; the package selects one of
the two backends at import time (see ``vpscape.kernels``).
"""

import numpy as np


def drms_matrix(moments, vps):
    """RMS edge/VP consistency for all (edge, finite VP) pairs.

    Args:
        moments: (E, 6) array of per-edge (n, cx, cy, sxx, sxy, syy).
        vps: (M, 2) array of finite VP pixel locations.

    Returns:
        (E, M) array of D_RMS values.
    """
    moments = np.asarray(moments, dtype=float)
    vps = np.asarray(vps, dtype=float)
    n = moments[:, 0][:, None]
    ux = moments[:, 1][:, None] - vps[None, :, 0]
    uy = moments[:, 2][:, None] - vps[None, :, 1]
    sxx = moments[:, 3][:, None]
    sxy = moments[:, 4][:, None]
    syy = moments[:, 5][:, None]
    tr = sxx + syy + n * (ux * ux + uy * uy)
    det_c = sxx * syy - sxy * sxy
    det = det_c + n * (syy * ux * ux - 2.0 * sxy * ux * uy + sxx * uy * uy)
    det = np.maximum(det, 0.0)
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    lam = np.divide(2.0 * det, tr + disc, out=np.zeros_like(det), where=tr > 0.0)
    return np.sqrt(np.maximum(lam, 0.0) / n)


def drms_matrix_ideal(moments, dirs):
    """RMS consistency for all (edge, ideal VP) pairs.

    Args:
        moments: (E, 6) per-edge moments as in :func:`drms_matrix`.
        dirs: (M, 2) unit direction vectors of the ideal VPs.

    Returns:
        (E, M) array of D_RMS values.
    """
    moments = np.asarray(moments, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    nx = -dirs[None, :, 1]
    ny = dirs[None, :, 0]
    n = moments[:, 0][:, None]
    var = (
        moments[:, 3][:, None] * nx * nx
        + 2.0 * moments[:, 4][:, None] * nx * ny
        + moments[:, 5][:, None] * ny * ny
    ) / n
    return np.sqrt(np.maximum(var, 0.0))


def strength_sum(pixels, vx, vy, tau):
    """Sum of inverse (distance-to-VP + tau) over a pixel array."""
    pixels = np.asarray(pixels, dtype=float)
    if pixels.size == 0:
        return 0.0
    d = np.hypot(pixels[:, 0] - vx, pixels[:, 1] - vy)
    return float(np.sum(1.0 / (d + tau)))
