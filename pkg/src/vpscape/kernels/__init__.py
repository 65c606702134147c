"""Hot numeric kernels with backend selection at import.

The compiled extension is preferred; the numpy implementation is used when
the extension is not built or when ``VPSCAPE_NO_EXT`` is set (useful for
benchmarking the two against each other, see ``benchmarks/``).
"""

import os

if os.environ.get("VPSCAPE_NO_EXT"):
    from . import _impl_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _ext as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _impl_py as _impl

        BACKEND = "python"

drms_matrix = _impl.drms_matrix
drms_matrix_ideal = _impl.drms_matrix_ideal
strength_sum = _impl.strength_sum

__all__ = ["BACKEND", "drms_matrix", "drms_matrix_ideal", "strength_sum"]
