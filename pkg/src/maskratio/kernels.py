"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when
``MASKRATIO_PURE_PYTHON=1`` is set, the numpy implementation is used.
"""
import os

from . import _kernels_py

GINI = _kernels_py.GINI
ENTROPY = _kernels_py.ENTROPY

_compiled = None
if os.environ.get("MASKRATIO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"

best_class_split = _impl.best_class_split
best_gradient_split = _impl.best_gradient_split
smo = _impl.smo
logistic_gd = _impl.logistic_gd


def backends():
    """Mapping of available backend name -> module, for tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
