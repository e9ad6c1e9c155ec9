"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
``TSCHIEF_PURE_PYTHON`` environment variable is set to a non-empty value
other than ``0``, the NumPy implementation is used.  ``set_backend`` switches
at runtime (used by the tests and the benchmark).
"""

import os

from . import _pycore

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

_NAMES = (
    "pair_distance", "distance_matrix", "sfa_windows", "sfa_words",
    "histograms", "boss_distance_matrix", "boss_candidate_distances",
    "acf", "durbin_levinson",
)

BACKEND = None


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def set_backend(name):
    """Route every kernel to ``"compiled"`` or ``"python"``."""
    global BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled extension is not built")
        mod = _compiled
    elif name == "python":
        mod = _pycore
    else:
        raise ValueError(f"unknown backend {name!r}")
    for fn in _NAMES:
        globals()[fn] = getattr(mod, fn)
    BACKEND = name


_forced = os.environ.get("TSCHIEF_PURE_PYTHON", "") not in ("", "0")
set_backend("python" if _forced or _compiled is None else "compiled")
