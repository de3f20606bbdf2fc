"""Hot-loop kernels with a compiled fast path and a pure-Python fallback.

The backend is picked once at import: the Cython extension when it built,
otherwise the pure twins. Set EDGESCHED_PURE_KERNELS=1 to force the pure
backend (used by the cross-backend equivalence tests and the benchmark).
Both backends produce bit-identical results; traces do not depend on which
one is active.
"""

import os

from . import pure

if os.environ.get("EDGESCHED_PURE_KERNELS"):
    _impl = pure
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure

BACKEND = _impl.BACKEND
score_update = _impl.score_update
hsv_scale_rgb = _impl.hsv_scale_rgb
rgb_to_hsv_px = _impl.rgb_to_hsv_px
hsv_to_rgb_px = _impl.hsv_to_rgb_px


def available_backends():
    """Names of importable backends, pure first."""
    names = ["pure"]
    try:
        from . import _native  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("native")
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ('pure' or 'native')."""
    if name == "pure":
        return pure
    if name == "native":
        from . import _native
        return _native
    raise ValueError(f"unknown kernel backend: {name!r}")
