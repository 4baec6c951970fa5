"""Series-kernel backend selection.

The compiled Cython kernels are preferred when the extension built;
otherwise the numpy fallback is used.  QUADRHO_KERNELS=python|cython
forces a backend (the cython value raises if the extension is missing,
so CI can assert the build happened).
"""

import os

from . import _pykernels

_forced = os.environ.get("QUADRHO_KERNELS", "").lower()

if _forced == "python":
    _impl = _pykernels
elif _forced == "cython":
    from . import _series_cy as _impl
else:
    try:
        from . import _series_cy as _impl
    except ImportError:
        _impl = _pykernels

exp_quadratic_scaled = _impl.exp_quadratic_scaled
rho_from_series = _impl.rho_from_series
backend = _impl.backend


def available_backends():
    out = {"numpy": _pykernels}
    try:
        from . import _series_cy

        out["cython"] = _series_cy
    except ImportError:
        pass
    return out
