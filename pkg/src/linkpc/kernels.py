"""Kernel backend selection.

The compiled extension is used when importable; set ``LINKPC_PURE_PYTHON=1``
to force the pure-Python fallback. ``BACKEND`` names the active one.
"""

import os

from linkpc import _kernels_py

if os.environ.get("LINKPC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from linkpc import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

unit_disk_edges = _impl.unit_disk_edges
charge = _impl.charge
deliver = _impl.deliver
probe_round = _impl.probe_round
window_ratios = _impl.window_ratios
