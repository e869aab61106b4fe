"""Flight kernel backend selection.

Imports the compiled Cython kernel when available, otherwise the pure-Python
twin. Set SEASCAN_PURE_PY=1 to force the fallback (the benchmark in
benchmarks/bench_kernel.py compares both directly).
"""

import os

if os.environ.get("SEASCAN_PURE_PY"):
    from seascan.kernel import _flight_py as _impl
    BACKEND = "python"
else:
    try:
        from seascan.kernel import _flight_cy as _impl
        BACKEND = "cython"
    except ImportError:
        from seascan.kernel import _flight_py as _impl
        BACKEND = "python"

GRAVITY = _impl.GRAVITY
wrap_pi = _impl.wrap_pi
pid_step = _impl.pid_step
fw_step = _impl.fw_step
heading_law = _impl.heading_law
orbit_heading = _impl.orbit_heading
uav_tick = _impl.uav_tick
