"""Greedy-suppression kernel selection.

The compiled Cython kernel is preferred when it was built; the pure-Python
kernel is the fallback and is also forced by setting the environment variable
``PRUNESID_PURE_PYTHON`` to a non-empty value (useful for benchmarking and
debugging). Both kernels consume the same precomputed similarity block, so
they make bit-identical keep/suppress decisions.
"""

import logging
import os

from . import _nms_py

try:
    from . import _nms_cy

    HAVE_COMPILED = True
except ImportError:
    _nms_cy = None
    HAVE_COMPILED = False

_force_py = os.environ.get("PRUNESID_PURE_PYTHON", "") not in ("", "0")
ACTIVE = "python" if (_force_py or not HAVE_COMPILED) else "compiled"
_impl = _nms_py if ACTIVE == "python" else _nms_cy

greedy_nms_block = _impl.greedy_nms_block

logging.getLogger(__name__).debug("suppression kernel: %s", ACTIVE)
