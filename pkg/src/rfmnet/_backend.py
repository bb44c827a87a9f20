"""Kernel backend selection.

The compiled extension is preferred; the pure NumPy/SciPy twin is used when
the extension is missing or when the environment variable RFMNET_PURE_PYTHON
is set to a non-empty value other than "0". All modules access the kernels
through the ``kernels`` attribute of this module so tests can swap backends.
"""

import os

if os.environ.get("RFMNET_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        COMPILED = False
