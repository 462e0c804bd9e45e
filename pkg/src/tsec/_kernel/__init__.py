"""Gibbs-sweep kernel backends.

The compiled extension is preferred when present; the pure-numpy fallback
implements the same sweep and is always importable. Set TSEC_KERNEL=python
to force the fallback. Both backends expose

    gibbs_sweep(x_arms, trial_arm, y, xtx, prior_prec, beta, z_out, rng)

which draws one truncated-normal latent per trial and then redraws beta
from its Gaussian full conditional, updating `beta` and `z_out` in place.
"""

import os

from . import pure

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _speedups is not None else [])


def get_backend(name: str = "auto"):
    if name == "auto":
        if os.environ.get("TSEC_KERNEL") == "python" or _speedups is None:
            name = "python"
        else:
            name = "cython"
    if name == "python":
        return pure
    if name == "cython":
        if _speedups is None:
            raise RuntimeError("compiled kernel not available; reinstall with a C compiler")
        return _speedups
    raise ValueError(f"unknown kernel backend {name!r}")
