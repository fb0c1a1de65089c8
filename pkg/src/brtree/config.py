"""Every default used by the library and the CLI, in one place.

Environment overrides (read at call time):

==================  ==========================================  =========
variable            meaning                                     default
==================  ==========================================  =========
BRTREE_ENUM_CAP     max digit words in an exhaustive oracle     2**24
BRTREE_URT_CAP      max permutations in the URT oracle          8! (n<=9)
BRTREE_WORKERS      Monte Carlo worker threads                  1
BRTREE_NO_NUMBA     "1" selects the pure-numpy kernels          unset
==================  ==========================================  =========
"""

from __future__ import annotations

import os

#: absolute tolerance on sum(p) == 1
SUM_TOL = 1e-12
#: enumerated weights / oracle tables must sum to 1 within this
WEIGHT_TOL = 1e-10
#: closed form vs oracle: relative tolerance ...
REL_TOL = 1e-9
#: ... replaced by this absolute tolerance when the exact value is below SMALL_VALUE
ABS_TOL = 1e-12
SMALL_VALUE = 1e-3
#: variances below this are reported as cancellation bugs, above it (and < 0) clamped to 0
VARIANCE_FLOOR = -1e-9

DEFAULT_ENUM_CAP = 2**24
DEFAULT_URT_CAP = 40320

#: two-sided 99% normal quantile used for confidence half-widths
Z99 = 2.576
#: samples per deterministic RNG chunk; results do not depend on the worker count
CHUNK_SIZE = 4096
#: one sample in this many gets the full structural spot-check
SPOT_CHECK_EVERY = 1024
#: KS pass threshold for the frozen-seed normality check at 10**6 samples
KS_THRESHOLD = 0.0035
#: standardized values kept for the KS test
KS_MAX_SAMPLES = 10**7

#: verification grid run by ``brtree verify``
VERIFY_NMAX = 9
VERIFY_KMAX = 3
VERIFY_UNIFORM_A = (1, 2, 3)
VERIFY_EXTRA_P = ((0.5, 0.3, 0.2),)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw, 0)
    except ValueError as exc:
        raise ValueError(f"{name}={raw!r} is not an integer") from exc


def enum_cap() -> int:
    return _env_int("BRTREE_ENUM_CAP", DEFAULT_ENUM_CAP)


def urt_cap() -> int:
    return _env_int("BRTREE_URT_CAP", DEFAULT_URT_CAP)


def default_workers() -> int:
    return max(1, _env_int("BRTREE_WORKERS", 1))


def numba_disabled() -> bool:
    return os.environ.get("BRTREE_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


def as_dict() -> dict:
    """Resolved configuration, embedded in CLI output records."""
    return {
        "sum_tol": SUM_TOL,
        "weight_tol": WEIGHT_TOL,
        "rel_tol": REL_TOL,
        "abs_tol": ABS_TOL,
        "enum_cap": enum_cap(),
        "urt_cap": urt_cap(),
        "chunk_size": CHUNK_SIZE,
        "spot_check_every": SPOT_CHECK_EVERY,
        "ks_threshold": KS_THRESHOLD,
        "numba": not numba_disabled(),
    }
