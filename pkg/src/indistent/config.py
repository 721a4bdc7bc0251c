"""Numerical tolerances and limits.

The validation tolerance can be overridden through the ``INDISTENT_TOL``
environment variable; everything else is a module constant.
"""

import os

from .errors import ValidationError

TOL_ENV_VAR = "INDISTENT_TOL"

#: orthonormality / idempotency / sector-membership checks
DEFAULT_TOL = 1e-10
#: unitarity of sampled matrices
UNITARITY_TOL = 1e-12
#: a state is separable when every block purity is at least ``1 - SEPARABILITY_TOL``
SEPARABILITY_TOL = 1e-8
#: squared-norm threshold below which the observable part counts as absent
ZERO_WEIGHT = 1e-24
#: maximum number of entries of a state vector (n**N)
DIM_CAP = 10**7
#: largest N for which all N! permutations are enumerated
MAX_PARTICLES = 10


def default_tol():
    """Validation tolerance, honouring ``INDISTENT_TOL`` when set."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValidationError(f"{TOL_ENV_VAR}={raw!r} is not a number") from exc
    if not value > 0:
        raise ValidationError(f"{TOL_ENV_VAR} must be positive, got {value}")
    return value
