from __future__ import annotations

import logging
import os
from enum import Enum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Any

    from .types import SolverConfig


logger = logging.getLogger(__name__)

ENV_TOLERANCE = "RESERVEFLOW_SOLVER_TOL"
DEFAULT_TOLERANCE = 1e-8
IDENTITY_TOLERANCE = 1e-6
DEGENERACY_THRESHOLD = 1e-7
MAX_ITERATIONS = 100_000


class SolverMethod(Enum):
    IPM = "highs-ipm"
    """Interior point with crossover to a basic solution."""
    SIMPLEX = "highs-ds"
    """Dual simplex."""
    AUTO = "highs"
    """Let HiGHS pick the algorithm."""


def default_config(**overrides: Any) -> SolverConfig:
    """Build a solver configuration.

    The tolerance comes from ``RESERVEFLOW_SOLVER_TOL`` when set, keyword
    overrides win over both.
    """
    tolerance = DEFAULT_TOLERANCE
    raw = os.environ.get(ENV_TOLERANCE)
    if raw:
        try:
            tolerance = float(raw)
        except ValueError:
            logger.warning(f"Ignoring non-numeric {ENV_TOLERANCE}={raw!r}")

    config: SolverConfig = {
        "tolerance": tolerance,
        "identity_tolerance": IDENTITY_TOLERANCE,
        "degeneracy_threshold": DEGENERACY_THRESHOLD,
        "method": SolverMethod.IPM,
        "scale": True,
        "presolve": True,
        "max_iterations": MAX_ITERATIONS,
    }
    config.update(overrides)  # type: ignore[typeddict-item]
    config["method"] = SolverMethod(config["method"])
    return config
