from __future__ import annotations

from typing import Any, Literal, TypedDict, Union

import numpy as np
import numpy.typing as npt

from .config import SolverMethod

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
Document = dict[str, Any]
ResourceKind = Literal["g", "r_up", "r_down", "d"]
Realization = Union[int, None]


class SolverConfig(TypedDict):
    tolerance: float
    identity_tolerance: float
    degeneracy_threshold: float
    method: SolverMethod
    scale: bool
    presolve: bool
    max_iterations: int


class FixedResource(TypedDict):
    g: float
    r_up: float
    r_down: float


class CalibrationRecord(TypedDict):
    capacity: float
    exceed_rate: float
    shed_price: float
    load_buses: list[int]
    redispatch_pricing: str
    quantity_residual: float
    price_residual: float
    within_tolerance: bool
