"""DC shift factors for the base topology and each contingency scenario.

Flows follow the line orientation ``from_bus -> to_bus``: a positive entry
of ``S @ injection`` is power leaving ``from_bus``. The slack bus column of
every shift factor matrix is zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _components

from .exceptions import IslandedNetworkError

if TYPE_CHECKING:
    from .model import MarketCase
    from .types import FloatArray, IntArray


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseAngleSystem:
    susceptance: FloatArray
    """Nodal susceptance matrix ``B`` including the slack row and column."""
    branch: FloatArray
    """Branch flow matrix ``F`` mapping bus angles to line flows."""
    slack_bus: int

    @property
    def non_slack(self) -> IntArray:
        buses = np.arange(self.susceptance.shape[0])
        return buses[buses != self.slack_bus]

    def reduced(self) -> FloatArray:
        keep = self.non_slack
        return self.susceptance[np.ix_(keep, keep)]

    def angles(self, injection: FloatArray) -> FloatArray:
        """Solve ``B theta = injection`` with the slack angle pinned at zero."""
        theta = np.zeros(self.susceptance.shape[0])
        keep = self.non_slack
        theta[keep] = np.linalg.solve(self.reduced(), injection[keep])
        return theta


@dataclass(frozen=True)
class Topology:
    """Shift factors and thermal limits of one network state."""

    label: str
    shift_factors: FloatArray
    capacity: FloatArray


@dataclass(frozen=True)
class NetworkModel:
    base: Topology
    scenarios: tuple[Topology, ...]

    def topology(self, k: int | None) -> Topology:
        return self.base if k is None else self.scenarios[k]


def incidence_matrix(case: MarketCase) -> FloatArray:
    """Line-by-bus incidence, +1 at the from bus and -1 at the to bus."""
    incidence = np.zeros((case.n_lines, case.n_buses))
    for line in case.lines:
        incidence[line.id, line.from_bus] = 1.0
        incidence[line.id, line.to_bus] = -1.0
    return incidence


def remaining_circuits(case: MarketCase, k: int | None = None) -> IntArray:
    circuits = np.array([line.parallel_count for line in case.lines], dtype=np.int64)
    if k is not None:
        for outage in case.scenarios[k].outaged_lines:
            circuits[outage.line] -= outage.circuits
    return np.maximum(circuits, 0)


def branch_parameters(case: MarketCase, k: int | None = None) -> tuple[FloatArray, FloatArray]:
    """Series susceptance and thermal limit of every line in a topology.

    Losing circuits of a parallel group scales the equivalent reactance by
    ``count / remaining`` and the limit by ``remaining / count``. Scenario
    limits are further raised by the scenario's exceed rate.
    """
    count = np.array([line.parallel_count for line in case.lines], dtype=float)
    reactance = np.array([line.reactance for line in case.lines], dtype=float)
    capacity = np.array([line.capacity for line in case.lines], dtype=float)
    if k is None:
        return 1.0 / reactance, capacity

    share = remaining_circuits(case, k) / count
    exceed_rate = case.scenarios[k].exceed_rate
    return share / reactance, capacity * share * exceed_rate


def phase_angle_system(case: MarketCase, k: int | None = None) -> PhaseAngleSystem:
    susceptance, _ = branch_parameters(case, k)
    incidence = incidence_matrix(case)
    branch = susceptance[:, None] * incidence
    return PhaseAngleSystem(
        susceptance=incidence.T @ branch,
        branch=branch,
        slack_bus=case.slack_bus,
    )


def connected_components(case: MarketCase, k: int | None = None) -> IntArray:
    """Component label of every bus over the in-service lines of a topology."""
    in_service = remaining_circuits(case, k) > 0
    lines = [line for line in case.lines if in_service[line.id]]
    adjacency = coo_matrix(
        (
            np.ones(len(lines)),
            ([line.from_bus for line in lines], [line.to_bus for line in lines]),
        ),
        shape=(case.n_buses, case.n_buses),
    )
    _, labels = _components(adjacency, directed=False)
    return np.asarray(labels, dtype=np.int64)


def _check_connected(case: MarketCase, k: int | None) -> None:
    labels = connected_components(case, k)
    islanded = np.flatnonzero(labels != labels[case.slack_bus])
    if islanded.size:
        label = "base" if k is None else case.scenarios[k].label
        raise IslandedNetworkError(islanded.tolist(), scenario=label)


def shift_factor_matrix(system: PhaseAngleSystem) -> FloatArray:
    """``F B^-1`` with the slack row and column of ``B^-1`` held at zero."""
    keep = system.non_slack
    shift = np.zeros_like(system.branch)
    if keep.size:
        shift[:, keep] = np.linalg.solve(system.reduced(), system.branch[:, keep].T).T
    return shift


def base_shift_factors(case: MarketCase) -> FloatArray:
    _check_connected(case, None)
    return shift_factor_matrix(phase_angle_system(case))


def scenario_shift_factors(case: MarketCase, k: int) -> tuple[FloatArray, FloatArray]:
    """Shift factors and thermal limits of scenario ``k``."""
    _check_connected(case, k)
    _, capacity = branch_parameters(case, k)
    return shift_factor_matrix(phase_angle_system(case, k)), capacity


def build_network(case: MarketCase) -> NetworkModel:
    """Shift factors of the base topology and of every scenario."""
    _, capacity = branch_parameters(case)
    base = Topology("base", base_shift_factors(case), capacity)

    scenarios = []
    for k, scenario in enumerate(case.scenarios):
        if not scenario.outaged_lines and scenario.exceed_rate == 1.0:
            scenarios.append(Topology(scenario.label, base.shift_factors, capacity))
            continue
        shift, limits = scenario_shift_factors(case, k)
        scenarios.append(Topology(scenario.label, shift, limits))
    logger.debug(f"Built shift factors for {len(scenarios) + 1} topologies")
    return NetworkModel(base=base, scenarios=tuple(scenarios))


def line_flows(shift_factors: FloatArray, injection: FloatArray) -> FloatArray:
    return shift_factors @ injection
