"""Market case data model.

A :class:`MarketCase` bundles the network, the day-ahead offers and the
contingency scenarios. Records are immutable; derive variants with
:meth:`MarketCase.with_updates`. Structural validity is checked by
:func:`validate_case`, not by the constructors, so that an invalid case can
still be loaded and reported on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from .ptdf import connected_components

if TYPE_CHECKING:
    from typing import Any

    from .types import FloatArray, IntArray


logger = logging.getLogger(__name__)

NEAR_ZERO_BASE_WEIGHT = 1e-3


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Bus(_Record):
    id: int
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or f"Bus{self.id + 1}"


class Line(_Record):
    id: int
    from_bus: int
    to_bus: int
    reactance: float
    """Equivalent reactance of all parallel circuits, per unit."""
    capacity: float
    """Day-ahead thermal limit of all parallel circuits, MW."""
    parallel_count: int = 1
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or f"L{self.id + 1}"


class Generator(_Record):
    id: int
    bus: int
    g_min: float
    g_max: float
    ru_max: float
    rd_max: float
    c_energy: float
    c_ru: float
    c_rd: float
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or f"G{self.id + 1}"


class Load(_Record):
    id: int
    bus: int
    base_demand: float
    c_shed: float
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or f"d{self.id + 1}"


class LineOutage(_Record):
    line: int
    circuits: int = 1


class Scenario(_Record):
    id: int
    probability: float
    load_fluctuation: tuple[float, ...]
    c_redispatch_up: tuple[float, ...]
    c_redispatch_down: tuple[float, ...]
    outaged_lines: tuple[LineOutage, ...] = ()
    exceed_rate: float = 1.0
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or f"S{self.id + 1}"


class MarketCase(_Record):
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    scenarios: tuple[Scenario, ...] = ()
    slack_bus: int = 0
    name: str = ""

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @property
    def n_loads(self) -> int:
        return len(self.loads)

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def generator_buses(self) -> IntArray:
        return np.array([gen.bus for gen in self.generators], dtype=np.int64)

    @property
    def load_buses(self) -> IntArray:
        return np.array([load.bus for load in self.loads], dtype=np.int64)

    @property
    def demand(self) -> FloatArray:
        return np.array([load.base_demand for load in self.loads], dtype=float)

    @property
    def total_probability(self) -> float:
        return float(sum(scenario.probability for scenario in self.scenarios))

    def generator_column(self, attribute: str) -> FloatArray:
        return np.array(
            [getattr(gen, attribute) for gen in self.generators], dtype=float
        )

    def load_column(self, attribute: str) -> FloatArray:
        return np.array([getattr(load, attribute) for load in self.loads], dtype=float)

    def generator_incidence(self) -> FloatArray:
        """Bus-by-generator 0/1 placement matrix."""
        incidence = np.zeros((self.n_buses, self.n_generators))
        incidence[self.generator_buses, np.arange(self.n_generators)] = 1.0
        return incidence

    def load_incidence(self) -> FloatArray:
        incidence = np.zeros((self.n_buses, self.n_loads))
        incidence[self.load_buses, np.arange(self.n_loads)] = 1.0
        return incidence

    def scenario(self, key: int | str) -> Scenario:
        """Look up a scenario by position or label."""
        from .exceptions import UnknownScenarioError

        if isinstance(key, int):
            if 0 <= key < self.n_scenarios:
                return self.scenarios[key]
        else:
            for scenario in self.scenarios:
                if key in (scenario.label, scenario.name):
                    return scenario
        raise UnknownScenarioError(f"No scenario {key!r} in case {self.name!r}")

    def generator(self, key: int | str) -> Generator:
        for gen in self.generators:
            if key in (gen.id, gen.label):
                return gen
        raise KeyError(f"No generator {key!r}")

    def load(self, key: int | str) -> Load:
        for load in self.loads:
            if key in (load.id, load.label):
                return load
        raise KeyError(f"No load {key!r}")

    def with_updates(self, **updates: Any) -> MarketCase:
        """Return a copy with top-level fields replaced."""
        return self.model_copy(update=updates)


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class RedispatchGroups:
    """Generators sharing a bus and identical re-dispatch prices in every scenario."""

    groups: tuple[tuple[int, ...], ...]
    violating_buses: tuple[int, ...] = field(default=())

    @property
    def assumption_holds(self) -> bool:
        return not self.violating_buses


def _contiguous(name: str, ids: list[int]) -> list[str]:
    if ids != list(range(len(ids))):
        return [f"{name} ids must be contiguous from 0, got {ids}"]
    return []


def validate_case(case: MarketCase) -> ValidationReport:
    """Check a case for structural and semantic problems."""
    errors: list[str] = []
    warnings: list[str] = []

    n_buses = case.n_buses
    if n_buses == 0:
        errors.append("case has no buses")
    errors += _contiguous("bus", [bus.id for bus in case.buses])
    errors += _contiguous("line", [line.id for line in case.lines])
    errors += _contiguous("generator", [gen.id for gen in case.generators])
    errors += _contiguous("load", [load.id for load in case.loads])
    errors += _contiguous("scenario", [scenario.id for scenario in case.scenarios])

    def resolves(bus: int) -> bool:
        return 0 <= bus < n_buses

    if not resolves(case.slack_bus):
        errors.append(f"dangling bus reference: slack bus {case.slack_bus}")

    for line in case.lines:
        if not (resolves(line.from_bus) and resolves(line.to_bus)):
            errors.append(
                f"dangling bus reference: line {line.label} "
                f"({line.from_bus} -> {line.to_bus})"
            )
        elif line.from_bus == line.to_bus:
            errors.append(f"line {line.label} connects bus {line.from_bus} to itself")
        if not (np.isfinite(line.reactance) and line.reactance > 0):
            errors.append(f"line {line.label} has non-positive reactance")
        if not (np.isfinite(line.capacity) and line.capacity > 0):
            errors.append(f"line {line.label} has non-positive capacity")
        if line.parallel_count < 1:
            errors.append(f"line {line.label} has no circuits")

    if not case.generators:
        errors.append("case has no generators")
    for gen in case.generators:
        if not resolves(gen.bus):
            errors.append(f"dangling bus reference: generator {gen.label} on bus {gen.bus}")
        if gen.g_min > gen.g_max:
            errors.append(f"generator {gen.label} has g_min above g_max")
        if gen.ru_max < 0 or gen.rd_max < 0:
            errors.append(f"generator {gen.label} has a negative reserve limit")
        prices = (gen.c_energy, gen.c_ru, gen.c_rd)
        if not all(np.isfinite(price) for price in prices):
            errors.append(f"generator {gen.label} has a non-finite offer price")

    max_energy_bid = max((gen.c_energy for gen in case.generators), default=0.0)
    for load in case.loads:
        if not resolves(load.bus):
            errors.append(f"dangling bus reference: load {load.label} on bus {load.bus}")
        if load.base_demand < 0:
            errors.append(f"load {load.label} has negative demand")
        if load.c_shed < 0:
            errors.append(f"load {load.label} has a negative shedding price")
        elif load.c_shed <= max_energy_bid:
            warnings.append(
                f"load {load.label} sheds at {load.c_shed}, "
                f"not above the highest energy bid {max_energy_bid}"
            )

    line_circuits = {line.id: line.parallel_count for line in case.lines}
    for scenario in case.scenarios:
        label = scenario.label
        if not 0 < scenario.probability <= 1:
            errors.append(f"scenario {label} probability {scenario.probability} outside (0, 1]")
        if scenario.exceed_rate < 1:
            errors.append(f"scenario {label} exceed rate below 1")
        if len(scenario.load_fluctuation) != case.n_loads:
            errors.append(f"scenario {label} fluctuation length differs from load count")
        elif np.any(case.demand + np.asarray(scenario.load_fluctuation) < 0):
            errors.append(f"scenario {label} drives a load negative")
        if not (
            len(scenario.c_redispatch_up) == case.n_generators
            and len(scenario.c_redispatch_down) == case.n_generators
        ):
            errors.append(f"scenario {label} re-dispatch prices differ from generator count")
        for outage in scenario.outaged_lines:
            if outage.line not in line_circuits:
                errors.append(f"scenario {label} outages unknown line {outage.line}")
            elif not 1 <= outage.circuits <= line_circuits[outage.line]:
                errors.append(
                    f"scenario {label} outages {outage.circuits} circuits of line {outage.line}"
                )

    total = case.total_probability
    if total > 1 + 1e-12:
        errors.append(f"scenario probabilities sum to {total:g}, above 1")
    elif case.scenarios and 1 - total < NEAR_ZERO_BASE_WEIGHT:
        warnings.append(f"base case weight {1 - total:g} is near zero")

    if not errors:
        errors += _connectivity_errors(case)

    for message in warnings:
        logger.debug(f"Validation warning: {message}")
    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


def _connectivity_errors(case: MarketCase) -> list[str]:
    errors = []
    topologies: list[tuple[str, int | None]] = [("base", None)]
    topologies += [(scenario.label, k) for k, scenario in enumerate(case.scenarios)]
    for label, k in topologies:
        labels = connected_components(case, k)
        islanded = np.flatnonzero(labels != labels[case.slack_bus])
        if islanded.size:
            errors.append(f"topology {label} islands buses {islanded.tolist()}")
    return errors


def uniform_redispatch_groups(case: MarketCase) -> RedispatchGroups:
    """Partition generators by bus and scenario re-dispatch prices."""
    keyed: dict[tuple[Any, ...], list[int]] = {}
    for gen in case.generators:
        key = (
            gen.bus,
            tuple(scenario.c_redispatch_up[gen.id] for scenario in case.scenarios),
            tuple(scenario.c_redispatch_down[gen.id] for scenario in case.scenarios),
        )
        keyed.setdefault(key, []).append(gen.id)

    groups = sorted((tuple(ids) for ids in keyed.values()), key=lambda ids: ids[0])
    per_bus: dict[int, int] = {}
    for key in keyed:
        per_bus[key[0]] = per_bus.get(key[0], 0) + 1
    violating = tuple(sorted(bus for bus, count in per_bus.items() if count > 1))
    return RedispatchGroups(groups=tuple(groups), violating_buses=violating)
