"""Nodal energy and reserve prices derived from clearing multipliers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .clearing import build_model_three, solve_clearing
from .config import default_config
from .exceptions import DegenerateEnvelopeError, MarketError
from .lp import solve

if TYPE_CHECKING:
    from typing import Optional

    from .clearing import ClearingSolution
    from .model import MarketCase
    from .types import FixedResource, FloatArray, ResourceKind, SolverConfig


logger = logging.getLogger(__name__)

KINK_TOLERANCE = 1e-4
MATCH_TOLERANCE = 1e-2


@dataclass(frozen=True, eq=False)
class EnergyPrices:
    omega0: FloatArray
    """Base-case nodal prices."""
    omega_k: FloatArray
    """Scenario nodal prices, ``[scenario, bus]``."""
    eta_g: FloatArray
    eta_d: FloatArray
    shed_adjustment: FloatArray
    """Per-load sum of shedding-bound multipliers netted out of ``eta_d``."""


@dataclass(frozen=True, eq=False)
class PriceSet:
    omega0: FloatArray
    omega_k: FloatArray
    eta_g: FloatArray
    eta_d: FloatArray
    eta_up: FloatArray
    eta_down: FloatArray
    shed_adjustment: FloatArray

    @property
    def nodal(self) -> FloatArray:
        """Total energy price at each bus, base plus every scenario."""
        return self.omega0 + self.omega_k.sum(axis=0)

    def bus_table(self, case: MarketCase) -> pd.DataFrame:
        frame = pd.DataFrame(
            {"omega_base": self.omega0},
            index=pd.Index([bus.label for bus in case.buses], name="bus"),
        )
        for k, scenario in enumerate(case.scenarios):
            frame[f"omega_{scenario.label}"] = self.omega_k[k]
        frame["total"] = self.nodal
        return frame

    def generator_table(self, case: MarketCase) -> pd.DataFrame:
        return pd.DataFrame(
            {"eta_g": self.eta_g, "eta_U": self.eta_up, "eta_D": self.eta_down},
            index=pd.Index([gen.label for gen in case.generators], name="generator"),
        )

    def load_table(self, case: MarketCase) -> pd.DataFrame:
        return pd.DataFrame(
            {"eta_d": self.eta_d, "shed_adjustment": self.shed_adjustment},
            index=pd.Index([load.label for load in case.loads], name="load"),
        )


def energy_prices(solution: ClearingSolution, case: MarketCase) -> EnergyPrices:
    network = solution.network
    omega0 = solution.lam - network.base.shift_factors.T @ solution.mu
    omega_k = np.zeros((solution.n_scenarios, case.n_buses))
    for k, topology in enumerate(network.scenarios):
        omega_k[k] = solution.lam_k[k] - topology.shift_factors.T @ solution.mu_k[k]

    nodal = omega0 + omega_k.sum(axis=0)
    shed_adjustment = solution.tau.sum(axis=0) if solution.n_scenarios else np.zeros(case.n_loads)
    return EnergyPrices(
        omega0=omega0,
        omega_k=omega_k,
        eta_g=nodal[case.generator_buses],
        eta_d=nodal[case.load_buses] - shed_adjustment,
        shed_adjustment=shed_adjustment,
    )


def reserve_prices(solution: ClearingSolution) -> tuple[FloatArray, FloatArray]:
    """Upward and downward reserve prices: coupling multipliers summed over scenarios."""
    return solution.alpha.sum(axis=0), solution.beta.sum(axis=0)


def compute_prices(solution: ClearingSolution, case: MarketCase) -> PriceSet:
    energy = energy_prices(solution, case)
    eta_up, eta_down = reserve_prices(solution)
    return PriceSet(
        omega0=energy.omega0,
        omega_k=energy.omega_k,
        eta_g=energy.eta_g,
        eta_d=energy.eta_d,
        eta_up=eta_up,
        eta_down=eta_down,
        shed_adjustment=energy.shed_adjustment,
    )


@dataclass(frozen=True)
class EnvelopeEstimate:
    kind: ResourceKind
    resource: int
    step: float
    expected: float
    """Derivative implied by the price, ``-eta`` for offers and ``+eta_d`` for loads."""
    left: Optional[float]
    right: Optional[float]

    @property
    def central(self) -> Optional[float]:
        if self.left is not None and self.right is not None:
            return (self.left + self.right) / 2
        return self.left if self.left is not None else self.right

    @property
    def degenerate(self) -> bool:
        """One-sided differences disagree, or only one side could be evaluated."""
        if self.left is None or self.right is None:
            return True
        return abs(self.left - self.right) > KINK_TOLERANCE * (1 + abs(self.central or 0))

    @property
    def difference(self) -> Optional[float]:
        central = self.central
        return None if central is None else abs(central - self.expected)

    @property
    def matches(self) -> bool:
        difference = self.difference
        return difference is not None and difference <= MATCH_TOLERANCE


def _restricted_cost(
    case: MarketCase, generator: int, values: FixedResource, config: SolverConfig, solution: ClearingSolution
) -> Optional[float]:
    problem, _ = build_model_three(case, generator, values, solution.network)
    lp = solve(problem, config)
    return lp.objective_value if lp.optimal else None


def _shifted_demand(case: MarketCase, load: int, delta: float) -> MarketCase:
    loads = tuple(
        item.model_copy(update={"base_demand": item.base_demand + delta}) if item.id == load else item
        for item in case.loads
    )
    return case.with_updates(loads=loads)


def _demand_cost(
    case: MarketCase, load: int, delta: float, config: SolverConfig, solution: ClearingSolution
) -> Optional[float]:
    try:
        shifted = solve_clearing(
            _shifted_demand(case, load, delta), config, solution.network, validate=False
        )
    except MarketError:
        return None
    return shifted.expected_total_cost


def envelope_check(
    case: MarketCase,
    solution: ClearingSolution,
    prices: PriceSet,
    kind: ResourceKind,
    resource: int,
    step: float = 1e-3,
    config: Optional[SolverConfig] = None,
    *,
    strict: bool = False,
) -> EnvelopeEstimate:
    """Compare a price with a finite-difference sensitivity of the optimal cost.

    Offer quantities are perturbed through the restricted model with the
    generator's bids removed, loads through a full re-clear.
    """
    config = config or default_config()

    if kind == "d":
        expected = float(prices.eta_d[resource])
        base = solution.expected_total_cost
        plus = _demand_cost(case, resource, step, config, solution)
        minus = _demand_cost(case, resource, -step, config, solution)
    else:
        expected = -float(
            {"g": prices.eta_g, "r_up": prices.eta_up, "r_down": prices.eta_down}[kind][resource]
        )
        values = solution.dispatch()[resource]
        base_cost = _restricted_cost(case, resource, values, config, solution)
        if base_cost is None:
            raise DegenerateEnvelopeError(f"Restricted model at the optimum of {kind}[{resource}] is infeasible")
        base = base_cost

        def shifted(delta: float) -> Optional[float]:
            moved: FixedResource = dict(values)  # type: ignore[assignment]
            moved[kind] = values[kind] + delta  # type: ignore[literal-required]
            return _restricted_cost(case, resource, moved, config, solution)

        plus, minus = shifted(step), shifted(-step)

    estimate = EnvelopeEstimate(
        kind=kind,
        resource=resource,
        step=step,
        expected=expected,
        left=None if minus is None else (base - minus) / step,
        right=None if plus is None else (plus - base) / step,
    )
    logger.debug(
        f"Envelope {kind}[{resource}]: expected {expected:.6f}, "
        f"left {estimate.left}, right {estimate.right}"
    )
    if strict and estimate.degenerate:
        raise DegenerateEnvelopeError(
            f"{kind}[{resource}] sits on a kink: left {estimate.left}, right {estimate.right}"
        )
    return estimate
