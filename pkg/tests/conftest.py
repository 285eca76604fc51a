from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from reserveflow.clearing import solve_clearing
from reserveflow.config import default_config
from reserveflow.fixtures import fixture_twobus
from reserveflow.model import Bus, Generator, Line, LineOutage, Load, MarketCase, Scenario
from reserveflow.pricing import compute_prices
from reserveflow.settlement import settle

if TYPE_CHECKING:
    from reserveflow.clearing import ClearingSolution
    from reserveflow.pricing import PriceSet
    from reserveflow.settlement import SettlementLedger
    from reserveflow.types import SolverConfig


def _generator(
    id: int, bus: int, g_max: float, c_energy: float, reserve: float = 0.0, c_reserve: float = 1.0
) -> Generator:
    return Generator(
        id=id,
        bus=bus,
        g_min=0.0,
        g_max=g_max,
        ru_max=reserve,
        rd_max=reserve,
        c_energy=c_energy,
        c_ru=c_reserve,
        c_rd=c_reserve,
    )


@pytest.fixture
def config() -> SolverConfig:
    return default_config()


@pytest.fixture
def single_bus() -> MarketCase:
    """Two generators on one bus; the second one is marginal at 30."""
    return MarketCase(
        buses=(Bus(id=0),),
        lines=(),
        generators=(_generator(0, 0, 50.0, 20.0), _generator(1, 0, 50.0, 30.0)),
        loads=(Load(id=0, bus=0, base_demand=60.0, c_shed=500.0),),
        name="single",
    )


@pytest.fixture
def ring() -> MarketCase:
    """Three buses, unit reactances, the line into the load bus limited to 50 MW."""
    return MarketCase(
        buses=(Bus(id=0), Bus(id=1), Bus(id=2)),
        lines=(
            Line(id=0, from_bus=0, to_bus=1, reactance=1.0, capacity=50.0),
            Line(id=1, from_bus=1, to_bus=2, reactance=1.0, capacity=500.0),
            Line(id=2, from_bus=0, to_bus=2, reactance=1.0, capacity=500.0),
        ),
        generators=(_generator(0, 0, 100.0, 10.0), _generator(1, 2, 100.0, 30.0)),
        loads=(Load(id=0, bus=1, base_demand=90.0, c_shed=1000.0),),
        name="ring",
    )


@pytest.fixture
def uncongested(single_bus: MarketCase) -> MarketCase:
    """The single-bus case with one fluctuation scenario and reserve on offer."""
    generators = (
        _generator(0, 0, 50.0, 20.0, reserve=10.0, c_reserve=1.0),
        _generator(1, 0, 50.0, 30.0, reserve=10.0, c_reserve=2.0),
    )
    scenario = Scenario(
        id=0,
        probability=0.2,
        load_fluctuation=(5.0,),
        c_redispatch_up=(35.0, 35.0),
        c_redispatch_down=(15.0, 15.0),
    )
    return single_bus.with_updates(generators=generators, scenarios=(scenario,), name="uncongested")


@pytest.fixture
def islanding(ring: MarketCase) -> MarketCase:
    scenario = Scenario(
        id=0,
        probability=0.1,
        load_fluctuation=(0.0,),
        c_redispatch_up=(40.0, 40.0),
        c_redispatch_down=(5.0, 5.0),
        outaged_lines=(LineOutage(line=0),),
    )
    two_bus = ring.with_updates(
        buses=ring.buses[:2],
        lines=ring.lines[:1],
        generators=ring.generators[:1] + (_generator(1, 1, 100.0, 30.0),),
        scenarios=(scenario,),
    )
    return two_bus


@pytest.fixture
def twobus() -> MarketCase:
    return fixture_twobus()


@pytest.fixture
def twobus_solution(twobus: MarketCase, config: SolverConfig) -> ClearingSolution:
    return solve_clearing(twobus, config)


@pytest.fixture
def twobus_prices(twobus: MarketCase, twobus_solution: ClearingSolution) -> PriceSet:
    return compute_prices(twobus_solution, twobus)


@pytest.fixture
def twobus_ledger(
    twobus: MarketCase, twobus_solution: ClearingSolution, twobus_prices: PriceSet
) -> SettlementLedger:
    return settle(twobus_solution, twobus_prices, twobus)
