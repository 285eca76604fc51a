"""Built-in market cases: the two-bus example and the modified IEEE 118-bus system."""

from __future__ import annotations

import logging
from itertools import product
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np

from .exceptions import MissingDataError
from .model import Bus, Generator, Line, LineOutage, Load, MarketCase, Scenario
from .ptdf import base_shift_factors
from .serializers import YAMLSerializer, dump_case

if TYPE_CHECKING:
    from typing import Any, Optional, Union

    from .types import CalibrationRecord, FloatArray


logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
CALIBRATION_FILE = DATA_DIR / "twobus_calibration.yaml"

SITUATIONS = {"I": (2.0, 6.0, -1.0), "II": (3.0, 2.0, -3.0)}
BASE_DEMAND = (6.0, 15.0, 4.0)

# (outage, situation, probability, first price, second price)
TWOBUS_SCENARIOS: tuple[tuple[bool, Optional[str], float, float, float], ...] = (
    (True, None, 0.06, 19.1, 26.3),
    (True, "I", 0.02, 19.7, 33.8),
    (True, "II", 0.02, 19.4, 32.7),
    (False, "I", 0.18, 19.4, 33.5),
    (False, "II", 0.18, 19.1, 27.5),
)

IEEE118_OUTAGES = (21, 55, 102)
IEEE118_SPLIT_BUS = 59
IEEE118_NEW_LOAD = 119
IEEE118_FLUCTUATION = 0.03
IEEE118_OUTAGE_PROBABILITY = 0.1
IEEE118_SITUATION_PROBABILITY = 0.1
IEEE118_EXCEED_RATE = 1.2
IEEE118_SHED_PRICE = 1000.0
REDISPATCH_PREMIUM = 1.2
REDISPATCH_DISCOUNT = 0.8

Enumeration = Literal["grid", "separate"]
RedispatchPricing = Literal["per_bus", "up_down"]


def load_calibration(path: Union[Path, str, None] = None) -> CalibrationRecord:
    record: CalibrationRecord = YAMLSerializer(Path(path or CALIBRATION_FILE)).deserialize()
    return record


def _pair_prices(
    generators: tuple[Generator, ...],
    first: float,
    second: float,
    reading: RedispatchPricing,
    upward: bool,
) -> tuple[float, ...]:
    if reading == "up_down":
        return (first if upward else second,) * len(generators)
    return tuple(first if generator.bus == 0 else second for generator in generators)


def twobus_case(
    capacity: float,
    exceed_rate: float,
    shed_price: float,
    load_buses: tuple[int, ...] = (0, 1, 1),
    redispatch_pricing: RedispatchPricing = "per_bus",
) -> MarketCase:
    """The two-bus case for a given set of unpublished parameters.

    Each scenario carries a pair of re-dispatch prices. ``per_bus`` reads the
    pair as the price at bus 1 and at bus 2, used for both directions.
    ``up_down`` reads it as the upward and downward price of every generator.
    """
    offers = (
        (0, 16.0, 0.0, 4.0, 4.0, 8.0, 2.0, 2.0),
        (1, 18.0, 0.0, 4.0, 4.0, 15.0, 2.0, 2.0),
        (1, 12.0, 0.0, 4.0, 4.0, 20.0, 2.5, 2.5),
    )
    generators = tuple(
        Generator(
            id=j,
            bus=bus,
            g_max=g_max,
            g_min=g_min,
            ru_max=ru_max,
            rd_max=rd_max,
            c_energy=c_energy,
            c_ru=c_ru,
            c_rd=c_rd,
        )
        for j, (bus, g_max, g_min, ru_max, rd_max, c_energy, c_ru, c_rd) in enumerate(offers)
    )
    loads = tuple(
        Load(id=i, bus=bus, base_demand=demand, c_shed=shed_price)
        for i, (bus, demand) in enumerate(zip(load_buses, BASE_DEMAND))
    )
    scenarios = tuple(
        Scenario(
            id=k,
            probability=probability,
            load_fluctuation=SITUATIONS[situation] if situation else (0.0, 0.0, 0.0),
            c_redispatch_up=_pair_prices(generators, first, second, redispatch_pricing, upward=True),
            c_redispatch_down=_pair_prices(generators, first, second, redispatch_pricing, upward=False),
            outaged_lines=(LineOutage(line=0),) if outage else (),
            exceed_rate=exceed_rate,
        )
        for k, (outage, situation, probability, first, second) in enumerate(TWOBUS_SCENARIOS)
    )
    return MarketCase(
        buses=(Bus(id=0), Bus(id=1)),
        lines=(Line(id=0, from_bus=0, to_bus=1, reactance=0.1, capacity=capacity, parallel_count=2),),
        generators=generators,
        loads=loads,
        scenarios=scenarios,
        name="twobus",
    )


def fixture_twobus(calibration: Union[CalibrationRecord, Path, str, None] = None) -> MarketCase:
    """The two-bus case with the committed calibration, or a given one."""
    if not isinstance(calibration, dict):
        calibration = load_calibration(calibration)
    return twobus_case(
        capacity=calibration["capacity"],
        exceed_rate=calibration["exceed_rate"],
        shed_price=calibration["shed_price"],
        load_buses=tuple(calibration["load_buses"]),
        redispatch_pricing=calibration.get("redispatch_pricing", "per_bus"),  # type: ignore[arg-type]
    )


def _standard_118() -> dict[str, Any]:
    from pypower.case118 import case118

    return case118()


def _split_load(case: MarketCase) -> MarketCase:
    """Halve the load at the split bus into the original and a new load."""
    original = case.load(f"d{IEEE118_SPLIT_BUS}")
    half = original.base_demand / 2
    loads = [
        load.model_copy(update={"base_demand": half}) if load.id == original.id else load
        for load in case.loads
    ]
    loads.append(
        original.model_copy(
            update={"id": len(loads), "base_demand": half, "name": f"d{IEEE118_NEW_LOAD}"}
        )
    )
    return case.with_updates(loads=tuple(loads))


def merit_order_dispatch(case: MarketCase) -> FloatArray:
    """Cheapest dispatch meeting demand with the network ignored."""
    g = case.generator_column("g_min").copy()
    g_max = case.generator_column("g_max")
    remaining = case.demand.sum() - g.sum()
    for j in np.argsort(case.generator_column("c_energy"), kind="stable"):
        if remaining <= 0:
            break
        step = min(g_max[j] - g[j], remaining)
        g[j] += step
        remaining -= step
    return g


def rate_lines(case: MarketCase, headroom: float, floor: float) -> MarketCase:
    """Set limits to ``headroom`` times the merit-order flows, never below ``floor``."""
    g = merit_order_dispatch(case)
    injection = case.generator_incidence() @ g - case.load_incidence() @ case.demand
    flows = np.abs(base_shift_factors(case) @ injection)
    limits = np.maximum(floor, headroom * flows)
    lines = tuple(
        line.model_copy(update={"capacity": float(limit)}) for line, limit in zip(case.lines, limits)
    )
    return case.with_updates(lines=lines)


def _redispatch_prices(case: MarketCase) -> tuple[tuple[float, ...], tuple[float, ...]]:
    bids = case.generator_column("c_energy")
    buses = case.generator_buses
    up = tuple(float(REDISPATCH_PREMIUM * bids[buses == bus].max()) for bus in buses)
    down = tuple(float(REDISPATCH_DISCOUNT * bids[buses == bus].min()) for bus in buses)
    return up, down


def ieee118_scenarios(case: MarketCase, enumeration: Enumeration = "grid") -> tuple[Scenario, ...]:
    """Outage and fluctuation scenarios.

    ``grid`` crosses {no outage, each listed outage} with {no fluctuation,
    situation I, situation II} and drops the base combination; outages and
    situations are independent with mutually exclusive outages. ``separate``
    keeps single-cause scenarios only.
    """
    demand = case.demand
    sign = np.array([1.0 if load.name == f"d{IEEE118_NEW_LOAD}" else -1.0 for load in case.loads])
    fluctuations = {
        None: np.zeros(case.n_loads),
        "I": IEEE118_FLUCTUATION * sign * demand,
        "II": -IEEE118_FLUCTUATION * sign * demand,
    }
    no_outage = 1 - IEEE118_OUTAGE_PROBABILITY * len(IEEE118_OUTAGES)
    no_situation = 1 - 2 * IEEE118_SITUATION_PROBABILITY
    outages: list[Optional[int]] = [None, *IEEE118_OUTAGES]
    up, down = _redispatch_prices(case)

    scenarios = []
    for outage, situation in product(outages, [None, "I", "II"]):
        if outage is None and situation is None:
            continue
        if enumeration == "separate" and outage is not None and situation is not None:
            continue
        if enumeration == "grid":
            probability = (IEEE118_OUTAGE_PROBABILITY if outage else no_outage) * (
                IEEE118_SITUATION_PROBABILITY if situation else no_situation
            )
        else:
            probability = IEEE118_OUTAGE_PROBABILITY if outage else IEEE118_SITUATION_PROBABILITY
        parts = ([f"line{outage}"] if outage else []) + ([situation] if situation else [])
        scenarios.append(
            Scenario(
                id=len(scenarios),
                probability=probability,
                load_fluctuation=tuple(float(value) for value in fluctuations[situation]),
                c_redispatch_up=up,
                c_redispatch_down=down,
                outaged_lines=(LineOutage(line=outage - 1),) if outage else (),
                exceed_rate=IEEE118_EXCEED_RATE,
                name="+".join(parts),
            )
        )
    return tuple(scenarios)


def fixture_ieee118(
    source: Union[Path, str, None] = None,
    *,
    enumeration: Enumeration = "grid",
    line_headroom: float = 1.1,
    line_floor: float = 100.0,
) -> MarketCase:
    """The modified IEEE 118-bus case.

    Network data comes from pypower's bundled case or a MATPOWER file. Line
    limits absent from the data are rated from merit-order flows.
    """
    try:
        from .matpower import case_from_ppc, read_matpower
    except ImportError as error:
        raise MissingDataError("IEEE 118-bus data needs the pypower package") from error

    ppc = read_matpower(source) if source is not None else _standard_118()
    case = case_from_ppc(ppc, name="ieee118", shed_price=IEEE118_SHED_PRICE)
    case = rate_lines(_split_load(case), line_headroom, line_floor)
    case = case.with_updates(scenarios=ieee118_scenarios(case, enumeration))
    logger.debug(f"Built {case.name} with {case.n_scenarios} scenarios ({enumeration})")
    return case


def emit_fixtures(directory: Union[Path, str]) -> list[Path]:
    """Write every built-in case that can be built here as a case file."""
    directory = Path(directory)
    written = [dump_case(fixture_twobus(), directory / "twobus.case.json")]
    try:
        written.append(dump_case(fixture_ieee118(), directory / "ieee118.case.json"))
    except MissingDataError as error:
        logger.warning(f"Skipping ieee118: {error}")
    return written
