"""Parameter sweeps over a market case.

A parameter path names what to vary:

``fluctuation:<load>``
    Fluctuation level of a load as a fraction of its base demand. A scenario
    whose fluctuation of the load is ``f`` gets ``sign(f) * value * d`` with
    ``d`` the base demand, so a positive value keeps every scenario's direction
    and a negative value reverses it. Scenarios where the load does not
    fluctuate stay untouched. A load that fluctuates in no scenario is rejected.
``demand:<load>``
    Base demand of a load, MW.
``exceed_rate``
    Exceed rate of every scenario.
``probability:<scenario>``
    Probability of one scenario.
"""

from __future__ import annotations

import concurrent.futures
import logging
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .clearing import solve_clearing
from .exceptions import MarketError
from .pricing import compute_prices
from .settlement import settle

if TYPE_CHECKING:
    from typing import Iterable, Optional, Sequence, Union

    from .model import MarketCase
    from .types import FloatArray, SolverConfig


logger = logging.getLogger(__name__)

PARAMETERS = ("fluctuation", "demand", "exceed_rate", "probability")


def parse_range(text: str) -> FloatArray:
    """``a:b:n`` as ``n`` evenly spaced values from ``a`` to ``b``."""
    try:
        start, stop, count = text.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as error:
        raise ValueError(f"Range {text!r} is not of the form a:b:n") from error
    if values.size == 0:
        raise ValueError(f"Range {text!r} has no points")
    return values


def _split(param: str) -> tuple[str, Optional[str]]:
    kind, _, target = param.partition(":")
    if kind not in PARAMETERS:
        raise ValueError(f"Unknown sweep parameter {kind!r}; expected one of {', '.join(PARAMETERS)}")
    if (kind == "exceed_rate") != (not target):
        raise ValueError(f"Parameter {param!r} has the wrong form")
    return kind, target or None


def apply_parameter(case: MarketCase, param: str, value: float) -> MarketCase:
    """Copy of ``case`` with one parameter set to ``value``."""
    kind, target = _split(param)

    if kind == "exceed_rate":
        scenarios = tuple(s.model_copy(update={"exceed_rate": value}) for s in case.scenarios)
        return case.with_updates(scenarios=scenarios)

    if kind == "probability":
        assert target is not None
        chosen = case.scenario(int(target) if target.isdigit() else target)
        scenarios = tuple(
            s.model_copy(update={"probability": value}) if s.id == chosen.id else s
            for s in case.scenarios
        )
        return case.with_updates(scenarios=scenarios)

    assert target is not None
    load = case.load(int(target) if target.isdigit() else target)
    if kind == "demand":
        loads = tuple(
            item.model_copy(update={"base_demand": value}) if item.id == load.id else item
            for item in case.loads
        )
        return case.with_updates(loads=loads)

    if not any(scenario.load_fluctuation[load.id] != 0 for scenario in case.scenarios):
        raise ValueError(f"No scenario moves load {load.label}")
    level = value * load.base_demand
    scenarios = []
    for scenario in case.scenarios:
        fluctuation = list(scenario.load_fluctuation)
        if fluctuation[load.id] != 0:
            fluctuation[load.id] = float(np.sign(fluctuation[load.id]) * level)
        scenarios.append(scenario.model_copy(update={"load_fluctuation": tuple(fluctuation)}))
    return case.with_updates(scenarios=tuple(scenarios))


def sweep_point(case: MarketCase, config: Optional[SolverConfig] = None) -> dict[str, float]:
    """Cost, prices and fluctuation payments of one cleared case."""
    try:
        solution = solve_clearing(case, config, validate=False)
    except MarketError as error:
        logger.debug(f"Sweep point failed: {error}")
        return {"optimal": 0.0}

    prices = compute_prices(solution, case)
    ledger = settle(solution, prices, case)
    row = {"optimal": 1.0, "expected_total_cost": solution.expected_total_cost}
    for gen in case.generators:
        row[f"eta_g[{gen.label}]"] = float(prices.eta_g[gen.id])
        row[f"eta_U[{gen.label}]"] = float(prices.eta_up[gen.id])
        row[f"eta_D[{gen.label}]"] = float(prices.eta_down[gen.id])
        row[f"r_U[{gen.label}]"] = float(solution.r_up[gen.id])
        row[f"r_D[{gen.label}]"] = float(solution.r_down[gen.id])
    for load in case.loads:
        row[f"eta_d[{load.label}]"] = float(prices.eta_d[load.id])
        row[f"Pi_d[{load.label}]"] = float(ledger.fluctuation_payments[load.id])
    return row


def sweep(
    case: MarketCase,
    param: str,
    values: Iterable[float],
    config: Optional[SolverConfig] = None,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Clear the case at every value of one parameter.

    Points may solve concurrently; rows come back in the order of ``values``.
    Infeasible points keep their row with ``optimal`` set to zero.
    """
    values = [float(value) for value in values]
    cases = [apply_parameter(case, param, value) for value in values]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(lambda item: sweep_point(item, config), cases))

    frame = pd.DataFrame.from_records(rows)
    frame.insert(0, param, values)
    logger.debug(f"Swept {param} over {len(values)} points")
    return frame


def plot_sweep(
    frame: pd.DataFrame,
    columns: Sequence[str],
    path: Union[Path, str],
    title: str = "",
) -> Path:
    """Line plot of the chosen columns against the swept parameter."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    x = frame.columns[0]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for column in columns:
        ax.plot(frame[x], frame[column], marker="o", label=column)
    ax.set_xlabel(x)
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
