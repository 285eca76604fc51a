"""Two-stage settlement and the system operator's money flow.

Day-ahead, generators are credited for energy at nodal prices of the base
case and of every scenario, for reserve at the coupling multipliers, and
loads pay for their base demand and their fluctuations. Once a scenario is
realized, re-dispatch and shedding are settled at the bid prices. The ledger
keeps the probability-weighted form of the real-time terms so every column
balances on its own.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .config import IDENTITY_TOLERANCE

if TYPE_CHECKING:
    from typing import Optional, Union

    from .clearing import ClearingSolution
    from .model import MarketCase
    from .pricing import PriceSet
    from .types import FloatArray


logger = logging.getLogger(__name__)

ROWS = (
    "Gamma_d",
    "Pi_d",
    "eps_Phi_d",
    "Gamma_g",
    "Gamma_U",
    "Gamma_D",
    "eps_Phi_U",
    "eps_Phi_D",
    "Delta",
)
ROW_LABELS = {
    "Gamma_d": "Γ^d",
    "Pi_d": "Π^d",
    "eps_Phi_d": "εΦ^d",
    "Gamma_g": "Γ^g",
    "Gamma_U": "Γ^U",
    "Gamma_D": "Γ^D",
    "eps_Phi_U": "εΦ^U",
    "eps_Phi_D": "εΦ^D",
    "Delta": "Δ",
}


@dataclass(frozen=True, eq=False)
class ExAnteEntries:
    """Day-ahead settlement per column (base, then scenarios) and resource."""

    gen_energy: FloatArray
    gen_up: FloatArray
    gen_down: FloatArray
    load_energy: FloatArray
    load_fluctuation: FloatArray

    @property
    def fluctuation_payments(self) -> FloatArray:
        """Per-load fluctuation payment summed over scenarios."""
        return self.load_fluctuation.sum(axis=0)


@dataclass(frozen=True, eq=False)
class ExPostEntries:
    """Real-time settlement.

    ``expected_*`` hold probability-weighted terms per column; ``phi_*`` hold
    the unweighted credits and pay-backs of the realized scenario, zero when
    the base case is realized.
    """

    realized: Optional[int]
    expected_up: FloatArray
    expected_down: FloatArray
    expected_shed: FloatArray
    phi_up: FloatArray
    phi_down: FloatArray
    phi_d: FloatArray


def _columns(case: MarketCase) -> tuple[str, ...]:
    return ("Base",) + tuple(scenario.label for scenario in case.scenarios)


def _prepend_zero(block: FloatArray) -> FloatArray:
    return np.vstack([np.zeros((1, block.shape[1])), block])


def settle_ex_ante(solution: ClearingSolution, prices: PriceSet, case: MarketCase) -> ExAnteEntries:
    omega = np.vstack([prices.omega0, prices.omega_k])
    gen_buses, load_buses = case.generator_buses, case.load_buses
    fluctuation = np.array(
        [scenario.load_fluctuation for scenario in case.scenarios], dtype=float
    ).reshape(-1, case.n_loads)

    return ExAnteEntries(
        gen_energy=omega[:, gen_buses] * solution.g,
        gen_up=_prepend_zero(solution.alpha * solution.r_up),
        gen_down=_prepend_zero(solution.beta * solution.r_down),
        load_energy=omega[:, load_buses] * case.demand,
        load_fluctuation=_prepend_zero(prices.omega_k[:, load_buses] * fluctuation),
    )


def _resolve(case: MarketCase, realized: Union[int, str, None]) -> Optional[int]:
    if realized is None or realized == "base" or realized == "Base":
        return None
    return case.scenario(realized).id


def settle_ex_post(
    solution: ClearingSolution, case: MarketCase, realized: Union[int, str, None] = None
) -> ExPostEntries:
    k = _resolve(case, realized)
    weights = np.array([scenario.probability for scenario in case.scenarios])[:, None]
    c_up = np.array([s.c_redispatch_up for s in case.scenarios], dtype=float).reshape(-1, case.n_generators)
    c_down = np.array([s.c_redispatch_down for s in case.scenarios], dtype=float).reshape(-1, case.n_generators)
    c_shed = case.load_column("c_shed")

    up_cost = c_up * solution.up
    down_cost = c_down * solution.down
    shed_cost = c_shed * solution.shed

    if k is None:
        phi_up, phi_down, phi_d = np.zeros(case.n_generators), np.zeros(case.n_generators), np.zeros(case.n_loads)
    else:
        phi_up, phi_down, phi_d = up_cost[k], down_cost[k], shed_cost[k]
        logger.debug(f"Settling realized scenario {case.scenarios[k].label}")

    return ExPostEntries(
        realized=k,
        expected_up=_prepend_zero(weights * up_cost),
        expected_down=_prepend_zero(weights * down_cost),
        expected_shed=_prepend_zero(weights * shed_cost),
        phi_up=phi_up,
        phi_down=phi_down,
        phi_d=phi_d,
    )


def congestion_rent(solution: ClearingSolution) -> tuple[float, FloatArray]:
    """Rent of the base case and of every scenario, limits times flow multipliers."""
    network = solution.network
    base = float(network.base.capacity @ (solution.mu_fwd + solution.mu_rev))
    scenarios = np.array(
        [
            topology.capacity @ (solution.mu_k_fwd[k] + solution.mu_k_rev[k])
            for k, topology in enumerate(network.scenarios)
        ]
    )
    return base, scenarios


def shed_cap_term(solution: ClearingSolution, case: MarketCase) -> FloatArray:
    """Per column, the value of the shedding caps: ``sum tau (d + pi)``."""
    realized = case.demand + np.array(
        [scenario.load_fluctuation for scenario in case.scenarios], dtype=float
    ).reshape(-1, case.n_loads)
    return np.concatenate([[0.0], (solution.tau * realized).sum(axis=1)])


@dataclass(frozen=True, eq=False)
class SettlementLedger:
    columns: tuple[str, ...]
    table: FloatArray
    """Aggregates, one row per entry of :data:`ROWS`, one column per topology."""
    ex_ante: ExAnteEntries
    ex_post: ExPostEntries
    shed_cap: FloatArray
    generators: tuple[str, ...] = ()
    loads: tuple[str, ...] = ()

    def row(self, name: str) -> FloatArray:
        return self.table[ROWS.index(name)]

    def total(self, name: str) -> float:
        return float(self.row(name).sum())

    @property
    def fluctuation_payments(self) -> FloatArray:
        return self.ex_ante.fluctuation_payments

    def with_entry(self, name: str, column: str, delta: float) -> SettlementLedger:
        """Copy with one aggregate shifted by ``delta``."""
        table = self.table.copy()
        table[ROWS.index(name), self.columns.index(column)] += delta
        return replace(self, table=table)

    def to_frame(self, labels: bool = False) -> pd.DataFrame:
        index = [ROW_LABELS[row] for row in ROWS] if labels else list(ROWS)
        frame = pd.DataFrame(self.table, index=pd.Index(index, name="entry"), columns=list(self.columns))
        frame["Total"] = self.table.sum(axis=1)
        return frame

    def to_csv(self, path: Optional[Union[Path, str]] = None) -> str:
        text = self.to_frame().to_csv()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_markdown(self) -> str:
        return self.to_frame(labels=True).to_markdown(floatfmt=".1f")


def from_csv(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), index_col=0)


def _aggregate(ex_ante: ExAnteEntries, ex_post: ExPostEntries, rents: FloatArray) -> FloatArray:
    return np.vstack(
        [
            ex_ante.load_energy.sum(axis=1),
            ex_ante.load_fluctuation.sum(axis=1),
            ex_post.expected_shed.sum(axis=1),
            ex_ante.gen_energy.sum(axis=1),
            ex_ante.gen_up.sum(axis=1),
            ex_ante.gen_down.sum(axis=1),
            ex_post.expected_up.sum(axis=1),
            ex_post.expected_down.sum(axis=1),
            rents,
        ]
    )


def settle(
    solution: ClearingSolution,
    prices: PriceSet,
    case: MarketCase,
    realized: Union[int, str, None] = None,
) -> SettlementLedger:
    ex_ante = settle_ex_ante(solution, prices, case)
    ex_post = settle_ex_post(solution, case, realized)
    base_rent, scenario_rents = congestion_rent(solution)
    rents = np.concatenate([[base_rent], scenario_rents])
    return SettlementLedger(
        columns=_columns(case),
        table=_aggregate(ex_ante, ex_post, rents),
        ex_ante=ex_ante,
        ex_post=ex_post,
        shed_cap=shed_cap_term(solution, case),
        generators=tuple(gen.label for gen in case.generators),
        loads=tuple(load.label for load in case.loads),
    )


@dataclass(frozen=True, eq=False)
class AdequacyResult:
    columns: tuple[str, ...]
    residuals: FloatArray
    shed_cap: FloatArray
    gross: FloatArray
    tolerance: float

    @property
    def unexplained(self) -> FloatArray:
        """Residuals net of the shedding-cap term."""
        return self.residuals - self.shed_cap

    def _over(self, values: FloatArray) -> tuple[str, ...]:
        bad = np.abs(values) > self.tolerance * (1 + self.gross)
        return tuple(column for column, flag in zip(self.columns, bad) if flag)

    @property
    def failing(self) -> tuple[str, ...]:
        return self._over(self.residuals)

    @property
    def unexplained_failing(self) -> tuple[str, ...]:
        """Failing columns that binding shedding caps do not account for."""
        return tuple(column for column in self._over(self.unexplained) if column in self.failing)

    @property
    def passed(self) -> bool:
        return not self.failing


def revenue_adequacy(ledger: SettlementLedger, tolerance: float = IDENTITY_TOLERANCE) -> AdequacyResult:
    """Balance residual of every ledger column.

    Base: ``Gamma_d - Gamma_g - Delta``. Scenarios:
    ``Gamma_d + Pi_d - (Gamma_g + Gamma_U + Gamma_D + eps_Phi_U - eps_Phi_D + eps_Phi_d + Delta)``.
    The base column has no reserve or real-time terms, so one formula covers both.
    """
    row = ledger.row
    inflow = row("Gamma_d") + row("Pi_d")
    outflow = (
        row("Gamma_g")
        + row("Gamma_U")
        + row("Gamma_D")
        + row("eps_Phi_U")
        - row("eps_Phi_D")
        + row("eps_Phi_d")
        + row("Delta")
    )
    gross = np.abs(ledger.table).sum(axis=0)
    return AdequacyResult(
        columns=ledger.columns,
        residuals=inflow - outflow,
        shed_cap=ledger.shed_cap,
        gross=gross,
        tolerance=tolerance,
    )


def resource_statements(ledger: SettlementLedger) -> pd.DataFrame:
    """Net money per participant, day-ahead terms plus the realized scenario."""
    ex_ante, ex_post = ledger.ex_ante, ledger.ex_post
    generators = pd.DataFrame(
        {
            "kind": "generator",
            "energy": ex_ante.gen_energy.sum(axis=0),
            "reserve": ex_ante.gen_up.sum(axis=0) + ex_ante.gen_down.sum(axis=0),
            "fluctuation": 0.0,
            "realized": ex_post.phi_up - ex_post.phi_down,
        },
        index=list(ledger.generators),
    )
    loads = pd.DataFrame(
        {
            "kind": "load",
            "energy": -ex_ante.load_energy.sum(axis=0),
            "reserve": 0.0,
            "fluctuation": -ex_ante.load_fluctuation.sum(axis=0),
            "realized": ex_post.phi_d,
        },
        index=list(ledger.loads),
    )
    frame = pd.concat([generators, loads])
    frame.index.name = "participant"
    frame["net"] = frame[["energy", "reserve", "fluctuation", "realized"]].sum(axis=1)
    return frame
