"""Tables for the command line: clearing results, ledgers, checks."""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import pandas as pd

if TYPE_CHECKING:
    from typing import Sequence

    from .clearing import ClearingSolution
    from .model import MarketCase
    from .pricing import PriceSet
    from .settlement import SettlementLedger
    from .verify import ComparisonReport, VerificationReport

Format = Literal["csv", "md"]


def dispatch_table(case: MarketCase, solution: ClearingSolution, prices: PriceSet) -> pd.DataFrame:
    """Cleared quantities and prices per generator."""
    return pd.DataFrame(
        {
            "g": solution.g,
            "r_U": solution.r_up,
            "r_D": solution.r_down,
            "eta_g": prices.eta_g,
            "eta_U": prices.eta_up,
            "eta_D": prices.eta_down,
        },
        index=pd.Index([gen.label for gen in case.generators], name="generator"),
    )


def load_table(case: MarketCase, prices: PriceSet, ledger: SettlementLedger) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "d": case.demand,
            "eta_d": prices.eta_d,
            "Pi_d": ledger.fluctuation_payments,
        },
        index=pd.Index([load.label for load in case.loads], name="load"),
    )


def solver_table(solution: ClearingSolution) -> pd.DataFrame:
    """Which algorithm produced the multipliers the prices are read from."""
    frame = pd.DataFrame(
        {
            "value": {
                "method": solution.lp.method,
                "dual_selection": solution.lp.dual_selection,
                "weakly_complementary_rows": len(solution.degenerate),
            }
        }
    )
    frame.index.name = "solver"
    return frame


def verification_table(reports: Sequence[VerificationReport]) -> pd.DataFrame:
    frame = pd.DataFrame.from_records(
        [
            {
                "check": report.check,
                "status": report.status.value,
                "worst_residual": report.worst_residual,
                "offenders": "; ".join(report.offenders),
                "notes": "; ".join(report.details + report.skipped),
            }
            for report in reports
        ]
    )
    return frame.set_index("check")


def comparison_table(report: ComparisonReport) -> pd.DataFrame:
    frame = report.to_frame().astype(object)
    if not report.feasible:
        frame.loc["violated", "value"] = "; ".join(report.violated)
    return frame


def render(frame: pd.DataFrame, fmt: Format = "md", title: str = "") -> str:
    if fmt == "csv":
        return frame.to_csv()
    text = frame.to_markdown(floatfmt=".4g")
    return f"## {title}\n\n{text}\n" if title else text + "\n"
