"""Numerical checks of the market's pricing and settlement properties."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .clearing import SparseBlocks, VariableIndex, evaluate_recourse_cost, solve_traditional
from .config import IDENTITY_TOLERANCE, default_config
from .exceptions import MarketError
from .lp import LpProblem, degenerate_rows, solve
from .model import uniform_redispatch_groups
from .ptdf import branch_parameters, phase_angle_system
from .settlement import congestion_rent, revenue_adequacy

if TYPE_CHECKING:
    from typing import Optional, Sequence

    from .clearing import ClearingSolution, RecourseEvaluation, TraditionalSolution
    from .model import MarketCase
    from .pricing import PriceSet
    from .settlement import SettlementLedger
    from .types import FloatArray, SolverConfig


logger = logging.getLogger(__name__)

ACTIVE_RESERVE = 1e-6
PRICE_IDENTITY_TOLERANCE = 1e-5


class CheckStatus(Enum):
    PASS = "PASS"
    WARN = "WARN"
    """Failed only where multipliers are not unique or shedding caps bind."""
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"
    """Hypotheses of the check do not hold."""


@dataclass(frozen=True)
class VerificationReport:
    check: str
    status: CheckStatus
    worst_residual: float = 0.0
    offenders: tuple[str, ...] = ()
    details: tuple[str, ...] = ()
    skipped: tuple[str, ...] = ()

    @property
    def failed(self) -> bool:
        return self.status is CheckStatus.FAIL

    def as_dict(self) -> dict[str, object]:
        return {
            "check": self.check,
            "status": self.status.value,
            "worst_residual": self.worst_residual,
            "offenders": list(self.offenders),
            "details": list(self.details),
            "skipped": list(self.skipped),
        }


def _status(worst: float, tolerance: float) -> CheckStatus:
    return CheckStatus.PASS if worst <= tolerance else CheckStatus.FAIL


_RESOURCE_ROWS = frozenset({"g", "rU", "rD", "dgU", "dgD", "cap_up", "cap_down", "res_up", "res_down"})


def _parse_row(name: str) -> tuple[str, list[str]]:
    name = name.split(":", 1)[-1]
    kind, _, rest = name.partition("[")
    return kind, rest.rstrip("]").split(",")


def degenerate_near(case: MarketCase, solution: ClearingSolution, generators: Sequence[int]) -> tuple[str, ...]:
    """Weakly complementary rows that can move the prices of ``generators``.

    These are the generators' own box, coupling and bound rows, and the flow
    limits whose multiplier reaches their bus through a nonzero shift factor.
    """
    labels = {case.generators[j].label for j in generators}
    buses = sorted({case.generators[j].bus for j in generators})
    lines = {line.label: line.id for line in case.lines}
    topologies = {"base": solution.network.base}
    topologies.update({scenario.label: solution.network.scenarios[k] for k, scenario in enumerate(case.scenarios)})

    near = []
    for name in solution.degenerate:
        kind, args = _parse_row(name)
        if kind in _RESOURCE_ROWS and args[-1] in labels:
            near.append(name)
        elif kind in ("flow+", "flow-") and len(args) == 2 and args[0] in topologies and args[1] in lines:
            shift = topologies[args[0]].shift_factors[lines[args[1]], buses]
            if np.any(np.abs(shift) > 1e-12):
                near.append(name)
    return tuple(near)


@dataclass(frozen=True, eq=False)
class DispatchRatios:
    """Share of cleared reserve each generator deploys, ``[scenario, generator]``."""

    x: FloatArray
    y: FloatArray


def _ratio(deployed: FloatArray, reserve: FloatArray) -> FloatArray:
    ratio = np.zeros_like(deployed)
    active = reserve > 0
    ratio[:, active] = deployed[:, active] / reserve[active]
    return ratio


def dispatch_ratios(solution: ClearingSolution) -> DispatchRatios:
    return DispatchRatios(
        x=_ratio(solution.up, solution.r_up),
        y=_ratio(solution.down, solution.r_down),
    )


def check_uniform_pricing(
    case: MarketCase,
    prices: PriceSet,
    solution: ClearingSolution,
    tolerance: float = IDENTITY_TOLERANCE,
) -> VerificationReport:
    """Co-located resources must see one energy price and one price per reserve direction.

    Loads whose shedding cap binds and reserve groups at buses mixing
    re-dispatch prices fall outside the hypotheses and are skipped. Energy
    prices are nodal, so an energy spread always fails; a reserve spread is
    a warning only when a weakly complementary row touches the group.
    """
    worst = 0.0
    offenders: list[str] = []
    skipped: list[str] = []
    details: list[str] = []
    hard = False

    for bus in case.buses:
        values = [prices.eta_g[gen.id] for gen in case.generators if gen.bus == bus.id]
        for load in case.loads:
            if load.bus != bus.id:
                continue
            if abs(prices.shed_adjustment[load.id]) > tolerance:
                skipped.append(f"{load.label}: shedding cap binds")
                continue
            values.append(prices.eta_d[load.id])
        if len(values) > 1:
            spread = float(np.ptp(values))
            worst = max(worst, spread)
            if spread > tolerance:
                offenders.append(f"energy at {bus.label}")
                hard = True

    groups = uniform_redispatch_groups(case)
    for bus in groups.violating_buses:
        skipped.append(f"bus {case.buses[bus].label}: re-dispatch prices differ")
    for group in groups.groups:
        for name, eta, cleared in (
            ("up", prices.eta_up, solution.r_up),
            ("down", prices.eta_down, solution.r_down),
        ):
            members = [j for j in group if cleared[j] > ACTIVE_RESERVE]
            if len(members) < 2:
                continue
            spread = float(np.ptp(eta[members]))
            worst = max(worst, spread)
            if spread <= tolerance:
                continue
            offenders.append(f"reserve {name} at {', '.join(case.generators[j].label for j in members)}")
            near = degenerate_near(case, solution, members)
            if near:
                details.append(f"reserve {name} multipliers not unique: {', '.join(near)}")
            else:
                hard = True

    if worst <= tolerance:
        status = CheckStatus.PASS
    else:
        status = CheckStatus.FAIL if hard else CheckStatus.WARN
    return VerificationReport(
        check="uniform_pricing",
        status=status,
        worst_residual=worst,
        offenders=tuple(offenders),
        details=tuple(details),
        skipped=tuple(skipped),
    )


def check_revenue_adequacy(
    ledger: SettlementLedger, tolerance: float = IDENTITY_TOLERANCE
) -> VerificationReport:
    """Column balance on the raw residuals.

    A column whose whole residual is the value of binding shedding caps is a
    warning; any other imbalance fails.
    """
    result = revenue_adequacy(ledger, tolerance)
    relative = np.abs(result.residuals) / (1 + result.gross)
    details = tuple(
        f"{column}: shedding caps account for {cap:.6g} of {residual:.6g}"
        for column, cap, residual in zip(result.columns, result.shed_cap, result.residuals)
        if abs(cap) > tolerance
    )
    if result.passed:
        status = CheckStatus.PASS
    elif result.unexplained_failing:
        status = CheckStatus.FAIL
    else:
        status = CheckStatus.WARN
    return VerificationReport(
        check="revenue_adequacy",
        status=status,
        worst_residual=float(relative.max(initial=0)),
        offenders=result.failing,
        details=details,
    )


def check_kkt_identities(
    solution: ClearingSolution,
    case: MarketCase,
    tolerance: float = IDENTITY_TOLERANCE,
) -> VerificationReport:
    """Multiplied stationarity of shedding, upward and downward re-dispatch.

    ``lam_k dd = eps C_L dd + rho dd (+ tau dd)``,
    ``alpha rU = (lam_k - rho - eps Cbar) dgU`` and
    ``beta rD = (eps Cund - lam_k + rho) dgD``, with ``rho = S_k^T mu_k`` at
    the resource's bus. A residual beyond what the LP residuals allow points
    at an indexing error rather than at the solver.
    """
    worst = 0.0
    offenders: list[str] = []
    details: list[str] = []
    c_shed = case.load_column("c_shed")
    gen_buses, load_buses = case.generator_buses, case.load_buses

    kkt = solution.kkt
    problem = solution.problem
    stationarity = kkt.stationarity * (1 + float(np.abs(problem.objective).max(initial=0)))
    complementarity = kkt.complementarity * (1 + abs(solution.expected_total_cost))
    allowance = stationarity * float(np.abs(solution.lp.x).max(initial=1)) + 2 * complementarity

    for k, scenario in enumerate(case.scenarios):
        weight = scenario.probability
        rho = solution.network.scenarios[k].shift_factors.T @ solution.mu_k[k]
        lam = solution.lam_k[k]
        shed, up, down = solution.shed[k], solution.up[k], solution.down[k]
        tau = solution.tau[k]

        shed_terms = (lam * shed, weight * c_shed * shed, rho[load_buses] * shed, tau * shed)
        shed_residual = shed_terms[0] - shed_terms[1] - shed_terms[2] - shed_terms[3]
        for load in case.loads:
            if tau[load.id] > tolerance and shed[load.id] > 0:
                details.append(f"{scenario.label}/{load.label}: shedding cap binds")

        c_up = np.asarray(scenario.c_redispatch_up)
        up_lhs = solution.alpha[k] * solution.r_up
        up_rhs = (lam - rho[gen_buses] - weight * c_up) * up
        c_down = np.asarray(scenario.c_redispatch_down)
        down_lhs = solution.beta[k] * solution.r_down
        down_rhs = (weight * c_down - lam + rho[gen_buses]) * down

        for kind, residual, labels, scale in (
            ("shed", shed_residual, [load.label for load in case.loads], np.abs(np.vstack(shed_terms)).max(axis=0)),
            ("up", up_lhs - up_rhs, [gen.label for gen in case.generators], np.maximum(np.abs(up_lhs), np.abs(up_rhs))),
            ("down", down_lhs - down_rhs, [gen.label for gen in case.generators], np.maximum(np.abs(down_lhs), np.abs(down_rhs))),
        ):
            relative = np.abs(residual) / (1 + scale)
            if relative.size:
                worst = max(worst, float(relative.max()))
            for label, value, absolute in zip(labels, relative, np.abs(residual)):
                if value > tolerance and absolute > allowance:
                    offenders.append(f"{scenario.label}/{kind}/{label}")

    if offenders:
        status = CheckStatus.FAIL
    elif worst > tolerance:
        status = CheckStatus.WARN
        details.append(f"residual {worst:.3g} within the LP residual allowance {allowance:.3g}")
    else:
        status = CheckStatus.PASS
    return VerificationReport(
        check="kkt_identities",
        status=status,
        worst_residual=worst,
        offenders=tuple(offenders),
        details=tuple(details),
    )


def check_lp_kkt(solution: ClearingSolution, tolerance: float) -> VerificationReport:
    """Primal, dual, stationarity and complementarity residuals of the LP.

    Weakly complementary rows are listed but never excuse a residual.
    """
    residuals = solution.kkt.as_dict()
    offenders = tuple(name for name, value in residuals.items() if value > tolerance)
    return VerificationReport(
        check="lp_kkt",
        status=_status(solution.kkt.worst, tolerance),
        worst_residual=solution.kkt.worst,
        offenders=offenders,
        details=(f"{len(solution.degenerate)} weakly complementary rows",),
    )


@dataclass(frozen=True)
class PhaseAngleIndex:
    theta: slice
    theta_k: tuple[slice, ...]
    nodal: slice
    nodal_k: tuple[slice, ...]
    flow_fwd: slice
    flow_rev: slice
    flow_k_fwd: tuple[slice, ...]
    flow_k_rev: tuple[slice, ...]


def build_phase_angle_model(case: MarketCase) -> tuple[LpProblem, PhaseAngleIndex]:
    """The scenario-oriented LP with bus angles in place of shift factors.

    Nodal balances ``B theta - gen + load = 0`` replace the system balance and
    ``F theta`` gives line flows. Slack angles are pinned at zero. Reserve,
    re-dispatch and shedding columns keep the shift-factor model's layout.
    """
    base_index = VariableIndex.layout(case)
    n_g, n_b, n_lines = case.n_generators, case.n_buses, case.n_lines
    n_k = case.n_scenarios

    column = base_index.n_variables
    theta = slice(column, column + n_b)
    theta_k = tuple(slice(column + n_b * (k + 1), column + n_b * (k + 2)) for k in range(n_k))
    n_variables = column + n_b * (n_k + 1)

    nodal = slice(0, n_b)
    nodal_k = tuple(slice(n_b * (k + 1), n_b * (k + 2)) for k in range(n_k))
    n_eq = n_b * (n_k + 1)

    flow_fwd, flow_rev = slice(0, n_lines), slice(n_lines, 2 * n_lines)
    box_up, box_down = slice(2 * n_lines, 2 * n_lines + n_g), slice(2 * n_lines + n_g, 2 * n_lines + 2 * n_g)
    ub_row = 2 * n_lines + 2 * n_g
    flow_k_fwd, flow_k_rev, couple_up, couple_down = [], [], [], []
    for _ in range(n_k):
        flow_k_fwd.append(slice(ub_row, ub_row + n_lines))
        flow_k_rev.append(slice(ub_row + n_lines, ub_row + 2 * n_lines))
        couple_up.append(slice(ub_row + 2 * n_lines, ub_row + 2 * n_lines + n_g))
        couple_down.append(slice(ub_row + 2 * n_lines + n_g, ub_row + 2 * n_lines + 2 * n_g))
        ub_row += 2 * n_lines + 2 * n_g
    index = PhaseAngleIndex(
        theta=theta,
        theta_k=theta_k,
        nodal=nodal,
        nodal_k=nodal_k,
        flow_fwd=flow_fwd,
        flow_rev=flow_rev,
        flow_k_fwd=tuple(flow_k_fwd),
        flow_k_rev=tuple(flow_k_rev),
    )

    objective = np.zeros(n_variables)
    lower = np.zeros(n_variables)
    upper = np.full(n_variables, np.inf)
    objective[base_index.g] = case.generator_column("c_energy")
    objective[base_index.r_up] = case.generator_column("c_ru")
    objective[base_index.r_down] = case.generator_column("c_rd")
    lower[base_index.g] = -np.inf
    upper[base_index.r_up] = case.generator_column("ru_max")
    upper[base_index.r_down] = case.generator_column("rd_max")
    for block in (theta,) + theta_k:
        lower[block] = -np.inf
        lower[block.start + case.slack_bus] = upper[block.start + case.slack_bus] = 0.0

    gen_map, load_map = case.generator_incidence(), case.load_incidence()
    demand = case.demand
    eq, ub = SparseBlocks(), SparseBlocks()
    b_eq, b_ub = np.zeros(n_eq), np.zeros(ub_row)

    system = phase_angle_system(case)
    eq.add(nodal, theta, system.susceptance)
    eq.add(nodal, base_index.g, -gen_map)
    b_eq[nodal] = -load_map @ demand
    ub.add(flow_fwd, theta, system.branch)
    ub.add(flow_rev, theta, -system.branch)
    capacity = np.array([line.capacity for line in case.lines], dtype=float)
    b_ub[flow_fwd] = capacity
    b_ub[flow_rev] = capacity

    eye = np.eye(n_g)
    ub.add(box_up, base_index.g, eye)
    ub.add(box_up, base_index.r_up, eye)
    ub.add(box_down, base_index.g, -eye)
    ub.add(box_down, base_index.r_down, eye)
    b_ub[box_up] = case.generator_column("g_max")
    b_ub[box_down] = -case.generator_column("g_min")

    for k, scenario in enumerate(case.scenarios):
        weight = scenario.probability
        realized = demand + np.asarray(scenario.load_fluctuation)
        objective[base_index.up[k]] = weight * np.asarray(scenario.c_redispatch_up)
        objective[base_index.down[k]] = -weight * np.asarray(scenario.c_redispatch_down)
        objective[base_index.shed[k]] = weight * case.load_column("c_shed")
        upper[base_index.shed[k]] = realized

        system_k = phase_angle_system(case, k)
        _, capacity_k = branch_parameters(case, k)
        eq.add(nodal_k[k], theta_k[k], system_k.susceptance)
        eq.add(nodal_k[k], base_index.g, -gen_map)
        eq.add(nodal_k[k], base_index.up[k], -gen_map)
        eq.add(nodal_k[k], base_index.down[k], gen_map)
        eq.add(nodal_k[k], base_index.shed[k], -load_map)
        b_eq[nodal_k[k]] = -load_map @ realized

        ub.add(index.flow_k_fwd[k], theta_k[k], system_k.branch)
        ub.add(index.flow_k_rev[k], theta_k[k], -system_k.branch)
        b_ub[index.flow_k_fwd[k]] = capacity_k
        b_ub[index.flow_k_rev[k]] = capacity_k

        ub.add(couple_up[k], base_index.up[k], eye)
        ub.add(couple_up[k], base_index.r_up, -eye)
        ub.add(couple_down[k], base_index.down[k], eye)
        ub.add(couple_down[k], base_index.r_down, -eye)

    problem = LpProblem.build(
        objective,
        a_eq=eq.matrix(n_eq, n_variables),
        b_eq=b_eq,
        a_ub=ub.matrix(ub_row, n_variables),
        b_ub=b_ub,
        lower=lower,
        upper=upper,
    )
    return problem, index


def phase_angle_crosscheck(
    case: MarketCase,
    solution: ClearingSolution,
    config: Optional[SolverConfig] = None,
    tolerance: float = IDENTITY_TOLERANCE,
) -> VerificationReport:
    """Re-clear with bus angles and compare objective, nodal prices and rents."""
    config = config or default_config()
    problem, index = build_phase_angle_model(case)
    lp = solve(problem, config)
    if not lp.optimal:
        return VerificationReport(
            check="phase_angle",
            status=CheckStatus.FAIL,
            offenders=("phase-angle model " + lp.status.value,),
        )

    offenders: list[str] = []
    objective_gap = abs(lp.objective_value - solution.expected_total_cost) / (
        1 + abs(solution.expected_total_cost)
    )
    if objective_gap > tolerance:
        offenders.append(f"objective differs by {objective_gap:.3g}")

    network = solution.network
    nodal_prices = [lp.eq_duals[index.nodal]] + [lp.eq_duals[rows] for rows in index.nodal_k]
    shift_prices = [solution.lam - network.base.shift_factors.T @ solution.mu] + [
        solution.lam_k[k] - topology.shift_factors.T @ solution.mu_k[k]
        for k, topology in enumerate(network.scenarios)
    ]
    price_gap = max(float(np.abs(a - b).max(initial=0)) for a, b in zip(nodal_prices, shift_prices))

    capacities = [network.base.capacity] + [topology.capacity for topology in network.scenarios]
    fwd = [index.flow_fwd] + list(index.flow_k_fwd)
    rev = [index.flow_rev] + list(index.flow_k_rev)
    angle_rents = np.array(
        [cap @ (lp.ub_duals[f] + lp.ub_duals[r]) for cap, f, r in zip(capacities, fwd, rev)]
    )
    base_rent, scenario_rents = congestion_rent(solution)
    shift_rents = np.concatenate([[base_rent], scenario_rents])
    rent_gap = float(np.max(np.abs(angle_rents - shift_rents) / (1 + np.abs(shift_rents))))

    degenerate = bool(solution.degenerate) or bool(
        degenerate_rows(problem, lp, config["degeneracy_threshold"])
    )
    dual_offenders = []
    if price_gap > PRICE_IDENTITY_TOLERANCE:
        dual_offenders.append(f"nodal prices differ by {price_gap:.3g}")
    if rent_gap > tolerance:
        dual_offenders.append(f"congestion rents differ by {rent_gap:.3g}")

    if offenders or (dual_offenders and not degenerate):
        status = CheckStatus.FAIL
    elif dual_offenders:
        status = CheckStatus.WARN
    else:
        status = CheckStatus.PASS
    return VerificationReport(
        check="phase_angle",
        status=status,
        worst_residual=max(objective_gap, price_gap, rent_gap),
        offenders=tuple(offenders + dual_offenders),
        details=(f"objective {lp.objective_value:.6f} vs {solution.expected_total_cost:.6f}",),
    )


def check_reversed_flow(
    solution: ClearingSolution, case: MarketCase, threshold: float = 1e-7
) -> VerificationReport:
    """Flag topologies where a line's reverse-direction limit carries a multiplier."""
    offenders = [
        f"base/{line.label}" for line in case.lines if solution.mu_rev[line.id] > threshold
    ]
    for k, scenario in enumerate(case.scenarios):
        offenders += [
            f"{scenario.label}/{line.label}"
            for line in case.lines
            if solution.mu_k_rev[k, line.id] > threshold
        ]
    return VerificationReport(
        check="reversed_flow",
        status=CheckStatus.WARN if offenders else CheckStatus.PASS,
        worst_residual=float(
            max(solution.mu_rev.max(initial=0), solution.mu_k_rev.max(initial=0))
        ),
        offenders=tuple(offenders),
    )


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    scenario_cost: float
    reserve_up: float
    reserve_down: float
    traditional: Optional[TraditionalSolution]
    recourse: Optional[RecourseEvaluation]
    eta_up: FloatArray
    eta_down: FloatArray
    violated: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.recourse is not None and self.recourse.feasible

    @property
    def gap(self) -> Optional[float]:
        if not self.feasible or self.recourse is None or self.recourse.expected_cost is None:
            return None
        return self.recourse.expected_cost - self.scenario_cost

    def to_frame(self) -> pd.DataFrame:
        rows = {
            "scenario_oriented_cost": self.scenario_cost,
            "reserve_requirement_up": self.reserve_up,
            "reserve_requirement_down": self.reserve_down,
            "traditional_bid_cost": self.traditional.cost if self.traditional else np.nan,
            "traditional_expected_cost": (
                self.recourse.expected_cost
                if self.recourse and self.recourse.expected_cost is not None
                else np.nan
            ),
            "gap": np.nan if self.gap is None else self.gap,
            "gamma_up": self.traditional.gamma_up if self.traditional else np.nan,
            "gamma_down": self.traditional.gamma_down if self.traditional else np.nan,
        }
        frame = pd.DataFrame({"value": rows})
        frame.index.name = "quantity"
        return frame

    def report(self, tolerance: float = IDENTITY_TOLERANCE) -> VerificationReport:
        if not self.feasible:
            return VerificationReport(
                check="traditional_comparison",
                status=CheckStatus.PASS,
                details=("traditional schedule infeasible: " + ", ".join(self.violated),),
            )
        gap = self.gap or 0.0
        return VerificationReport(
            check="traditional_comparison",
            status=CheckStatus.PASS if gap >= -tolerance * (1 + abs(self.scenario_cost)) else CheckStatus.FAIL,
            worst_residual=gap,
            details=(f"suboptimality gap {gap:.6f}",),
        )


def compare_traditional(
    case: MarketCase,
    solution: ClearingSolution,
    prices: PriceSet,
    reserve_up: Optional[float] = None,
    reserve_down: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> ComparisonReport:
    """Clear against fixed requirements, then score that schedule under the scenarios.

    Requirements default to the reserve totals of the scenario-oriented optimum.
    """
    reserve_up = float(solution.r_up.sum()) if reserve_up is None else reserve_up
    reserve_down = float(solution.r_down.sum()) if reserve_down is None else reserve_down
    report = ComparisonReport(
        scenario_cost=solution.expected_total_cost,
        reserve_up=reserve_up,
        reserve_down=reserve_down,
        traditional=None,
        recourse=None,
        eta_up=prices.eta_up,
        eta_down=prices.eta_down,
    )
    try:
        traditional = solve_traditional(case, reserve_up, reserve_down, config, solution.network)
    except MarketError as error:
        logger.debug(f"Traditional clearing failed: {error}")
        return replace(report, violated=error.constraints)

    recourse = evaluate_recourse_cost(case, traditional.dispatch(), config, solution.network)
    return replace(report, traditional=traditional, recourse=recourse, violated=recourse.violated)


def run_all(
    case: MarketCase,
    solution: ClearingSolution,
    prices: PriceSet,
    ledger: SettlementLedger,
    config: Optional[SolverConfig] = None,
) -> list[VerificationReport]:
    config = config or default_config()
    tolerance = config["identity_tolerance"]
    reports = [
        check_lp_kkt(solution, max(config["tolerance"] * 100, 1e-6)),
        check_uniform_pricing(case, prices, solution, tolerance),
        check_revenue_adequacy(ledger, tolerance),
        check_kkt_identities(solution, case, tolerance),
        phase_angle_crosscheck(case, solution, config, tolerance),
        check_reversed_flow(solution, case, config["degeneracy_threshold"]),
    ]
    for report in reports:
        logger.debug(f"{report.check}: {report.status.value} ({report.worst_residual:.3g})")
    return reports
