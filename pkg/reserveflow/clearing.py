"""Energy and reserve clearing LPs.

The scenario-oriented model co-optimizes day-ahead energy, upward and
downward reserve and the expected cost of real-time re-dispatch and load
shedding over every contingency scenario. The traditional model clears
reserve against fixed system requirements instead.

Balance rows are written as ``-sum(injection) = -sum(demand)`` so that their
multipliers come out as positive energy prices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from scipy import sparse

from .config import default_config
from .exceptions import (
    CaseValidationError,
    InfeasibleMarketError,
    NumericalFailureError,
    UnboundedMarketError,
)
from .lp import LpProblem, LpStatus, check_kkt, degenerate_rows, solve
from .model import validate_case
from .ptdf import build_network

if TYPE_CHECKING:
    from typing import Mapping, Optional

    from .lp import KktResiduals, LpSolution
    from .model import MarketCase
    from .ptdf import NetworkModel
    from .types import FixedResource, FloatArray, SolverConfig


logger = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-6


def _span(start: int, size: int) -> slice:
    return slice(start, start + size)


@dataclass(frozen=True)
class VariableIndex:
    """Where every variable and row of a clearing LP lives."""

    n_generators: int
    n_loads: int
    n_lines: int
    n_scenarios: int
    g: slice
    r_up: slice
    r_down: slice
    up: tuple[slice, ...]
    down: tuple[slice, ...]
    shed: tuple[slice, ...]
    base_balance: Optional[int]
    scenario_balance: tuple[int, ...]
    requirement_up: Optional[int]
    requirement_down: Optional[int]
    base_flow_fwd: Optional[slice]
    base_flow_rev: Optional[slice]
    box_generators: tuple[int, ...]
    box_up: slice
    box_down: slice
    flow_fwd: tuple[slice, ...]
    flow_rev: tuple[slice, ...]
    couple_up: tuple[slice, ...]
    couple_down: tuple[slice, ...]
    n_variables: int
    n_eq: int
    n_ub: int

    @classmethod
    def layout(
        cls,
        case: MarketCase,
        *,
        scenarios: bool = True,
        fixed: frozenset[int] = frozenset(),
        base_rows: bool = True,
        requirement: bool = False,
    ) -> VariableIndex:
        n_g, n_l, n_lines = case.n_generators, case.n_loads, case.n_lines
        n_k = case.n_scenarios if scenarios else 0

        g, r_up, r_down = _span(0, n_g), _span(n_g, n_g), _span(2 * n_g, n_g)
        column = 3 * n_g
        up, down, shed = [], [], []
        for _ in range(n_k):
            up.append(_span(column, n_g))
            down.append(_span(column + n_g, n_g))
            shed.append(_span(column + 2 * n_g, n_l))
            column += 2 * n_g + n_l

        eq_row = 0
        base_balance = None
        if base_rows:
            base_balance, eq_row = 0, 1
        scenario_balance = tuple(range(eq_row, eq_row + n_k))
        eq_row += n_k
        requirement_up = requirement_down = None
        if requirement:
            requirement_up, requirement_down = eq_row, eq_row + 1
            eq_row += 2

        ub_row = 0
        base_flow_fwd = base_flow_rev = None
        if base_rows:
            base_flow_fwd, base_flow_rev = _span(0, n_lines), _span(n_lines, n_lines)
            ub_row = 2 * n_lines
        box_generators = tuple(j for j in range(n_g) if j not in fixed)
        n_box = len(box_generators)
        box_up, box_down = _span(ub_row, n_box), _span(ub_row + n_box, n_box)
        ub_row += 2 * n_box
        flow_fwd, flow_rev, couple_up, couple_down = [], [], [], []
        for _ in range(n_k):
            flow_fwd.append(_span(ub_row, n_lines))
            flow_rev.append(_span(ub_row + n_lines, n_lines))
            couple_up.append(_span(ub_row + 2 * n_lines, n_g))
            couple_down.append(_span(ub_row + 2 * n_lines + n_g, n_g))
            ub_row += 2 * n_lines + 2 * n_g

        return cls(
            n_generators=n_g,
            n_loads=n_l,
            n_lines=n_lines,
            n_scenarios=n_k,
            g=g,
            r_up=r_up,
            r_down=r_down,
            up=tuple(up),
            down=tuple(down),
            shed=tuple(shed),
            base_balance=base_balance,
            scenario_balance=scenario_balance,
            requirement_up=requirement_up,
            requirement_down=requirement_down,
            base_flow_fwd=base_flow_fwd,
            base_flow_rev=base_flow_rev,
            box_generators=box_generators,
            box_up=box_up,
            box_down=box_down,
            flow_fwd=tuple(flow_fwd),
            flow_rev=tuple(flow_rev),
            couple_up=tuple(couple_up),
            couple_down=tuple(couple_down),
            n_variables=column,
            n_eq=eq_row,
            n_ub=ub_row,
        )


class SparseBlocks:
    """COO accumulator for dense blocks placed at row and column offsets."""

    def __init__(self) -> None:
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows: slice | int, cols: slice, block: FloatArray) -> None:
        block = np.atleast_2d(block)
        r, c = np.nonzero(block)
        row_start = rows if isinstance(rows, int) else rows.start
        self.rows.append(r + row_start)
        self.cols.append(c + cols.start)
        self.vals.append(block[r, c])

    def matrix(self, n_rows: int, n_cols: int) -> sparse.csr_matrix:
        if not self.rows:
            return sparse.csr_matrix((n_rows, n_cols))
        return sparse.csr_matrix(
            (
                np.concatenate(self.vals),
                (np.concatenate(self.rows), np.concatenate(self.cols)),
            ),
            shape=(n_rows, n_cols),
        )


def _variable_names(case: MarketCase, index: VariableIndex) -> list[str]:
    gens = [gen.label for gen in case.generators]
    loads = [load.label for load in case.loads]
    names = [f"g[{label}]" for label in gens]
    names += [f"rU[{label}]" for label in gens]
    names += [f"rD[{label}]" for label in gens]
    for k in range(index.n_scenarios):
        scenario = case.scenarios[k].label
        names += [f"dgU[{scenario},{label}]" for label in gens]
        names += [f"dgD[{scenario},{label}]" for label in gens]
        names += [f"dd[{scenario},{label}]" for label in loads]
    return names


def _row_names(case: MarketCase, index: VariableIndex) -> tuple[list[str], list[str]]:
    gens = [gen.label for gen in case.generators]
    lines = [line.label for line in case.lines]
    eq_names: list[str] = []
    if index.base_balance is not None:
        eq_names.append("balance[base]")
    eq_names += [f"balance[{case.scenarios[k].label}]" for k in range(index.n_scenarios)]
    if index.requirement_up is not None:
        eq_names += ["requirement[up]", "requirement[down]"]

    ub_names: list[str] = []
    if index.base_flow_fwd is not None:
        ub_names += [f"flow+[base,{label}]" for label in lines]
        ub_names += [f"flow-[base,{label}]" for label in lines]
    ub_names += [f"cap_up[{gens[j]}]" for j in index.box_generators]
    ub_names += [f"cap_down[{gens[j]}]" for j in index.box_generators]
    for k in range(index.n_scenarios):
        scenario = case.scenarios[k].label
        ub_names += [f"flow+[{scenario},{label}]" for label in lines]
        ub_names += [f"flow-[{scenario},{label}]" for label in lines]
        ub_names += [f"res_up[{scenario},{label}]" for label in gens]
        ub_names += [f"res_down[{scenario},{label}]" for label in gens]
    return eq_names, ub_names


def _assemble(
    case: MarketCase,
    network: NetworkModel,
    index: VariableIndex,
    *,
    fixed: Optional[Mapping[int, FixedResource]] = None,
    drop_fixed_cost: bool = False,
    requirement: Optional[tuple[float, float]] = None,
) -> LpProblem:
    fixed = fixed or {}
    n_g, n_l = case.n_generators, case.n_loads
    demand = case.demand
    gen_map, load_map = case.generator_incidence(), case.load_incidence()

    objective = np.zeros(index.n_variables)
    lower = np.zeros(index.n_variables)
    upper = np.full(index.n_variables, np.inf)

    objective[index.g] = case.generator_column("c_energy")
    objective[index.r_up] = case.generator_column("c_ru")
    objective[index.r_down] = case.generator_column("c_rd")
    lower[index.g] = -np.inf
    upper[index.r_up] = case.generator_column("ru_max")
    upper[index.r_down] = case.generator_column("rd_max")

    for j, values in fixed.items():
        for block, key in ((index.g, "g"), (index.r_up, "r_up"), (index.r_down, "r_down")):
            column = block.start + j
            lower[column] = upper[column] = values[key]  # type: ignore[literal-required]
            if drop_fixed_cost:
                objective[column] = 0.0

    eq = SparseBlocks()
    b_eq = np.zeros(index.n_eq)
    ub = SparseBlocks()
    b_ub = np.zeros(index.n_ub)
    ones_g, ones_l = -np.ones((1, n_g)), -np.ones((1, n_l))

    if index.base_balance is not None:
        eq.add(index.base_balance, index.g, ones_g)
        b_eq[index.base_balance] = -demand.sum()
    if index.base_flow_fwd is not None and index.base_flow_rev is not None:
        shift, capacity = network.base.shift_factors, network.base.capacity
        gen_shift, load_shift = shift @ gen_map, shift @ load_map
        ub.add(index.base_flow_fwd, index.g, gen_shift)
        ub.add(index.base_flow_rev, index.g, -gen_shift)
        b_ub[index.base_flow_fwd] = capacity + load_shift @ demand
        b_ub[index.base_flow_rev] = capacity - load_shift @ demand
    if requirement is not None:
        assert index.requirement_up is not None and index.requirement_down is not None
        eq.add(index.requirement_up, index.r_up, ones_g)
        eq.add(index.requirement_down, index.r_down, ones_g)
        b_eq[index.requirement_up] = -requirement[0]
        b_eq[index.requirement_down] = -requirement[1]

    boxed = list(index.box_generators)
    n_box = len(boxed)
    if n_box:
        select = np.zeros((n_box, n_g))
        select[np.arange(n_box), boxed] = 1.0
        ub.add(index.box_up, index.g, select)
        ub.add(index.box_up, index.r_up, select)
        ub.add(index.box_down, index.g, -select)
        ub.add(index.box_down, index.r_down, select)
        b_ub[index.box_up] = case.generator_column("g_max")[boxed]
        b_ub[index.box_down] = -case.generator_column("g_min")[boxed]

    eye = np.eye(n_g)
    for k in range(index.n_scenarios):
        scenario = case.scenarios[k]
        weight = scenario.probability
        realized = demand + np.asarray(scenario.load_fluctuation)
        objective[index.up[k]] = weight * np.asarray(scenario.c_redispatch_up)
        objective[index.down[k]] = -weight * np.asarray(scenario.c_redispatch_down)
        objective[index.shed[k]] = weight * case.load_column("c_shed")
        upper[index.shed[k]] = realized

        row = index.scenario_balance[k]
        eq.add(row, index.g, ones_g)
        eq.add(row, index.up[k], ones_g)
        eq.add(row, index.down[k], -ones_g)
        eq.add(row, index.shed[k], ones_l)
        b_eq[row] = -realized.sum()

        topology = network.scenarios[k]
        gen_shift = topology.shift_factors @ gen_map
        load_shift = topology.shift_factors @ load_map
        for rows, sign in ((index.flow_fwd[k], 1.0), (index.flow_rev[k], -1.0)):
            ub.add(rows, index.g, sign * gen_shift)
            ub.add(rows, index.up[k], sign * gen_shift)
            ub.add(rows, index.down[k], -sign * gen_shift)
            ub.add(rows, index.shed[k], sign * load_shift)
            b_ub[rows] = topology.capacity + sign * (load_shift @ realized)

        ub.add(index.couple_up[k], index.up[k], eye)
        ub.add(index.couple_up[k], index.r_up, -eye)
        ub.add(index.couple_down[k], index.down[k], eye)
        ub.add(index.couple_down[k], index.r_down, -eye)

    eq_names, ub_names = _row_names(case, index)
    return LpProblem(
        objective=objective,
        a_eq=eq.matrix(index.n_eq, index.n_variables),
        b_eq=b_eq,
        a_ub=ub.matrix(index.n_ub, index.n_variables),
        b_ub=b_ub,
        lower=lower,
        upper=upper,
        variable_names=tuple(_variable_names(case, index)),
        eq_names=tuple(eq_names),
        ub_names=tuple(ub_names),
    )


def build_model_two(
    case: MarketCase, network: Optional[NetworkModel] = None
) -> tuple[LpProblem, VariableIndex]:
    """The scenario-oriented clearing LP and its index."""
    network = network or build_network(case)
    index = VariableIndex.layout(case)
    problem = _assemble(case, network, index)
    logger.debug(
        f"Scenario-oriented LP for {case.name!r}: {index.n_variables} variables, "
        f"{index.n_eq} equalities, {index.n_ub} inequalities"
    )
    return problem, index


def build_model_one(
    case: MarketCase,
    reserve_up: float,
    reserve_down: float,
    network: Optional[NetworkModel] = None,
) -> LpProblem:
    """The traditional clearing LP with fixed system reserve requirements."""
    network = network or build_network(case)
    index = VariableIndex.layout(case, scenarios=False, requirement=True)
    return _assemble(case, network, index, requirement=(reserve_up, reserve_down))


def build_model_three(
    case: MarketCase,
    generator: int,
    values: FixedResource,
    network: Optional[NetworkModel] = None,
) -> tuple[LpProblem, VariableIndex]:
    """Scenario-oriented LP with one generator's offers pinned and its bids removed.

    The optimal value is the expected cost borne by every other participant.
    """
    network = network or build_network(case)
    index = VariableIndex.layout(case, fixed=frozenset({generator}))
    problem = _assemble(case, network, index, fixed={generator: values}, drop_fixed_cost=True)
    return problem, index


@dataclass(frozen=True, eq=False)
class ClearingSolution:
    """Primal schedule and multipliers of a solved scenario-oriented LP.

    Scenario arrays are indexed ``[scenario, resource]``. Flow multipliers are
    kept per direction; ``mu`` and ``mu_k`` are their differences.
    """

    g: FloatArray
    r_up: FloatArray
    r_down: FloatArray
    up: FloatArray
    down: FloatArray
    shed: FloatArray
    lam: float
    mu_fwd: FloatArray
    mu_rev: FloatArray
    lam_k: FloatArray
    mu_k_fwd: FloatArray
    mu_k_rev: FloatArray
    alpha: FloatArray
    """Multipliers of ``dgU <= rU``."""
    alpha_low: FloatArray
    beta: FloatArray
    """Multipliers of ``dgD <= rD``."""
    beta_low: FloatArray
    tau: FloatArray
    """Multipliers of the shedding upper bound ``dd <= d + pi``."""
    tau_low: FloatArray
    flows: FloatArray
    flows_k: FloatArray
    expected_total_cost: float
    network: NetworkModel
    index: VariableIndex
    problem: LpProblem
    lp: LpSolution
    kkt: KktResiduals
    degenerate: tuple[str, ...] = ()

    @property
    def mu(self) -> FloatArray:
        return self.mu_fwd - self.mu_rev

    @property
    def mu_k(self) -> FloatArray:
        return self.mu_k_fwd - self.mu_k_rev

    @property
    def n_scenarios(self) -> int:
        return self.up.shape[0]

    def dispatch(self) -> dict[int, FixedResource]:
        return {
            j: {"g": float(self.g[j]), "r_up": float(self.r_up[j]), "r_down": float(self.r_down[j])}
            for j in range(self.g.size)
        }

    def line_flows(self, case: MarketCase, threshold: float = 1e-7) -> pd.DataFrame:
        """Flows of every topology with the direction whose limit carries a multiplier."""
        records = []
        topologies = [(self.network.base, self.flows, self.mu_fwd, self.mu_rev)] + [
            (self.network.scenarios[k], self.flows_k[k], self.mu_k_fwd[k], self.mu_k_rev[k])
            for k in range(self.n_scenarios)
        ]
        for topology, flows, fwd, rev in topologies:
            for line in case.lines:
                j = line.id
                binding = "forward" if fwd[j] > threshold else "reverse" if rev[j] > threshold else ""
                records.append(
                    {
                        "topology": topology.label,
                        "line": line.label,
                        "flow": flows[j],
                        "limit": topology.capacity[j],
                        "binding": binding,
                    }
                )
        return pd.DataFrame.from_records(records)


def _blocks(vector: FloatArray, spans: tuple[slice, ...], width: int) -> FloatArray:
    if not spans:
        return np.zeros((0, width))
    return np.vstack([vector[span] for span in spans])


def _flows(
    case: MarketCase, network: NetworkModel, x: FloatArray, index: VariableIndex
) -> tuple[FloatArray, FloatArray]:
    gen_map, load_map = case.generator_incidence(), case.load_incidence()
    demand = case.demand
    g = x[index.g]
    base = network.base.shift_factors @ (gen_map @ g - load_map @ demand)
    scenario_flows = []
    for k in range(index.n_scenarios):
        scenario = case.scenarios[k]
        realized = demand + np.asarray(scenario.load_fluctuation)
        output = g + x[index.up[k]] - x[index.down[k]]
        served = realized - x[index.shed[k]]
        injection = gen_map @ output - load_map @ served
        scenario_flows.append(network.scenarios[k].shift_factors @ injection)
    flows_k = np.vstack(scenario_flows) if scenario_flows else np.zeros((0, case.n_lines))
    return base, flows_k


def _extract(
    case: MarketCase,
    network: NetworkModel,
    index: VariableIndex,
    problem: LpProblem,
    lp: LpSolution,
    config: SolverConfig,
) -> ClearingSolution:
    x = lp.x
    n_g, n_l, n_lines = index.n_generators, index.n_loads, index.n_lines
    eq, ub = lp.eq_duals, lp.ub_duals
    nan_lines = np.full(n_lines, np.nan)
    flows, flows_k = _flows(case, network, x, index)
    kkt = check_kkt(problem, lp)
    if not kkt.within(config["tolerance"] * 100):
        logger.warning(f"KKT residuals above tolerance: {kkt.as_dict()}")

    return ClearingSolution(
        g=x[index.g],
        r_up=x[index.r_up],
        r_down=x[index.r_down],
        up=_blocks(x, index.up, n_g),
        down=_blocks(x, index.down, n_g),
        shed=_blocks(x, index.shed, n_l),
        lam=float(eq[index.base_balance]) if index.base_balance is not None else np.nan,
        mu_fwd=ub[index.base_flow_fwd] if index.base_flow_fwd is not None else nan_lines,
        mu_rev=ub[index.base_flow_rev] if index.base_flow_rev is not None else nan_lines,
        lam_k=eq[list(index.scenario_balance)],
        mu_k_fwd=_blocks(ub, index.flow_fwd, n_lines),
        mu_k_rev=_blocks(ub, index.flow_rev, n_lines),
        alpha=_blocks(ub, index.couple_up, n_g),
        alpha_low=_blocks(lp.lower_duals, index.up, n_g),
        beta=_blocks(ub, index.couple_down, n_g),
        beta_low=_blocks(lp.lower_duals, index.down, n_g),
        tau=_blocks(lp.upper_duals, index.shed, n_l),
        tau_low=_blocks(lp.lower_duals, index.shed, n_l),
        flows=flows,
        flows_k=flows_k,
        expected_total_cost=lp.objective_value,
        network=network,
        index=index,
        problem=problem,
        lp=lp,
        kkt=kkt,
        degenerate=degenerate_rows(problem, lp, config["degeneracy_threshold"]),
    )


def _raise_for_status(lp: LpSolution, what: str) -> None:
    if lp.status is LpStatus.INFEASIBLE:
        raise InfeasibleMarketError(
            f"{what} is infeasible; violated: {', '.join(lp.certificate_rows)}",
            constraints=lp.certificate_rows,
        )
    if lp.status is LpStatus.UNBOUNDED:
        raise UnboundedMarketError(
            f"{what} is unbounded along {', '.join(lp.certificate_rows)}",
            constraints=lp.certificate_rows,
        )


def solve_clearing(
    case: MarketCase,
    config: Optional[SolverConfig] = None,
    network: Optional[NetworkModel] = None,
    *,
    validate: bool = True,
) -> ClearingSolution:
    """Clear the scenario-oriented market."""
    config = config or default_config()
    if validate:
        report = validate_case(case)
        if not report.ok:
            raise CaseValidationError(report.errors)
    network = network or build_network(case)
    problem, index = build_model_two(case, network)
    lp = solve(problem, config)
    _raise_for_status(lp, f"Clearing of {case.name or 'case'}")

    solution = _extract(case, network, index, problem, lp, config)
    logger.debug(
        f"Cleared {case.name!r} at expected cost {solution.expected_total_cost:.6f} "
        f"with {len(solution.degenerate)} weakly complementary rows"
    )
    return solution


@dataclass(frozen=True, eq=False)
class TraditionalSolution:
    g: FloatArray
    r_up: FloatArray
    r_down: FloatArray
    lam: float
    mu: FloatArray
    gamma_up: float
    """Cost of one more MW of upward requirement."""
    gamma_down: float
    cost: float
    reserve_up: float
    reserve_down: float
    lp: LpSolution

    def dispatch(self) -> dict[int, FixedResource]:
        return {
            j: {"g": float(self.g[j]), "r_up": float(self.r_up[j]), "r_down": float(self.r_down[j])}
            for j in range(self.g.size)
        }


def solve_traditional(
    case: MarketCase,
    reserve_up: float,
    reserve_down: float,
    config: Optional[SolverConfig] = None,
    network: Optional[NetworkModel] = None,
) -> TraditionalSolution:
    """Clear energy and reserve against fixed system-wide requirements."""
    network = network or build_network(case)
    index = VariableIndex.layout(case, scenarios=False, requirement=True)
    problem = _assemble(case, network, index, requirement=(reserve_up, reserve_down))
    lp = solve(problem, config)
    _raise_for_status(lp, "Traditional clearing")

    assert index.base_flow_fwd is not None and index.base_flow_rev is not None
    assert index.requirement_up is not None and index.requirement_down is not None
    return TraditionalSolution(
        g=lp.x[index.g],
        r_up=lp.x[index.r_up],
        r_down=lp.x[index.r_down],
        lam=float(lp.eq_duals[index.base_balance]),
        mu=lp.ub_duals[index.base_flow_fwd] - lp.ub_duals[index.base_flow_rev],
        gamma_up=float(lp.eq_duals[index.requirement_up]),
        gamma_down=float(lp.eq_duals[index.requirement_down]),
        cost=lp.objective_value,
        reserve_up=reserve_up,
        reserve_down=reserve_down,
        lp=lp,
    )


@dataclass(frozen=True, eq=False)
class RecourseEvaluation:
    feasible: bool
    expected_cost: Optional[float]
    violated: tuple[str, ...] = ()
    solution: Optional[ClearingSolution] = None


def _base_violations(
    case: MarketCase, network: NetworkModel, fixed: Mapping[int, FixedResource]
) -> list[str]:
    g = np.array([fixed[j]["g"] for j in range(case.n_generators)])
    r_up = np.array([fixed[j]["r_up"] for j in range(case.n_generators)])
    r_down = np.array([fixed[j]["r_down"] for j in range(case.n_generators)])
    demand = case.demand
    slack = FEASIBILITY_SLACK * (1.0 + demand.sum())

    violated = []
    if abs(g.sum() - demand.sum()) > slack:
        violated.append("balance[base]")
    flows = network.base.shift_factors @ (case.generator_incidence() @ g - case.load_incidence() @ demand)
    for line, flow, limit in zip(case.lines, flows, network.base.capacity):
        if abs(flow) > limit + slack:
            violated.append(f"flow{'+' if flow > 0 else '-'}[base,{line.label}]")
    for gen in case.generators:
        j = gen.id
        if g[j] + r_up[j] > gen.g_max + slack:
            violated.append(f"cap_up[{gen.label}]")
        if g[j] - r_down[j] < gen.g_min - slack:
            violated.append(f"cap_down[{gen.label}]")
        if not -slack <= r_up[j] <= gen.ru_max + slack:
            violated.append(f"rU[{gen.label}]")
        if not -slack <= r_down[j] <= gen.rd_max + slack:
            violated.append(f"rD[{gen.label}]")
    return violated


def evaluate_recourse_cost(
    case: MarketCase,
    fixed: Mapping[int, FixedResource],
    config: Optional[SolverConfig] = None,
    network: Optional[NetworkModel] = None,
) -> RecourseEvaluation:
    """Expected total cost of a given day-ahead schedule.

    Day-ahead quantities are pinned; re-dispatch and shedding are optimized
    per scenario. Base-case rows are checked directly instead of being handed
    to the solver as constant rows.
    """
    config = config or default_config()
    network = network or build_network(case)
    violated = _base_violations(case, network, fixed)
    if violated:
        logger.debug(f"Day-ahead schedule violates {violated}")
        return RecourseEvaluation(feasible=False, expected_cost=None, violated=tuple(violated))

    index = VariableIndex.layout(case, fixed=frozenset(fixed), base_rows=False)
    problem = _assemble(case, network, index, fixed=fixed)
    lp = solve(problem, config)
    if lp.status is LpStatus.INFEASIBLE:
        return RecourseEvaluation(
            feasible=False, expected_cost=None, violated=lp.certificate_rows
        )
    if lp.status is LpStatus.UNBOUNDED:
        raise NumericalFailureError("Recourse evaluation cannot be unbounded")

    solution = _extract(case, network, index, problem, lp, config)
    return RecourseEvaluation(
        feasible=True, expected_cost=lp.objective_value, solution=solution
    )


def cost_breakdown(case: MarketCase, solution: ClearingSolution) -> dict[str, float]:
    """Split the expected total cost into its bid components."""
    weights = np.array([scenario.probability for scenario in case.scenarios])
    c_up = np.array([scenario.c_redispatch_up for scenario in case.scenarios]).reshape(-1, case.n_generators)
    c_down = np.array([scenario.c_redispatch_down for scenario in case.scenarios]).reshape(-1, case.n_generators)
    c_shed = case.load_column("c_shed")
    return {
        "energy": float(case.generator_column("c_energy") @ solution.g),
        "reserve_up": float(case.generator_column("c_ru") @ solution.r_up),
        "reserve_down": float(case.generator_column("c_rd") @ solution.r_down),
        "redispatch_up": float(weights @ (c_up * solution.up).sum(axis=1)),
        "redispatch_down": float(-weights @ (c_down * solution.down).sum(axis=1)),
        "shedding": float(weights @ (solution.shed @ c_shed)),
    }
