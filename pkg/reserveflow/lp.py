"""Linear programs in the form the market models are written in.

::

    minimize    c^T x
    subject to  A_eq x  = b_eq     (lambda, free)
                A_ub x <= b_ub     (mu >= 0)
                lower <= x <= upper  (z_lower, z_upper >= 0)

Multipliers follow the Lagrangian
``c^T x + lambda^T (A_eq x - b_eq) + mu^T (A_ub x - b_ub)
- z_lower^T (x - lower) + z_upper^T (x - upper)``, so stationarity reads
``c + A_eq^T lambda + A_ub^T mu - z_lower + z_upper = 0`` and each
multiplier is minus the derivative of the optimal value with respect to its
right-hand side.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .config import SolverMethod, default_config
from .exceptions import NumericalFailureError

if TYPE_CHECKING:
    from typing import Any, Iterator, Optional, Sequence

    from scipy.optimize import OptimizeResult

    from .types import FloatArray, SolverConfig


logger = logging.getLogger(__name__)

_SCALING_PASSES = 8
_LP_NAME = re.compile(r"[^A-Za-z0-9_.]")

DUAL_SELECTION = {
    SolverMethod.IPM.value: "HiGHS interior point with crossover, vertex duals",
    SolverMethod.SIMPLEX.value: "HiGHS dual simplex, vertex duals",
    SolverMethod.AUTO.value: "HiGHS default algorithm",
}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _as_matrix(matrix: Any, n_cols: int) -> sparse.csr_matrix:
    if matrix is None:
        return sparse.csr_matrix((0, n_cols))
    if sparse.issparse(matrix):
        return sparse.csr_matrix(matrix, dtype=float)
    dense = np.asarray(matrix, dtype=float)
    if dense.size == 0:
        return sparse.csr_matrix((0, n_cols))
    return sparse.csr_matrix(np.atleast_2d(dense))


def _as_vector(vector: Any, size: int, fill: float = 0.0) -> FloatArray:
    if vector is None:
        return np.full(size, fill)
    return np.asarray(vector, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: FloatArray
    a_eq: sparse.csr_matrix
    b_eq: FloatArray
    a_ub: sparse.csr_matrix
    b_ub: FloatArray
    lower: FloatArray
    upper: FloatArray
    variable_names: tuple[str, ...] = ()
    eq_names: tuple[str, ...] = ()
    ub_names: tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        objective: Any,
        a_eq: Any = None,
        b_eq: Any = None,
        a_ub: Any = None,
        b_ub: Any = None,
        lower: Any = None,
        upper: Any = None,
        variable_names: Optional[Sequence[str]] = None,
        eq_names: Optional[Sequence[str]] = None,
        ub_names: Optional[Sequence[str]] = None,
    ) -> LpProblem:
        """Normalize array-likes into an :class:`LpProblem`.

        Missing bounds default to ``x >= 0``, missing names to positional ones.
        """
        c = np.asarray(objective, dtype=float).reshape(-1)
        n = c.size
        eq = _as_matrix(a_eq, n)
        ub = _as_matrix(a_ub, n)
        return cls(
            objective=c,
            a_eq=eq,
            b_eq=_as_vector(b_eq, eq.shape[0]),
            a_ub=ub,
            b_ub=_as_vector(b_ub, ub.shape[0]),
            lower=_as_vector(lower, n, 0.0),
            upper=_as_vector(upper, n, np.inf),
            variable_names=tuple(variable_names or (f"x{j}" for j in range(n))),
            eq_names=tuple(eq_names or (f"eq{i}" for i in range(eq.shape[0]))),
            ub_names=tuple(ub_names or (f"ub{i}" for i in range(ub.shape[0]))),
        )

    def __post_init__(self) -> None:
        n = self.objective.size
        if self.a_eq.shape[1] != n or self.a_ub.shape[1] != n:
            raise ValueError("Constraint matrices must have one column per variable")
        if self.b_eq.size != self.a_eq.shape[0] or self.b_ub.size != self.a_ub.shape[0]:
            raise ValueError("Right-hand sides must have one entry per row")
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("Bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("Lower bounds must not exceed upper bounds")
        if len(self.variable_names) != n:
            raise ValueError("Variable names must have one entry per variable")
        if len(self.eq_names) != self.b_eq.size or len(self.ub_names) != self.b_ub.size:
            raise ValueError("Row names must have one entry per row")

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_eq(self) -> int:
        return self.b_eq.size

    @property
    def n_ub(self) -> int:
        return self.b_ub.size


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: FloatArray
    objective_value: float
    eq_duals: FloatArray
    ub_duals: FloatArray
    lower_duals: FloatArray
    upper_duals: FloatArray
    certificate: Optional[FloatArray] = None
    """Farkas multipliers for infeasible problems, a recession ray for unbounded ones."""
    certificate_rows: tuple[str, ...] = ()
    method: str = ""
    fallback: bool = False
    """Set when the configured method failed and dual simplex produced the result."""
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def dual_selection(self) -> str:
        """How the reported multipliers were chosen."""
        described = DUAL_SELECTION.get(self.method, self.method or "none")
        return f"{described} (fallback)" if self.fallback else described


@dataclass(frozen=True)
class KktResiduals:
    primal: float
    dual: float
    stationarity: float
    complementarity: float
    gap: float

    @property
    def worst(self) -> float:
        return max(self.primal, self.dual, self.stationarity, self.complementarity, self.gap)

    def within(self, tolerance: float) -> bool:
        return self.worst <= tolerance

    def as_dict(self) -> dict[str, float]:
        return {
            "primal": self.primal,
            "dual": self.dual,
            "stationarity": self.stationarity,
            "complementarity": self.complementarity,
            "gap": self.gap,
        }


@dataclass(frozen=True, eq=False)
class _Scaling:
    row_eq: FloatArray
    row_ub: FloatArray
    column: FloatArray = field(repr=False)

    @classmethod
    def identity(cls, problem: LpProblem) -> _Scaling:
        return cls(np.ones(problem.n_eq), np.ones(problem.n_ub), np.ones(problem.n_variables))


def _power_of_two(factors: FloatArray) -> FloatArray:
    return np.exp2(np.round(np.log2(factors)))


def _abs_max(matrix: sparse.csr_matrix, axis: int) -> FloatArray:
    size = matrix.shape[1 - axis]
    if matrix.shape[axis] == 0 or matrix.nnz == 0:
        return np.zeros(size)
    return np.asarray(abs(matrix).max(axis=axis).todense()).reshape(-1)


def _factor(peaks: FloatArray) -> FloatArray:
    factors = np.ones_like(peaks)
    positive = peaks > 0
    factors[positive] = _power_of_two(1.0 / np.sqrt(peaks[positive]))
    return factors


def _scale_rows(matrix: sparse.csr_matrix, factors: FloatArray) -> sparse.csr_matrix:
    if matrix.shape[0] == 0:
        return matrix
    return sparse.csr_matrix(sparse.diags(factors) @ matrix)


def _equilibrate(problem: LpProblem) -> tuple[LpProblem, _Scaling]:
    """Ruiz equilibration with power-of-two factors, so scaling is exact."""
    a_eq, a_ub = problem.a_eq, problem.a_ub
    scaling = _Scaling.identity(problem)
    row_eq, row_ub, column = scaling.row_eq, scaling.row_ub, scaling.column
    for _ in range(_SCALING_PASSES):
        f_eq = _factor(_abs_max(a_eq, axis=1))
        f_ub = _factor(_abs_max(a_ub, axis=1))
        a_eq = _scale_rows(a_eq, f_eq)
        a_ub = _scale_rows(a_ub, f_ub)
        f_col = _factor(np.maximum(_abs_max(a_eq, axis=0), _abs_max(a_ub, axis=0)))
        a_eq = a_eq @ sparse.diags(f_col)
        a_ub = a_ub @ sparse.diags(f_col)
        row_eq, row_ub, column = row_eq * f_eq, row_ub * f_ub, column * f_col

    scaled = LpProblem(
        objective=problem.objective * column,
        a_eq=sparse.csr_matrix(a_eq),
        b_eq=problem.b_eq * row_eq,
        a_ub=sparse.csr_matrix(a_ub),
        b_ub=problem.b_ub * row_ub,
        lower=problem.lower / column,
        upper=problem.upper / column,
        variable_names=problem.variable_names,
        eq_names=problem.eq_names,
        ub_names=problem.ub_names,
    )
    return scaled, _Scaling(row_eq, row_ub, column)


def _run_highs(
    problem: LpProblem, config: SolverConfig, method: SolverMethod, presolve: bool
) -> OptimizeResult:
    tolerance = config["tolerance"]
    options = {
        "presolve": presolve,
        "primal_feasibility_tolerance": max(tolerance / 10, 1e-10),
        "dual_feasibility_tolerance": max(tolerance / 10, 1e-10),
        "ipm_optimality_tolerance": max(tolerance / 100, 1e-12),
        "maxiter": config["max_iterations"],
    }
    return linprog(
        problem.objective,
        A_ub=problem.a_ub if problem.n_ub else None,
        b_ub=problem.b_ub if problem.n_ub else None,
        A_eq=problem.a_eq if problem.n_eq else None,
        b_eq=problem.b_eq if problem.n_eq else None,
        bounds=np.column_stack([problem.lower, problem.upper]),
        method=method.value,
        options=options,
    )


def _attempts(config: SolverConfig) -> Iterator[tuple[SolverMethod, bool]]:
    yield config["method"], config["presolve"]
    yield SolverMethod.SIMPLEX, False


def _marginals(result: OptimizeResult, name: str, size: int) -> FloatArray:
    section = getattr(result, name, None)
    if section is None or size == 0:
        return np.zeros(size)
    return np.asarray(section.marginals, dtype=float)


def solve(problem: LpProblem, config: Optional[SolverConfig] = None) -> LpSolution:
    """Solve an LP and return the primal point with the full multiplier set.

    Infeasible problems carry a phase-one certificate naming the violated
    rows; unbounded problems carry a recession ray.
    """
    config = config or default_config()
    if config["scale"]:
        scaled, scaling = _equilibrate(problem)
    else:
        scaled, scaling = problem, _Scaling.identity(problem)

    result = None
    for attempt, (method, presolve) in enumerate(_attempts(config)):
        result = _run_highs(scaled, config, method, presolve)
        logger.debug(f"{method.value} (presolve={presolve}) returned status {result.status}")
        if result.status == 0:
            return _optimal(problem, result, scaling, method, fallback=attempt > 0)
        if result.status in (2, 3):
            return _diagnose(problem, config, method)

    assert result is not None
    raise NumericalFailureError(f"LP solve failed: {result.message}")


def _optimal(
    problem: LpProblem,
    result: OptimizeResult,
    scaling: _Scaling,
    method: SolverMethod,
    fallback: bool = False,
) -> LpSolution:
    x = np.asarray(result.x, dtype=float) * scaling.column
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=float(problem.objective @ x),
        eq_duals=-_marginals(result, "eqlin", problem.n_eq) * scaling.row_eq,
        ub_duals=-_marginals(result, "ineqlin", problem.n_ub) * scaling.row_ub,
        lower_duals=_marginals(result, "lower", problem.n_variables) / scaling.column,
        upper_duals=-_marginals(result, "upper", problem.n_variables) / scaling.column,
        method=method.value,
        fallback=fallback,
        message=str(result.message),
    )


def _empty(problem: LpProblem, status: LpStatus, **kwargs: Any) -> LpSolution:
    nan = np.full(problem.n_variables, np.nan)
    return LpSolution(
        status=status,
        x=nan,
        objective_value=np.inf if status is LpStatus.INFEASIBLE else -np.inf,
        eq_duals=np.full(problem.n_eq, np.nan),
        ub_duals=np.full(problem.n_ub, np.nan),
        lower_duals=nan.copy(),
        upper_duals=nan.copy(),
        **kwargs,
    )


def _diagnose(problem: LpProblem, config: SolverConfig, method: SolverMethod) -> LpSolution:
    violation, certificate, rows = phase_one(problem, config)
    scale = 1.0 + max(np.abs(problem.b_eq).max(initial=0), np.abs(problem.b_ub).max(initial=0))
    if violation > config["tolerance"] * scale:
        logger.debug(f"Infeasible: phase one leaves {violation:g} of violation in {list(rows)}")
        return _empty(
            problem,
            LpStatus.INFEASIBLE,
            certificate=certificate,
            certificate_rows=rows,
            method=method.value,
            message=f"infeasible, total violation {violation:g}",
        )

    ray = recession_ray(problem, config)
    if ray is None:
        raise NumericalFailureError("Solver reported no optimum but found neither certificate")
    rows = tuple(name for name, step in zip(problem.variable_names, ray) if abs(step) > 0)
    return _empty(
        problem,
        LpStatus.UNBOUNDED,
        certificate=ray,
        certificate_rows=rows,
        method=method.value,
        message="unbounded",
    )


def phase_one(problem: LpProblem, config: Optional[SolverConfig] = None) -> tuple[float, FloatArray, tuple[str, ...]]:
    """Minimize total constraint violation over the variable bounds.

    Returns the violation, the row multipliers of the elastic program (a
    Farkas certificate when the violation is positive) and the names of the
    rows that need elastic slack.
    """
    config = config or default_config()
    n, m_eq, m_ub = problem.n_variables, problem.n_eq, problem.n_ub
    eye_eq = sparse.identity(m_eq, format="csr")
    eye_ub = sparse.identity(m_ub, format="csr")
    a_eq = sparse.hstack([problem.a_eq, eye_eq, -eye_eq, sparse.csr_matrix((m_eq, m_ub))])
    a_ub = sparse.hstack([problem.a_ub, sparse.csr_matrix((m_ub, 2 * m_eq)), -eye_ub])
    n_slack = 2 * m_eq + m_ub
    elastic = LpProblem.build(
        np.concatenate([np.zeros(n), np.ones(n_slack)]),
        a_eq=a_eq,
        b_eq=problem.b_eq,
        a_ub=a_ub,
        b_ub=problem.b_ub,
        lower=np.concatenate([problem.lower, np.zeros(n_slack)]),
        upper=np.concatenate([problem.upper, np.full(n_slack, np.inf)]),
    )
    result = _run_highs(elastic, config, SolverMethod.SIMPLEX, False)
    if result.status != 0:
        raise NumericalFailureError(f"Phase one failed: {result.message}")

    slack = np.asarray(result.x[n:], dtype=float)
    eq_slack = slack[:m_eq] + slack[m_eq : 2 * m_eq]
    ub_slack = slack[2 * m_eq :]
    threshold = config["tolerance"]
    rows = tuple(
        [name for name, s in zip(problem.eq_names, eq_slack) if s > threshold]
        + [name for name, s in zip(problem.ub_names, ub_slack) if s > threshold]
    )
    certificate = np.concatenate(
        [-_marginals(result, "eqlin", m_eq), -_marginals(result, "ineqlin", m_ub)]
    )
    return float(result.fun), certificate, rows


def recession_ray(problem: LpProblem, config: Optional[SolverConfig] = None) -> Optional[FloatArray]:
    """A feasible direction of strict descent, if one exists."""
    config = config or default_config()
    lower = np.where(np.isfinite(problem.lower), 0.0, -1.0)
    upper = np.where(np.isfinite(problem.upper), 0.0, 1.0)
    trial = LpProblem.build(
        problem.objective,
        a_eq=problem.a_eq,
        b_eq=np.zeros(problem.n_eq),
        a_ub=problem.a_ub,
        b_ub=np.zeros(problem.n_ub),
        lower=lower,
        upper=upper,
    )
    result = _run_highs(trial, config, SolverMethod.SIMPLEX, False)
    if result.status != 0 or result.fun >= -config["tolerance"]:
        return None
    return np.asarray(result.x, dtype=float)


def _relative(values: FloatArray, reference: FloatArray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values) / (1.0 + np.abs(reference))))


def _finite(values: FloatArray) -> FloatArray:
    return np.where(np.isfinite(values), values, 0.0)


def check_kkt(problem: LpProblem, solution: LpSolution) -> KktResiduals:
    """Primal, dual, stationarity, complementarity and duality-gap residuals.

    Row residuals are relative to ``1 + |rhs|``; the remaining terms are
    relative to ``1 + |c^T x|``.
    """
    x = solution.x
    lam, mu = solution.eq_duals, solution.ub_duals
    z_lo, z_hi = solution.lower_duals, solution.upper_duals
    has_lo, has_hi = np.isfinite(problem.lower), np.isfinite(problem.upper)

    eq_residual = problem.a_eq @ x - problem.b_eq
    ub_slack = problem.b_ub - problem.a_ub @ x
    primal = max(
        _relative(eq_residual, problem.b_eq),
        _relative(np.maximum(-ub_slack, 0), problem.b_ub),
        _relative(np.maximum(problem.lower - x, 0)[has_lo], problem.lower[has_lo]),
        _relative(np.maximum(x - problem.upper, 0)[has_hi], problem.upper[has_hi]),
    )

    dual = max(
        0.0,
        float(-mu.min(initial=0)),
        float(-z_lo.min(initial=0)),
        float(-z_hi.min(initial=0)),
        float(np.abs(z_lo[~has_lo]).max(initial=0)),
        float(np.abs(z_hi[~has_hi]).max(initial=0)),
    )

    gradient = problem.objective + problem.a_eq.T @ lam + problem.a_ub.T @ mu - z_lo + z_hi
    c_scale = 1.0 + float(np.abs(problem.objective).max(initial=0))
    stationarity = float(np.abs(gradient).max(initial=0)) / c_scale

    value = float(problem.objective @ x)
    v_scale = 1.0 + abs(value)
    products = np.concatenate(
        [
            mu * ub_slack,
            (z_lo * (x - _finite(problem.lower)))[has_lo],
            (z_hi * (_finite(problem.upper) - x))[has_hi],
        ]
    )
    complementarity = float(np.abs(products).max(initial=0)) / v_scale

    dual_value = float(
        -lam @ problem.b_eq
        - mu @ problem.b_ub
        + z_lo[has_lo] @ problem.lower[has_lo]
        - z_hi[has_hi] @ problem.upper[has_hi]
    )
    gap = abs(value - dual_value) / v_scale

    return KktResiduals(
        primal=primal,
        dual=dual,
        stationarity=stationarity,
        complementarity=complementarity,
        gap=gap,
    )


def degenerate_rows(
    problem: LpProblem, solution: LpSolution, threshold: float = 1e-7
) -> tuple[str, ...]:
    """Inequalities and bounds that are both tight and carry no multiplier."""
    x = solution.x
    names = []
    ub_slack = problem.b_ub - problem.a_ub @ x
    weak = (np.abs(ub_slack) < threshold) & (np.abs(solution.ub_duals) < threshold)
    names += [problem.ub_names[i] for i in np.flatnonzero(weak)]

    fixed = problem.lower == problem.upper
    at_lower = np.isfinite(problem.lower) & (np.abs(x - _finite(problem.lower)) < threshold)
    at_upper = np.isfinite(problem.upper) & (np.abs(x - _finite(problem.upper)) < threshold)
    weak_lower = at_lower & ~fixed & (np.abs(solution.lower_duals) < threshold)
    weak_upper = at_upper & ~fixed & (np.abs(solution.upper_duals) < threshold)
    names += [f"lower:{problem.variable_names[j]}" for j in np.flatnonzero(weak_lower)]
    names += [f"upper:{problem.variable_names[j]}" for j in np.flatnonzero(weak_upper)]
    return tuple(names)


def _lp_name(name: str) -> str:
    return _LP_NAME.sub("_", name)


def _lp_terms(row: sparse.csr_matrix, names: Sequence[str]) -> str:
    terms = [
        f"{'-' if value < 0 else '+'} {abs(value):.12g} {names[j]}"
        for j, value in zip(row.indices, row.data)
    ]
    return " ".join(terms) if terms else "0 " + names[0]


def write_lp(problem: LpProblem, path: Path | str) -> Path:
    """Dump the problem in CPLEX LP format for debugging with external solvers."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [_lp_name(name) for name in problem.variable_names]
    objective = sparse.csr_matrix(problem.objective.reshape(1, -1))

    lines = ["\\ reserveflow LP", "Minimize", f" obj: {_lp_terms(objective, names)}", "Subject To"]
    for i, name in enumerate(problem.eq_names):
        lines.append(f" {_lp_name(name)}: {_lp_terms(problem.a_eq[i], names)} = {problem.b_eq[i]:.12g}")
    for i, name in enumerate(problem.ub_names):
        lines.append(f" {_lp_name(name)}: {_lp_terms(problem.a_ub[i], names)} <= {problem.b_ub[i]:.12g}")

    lines.append("Bounds")
    for name, low, high in zip(names, problem.lower, problem.upper):
        if not np.isfinite(low) and not np.isfinite(high):
            lines.append(f" {name} free")
        elif not np.isfinite(high):
            lines.append(f" {name} >= {low:.12g}" if np.isfinite(low) else f" {name} free")
        elif not np.isfinite(low):
            lines.append(f" -inf <= {name} <= {high:.12g}")
        else:
            lines.append(f" {low:.12g} <= {name} <= {high:.12g}")
    lines.append("End")

    path.write_text("\n".join(lines) + "\n")
    logger.debug(f"Wrote LP with {problem.n_variables} variables to {path}")
    return path
