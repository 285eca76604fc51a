"""Exhaustive basis enumeration for small LPs.

An independent reference for :func:`reserveflow.lp.solve`: every variable is
shifted or split onto ``z >= 0`` so the feasible set is pointed, then every
square active set is tried. The first dual-feasible basis at the best vertex,
in lexicographic active-set order, is the answer.
"""

from __future__ import annotations

import logging
from itertools import combinations
from math import comb
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import TooLargeError
from .lp import LpProblem, LpSolution, LpStatus

if TYPE_CHECKING:
    from typing import Optional

    from .types import FloatArray


logger = logging.getLogger(__name__)

MAX_BASES = 200_000
_FEASIBILITY = 1e-9
_CONDITION = 1e12


def _lift(problem: LpProblem) -> tuple[FloatArray, FloatArray, list[tuple[str, int]]]:
    """Express ``x = T z + t`` with ``z >= 0``.

    Each ``z`` column is tagged with its role: ``lower`` (``x - lower``),
    ``upper`` (``upper - x``) or ``split`` (one half of a free variable).
    """
    n = problem.n_variables
    columns: list[FloatArray] = []
    roles: list[tuple[str, int]] = []
    offset = np.zeros(n)
    for j in range(n):
        unit = np.zeros(n)
        unit[j] = 1.0
        low, high = problem.lower[j], problem.upper[j]
        if np.isfinite(low):
            offset[j] = low
            columns.append(unit)
            roles.append(("lower", j))
        elif np.isfinite(high):
            offset[j] = high
            columns.append(-unit)
            roles.append(("upper", j))
        else:
            columns += [unit, -unit]
            roles += [("split", j), ("split", j)]
    return np.column_stack(columns), offset, roles


def _independent_rows(matrix: FloatArray) -> list[int]:
    keep: list[int] = []
    rank = 0
    for i in range(matrix.shape[0]):
        candidate = keep + [i]
        new_rank = np.linalg.matrix_rank(matrix[candidate])
        if new_rank > rank:
            keep, rank = candidate, new_rank
    return keep


def vertex_oracle(problem: LpProblem, max_bases: int = MAX_BASES) -> LpSolution:
    """Solve a small LP by enumerating every basis."""
    transform, offset, roles = _lift(problem)
    n_z = transform.shape[1]
    a_eq = problem.a_eq.toarray()
    a_ub = problem.a_ub.toarray()

    e_full = a_eq @ transform
    e_rhs_full = problem.b_eq - a_eq @ offset
    kept = _independent_rows(e_full) if e_full.shape[0] else []
    e_mat, e_rhs = e_full[kept], e_rhs_full[kept]

    # Inequality system G z <= h: problem rows, finite spans, then z >= 0.
    spans = [
        (k, j)
        for k, (role, j) in enumerate(roles)
        if role == "lower" and np.isfinite(problem.upper[j])
    ]
    g_rows = [a_ub @ transform]
    h_rows = [problem.b_ub - a_ub @ offset]
    if spans:
        span_matrix = np.zeros((len(spans), n_z))
        span_matrix[np.arange(len(spans)), [k for k, _ in spans]] = 1.0
        g_rows.append(span_matrix)
        h_rows.append(np.array([problem.upper[j] - problem.lower[j] for _, j in spans]))
    g_rows.append(-np.eye(n_z))
    h_rows.append(np.zeros(n_z))
    g_mat, h_vec = np.vstack(g_rows), np.concatenate(h_rows)

    n_active = n_z - len(kept)
    n_bases = comb(g_mat.shape[0], n_active)
    if n_bases > max_bases:
        raise TooLargeError(f"{n_bases} candidate bases exceed the budget of {max_bases}")
    logger.debug(f"Enumerating {n_bases} bases over {n_z} lifted variables")

    cost = problem.objective @ transform
    scale = 1.0 + float(np.abs(np.concatenate([e_rhs_full, h_vec])).max(initial=0))
    tolerance = _FEASIBILITY * scale

    vertices: list[tuple[float, tuple[int, ...], FloatArray, FloatArray]] = []
    for active in combinations(range(g_mat.shape[0]), n_active):
        square = np.vstack([e_mat, g_mat[list(active)]])
        if np.linalg.cond(square) > _CONDITION:
            continue
        rhs = np.concatenate([e_rhs, h_vec[list(active)]])
        z = np.linalg.solve(square, rhs)
        if np.any(g_mat @ z > h_vec + tolerance):
            continue
        if e_full.shape[0] and np.any(np.abs(e_full @ z - e_rhs_full) > tolerance):
            continue
        vertices.append((float(cost @ z), active, z, square))

    if not vertices:
        logger.debug("No feasible basis")
        return _verdict(problem, LpStatus.INFEASIBLE)

    best = min(value for value, *_ in vertices)
    near = _FEASIBILITY * (1.0 + abs(best))
    for value, active, z, square in vertices:
        if value > best + near:
            continue
        multipliers = np.linalg.solve(square.T, -cost)
        row_duals = multipliers[len(kept) :]
        if np.all(row_duals >= -_FEASIBILITY):
            return _solution(problem, transform, offset, roles, spans, kept, active, z, multipliers)

    logger.debug("Best vertex has no dual-feasible basis")
    return _verdict(problem, LpStatus.UNBOUNDED)


def _verdict(problem: LpProblem, status: LpStatus) -> LpSolution:
    nan = np.full(problem.n_variables, np.nan)
    return LpSolution(
        status=status,
        x=nan,
        objective_value=np.inf if status is LpStatus.INFEASIBLE else -np.inf,
        eq_duals=np.full(problem.n_eq, np.nan),
        ub_duals=np.full(problem.n_ub, np.nan),
        lower_duals=nan.copy(),
        upper_duals=nan.copy(),
        method="enumeration",
    )


def _solution(
    problem: LpProblem,
    transform: FloatArray,
    offset: FloatArray,
    roles: list[tuple[str, int]],
    spans: list[tuple[int, int]],
    kept: list[int],
    active: tuple[int, ...],
    z: FloatArray,
    multipliers: FloatArray,
) -> LpSolution:
    n_ub = problem.n_ub
    eq_duals = np.zeros(problem.n_eq)
    eq_duals[kept] = multipliers[: len(kept)]
    ub_duals = np.zeros(n_ub)
    lower_duals = np.zeros(problem.n_variables)
    upper_duals = np.zeros(problem.n_variables)

    for row, dual in zip(active, multipliers[len(kept) :]):
        if row < n_ub:
            ub_duals[row] = dual
        elif row < n_ub + len(spans):
            _, j = spans[row - n_ub]
            upper_duals[j] = dual
        else:
            role, j = roles[row - n_ub - len(spans)]
            if role == "lower":
                lower_duals[j] = dual
            elif role == "upper":
                upper_duals[j] = dual

    x = transform @ z + offset
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=float(problem.objective @ x),
        eq_duals=eq_duals,
        ub_duals=ub_duals,
        lower_duals=lower_duals,
        upper_duals=upper_duals,
        method="enumeration",
    )


def random_lp(
    rng: np.random.Generator,
    n_variables: Optional[int] = None,
    n_ub: Optional[int] = None,
    n_eq: Optional[int] = None,
) -> LpProblem:
    """A feasible, bounded LP small enough for :func:`vertex_oracle`.

    Variables live in boxes around a random interior point that satisfies
    every row, so the optimum is always attained.
    """
    n = n_variables or int(rng.integers(2, 7))
    m_ub = n_ub if n_ub is not None else int(rng.integers(1, 4))
    m_eq = n_eq if n_eq is not None else int(rng.integers(0, 2))
    lower = np.where(rng.random(n) < 0.5, 0.0, -5.0)
    upper = lower + rng.uniform(2.0, 10.0, n)
    interior = lower + rng.uniform(0.2, 0.8, n) * (upper - lower)

    a_ub = rng.normal(size=(m_ub, n))
    b_ub = a_ub @ interior + rng.uniform(0.0, 2.0, m_ub)
    a_eq = rng.normal(size=(m_eq, n))
    b_eq = a_eq @ interior
    return LpProblem.build(
        rng.normal(size=n),
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        lower=lower,
        upper=upper,
    )
