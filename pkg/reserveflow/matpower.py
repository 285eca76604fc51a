"""MATPOWER case data: a ``.m`` text reader and the conversion to a market case.

Column positions come from pypower's ``idx_*`` modules, which mirror the
MATPOWER layout.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from pypower.idx_brch import BR_STATUS, BR_X, F_BUS, RATE_A, T_BUS, TAP
from pypower.idx_bus import BUS_I, BUS_TYPE, PD, REF
from pypower.idx_cost import COST, MODEL, NCOST, POLYNOMIAL
from pypower.idx_gen import GEN_BUS, GEN_STATUS, PMAX, PMIN, RAMP_10

from .exceptions import CaseParseError, MissingDataError
from .model import Bus, Generator, Line, Load, MarketCase

if TYPE_CHECKING:
    from typing import Any, Optional, Union

    from .types import FloatArray


logger = logging.getLogger(__name__)

UNLIMITED_RATING = 9900.0
DEFAULT_RESERVE_SHARE = 0.2
DEFAULT_RESERVE_BID_SHARE = 0.1

_MATRIX = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\]\s*;", re.DOTALL)
_SCALAR = re.compile(r"mpc\.(\w+)\s*=\s*([-+.\deE]+)\s*;")
_COMMENT = re.compile(r"%[^\n]*")


def _rows(body: str, name: str, offset: int, text: str) -> FloatArray:
    rows = []
    for raw in re.split(r"[;\n]", body):
        fields = raw.replace(",", " ").split()
        if not fields:
            continue
        try:
            rows.append([float(value) for value in fields])
        except ValueError as error:
            line = text.count("\n", 0, offset) + 1
            raise CaseParseError(f"mpc.{name}: {error}", line, 1) from error
    width = max((len(row) for row in rows), default=0)
    if any(len(row) != width for row in rows):
        line = text.count("\n", 0, offset) + 1
        raise CaseParseError(f"mpc.{name}: ragged rows", line, 1)
    return np.array(rows, dtype=float).reshape(-1, width)


def read_matpower(path: Union[Path, str]) -> dict[str, Any]:
    """Read the ``mpc.*`` matrices and scalars of a MATPOWER ``.m`` file."""
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"Network data file {path} not found")
    text = _COMMENT.sub("", path.read_text())

    ppc: dict[str, Any] = {}
    for match in _SCALAR.finditer(text):
        ppc[match.group(1)] = float(match.group(2))
    for match in _MATRIX.finditer(text):
        ppc[match.group(1)] = _rows(match.group(2), match.group(1), match.start(), text)
    missing = [key for key in ("baseMVA", "bus", "gen", "branch") if key not in ppc]
    if missing:
        raise CaseParseError(f"{path.name} lacks {', '.join('mpc.' + key for key in missing)}")
    logger.debug(
        f"Read {path.name}: {len(ppc['bus'])} buses, {len(ppc['gen'])} generators, "
        f"{len(ppc['branch'])} branches"
    )
    return ppc


def linear_bids(ppc: dict[str, Any]) -> FloatArray:
    """Energy bids from polynomial cost data.

    The bid is the marginal cost at the midpoint of ``[Pmin, Pmax]``, which for
    ``c2 p^2 + c1 p + c0`` is ``c1 + c2 (Pmin + Pmax)``.
    """
    gen, gencost = ppc["gen"], ppc.get("gencost")
    n_gen = len(gen)
    if gencost is None:
        raise MissingDataError("Case has no generator cost data")
    if np.any(gencost[:n_gen, MODEL] != POLYNOMIAL):
        raise CaseParseError("Only polynomial generator costs can be linearized")

    bids = np.zeros(n_gen)
    midpoint = (gen[:, PMIN] + gen[:, PMAX]) / 2
    for j in range(n_gen):
        n_cost = int(gencost[j, NCOST])
        coefficients = gencost[j, COST : COST + n_cost]
        derivative = np.polyder(coefficients) if n_cost > 1 else np.zeros(1)
        bids[j] = float(np.polyval(derivative, midpoint[j]))
    return bids


def case_from_ppc(
    ppc: dict[str, Any],
    *,
    name: str = "",
    shed_price: float = 1000.0,
    default_limit: Optional[float] = None,
    reserve_share: float = DEFAULT_RESERVE_SHARE,
    reserve_bid_share: float = DEFAULT_RESERVE_BID_SHARE,
) -> MarketCase:
    """Convert MATPOWER arrays into a scenario-free market case.

    Buses are renumbered to consecutive ids in file order. In-service
    generators get the linearized energy bid and reserve bids at
    ``reserve_bid_share`` of it; the ten-minute ramp rate bounds reserve,
    ``reserve_share * Pmax`` when absent. Every bus with positive demand
    carries one load named after the bus. Branches without a rating get
    ``default_limit``.
    """
    bus, gen, branch = ppc["bus"], ppc["gen"], ppc["branch"]
    numbers = bus[:, BUS_I].astype(int)
    position = {number: i for i, number in enumerate(numbers)}
    base_mva = float(ppc["baseMVA"])

    buses = tuple(Bus(id=i, name=f"Bus{number}") for i, number in enumerate(numbers))
    reference = np.flatnonzero(bus[:, BUS_TYPE] == REF)
    slack = int(reference[0]) if reference.size else 0

    lines = []
    for row in branch[branch[:, BR_STATUS] > 0]:
        tap = row[TAP] if row[TAP] != 0 else 1.0
        rating = row[RATE_A]
        if rating <= 0 or rating >= UNLIMITED_RATING:
            rating = default_limit if default_limit is not None else UNLIMITED_RATING
        lines.append(
            Line(
                id=len(lines),
                from_bus=position[int(row[F_BUS])],
                to_bus=position[int(row[T_BUS])],
                reactance=float(row[BR_X] * tap),
                capacity=float(rating),
            )
        )

    bids = linear_bids(ppc)
    generators = []
    for j, row in enumerate(gen):
        if row[GEN_STATUS] <= 0:
            continue
        ramp = row[RAMP_10] if gen.shape[1] > RAMP_10 and row[RAMP_10] > 0 else reserve_share * row[PMAX]
        generators.append(
            Generator(
                id=len(generators),
                bus=position[int(row[GEN_BUS])],
                g_min=float(row[PMIN]),
                g_max=float(row[PMAX]),
                ru_max=float(ramp),
                rd_max=float(ramp),
                c_energy=float(bids[j]),
                c_ru=float(reserve_bid_share * bids[j]),
                c_rd=float(reserve_bid_share * bids[j]),
                name=f"G{j + 1}",
            )
        )

    loads = []
    for i, row in enumerate(bus):
        if row[PD] > 0:
            loads.append(
                Load(
                    id=len(loads),
                    bus=i,
                    base_demand=float(row[PD]),
                    c_shed=shed_price,
                    name=f"d{numbers[i]}",
                )
            )

    logger.debug(f"Converted case at {base_mva} MVA base with slack {buses[slack].label}")
    return MarketCase(
        buses=buses,
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        slack_bus=slack,
        name=name,
    )
