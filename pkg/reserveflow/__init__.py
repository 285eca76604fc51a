from .clearing import solve_clearing, solve_traditional
from .fixtures import fixture_ieee118, fixture_twobus
from .model import MarketCase, validate_case
from .pricing import compute_prices
from .serializers import dump_case, parse_case
from .settlement import revenue_adequacy, settle
from .verify import run_all

__all__ = [
    "MarketCase",
    "compute_prices",
    "dump_case",
    "fixture_ieee118",
    "fixture_twobus",
    "parse_case",
    "revenue_adequacy",
    "run_all",
    "settle",
    "solve_clearing",
    "solve_traditional",
    "validate_case",
]
