from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pytest

from reserveflow import calibration, cli
from reserveflow.calibration import Targets, calibrate_twobus
from reserveflow.clearing import cost_breakdown, solve_clearing, solve_traditional
from reserveflow.exceptions import (
    CalibrationFailedError,
    CaseValidationError,
    InfeasibleMarketError,
    IslandedNetworkError,
)
from reserveflow.fixtures import (
    emit_fixtures,
    fixture_twobus,
    load_calibration,
    merit_order_dispatch,
    rate_lines,
)
from reserveflow.pricing import compute_prices, envelope_check
from reserveflow.serializers import dump_case, parse_case
from reserveflow.settlement import ROWS, from_csv, resource_statements, revenue_adequacy, settle
from reserveflow.sweep import apply_parameter, plot_sweep, sweep
from reserveflow.verify import (
    CheckStatus,
    check_revenue_adequacy,
    check_uniform_pricing,
    compare_traditional,
    phase_angle_crosscheck,
    run_all,
)

if TYPE_CHECKING:
    from reserveflow.clearing import ClearingSolution
    from reserveflow.model import MarketCase
    from reserveflow.pricing import PriceSet
    from reserveflow.settlement import SettlementLedger
    from reserveflow.types import ResourceKind, SolverConfig


class TestSingleBus:
    def test_clearing(self, single_bus: MarketCase) -> None:
        solution = solve_clearing(single_bus)
        np.testing.assert_allclose(solution.g, [50.0, 10.0], atol=1e-6)
        assert solution.lam == pytest.approx(30.0)
        assert solution.expected_total_cost == pytest.approx(1300.0)

    def test_prices(self, single_bus: MarketCase) -> None:
        prices = compute_prices(solve_clearing(single_bus), single_bus)
        np.testing.assert_allclose(prices.eta_g, [30.0, 30.0], atol=1e-6)
        np.testing.assert_allclose(prices.eta_d, [30.0], atol=1e-6)
        np.testing.assert_allclose(prices.eta_up, [0.0, 0.0])

    def test_envelope_demand(self, single_bus: MarketCase, config: SolverConfig) -> None:
        solution = solve_clearing(single_bus, config)
        prices = compute_prices(solution, single_bus)
        estimate = envelope_check(single_bus, solution, prices, "d", 0, config=config)
        assert not estimate.degenerate
        assert estimate.matches

    def test_envelope_energy(self, single_bus: MarketCase, config: SolverConfig) -> None:
        solution = solve_clearing(single_bus, config)
        prices = compute_prices(solution, single_bus)
        estimate = envelope_check(single_bus, solution, prices, "g", 0, config=config, strict=True)
        assert estimate.expected == pytest.approx(-30.0)
        assert estimate.matches

    def test_infeasible(self, single_bus: MarketCase) -> None:
        load = single_bus.loads[0].model_copy(update={"base_demand": 200.0})
        with pytest.raises(InfeasibleMarketError) as info:
            solve_clearing(single_bus.with_updates(loads=(load,)))
        assert info.value.constraints


class TestRing:
    @pytest.fixture
    def solution(self, ring: MarketCase) -> ClearingSolution:
        return solve_clearing(ring)

    def test_congested_dispatch(self, solution: ClearingSolution) -> None:
        np.testing.assert_allclose(solution.g, [60.0, 30.0], atol=1e-6)
        np.testing.assert_allclose(solution.flows, [50.0, -40.0, 10.0], atol=1e-6)

    def test_nodal_prices(self, ring: MarketCase, solution: ClearingSolution) -> None:
        prices = compute_prices(solution, ring)
        np.testing.assert_allclose(prices.omega0, [10.0, 50.0, 30.0], atol=1e-6)
        assert solution.mu_fwd[0] == pytest.approx(60.0)
        np.testing.assert_allclose(prices.eta_d, [50.0], atol=1e-6)

    def test_congestion_rent(self, ring: MarketCase, solution: ClearingSolution) -> None:
        ledger = settle(solution, compute_prices(solution, ring), ring)
        assert ledger.columns == ("Base",)
        assert ledger.total("Gamma_d") == pytest.approx(4500.0)
        assert ledger.total("Gamma_g") == pytest.approx(1500.0)
        assert ledger.total("Delta") == pytest.approx(3000.0)
        assert revenue_adequacy(ledger).passed

    def test_line_flows(self, ring: MarketCase, solution: ClearingSolution) -> None:
        frame = solution.line_flows(ring)
        assert frame["binding"].tolist() == ["forward", "", ""]
        assert frame["limit"].tolist() == [50.0, 500.0, 500.0]

    def test_phase_angle_model(self, ring: MarketCase, solution: ClearingSolution) -> None:
        report = phase_angle_crosscheck(ring, solution)
        assert not report.failed


class TestUncongested:
    @pytest.fixture
    def solution(self, uncongested: MarketCase) -> ClearingSolution:
        return solve_clearing(uncongested)

    def test_reserve(self, solution: ClearingSolution) -> None:
        np.testing.assert_allclose(solution.r_up, [0.0, 5.0], atol=1e-6)
        np.testing.assert_allclose(solution.up, [[0.0, 5.0]], atol=1e-6)
        np.testing.assert_allclose(solution.shed, [[0.0]], atol=1e-6)
        assert solution.expected_total_cost == pytest.approx(1345.0)

    def test_multipliers(self, uncongested: MarketCase, solution: ClearingSolution) -> None:
        prices = compute_prices(solution, uncongested)
        assert solution.lam_k[0] == pytest.approx(9.0)
        assert solution.lam == pytest.approx(21.0)
        assert prices.eta_up[1] == pytest.approx(2.0)
        np.testing.assert_allclose(prices.eta_g, [30.0, 30.0], atol=1e-6)

    def test_cost_breakdown(self, uncongested: MarketCase, solution: ClearingSolution) -> None:
        costs = cost_breakdown(uncongested, solution)
        assert costs["redispatch_up"] == pytest.approx(35.0)
        assert sum(costs.values()) == pytest.approx(solution.expected_total_cost)

    def test_realized_scenario(self, uncongested: MarketCase, solution: ClearingSolution) -> None:
        prices = compute_prices(solution, uncongested)
        ledger = settle(solution, prices, uncongested, realized="S1")
        assert ledger.ex_post.realized == 0
        np.testing.assert_allclose(ledger.ex_post.phi_up, [0.0, 175.0], atol=1e-5)
        assert revenue_adequacy(ledger).passed


class TestTwoBus:
    def test_size(self, twobus_solution: ClearingSolution) -> None:
        assert twobus_solution.problem.n_variables == 54
        assert twobus_solution.kkt.within(1e-6)

    def test_energy_dispatch(self, twobus_solution: ClearingSolution) -> None:
        np.testing.assert_allclose(twobus_solution.g, [8.0, 17.0, 0.0], atol=0.05)
        assert twobus_solution.flows[0] == pytest.approx(2.0, abs=1e-6)

    def test_outage_redispatch(self, twobus_solution: ClearingSolution) -> None:
        assert twobus_solution.flows_k[0, 0] <= 1.2 + 1e-6
        assert twobus_solution.r_down[0] >= 0.8 - 1e-6

    def test_published_quantities(self, twobus_solution: ClearingSolution) -> None:
        targets = Targets()
        np.testing.assert_allclose(twobus_solution.g, targets.g, atol=0.05)
        np.testing.assert_allclose(twobus_solution.r_up, targets.r_up, atol=0.05)
        np.testing.assert_allclose(twobus_solution.r_down, targets.r_down, atol=0.05)

    def test_published_prices(self, twobus_prices: PriceSet) -> None:
        np.testing.assert_allclose(twobus_prices.eta_up, Targets().eta_up, atol=0.05)
        assert twobus_prices.eta_down[0] == pytest.approx(2.0, abs=1e-6)
        assert twobus_prices.eta_g[0] == pytest.approx(8.0, abs=1e-6)

    def test_published_ledger_cells(self, twobus_ledger: SettlementLedger) -> None:
        payments = twobus_ledger.fluctuation_payments
        assert payments[0] == pytest.approx(23.3, abs=0.1)
        assert payments[2] == pytest.approx(-23.5, abs=0.1)
        delta = twobus_ledger.row("Delta")
        assert delta[0] == pytest.approx(3.5, abs=0.1)
        assert delta[1] == pytest.approx(2.9, abs=0.1)

    def test_committed_residuals(self) -> None:
        record = load_calibration()
        candidate = calibration.evaluate(
            record["capacity"],
            record["exceed_rate"],
            tuple(record["load_buses"]),
            Targets(),
            shed_price=record["shed_price"],
            redispatch_pricing=record["redispatch_pricing"],  # type: ignore[arg-type]
        )
        assert candidate is not None
        assert candidate.quantity_residual == pytest.approx(record["quantity_residual"], abs=1e-3)
        assert candidate.price_residual == pytest.approx(record["price_residual"], abs=1e-3)
        assert candidate.within_tolerance is record["within_tolerance"]

    def test_uniform_prices(self, twobus: MarketCase, twobus_prices: PriceSet) -> None:
        assert twobus_prices.eta_g[1] == pytest.approx(twobus_prices.eta_g[2], abs=1e-6)
        assert twobus_prices.eta_d[1] == pytest.approx(twobus_prices.eta_g[1], abs=1e-6)

    def test_ledger(self, twobus: MarketCase, twobus_ledger: SettlementLedger) -> None:
        frame = twobus_ledger.to_frame()
        assert list(frame.columns) == ["Base", "S1", "S2", "S3", "S4", "S5", "Total"]
        assert list(frame.index) == list(ROWS)
        assert twobus_ledger.row("eps_Phi_U")[0] == 0.0
        assert revenue_adequacy(twobus_ledger).passed

    def test_ledger_csv(self, twobus_ledger: SettlementLedger, tmp_path: Path) -> None:
        text = twobus_ledger.to_csv(tmp_path / "ledger.csv")
        frame = from_csv((tmp_path / "ledger.csv").read_text())
        assert text.startswith("entry,Base,S1")
        np.testing.assert_allclose(frame["Total"].to_numpy(), twobus_ledger.table.sum(axis=1))

    def test_tampered_ledger(self, twobus_ledger: SettlementLedger) -> None:
        report = check_revenue_adequacy(twobus_ledger.with_entry("Gamma_g", "S3", 5.0))
        assert report.status is CheckStatus.FAIL
        assert report.offenders == ("S3",)

    def test_energy_spread_fails(
        self, twobus: MarketCase, twobus_solution: ClearingSolution, twobus_prices: PriceSet
    ) -> None:
        eta_g = twobus_prices.eta_g.copy()
        eta_g[2] += 5.0
        report = check_uniform_pricing(twobus, replace(twobus_prices, eta_g=eta_g), twobus_solution)
        assert report.status is CheckStatus.FAIL
        assert "energy at Bus2" in report.offenders

    def test_unexplained_imbalance_fails(self, twobus_ledger: SettlementLedger) -> None:
        report = check_revenue_adequacy(twobus_ledger.with_entry("Gamma_d", "S1", 2.0))
        assert report.status is CheckStatus.FAIL

    def test_shed_cap_imbalance_warns(self, twobus_ledger: SettlementLedger) -> None:
        shed_cap = np.zeros(len(twobus_ledger.columns))
        shed_cap[twobus_ledger.columns.index("S1")] = 2.0
        ledger = replace(twobus_ledger.with_entry("Gamma_d", "S1", 2.0), shed_cap=shed_cap)
        assert not revenue_adequacy(ledger).passed
        report = check_revenue_adequacy(ledger)
        assert report.status is CheckStatus.WARN
        assert report.offenders == ("S1",)
        assert report.details == ("S1: shedding caps account for 2 of 2",)

    @pytest.mark.parametrize(
        "kind, resource", [("g", 0), ("g", 1), ("r_up", 0), ("r_up", 2), ("d", 0)]
    )
    def test_envelope(
        self,
        twobus: MarketCase,
        twobus_solution: ClearingSolution,
        twobus_prices: PriceSet,
        config: SolverConfig,
        kind: ResourceKind,
        resource: int,
    ) -> None:
        estimate = envelope_check(twobus, twobus_solution, twobus_prices, kind, resource, config=config)
        if estimate.degenerate:
            pytest.skip(f"{kind}[{resource}] sits on a kink")
        assert estimate.matches

    def test_deterministic(
        self, twobus: MarketCase, twobus_solution: ClearingSolution, config: SolverConfig
    ) -> None:
        again = solve_clearing(twobus, config)
        np.testing.assert_array_equal(again.g, twobus_solution.g)
        np.testing.assert_array_equal(again.r_up, twobus_solution.r_up)
        np.testing.assert_array_equal(again.r_down, twobus_solution.r_down)
        np.testing.assert_array_equal(again.lp.eq_duals, twobus_solution.lp.eq_duals)
        assert again.expected_total_cost == twobus_solution.expected_total_cost

    def test_no_scenarios(self, twobus: MarketCase, config: SolverConfig) -> None:
        case = twobus.with_updates(scenarios=())
        solution = solve_clearing(case, config)
        np.testing.assert_allclose(solution.r_up, 0.0, atol=1e-9)
        np.testing.assert_allclose(solution.r_down, 0.0, atol=1e-9)
        traditional = solve_traditional(case, 0.0, 0.0, config)
        assert solution.expected_total_cost == pytest.approx(traditional.cost, rel=1e-9)

    def test_exceed_rate_relaxes(self, twobus: MarketCase, config: SolverConfig) -> None:
        costs = [
            solve_clearing(apply_parameter(twobus, "exceed_rate", rate), config).expected_total_cost
            for rate in (1.0, 1.1, 1.2)
        ]
        assert costs[0] >= costs[1] - 1e-9
        assert costs[1] >= costs[2] - 1e-9

    def test_sweep_shape(self, twobus: MarketCase) -> None:
        frame = sweep(twobus, "exceed_rate", [1.0, 1.1, 1.2, 1.3, 1.4, 1.5])
        assert frame.shape[0] == 6
        assert frame["optimal"].tolist() == [1.0] * 6
        assert {"r_U[G3]", "eta_U[G3]", "Pi_d[d3]"} <= set(frame.columns)
        assert (np.diff(frame["expected_total_cost"].to_numpy()) <= 1e-9).all()

    def test_resource_statements(self, twobus_ledger: SettlementLedger) -> None:
        frame = resource_statements(twobus_ledger)
        assert list(frame.index) == ["G1", "G2", "G3", "d1", "d2", "d3"]
        assert frame["kind"].tolist() == ["generator"] * 3 + ["load"] * 3
        np.testing.assert_allclose(frame["net"], frame[["energy", "reserve", "fluctuation", "realized"]].sum(axis=1))

    def test_verification(
        self,
        twobus: MarketCase,
        twobus_solution: ClearingSolution,
        twobus_prices: PriceSet,
        twobus_ledger: SettlementLedger,
        config: SolverConfig,
    ) -> None:
        reports = run_all(twobus, twobus_solution, twobus_prices, twobus_ledger, config)
        assert [report.check for report in reports] == [
            "lp_kkt",
            "uniform_pricing",
            "revenue_adequacy",
            "kkt_identities",
            "phase_angle",
            "reversed_flow",
        ]
        assert not [report.as_dict() for report in reports if report.failed]

    def test_traditional_comparison(
        self, twobus: MarketCase, twobus_solution: ClearingSolution, twobus_prices: PriceSet
    ) -> None:
        report = compare_traditional(twobus, twobus_solution, twobus_prices)
        assert report.reserve_up == pytest.approx(float(twobus_solution.r_up.sum()))
        assert report.report().status is CheckStatus.PASS
        if report.feasible:
            assert report.gap is not None and report.gap >= -1e-6

    def test_traditional_shortfall(
        self, twobus: MarketCase, twobus_solution: ClearingSolution, twobus_prices: PriceSet
    ) -> None:
        report = compare_traditional(twobus, twobus_solution, twobus_prices, reserve_up=0.0, reserve_down=0.0)
        assert report.traditional is not None
        assert report.report().status is CheckStatus.PASS

    def test_traditional_without_down_reserve(
        self, twobus: MarketCase, twobus_solution: ClearingSolution, twobus_prices: PriceSet
    ) -> None:
        reserve_up = float(twobus_solution.r_up.sum())
        report = compare_traditional(twobus, twobus_solution, twobus_prices, reserve_up=reserve_up, reserve_down=0.0)
        assert not report.feasible
        assert report.violated


class TestIslanding:
    def test_validation(self, islanding: MarketCase) -> None:
        with pytest.raises(CaseValidationError):
            solve_clearing(islanding)

    def test_network(self, islanding: MarketCase) -> None:
        with pytest.raises(IslandedNetworkError):
            solve_clearing(islanding, validate=False)


class TestSweep:
    def test_demand(self, single_bus: MarketCase) -> None:
        frame = sweep(single_bus, "demand:d1", [40.0, 70.0, 150.0], workers=2)
        assert list(frame.columns[:3]) == ["demand:d1", "optimal", "expected_total_cost"]
        assert frame["optimal"].tolist() == [1.0, 1.0, 0.0]
        assert frame["expected_total_cost"].tolist()[:2] == pytest.approx([800.0, 1600.0])
        assert frame["eta_d[d1]"].tolist()[:2] == pytest.approx([20.0, 30.0])

    def test_plot(self, single_bus: MarketCase, tmp_path: Path) -> None:
        frame = sweep(single_bus, "demand:d1", [40.0, 70.0])
        path = plot_sweep(frame, ["eta_d[d1]"], tmp_path / "plots" / "eta.png", title="single")
        assert path.exists()


class TestFixtures:
    def test_calibration_record(self) -> None:
        record = load_calibration()
        assert record["capacity"] == 2.0
        assert record["load_buses"] == [0, 1, 1]
        assert record["redispatch_pricing"] == "per_bus"
        assert record["quantity_residual"] == 0.0

    def test_explicit_calibration(self) -> None:
        record = dict(load_calibration(), capacity=3.0)
        case = fixture_twobus(record)  # type: ignore[arg-type]
        assert case.lines[0].capacity == 3.0

    def test_merit_order(self, single_bus: MarketCase) -> None:
        np.testing.assert_allclose(merit_order_dispatch(single_bus), [50.0, 10.0])

    def test_rate_lines(self, ring: MarketCase) -> None:
        rated = rate_lines(ring, headroom=1.1, floor=10.0)
        assert [line.capacity for line in rated.lines] == pytest.approx([66.0, 33.0, 33.0])

    def test_emit(self, tmp_path: Path, twobus: MarketCase) -> None:
        written = emit_fixtures(tmp_path)
        assert written[0] == tmp_path / "twobus.case.json"
        assert parse_case(written[0]) == twobus


class TestCalibration:
    def test_evaluate(self) -> None:
        candidate = calibration.evaluate(2.0, 1.2, (0, 1, 1), Targets())
        assert candidate is not None
        assert candidate.capacity == 2.0
        assert candidate.quantity_residual == pytest.approx(0.0, abs=1e-3)

    def test_price_pair_reading(self) -> None:
        per_bus = calibration.evaluate(2.0, 1.2, (0, 1, 1), Targets(), redispatch_pricing="per_bus")
        up_down = calibration.evaluate(2.0, 1.2, (0, 1, 1), Targets(), redispatch_pricing="up_down")
        assert per_bus is not None and up_down is not None
        assert per_bus.score < up_down.score

    def test_quantities_rank_first(self) -> None:
        close = calibration.Candidate(2.0, 1.2, (0, 1, 1), 300.0, "per_bus", 0.0, 17.4)
        cheap = calibration.Candidate(2.0, 1.2, (0, 1, 1), 300.0, "per_bus", 0.2, 0.0)
        assert close.score < cheap.score

    def test_failure_is_written(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.setattr(calibration, "COARSE_CAPACITIES", (1.5, 2.0))
        monkeypatch.setattr(calibration, "EXCEED_RATES", (1.2,))
        monkeypatch.setattr(calibration, "LOAD_PLACEMENTS", ((0, 1, 1),))
        monkeypatch.setattr(calibration, "REDISPATCH_READINGS", ("per_bus",))
        monkeypatch.setattr(calibration, "SHED_PRICES", (300.0,))
        monkeypatch.setattr(calibration, "FINE_SPAN", 0.0)
        output = tmp_path / "calibration.yaml"
        with pytest.raises(CalibrationFailedError) as info:
            calibrate_twobus(Targets(eta_g=(0.0, 0.0, 0.0)), output=output)
        assert output.exists()
        assert load_calibration(output) == info.value.result


class TestCli:
    @pytest.fixture
    def infeasible_case(self, single_bus: MarketCase, tmp_path: Path) -> Path:
        load = single_bus.loads[0].model_copy(update={"base_demand": 200.0})
        return dump_case(single_bus.with_updates(loads=(load,)), tmp_path / "infeasible.yaml")

    def test_solve(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["solve", "twobus"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "## Solver" in out
        assert "HiGHS interior point with crossover, vertex duals" in out
        assert "## Generators" in out
        assert "## Verification" in out

    def test_solve_write_lp(self, tmp_path: Path) -> None:
        path = tmp_path / "twobus.lp"
        assert cli.main(["--no-verify", "solve", "twobus", "--write-lp", str(path)]) == cli.EXIT_OK
        assert path.read_text().startswith("\\ reserveflow LP")

    def test_price_csv(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["--format", "csv", "price", "twobus"]) == cli.EXIT_OK
        assert "bus,omega_base,omega_S1" in capsys.readouterr().out

    def test_settle(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["settle", "twobus", "--realized", "S2"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "Γ^d" in out
        assert "## Participants" in out

    def test_compare(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["compare", "twobus"]) == cli.EXIT_OK
        assert "scenario_oriented_cost" in capsys.readouterr().out

    def test_case_file(self, tmp_path: Path, twobus: MarketCase) -> None:
        path = dump_case(twobus, tmp_path / "twobus.json")
        assert cli.main(["verify", str(path)]) == cli.EXIT_OK

    def test_verify_names_dual_selection(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["--format", "csv", "verify", "twobus"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert 'dual_selection,"HiGHS interior point with crossover, vertex duals"' in out

    def test_sweep(self, tmp_path: Path) -> None:
        output = tmp_path / "sweep.csv"
        plot = tmp_path / "sweep.png"
        argv = ["sweep", "twobus", "--param", "exceed_rate", "--range", "1.0:1.4:3"]
        assert cli.main(argv + ["--output", str(output), "--plot", str(plot)]) == cli.EXIT_OK
        assert output.read_text().startswith("exceed_rate,optimal")
        assert plot.exists()

    def test_fixtures(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["fixtures", "--emit", str(tmp_path)]) == cli.EXIT_OK
        assert str(tmp_path / "twobus.case.json") in capsys.readouterr().out

    def test_lpcheck(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["--seed", "3", "lpcheck", "--count", "20"]) == cli.EXIT_OK
        assert "20/20" in capsys.readouterr().out

    def test_calibrate_failure(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.setattr(calibration, "COARSE_CAPACITIES", (2.0,))
        monkeypatch.setattr(calibration, "EXCEED_RATES", (1.2,))
        monkeypatch.setattr(calibration, "LOAD_PLACEMENTS", ((0, 1, 1),))
        monkeypatch.setattr(calibration, "REDISPATCH_READINGS", ("per_bus",))
        monkeypatch.setattr(calibration, "SHED_PRICES", (300.0,))
        monkeypatch.setattr(calibration, "FINE_SPAN", 0.0)
        monkeypatch.setattr(calibration, "Targets", lambda: Targets(eta_g=(0.0, 0.0, 0.0)))
        output = tmp_path / "calibration.yaml"
        assert cli.main(["calibrate", "--output", str(output)]) == cli.EXIT_VERIFICATION
        assert output.exists()

    def test_infeasible(self, infeasible_case: Path) -> None:
        assert cli.main(["solve", str(infeasible_case)]) == cli.EXIT_MARKET

    def test_missing_file(self, tmp_path: Path) -> None:
        assert cli.main(["solve", str(tmp_path / "absent.json")]) == cli.EXIT_IO

    def test_invalid_case(self, islanding: MarketCase, tmp_path: Path) -> None:
        path = dump_case(islanding, tmp_path / "islanding.json")
        assert cli.main(["solve", str(path)]) == cli.EXIT_IO

    def test_bad_sweep_parameter(self) -> None:
        argv = ["sweep", "twobus", "--param", "capacity", "--range", "0:1:2"]
        assert cli.main(argv) == cli.EXIT_USAGE

    def test_unknown_command(self) -> None:
        with pytest.raises(SystemExit) as info:
            cli.main(["nonsense"])
        assert info.value.code == cli.EXIT_USAGE


@pytest.mark.slow
class TestIEEE118:
    @pytest.fixture(scope="class")
    def case(self) -> MarketCase:
        pytest.importorskip("pypower")
        from reserveflow.fixtures import fixture_ieee118

        return fixture_ieee118()

    def test_layout(self, case: MarketCase) -> None:
        from reserveflow.fixtures import _standard_118

        assert case.n_buses == 118
        assert case.n_generators == 54
        half = _standard_118()["bus"][58, 2] / 2
        assert case.load("d59").base_demand == pytest.approx(half)
        assert case.load("d119").base_demand == pytest.approx(half)
        assert case.load("d119").bus == case.load("d59").bus

    def test_scenarios(self, case: MarketCase) -> None:
        assert case.n_scenarios == 11
        assert case.total_probability == pytest.approx(0.44)
        labels = [scenario.label for scenario in case.scenarios]
        assert labels[:3] == ["I", "II", "line21"]
        assert "line102+II" in labels

    def test_fluctuation_signs(self, case: MarketCase) -> None:
        situation = case.scenario("I")
        d59, d119 = case.load("d59"), case.load("d119")
        assert situation.load_fluctuation[d59.id] < 0 < situation.load_fluctuation[d119.id]

    def test_separate_enumeration(self) -> None:
        pytest.importorskip("pypower")
        from reserveflow.fixtures import fixture_ieee118

        case = fixture_ieee118(enumeration="separate")
        assert case.n_scenarios == 5
        assert case.total_probability == pytest.approx(0.5)

    def test_clearing(self, case: MarketCase, config: SolverConfig) -> None:
        solution = solve_clearing(case, config)
        prices = compute_prices(solution, case)
        ledger = settle(solution, prices, case)
        assert solution.kkt.within(1e-6)
        assert revenue_adequacy(ledger, 1e-5).passed
        assert np.all(np.abs(solution.flows) <= solution.network.base.capacity + 1e-6)
