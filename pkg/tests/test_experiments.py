"""Tests des expériences Monte-Carlo"""

import math

import numpy as np
import pytest

from src.budget import MemoryBudget
from src.dynamics import Rule
from src.errors import MemoryBudgetError, ParameterError
from src.experiments import (
    COMPARE_FIELDS, SCAN_FIELDS, QcResult, ScanRow, TrialSpec, alpha_of, compare_rules, default_L,
    estimate_occupation, estimate_qc, good_box_window, largest_component_fraction, rows_to_csv,
    scan_q, scan_q_value, simulate, write_scan_csv
)
from src.good_boxes import GoodBoxParams
from src.lattice import CellState
from src.random_init import BoundaryCondition, PollutionParams

FREE = BoundaryCondition.FREE
RING = BoundaryCondition.OCCUPIED_RING

WINDOW_PARAMS = GoodBoxParams.desk_scale(side=20, r=3, iv=5, strip_w=6, strip_h=4, closed_cap=1, margin=3)


def step_oracle(q_star):
    return lambda q: 1.0 if q < q_star else 0.0


class TestScales:
    def test_default_L(self):
        assert default_L(0.1) == 185

    def test_default_L_needs_small_p(self):
        with pytest.raises(ParameterError):
            default_L(1.0)

    def test_alpha_round_trip(self):
        q = scan_q_value(0.1, 2.5, 1.0)
        assert q == pytest.approx(2.5 * 0.01 / math.log(10.0))
        assert alpha_of(0.1, q) == pytest.approx(2.5)

    def test_beta_zero_is_pure_square(self):
        assert scan_q_value(0.2, 3.0, 0.0) == pytest.approx(0.12)


class TestTrialSpec:
    def test_default_target_is_center(self):
        assert TrialSpec(Rule.MODIFIED, 21, 0.2, 0.01).target == (10, 10)

    @pytest.mark.parametrize('kwargs', [
        {'L': 0}, {'trials': 0}, {'target': (5, 5)}, {'p': 0.7, 'q': 0.4}
    ])
    def test_invalid(self, kwargs):
        base = dict(rule=Rule.MODIFIED, L=5, p=0.2, q=0.01)
        base.update(kwargs)
        with pytest.raises(ParameterError):
            TrialSpec(**base)


class TestEstimateOccupation:
    def test_full_occupation(self):
        row = estimate_occupation(TrialSpec(Rule.MODIFIED, 9, 1.0, 0.0, trials=10))
        assert row.fraction == 1.0
        assert (row.ci_low, row.ci_high) == (1.0, 1.0)

    def test_empty_free_box(self):
        row = estimate_occupation(TrialSpec(Rule.STANDARD, 9, 0.0, 0.0, FREE, trials=10))
        assert row.fraction == 0.0
        assert (row.ci_low, row.ci_high) == (0.0, 0.0)

    def test_deterministic(self):
        spec = TrialSpec(Rule.MODIFIED, 24, 0.2, 0.01, trials=30, master_seed=5)
        assert estimate_occupation(spec) == estimate_occupation(spec)

    def test_workers_do_not_change_result(self):
        spec = TrialSpec(Rule.STANDARD, 20, 0.2, 0.005, trials=24, master_seed=8)
        assert estimate_occupation(spec, workers=1) == estimate_occupation(spec, workers=3)

    def test_row_invariants(self):
        row = estimate_occupation(TrialSpec(Rule.MODIFIED, 24, 0.25, 0.002, trials=40, master_seed=2))
        assert row.hits <= row.trials
        assert row.fraction == row.hits / row.trials
        assert row.ci_low <= row.fraction <= row.ci_high
        assert row.seconds == 0.0
        assert row.beta_label == 'beta=1'

    def test_budget_refusal(self):
        spec = TrialSpec(Rule.MODIFIED, 2000, 0.2, 0.0, trials=1)
        with pytest.raises(MemoryBudgetError):
            estimate_occupation(spec, budget=MemoryBudget(1))


class TestScan:
    def test_unpolluted_ring_fills(self):
        rows = scan_q(0.2, [0.0], 1.0, Rule.MODIFIED, 15, 5, 3, bc=RING)
        assert rows[0].q == 0.0
        assert rows[0].fraction == 1.0

    def test_coupled_monotone_in_alpha(self):
        rows = scan_q(0.2, [0.0, 0.5, 2.0, 8.0, 16.0], 1.0, Rule.MODIFIED, 30, 40, 11, bc=RING)
        hits = [row.hits for row in rows]
        assert hits == sorted(hits, reverse=True)
        assert [row.alpha for row in rows] == [0.0, 0.5, 2.0, 8.0, 16.0]

    def test_rerun_is_bit_exact(self):
        args = (0.15, [0.5, 4.0], 1.0, Rule.STANDARD, 25, 20, 99)
        first, second = scan_q(*args), scan_q(*args)
        assert first == second
        assert rows_to_csv(first, SCAN_FIELDS) == rows_to_csv(second, SCAN_FIELDS)

    def test_matches_independent_estimates(self):
        rows = scan_q(0.2, [1.0], 1.0, Rule.MODIFIED, 20, 25, 4)
        single = estimate_occupation(TrialSpec(Rule.MODIFIED, 20, 0.2, rows[0].q, trials=25, master_seed=4))
        assert rows[0].hits == single.hits

    def test_invalid_q(self):
        with pytest.raises(ParameterError):
            scan_q(0.5, [100.0], 0.0, Rule.MODIFIED, 10, 2, 0)

    @pytest.mark.parametrize('p', [0.0, 1.0])
    def test_p_outside_open_interval(self, p):
        with pytest.raises(ParameterError):
            scan_q(p, [1.0], 1.0, Rule.MODIFIED, 10, 2, 0)

    def test_beta_label(self):
        rows = scan_q(0.2, [1.0], 0.5, Rule.MODIFIED, 10, 2, 0)
        assert rows[0].beta_label == 'beta=0.5'

    @pytest.mark.slow
    def test_phase_separation(self):
        p = 0.10
        sparse, dense = scan_q(p, [0.05, 20.0], 1.0, Rule.MODIFIED, default_L(p), 400, 0, bc=FREE)
        assert sparse.L == 185 and sparse.trials == 400
        assert sparse.fraction > dense.fraction
        assert sparse.ci_low > dense.ci_high


class TestCsv:
    def test_exact_bytes(self):
        row = ScanRow(0.1, 0.001, 0.5, 'beta=1', 'modified', 10, 'free', 4, 2, 0.5, 0.1, 0.9)
        expected = ("p,q,alpha,beta_label,rule,L,bc,trials,hits,fraction,ci_low,ci_high,seconds\n"
                    "0.1,0.001,0.5,beta=1,modified,10,free,4,2,0.5,0.1,0.9,0.0\n")
        assert rows_to_csv([row], SCAN_FIELDS) == expected

    def test_header_only(self):
        assert rows_to_csv([], COMPARE_FIELDS) == "p,L,q_hat_standard,q_hat_modified,ratio\n"

    def test_write_file(self, tmp_path):
        rows = scan_q(0.2, [0.0, 4.0], 1.0, Rule.MODIFIED, 12, 4, 1)
        path = write_scan_csv(rows, tmp_path / 'out' / 'scan.csv')
        data = path.read_bytes()
        assert b'\r' not in data
        assert data.decode('utf-8') == rows_to_csv(rows, SCAN_FIELDS)


class TestEstimateQc:
    def test_synthetic_step(self):
        tol = 0.05
        result = estimate_qc(0.1, Rule.MODIFIED, 50, 10, 0, tol, oracle=step_oracle(0.003))
        lo, hi = result.bracket
        assert result.found
        assert lo <= 0.003 <= hi
        assert lo <= result.q_hat <= hi
        assert hi - lo <= tol * result.q_hat
        assert abs(result.q_hat - 0.003) <= tol * result.q_hat

    def test_no_threshold(self):
        result = estimate_qc(0.1, Rule.MODIFIED, 50, 10, 0, 0.1, oracle=lambda q: 0.2)
        assert result.outcome == 'no-threshold'
        assert result.q_hat == 0.0
        assert result.bracket == (0.0, 0.0)

    def test_above_range(self):
        result = estimate_qc(0.3, Rule.STANDARD, 50, 10, 0, 0.1, oracle=lambda q: 1.0)
        assert result.outcome == 'above-range'
        assert result.q_hat == pytest.approx(0.7)

    @pytest.mark.parametrize('tol', [0.0, -0.1])
    def test_tolerance_must_be_positive(self, tol):
        with pytest.raises(ParameterError):
            estimate_qc(0.1, Rule.MODIFIED, 50, 10, 0, tol, oracle=step_oracle(0.003))

    def test_evaluations_are_recorded(self):
        result = estimate_qc(0.1, Rule.MODIFIED, 50, 10, 0, 0.2, oracle=step_oracle(0.01))
        assert result.evaluations[0] == (0.0, 1.0, 0)
        assert len(result.evaluations) > 2

    def test_rule_domination_on_measured_output(self):
        kwargs = dict(p=0.2, L=20, trials=30, master_seed=6, tol=0.2)
        standard = estimate_qc(rule=Rule.STANDARD, **kwargs)
        modified = estimate_qc(rule=Rule.MODIFIED, **kwargs)
        assert standard.q_hat >= modified.q_hat
        assert standard.bracket[0] <= standard.q_hat <= standard.bracket[1]

    def test_monte_carlo_rerun_identical(self):
        kwargs = dict(p=0.2, rule=Rule.MODIFIED, L=16, trials=20, master_seed=1, tol=0.3)
        assert estimate_qc(**kwargs) == estimate_qc(**kwargs)

    def test_dict_round_trip(self):
        result = estimate_qc(0.1, Rule.MODIFIED, 50, 10, 0, 0.1, oracle=step_oracle(0.003))
        assert QcResult.from_dict(result.to_dict()) == result


class TestCompareRules:
    def test_ratio_from_oracles(self):
        oracles = {
            Rule.STANDARD: lambda p, q: 1.0 if q < 2 * p * p else 0.0,
            Rule.MODIFIED: lambda p, q: 1.0 if q < p * p else 0.0,
        }
        rows = compare_rules([0.12, 0.1], 40, 10, 0, tol=0.01, oracles=oracles)
        assert [row.p for row in rows] == [0.12, 0.1]
        for row in rows:
            assert row.L == 40
            assert row.ratio == pytest.approx(2.0, rel=0.03)

    def test_degenerate_ratios(self):
        none = lambda p, q: 0.0
        some = lambda p, q: 1.0 if q < 0.01 else 0.0
        infinite = compare_rules([0.1], 40, 10, 0, oracles={Rule.STANDARD: some, Rule.MODIFIED: none})
        undefined = compare_rules([0.1], 40, 10, 0, oracles={Rule.STANDARD: none, Rule.MODIFIED: none})
        assert infinite[0].ratio == math.inf
        assert math.isnan(undefined[0].ratio)

    def test_side_rules(self):
        flat = lambda p, q: 1.0 if q < 0.01 else 0.0
        oracles = {Rule.STANDARD: flat, Rule.MODIFIED: flat}
        assert compare_rules([0.1], None, 5, 0, oracles=oracles)[0].L == 185
        assert compare_rules([0.1], lambda p: 33, 5, 0, oracles=oracles)[0].L == 33

    @pytest.mark.slow
    def test_standard_threshold_dominates_at_default_sides(self):
        p_list = [0.12, 0.10, 0.08]
        rows = compare_rules(p_list, None, 100, 0, tol=0.25)
        assert [row.L for row in rows] == [default_L(p) for p in p_list]
        for row in rows:
            standard = estimate_qc(row.p, Rule.STANDARD, row.L, 100, 0, 0.25)
            modified = estimate_qc(row.p, Rule.MODIFIED, row.L, 100, 0, 0.25)
            assert (standard.q_hat, modified.q_hat) == (row.q_hat_standard, row.q_hat_modified)
            assert row.q_hat_standard >= row.q_hat_modified
            if modified.outcome == 'no-threshold':
                # fraction < 1/2 dès q = 0: seuil nul, rapport infini
                assert modified.bracket == (0.0, 0.0)
                assert row.q_hat_modified == 0.0
                if row.q_hat_standard > 0.0:
                    assert row.ratio == math.inf
                else:
                    assert math.isnan(row.ratio)
            else:
                assert standard.bracket[0] >= modified.bracket[1]
                assert row.ratio == pytest.approx(row.q_hat_standard / row.q_hat_modified)
                assert row.ratio > 1.0


class TestGoodWindow:
    def test_fully_occupied_window(self):
        result = good_box_window(1.0, 2, 0.0, (2, 3), 3, 0, gp=WINDOW_PARAMS)
        assert result.density.fraction == 1.0
        assert result.largest_fraction == 1.0

    def test_single_box_window(self):
        result = good_box_window(0.3, 2, 0.01, (1, 1), 20, 4, gp=WINDOW_PARAMS)
        assert set(result.per_trial_largest) <= {0.0, 1.0}
        assert sum(result.per_trial_largest) == result.density.hits

    def test_largest_component(self):
        good = np.array([[1, 1, 0], [0, 0, 0], [1, 0, 1]], dtype=bool)
        assert largest_component_fraction(good) == pytest.approx(2 / 9)
        assert largest_component_fraction(np.zeros((2, 2), dtype=bool)) == 0.0

    def test_invalid_window(self):
        with pytest.raises(ParameterError):
            good_box_window(0.3, 2, 0.01, (0, 2), 5, 0, gp=WINDOW_PARAMS)

    def test_budget_refusal(self):
        with pytest.raises(MemoryBudgetError):
            good_box_window(0.3, 2, 0.01, (400, 400), 1, 0, gp=WINDOW_PARAMS, budget=MemoryBudget(1))


class TestSimulate:
    def test_summary(self):
        summary = simulate(30, PollutionParams(0.2, 0.01, 3), Rule.MODIFIED)
        assert summary.final_occupied_fraction >= summary.initial_occupied_fraction
        assert summary.target == (15, 15)
        assert summary.target_occupied == (summary.final.get_state((15, 15)) is CellState.OCCUPIED)
        assert 'initial' not in summary.to_dict()

    def test_ring_without_pollution_fills_box(self):
        summary = simulate(12, PollutionParams(0.1, 0.0, 1), Rule.MODIFIED, RING)
        assert summary.final_occupied_fraction == 1.0
        assert summary.cluster_count == 1
