import io
import math

import numpy as np
import pytest
from scipy import stats

from banditsim import simulation as S
from banditsim.errors import ConfigError, LogFormatError


def two_segment_env():
    return S.from_schedules([[[0, 50, 0.1], [50, 100, 0.2]]], 100)


class TestProbAt:
    def test_constant(self):
        assert S.prob_at(S.stationary([0.3], 100), 0, 50) == 0.3

    def test_segment_boundary_belongs_to_later_segment(self):
        env = two_segment_env()
        assert S.prob_at(env, 0, 49) == 0.1
        assert S.prob_at(env, 0, 50) == 0.2

    @pytest.mark.parametrize("t", [100, -1])
    def test_out_of_range(self, t):
        with pytest.raises(IndexError):
            S.prob_at(two_segment_env(), 0, t)


class TestEnvironmentValidation:
    def test_gap(self):
        with pytest.raises(ConfigError):
            S.from_schedules([[[0, 40, 0.1], [50, 100, 0.2]]], 100)

    def test_short(self):
        with pytest.raises(ConfigError):
            S.from_schedules([[[0, 90, 0.1]]], 100)

    def test_bad_probability(self):
        with pytest.raises(ConfigError):
            S.stationary([1.2], 10)

    def test_empty_segment(self):
        with pytest.raises(ConfigError):
            S.ScheduleSegment(5, 5, 0.1)


class TestSampleReward:
    @pytest.mark.parametrize("p, expected", [(0.0, 0), (1.0, 1)])
    def test_degenerate(self, p, expected):
        env = S.stationary([p], 10)
        rng = np.random.default_rng(0)
        assert {S.sample_reward(env, 0, t % 10, rng) for t in range(1000)} == {expected}

    def test_half(self):
        env = S.stationary([0.5], 1)
        rng = np.random.default_rng(1)
        mean = np.mean([S.sample_reward(env, 0, 0, rng) for _ in range(100_000)])
        # 3 sigma of a binomial proportion at n = 1e5 is 0.0047
        assert mean == pytest.approx(0.5, abs=0.005)


class TestCrossingScenario:
    def test_midpoint(self):
        env = S.make_crossing_scenario(100, 0.2, 0.4, 50)
        assert S.prob_at(env, 0, 0) == pytest.approx(0.3)
        np.testing.assert_allclose(env.overall_rates(), [0.3, 0.3])

    def test_weighted_average(self):
        env = S.make_crossing_scenario(1000, 0.01, 0.03, 300)
        assert S.prob_at(env, 0, 999) == pytest.approx(0.016, abs=1e-15)
        assert S.prob_at(env, 1, 299) == 0.03
        assert S.prob_at(env, 1, 300) == 0.01

    @pytest.mark.parametrize("p_low, p_high", [(0.0, 1.0), (0.1, 0.7), (0.02, 0.05)])
    def test_half_horizon_crossing_gives_midpoint(self, p_low, p_high):
        env = S.make_crossing_scenario(200, p_low, p_high, 100)
        assert S.prob_at(env, 0, 0) == pytest.approx((p_low + p_high) / 2)

    @pytest.mark.parametrize(
        "args", [(100, 0.2, 0.4, 0), (100, 0.2, 0.4, 100), (100, 0.4, 0.2, 50), (100, 0.2, 1.1, 50)]
    )
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            S.make_crossing_scenario(*args)

    def test_overall_cvr_equal_at_large_horizon(self):
        horizon = 10**6
        env = S.make_crossing_scenario(horizon, 0.01, 0.03, 300_000)
        log = S.generate_uniform_log(env, np.random.default_rng(2024))
        n = np.bincount(log.arms, minlength=2)
        w = np.bincount(log.arms, weights=log.rewards, minlength=2)
        cvr = w / n
        pooled = w.sum() / n.sum()
        se = math.sqrt(pooled * (1 - pooled) * (1 / n[0] + 1 / n[1]))
        assert abs(cvr[0] - cvr[1]) <= 3 * se

    def test_cumulative_cvr_curves_cross_and_converge(self):
        env = S.make_crossing_scenario(200_000, 0.01, 0.05, 100_000)
        log = S.generate_uniform_log(env, np.random.default_rng(8))
        curves = []
        for arm in (0, 1):
            mask = log.arms == arm
            curves.append(np.cumsum(log.rewards * mask) / np.maximum(np.cumsum(mask), 1))
        v1, v2 = curves
        early, mid = 50_000, 100_000
        assert v2[early] > v1[early]
        assert v2[mid] > v1[mid]
        # local rates have crossed: v2 loses ground after the crossing
        assert v2[-1] < v2[mid]
        assert abs(v2[-1] - v1[-1]) < 0.003


class TestUniformLog:
    def test_shape_and_determinism(self):
        env = S.make_crossing_scenario(1000, 0.1, 0.5, 400)
        a = S.generate_uniform_log(env, np.random.default_rng(3))
        b = S.generate_uniform_log(env, np.random.default_rng(3))
        assert len(a) == 1000
        assert a.to_csv_text() == b.to_csv_text()
        assert a.to_csv_text().encode() == b.to_csv_text().encode()
        assert list(a.steps) == list(range(1000))

    def test_arm_balance(self):
        log = S.generate_uniform_log(S.stationary([0.5, 0.5], 100_000), np.random.default_rng(4))
        share = np.mean(log.arms == 0)
        assert share == pytest.approx(0.5, abs=0.005)

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_chi_square_uniformity(self, k):
        log = S.generate_uniform_log(S.stationary([0.2] * k, 100_000), np.random.default_rng(k))
        counts = np.bincount(log.arms, minlength=k)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_zero_probability_env(self):
        log = S.generate_uniform_log(S.stationary([0.0, 0.0], 5000), np.random.default_rng(5))
        assert log.rewards.sum() == 0


class TestLogCsv:
    def test_round_trip(self, tmp_path):
        log = S.generate_uniform_log(S.stationary([0.3, 0.6, 0.1], 500), np.random.default_rng(6))
        path = tmp_path / "log.csv"
        log.write_csv(path)
        raw = path.read_bytes()
        assert raw.startswith(b"step,arm,reward\n")
        assert b"\r" not in raw
        back = S.EventLog.read_csv(path)
        assert back.to_csv_text() == log.to_csv_text()
        assert back.n_arms == 3

    def test_header_required(self):
        with pytest.raises(LogFormatError) as err:
            S.EventLog.parse_csv(io.StringIO("t,a,r\n0,0,1\n"))
        assert err.value.line == 1

    @pytest.mark.parametrize(
        "body, line",
        [("0,0,1\n1,1,2\n", 3), ("0,x,1\n", 2), ("0,0\n", 2), ("0,0,1\n1,-1,0\n", 3)],
    )
    def test_bad_rows_report_line(self, body, line):
        with pytest.raises(LogFormatError) as err:
            S.EventLog.parse_csv(io.StringIO("step,arm,reward\n" + body))
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_arm_beyond_declared_count(self):
        with pytest.raises(LogFormatError):
            S.EventLog.parse_csv(io.StringIO("step,arm,reward\n0,2,1\n"), n_arms=2)

    def test_iteration_yields_events(self):
        log = S.EventLog([0, 1], [1, 0], [1, 0])
        assert list(log) == [S.LoggedEvent(0, 1, 1), S.LoggedEvent(1, 0, 0)]
