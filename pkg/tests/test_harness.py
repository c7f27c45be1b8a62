"""Scenario runs, interleaving checks, and the scenario file format."""

import random

import pytest

import oracles
from lockstep.engine import add_event, init_log
from lockstep.errors import InvalidArgumentError
from lockstep.events import (
    KeyPress,
    KeyRelease,
    Message,
    MouseButton,
    MouseMovement,
    MousePress,
    MouseRelease,
)
from lockstep.games import CountingRules, DriftRules
from lockstep.harness import (
    Fixed,
    InterleavingReport,
    Jitter,
    Report,
    Scenario,
    check_all_interleavings,
    double_pendulum_scenario,
    event_from_plain,
    event_to_plain,
    logs_agree,
    random_interleaving,
    replay_order,
    run_scenario,
    scenario_from_json,
    scenario_to_json,
)


def drift_scenario(net, n=3, seed=5, duration=5.0, samples=(1.0, 2.5, 4.0)):
    scripts = tuple(
        tuple((0.2 + 0.31 * k + 0.07 * p, KeyPress(f"p{p}k{k}")) for k in range(12))
        for p in range(n)
    )
    return Scenario(
        rules_id="drift",
        num_players=n,
        scripts=scripts,
        duration=duration,
        net=net,
        seed=seed,
        samples=samples,
    )


class TestNetModels:
    def test_fixed_validation(self):
        Fixed(0.0)
        Fixed(2.5)
        for bad in (-0.1, float("inf"), float("nan"), "fast"):
            with pytest.raises(InvalidArgumentError):
                Fixed(bad)

    def test_jitter_validation(self):
        Jitter(0.0, 0.0, 0)
        Jitter(0.02, 0.25, 7)
        with pytest.raises(InvalidArgumentError):
            Jitter(0.5, 0.2, 0)
        with pytest.raises(InvalidArgumentError):
            Jitter(-0.1, 0.2, 0)
        with pytest.raises(InvalidArgumentError):
            Jitter(0.1, float("inf"), 0)
        with pytest.raises(InvalidArgumentError):
            Jitter(0.1, 0.2, 1.5)


class TestScenarioValidation:
    def test_script_count_must_match_players(self):
        with pytest.raises(InvalidArgumentError, match="scripts"):
            Scenario("counting", 2, ((),), 1.0, Fixed(0.0))

    def test_script_times_must_fit_duration(self):
        with pytest.raises(InvalidArgumentError, match="outside"):
            Scenario("counting", 1, (((1.0, KeyPress("x")),),), 1.0, Fixed(0.0))

    def test_script_times_must_not_decrease(self):
        script = ((0.5, KeyPress("a")), (0.4, KeyPress("b")))
        with pytest.raises(InvalidArgumentError, match="decrease"):
            Scenario("counting", 1, (script,), 1.0, Fixed(0.0))

    def test_sample_bounds(self):
        with pytest.raises(InvalidArgumentError, match="sample"):
            Scenario("counting", 1, ((),), 1.0, Fixed(0.0), samples=(1.5,))
        # the duration endpoint itself is fine for samples
        Scenario("counting", 1, ((),), 1.0, Fixed(0.0), samples=(1.0,))

    def test_misc_field_validation(self):
        with pytest.raises(InvalidArgumentError):
            Scenario("counting", 0, (), 1.0, Fixed(0.0))
        with pytest.raises(InvalidArgumentError):
            Scenario("counting", 1, ((),), 0.0, Fixed(0.0))
        with pytest.raises(InvalidArgumentError):
            Scenario("counting", 1, ((),), 1.0, Fixed(0.0), seed=-1)
        with pytest.raises(InvalidArgumentError):
            Scenario("counting", 1, ((),), 1.0, Fixed(0.0), tick_period=0.0)


class TestRunScenario:
    def test_zero_latency_clients_always_agree(self):
        report = run_scenario(drift_scenario(Fixed(0.0)))
        assert report.late_events == 0
        for _, row in report.samples:
            assert len(set(row)) == 1
        assert report.converged

    @pytest.mark.parametrize("delay", [0.05, 0.1, 0.3])
    def test_fixed_delay_converges(self, delay):
        report = run_scenario(drift_scenario(Fixed(delay)))
        assert report.late_events > 0
        assert report.converged

    def test_jitter_converges(self):
        report = run_scenario(drift_scenario(Jitter(0.02, 0.25, 99)))
        assert report.converged

    def test_reports_are_byte_identical(self):
        for net in (Fixed(0.1), Jitter(0.02, 0.25, 99)):
            a = run_scenario(drift_scenario(net)).to_text()
            b = run_scenario(drift_scenario(net)).to_text()
            assert a == b

    def test_two_seeds_differ(self):
        a = run_scenario(drift_scenario(Fixed(0.1), seed=1))
        b = run_scenario(drift_scenario(Fixed(0.1), seed=2))
        assert a.final_consistent != b.final_consistent

    def test_quiet_scenario_converges_on_pings_alone(self):
        sc = Scenario("counting", 3, ((), (), ()), 4.0, Fixed(0.15))
        report = run_scenario(sc)
        assert report.converged
        assert report.handles == 0

    def test_single_player_run(self):
        sc = Scenario(
            "counting",
            1,
            (((0.5, KeyPress("solo")),),),
            2.0,
            Fixed(0.25),
            samples=(1.0,),
        )
        report = run_scenario(sc)
        assert report.converged
        assert report.late_events == 0

    def test_counts_are_populated(self):
        report = run_scenario(drift_scenario(Fixed(0.1)))
        assert report.steps > 0
        assert report.handles > 0
        assert report.max_pending > 0
        assert report.quiesce_time > 5.0

    def test_samples_sorted_in_report(self):
        sc = drift_scenario(Fixed(0.0), samples=(4.0, 1.0, 2.5))
        report = run_scenario(sc)
        assert [t for t, _ in report.samples] == [1.0, 2.5, 4.0]

    def test_pending_events_stay_bounded(self):
        # a flood sender against a silent-but-pinging peer: commitment
        # advances on pings, so backlog stays near rate * (delay + interval)
        events = tuple((round(i / 30, 6), KeyPress("k")) for i in range(1, 300))
        sc = Scenario(
            rules_id="counting",
            num_players=2,
            scripts=(events, ()),
            duration=10.0,
            net=Fixed(0.1),
            ping_interval=1.0,
        )
        report = run_scenario(sc)
        assert report.converged
        assert report.max_pending <= 40

    def test_report_text_shape(self):
        report = run_scenario(drift_scenario(Fixed(0.1)))
        text = report.to_text()
        lines = text.splitlines()
        assert lines[0].startswith("scenario:")
        assert lines[-1] == "converged"
        assert "max_pending:" in text
        assert text.endswith("\n")


class TestReport:
    def _report(self, consistent, smoothed):
        return Report(
            scenario="t",
            rules_id="counting",
            num_players=len(consistent),
            quiesce_time=1.0,
            samples=(),
            final_consistent=consistent,
            final_smoothed=smoothed,
            max_pending=0,
            steps=0,
            handles=0,
            late_events=0,
        )

    def test_converged_needs_agreement(self):
        assert self._report((7, 7), (7, 7)).converged
        assert not self._report((7, 8), (7, 8)).converged

    def test_converged_needs_smoothing_to_settle(self):
        assert not self._report((7, 7), (7, 9)).converged

    def test_diverged_text(self):
        assert self._report((1, 2), (1, 2)).to_text().splitlines()[-1] == "DIVERGED"


def keys(player, times):
    return [Message(t, player, KeyPress(f"p{player}")) for t in times]


class StatefulRules:
    """Order-sensitive on purpose: handle output depends on call count."""

    num_players = 2

    def __init__(self):
        self.calls = 0

    def start(self, seed):
        return 0

    def step(self, dt, world):
        return world

    def handle(self, player, event, world):
        self.calls += 1
        return world + self.calls

    def digest(self, world):
        return world & 0xFFFFFFFFFFFFFFFF


class TestInterleavings:
    def test_single_swap(self):
        streams = [keys(0, [1.0]), keys(1, [2.0])]
        report = check_all_interleavings(streams, CountingRules())
        assert report == InterleavingReport(interleavings=2, ok=True)

    def test_three_each(self):
        streams = [keys(0, [1.0, 2.0, 3.0]), keys(1, [1.5, 2.5, 3.5])]
        report = check_all_interleavings(streams, CountingRules())
        assert report.interleavings == 20
        assert report.ok

    def test_three_players(self):
        streams = [keys(p, [1.0 + p / 10, 2.0 + p / 10]) for p in range(3)]
        report = check_all_interleavings(streams, DriftRules())
        assert report.interleavings == 90
        assert report.ok

    def test_identical_timestamps_everywhere(self):
        # worst case for ordering: every message at the same instant
        streams = [keys(0, [1.0, 1.0, 1.0]), keys(1, [1.0, 1.0, 1.0])]
        report = check_all_interleavings(streams, DriftRules())
        assert report.interleavings == 20
        assert report.ok

    def test_empty_streams(self):
        report = check_all_interleavings([[], []], CountingRules())
        assert report == InterleavingReport(interleavings=1, ok=True)

    def test_order_sensitive_rules_are_caught(self):
        streams = [keys(0, [1.0, 2.0]), keys(1, [1.5, 2.5])]
        report = check_all_interleavings(streams, StatefulRules())
        assert not report.ok
        assert report.counterexample is not None
        assert len(report.counterexample) == 4

    def test_cap_refused_before_any_work(self):
        rules = StatefulRules()
        streams = [keys(0, [float(i) for i in range(1, 11)]) for _ in range(1)]
        streams.append(keys(1, [float(i) for i in range(1, 11)]))
        with pytest.raises(InvalidArgumentError, match="cap"):
            check_all_interleavings(streams, rules, cap=1000)
        assert rules.calls == 0

    def test_stream_must_match_player(self):
        streams = [keys(1, [1.0]), keys(1, [2.0])]
        with pytest.raises(InvalidArgumentError, match="claims player"):
            check_all_interleavings(streams, CountingRules())

    def test_stream_must_be_monotone(self):
        streams = [keys(0, [2.0]) + keys(0, [1.0]), []]
        with pytest.raises(InvalidArgumentError, match="backwards"):
            check_all_interleavings(streams, CountingRules())

    def test_random_interleaving_is_a_valid_merge(self):
        rng = random.Random(3)
        sizes = [3, 2, 4]
        order = random_interleaving(sizes, rng.randrange)
        assert len(order) == sum(sizes)
        for p, size in enumerate(sizes):
            assert order.count(p) == size

    def test_replay_order_matches_manual_feed(self):
        streams = [keys(0, [1.0, 3.0]), keys(1, [2.0])]
        rules = CountingRules()
        log = replay_order(streams, (0, 1, 0), rules, seed=9)
        manual = init_log([0, 1], rules, 9)
        for m in (streams[0][0], streams[1][0], streams[0][1]):
            manual = add_event(m, manual, rules)
        assert logs_agree(log, manual, rules)

    def test_random_orders_agree_with_oracle(self):
        rng = random.Random(1234)
        for _ in range(10):
            streams = oracles.random_streams(rng, players=3, max_events=4)
            sizes = [len(s) for s in streams]
            base = replay_order(streams, random_interleaving(sizes, rng.randrange), CountingRules(), 0)
            other = replay_order(streams, random_interleaving(sizes, rng.randrange), CountingRules(), 0)
            assert logs_agree(base, other, CountingRules())


class TestPendulum:
    def test_twin_runs_agree(self):
        a, b = double_pendulum_scenario(2000)
        assert a == b

    def test_native_twin_runs_agree_in_process(self):
        a, b = double_pendulum_scenario(500, use_det_math=False)
        assert a == b

    def test_det_and_native_runs_differ_eventually(self):
        # not a requirement, just evidence the two math stacks are distinct
        det, _ = double_pendulum_scenario(2000)
        native, _ = double_pendulum_scenario(2000, use_det_math=False)
        assert det != native

    def test_zero_steps(self):
        a, b = double_pendulum_scenario(0)
        assert a == b

    def test_rejects_bad_steps(self):
        with pytest.raises(InvalidArgumentError):
            double_pendulum_scenario(-1)


ALL_EVENTS = [
    KeyPress("w"),
    KeyRelease(" "),
    MousePress(MouseButton.LEFT, (0.25, -1.5)),
    MouseRelease(MouseButton.RIGHT, (3.0, 4.0)),
    MouseMovement((-0.125, 2.75)),
]


class TestEventPlainForm:
    @pytest.mark.parametrize("event", ALL_EVENTS, ids=lambda e: type(e).__name__)
    def test_round_trip(self, event):
        assert event_from_plain(event_to_plain(event)) == event

    def test_rejects_unknown_type(self):
        with pytest.raises(InvalidArgumentError, match="unknown event"):
            event_from_plain({"type": "Wheel"})

    def test_rejects_missing_fields(self):
        with pytest.raises(InvalidArgumentError):
            event_from_plain({"type": "KeyPress"})
        with pytest.raises(InvalidArgumentError):
            event_from_plain({"type": "MousePress", "button": "Left", "x": 1})
        with pytest.raises(InvalidArgumentError):
            event_from_plain({"type": "MousePress", "button": "Fourth", "x": 1, "y": 2})

    def test_rejects_non_object(self):
        with pytest.raises(InvalidArgumentError):
            event_from_plain("KeyPress")


class TestScenarioFiles:
    def _scenario(self):
        return Scenario(
            rules_id="dot-trace",
            num_players=2,
            scripts=(
                tuple((0.5 + 0.25 * i, ALL_EVENTS[i % len(ALL_EVENTS)]) for i in range(5)),
                ((1.0, MouseMovement((0.5, 0.5))),),
            ),
            duration=4.0,
            net=Jitter(0.05, 0.2, 11),
            seed=77,
            samples=(2.0, 4.0),
            ping_interval=0.5,
            smoothing_window=0.2,
            tick_period=0.125,
            name="round-trip",
        )

    def test_round_trip(self):
        sc = self._scenario()
        assert scenario_from_json(scenario_to_json(sc)) == sc

    def test_round_trip_fixed_net(self):
        sc = drift_scenario(Fixed(0.125))
        assert scenario_from_json(scenario_to_json(sc)) == sc

    def test_defaults_apply(self):
        text = """
        {"rules": "counting", "num_players": 1, "duration": 2.0,
         "net": {"model": "fixed", "delay": 0.1},
         "scripts": [[{"at": 0.5, "type": "KeyPress", "text": "x"}]]}
        """
        sc = scenario_from_json(text)
        assert sc.seed == 0
        assert sc.samples == ()
        assert sc.name == ""

    def test_rejects_bad_json(self):
        with pytest.raises(InvalidArgumentError, match="JSON"):
            scenario_from_json("{nope")

    def test_rejects_missing_keys(self):
        with pytest.raises(InvalidArgumentError, match="missing"):
            scenario_from_json('{"rules": "counting"}')

    def test_rejects_unknown_keys(self):
        text = """
        {"rules": "counting", "num_players": 1, "duration": 2.0,
         "net": {"model": "fixed", "delay": 0.1}, "scripts": [[]],
         "latency": 5}
        """
        with pytest.raises(InvalidArgumentError, match="unexpected"):
            scenario_from_json(text)

    def test_rejects_unknown_net(self):
        text = """
        {"rules": "counting", "num_players": 1, "duration": 2.0,
         "net": {"model": "carrier-pigeon"}, "scripts": [[]]}
        """
        with pytest.raises(InvalidArgumentError, match="net model"):
            scenario_from_json(text)

    def test_rejects_entry_without_time(self):
        text = """
        {"rules": "counting", "num_players": 1, "duration": 2.0,
         "net": {"model": "fixed", "delay": 0.1},
         "scripts": [[{"type": "KeyPress", "text": "x"}]]}
        """
        with pytest.raises(InvalidArgumentError, match="at"):
            scenario_from_json(text)

    def test_run_from_json_text(self):
        report = run_scenario(scenario_from_json(scenario_to_json(self._scenario())))
        assert report.scenario == "round-trip"
        assert report.converged
