"""Session behavior under a virtual clock, then live over a real relay."""

import queue
import threading
import time

import pytest

from lockstep.engine import commit_horizon
from lockstep.errors import InvalidArgumentError, LobbyError, SessionFault
from lockstep.events import KeyPress, MouseMovement
from lockstep.games import CountingRules
from lockstep.protocol import (
    Error,
    ErrorCode,
    Input,
    Joined,
    Ping,
    Relayed,
    RelayedPing,
    bits_to_float,
    float_to_bits,
)
from lockstep.relay import RelayServer
from lockstep.session import (
    Create,
    Join,
    LiveSession,
    Session,
    VirtualClock,
)

NAN_BITS = 0x7FF8000000000000


def make_session(player=0, num_players=2, **kw):
    clock = VirtualClock()
    sent = []
    s = Session(
        player=player,
        num_players=num_players,
        rules=CountingRules(),
        seed=42,
        clock=clock,
        send=sent.append,
        **kw,
    )
    return s, clock, sent


def relayed_key(t, player, text):
    return Relayed(t_bits=float_to_bits(t), player=player, event=KeyPress(text))


class TestConstruction:
    def test_player_must_be_in_range(self):
        clock = VirtualClock()
        for player in (-1, 2, 7):
            with pytest.raises(InvalidArgumentError):
                Session(player, 2, CountingRules(), 0, clock, lambda f: None)

    def test_ping_interval_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            make_session(ping_interval=0.0)

    def test_virtual_clock_rejects_backwards(self):
        clock = VirtualClock(5.0)
        with pytest.raises(InvalidArgumentError):
            clock.advance_to(4.0)


class TestLocalInput:
    def test_applies_before_any_network_round_trip(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.submit_local(KeyPress("x"))
        assert len(s.log.events) == 1
        assert s.log.events[0].t == 1.0
        assert s.log.events[0].p == 0

    def test_forwards_the_stamped_frame(self):
        s, clock, sent = make_session()
        clock.advance_to(2.5)
        s.submit_local(KeyPress("go"))
        assert sent == [Input(t_bits=float_to_bits(2.5), event=KeyPress("go"))]

    def test_stamp_never_precedes_own_activity(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.submit_local(KeyPress("a"))
        # model a repeated clock reading: the stamp clamps to our last one
        clock.time = 0.5
        s.submit_local(KeyPress("b"))
        assert bits_to_float(sent[1].t_bits) == 1.0
        assert s.log.events[1].t == 1.0

    def test_equal_stamps_are_fine(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.submit_local(KeyPress("a"))
        s.submit_local(KeyPress("b"))
        assert [m.t for m in s.log.events] == [1.0, 1.0]


class TestTick:
    def test_quiet_session_pings_on_the_interval(self):
        s, clock, sent = make_session(ping_interval=1.0)
        assert s.tick() is False
        clock.advance_to(0.99)
        assert s.tick() is False
        clock.advance_to(1.0)
        assert s.tick() is True
        assert sent == [Ping(t_bits=float_to_bits(1.0))]
        assert s.tick() is False
        clock.advance_to(2.0)
        assert s.tick() is True

    def test_ping_advances_own_latest(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.tick()
        assert s.log.latest[0] == 1.0
        assert s.log.events == ()

    def test_steady_input_suppresses_pings(self):
        s, clock, sent = make_session(ping_interval=1.0)
        for i in range(1, 11):
            clock.advance_to(i * 0.4)
            s.submit_local(KeyPress("k"))
            assert s.tick() is False
        assert all(isinstance(f, Input) for f in sent)


class TestOnFrame:
    def test_ingests_peer_input(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.on_frame(relayed_key(0.5, 1, "peer"))
        assert len(s.log.events) == 1
        assert s.log.events[0].p == 1
        assert len(s.smoothing.entries) == 1
        assert s.smoothing.entries[0].arrival == 1.0

    def test_ingests_peer_ping(self):
        s, clock, sent = make_session()
        s.on_frame(RelayedPing(t_bits=float_to_bits(3.0), player=1))
        assert s.log.latest[1] == 3.0
        assert commit_horizon(s.log) == 0.0

    def test_echoed_input_faults(self):
        s, clock, sent = make_session()
        with pytest.raises(SessionFault, match="echoed"):
            s.on_frame(relayed_key(1.0, 0, "me"))

    def test_out_of_order_peer_faults(self):
        s, clock, sent = make_session()
        s.on_frame(relayed_key(2.0, 1, "a"))
        with pytest.raises(SessionFault, match="out of order"):
            s.on_frame(relayed_key(1.0, 1, "b"))

    def test_nan_timestamp_faults(self):
        s, clock, sent = make_session()
        with pytest.raises(SessionFault, match="finite"):
            s.on_frame(Relayed(t_bits=NAN_BITS, player=1, event=KeyPress("x")))

    def test_error_frame_faults(self):
        s, clock, sent = make_session()
        with pytest.raises(SessionFault, match="HashMismatch"):
            s.on_frame(Error(ErrorCode.HASH_MISMATCH, "game hashes differ"))

    def test_lobby_frame_during_game_faults(self):
        s, clock, sent = make_session()
        with pytest.raises(SessionFault, match="Joined"):
            s.on_frame(Joined(player=0, joined=1, total=2))

    def test_fault_is_sticky(self):
        s, clock, sent = make_session()
        with pytest.raises(SessionFault):
            s.on_frame(relayed_key(1.0, 0, "echo"))
        with pytest.raises(SessionFault):
            s.submit_local(KeyPress("x"))
        with pytest.raises(SessionFault):
            s.render()
        with pytest.raises(SessionFault):
            s.tick()


class TestQueries:
    def test_render_settles_to_the_consistent_world(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        s.on_frame(relayed_key(0.5, 1, "peer"))
        s.submit_local(KeyPress("mine"))
        # past the smoothing window nothing is eased any more
        clock.advance_to(1.0 + s.smoothing.window + 0.05)
        assert s.render() == s.consistent_state()

    def test_consistent_state_accepts_an_explicit_time(self):
        s, clock, sent = make_session()
        clock.advance_to(2.0)
        assert s.consistent_state(1.0) == s.consistent_state(at=1.0)

    def test_consistent_state_defaults_to_now(self):
        s, clock, sent = make_session()
        clock.advance_to(0.6)
        # 0.6 chops into 0.0625 * 9 + remainder: ten steps of counting
        assert s.consistent_state() == 10


class TestMouseCoalescing:
    def test_drops_rapid_movements(self):
        s, clock, sent = make_session(coalesce_mouse=True)
        clock.advance_to(1.0)
        assert s.submit_local(MouseMovement((0.0, 0.0))) is True
        assert s.submit_local(MouseMovement((1.0, 1.0))) is False
        assert len(sent) == 1
        clock.advance_to(1.0 + 1.0 / 30.0)
        assert s.submit_local(MouseMovement((2.0, 2.0))) is True
        assert len(sent) == 2

    def test_key_events_are_never_dropped(self):
        s, clock, sent = make_session(coalesce_mouse=True)
        clock.advance_to(1.0)
        assert s.submit_local(KeyPress("a")) is True
        assert s.submit_local(KeyPress("b")) is True
        assert len(sent) == 2

    def test_off_by_default(self):
        s, clock, sent = make_session()
        clock.advance_to(1.0)
        for _ in range(5):
            assert s.submit_local(MouseMovement((0.0, 0.0))) is True
        assert len(sent) == 5


def connect_in_thread(results, *args, **kwargs):
    def run():
        try:
            results.put(LiveSession.connect(*args, **kwargs))
        except BaseException as exc:
            results.put(exc)

    t = threading.Thread(target=run, daemon=True)
    t.start()
    return t


def await_result(results):
    got = results.get(timeout=10)
    if isinstance(got, BaseException):
        raise got
    return got


def start_live_pair(server, identity_a="counting", identity_b="counting"):
    host, port = server.address
    codes = queue.Queue()
    results = queue.Queue()
    connect_in_thread(
        results,
        host,
        port,
        CountingRules(),
        identity_a,
        Create(2),
        lobby_update=lambda f: codes.put(f.code) if hasattr(f, "code") else None,
        ping_interval=0.2,
    )
    code = codes.get(timeout=10)
    b = LiveSession.connect(
        host, port, CountingRules(), identity_b, Join(code), ping_interval=0.2
    )
    a = await_result(results)
    return a, b


class TestLive:
    @pytest.fixture
    def server(self):
        with RelayServer("127.0.0.1", 0) as s:
            yield s

    def test_two_clients_converge(self, server):
        a, b = start_live_pair(server)
        try:
            assert {a.session.player, b.session.player} == {0, 1}
            assert a.code == b.code
            a.submit(KeyPress("from-a"))
            b.submit(KeyPress("from-b"))
            deadline = time.monotonic() + 10
            while time.monotonic() < deadline:
                a.pump()
                b.pump()
                a.tick()
                b.tick()
                if len(a.session.log.events) == 2 and len(b.session.log.events) == 2:
                    break
                time.sleep(0.01)
            assert len(a.session.log.events) == 2
            assert len(b.session.log.events) == 2
            assert a.session.log.events == b.session.log.events
            at = min(commit_horizon(a.session.log), commit_horizon(b.session.log))
            assert a.session.consistent_state(at) == b.session.consistent_state(at)
        finally:
            a.close()
            b.close()

    def test_pings_commit_quiet_peers(self, server):
        a, b = start_live_pair(server)
        try:
            a.submit(KeyPress("only-a"))
            deadline = time.monotonic() + 10
            while time.monotonic() < deadline:
                a.pump()
                b.pump()
                a.tick()
                b.tick()
                if b.session.log.committed[0] > 0.0:
                    break
                time.sleep(0.01)
            # b heard a's event and later activity from both sides committed it
            assert b.session.log.committed[0] > 0.0
        finally:
            a.close()
            b.close()

    def test_bad_code_raises_lobby_error(self, server):
        host, port = server.address
        with pytest.raises(LobbyError) as info:
            LiveSession.connect(host, port, CountingRules(), "counting", Join("ZZZZ"))
        assert info.value.code == "BadCode"

    def test_mismatched_identities_raise(self, server):
        with pytest.raises(LobbyError) as info:
            start_live_pair(server, identity_a="counting", identity_b="drift")
        assert info.value.code == "HashMismatch"

    def test_peer_departure_faults_the_survivor(self, server):
        a, b = start_live_pair(server)
        try:
            b.close()
            deadline = time.monotonic() + 10
            with pytest.raises(SessionFault):
                while time.monotonic() < deadline:
                    a.pump()
                    time.sleep(0.01)
        finally:
            a.close()
