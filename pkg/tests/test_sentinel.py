import random

import pytest

from gridsec import sentinel
from gridsec.sha1 import sha1

TRACE_A = """\
# three changes to one artifact: stub active, inactive, active again
1 metadata_change stub1 100:stub1 101:other
5 metadata_change stub1
9 metadata_change stub1 100:stub1
"""


def registry(*artifact_ids):
    return sentinel.ProcessRegistry(tuple((100 + i, a) for i, a in enumerate(artifact_ids)))


class TestRegistration:
    def test_register_fingerprints_content(self):
        s = sentinel.Sentinel()
        artifact = s.register("stub", b"binary contents")
        assert artifact.fingerprint == sha1(b"binary contents")

    def test_duplicate_registration_rejected(self):
        s = sentinel.Sentinel()
        s.register("stub", b"a")
        with pytest.raises(sentinel.DuplicateArtifactError):
            s.register("stub", b"b")

    def test_independent_watch_states(self):
        s = sentinel.Sentinel()
        s.register("a", b"1")
        s.register("b", b"2")
        s.on_event(sentinel.ChangeEvent(1, sentinel.METADATA_CHANGE, "a"), registry())
        assert s.watched["a"].last_change_tick == 1
        assert s.watched["b"].last_change_tick == -1

    def test_register_then_idle_no_alerts(self):
        s = sentinel.Sentinel()
        s.register("stub", b"x")
        assert s.alerts == []


class TestJudging:
    def test_change_while_active_is_authorized(self):
        s = sentinel.Sentinel()
        s.register("stub", b"x")
        ev = s.on_event(sentinel.ChangeEvent(3, sentinel.METADATA_CHANGE, "stub"), registry("stub"))
        assert ev.judged == sentinel.AUTHORIZED
        assert s.alerts == []

    def test_change_while_inactive_raises_alert(self):
        s = sentinel.Sentinel()
        s.register("stub", b"x")
        ev = s.on_event(sentinel.ChangeEvent(4, sentinel.CONTENT_CHANGE, "stub"), registry("other"))
        assert ev.judged == sentinel.UNAUTHORIZED
        assert s.alerts == [sentinel.Alert(4, "stub", sentinel.CONTENT_CHANGE)]

    def test_unregistered_artifact_ignored_with_warning(self):
        s = sentinel.Sentinel()
        assert s.on_event(sentinel.ChangeEvent(1, sentinel.METADATA_CHANGE, "ghost"), registry()) is None
        assert s.ignored_events == 1
        assert s.alerts == []

    def test_unknown_kind_rejected(self):
        s = sentinel.Sentinel()
        s.register("stub", b"x")
        with pytest.raises(ValueError):
            s.on_event(sentinel.ChangeEvent(1, "renamed", "stub"), registry())

    def test_fingerprint_cost_accounting(self):
        # Zero hashes for metadata changes, at most one per content change.
        s = sentinel.Sentinel()
        s.register("stub", b"x")
        s.on_event(sentinel.ChangeEvent(1, sentinel.METADATA_CHANGE, "stub"), registry("stub"))
        assert s.fingerprint_computations == 0
        s.on_event(
            sentinel.ChangeEvent(2, sentinel.CONTENT_CHANGE, "stub", content=b"new"), registry("stub")
        )
        assert s.fingerprint_computations == 1
        assert s.watched["stub"].fingerprint == sha1(b"new")


class TestTraceReplay:
    def test_trace_a_single_alert_at_middle_event(self):
        alerts = sentinel.replay_trace(TRACE_A)
        assert alerts == [sentinel.Alert(5, "stub1", sentinel.METADATA_CHANGE)]

    def test_empty_trace(self):
        assert sentinel.replay_trace("") == []
        assert sentinel.replay_trace("# only a comment\n") == []

    def test_replay_is_deterministic(self):
        assert sentinel.replay_trace(TRACE_A) == sentinel.replay_trace(TRACE_A)

    def test_alert_count_matches_ground_truth(self):
        rng = random.Random(21)
        for _ in range(50):
            lines = []
            expected = 0
            for tick in range(rng.randrange(0, 40)):
                kind = rng.choice([sentinel.METADATA_CHANGE, sentinel.CONTENT_CHANGE])
                active = rng.random() < 0.5
                lines.append(f"{tick} {kind} stub" + (" 7:stub" if active else ""))
                if not active:
                    expected += 1
            assert len(sentinel.replay_trace(lines)) == expected

    def test_replay_from_file(self, tmp_path):
        path = tmp_path / "trace.txt"
        path.write_text(TRACE_A)
        assert sentinel.replay_trace(path) == [sentinel.Alert(5, "stub1", sentinel.METADATA_CHANGE)]

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("notanumber metadata_change stub", "tick"),
            ("1 vanished stub", "kind"),
            ("1 metadata_change", "expected"),
            ("1 metadata_change stub nocolon", "pid:artifact_id"),
            ("1 metadata_change stub x:stub", "not an integer"),
        ],
    )
    def test_parse_errors_carry_line_numbers(self, line, fragment):
        with pytest.raises(sentinel.TraceParseError) as exc_info:
            sentinel.parse_trace(["# header", line])
        assert exc_info.value.lineno == 2
        assert fragment in str(exc_info.value)
