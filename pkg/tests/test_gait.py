import itertools

import pytest
from hypothesis import given, strategies as st

from frictionlab.errors import InvalidInputError
from frictionlab.gait import (CONTACT_CSV_HEADER, GROUP0, GROUP1, ContactFrame,
                              LEG_ORDER, r_trot, r_unsync, read_contact_csv,
                              reward_series, write_contact_csv)

TRIPOD0 = ContactFrame.from_contacts(GROUP0)
TRIPOD1 = ContactFrame.from_contacts(GROUP1)


class TestContactGroups:
    def test_disjoint(self):
        assert not (GROUP0 & GROUP1)

    def test_cover_all_six_legs(self):
        assert GROUP0 | GROUP1 == set(LEG_ORDER)


class TestRTrot:
    def test_group0_scores(self):
        assert r_trot(TRIPOD0) == 1

    def test_group1_scores(self):
        assert r_trot(TRIPOD1) == 1

    def test_pronk_scores_zero(self):
        assert r_trot(ContactFrame.from_contacts(LEG_ORDER)) == 0

    def test_partial_group_scores_zero(self):
        assert r_trot(ContactFrame.from_contacts({"FL", "MR"})) == 0

    def test_exhaustive_enumeration(self):
        # independent oracle: compare the contact set against the two tripods
        winners = []
        for bits in itertools.product([False, True], repeat=6):
            frame = ContactFrame.from_flags(bits)
            expected = 1 if frame.contact_set() in (GROUP0, GROUP1) else 0
            assert r_trot(frame) == expected
            if expected:
                winners.append(frame.contact_set())
        assert sorted(map(sorted, winners)) == sorted(map(sorted, [GROUP0, GROUP1]))

    @given(bits=st.tuples(*([st.booleans()] * 6)))
    def test_invariant_under_group_swap(self, bits):
        frame = ContactFrame.from_flags(bits)
        # swap membership of the two tripods leg by leg
        swap = {"FL": "FR", "FR": "FL", "ML": "MR", "MR": "ML", "RL": "RR", "RR": "RL"}
        swapped = ContactFrame.from_contacts({swap[leg] for leg in frame.contact_set()})
        assert r_trot(frame) == r_trot(swapped)


class TestRUnsync:
    def test_balanced_pair(self):
        assert r_unsync([TRIPOD0, TRIPOD1], 2) == 0

    def test_single_group_hopping(self):
        assert r_unsync([TRIPOD0, TRIPOD0], 2) == 6

    def test_empty_contacts(self):
        empty = ContactFrame.from_flags([False] * 6)
        assert r_unsync([empty], 1) == 0

    def test_uses_only_last_horizon_frames(self):
        history = [TRIPOD0] * 10 + [TRIPOD0, TRIPOD1]
        assert r_unsync(history, 2) == 0

    def test_short_history_rejected(self):
        with pytest.raises(InvalidInputError):
            r_unsync([TRIPOD0], 2)

    @pytest.mark.parametrize("horizon", range(1, 11))
    def test_balanced_history_scores_zero(self, horizon):
        history = [TRIPOD0, TRIPOD1] * horizon
        assert r_unsync(history, 2 * horizon) == 0

    @pytest.mark.parametrize("horizon", range(1, 11))
    def test_constant_group_maximizes(self, horizon):
        assert r_unsync([TRIPOD0] * horizon, horizon) == 3 * horizon
        assert r_unsync([TRIPOD1] * horizon, horizon) == 3 * horizon

    @given(frames=st.lists(st.tuples(*([st.booleans()] * 6)), min_size=1, max_size=12))
    def test_bounded_by_three_horizon(self, frames):
        history = [ContactFrame.from_flags(b) for b in frames]
        horizon = len(history)
        assert 0 <= r_unsync(history, horizon) <= 3 * horizon


class TestContactCsv:
    def test_round_trip(self, tmp_path):
        frames = [TRIPOD0, TRIPOD1, ContactFrame.from_flags([True] * 6)]
        path = tmp_path / "contacts.csv"
        write_contact_csv(path, frames)
        assert read_contact_csv(path) == frames

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,FL,FR\n0,1,0\n")
        with pytest.raises(InvalidInputError):
            read_contact_csv(path)

    def test_non_binary_flags_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(CONTACT_CSV_HEADER + "\n0.0,1,0,2,0,1,0\n")
        with pytest.raises(InvalidInputError):
            read_contact_csv(path)


class TestRewardSeries:
    def test_ideal_trot_log(self):
        frames = [TRIPOD0, TRIPOD1] * 6
        report = reward_series(frames, horizon=2)
        assert report["r_trot"] == [1] * 12
        assert report["r_unsync"][0] is None
        assert all(v == 0 for v in report["r_unsync"][1:])

    def test_constant_group_log(self):
        report = reward_series([TRIPOD0] * 12, horizon=10)
        assert report["r_unsync"][:9] == [None] * 9
        assert report["r_unsync"][9:] == [30, 30, 30]
