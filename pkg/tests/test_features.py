import pytest

from commevo.cpm import Group
from commevo.features import (
    GED_CATEGORICAL,
    GED_NUMERIC,
    SGCI_NUMERIC,
    ged_instances,
    read_features,
    sgci_instances,
    sgci_predecessors,
    write_features,
    write_manifest,
)
from commevo.ged import track as ged_track
from commevo.metrics import GroupProfile
from commevo.sgci import track as sgci_track


def history(*frames):
    return [[Group(t, i, frozenset(m)) for i, m in enumerate(f)] for t, f in enumerate(frames)]


def fake_profiles(groups):
    # size plus the frame in the leadership slot so rows are traceable
    return {g.key: GroupProfile(g.n, g.frame / 10, 0.5, 2e6) for f in groups for g in f}


def r(a, b):
    return list(range(a, b))


class TestSgci:
    def test_dominating_next_event_is_the_target(self):
        a = r(0, 5)
        h = history([a], [a], [a], [r(0, 60), r(0, 6)])
        fs = sgci_instances(sgci_track(h), fake_profiles(h))
        (inst,) = [i for i in fs.instances if i.frame == 2]
        assert inst.target == "change_size"
        assert len(inst.numeric) == 12 == len(SGCI_NUMERIC)
        # cohesion is clipped at the cap
        assert inst.numeric == (5.0, 0.0, 0.5, 1e6, 5.0, 0.1, 0.5, 1e6, 5.0, 0.2, 0.5, 1e6)

    def test_groups_without_history_are_skipped(self):
        a = r(0, 10)
        h = history([a], [a], [a], [a])
        fs = sgci_instances(sgci_track(h), fake_profiles(h))
        assert [i.frame for i in fs.instances] == [2]
        assert fs.skipped == 2

    def test_max_mj_predecessor_chain(self):
        p1, p2 = r(0, 10), r(100, 108)
        m = r(0, 10) + r(100, 106)
        h = history([p1, p2], [p1, p2], [m], [m])
        res = sgci_track(h)
        assert sgci_predecessors(res)[(2, 0)] == (1, 0)
        fs = sgci_instances(res, fake_profiles(h))
        (inst,) = [i for i in fs.instances if i.frame == 2]
        assert inst.numeric[0] == 10.0 and inst.numeric[4] == 10.0

    def test_split_merge_relabelled_to_split(self):
        a, c = r(0, 10), r(100, 104)
        b1, b2 = r(0, 4), r(4, 10) + c
        h = history([a, c], [a, c], [a, c], [b2, b1])
        fs = sgci_instances(sgci_track(h), fake_profiles(h))
        targets = {(i.frame, i.ordinal): i.target for i in fs.instances}
        assert targets[(2, 0)] == "split" and targets[(2, 1)] == "merge"

    def test_decay_target(self):
        a = r(0, 10)
        h = history([a], [a], [a], [r(50, 60)])
        (inst,) = sgci_instances(sgci_track(h), fake_profiles(h)).instances
        assert inst.target == "decay"


def uniform(groups):
    return {g.key: {x: 1.0 for x in g.members} for f in groups for g in f}


class TestGed:
    def test_full_history_ending_in_dissolving(self):
        a = r(0, 10)
        h = history([a], [a], [a], [a], [r(50, 60)])
        fs = ged_instances(ged_track(h, [], importance=uniform(h)), fake_profiles(h))
        (inst,) = [i for i in fs.instances if i.frame == 3]
        assert inst.target == "dissolving"
        assert inst.categorical == ("continuing",) * 3
        assert len(inst.numeric) == 16 == len(GED_NUMERIC)

    def test_forming_opens_the_chain(self):
        a = r(0, 10)
        h = history([r(90, 95)], [a], [a], [a])
        fs = ged_instances(ged_track(h, [], importance=uniform(h)), fake_profiles(h))
        (inst,) = [i for i in fs.instances if (i.frame, i.ordinal) == (2, 0)]
        assert inst.categorical == ("absent", "forming", "continuing")
        assert inst.numeric[:8] == (0.0,) * 8
        assert all(i.target != "forming" for i in fs.instances)

    def test_one_instance_per_next_event(self):
        a = r(0, 12)
        h = history([a], [a], [a], [a], [r(0, 6), r(6, 12)])
        fs = ged_instances(ged_track(h, [], importance=uniform(h)), fake_profiles(h))
        last = [i for i in fs.instances if i.frame == 3]
        assert [(i.counterpart, i.target) for i in last] == [(0, "splitting"), (1, "splitting")]

    def test_first_frame_groups_are_skipped(self):
        a = r(0, 10)
        h = history([a], [a], [a])
        fs = ged_instances(ged_track(h, [], importance=uniform(h)), fake_profiles(h))
        assert fs.instances == [] and fs.skipped == 2


def test_export_roundtrip_and_manifest(tmp_path):
    a = r(0, 10)
    h = history([r(90, 95)], [a], [a], [a], [r(0, 5), r(5, 10)])
    fs = ged_instances(ged_track(h, [], importance=uniform(h)), fake_profiles(h))
    write_features(fs, tmp_path / "f.csv")
    header = (tmp_path / "f.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["frame", "ordinal", "counterpart"] and header[-1] == "target"
    assert header[3:8] == GED_NUMERIC[:4] + [GED_CATEGORICAL[0]]
    back = read_features(tmp_path / "f.csv")
    assert back.method == "ged" and back.instances == fs.instances
    data = back.to_dataset()
    assert data.numeric.shape == (len(fs.instances), 16) and data.categorical.shape[1] == 3
    write_manifest(fs, tmp_path / "f.manifest")
    text = (tmp_path / "f.manifest").read_text()
    assert f"instances={len(fs.instances)}" in text and "class.splitting=" in text


def test_sgci_export_roundtrip(tmp_path):
    a = r(0, 10)
    h = history([a], [a], [a], [a])
    fs = sgci_instances(sgci_track(h), fake_profiles(h))
    write_features(fs, tmp_path / "s.csv")
    back = read_features(tmp_path / "s.csv")
    assert back.method == "sgci" and back.instances == fs.instances
    with pytest.raises(KeyError):
        fake_profiles(h)[(9, 9)]
