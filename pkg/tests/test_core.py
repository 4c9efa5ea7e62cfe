import pytest
from hypothesis import given

from copland.core import (
    AAt,
    ABPar,
    ABSeq,
    ALSeq,
    APrim,
    Asp,
    At,
    BPar,
    BSeq,
    Cpy,
    Hsh,
    LSeq,
    Range,
    Sig,
    Sp,
    SplitSpec,
    annotate,
    depth,
    places,
    size,
    unanno,
    well_formed,
)
from strategies import phrases

ALL_NONE = SplitSpec(Sp.ALL, Sp.NONE)


def test_leaf_takes_one_id():
    assert annotate(Sig(), 5) == (APrim(Range(5, 6), Sig()), 6)


def test_bpar_reserves_split_and_join():
    at, nxt = annotate(BPar(ALL_NONE, Sig(), Sig()), 0)
    assert nxt == 4
    assert at == ABPar(Range(0, 4), ALL_NONE, APrim(Range(1, 2), Sig()), APrim(Range(2, 3), Sig()))


def test_at_reserves_request_and_reply():
    vc = Asp(0, (), 1, 7)
    at, nxt = annotate(At(1, LSeq(vc, Sig())), 0)
    assert nxt == 4
    body = ALSeq(Range(1, 3), APrim(Range(1, 2), vc), APrim(Range(2, 3), Sig()))
    assert at == AAt(Range(0, 4), 1, body)


def test_lseq_takes_no_id_of_its_own():
    at, nxt = annotate(LSeq(Cpy(), LSeq(Hsh(), Sig())), 3)
    assert nxt == 6
    assert at.rng == Range(3, 6)
    assert at.right.rng == Range(4, 6)


def test_nested_bseq_ranges():
    t = BSeq(ALL_NONE, At(2, Cpy()), BPar(ALL_NONE, Sig(), Hsh()))
    at, nxt = annotate(t, 0)
    # split 0, @ 1..3 (req 1, copy 2, rpy 3), bpar 4..7, join 8
    assert nxt == 9
    assert at.left.rng == Range(1, 4)
    assert at.right.rng == Range(4, 8)
    assert isinstance(at, ABSeq) and at.rng == Range(0, 9)


def test_negative_start_rejected():
    with pytest.raises(ValueError):
        annotate(Sig(), -1)


@given(phrases)
def test_annotate_then_unanno_is_identity(t):
    at, _ = annotate(t, 0)
    assert unanno(at) == t


@given(phrases)
def test_range_width_is_event_count(t):
    at, nxt = annotate(t, 7)
    assert at.rng == Range(7, nxt)
    assert nxt - 7 == size(t)


@given(phrases)
def test_annotate_is_well_formed(t):
    assert well_formed(annotate(t, 3)[0])


def test_shifted_child_is_not_well_formed():
    at, _ = annotate(BPar(ALL_NONE, Sig(), Sig()), 0)
    bad = ABPar(at.rng, at.split, APrim(Range(1, 2), Sig()), APrim(Range(1, 2), Sig()))
    assert not well_formed(bad)


def test_wrong_outer_range_is_not_well_formed():
    assert not well_formed(ALSeq(Range(0, 3), APrim(Range(0, 1), Sig()), APrim(Range(1, 2), Sig())))


def test_well_formed_rejects_non_phrases():
    assert not well_formed("SIG")


def test_size_depth_places():
    t = At(1, LSeq(At(2, Sig()), BPar(ALL_NONE, Cpy(), Hsh())))
    assert size(t) == 2 + (3 + 4)
    assert depth(t) == 4
    assert places(t) == {1, 2}
