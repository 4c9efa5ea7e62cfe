import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from copland.core import Asp, At, BPar, BSeq, Cpy, Hsh, LSeq, Sig, Sp, SplitSpec, annotate
from copland.events import (
    Before,
    Copy,
    Hash,
    Join,
    Leaf,
    Meas,
    Merge,
    Req,
    Rpy,
    Sign,
    Split,
    count_traces,
    earlier,
    ev_sys,
    events_of,
    is_trace,
    ordered_pairs,
    traces_of,
)
from strategies import small_phrases

SP = SplitSpec(Sp.ALL, Sp.ALL)


def es_of(t, p=0):
    return ev_sys(annotate(t, 0)[0], p)


def test_at_event_system():
    es = es_of(At(1, Sig()), 0)
    assert es == Before(Leaf(Req(0, 0, 1, Sig())), Before(Leaf(Sign(1, 1)), Leaf(Rpy(2, 0, 1))))


def test_bpar_event_system():
    es = es_of(BPar(SP, Sig(), Hsh()), 2)
    inner = Merge(Leaf(Sign(1, 2)), Leaf(Hash(2, 2)))
    assert es == Before(Leaf(Split(0, 2)), Before(inner, Leaf(Join(3, 2))))


def test_bpar_has_two_traces():
    es = es_of(BPar(SP, Sig(), Hsh()))
    s, j = Split(0, 0), Join(3, 0)
    assert traces_of(es) == {(s, Sign(1, 0), Hash(2, 0), j), (s, Hash(2, 0), Sign(1, 0), j)}
    assert count_traces(es) == 2


def test_merge_of_two_chains_has_six_traces():
    a = Before(Leaf(Copy(0, 0)), Leaf(Copy(1, 0)))
    b = Before(Leaf(Copy(2, 0)), Leaf(Copy(3, 0)))
    assert len(traces_of(Merge(a, b))) == 6
    assert count_traces(Merge(a, b)) == 6


def test_bseq_is_totally_ordered():
    es = es_of(BSeq(SP, Sig(), Hsh()))
    assert count_traces(es) == 1


def test_measure_event_carries_asp():
    es = es_of(Asp(3, ("x",), 2, 5), 1)
    assert es == Leaf(Meas(0, 1, 3, ("x",), 2, 5))


def test_earlier():
    es = es_of(BPar(SP, Sig(), Hsh()))
    assert earlier(es, Split(0, 0), Sign(1, 0))
    assert earlier(es, Hash(2, 0), Join(3, 0))
    assert not earlier(es, Sign(1, 0), Hash(2, 0))
    assert not earlier(es, Hash(2, 0), Sign(1, 0))
    assert not earlier(es, Join(3, 0), Split(0, 0))
    with pytest.raises(ValueError):
        earlier(es, Sign(9, 0), Join(3, 0))


def test_ordered_pairs_match_earlier():
    es = es_of(LSeq(BPar(SP, Sig(), At(1, Cpy())), Hsh()))
    evs = events_of(es)
    want = {(v, w) for v in evs for w in evs if earlier(es, v, w)}
    assert ordered_pairs(es) == want


def test_ill_formed_rejected():
    at, _ = annotate(Sig(), 0)
    with pytest.raises(ValueError):
        ev_sys(LSeq(at, at), 0)


def test_oracle_limit():
    t = LSeq(At(1, At(2, At(3, Sig()))), At(1, Sig()))
    assert len(traces_of(es_of(t))) == 1
    with pytest.raises(ValueError):
        traces_of(es_of(LSeq(t, Cpy())))


def test_is_trace_rejects_duplicates_and_missing():
    es = es_of(LSeq(Sig(), Hsh()))
    assert is_trace(es, [Sign(0, 0), Hash(1, 0)])
    assert not is_trace(es, [Sign(0, 0), Hash(1, 0), Hash(1, 0)])
    assert not is_trace(es, [Sign(0, 0)])
    assert not is_trace(es, [Hash(1, 0), Sign(0, 0)])
    assert not is_trace(es, [Sign(0, 0), Hash(1, 1)])


@given(small_phrases, st.integers(0, 2))
def test_count_matches_enumeration(t, p):
    es = es_of(t, p)
    if len(events_of(es)) <= 10:
        assert count_traces(es) == len(traces_of(es))


@given(small_phrases, st.randoms(use_true_random=False))
def test_is_trace_agrees_with_oracle(t, rnd):
    es = es_of(t)
    evs = sorted(events_of(es), key=lambda v: v.id)
    if len(evs) > 8:
        return
    members = traces_of(es)
    for perm in itertools.islice(itertools.permutations(evs), 200):
        assert is_trace(es, perm) == (perm in members)
    shuffled = list(evs)
    rnd.shuffle(shuffled)
    assert is_trace(es, shuffled) == (tuple(shuffled) in members)


@given(small_phrases)
def test_every_oracle_trace_respects_pairs(t):
    es = es_of(t)
    if len(events_of(es)) > 8:
        return
    pairs = ordered_pairs(es)
    for tr in traces_of(es):
        pos = {v: i for i, v in enumerate(tr)}
        assert all(pos[v] < pos[w] for v, w in pairs)


def test_big_system_is_trace_polynomial():
    t = Sig()
    for _ in range(6):
        t = BPar(SP, t, LSeq(Cpy(), t))
    es = es_of(t)
    # n_k = 2 n_(k-1) + 3 events, n_0 = 1
    assert len(events_of(es)) == 253
    # the sorted-by-id order is always a linearization
    ordered = sorted(events_of(es), key=lambda v: v.id)
    assert is_trace(es, ordered)
    assert not is_trace(es, ordered[1:] + ordered[:1])
    assert count_traces(es) > 10**6
