import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copland.core import (
    ABPar,
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
    places,
    size,
)
from copland.cvm import (
    CvmError,
    CvmErrorKind,
    CvmState,
    DoPrim,
    DoRemote,
    PlaceEntry,
    PlaceRegistry,
    ReceiveResp,
    RunBranchPar,
    RunBranchSeq,
    SendReq,
    SplitEv,
    StoreOverlapError,
    branch_seed,
    check_store_slots,
    compile,
    interleave,
    run_cvm,
)
from copland.events import Copy, Hash, Join, Meas, Req, Rpy, Sign, Split, ev_sys, is_trace
from copland.evidence import PP, SS, AbstractProvider, Mt, N, evaluate
from strategies import phrases

ABS = AbstractProvider()
REG = PlaceRegistry.uniform(range(4), ABS)
SP = SplitSpec(Sp.ALL, Sp.NONE)


def run(t, p=0, e=Mt(), seed=0, registry=REG, threads=False):
    at, _ = annotate(t, 0)
    return run_cvm(compile(at), CvmState(e, [], p, {}), registry, seed, threads)


def test_compile_at():
    at, _ = annotate(At(1, Sig()), 0)
    body = APrim(Range(1, 2), Sig())
    assert compile(at) == (SendReq(body, 1, 0), DoRemote(body, 1, 0, 2), ReceiveResp(2, 1))


def test_compile_bseq_and_bpar_slots():
    at, _ = annotate(BSeq(SP, Sig(), Hsh()), 0)
    assert compile(at) == (
        SplitEv(0, SP, (1, 2)),
        RunBranchSeq((DoPrim(1, Sig()),), (DoPrim(2, Hsh()),), (1, 2), 3),
    )
    at, _ = annotate(BPar(SP, LSeq(Cpy(), Sig()), Hsh()), 0)
    # left branch 1..2, right branch 3; outputs at each branch's last id
    assert compile(at) == (
        SplitEv(0, SP, (1, 3)),
        RunBranchPar((DoPrim(1, Cpy()), DoPrim(2, Sig())), (DoPrim(3, Hsh()),), (1, 2, 3, 3), 4),
    )


def test_compile_rejects_ill_formed():
    with pytest.raises(ValueError):
        compile(APrim(Range(0, 2), Sig()))


def test_remote_run_trace_and_store():
    out = run(At(2, LSeq(Asp(0, (), 2, 1), Sig())), p=0)
    assert out.trace == [Req(0, 0, 2, LSeq(Asp(0, (), 2, 1), Sig())), Meas(1, 2, 0, (), 2, 1), Sign(2, 2), Rpy(3, 0, 2)]
    assert out.pl == 0
    assert set(out.store) == {0, 3}
    assert out.store[3] == out.ev


def test_bseq_run():
    e = N(0, b"n", Mt())
    out = run(BSeq(SP, Cpy(), Hsh()), e=e)
    assert out.ev == SS(e, evaluate(Hsh(), 0, Mt(), ABS, start=2))
    assert out.trace == [Split(0, 0), Copy(1, 0), Hash(2, 0), Join(3, 0)]


def test_bpar_seed_zero_concatenates():
    out = run(BPar(SP, Sig(), Hsh()))
    assert out.trace == [Split(0, 0), Sign(1, 0), Hash(2, 0), Join(3, 0)]
    assert isinstance(out.ev, PP)


def test_bpar_schedules_differ():
    t = BPar(SP, LSeq(Cpy(), LSeq(Cpy(), Cpy())), LSeq(Sig(), LSeq(Sig(), Sig())))
    traces = {tuple(run(t, seed=s).trace) for s in range(1, 30)}
    assert len(traces) > 3
    es = ev_sys(annotate(t, 0)[0], 0)
    assert all(is_trace(es, tr) for tr in traces)
    assert len({run(t, seed=s).ev for s in range(1, 30)}) == 1


def test_input_state_untouched():
    st = CvmState(Mt(), [Copy(99, 0)], 0, {})
    at, _ = annotate(At(1, Sig()), 0)
    out = run_cvm(compile(at), st, REG)
    assert st.trace == [Copy(99, 0)] and st.store == {}
    assert out.trace[0] == Copy(99, 0)


def test_unknown_place():
    with pytest.raises(CvmError) as info:
        run(At(7, Sig()))
    assert info.value.kind is CvmErrorKind.UNKNOWN_PLACE
    with pytest.raises(CvmError):
        run(Sig(), p=9)


def test_store_miss():
    reg = REG
    prog = (ReceiveResp(5, 1),)
    with pytest.raises(CvmError) as info:
        run_cvm(prog, CvmState(Mt(), [], 0, {}), reg)
    assert info.value.kind is CvmErrorKind.STORE_MISS


def test_provider_failure_for_unoffered_asp():
    reg = PlaceRegistry({0: PlaceEntry(ABS, frozenset({1}))})
    assert run(Asp(1, (), 0, 0), registry=reg).ev.asp_id == 1
    with pytest.raises(CvmError) as info:
        run(Asp(2, (), 0, 0), registry=reg)
    assert info.value.kind is CvmErrorKind.PROVIDER_FAILURE


def test_provider_exception_wrapped():
    class Broken(AbstractProvider):
        def sign(self, place, data):
            raise RuntimeError("hsm offline")

    with pytest.raises(CvmError, match="hsm offline") as info:
        run(Sig(), registry=PlaceRegistry.uniform([0], Broken()))
    assert info.value.kind is CvmErrorKind.PROVIDER_FAILURE


def test_overlapping_store_slots_detected():
    check_store_slots((1, 2, 3, 4))
    with pytest.raises(StoreOverlapError):
        check_store_slots((1, 2, 2, 3))
    # hand-built annotation whose branches share an id
    bad = ABPar(Range(0, 3), SP, APrim(Range(1, 2), Sig()), APrim(Range(1, 2), Hsh()))
    with pytest.raises(StoreOverlapError):
        run_cvm(compile(bad, check=False), CvmState(Mt(), [], 0, {}), REG)
    assert issubclass(StoreOverlapError, AssertionError)


def test_interleave():
    a = [Copy(0, 0), Copy(1, 0)]
    b = [Sign(2, 0), Sign(3, 0)]
    assert interleave(a, b, 0) == a + b
    merged = interleave(a, b, 12345)
    assert [v for v in merged if v in a] == a and [v for v in merged if v in b] == b
    assert interleave(a, b, 12345) == merged
    with pytest.raises(ValueError):
        interleave(a, [Copy(1, 0)], 3)


def test_branch_seed():
    assert branch_seed(0, 5) == 0
    assert branch_seed(3, 5) == branch_seed(3, 5) != branch_seed(3, 6)


@settings(max_examples=200)
@given(phrases, st.integers(0, 3), st.integers(0, 2**32))
def test_cvm_agrees_with_semantics(t, p, seed):
    out = run(t, p, seed=seed)
    at, _ = annotate(t, 0)
    assert is_trace(ev_sys(at, p), out.trace)
    assert out.ev == evaluate(t, p, Mt(), ABS)
    assert out.pl == p
    assert len(out.trace) == size(t)


@settings(max_examples=50)
@given(phrases, st.integers(1, 2**32))
def test_threads_match_sequential(t, seed):
    assert run(t, seed=seed, threads=True) == run(t, seed=seed)


def test_places_helper_matches_registry_need():
    t = At(1, BPar(SP, At(2, Sig()), At(3, Hsh())))
    assert places(t) == {1, 2, 3}
    assert run(t).pl == 0
