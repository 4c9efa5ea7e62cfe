"""Hypothesis strategies shared across the test modules."""

from hypothesis import strategies as st

from copland.core import Asp, At, BPar, BSeq, Cpy, Hsh, LSeq, Sig, Sp, SplitSpec
from copland.events import Copy, Hash, Join, Meas, Req, Rpy, Sign, Split
from copland.evidence import PP, SS, G, H, Mt, N, U

places = st.integers(0, 3)
splits = st.builds(SplitSpec, st.sampled_from(Sp), st.sampled_from(Sp))
args = st.lists(st.text(max_size=6), max_size=3).map(tuple)
bits = st.binary(max_size=12)

asps = st.builds(Asp, st.integers(0, 5), args, places, st.integers(0, 5))
prims = st.one_of(asps, st.just(Cpy()), st.just(Sig()), st.just(Hsh()))


def _extend(inner):
    return st.one_of(
        st.builds(At, places, inner),
        st.builds(LSeq, inner, inner),
        st.builds(BSeq, splits, inner, inner),
        st.builds(BPar, splits, inner, inner),
    )


phrases = st.recursive(prims, _extend, max_leaves=8)
small_phrases = st.recursive(prims, _extend, max_leaves=3)

evidence = st.recursive(
    st.just(Mt()) | st.builds(H, bits),
    lambda inner: st.one_of(
        st.builds(U, st.integers(0, 5), args, places, bits, inner),
        st.builds(G, bits, inner),
        st.builds(N, st.integers(0, 5), bits, inner),
        st.builds(SS, inner, inner),
        st.builds(PP, inner, inner),
    ),
    max_leaves=6,
)

ids = st.integers(0, 50)
events = st.one_of(
    st.builds(Copy, ids, places),
    st.builds(Meas, ids, places, st.integers(0, 5), args, places, st.integers(0, 5)),
    st.builds(Sign, ids, places),
    st.builds(Hash, ids, places),
    st.builds(Split, ids, places),
    st.builds(Join, ids, places),
    st.builds(Req, ids, places, places, small_phrases),
    st.builds(Rpy, ids, places, places),
)
