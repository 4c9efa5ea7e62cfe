"""Attestation Manager: runs phrases under fresh nonces and appraises the evidence."""

from __future__ import annotations

import random
import secrets
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .core import Asp, At, BPar, BSeq, Cpy, Hsh, LSeq, Phrase, Place, Sig, Sp, annotate
from .cvm import CvmState, PlaceRegistry, compile, run_cvm
from .events import Trace
from .evidence import PP, SS, Bits, Evidence, G, H, Mt, N, U, canonical_bytes, shape_of
from .text.codec import BITS, BOOL, NAT, STR, NatMap, Nodes, register

NONCE_BYTES = 16

GoldenKey = tuple  # (asp_id, asp place, target)


@dataclass(frozen=True)
class AmState:
    """``nonce_id`` is the next nonce id; ``nonces`` remembers every nonce issued."""

    nonce_id: int = 0
    nonces: Mapping[int, Bits] = field(default_factory=dict)

    def __post_init__(self):
        expected = max(self.nonces) + 1 if self.nonces else 0
        if self.nonce_id < expected:
            raise ValueError("nonce_id must exceed every issued nonce id")


def gen_nonce(st: AmState, rng: random.Random | None = None) -> tuple[int, Bits, AmState]:
    bits = rng.randbytes(NONCE_BYTES) if rng is not None else secrets.token_bytes(NONCE_BYTES)
    nid = st.nonce_id
    return nid, bits, AmState(nid + 1, {**st.nonces, nid: bits})


def nonce_evidence(st: AmState, nonce_id: int, sub: Evidence = Mt()) -> Evidence:
    return N(nonce_id, st.nonces[nonce_id], sub)


@dataclass(frozen=True)
class AmConfig:
    """Read-only appraisal and execution configuration.

    ``verifier`` checks signatures (``verify(place, data, sig)``); ``golden``
    maps ``(asp_id, place, target)`` of an ASP to its expected measurement.
    """

    registry: PlaceRegistry
    verifier: object
    golden: Mapping[GoldenKey, Bits] = field(default_factory=dict)
    place: Place = 0


def run_avm(
    t: Phrase,
    init: Evidence,
    cfg: AmConfig,
    st: AmState | None = None,
    seed: int = 0,
) -> tuple[Evidence, Trace]:
    """Run ``t`` on the CVM at the AM's own place with initial evidence ``init``."""
    at, _ = annotate(t, 0)
    out = run_cvm(compile(at), CvmState(init, [], cfg.place, {}), cfg.registry, seed)
    return out.ev, tuple(out.trace)


# --- appraisal -----------------------------------------------------------
# The expected evidence shape is computed symbolically from the phrase;
# ``_Init`` marks where the caller's initial evidence ends up.


@dataclass(frozen=True)
class _Init:
    pass


@dataclass(frozen=True)
class _TMt:
    pass


@dataclass(frozen=True)
class _TU:
    asp: Asp
    place: Place
    sub: object


@dataclass(frozen=True)
class _TG:
    place: Place
    sub: object


@dataclass(frozen=True)
class _TH:
    pass


@dataclass(frozen=True)
class _TPair:
    cls: type
    left: object
    right: object


_Template = Union[_Init, _TMt, _TU, _TG, _TH, _TPair]


def expected_shape(t: Phrase, p: Place, inner: _Template = _Init()) -> _Template:
    match t:
        case Cpy():
            return inner
        case Asp():
            return _TU(t, p, inner)
        case Sig():
            return _TG(p, inner)
        case Hsh():
            return _TH()
        case At(q, body):
            return expected_shape(body, q, inner)
        case LSeq(l, r):
            return expected_shape(r, p, expected_shape(l, p, inner))
        case BSeq(sp, l, r) | BPar(sp, l, r):
            def side(s):
                return inner if s is Sp.ALL else _TMt()

            cls = SS if isinstance(t, BSeq) else PP
            return _TPair(cls, expected_shape(l, p, side(sp.left)), expected_shape(r, p, side(sp.right)))
    raise TypeError(f"not a phrase: {t!r}")


@dataclass(frozen=True)
class Finding:
    path: str
    check: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class AppraisalResult:
    verdict: str
    findings: tuple[Finding, ...]

    @classmethod
    def of(cls, findings: Sequence[Finding]) -> AppraisalResult:
        findings = tuple(findings)
        return cls("PASS" if all(f.ok for f in findings) else "FAIL", findings)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def failures(self) -> list[Finding]:
        return [f for f in self.findings if not f.ok]

    def render(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for f in self.findings:
            mark = "ok  " if f.ok else "FAIL"
            detail = f"  ({f.detail})" if f.detail else ""
            lines.append(f"  {mark} {f.check:<17} {f.path}{detail}")
        return "\n".join(lines)


def _check_result(r: AppraisalResult) -> None:
    if r.verdict != ("PASS" if all(f.ok for f in r.findings) else "FAIL"):
        raise ValueError("verdict disagrees with findings")


class _Appraiser:
    def __init__(self, cfg: AmConfig, st: AmState, init_shape: Evidence | None):
        self.cfg = cfg
        self.st = st
        self.init_shape = init_shape
        self.findings: list[Finding] = []

    def note(self, path, check, ok, detail=""):
        self.findings.append(Finding(path, check, ok, detail))

    def mismatch(self, path, want, e):
        self.note(path, "shape", False, f"expected {want}, found {type(e).__name__}")

    def walk(self, tmpl: _Template, e: Evidence, path: str) -> None:
        match tmpl:
            case _Init():
                self.initial(e, path)
            case _TMt():
                if not isinstance(e, Mt):
                    self.mismatch(path, "Mt", e)
            case _TU(asp, place, sub):
                if not isinstance(e, U):
                    return self.mismatch(path, "U", e)
                if (e.asp_id, e.args, e.place) != (asp.asp_id, asp.args, place):
                    return self.note(
                        path, "shape", False,
                        f"expected U({asp.asp_id}, {list(asp.args)}, {place}), "
                        f"found U({e.asp_id}, {list(e.args)}, {e.place})",
                    )
                key = (asp.asp_id, asp.place, asp.target)
                if key in self.cfg.golden:
                    ok = self.cfg.golden[key] == e.bits
                    self.note(path, "golden", ok, "" if ok else f"measurement differs for {key}")
                self.walk(sub, e.sub, path + ".sub")
            case _TG(place, sub):
                if not isinstance(e, G):
                    return self.mismatch(path, "G", e)
                ok = bool(self.cfg.verifier.verify(place, canonical_bytes(e.sub), e.bits))
                self.note(path, "signature", ok, f"signer place {place}")
                self.walk(sub, e.sub, path + ".sub")
            case _TH():
                if not isinstance(e, H):
                    return self.mismatch(path, "H", e)
                self.note(path, "unverifiable-hash", True, "pre-image discarded")
            case _TPair(cls, left, right):
                if not isinstance(e, cls):
                    return self.mismatch(path, cls.__name__, e)
                self.walk(left, e.left, path + ".left")
                self.walk(right, e.right, path + ".right")

    def initial(self, e: Evidence, path: str) -> None:
        if self.init_shape is not None and shape_of(e) != shape_of(self.init_shape):
            return self.note(path, "shape", False, "initial evidence has unexpected shape")
        self.nonces(e, path)

    def nonces(self, e: Evidence, path: str) -> None:
        match e:
            case N(nid, bits, sub):
                known = self.st.nonces.get(nid)
                if known is None:
                    self.note(path, "nonce", False, f"nonce {nid} was never issued")
                else:
                    ok = known == bits
                    self.note(path, "nonce", ok, "" if ok else f"nonce {nid} value differs")
                self.nonces(sub, path + ".sub")
            case Mt():
                pass
            case U(sub=sub) | G(sub=sub) if self.init_shape is not None:
                self.nonces(sub, path + ".sub")
            case SS(l, r) | PP(l, r) if self.init_shape is not None:
                self.nonces(l, path + ".left")
                self.nonces(r, path + ".right")
            case H() if self.init_shape is not None:
                pass
            case _:
                self.mismatch(path, "nonce or Mt", e)


def appraise(
    t: Phrase,
    p: Place,
    e: Evidence,
    cfg: AmConfig,
    st: AmState,
    init_shape: Evidence | None = None,
) -> AppraisalResult:
    """Check evidence ``e`` returned by running ``t`` at ``p``.

    The evidence must match the shape the phrase dictates; every signature
    must verify over the canonical bytes of what it signs; every nonce must
    be one this AM issued; every measurement with a golden value must match
    it. Without ``init_shape`` the initial evidence may only hold nonces.
    """
    ap = _Appraiser(cfg, st, init_shape)
    ap.walk(expected_shape(t, p), e, "$")
    if not any(f.check == "shape" for f in ap.findings):
        ap.findings.insert(0, Finding("$", "shape", True))
    return AppraisalResult.of(ap.findings)


def record_golden(t: Phrase, p: Place, e: Evidence) -> dict[GoldenKey, Bits]:
    """Golden table from a trusted reference run of ``t`` at ``p`` that produced ``e``."""
    table: dict[GoldenKey, Bits] = {}

    def walk(tmpl, e):
        match tmpl:
            case _TU(asp, _, sub) if isinstance(e, U):
                key = (asp.asp_id, asp.place, asp.target)
                if table.setdefault(key, e.bits) != e.bits:
                    raise ValueError(f"ASP {key} measured differently within one run")
                walk(sub, e.sub)
            case _TG(_, sub) if isinstance(e, G):
                walk(sub, e.sub)
            case _TPair(cls, left, right) if isinstance(e, cls):
                walk(left, e.left)
                walk(right, e.right)
            case _TMt() | _TH() | _Init():
                pass
            case _:
                raise ValueError("evidence does not match the phrase")

    walk(expected_shape(t, p), e)
    return table


register(AmState, "AMSTATE", "amstate", nonce_id=NAT, nonces=NatMap(BITS))
register(Finding, "FINDING", "finding", path=STR, check=STR, ok=BOOL, detail=STR)
register(
    AppraisalResult, "APPRAISAL", "appraisal", validate=_check_result,
    verdict=STR, findings=Nodes("finding"),
)
