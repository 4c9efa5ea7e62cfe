"""The virus-checker scenario, from a bare request up to layered attestation.

Places: the appraiser's AM runs at 0, the target platform ``p`` at 1, the
signature server ``q`` at 2 and the isolated measurement domain ``ma`` at 3.
ASPs: ``vc`` checks for viruses, ``h`` hashes the checker's environment,
``m`` measures the signature server.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .am import AmConfig, AmState, AppraisalResult, appraise, gen_nonce, nonce_evidence, record_golden, run_avm
from .config import Config, default_config
from .core import Phrase
from .events import Trace
from .evidence import G, N, U, Evidence
from .text import SymbolTable, parse_phrase

AM, P, Q, MA = 0, 1, 2, 3
# measurement targets: applications on p, the checker's infrastructure, the signature service
T_APPS, T_VC_INFRA, T_SIGSERVER = 1, 2, 3

PHRASES = {
    "bare": '@1[vc(1, 1, "--full")]',
    "signed": '@1[vc(1, 1, "--full") -> SIG]',
    "environment": '@1[@3[h(1, 2, "/bin/vc", "/var/vc/sigs") -> SIG] -> vc(1, 1, "--full") -> SIG]',
    "layered": (
        '@1[@2[m(2, 3, "sigsrv") -> SIG]'
        ' -> @3[h(1, 2, "/bin/vc", "/var/vc/sigs") -> SIG]'
        ' -> vc(1, 1, "--full") -> SIG]'
    ),
}

# evidence paths in the layered result, from the outside in
PATH_SIG_P = "$"
PATH_VC = "$.sub"
PATH_SIG_MA = "$.sub.sub"
PATH_H = "$.sub.sub.sub"
PATH_SIG_Q = "$.sub.sub.sub.sub"
PATH_M = "$.sub.sub.sub.sub.sub"
PATH_NONCE = "$.sub.sub.sub.sub.sub.sub"


def symbols() -> SymbolTable:
    return default_config().symbols()


def phrase(name: str = "layered") -> Phrase:
    return parse_phrase(PHRASES[name], symbols())


@dataclass(frozen=True)
class TamperCase:
    name: str
    path: str
    check: str
    evidence: Evidence
    result: AppraisalResult

    @property
    def caught(self) -> bool:
        return not self.result.passed and any(
            f.path == self.path and f.check == self.check for f in self.result.failures()
        )


@dataclass(frozen=True)
class ScenarioRun:
    phrase: Phrase
    state: AmState
    evidence: Evidence
    trace: Trace
    golden: dict
    result: AppraisalResult
    tampered: tuple[TamperCase, ...]


def _flip(b: bytes, i: int = 0) -> bytes:
    return b[:i] + bytes([b[i] ^ 0x01]) + b[i + 1 :]


def _at(e: Evidence, path: str) -> Evidence:
    for _ in range(path.count(".sub")):
        e = e.sub
    return e


def _put_down(e: Evidence, depth: int, new: Evidence) -> Evidence:
    if depth == 0:
        return new
    return replace(e, sub=_put_down(e.sub, depth - 1, new))


def tamper_cases(t: Phrase, e: Evidence, cfg: AmConfig, st: AmState) -> tuple[TamperCase, ...]:
    """Three tampered copies of the layered evidence, each appraised."""
    sig = _at(e, PATH_SIG_P)
    nonce = _at(e, PATH_NONCE)
    vc = _at(e, PATH_VC)
    assert isinstance(sig, G) and isinstance(nonce, N) and isinstance(vc, U)
    cases = [
        ("flipped signature byte", PATH_SIG_P, "signature", _put_down(e, 0, replace(sig, bits=_flip(sig.bits)))),
        ("wrong nonce id", PATH_NONCE, "nonce",
         _put_down(e, PATH_NONCE.count(".sub"), replace(nonce, nonce_id=nonce.nonce_id + 1))),
        ("altered measurement", PATH_VC, "golden",
         _put_down(e, PATH_VC.count(".sub"), replace(vc, bits=_flip(vc.bits, len(vc.bits) - 1)))),
    ]
    return tuple(
        TamperCase(name, path, check, bad, appraise(t, cfg.place, bad, cfg, st)) for name, path, check, bad in cases
    )


def run_scenario(config: Config | None = None, seed: int = 0, name: str = "layered") -> ScenarioRun:
    """Reference run for golden values, fresh-nonce run, appraisal, tamper cases."""
    config = config or default_config()
    t = parse_phrase(PHRASES[name], config.symbols())
    rng = random.Random(seed)
    cfg = config.am_config()

    # trusted reference run records golden measurements
    ref_nid, _, ref_st = gen_nonce(AmState(), rng)
    ref_ev, _ = run_avm(t, nonce_evidence(ref_st, ref_nid), cfg, ref_st, seed)
    golden = record_golden(t, cfg.place, ref_ev)
    cfg = AmConfig(cfg.registry, cfg.verifier, {**cfg.golden, **golden}, cfg.place)

    nid, _, st = gen_nonce(ref_st, rng)
    ev, trace = run_avm(t, nonce_evidence(st, nid), cfg, st, seed)
    result = appraise(t, cfg.place, ev, cfg, st)
    tampered = tamper_cases(t, ev, cfg, st) if name == "layered" else ()
    return ScenarioRun(t, st, ev, trace, golden, result, tampered)
