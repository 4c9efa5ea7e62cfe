"""Executable Copland, from phrase syntax through the CVM to appraisal."""

from . import am, config, conformance, core, cvm, events, evidence, scenario, text
from .am import AmConfig, AmState, appraise, gen_nonce, run_avm
from .core import Asp, At, BPar, BSeq, Cpy, Hsh, LSeq, Sig, Sp, SplitSpec, annotate, well_formed
from .cvm import CvmError, CvmState, PlaceRegistry, compile, run_cvm
from .events import ev_sys, is_trace, traces_of
from .evidence import AbstractProvider, RealProvider, evaluate
from .text import ParseError, decode, encode, parse_phrase, print_phrase

__all__ = [
    "AbstractProvider", "AmConfig", "AmState", "Asp", "At", "BPar", "BSeq", "Cpy", "CvmError",
    "CvmState", "Hsh", "LSeq", "ParseError", "PlaceRegistry", "RealProvider", "Sig", "Sp",
    "SplitSpec", "am", "annotate", "appraise", "compile", "config", "conformance", "core", "cvm",
    "decode", "encode", "ev_sys", "evaluate", "events", "evidence", "gen_nonce", "is_trace",
    "parse_phrase", "print_phrase", "run_avm", "run_cvm", "scenario", "text", "traces_of",
    "well_formed",
]
