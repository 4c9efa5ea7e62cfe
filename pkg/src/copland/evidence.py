"""Concrete evidence and its denotational semantics over pluggable providers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Mapping, Protocol, Sequence, Union, runtime_checkable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .core import (
    AAt,
    ABPar,
    ABSeq,
    ALSeq,
    APrim,
    AnnoPhrase,
    Asp,
    Cpy,
    Hsh,
    Phrase,
    Place,
    Sig,
    Sp,
    SplitSpec,
    annotate,
)

Bits = bytes


@dataclass(frozen=True)
class Mt:
    pass


@dataclass(frozen=True)
class U:
    """Measurement result of an ASP run at ``place``, wrapping earlier evidence."""

    asp_id: int
    args: tuple[str, ...]
    place: Place
    bits: Bits
    sub: Evidence

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class G:
    bits: Bits
    sub: Evidence


@dataclass(frozen=True)
class H:
    bits: Bits


@dataclass(frozen=True)
class N:
    nonce_id: int
    bits: Bits
    sub: Evidence


@dataclass(frozen=True)
class SS:
    left: Evidence
    right: Evidence


@dataclass(frozen=True)
class PP:
    left: Evidence
    right: Evidence


Evidence = Union[Mt, U, G, H, N, SS, PP]


def canonical_bytes(e: Evidence) -> bytes:
    from .text.codec import encode

    return encode(e)


# --- providers -----------------------------------------------------------


@runtime_checkable
class Provider(Protocol):
    def measure(
        self,
        asp_id: int,
        args: Sequence[str],
        place: Place,
        target: int,
        event_id: int,
        ev: Evidence,
    ) -> Bits: ...

    def sign(self, place: Place, data: bytes) -> Bits: ...

    def hash(self, data: bytes) -> Bits: ...

    def verify(self, place: Place, data: bytes, sig: Bits) -> bool: ...


def _u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


class AbstractProvider:
    """Deterministic provider mirroring the proof model.

    A measurement is the 8-byte big-endian event id, which is unique per
    protocol run. A signature is ``b"SIG" || place || digest(data)``.
    """

    mode = "abstract"

    def __init__(self, digest: str = "sha256"):
        hashlib.new(digest)
        self.digest = digest

    def measure(self, asp_id, args, place, target, event_id, ev):
        return _u64(event_id)

    def hash(self, data):
        return hashlib.new(self.digest, data).digest()

    def sign(self, place, data):
        return b"SIG" + _u64(place) + self.hash(data)

    def verify(self, place, data, sig):
        return sig == self.sign(place, data)

    def __repr__(self):
        return f"AbstractProvider({self.digest!r})"


def _ed25519_key(seed: bytes) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(hashlib.sha256(seed).digest())


class RealProvider:
    """Ed25519 signatures and real digests over simulated target state.

    ``keys`` maps a place to its key seed. ``state`` maps ``(host, target)``
    to the bytes an ASP would observe there; a changed entry simulates a
    compromised component and changes the measurement.
    """

    mode = "real"

    def __init__(
        self,
        keys: Mapping[Place, bytes],
        state: Mapping[tuple[Place, int], bytes] | None = None,
        digest: str = "sha256",
    ):
        hashlib.new(digest)
        self.digest = digest
        self.state = dict(state or {})
        self._priv = {p: _ed25519_key(seed) for p, seed in keys.items()}

    def public_keys(self) -> dict[Place, bytes]:
        return {
            p: k.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
            for p, k in self._priv.items()
        }

    def measure(self, asp_id, args, place, target, event_id, ev):
        observed = self.state.get((place, target), b"")
        blob = json.dumps([asp_id, list(args), place, target, observed.hex()])
        return self.hash(blob.encode())

    def hash(self, data):
        return hashlib.new(self.digest, data).digest()

    def sign(self, place, data):
        try:
            key = self._priv[place]
        except KeyError:
            raise KeyError(f"no signing key for place {place}") from None
        return key.sign(data)

    def verify(self, place, data, sig):
        return PublicKeyVerifier(self.public_keys()).verify(place, data, sig)


class PublicKeyVerifier:
    """Appraiser-side signature check holding only public keys."""

    def __init__(self, keys: Mapping[Place, bytes]):
        self.keys = dict(keys)

    def verify(self, place: Place, data: bytes, sig: Bits) -> bool:
        raw = self.keys.get(place)
        if raw is None:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(raw).verify(sig, data)
        except (InvalidSignature, ValueError):
            return False
        return True


# --- evidence semantics --------------------------------------------------


def split_evidence(s: SplitSpec, e: Evidence) -> tuple[Evidence, Evidence]:
    def pick(sp):
        return e if sp is Sp.ALL else Mt()

    return pick(s.left), pick(s.right)


def shape_of(e: Evidence) -> Evidence:
    """Erase every bit string; the constructor skeleton stays."""
    match e:
        case Mt():
            return e
        case U():
            return replace(e, bits=b"", sub=shape_of(e.sub))
        case G(_, sub):
            return G(b"", shape_of(sub))
        case H(_):
            return H(b"")
        case N(n, _, sub):
            return N(n, b"", shape_of(sub))
        case SS(l, r):
            return SS(shape_of(l), shape_of(r))
        case PP(l, r):
            return PP(shape_of(l), shape_of(r))
    raise TypeError(f"not evidence: {e!r}")


def provider_for(providers, place: Place) -> Provider:
    """Resolve a provider: a single provider serves every place."""
    if isinstance(providers, Provider):
        return providers
    if hasattr(providers, "provider"):
        return providers.provider(place)
    return providers[place]


def apply_prim(
    prim: Phrase, event_id: int, place: Place, e: Evidence, prov: Provider
) -> Evidence:
    """Evidence produced by one primitive at ``place`` on input ``e``."""
    match prim:
        case Cpy():
            return e
        case Asp(asp_id, args, host, target):
            bits = prov.measure(asp_id, args, host, target, event_id, e)
            return U(asp_id, args, place, bits, e)
        case Sig():
            return G(prov.sign(place, canonical_bytes(e)), e)
        case Hsh():
            return H(prov.hash(canonical_bytes(e)))
    raise TypeError(f"not a primitive: {prim!r}")


def evaluate(t: Phrase, p: Place, e: Evidence, providers, start: int = 0) -> Evidence:
    """Denotational evidence semantics of ``t`` run at ``p`` on input ``e``.

    Event ids handed to measurements follow :func:`annotate` from ``start``,
    so with deterministic providers this equals the CVM's final evidence.
    """
    at, _ = annotate(t, start)
    return evaluate_anno(at, p, e, providers)


def evaluate_anno(at: AnnoPhrase, p: Place, e: Evidence, providers) -> Evidence:
    match at:
        case APrim(rng, prim):
            return apply_prim(prim, rng.lo, p, e, provider_for(providers, p))
        case AAt(_, q, body):
            return evaluate_anno(body, q, e, providers)
        case ALSeq(_, l, r):
            return evaluate_anno(r, p, evaluate_anno(l, p, e, providers), providers)
        case ABSeq(_, sp, l, r) | ABPar(_, sp, l, r):
            e1, e2 = split_evidence(sp, e)
            out = (evaluate_anno(l, p, e1, providers), evaluate_anno(r, p, e2, providers))
            return SS(*out) if isinstance(at, ABSeq) else PP(*out)
    raise TypeError(f"not an annotated phrase: {at!r}")
