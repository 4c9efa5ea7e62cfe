"""Place registry and appraisal configuration files."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .am import AmConfig
from .core import Place
from .cvm import PlaceEntry, PlaceRegistry
from .evidence import AbstractProvider, PublicKeyVerifier, RealProvider
from .text import SymbolTable, decode, encode
from .text.codec import BITS, NAT, STR, STRS, Nodes, register

PROVIDER_MODES = ("abstract", "real")


@dataclass(frozen=True)
class AspName:
    name: str
    asp_id: int


@dataclass(frozen=True)
class PlaceSpec:
    """One attestation place. ``offers`` lists ASP names it hosts; empty means any."""

    place: int
    provider: str = "abstract"
    key_seed: str = ""
    offers: tuple[str, ...] = ()

    def __post_init__(self):
        if self.provider not in PROVIDER_MODES:
            raise ValueError(f"unknown provider mode {self.provider!r}")
        object.__setattr__(self, "offers", tuple(self.offers))


@dataclass(frozen=True)
class GoldenEntry:
    asp_id: int
    place: int
    target: int
    bits: bytes


@dataclass(frozen=True)
class Observation:
    """What ASPs on ``place`` see when measuring ``target`` (real providers only)."""

    place: int
    target: int
    content: bytes


@dataclass(frozen=True)
class Config:
    places: tuple[PlaceSpec, ...]
    asps: tuple[AspName, ...] = ()
    golden: tuple[GoldenEntry, ...] = ()
    observations: tuple[Observation, ...] = ()
    digest: str = "sha256"
    am_place: int = 0

    def symbols(self) -> SymbolTable:
        return SymbolTable({a.name: a.asp_id for a in self.asps})

    def golden_table(self) -> dict[tuple, bytes]:
        return {(g.asp_id, g.place, g.target): g.bits for g in self.golden}

    def with_golden(self, table: dict[tuple, bytes]) -> Config:
        entries = tuple(GoldenEntry(*k, v) for k, v in sorted(table.items()))
        return Config(self.places, self.asps, entries, self.observations, self.digest, self.am_place)

    def with_mode(self, mode: str) -> Config:
        places = tuple(PlaceSpec(p.place, mode, p.key_seed, p.offers) for p in self.places)
        return Config(places, self.asps, self.golden, self.observations, self.digest, self.am_place)

    def registry(self) -> PlaceRegistry:
        symbols = self.symbols()
        state = {(o.place, o.target): o.content for o in self.observations}
        entries = {}
        for spec in self.places:
            if spec.provider == "real":
                prov = RealProvider({spec.place: spec.key_seed.encode()}, state, self.digest)
            else:
                prov = AbstractProvider(self.digest)
            offers = frozenset(symbols.intern(n) for n in spec.offers) if spec.offers else None
            entries[spec.place] = PlaceEntry(prov, offers)
        return PlaceRegistry(entries)

    def verifier(self) -> PlaceVerifier:
        """Signature checker for the appraiser: public keys only for real places."""
        by_place = {}
        for spec in self.places:
            if spec.provider == "real":
                keys = RealProvider({spec.place: spec.key_seed.encode()}).public_keys()
                by_place[spec.place] = PublicKeyVerifier(keys)
            else:
                by_place[spec.place] = AbstractProvider(self.digest)
        return PlaceVerifier(by_place)

    def am_config(self) -> AmConfig:
        return AmConfig(self.registry(), self.verifier(), self.golden_table(), self.am_place)


@dataclass
class PlaceVerifier:
    by_place: dict[Place, object] = field(default_factory=dict)

    def verify(self, place: Place, data: bytes, sig: bytes) -> bool:
        v = self.by_place.get(place)
        return v is not None and v.verify(place, data, sig)


DEMO_ASPS = (AspName("vc", 0), AspName("h", 1), AspName("m", 2))


def default_config(places: int = 4, provider: str = "abstract") -> Config:
    """Zero-configuration setup: places ``0..places-1``, any ASP anywhere."""
    specs = tuple(PlaceSpec(p, provider, f"place-{p}-key") for p in range(places))
    return Config(specs, DEMO_ASPS)


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return default_config()
    return decode(Path(path).read_bytes(), "config")


def save(value, path: str | Path) -> None:
    Path(path).write_bytes(encode(value) + b"\n")


def _validate(cfg: Config) -> None:
    hashlib.new(cfg.digest)
    ids = [p.place for p in cfg.places]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate place")
    if cfg.am_place not in ids:
        raise ValueError("the AM's own place must be registered")
    cfg.symbols()


register(AspName, "ASPNAME", "aspname", name=STR, asp_id=NAT)
register(PlaceSpec, "PLACE", "place", place=NAT, provider=STR, key_seed=STR, offers=STRS)
register(GoldenEntry, "GOLDEN", "golden", asp_id=NAT, place=NAT, target=NAT, bits=BITS)
register(Observation, "OBSERVATION", "observation", place=NAT, target=NAT, content=BITS)
register(
    Config, "CONFIG", "config", validate=_validate,
    places=Nodes("place"), asps=Nodes("aspname"), golden=Nodes("golden"),
    observations=Nodes("observation"), digest=STR, am_place=NAT,
)
