"""Newform descriptions and validated tables of prime-indexed coefficients."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .angles import normalized_t
from .elliptic import EllipticCurve, ec_ap
from .errors import BadReductionError, CapacityError, DeligneViolation, DomainError, FormatError
from .parallel import chunked, map_ordered
from .primes import is_prime, prime_array
from .tau import TAU_CAP, tau_table

log = logging.getLogger(__name__)

#: Fraction of vanishing a_f(p) above which a CM warning is attached.
CM_ZERO_FRACTION = 0.3
#: Default prime cap for elliptic-curve tables.
EC_CAP = 10**7


class Source(enum.Enum):
    TAU = 0
    ELLIPTIC = 1
    EXTERNAL = 2


def is_squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


@dataclass(frozen=True)
class NewformSpec:
    """Weight, level and coefficient source of a newform.

    Only ``weight``, ``level`` and ``source`` take part in equality; the
    curve, input path and label are descriptive.
    """

    weight: int
    level: int
    source: Source
    curve: EllipticCurve | None = field(default=None, compare=False)
    path: str | None = field(default=None, compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.weight < 2 or self.weight % 2:
            raise DomainError(f"weight must be even and >= 2, got {self.weight}")
        if self.level < 1:
            raise DomainError(f"level must be >= 1, got {self.level}")
        if self.source is Source.TAU and (self.weight, self.level) != (12, 1):
            raise DomainError("Ramanujan tau has weight 12 and level 1")
        if self.source is Source.ELLIPTIC and self.weight != 2:
            raise DomainError("elliptic-curve forms have weight 2")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.source is Source.TAU:
            return "tau"
        if self.source is Source.ELLIPTIC:
            if self.curve is None:
                return f"ec-q{self.level}"
            return "ec-q{}[{}]".format(self.level, ",".join(map(str, self.curve.coefficients)))
        return f"external-k{self.weight}-q{self.level}"

    @classmethod
    def ramanujan_tau(cls, label: str = "") -> NewformSpec:
        return cls(12, 1, Source.TAU, label=label)

    @classmethod
    def elliptic(cls, curve: EllipticCurve, level: int, label: str = "") -> NewformSpec:
        return cls(2, level, Source.ELLIPTIC, curve=curve, label=label)

    @classmethod
    def external(cls, path, weight: int, level: int, label: str = "") -> NewformSpec:
        return cls(weight, level, Source.EXTERNAL, path=str(path), label=label)

    @property
    def squarefree_level(self) -> bool:
        return is_squarefree(self.level)


@dataclass(frozen=True)
class CoefficientTable:
    """a_f(p) for every prime p <= max_prime not dividing the level.

    Construction validates ordering, completeness and the Deligne bound in
    exact integer arithmetic.
    """

    spec: NewformSpec
    max_prime: int
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((int(p), int(a)) for p, a in self.entries))
        k, q = self.spec.weight, self.spec.level
        prev = 1
        for p, a in self.entries:
            if p <= prev:
                raise DomainError(f"entries not strictly increasing at p={p}")
            if p > self.max_prime:
                raise DomainError(f"entry p={p} exceeds max_prime={self.max_prime}")
            if q % p == 0:
                raise DomainError(f"p={p} divides the level {q}; such primes are excluded")
            if a * a > 4 * p ** (k - 1):
                raise DeligneViolation(p, a, k)
            prev = p
        expected = [int(p) for p in prime_array(2, self.max_prime) if q % int(p)]
        have = [p for p, _ in self.entries]
        if have != expected:
            missing = sorted(set(expected) - set(have))
            extra = sorted(set(have) - set(expected))
            raise DomainError(f"table incomplete: missing primes {missing[:20]}, non-primes {extra[:20]}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def weight(self) -> int:
        return self.spec.weight

    @property
    def level(self) -> int:
        return self.spec.level

    @property
    def label(self) -> str:
        return self.spec.label

    @cached_property
    def primes(self) -> np.ndarray:
        return np.array([p for p, _ in self.entries], dtype=np.int64)

    @cached_property
    def coefficients(self) -> list[int]:
        return [a for _, a in self.entries]

    @cached_property
    def t(self) -> np.ndarray:
        k = self.weight
        return np.array([normalized_t(p, a, k) for p, a in self.entries], dtype=float)

    @cached_property
    def extremal(self) -> np.ndarray:
        """Boolean mask of |a| == isqrt(4 p^(k-1)), decided exactly."""
        k = self.weight
        return np.array([abs(a) == math.isqrt(4 * p ** (k - 1)) for p, a in self.entries], dtype=bool)

    @cached_property
    def warnings(self) -> tuple[str, ...]:
        out = []
        if not self.spec.squarefree_level:
            out.append(f"level {self.level} is not squarefree; the counting theorems assume squarefree level")
        if self.entries:
            zeros = sum(1 for _, a in self.entries if a == 0)
            frac = zeros / len(self.entries)
            if frac > CM_ZERO_FRACTION:
                out.append(f"{frac:.3f} of coefficients vanish; the form may have CM")
        return tuple(out)

    def index_range(self, lo_exclusive: int, hi_inclusive: int) -> tuple[int, int]:
        """Index bounds [i, j) of entries with lo_exclusive < p <= hi_inclusive."""
        i = int(np.searchsorted(self.primes, lo_exclusive, side="right"))
        j = int(np.searchsorted(self.primes, hi_inclusive, side="right"))
        return i, j

    def window(self, x: int) -> tuple[int, int]:
        """Index bounds of the dyadic window x < p <= 2x; the table must reach 2x."""
        if x < 2:
            raise DomainError(f"window base x must be >= 2, got {x}")
        if 2 * x > self.max_prime:
            raise CapacityError(f"window ({x}, {2 * x}] needs max_prime >= {2 * x}, table has {self.max_prime}")
        return self.index_range(x, 2 * x)

    def upto(self, X: int) -> tuple[int, int]:
        if X > self.max_prime:
            raise CapacityError(f"range p <= {X} needs max_prime >= {X}, table has {self.max_prime}")
        return self.index_range(1, X)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)


def _ec_chunk(args):
    curve, primes = args
    return [ec_ap(curve, p) for p in primes]


#: Primes per work unit for elliptic-curve tables.
EC_CHUNK = 4096


def build_table(spec: NewformSpec, max_prime: int, *, workers: int = 1, tau_cap: int = TAU_CAP,
                ec_cap: int = EC_CAP) -> CoefficientTable:
    """Compute or ingest a_f(p) for all primes p <= max_prime with p not dividing the level."""
    if max_prime < 2:
        raise DomainError(f"max_prime must be >= 2, got {max_prime}")
    primes = [int(p) for p in prime_array(2, max_prime) if spec.level % int(p)]
    if spec.source is Source.TAU:
        tau = tau_table(max_prime, cap=tau_cap, workers=workers)
        entries = [(p, tau[p]) for p in primes]
    elif spec.source is Source.ELLIPTIC:
        if spec.curve is None:
            raise DomainError("elliptic spec has no curve attached")
        if max_prime > ec_cap:
            raise CapacityError(f"max_prime={max_prime} exceeds elliptic-curve cap {ec_cap}")
        for p in primes:
            if not spec.curve.has_good_reduction(p):
                raise BadReductionError(p, spec.curve.discriminant)
        jobs = [(spec.curve, chunk) for chunk in chunked(primes, EC_CHUNK)]
        values = [a for part in map_ordered(_ec_chunk, jobs, workers=workers, processes=True) for a in part]
        entries = list(zip(primes, values))
    else:
        from .report_io import read_coefficient_csv

        if spec.path is None:
            raise DomainError("external spec has no path attached")
        data = read_coefficient_csv(spec.path)
        for p, a in data.items():
            if not is_prime(p):
                raise FormatError(f"{spec.path}: p={p} is not prime")
            if spec.level % p == 0:
                raise FormatError(f"{spec.path}: p={p} divides the level {spec.level}; bad-prime rows are rejected")
            if p <= max_prime and a * a > 4 * p ** (spec.weight - 1):
                raise FormatError(f"{spec.path}: {DeligneViolation(p, a, spec.weight)}")
        gaps = [p for p in primes if p not in data]
        if gaps:
            raise FormatError(f"{spec.path}: missing primes <= {max_prime}: {gaps[:50]}")
        entries = [(p, data[p]) for p in primes]
    table = CoefficientTable(spec, max_prime, tuple(entries))
    for msg in table.warnings:
        log.warning("%s: %s", spec.label, msg)
    return table
