"""Filter and ultrafilter algebra on finite universes, plus the cofinite
filter on the naturals.

Subsets of the universe {0..u-1} are bitmasks, families are frozensets of
bitmasks. Universes are capped at 24 elements so exhaustive arguments stay
desk-scale. On an infinite index set only the finite/cofinite fragment is
representable, by design: that is exactly the decidable core the sequence
layer relies on.
"""

from dataclasses import dataclass
from typing import FrozenSet

from .errors import (
    EmptyBaseSetError,
    FIPViolationError,
    NotAFilterError,
)

MAX_UNIVERSE = 24


@dataclass(frozen=True)
class FiniteFamily:
    universe_size: int
    members: FrozenSet[int]

    def __post_init__(self):
        if not 1 <= self.universe_size <= MAX_UNIVERSE:
            raise ValueError(f"universe size must be 1..{MAX_UNIVERSE}")
        full = (1 << self.universe_size) - 1
        for m in self.members:
            if not 0 <= m <= full:
                raise ValueError(f"member {m:#x} outside the universe")
        object.__setattr__(self, "members", frozenset(self.members))

    @property
    def full_mask(self):
        return (1 << self.universe_size) - 1

    def to_sets(self):
        """Sorted list of sorted element lists (the JSON encoding)."""
        out = []
        for m in self.members:
            out.append([i for i in range(self.universe_size) if (m >> i) & 1])
        return sorted(out, key=lambda s: (len(s), s))

    @staticmethod
    def from_sets(universe_size, sets):
        members = set()
        for s in sets:
            mask = 0
            for i in s:
                i = int(i)
                if not 0 <= i < universe_size:
                    raise ValueError(f"element {i} outside the universe")
                mask |= 1 << i
            members.add(mask)
        return FiniteFamily(universe_size, frozenset(members))


def family(universe_size, sets):
    return FiniteFamily.from_sets(universe_size, sets)


def is_filter(fam: FiniteFamily) -> bool:
    """Nonempty, intersection-closed, superset-closed, and excludes the
    empty set."""
    members = fam.members
    if not members or 0 in members:
        return False
    full = fam.full_mask
    if full not in members:  # superset closure forces the whole universe in
        return False
    for a in members:
        for b in members:
            if a & b not in members:
                return False
    for a in members:
        comp = full & ~a
        sub = comp
        while True:
            if (a | sub) not in members:
                return False
            if sub == 0:
                break
            sub = (sub - 1) & comp
    return True


def is_ultrafilter(fam: FiniteFamily) -> bool:
    """A filter containing exactly one of A, X-A for every subset A."""
    members = fam.members
    full = fam.full_mask
    # dichotomy scan first: it is cheap and prunes almost everything
    for a in range(full + 1):
        if ((a in members) + ((full & ~a) in members)) != 1:
            return False
    return is_filter(fam)


def principal_filter(universe_size, a_mask) -> FiniteFamily:
    """All supersets of a nonempty set A."""
    a_mask = int(a_mask)
    if a_mask == 0:
        raise EmptyBaseSetError("principal filter over the empty set")
    full = (1 << universe_size) - 1
    if a_mask & ~full:
        raise ValueError("set outside the universe")
    comp = full & ~a_mask
    members = set()
    sub = comp
    while True:
        members.add(a_mask | sub)
        if sub == 0:
            break
        sub = (sub - 1) & comp
    return FiniteFamily(universe_size, frozenset(members))


def generate_from_base(universe_size, base) -> FiniteFamily:
    """Smallest filter containing the base family.

    Closes the base under pairwise intersection; a vanishing intersection is
    a finite-intersection-property violation and is rejected (the closure
    would otherwise admit the empty set).
    """
    if isinstance(base, FiniteFamily):
        if base.universe_size != universe_size:
            raise ValueError("universe size mismatch")
        base_members = set(base.members)
    else:
        base_members = set(int(m) for m in base)
    if not base_members:
        raise EmptyBaseSetError("cannot generate a filter from an empty base")
    closure = set(base_members)
    frontier = set(base_members)
    while frontier:
        new = set()
        for a in frontier:
            for b in closure:
                c = a & b
                if c == 0:
                    raise FIPViolationError(
                        "base family lacks the finite intersection property"
                    )
                if c not in closure and c not in new:
                    new.add(c)
        closure |= new
        frontier = new
    members = set()
    full = (1 << universe_size) - 1
    for core in closure:
        comp = full & ~core
        sub = comp
        while True:
            members.add(core | sub)
            if sub == 0:
                break
            sub = (sub - 1) & comp
    return FiniteFamily(universe_size, frozenset(members))


def extend_to_ultrafilter(fam: FiniteFamily) -> FiniteFamily:
    """Deterministic ultrafilter extension.

    Scans subsets in ascending bitmask order; whenever neither A nor its
    complement is present, A joins (its complement absent guarantees A meets
    every member) and the family recloses. Any scan order would be correct;
    this one makes regression tests reproducible.
    """
    if not is_filter(fam):
        raise NotAFilterError("extension requires a filter")
    full = fam.full_mask
    current = fam
    for a in range(full + 1):
        members = current.members
        if a in members or (full & ~a) in members:
            continue
        current = generate_from_base(
            fam.universe_size, set(members) | {a}
        )
    return current


def all_filters(universe_size):
    """Every filter on a small universe by exhaustive scan of all families.

    Only sensible for universe_size <= 4 (2**(2**u) candidate families).
    """
    if universe_size > 4:
        raise ValueError("exhaustive filter scan is limited to universes <= 4")
    n_subsets = 1 << universe_size
    out = []
    for code in range(1, 1 << n_subsets):
        if code & 1:  # empty set present
            continue
        if not (code >> (n_subsets - 1)) & 1:  # universe absent
            continue
        members = frozenset(m for m in range(n_subsets) if (code >> m) & 1)
        fam = FiniteFamily(universe_size, members)
        if is_filter(fam):
            out.append(fam)
    return out


def all_ultrafilters(universe_size):
    """Every ultrafilter, by choosing one set from each complement pair.

    Works up to universe_size 5 (2**(2**u / 2) selections).
    """
    full = (1 << universe_size) - 1
    pairs = []
    seen = set()
    for a in range(full + 1):
        b = full & ~a
        if a not in seen and b not in seen:
            pairs.append((a, b))
            seen.add(a)
            seen.add(b)
    out = []
    for code in range(1 << len(pairs)):
        members = frozenset(
            pair[(code >> i) & 1] for i, pair in enumerate(pairs)
        )
        if 0 in members:
            continue
        fam = FiniteFamily(universe_size, members)
        if is_filter(fam):
            out.append(fam)
    return out


# -- the cofinite fragment of P(N) ------------------------------------------

FINITE = "finite"
COFINITE = "finite-complement"


@dataclass(frozen=True)
class CofiniteSet:
    """A subset of the naturals that is either finite or has finite
    complement. Anything else is unrepresentable here on purpose."""

    exceptions: FrozenSet[int]
    polarity: str  # FINITE: the set IS exceptions; COFINITE: N minus them

    def __post_init__(self):
        if self.polarity not in (FINITE, COFINITE):
            raise ValueError("polarity must be finite or finite-complement")
        exc = frozenset(int(i) for i in self.exceptions)
        if any(i < 0 for i in exc):
            raise ValueError("exceptions must be natural numbers")
        object.__setattr__(self, "exceptions", exc)

    @staticmethod
    def finite(elements):
        return CofiniteSet(frozenset(elements), FINITE)

    @staticmethod
    def cofinite(excluded):
        return CofiniteSet(frozenset(excluded), COFINITE)

    def contains(self, n):
        inside = n in self.exceptions
        return inside if self.polarity == FINITE else not inside

    def complement(self):
        flip = COFINITE if self.polarity == FINITE else FINITE
        return CofiniteSet(self.exceptions, flip)

    def intersection(self, other):
        a, b = self, other
        if a.polarity == FINITE:
            return CofiniteSet.finite(
                {n for n in a.exceptions if b.contains(n)}
            )
        if b.polarity == FINITE:
            return b.intersection(a)
        return CofiniteSet.cofinite(a.exceptions | b.exceptions)


def cofinite_contains(s: CofiniteSet) -> bool:
    """Membership in the cofinite filter: true exactly for the sets whose
    complement is finite. Finite sets are excluded (on an infinite universe
    they would drag the empty set in)."""
    return s.polarity == COFINITE
