"""Locations, censuses, and runtime-checked membership/subset witnesses.

A census is an ordered, duplicate-free set of locations.  Order matters: the
loop operators (fanout, fanin, gather) iterate in census order, which is what
makes whole runs deterministic for a fixed seed.

Witnesses are fail-fast proofs: `member` and `subset` are the only
constructors, and they validate the claimed relation when the witness is
built, so any witness that exists is sound.
"""

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import (
    DuplicateLocationError,
    EmptyCensusError,
    NotAMemberError,
    NotASubsetError,
    WitnessMismatchError,
)


@dataclass(frozen=True)
class Location:
    """A participant, identified by name; equality is by name."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("location name must be non-empty")


class Census:
    """An ordered, duplicate-free set of locations.

    May be empty only when used as a degenerate loop subset (zero backups,
    zero senders); run censuses, enclave censuses, owner sets, and recipient
    sets must be non-empty and the operators enforce that.
    """

    __slots__ = ("_members", "_positions")

    def __init__(self, members: tuple[Location, ...]):
        positions: dict[str, int] = {}
        for i, loc in enumerate(members):
            if loc.name in positions:
                raise DuplicateLocationError(f"duplicate location {loc.name!r}")
            positions[loc.name] = i
        self._members = members
        self._positions = positions

    @property
    def members(self) -> tuple[Location, ...]:
        return self._members

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(loc.name for loc in self._members)

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise NotAMemberError(f"{name!r} is not in census {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._positions

    def __iter__(self) -> Iterator[Location]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Census) and self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return f"Census{self.names!r}"


EMPTY = Census(())


def census_of(names: Iterable[str]) -> Census:
    """Build a census from location names, in the given order.

    Raises EmptyCensusError for an empty list and DuplicateLocationError for a
    repeated name.
    """
    listed = list(names)
    if not listed:
        raise EmptyCensusError("a census must contain at least one location")
    return Census(tuple(Location(n) for n in listed))


@dataclass(frozen=True)
class MembershipWitness:
    """Proof that `location` sits at `index` of `census`.

    Only `member` (and `compose`) construct these.
    """

    location: Location
    census: Census
    index: int


@dataclass(frozen=True)
class SubsetWitness:
    """Proof that every member of `sub` appears in `sup`.

    `index_map[i]` is the position in `sup` of `sub.members[i]`.  Only
    `subset` constructs these.
    """

    sub: Census
    sup: Census
    index_map: tuple[int, ...]


def member(name: str, census: Census) -> MembershipWitness:
    """Witness that `name` belongs to `census`; raises NotAMemberError."""
    index = census.position(name)
    return MembershipWitness(census.members[index], census, index)


def subset(sub: Census, sup: Census) -> SubsetWitness:
    """Witness that `sub` is contained in `sup`; raises NotASubsetError
    naming the first offending location."""
    index_map = []
    for loc in sub.members:
        if loc.name not in sup:
            raise NotASubsetError(f"{loc.name!r} is not in census {sup.names}")
        index_map.append(sup.position(loc.name))
    return SubsetWitness(sub, sup, tuple(index_map))


def compose(m: MembershipWitness, s: SubsetWitness) -> MembershipWitness:
    """From p in A and A subset-of B, derive p in B."""
    if m.census != s.sub:
        raise WitnessMismatchError(
            f"membership is over {m.census.names}, subset is from {s.sub.names}"
        )
    return MembershipWitness(m.location, s.sup, s.index_map[m.index])
