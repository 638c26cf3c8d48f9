"""Circular distances, de-noising reducers and the cleanup memory."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .algebra import (
    BaseItem,
    Chain,
    ParamsMismatchError,
    SystemParams,
    UndefinedOperandError,
    as_chain,
    bind,
    inverse,
)

__all__ = [
    "circ_dist",
    "item_dist",
    "chain_dist",
    "denoise_avg",
    "DenoiseMethod",
    "denoise_item",
    "Codebook",
    "QueryResult",
    "cleanup_query",
    "unbind_query",
]


def _check_residue(v: int, p: int) -> None:
    if not 0 <= v < p:
        raise ValueError(f"residue {v} outside [0, {p - 1}]")


def circ_dist(a: int, b: int, p: int) -> int:
    """Arc length between two residues on the ring of size ``p``."""
    _check_residue(a, p)
    _check_residue(b, p)
    diff = abs(b - a)
    return min(diff, p - diff)


def item_dist(a: BaseItem, b: BaseItem) -> int:
    """Sum of element-wise circular distances."""
    if a.p != b.p or len(a) != len(b):
        raise ParamsMismatchError(f"{a!r} and {b!r} are not comparable")
    p = a.p
    total = 0
    for s, t in zip(a.elems, b.elems):
        diff = s - t if s > t else t - s
        total += diff if 2 * diff <= p else p - diff
    return total


def chain_dist(a: BaseItem, b: Chain) -> int:
    """Distance from a base item to its nearest item in ``b``."""
    if b.rank == 0:
        raise UndefinedOperandError("distance to an empty chain is undefined")
    return min(item_dist(a, bi) for bi in b.items)


def denoise_avg(a: int, b: int, p: int) -> int:
    """Midpoint of ``a`` and ``b`` along the shorter arc.

    When both arcs have equal length the inner arc (no wrap through zero) is
    used. Odd arc lengths round the step from the start point upward.
    """
    step = -(-circ_dist(a, b, p) // 2)
    diff = abs(b - a)
    if diff <= p - diff:
        return min(a, b) + step
    return (max(a, b) + step) % p


class DenoiseMethod(enum.Enum):
    GEODESIC_PAIR_AVG = "geodesic"
    MAJORITY_VOTE = "majority"
    MEDIAN = "median"


def _mode(values: Sequence[int]) -> int:
    counts = Counter(values)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def _lower_median(values: Sequence[int]) -> int:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def denoise_item(
    samples: Sequence[BaseItem], method: DenoiseMethod | str = DenoiseMethod.MAJORITY_VOTE
) -> BaseItem:
    """Reconcile corrupted copies of one item, element by element.

    Majority vote breaks ties towards the smallest residue; the median of an
    even number of samples is the lower one.
    """
    method = DenoiseMethod(method)
    if not samples:
        raise ValueError("denoise_item needs at least one sample")
    first = samples[0]
    for s in samples[1:]:
        if s.p != first.p or len(s) != len(first):
            raise ParamsMismatchError("samples use different params")
    p = first.p
    if method is DenoiseMethod.GEODESIC_PAIR_AVG:
        if len(samples) != 2:
            raise ValueError(
                f"geodesic pair average takes exactly 2 samples, got {len(samples)}"
            )
        a, b = samples
        return BaseItem(tuple(denoise_avg(s, t, p) for s, t in zip(a, b)), p)
    reducer = _mode if method is DenoiseMethod.MAJORITY_VOTE else _lower_median
    columns = zip(*(s.elems for s in samples))
    return BaseItem(tuple(reducer(col) for col in columns), p)


class Codebook:
    """A named vocabulary of base items, immutable once built.

    Entries keep insertion order, which is also the tie-break order of
    queries.
    """

    __slots__ = ("params", "_entries", "_names")

    def __init__(self, params: SystemParams, entries: Mapping[str, BaseItem | Sequence[int]]
                 | Iterable[tuple[str, BaseItem | Sequence[int]]]):
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        built: dict[str, BaseItem] = {}
        for name, value in pairs:
            if not isinstance(name, str) or not name:
                raise ValueError(f"invalid entry name {name!r}")
            if name in built:
                raise ValueError(f"duplicate entry name {name!r}")
            item = value if isinstance(value, BaseItem) else BaseItem(tuple(value), params.p)
            item.check(params)
            built[name] = item
        if len(built) > params.p ** params.y:
            raise ValueError("codebook holds more entries than there are distinct items")
        self.params = params
        self._entries = MappingProxyType(built)
        self._names = tuple(built)

    @property
    def entries(self) -> Mapping[str, BaseItem]:
        return self._entries

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def __getitem__(self, name: str) -> BaseItem:
        try:
            return self._entries[name]
        except KeyError:
            raise KeyError(f"unknown codebook entry {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self):
        return iter(self._names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.params == other.params and list(self._entries.items()) == list(
            other._entries.items()
        )

    def __repr__(self) -> str:
        return f"Codebook({self.params}, {len(self)} entries)"

    def chain(self, name: str) -> Chain:
        return Chain(self.params, (self[name],))


@dataclass(frozen=True)
class QueryResult:
    name: str
    distance: int
    runner_up_name: str | None = None
    runner_up_distance: int | None = None
    ambiguous: bool = False

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "distance": self.distance,
            "runner_up_name": self.runner_up_name,
            "runner_up_distance": self.runner_up_distance,
            "ambiguous": self.ambiguous,
        }


def cleanup_query(cb: Codebook, probe: Chain | BaseItem) -> QueryResult:
    """Return the codebook entry nearest to any item of ``probe``."""
    if len(cb) == 0:
        raise ValueError("cannot query an empty codebook")
    probe = as_chain(probe, cb.params)
    if probe.rank == 0:
        raise UndefinedOperandError("probe chain is empty")
    # sorted() is stable, so equal distances keep insertion order
    ranked = sorted(
        ((chain_dist(cb[name], probe), name) for name in cb.names),
        key=lambda t: t[0],
    )
    best_d, best = ranked[0]
    if len(ranked) == 1:
        return QueryResult(best, best_d)
    second_d, second = ranked[1]
    return QueryResult(best, best_d, second, second_d, best_d == second_d)


def unbind_query(cb: Codebook, s: Chain, role: str) -> QueryResult:
    """Unbind ``role`` from ``s`` and clean up the result against ``cb``."""
    key = cb[role]
    probe = bind(Chain(cb.params, (inverse(key),)), s)
    return cleanup_query(cb, probe)
