"""Semantic objects and the two core operations.

Base items are vectors of ``y`` residues mod ``p``. Chains are ordered
concatenations of up to ``d`` base items. Superposition concatenates chains;
binding pairs every item of one chain with every item of the other using
element-wise addition mod ``p``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "AlgebraError",
    "RankOverflowError",
    "UndefinedOperandError",
    "ParamsMismatchError",
    "RankOverflowWarning",
    "SystemParams",
    "BaseItem",
    "Chain",
    "OverflowPolicy",
    "new_params",
    "make_rng",
    "random_item",
    "zero_item",
    "as_chain",
    "superpose",
    "bind",
    "inverse",
    "invert_chain",
    "compress_chain",
    "COMPRESSORS",
    "pad_chain",
]


class AlgebraError(ValueError):
    """Base class for invalid semantic-object operations."""


class RankOverflowError(AlgebraError):
    """The result of an operation would hold more than ``d`` items."""


class UndefinedOperandError(AlgebraError):
    """An operand lies outside the domain of the operation (e.g. empty chain)."""


class ParamsMismatchError(AlgebraError):
    """Operands were built under different ``SystemParams``."""


class RankOverflowWarning(UserWarning):
    pass


def _log2_exact(v: int) -> int | None:
    if v >= 1 and v & (v - 1) == 0:
        return v.bit_length() - 1
    return None


@dataclass(frozen=True, slots=True)
class SystemParams:
    """The ``(p, y, d)`` configuration and the quantities derived from it.

    ``l``, ``z`` and ``m`` are the base-2 logarithms of ``p``, ``y`` and ``d``
    and are ``None`` unless the corresponding value is a power of two.
    """

    p: int
    y: int
    d: int

    def __post_init__(self):
        for name in ("p", "y", "d"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.y < 1:
            raise ValueError(f"y must be >= 1, got {self.y}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def l(self) -> int | None:  # noqa: E743
        return _log2_exact(self.p)

    @property
    def z(self) -> int | None:
        return _log2_exact(self.y)

    @property
    def m(self) -> int | None:
        return _log2_exact(self.d)

    @property
    def n(self) -> int:
        return self.d * self.y

    @property
    def x(self) -> int:
        # smallest x with 2**x >= d + 1, so ranks 0..d fit in the flag field
        return self.d.bit_length()

    @property
    def power_of_two(self) -> bool:
        return None not in (self.l, self.z, self.m)

    def as_dict(self) -> dict:
        return {"p": self.p, "y": self.y, "d": self.d}


def new_params(p: int, y: int, d: int) -> SystemParams:
    return SystemParams(p, y, d)


@dataclass(frozen=True, slots=True)
class BaseItem:
    """A length-``y`` vector of residues mod ``p``."""

    elems: tuple[int, ...]
    p: int

    def __post_init__(self):
        elems = tuple(int(e) for e in self.elems)
        for e in elems:
            if not 0 <= e < self.p:
                raise ValueError(f"element {e} outside [0, {self.p - 1}]")
        if not elems:
            raise ValueError("a base item needs at least one element")
        object.__setattr__(self, "elems", elems)

    @classmethod
    def _unchecked(cls, elems: tuple[int, ...], p: int) -> BaseItem:
        obj = object.__new__(cls)
        object.__setattr__(obj, "elems", elems)
        object.__setattr__(obj, "p", p)
        return obj

    @property
    def y(self) -> int:
        return len(self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __getitem__(self, i):
        return self.elems[i]

    def __repr__(self) -> str:
        return f"BaseItem({list(self.elems)}, p={self.p})"

    def check(self, params: SystemParams) -> None:
        if self.p != params.p or len(self.elems) != params.y:
            raise ParamsMismatchError(
                f"item with p={self.p}, y={len(self.elems)} does not match {params}"
            )


@dataclass(frozen=True, slots=True)
class Chain:
    """An ordered sequence of base items under one ``SystemParams``.

    ``items`` holds the logical content and ``rank == len(items)``. A padded
    chain additionally reports ``d`` physical items, the tail being zeros.
    ``warning`` is set when a superposition was truncated.
    """

    params: SystemParams
    items: tuple[BaseItem, ...] = ()
    padded: bool = False
    warning: bool = field(default=False, compare=False)

    def __post_init__(self):
        items = tuple(self.items)
        if len(items) > self.params.d:
            raise RankOverflowError(
                f"chain of rank {len(items)} exceeds d={self.params.d}"
            )
        for it in items:
            it.check(self.params)
        object.__setattr__(self, "items", items)

    @classmethod
    def _unchecked(cls, params, items, padded=False, warning=False) -> Chain:
        obj = object.__new__(cls)
        object.__setattr__(obj, "params", params)
        object.__setattr__(obj, "items", items)
        object.__setattr__(obj, "padded", padded)
        object.__setattr__(obj, "warning", warning)
        return obj

    @classmethod
    def of(cls, params: SystemParams, *vectors: Iterable[int]) -> Chain:
        """Build a chain from plain integer vectors."""
        return cls(params, tuple(BaseItem(tuple(v), params.p) for v in vectors))

    @property
    def rank(self) -> int:
        return len(self.items)

    @property
    def physical_items(self) -> tuple[BaseItem, ...]:
        if not self.padded:
            return self.items
        z = zero_item(self.params)
        return self.items + (z,) * (self.params.d - len(self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def to_lists(self) -> list[list[int]]:
        return [list(it.elems) for it in self.items]

    def __repr__(self) -> str:
        return f"Chain({self.to_lists()}, p={self.params.p}, d={self.params.d})"


class OverflowPolicy:
    """What superposition does when the combined rank exceeds ``d``.

    ``REJECT`` raises :class:`RankOverflowError`; ``TRUNCATE`` keeps the first
    ``d`` items and marks the result with ``warning=True``; ``handler(fn)``
    passes control to ``fn(a, b)`` and returns whatever it returns.
    """

    class Kind(enum.Enum):
        REJECT = "reject"
        TRUNCATE = "truncate"
        HANDLER = "handler"

    __slots__ = ("kind", "handler_fn")

    def __init__(self, kind: Kind, handler_fn: Callable[[Chain, Chain], Chain] | None = None):
        if (kind is OverflowPolicy.Kind.HANDLER) != (handler_fn is not None):
            raise ValueError("a handler callback is required exactly for the HANDLER policy")
        self.kind = kind
        self.handler_fn = handler_fn

    @classmethod
    def handler(cls, fn: Callable[[Chain, Chain], Chain]) -> OverflowPolicy:
        return cls(cls.Kind.HANDLER, fn)

    def __repr__(self) -> str:
        if self.handler_fn is not None:
            return f"OverflowPolicy.handler({self.handler_fn!r})"
        return f"OverflowPolicy.{self.kind.name}"


OverflowPolicy.REJECT = OverflowPolicy(OverflowPolicy.Kind.REJECT)
OverflowPolicy.TRUNCATE = OverflowPolicy(OverflowPolicy.Kind.TRUNCATE)


def make_rng(seed: int | np.random.Generator | None = None) -> np.random.Generator:
    """Return a PCG64-backed generator.

    Seeds are fed through ``np.random.SeedSequence``; child streams come from
    ``Generator.spawn``. The bit generator is pinned to PCG64 so that streams
    are stable for a given numpy major version.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def random_item(params: SystemParams, seed: int | np.random.Generator | None = None) -> BaseItem:
    rng = make_rng(seed)
    elems = rng.integers(0, params.p, size=params.y)
    return BaseItem._unchecked(tuple(int(e) for e in elems), params.p)


def zero_item(params: SystemParams) -> BaseItem:
    return BaseItem._unchecked((0,) * params.y, params.p)


def as_chain(obj: Chain | BaseItem, params: SystemParams | None = None) -> Chain:
    """Promote a base item to a rank-1 chain; chains pass through."""
    if isinstance(obj, Chain):
        return obj
    if isinstance(obj, BaseItem):
        if params is None:
            params = SystemParams(obj.p, len(obj), 1)
        return Chain(params, (obj,))
    raise TypeError(f"expected Chain or BaseItem, got {type(obj).__name__}")


def _same_params(a: Chain, b: Chain) -> SystemParams:
    if a.params != b.params:
        raise ParamsMismatchError(f"{a.params} != {b.params}")
    return a.params


def superpose(a: Chain, b: Chain, policy: OverflowPolicy = OverflowPolicy.REJECT) -> Chain:
    """Concatenate ``b`` after ``a``; ranks add."""
    params = _same_params(a, b)
    items = a.items + b.items
    if len(items) > params.d:
        if policy.kind is OverflowPolicy.Kind.REJECT:
            raise RankOverflowError(
                f"superposition of ranks {a.rank}+{b.rank} exceeds d={params.d}"
            )
        if policy.kind is OverflowPolicy.Kind.TRUNCATE:
            warnings.warn(
                f"superposition truncated from rank {len(items)} to {params.d}",
                RankOverflowWarning,
                stacklevel=2,
            )
            return Chain._unchecked(params, items[: params.d], warning=True)
        return policy.handler_fn(a, b)
    return Chain._unchecked(params, items)


def _add(u: BaseItem, v: BaseItem, p: int) -> BaseItem:
    return BaseItem._unchecked(tuple((s + t) % p for s, t in zip(u.elems, v.elems)), p)


def bind(a: Chain | BaseItem, b: Chain | BaseItem) -> Chain:
    """Tensor-style binding: item ``a_i + b_j`` for j over ``b``, i over ``a``.

    The ``a`` index runs fastest. Base items are promoted to rank-1 chains
    under the params of the other operand.
    """
    if isinstance(a, BaseItem) and isinstance(b, Chain):
        a = as_chain(a, b.params)
    elif isinstance(b, BaseItem) and isinstance(a, Chain):
        b = as_chain(b, a.params)
    else:
        a, b = as_chain(a), as_chain(b)
    params = _same_params(a, b)
    if a.rank == 0 or b.rank == 0:
        raise UndefinedOperandError("binding is undefined for empty chains")
    if a.rank * b.rank > params.d:
        raise RankOverflowError(
            f"binding of ranks {a.rank}x{b.rank} exceeds d={params.d}"
        )
    p = params.p
    items = tuple(_add(ai, bj, p) for bj in b.items for ai in a.items)
    return Chain._unchecked(params, items)


def inverse(a: BaseItem) -> BaseItem:
    """Additive inverse, element-wise ``(p - e) mod p``."""
    p = a.p
    return BaseItem._unchecked(tuple((p - e) % p for e in a.elems), p)


def invert_chain(c: Chain) -> Chain:
    """Item-wise inverse of every item of ``c``."""
    return Chain._unchecked(c.params, tuple(inverse(it) for it in c.items))


def fold_compressor(c: Chain) -> BaseItem:
    p = c.params.p
    acc = [0] * c.params.y
    for it in c.items:
        for k, e in enumerate(it.elems):
            acc[k] += e
    return BaseItem._unchecked(tuple(v % p for v in acc), p)


COMPRESSORS: MappingProxyType = MappingProxyType({"fold": fold_compressor})


def compress_chain(
    c: Chain, compressor: str | Callable[[Chain], BaseItem] = "fold"
) -> BaseItem:
    """Collapse a chain to a single base item.

    ``compressor`` is either a key of :data:`COMPRESSORS` or any callable
    ``Chain -> BaseItem``. The default ``"fold"`` sums all items mod ``p``.
    """
    if c.rank == 0:
        raise UndefinedOperandError("cannot compress an empty chain")
    fn = COMPRESSORS[compressor] if isinstance(compressor, str) else compressor
    out = fn(c)
    out.check(c.params)
    return out


def pad_chain(c: Chain) -> Chain:
    """Mark ``c`` as zero-padded to ``d`` physical items; rank is unchanged."""
    if c.padded or c.rank == c.params.d:
        return c
    return Chain._unchecked(c.params, c.items, padded=True, warning=c.warning)
