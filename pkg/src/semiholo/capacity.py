"""Vocabulary capacity: closed-form bounds and a Monte-Carlo probe.

All large quantities are handled in the log domain; ``p ** y`` is kept as an
exact Python integer.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from .algebra import SystemParams, make_rng

__all__ = [
    "DOMINANT_TERM_RATIO",
    "max_capacity",
    "sparse_capacity",
    "DerivedItems",
    "derived_items",
    "capacity_bound",
    "log_capacity_bound",
    "CapacityReport",
    "capacity_report",
    "McAmbiguityResult",
    "mc_ambiguity",
    "wilson_interval",
]

# Q_s / Gamma at or above this counts as ">> 1" for the dominant-term shortcut.
DOMINANT_TERM_RATIO = 10.0


def _log(v: int | float) -> float:
    # math.log accepts arbitrarily large ints, unlike np.log
    return math.log(v)


def _exp_or_inf(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def max_capacity(params: SystemParams) -> int:
    return params.p ** params.y


def sparse_capacity(Q: int | float, s: float) -> float:
    """Safe vocabulary size ``Q / s`` for sparsity factor ``s >= 1``."""
    if s < 1:
        raise ValueError(f"sparsity factor must be >= 1, got {s}")
    try:
        return Q / s
    except OverflowError:
        return _exp_or_inf(_log(Q) - _log(s))


@dataclass(frozen=True)
class DerivedItems:
    log_total: float
    log_dominant: float
    dominant_valid: bool

    @property
    def total(self) -> float:
        return _exp_or_inf(self.log_total)

    @property
    def dominant(self) -> float:
        return _exp_or_inf(self.log_dominant)


def derived_items(Q_s: float, Gamma: int) -> DerivedItems:
    """Number of items reachable with 0..Gamma bindings of ``Q_s`` items.

    Sums ``Q_s**i / i!`` with a log-sum-exp; also reports the largest-order
    term ``Q_s**Gamma / Gamma!`` and whether ``Q_s / Gamma`` is large enough
    for it to stand in for the sum.
    """
    if Gamma < 0:
        raise ValueError(f"Gamma must be >= 0, got {Gamma}")
    if Q_s < 0:
        raise ValueError(f"Q_s must be >= 0, got {Q_s}")
    if Q_s == 0:
        log_dom = 0.0 if Gamma == 0 else -math.inf
        return DerivedItems(0.0, log_dom, Gamma == 0)
    log_q = _log(Q_s)
    terms = [i * log_q - math.lgamma(i + 1) for i in range(Gamma + 1)]
    valid = Gamma == 0 or Q_s / Gamma >= DOMINANT_TERM_RATIO
    return DerivedItems(float(logsumexp(terms)), terms[-1], valid)


def log_capacity_bound(params: SystemParams, Gamma: int) -> float:
    if Gamma < 1:
        raise ValueError(f"Gamma must be >= 1, got {Gamma}")
    return math.lgamma(Gamma + 1) / Gamma + params.y * math.log(params.p) / Gamma


def capacity_bound(params: SystemParams, Gamma: int) -> float:
    """Largest vocabulary whose 0..Gamma-fold bindings just fill ``p ** y``.

    Evaluates ``(Gamma!) ** (1/Gamma) * p ** (y/Gamma)``.
    """
    return _exp_or_inf(log_capacity_bound(params, Gamma))


@dataclass(frozen=True)
class CapacityReport:
    params: SystemParams
    Gamma: int
    Q: int
    s: float
    Q_s: float
    J: float
    log_J: float
    Q_s_bound: float
    dominant_valid: bool

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        # p**y can exceed any JSON number; keep it exact as a decimal string
        d["Q"] = str(self.Q)
        return d


def capacity_report(params: SystemParams, Gamma: int, s: float | None = None) -> CapacityReport:
    """Tabulate capacity figures.

    Without an explicit ``s`` the sparsity factor is the one that makes the
    safe vocabulary equal to :func:`capacity_bound`.
    """
    Q = max_capacity(params)
    log_bound = log_capacity_bound(params, Gamma)
    if s is None:
        s = max(1.0, _exp_or_inf(_log(Q) - log_bound))
    Q_s = sparse_capacity(Q, s)
    J = derived_items(Q_s, Gamma)
    return CapacityReport(
        params=params,
        Gamma=Gamma,
        Q=Q,
        s=float(s),
        Q_s=float(Q_s),
        J=J.total,
        log_J=J.log_total,
        Q_s_bound=_exp_or_inf(log_bound),
        dominant_valid=J.dominant_valid,
    )


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass(frozen=True)
class McAmbiguityResult:
    params: SystemParams
    vocab_size: int
    Gamma: int
    trials: int
    seed: int | None
    collisions: int
    collision_rate: float
    collision_ci: tuple[float, float]
    query_failures: int
    ambiguous_query_rate: float
    ambiguous_query_ci: tuple[float, float]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        d["collision_ci"] = list(self.collision_ci)
        d["ambiguous_query_ci"] = list(self.ambiguous_query_ci)
        return d


def _digits(index: np.ndarray, p: int, y: int) -> np.ndarray:
    out = np.empty((len(index), y), dtype=np.int64)
    rest = index.copy()
    for k in range(y):
        out[:, k] = rest % p
        rest //= p
    return out


def _random_vocab(params: SystemParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` distinct random items as a ``(size, y)`` array."""
    p, y = params.p, params.y
    total = p ** y
    if total <= 1 << 62:
        idx = rng.choice(total, size=size, replace=False)
        return _digits(np.asarray(idx, dtype=np.int64), p, y)
    seen: set[bytes] = set()
    rows = []
    while len(rows) < size:
        row = rng.integers(0, p, size=y, dtype=np.int64)
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            rows.append(row)
    return np.array(rows, dtype=np.int64)


def mc_ambiguity(
    params: SystemParams,
    vocab_size: int,
    Gamma: int,
    trials: int,
    seed: int | None = None,
) -> McAmbiguityResult:
    """Empirically probe how often derived bindings clash with the vocabulary.

    A random vocabulary of ``vocab_size`` distinct items is drawn. Each trial
    draws ``k`` distinct entries (``k`` uniform on ``2..min(Gamma, V)``) and
    binds them into one derived item. A trial collides when that item equals a
    vocabulary entry, or equals the item derived from a different set of
    entries in another trial.

    The query half mirrors the role/filler setup: the first ``k - 1`` factors
    act as a composite role, the last one is the filler, and a second,
    independently drawn binding is superposed as a distractor. Unbinding the
    role must return the filler unambiguously; anything else counts as a
    failure.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    if vocab_size > max_capacity(params):
        raise ValueError(f"vocab_size {vocab_size} exceeds p**y = {max_capacity(params)}")
    rng = make_rng(seed)
    p = params.p
    vocab = _random_vocab(params, vocab_size, rng)
    kmax = min(Gamma, vocab_size)
    if kmax < 2:
        # no derived bindings exist, so nothing can collide or be mis-recalled
        ci = wilson_interval(0, trials)
        return McAmbiguityResult(params, vocab_size, Gamma, trials, seed, 0, 0.0, ci,
                                 0, 0.0, ci)

    vocab_keys = {row.tobytes() for row in vocab}

    derived_keys: list[bytes] = []
    factor_sets: dict[bytes, set[frozenset]] = {}
    failures = 0
    for _ in range(trials):
        k = int(rng.integers(2, kmax + 1))
        idx = rng.choice(vocab_size, size=k, replace=False)
        derived = vocab[idx].sum(axis=0) % p
        key = derived.tobytes()
        derived_keys.append(key)
        factor_sets.setdefault(key, set()).add(frozenset(int(i) for i in idx))

        role = vocab[idx[:-1]].sum(axis=0) % p
        distractor_idx = rng.choice(vocab_size, size=k, replace=False)
        distractor = vocab[distractor_idx].sum(axis=0) % p
        probe = np.stack([derived - role, distractor - role])[: params.d] % p
        best, ambiguous = _nearest_rows(vocab, probe, p)
        if ambiguous or best != idx[-1]:
            failures += 1

    collisions = sum(
        1 for key in derived_keys if key in vocab_keys or len(factor_sets[key]) > 1
    )
    return McAmbiguityResult(
        params=params,
        vocab_size=vocab_size,
        Gamma=Gamma,
        trials=trials,
        seed=seed,
        collisions=collisions,
        collision_rate=collisions / trials,
        collision_ci=wilson_interval(collisions, trials),
        query_failures=failures,
        ambiguous_query_rate=failures / trials,
        ambiguous_query_ci=wilson_interval(failures, trials),
    )


def _nearest_rows(vocab: np.ndarray, probe: np.ndarray, p: int) -> tuple[int, bool]:
    """Vectorised cleanup query: (index of nearest entry, ambiguous)."""
    diff = np.abs(vocab[:, None, :] - probe[None, :, :])
    dist = np.minimum(diff, p - diff).sum(axis=2).min(axis=1)
    best = int(np.argmin(dist))
    return best, bool(np.count_nonzero(dist == dist[best]) > 1)
