"""Finite discrete time, value traces, and causal signals under the prefix order.

Time is a finite run of integer ticks 0..n.  A trace assigns one symbolic
value per tick, and a causal signal is a trace paired with its current tick,
i.e. a value history that is closed at the present.  Causal signals over a
shared alphabet carry a natural partial order: one signal precedes another
exactly when the second extends the first without rewriting any past sample.

Everything here is immutable and deterministic; enumeration order follows
the declaration order of alphabet values, which downstream code relies on
for reproducible tie-breaking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Tick = int


@dataclass(frozen=True)
class Alphabet:
    """Finite, non-empty set of symbolic values with a significant order.

    Declaration order drives lexicographic tie-breaks in the classifier, so
    two alphabets holding the same values in a different order are distinct.
    """

    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("alphabet must be non-empty")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"alphabet values must be distinct: {self.values!r}")

    @cached_property
    def _ranks(self) -> dict[str, int]:
        return {value: i for i, value in enumerate(self.values)}

    def rank(self, value: str) -> int:
        """Position of ``value`` in declaration order."""
        try:
            return self._ranks[value]
        except KeyError:
            raise ValueError(f"{value!r} is not in alphabet {self.values!r}") from None

    def __contains__(self, value: object) -> bool:
        return value in self._ranks

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def product(*components: Sequence[str]) -> "Alphabet":
        """Tuple alphabet with '/'-joined symbols, ordered like the product."""
        joined = tuple("/".join(parts) for parts in itertools.product(*components))
        return Alphabet(joined)


BINARY = Alphabet(("0", "1"))


def split_symbol(symbol: str) -> tuple[str, ...]:
    """Components of a '/'-joined product symbol."""
    return tuple(symbol.split("/"))


@dataclass(frozen=True)
class Trace:
    """A closed run of samples from tick 0, each drawn from one alphabet."""

    alphabet: Alphabet
    samples: tuple[str, ...]

    def __post_init__(self) -> None:
        for sample in self.samples:
            if sample not in self.alphabet:
                raise ValueError(
                    f"sample {sample!r} not in alphabet {self.alphabet.values!r}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, tick: Tick) -> str:
        return self.samples[tick]


def restrict_trace(trace: Trace, t: Tick) -> Trace:
    """The first ``t + 1`` samples of ``trace``; ``t`` must lie inside it."""
    if not 0 <= t < len(trace):
        raise IndexError(f"tick {t} outside trace of length {len(trace)}")
    return Trace(trace.alphabet, trace.samples[: t + 1])


@dataclass(frozen=True)
class CausalSignal:
    """A value history up to a current tick: the pair of ``t`` and a trace on 0..t."""

    t: Tick
    trace: Trace

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError("current tick must be >= 0")
        if len(self.trace) != self.t + 1:
            raise ValueError(
                f"trace length {len(self.trace)} does not match current tick {self.t}"
            )

    @classmethod
    def from_samples(cls, alphabet: Alphabet, samples: Iterable[str]) -> "CausalSignal":
        samples = tuple(samples)
        if not samples:
            raise ValueError("a causal signal needs at least the tick-0 sample")
        return cls(len(samples) - 1, Trace(alphabet, samples))

    @property
    def samples(self) -> tuple[str, ...]:
        return self.trace.samples

    @property
    def alphabet(self) -> Alphabet:
        return self.trace.alphabet

    def prefix(self, t: Tick) -> "CausalSignal":
        """The same history cut off at an earlier (or equal) current tick."""
        return CausalSignal(t, restrict_trace(self.trace, t))

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        """(t, sample ranks): the deterministic order used for tie-breaking."""
        rank = self.alphabet.rank
        return (self.t, tuple(rank(s) for s in self.samples))


def prefix_leq(a: CausalSignal, b: CausalSignal) -> bool:
    """True iff ``b`` extends ``a`` without changing any sample up to ``a.t``."""
    if a.alphabet != b.alphabet:
        raise ValueError("signals over different alphabets are not comparable")
    return a.t <= b.t and b.samples[: a.t + 1] == a.samples


def enumerate_causal_signals(alphabet: Alphabet, horizon: Tick) -> list[CausalSignal]:
    """Every causal signal over ``alphabet`` with current tick 0..horizon.

    The result is duplicate-free and ascends in ``sort_key`` order; its length
    is the sum of ``len(alphabet) ** (t + 1)`` for t in 0..horizon.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    signals = []
    for t in range(horizon + 1):
        for combo in itertools.product(alphabet.values, repeat=t + 1):
            signals.append(CausalSignal(t, Trace(alphabet, combo)))
    return signals


def build_prefix_relation(
    signals: Iterable[CausalSignal],
) -> list[tuple[CausalSignal, CausalSignal]]:
    """All ordered pairs (a, b) from ``signals`` with ``prefix_leq(a, b)``.

    Works for any signal set, but only a prefix-closed carrier (as produced by
    :func:`enumerate_causal_signals`) yields the full partial order.  Pairs are
    found by direct prefix lookup, so the cost is linear in the output size.
    """
    by_shape: dict[tuple[Tick, tuple[str, ...]], CausalSignal] = {}
    alphabets = set()
    for s in signals:
        alphabets.add(s.alphabet)
        by_shape.setdefault((s.t, s.samples), s)
    if len(alphabets) > 1:
        raise ValueError("all signals must share one alphabet")
    pairs = []
    for b in by_shape.values():
        for u in range(b.t + 1):
            a = by_shape.get((u, b.samples[: u + 1]))
            if a is not None:
                pairs.append((a, b))
    return pairs
