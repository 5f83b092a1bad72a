"""Read maps, derived relations, partial-order axioms, and the verdict engine.

A read map tells, for each control-signal history, which input samples a
circuit actually consumes to produce its current output.  Pushing the prefix
order on control signals through a read map yields a derived relation on read
sets.  If that relation is a partial order, the circuit's read structure
embeds the order of time itself and the circuit is *time-preserving*; if
antisymmetry fails there is a concrete four-signal witness proving no
order-preserving arrangement of read sets can exist.

The classifier is exhaustive up to a finite horizon and fully deterministic:
witnesses are the lexicographic minimum under the signal order of
:meth:`kcir.signals.CausalSignal.sort_key`, independent of worker count.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Mapping, Optional, Sequence

from .signals import (
    CausalSignal,
    Tick,
    build_prefix_relation,
    enumerate_causal_signals,
    prefix_leq,
)

if TYPE_CHECKING:  # pragma: no cover
    from .circuits import CircuitElement


ChannelId = str


@dataclass(frozen=True, order=True)
class RefPoint:
    """One channel-tagged tick an output depends on."""

    channel: ChannelId
    tick: Tick


@dataclass(frozen=True, order=True)
class ReadSet:
    """A finite set of reference points, stored sorted for structural equality."""

    refs: tuple[RefPoint, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "refs", tuple(sorted(set(self.refs))))

    @classmethod
    def of(cls, *refs: tuple[ChannelId, Tick]) -> "ReadSet":
        return cls(tuple(RefPoint(channel, tick) for channel, tick in refs))

    def max_tick(self) -> Optional[Tick]:
        return max((r.tick for r in self.refs), default=None)

    def __str__(self) -> str:
        inner = ", ".join(f"({r.channel},{r.tick})" for r in self.refs)
        return "{" + inner + "}"


#: A read map sends a control history to the read set it induces, or ``None``
#: when the circuit's output is undefined for that history.
ReadMap = Callable[[CausalSignal], Optional[ReadSet]]

Relation = Sequence[tuple[CausalSignal, CausalSignal]]


def evaluate_reads(
    read_map: ReadMap,
    signals: Iterable[CausalSignal],
    *,
    jobs: int = 1,
) -> dict[CausalSignal, Optional[ReadSet]]:
    """Apply ``read_map`` to every signal, optionally split over worker threads.

    Results are merged in input order, so the mapping is identical for any
    ``jobs`` value.
    """
    signals = list(signals)
    if jobs <= 1 or len(signals) < 2:
        return {s: read_map(s) for s in signals}
    size = -(-len(signals) // jobs)
    chunks = [signals[i : i + size] for i in range(0, len(signals), size)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        chunk_reads = list(pool.map(lambda chunk: [read_map(s) for s in chunk], chunks))
    out: dict[CausalSignal, Optional[ReadSet]] = {}
    for chunk, reads in zip(chunks, chunk_reads):
        out.update(zip(chunk, reads))
    return out


@dataclass(frozen=True)
class DerivedRelation:
    """Image of a signal relation under a read map.

    ``nodes`` is the set of read sets of every defined signal occurring in the
    source relation; ``pairs`` keeps one entry per source pair whose endpoints
    are both defined.  Source pairs touching an undefined read set are dropped
    and counted in ``excluded_undefined``.
    """

    nodes: frozenset[ReadSet]
    pairs: frozenset[tuple[ReadSet, ReadSet]]
    excluded_undefined: int


def derive_relation(
    read_map: ReadMap,
    relation: Relation,
    *,
    reads: Mapping[CausalSignal, Optional[ReadSet]] | None = None,
    jobs: int = 1,
) -> DerivedRelation:
    """Map every pair of ``relation`` through ``read_map``.

    ``reads`` may carry precomputed read sets covering all relation endpoints.
    """
    if reads is None:
        endpoints: dict[CausalSignal, None] = {}
        for a, b in relation:
            endpoints.setdefault(a)
            endpoints.setdefault(b)
        reads = evaluate_reads(read_map, endpoints, jobs=jobs)
    nodes = set()
    pairs = set()
    excluded = 0
    for a, b in relation:
        image_a, image_b = reads[a], reads[b]
        if image_a is None or image_b is None:
            excluded += 1
            continue
        pairs.add((image_a, image_b))
    for a, b in relation:
        for image in (reads[a], reads[b]):
            if image is not None:
                nodes.add(image)
    return DerivedRelation(frozenset(nodes), frozenset(pairs), excluded)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the three partial-order axioms, with witnesses on failure.

    A witness field is populated exactly when its axiom is false, and holds
    the lexicographically smallest counterexample.
    """

    reflexive: bool
    antisymmetric: bool
    transitive: bool
    reflexivity_witness: Optional[ReadSet] = None
    antisymmetry_witness: Optional[tuple[ReadSet, ReadSet]] = None
    transitivity_witness: Optional[tuple[ReadSet, ReadSet, ReadSet]] = None

    @property
    def is_partial_order(self) -> bool:
        return self.reflexive and self.antisymmetric and self.transitive


def check_partial_order(relation: DerivedRelation) -> AxiomReport:
    """Check reflexivity, antisymmetry, and transitivity of a derived relation.

    All three axioms are verified outright; nothing is assumed to hold by
    construction.  Failing witnesses are chosen by scanning nodes and pairs in
    sorted order, so reruns always report the same counterexample.
    """
    nodes = sorted(relation.nodes)
    pairs = sorted(relation.pairs)
    present = relation.pairs

    refl_witness = next((x for x in nodes if (x, x) not in present), None)
    anti_witness = next(
        ((x, y) for x, y in pairs if x != y and (y, x) in present), None
    )

    successors: dict[ReadSet, list[ReadSet]] = {}
    for x, y in pairs:
        successors.setdefault(x, []).append(y)
    trans_witness = None
    for x, y in pairs:
        for z in successors.get(y, ()):
            if (x, z) not in present:
                trans_witness = (x, y, z)
                break
        if trans_witness is not None:
            break

    return AxiomReport(
        reflexive=refl_witness is None,
        antisymmetric=anti_witness is None,
        transitive=trans_witness is None,
        reflexivity_witness=refl_witness,
        antisymmetry_witness=anti_witness,
        transitivity_witness=trans_witness,
    )


@dataclass(frozen=True)
class AntisymmetryWitness:
    """Two prefix-ordered signal pairs whose read sets swap.

    ``a0 <= a1`` and ``b0 <= b1`` under the prefix order, while the read map
    sends a0 and b1 to ``x_reads`` and a1 and b0 to ``y_reads`` with
    ``x_reads != y_reads``.  Any order on read sets that respects both pairs
    would have to order x and y both ways, so no partial order on the image
    can make the read map order-preserving.
    """

    a0: CausalSignal
    a1: CausalSignal
    b0: CausalSignal
    b1: CausalSignal
    x_reads: ReadSet
    y_reads: ReadSet

    def holds(self, read_map: ReadMap) -> bool:
        """Re-evaluate the read map on the stored signals and re-check everything."""
        if not (prefix_leq(self.a0, self.a1) and prefix_leq(self.b0, self.b1)):
            return False
        if self.x_reads == self.y_reads:
            return False
        return (
            read_map(self.a0) == self.x_reads
            and read_map(self.b1) == self.x_reads
            and read_map(self.a1) == self.y_reads
            and read_map(self.b0) == self.y_reads
        )


def find_antisymmetry_witness(
    read_map: ReadMap,
    relation: Relation,
    *,
    reads: Mapping[CausalSignal, Optional[ReadSet]] | None = None,
    jobs: int = 1,
) -> Optional[AntisymmetryWitness]:
    """Search ``relation`` for the smallest antisymmetry witness, if any.

    The result is the minimum of (a0, a1, b0, b1) under the lexicographic
    signal order, which is independent of how the scan is partitioned across
    workers.
    """
    relation = list(relation)
    if reads is None:
        endpoints: dict[CausalSignal, None] = {}
        for a, b in relation:
            endpoints.setdefault(a)
            endpoints.setdefault(b)
        reads = evaluate_reads(read_map, endpoints, jobs=jobs)
    keys = {s: s.sort_key() for s in reads}

    defined = [
        (a, b) for a, b in relation if reads[a] is not None and reads[b] is not None
    ]

    # Smallest source pair per ordered image pair; read-only during the scan.
    best_source: dict[tuple[ReadSet, ReadSet], tuple] = {}
    for a, b in defined:
        image_pair = (reads[a], reads[b])
        cand = (keys[a], keys[b], a, b)
        cur = best_source.get(image_pair)
        if cur is None or cand[:2] < cur[:2]:
            best_source[image_pair] = cand

    def scan(chunk):
        best = None
        for a, b in chunk:
            image_a, image_b = reads[a], reads[b]
            if image_a == image_b:
                continue
            rev = best_source.get((image_b, image_a))
            if rev is None:
                continue
            cand = (keys[a], keys[b], a, b, rev[2], rev[3])
            if best is None or cand[:2] < best[:2]:
                best = cand
        return best

    if jobs <= 1 or len(defined) < 2:
        results = [scan(defined)]
    else:
        size = -(-len(defined) // jobs)
        chunks = [defined[i : i + size] for i in range(0, len(defined), size)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(scan, chunks))

    found = [r for r in results if r is not None]
    if not found:
        return None
    _, _, a0, a1, b0, b1 = min(found, key=lambda r: r[:2])
    return AntisymmetryWitness(a0, a1, b0, b1, reads[a0], reads[a1])


class Verdict(enum.Enum):
    TIME_PRESERVING = "time-preserving"
    NOT_TIME_PRESERVING = "not-time-preserving"
    NOT_FUNDAMENTAL_FORM = "not-fundamental-form"


@dataclass(frozen=True)
class ClassifyStats:
    horizon: int
    signals: int
    relation_pairs: int
    distinct_read_sets: int
    excluded_undefined: int
    degenerate_horizon: bool


@dataclass(frozen=True)
class Classification:
    """Verdict plus the evidence that produced it."""

    verdict: Verdict
    axiom_report: Optional[AxiomReport]
    witness: Optional[AntisymmetryWitness]
    stats: ClassifyStats


def classify(circuit: "CircuitElement", horizon: int, *, jobs: int = 1) -> Classification:
    """Exhaustively classify ``circuit`` over control histories up to ``horizon``.

    A circuit without a read map cannot be split into a controlling and a
    restricted input part, so it is reported as not-fundamental-form without
    enumeration.  Otherwise all control signals up to the horizon are
    enumerated, the prefix relation is pushed through the read map, and the
    partial-order axioms decide the verdict.  An antisymmetry failure always
    comes with a re-checkable witness; a failure of any other axiom is
    reported through the axiom report alone.

    A horizon below 1 admits no clock edges; the verdict is still computed
    but flagged degenerate in the stats.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    degenerate = horizon < 1

    if circuit.reads is None:
        stats = ClassifyStats(horizon, 0, 0, 0, 0, degenerate)
        return Classification(Verdict.NOT_FUNDAMENTAL_FORM, None, None, stats)

    signals = enumerate_causal_signals(circuit.control_alphabet, horizon)
    relation = build_prefix_relation(signals)
    reads = evaluate_reads(circuit.reads, signals, jobs=jobs)
    derived = derive_relation(circuit.reads, relation, reads=reads)
    report = check_partial_order(derived)
    stats = ClassifyStats(
        horizon=horizon,
        signals=len(signals),
        relation_pairs=len(relation),
        distinct_read_sets=len(derived.nodes),
        excluded_undefined=derived.excluded_undefined,
        degenerate_horizon=degenerate,
    )

    if report.is_partial_order:
        return Classification(Verdict.TIME_PRESERVING, report, None, stats)

    witness = None
    if not report.antisymmetric:
        witness = find_antisymmetry_witness(
            circuit.reads, relation, reads=reads, jobs=jobs
        )
        assert witness is not None, "antisymmetry failure must yield a witness"
    return Classification(Verdict.NOT_TIME_PRESERVING, report, witness, stats)
