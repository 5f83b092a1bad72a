"""Built-in sequential circuit elements: evaluation semantics and read maps.

Each element bundles a control alphabet, named data-input channels, an
evaluator from aligned causal signals to an output value (or ``None`` when
the output is undefined), and, where the circuit admits one, a read map
describing exactly which input samples the evaluator consumes.

Conventions shared by all built-ins:

- clock and bit values are the strings "0" and "1"; a positive edge is a
  0-to-1 transition, so tick 0 is never an edge;
- product-shaped control values (latch set/reset, clock pairs, memory
  write/read addresses) are single '/'-joined symbols;
- an element's data inputs are routed, not interpreted, except where a
  register block feeds them into compiled boolean logic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .classifier import ReadMap, ReadSet, RefPoint
from .signals import (
    BINARY,
    Alphabet,
    CausalSignal,
    Tick,
    Trace,
    restrict_trace,
    split_symbol,
)


class SimulationError(ValueError):
    """Raised when signals fed to an evaluator are malformed for it."""


EvalFn = Callable[[CausalSignal, Mapping[str, CausalSignal]], Optional[str]]


@dataclass(frozen=True)
class CircuitElement:
    """An immutable circuit description usable by simulator and classifier.

    ``control_channels`` names the columns that assemble into one control
    symbol per tick (joined with '/' when there are several).  ``reads`` is
    the element's read map, or ``None`` for circuits whose inputs do not
    restrict one another.
    """

    name: str
    control_channels: tuple[str, ...]
    control_alphabet: Alphabet
    input_channels: tuple[tuple[str, Alphabet], ...]
    output_alphabet: Alphabet
    evaluate: EvalFn
    reads: Optional[ReadMap] = None

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.input_channels)


def _require_aligned(control: CausalSignal, inputs: Sequence[CausalSignal]) -> None:
    if any(sig.t != control.t for sig in inputs):
        raise SimulationError("control and input signals must share the current tick")


def _edge_ticks(samples: Sequence[str]) -> frozenset[Tick]:
    return frozenset(
        u
        for u in range(1, len(samples))
        if samples[u - 1] == "0" and samples[u] == "1"
    )


def posedges(clock: CausalSignal) -> frozenset[Tick]:
    """Ticks at which a binary clock rises; the tick-0 sample is never an edge."""
    for sample in clock.samples:
        if sample not in ("0", "1"):
            raise SimulationError(f"clock sample {sample!r} is not a bit")
    return _edge_ticks(clock.samples)


def component_signal(signal: CausalSignal, index: int, alphabet: Alphabet = BINARY) -> CausalSignal:
    """One component of a signal over a '/'-joined product alphabet."""
    parts = tuple(split_symbol(s)[index] for s in signal.samples)
    return CausalSignal(signal.t, Trace(alphabet, parts))


# ---------------------------------------------------------------------------
# D flip-flop

def dff_reads(control: CausalSignal, channel: str = "D") -> Optional[ReadSet]:
    """The single data sample a flip-flop reads: its latest positive edge.

    Undefined (``None``) while the clock has not risen yet, because the
    flip-flop has latched nothing.
    """
    edges = posedges(control)
    if not edges:
        return None
    return ReadSet.of((channel, max(edges)))


def dff_output(control: CausalSignal, data: CausalSignal) -> Optional[str]:
    """Data value at the latest positive clock edge, or ``None`` before any edge."""
    _require_aligned(control, (data,))
    image = dff_reads(control)
    if image is None:
        return None
    return data.samples[image.refs[0].tick]


def dff_element(name: str = "dff") -> CircuitElement:
    return CircuitElement(
        name=name,
        control_channels=("C",),
        control_alphabet=BINARY,
        input_channels=(("D", BINARY),),
        output_alphabet=BINARY,
        evaluate=lambda control, inputs: dff_output(control, inputs["D"]),
        reads=dff_reads,
    )


# ---------------------------------------------------------------------------
# SR latch

def sr_output(set_signal: CausalSignal, reset_signal: CausalSignal) -> Optional[str]:
    """Level-sensitive set/reset latch; (0,0) holds the previous output.

    Undefined until the first tick whose inputs are not (0,0), since no
    previous output exists to hold.
    """
    if set_signal.t != reset_signal.t:
        raise SimulationError("set and reset signals must share the current tick")
    q: Optional[str] = None
    for s, r in zip(set_signal.samples, reset_signal.samples):
        if (s, r) == ("1", "0"):
            q = "1"
        elif (s, r) in (("0", "1"), ("1", "1")):
            q = "0"
        elif (s, r) != ("0", "0"):
            raise SimulationError(f"latch inputs ({s!r}, {r!r}) are not bits")
    return q


def sr_latch_element(name: str = "srlatch") -> CircuitElement:
    # Neither input restricts the other, so the latch exposes no read map.
    def evaluate(control: CausalSignal, inputs: Mapping[str, CausalSignal]) -> Optional[str]:
        return sr_output(component_signal(control, 0), component_signal(control, 1))

    return CircuitElement(
        name=name,
        control_channels=("S", "R"),
        control_alphabet=Alphabet.product(("0", "1"), ("0", "1")),
        input_channels=(),
        output_alphabet=BINARY,
        evaluate=evaluate,
        reads=None,
    )


# ---------------------------------------------------------------------------
# Multiplexer

def mux_output(select: str, a_value: str, b_value: str) -> str:
    """Route one of two current inputs according to the select value."""
    if select == "a":
        return a_value
    if select == "b":
        return b_value
    raise SimulationError(f"select value {select!r} is not 'a' or 'b'")


def mux_reads(control: CausalSignal) -> ReadSet:
    """The selected channel at the current tick; the other channel is never read."""
    channel = "A" if control.samples[control.t] == "a" else "B"
    return ReadSet.of((channel, control.t))


def mux_element(name: str = "mux") -> CircuitElement:
    def evaluate(control: CausalSignal, inputs: Mapping[str, CausalSignal]) -> str:
        t = control.t
        _require_aligned(control, (inputs["A"], inputs["B"]))
        return mux_output(
            control.samples[t], inputs["A"].samples[t], inputs["B"].samples[t]
        )

    return CircuitElement(
        name=name,
        control_channels=("S",),
        control_alphabet=Alphabet(("a", "b")),
        input_channels=(("A", BINARY), ("B", BINARY)),
        output_alphabet=BINARY,
        evaluate=evaluate,
        reads=mux_reads,
    )


# ---------------------------------------------------------------------------
# Clocked register blocks (synchronous composites)

@dataclass(frozen=True)
class SyncSpec:
    """A clocked register block: registers plus combinational next/output logic.

    ``next_state`` maps (state vector, input samples at the edge) to the next
    state vector; ``output_fn`` maps (state vector, current input samples) to
    the output value.  Both must be total over their finite domains.
    """

    register_count: int
    initial_state: tuple[str, ...]
    next_state: Callable[[tuple[str, ...], tuple[str, ...]], tuple[str, ...]]
    output_fn: Callable[[tuple[str, ...], tuple[str, ...]], str]

    def __post_init__(self) -> None:
        if self.register_count < 1:
            raise ValueError("a register block needs at least one register")
        if len(self.initial_state) != self.register_count:
            raise ValueError(
                f"initial state width {len(self.initial_state)} does not match "
                f"register count {self.register_count}"
            )


def sync_reads(control: CausalSignal, channels: Sequence[str] = ("D",)) -> ReadSet:
    """Samples a register block reads: every past edge plus the current tick.

    Registers latch inputs at each positive edge and the output logic sees the
    current input, so the read set is the edge ticks together with ``t`` on
    every data channel.  With no edges it degenerates to the current tick.
    """
    edges = posedges(control)
    refs = [RefPoint(c, u) for c in channels for u in edges]
    refs += [RefPoint(c, control.t) for c in channels]
    return ReadSet(tuple(refs))


def sync_output(
    spec: SyncSpec, control: CausalSignal, inputs: Sequence[CausalSignal]
) -> str:
    """Run the register block over all edges of ``control`` and emit the output."""
    _require_aligned(control, inputs)
    state = spec.initial_state
    for u in sorted(posedges(control)):
        state = spec.next_state(state, tuple(sig.samples[u] for sig in inputs))
    return spec.output_fn(state, tuple(sig.samples[control.t] for sig in inputs))


def sync_element(
    name: str,
    spec: SyncSpec,
    *,
    clock_channel: str = "C",
    data_channels: Sequence[str] = ("D",),
    data_alphabets: Sequence[Alphabet] | None = None,
    output_alphabet: Alphabet = BINARY,
) -> CircuitElement:
    data_channels = tuple(data_channels)
    if data_alphabets is None:
        data_alphabets = tuple(BINARY for _ in data_channels)

    def evaluate(control: CausalSignal, inputs: Mapping[str, CausalSignal]) -> str:
        return sync_output(spec, control, tuple(inputs[c] for c in data_channels))

    return CircuitElement(
        name=name,
        control_channels=(clock_channel,),
        control_alphabet=BINARY,
        input_channels=tuple(zip(data_channels, data_alphabets)),
        output_alphabet=output_alphabet,
        evaluate=evaluate,
        reads=lambda control: sync_reads(control, data_channels),
    )


def _state_value(state: tuple[str, ...]) -> int:
    return sum(1 << i for i, bit in enumerate(state) if bit == "1")


def _state_bits(value: int, width: int) -> tuple[str, ...]:
    return tuple("1" if value >> i & 1 else "0" for i in range(width))


def counter_spec(bits: int = 2) -> SyncSpec:
    """An edge counter modulo ``2 ** bits``; data inputs are ignored."""
    size = 1 << bits

    def step(state: tuple[str, ...], _inputs: tuple[str, ...]) -> tuple[str, ...]:
        return _state_bits((_state_value(state) + 1) % size, bits)

    def out(state: tuple[str, ...], _inputs: tuple[str, ...]) -> str:
        return str(_state_value(state))

    return SyncSpec(bits, ("0",) * bits, step, out)


def counter_element(name: str = "counter", bits: int = 2) -> CircuitElement:
    return sync_element(
        name,
        counter_spec(bits),
        output_alphabet=Alphabet(tuple(str(i) for i in range(1 << bits))),
    )


def toggler_spec() -> SyncSpec:
    """A single register that flips on every edge."""
    return SyncSpec(
        1,
        ("0",),
        lambda state, _inputs: ("1" if state[0] == "0" else "0",),
        lambda state, _inputs: state[0],
    )


# ---------------------------------------------------------------------------
# Two clock domains

CrossFn = Callable[[tuple[str, ...], tuple[str, ...], tuple[str, ...]], tuple[str, ...]]


def multiclock_reads(
    control: CausalSignal,
    channels_a: Sequence[str] = ("D1",),
    channels_b: Sequence[str] = ("D2",),
) -> ReadSet:
    """Per-domain edge ticks plus the current tick on every data channel."""
    edges_a = _edge_ticks([split_symbol(s)[0] for s in control.samples])
    edges_b = _edge_ticks([split_symbol(s)[1] for s in control.samples])
    refs = [RefPoint(c, u) for c in channels_a for u in edges_a]
    refs += [RefPoint(c, u) for c in channels_b for u in edges_b]
    refs += [RefPoint(c, control.t) for c in (*channels_a, *channels_b)]
    return ReadSet(tuple(refs))


def multiclock_output(
    spec_a: SyncSpec,
    spec_b: SyncSpec,
    control: CausalSignal,
    inputs_a: Sequence[CausalSignal],
    inputs_b: Sequence[CausalSignal],
    *,
    cross_a: CrossFn | None = None,
    cross_b: CrossFn | None = None,
) -> tuple[str, str]:
    """Run two register blocks against the two clocks of a paired control signal.

    Updates are two-phase: when both clocks rise on the same tick, each
    domain's next state is computed from the other domain's state as it stood
    before the edge.  ``cross_a``/``cross_b`` replace a domain's plain
    ``next_state`` with one that also receives the other domain's pre-edge
    state.
    """
    _require_aligned(control, (*inputs_a, *inputs_b))
    clock_a = [split_symbol(s)[0] for s in control.samples]
    clock_b = [split_symbol(s)[1] for s in control.samples]
    state_a, state_b = spec_a.initial_state, spec_b.initial_state
    for u in range(1, control.t + 1):
        rise_a = clock_a[u - 1] == "0" and clock_a[u] == "1"
        rise_b = clock_b[u - 1] == "0" and clock_b[u] == "1"
        pre_a, pre_b = state_a, state_b
        if rise_a:
            samples = tuple(sig.samples[u] for sig in inputs_a)
            state_a = (
                cross_a(pre_a, samples, pre_b)
                if cross_a is not None
                else spec_a.next_state(pre_a, samples)
            )
        if rise_b:
            samples = tuple(sig.samples[u] for sig in inputs_b)
            state_b = (
                cross_b(pre_b, samples, pre_a)
                if cross_b is not None
                else spec_b.next_state(pre_b, samples)
            )
    t = control.t
    out_a = spec_a.output_fn(state_a, tuple(sig.samples[t] for sig in inputs_a))
    out_b = spec_b.output_fn(state_b, tuple(sig.samples[t] for sig in inputs_b))
    return out_a, out_b


def multiclock_element(
    name: str,
    spec_a: SyncSpec,
    spec_b: SyncSpec,
    *,
    clock_channels: tuple[str, str] = ("C1", "C2"),
    data_channels_a: Sequence[str] = ("D1",),
    data_channels_b: Sequence[str] = ("D2",),
    cross_a: CrossFn | None = None,
    cross_b: CrossFn | None = None,
) -> CircuitElement:
    data_channels_a = tuple(data_channels_a)
    data_channels_b = tuple(data_channels_b)

    def evaluate(control: CausalSignal, inputs: Mapping[str, CausalSignal]) -> str:
        out_a, out_b = multiclock_output(
            spec_a,
            spec_b,
            control,
            tuple(inputs[c] for c in data_channels_a),
            tuple(inputs[c] for c in data_channels_b),
            cross_a=cross_a,
            cross_b=cross_b,
        )
        return f"{out_a}/{out_b}"

    channels = tuple((c, BINARY) for c in (*data_channels_a, *data_channels_b))
    return CircuitElement(
        name=name,
        control_channels=clock_channels,
        control_alphabet=Alphabet.product(("0", "1"), ("0", "1")),
        input_channels=channels,
        output_alphabet=Alphabet.product(("0", "1"), ("0", "1")),
        evaluate=evaluate,
        reads=lambda control: multiclock_reads(control, data_channels_a, data_channels_b),
    )


def toggler_pair_element(name: str = "twoclock") -> CircuitElement:
    """Two independent one-register togglers on separate clocks."""
    return multiclock_element(name, toggler_spec(), toggler_spec())


# ---------------------------------------------------------------------------
# Two-address read/write memory

_ADDRESSES = ("A", "B")
_IDLE = "-"


@dataclass
class MemCell:
    """One memory cell; empty until its address is first written."""

    address: str
    content: Optional[tuple[str, Tick]] = None  # (value, last write tick)

    def write(self, value: str, tick: Tick) -> None:
        self.content = (value, tick)


def abmem_reads(control: CausalSignal, channel: str = "D") -> Optional[ReadSet]:
    """The data sample last written to the address read at the current tick.

    Control symbols pair a write address and a read address per tick, either
    of which may be idle ('-').  A same-tick write is visible to a same-tick
    read.  Undefined when nothing is read or the read address was never
    written.
    """
    writes = []
    read_addr = None
    for u, symbol in enumerate(control.samples):
        parts = split_symbol(symbol)
        if len(parts) != 2:
            raise SimulationError(f"memory control symbol {symbol!r} is not a pair")
        writes.append(parts[0])
        if u == control.t:
            read_addr = parts[1]
    if read_addr == _IDLE or read_addr not in _ADDRESSES:
        return None
    hits = [u for u, addr in enumerate(writes) if addr == read_addr]
    if not hits:
        return None
    return ReadSet.of((channel, hits[-1]))


def abmem_output(control: CausalSignal, data: CausalSignal) -> Optional[str]:
    """Value stored at the read address, or ``None`` if the read is undefined.

    Simulated over actual cell state rather than through the read map, so the
    randomized soundness check compares two independent routes.
    """
    _require_aligned(control, (data,))
    cells = {addr: MemCell(addr) for addr in _ADDRESSES}
    read_addr = None
    for u, symbol in enumerate(control.samples):
        parts = split_symbol(symbol)
        if len(parts) != 2:
            raise SimulationError(f"memory control symbol {symbol!r} is not a pair")
        write_addr = parts[0]
        if write_addr in cells:
            cells[write_addr].write(data.samples[u], u)
        if u == control.t:
            read_addr = parts[1]
    if read_addr not in cells or cells[read_addr].content is None:
        return None
    return cells[read_addr].content[0]


def abmem_element(name: str = "abmem") -> CircuitElement:
    addresses = (*_ADDRESSES, _IDLE)
    return CircuitElement(
        name=name,
        control_channels=("W", "R"),
        control_alphabet=Alphabet.product(addresses, addresses),
        input_channels=(("D", BINARY),),
        output_alphabet=BINARY,
        evaluate=lambda control, inputs: abmem_output(control, inputs["D"]),
        reads=abmem_reads,
    )


# ---------------------------------------------------------------------------
# Stream construction and randomized property checks

def output_stream(
    element: CircuitElement,
    control: Trace,
    inputs: Mapping[str, Trace],
) -> list[Optional[str]]:
    """Per-tick outputs over whole traces; entry ``t`` comes from the prefixes at ``t``."""
    names = element.input_names
    if set(inputs) != set(names):
        raise SimulationError(
            f"input channels {sorted(inputs)} do not match {sorted(names)}"
        )
    lengths = {len(control), *(len(trace) for trace in inputs.values())}
    if len(lengths) != 1:
        raise SimulationError("control and input traces must have equal length")
    if len(control) == 0:
        raise SimulationError("traces must cover at least tick 0")
    outputs = []
    for t in range(len(control)):
        control_sig = CausalSignal(t, restrict_trace(control, t))
        input_sigs = {
            name: CausalSignal(t, restrict_trace(inputs[name], t)) for name in names
        }
        outputs.append(element.evaluate(control_sig, input_sigs))
    return outputs


def _random_trace(rng: random.Random, alphabet: Alphabet, length: int) -> Trace:
    return Trace(alphabet, tuple(rng.choice(alphabet.values) for _ in range(length)))


@dataclass(frozen=True)
class ReadSoundnessReport:
    trials: int
    mutations: int
    undefined: int
    unmutable: int
    violations: int


def read_soundness_check(
    element: CircuitElement, horizon: int, trials: int, seed: int
) -> ReadSoundnessReport:
    """Mutate input samples outside the read set; the output must not move.

    Each trial draws random control and input traces, picks a tick, and flips
    one input sample at a position the read map does not claim.  Trials whose
    read set is undefined, or where every position up to ``t`` is claimed,
    are counted but not mutated.
    """
    if element.reads is None:
        raise ValueError(f"circuit {element.name!r} has no read map")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    rng = random.Random(seed)
    mutations = undefined = unmutable = violations = 0
    for _ in range(trials):
        control = _random_trace(rng, element.control_alphabet, horizon + 1)
        input_traces = {
            name: _random_trace(rng, alphabet, horizon + 1)
            for name, alphabet in element.input_channels
        }
        t = rng.randint(0, horizon)
        control_sig = CausalSignal(t, restrict_trace(control, t))
        image = element.reads(control_sig)
        if image is None:
            undefined += 1
            continue
        claimed = {(ref.channel, ref.tick) for ref in image.refs}
        free = [
            (name, u, alphabet)
            for name, alphabet in element.input_channels
            for u in range(t + 1)
            if (name, u) not in claimed and len(alphabet) > 1
        ]
        if not free:
            unmutable += 1
            continue
        input_sigs = {
            name: CausalSignal(t, restrict_trace(trace, t))
            for name, trace in input_traces.items()
        }
        baseline = element.evaluate(control_sig, input_sigs)
        name, u, alphabet = free[rng.randrange(len(free))]
        old = input_sigs[name].samples[u]
        new = rng.choice([v for v in alphabet.values if v != old])
        mutated_samples = list(input_sigs[name].samples)
        mutated_samples[u] = new
        mutated = dict(input_sigs)
        mutated[name] = CausalSignal.from_samples(alphabet, mutated_samples)
        mutations += 1
        if element.evaluate(control_sig, mutated) != baseline:
            violations += 1
    return ReadSoundnessReport(trials, mutations, undefined, unmutable, violations)


@dataclass(frozen=True)
class CausalityReport:
    trials: int
    mutations: int
    violations: int


def causality_check(
    element: CircuitElement, horizon: int, trials: int, seed: int
) -> CausalityReport:
    """Mutate a sample at some tick m; outputs strictly before m must not move."""
    if horizon < 1:
        raise ValueError("causality needs a horizon of at least 1")
    rng = random.Random(seed)
    mutations = violations = 0
    for _ in range(trials):
        control = _random_trace(rng, element.control_alphabet, horizon + 1)
        input_traces = {
            name: _random_trace(rng, alphabet, horizon + 1)
            for name, alphabet in element.input_channels
        }
        before = output_stream(element, control, input_traces)
        m = rng.randint(1, horizon)
        pick = rng.randrange(len(element.input_channels) + 1)
        if pick == 0:
            alphabet = element.control_alphabet
            samples = list(control.samples)
            samples[m] = rng.choice([v for v in alphabet.values if v != samples[m]])
            control2 = Trace(alphabet, tuple(samples))
            inputs2 = input_traces
        else:
            name, alphabet = element.input_channels[pick - 1]
            samples = list(input_traces[name].samples)
            samples[m] = rng.choice([v for v in alphabet.values if v != samples[m]])
            control2 = control
            inputs2 = dict(input_traces)
            inputs2[name] = Trace(alphabet, tuple(samples))
        after = output_stream(element, control2, inputs2)
        mutations += 1
        if before[:m] != after[:m]:
            violations += 1
    return CausalityReport(trials, mutations, violations)
