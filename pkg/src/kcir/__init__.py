"""kcir: finite-horizon causal-stream semantics for sequential circuits.

Circuits are modeled as functions whose output at tick t depends only on
samples at ticks up to t.  Where a control signal (a clock, a select line, an
address stream) determines which input samples matter, the circuit carries a
read map; pushing the prefix order of control histories through that map and
brute-force checking the partial-order axioms classifies the circuit as
time-preserving or not, with concrete witnesses when it is not.
"""

from .circuits import (
    CausalityReport,
    CircuitElement,
    CrossFn,
    MemCell,
    ReadSoundnessReport,
    SimulationError,
    SyncSpec,
    abmem_element,
    abmem_output,
    abmem_reads,
    causality_check,
    component_signal,
    counter_element,
    counter_spec,
    dff_element,
    dff_output,
    dff_reads,
    multiclock_element,
    multiclock_output,
    multiclock_reads,
    mux_element,
    mux_output,
    mux_reads,
    output_stream,
    posedges,
    read_soundness_check,
    sr_latch_element,
    sr_output,
    sync_element,
    sync_output,
    sync_reads,
    toggler_pair_element,
    toggler_spec,
)
from .classifier import (
    AntisymmetryWitness,
    AxiomReport,
    Classification,
    ClassifyStats,
    DerivedRelation,
    ReadMap,
    ReadSet,
    RefPoint,
    Verdict,
    check_partial_order,
    classify,
    derive_relation,
    evaluate_reads,
    find_antisymmetry_witness,
)
from .dsl import (
    BoolExpr,
    Call,
    CircuitAst,
    DomainAst,
    ElaborationError,
    Lit,
    ParseError,
    SourceSpan,
    Var,
    elaborate,
    load_circuit,
    parse,
    pretty_print,
)
from .signals import (
    BINARY,
    Alphabet,
    CausalSignal,
    Tick,
    Trace,
    build_prefix_relation,
    enumerate_causal_signals,
    prefix_leq,
    restrict_trace,
    split_symbol,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AntisymmetryWitness",
    "AxiomReport",
    "BINARY",
    "BoolExpr",
    "Call",
    "CausalSignal",
    "CausalityReport",
    "CircuitAst",
    "CircuitElement",
    "Classification",
    "ClassifyStats",
    "CrossFn",
    "DerivedRelation",
    "DomainAst",
    "ElaborationError",
    "Lit",
    "MemCell",
    "ParseError",
    "ReadMap",
    "ReadSet",
    "ReadSoundnessReport",
    "RefPoint",
    "SimulationError",
    "SourceSpan",
    "SyncSpec",
    "Tick",
    "Trace",
    "Var",
    "Verdict",
    "abmem_element",
    "abmem_output",
    "abmem_reads",
    "build_prefix_relation",
    "causality_check",
    "check_partial_order",
    "classify",
    "component_signal",
    "counter_element",
    "counter_spec",
    "derive_relation",
    "dff_element",
    "dff_output",
    "dff_reads",
    "elaborate",
    "enumerate_causal_signals",
    "evaluate_reads",
    "find_antisymmetry_witness",
    "load_circuit",
    "multiclock_element",
    "multiclock_output",
    "multiclock_reads",
    "mux_element",
    "mux_output",
    "mux_reads",
    "output_stream",
    "parse",
    "posedges",
    "prefix_leq",
    "pretty_print",
    "read_soundness_check",
    "restrict_trace",
    "split_symbol",
    "sr_latch_element",
    "sr_output",
    "sync_element",
    "sync_output",
    "sync_reads",
    "toggler_pair_element",
    "toggler_spec",
]
