from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kcir import (
    BINARY,
    Alphabet,
    Call,
    CircuitAst,
    ElaborationError,
    Lit,
    ParseError,
    Trace,
    Var,
    elaborate,
    output_stream,
    parse,
    pretty_print,
    read_soundness_check,
)

# ---------------------------------------------------------------------------
# Corpora

VALID_CORPUS = [
    "circuit ff { kind dff; }",
    "circuit ff2 {\n  kind dff;\n}\n",
    "# leading comment\ncircuit ff3 { kind dff; } # trailing comment",
    "circuit ff4 {kind dff;}",
    "circuit latch { kind srlatch; }",
    "circuit latch2 { # set/reset\n  kind srlatch;\n}",
    "circuit selector { kind mux; }",
    "circuit mem { kind abmem; }",
    "circuit mem2 {\r\n  kind abmem;\r\n}\r\n",  # CRLF endings
    "circuit c { kind sync; clock clk; state 2 init 00; next q0 = xor(q0, d);"
    " next q1 = xor(q1, and(q0, d)); out y = q1; in d; }",
    "circuit pass_through { kind sync; clock ck; state 1 init 0;"
    " in d; next q0 = d; out y = q0; }",
    "circuit toggle { kind sync; clock ck; state 1 init 1;"
    " next q0 = not(q0); out y = q0; }",
    "circuit wide { kind sync; clock ck; state 3 init 101; in a; in b;"
    " next q0 = and(a, b); next q1 = or(q0, q2); next q2 = xor(q1, q2, a);"
    " out y = q2; }",
    "circuit two_outs { kind sync; clock ck; state 2 init 00; in d;"
    " next q0 = d; next q1 = q0; out hi = q1; out lo = q0; }",
    "circuit literals { kind sync; clock ck; state 1 init 0;"
    " next q0 = or(0, and(1, q0)); out y = 1; }",
    "circuit shuffled { out y = q0; state 1 init 0; next q0 = d;"
    " in d; clock ck; kind sync; }",
    "circuit nested { kind sync; clock ck; state 1 init 0; in d;"
    " next q0 = not(xor(not(d), or(q0, not(q0)))); out y = q0; }",
    "circuit no_inputs { kind sync; clock ck; state 1 init 0;"
    " next q0 = not(q0); out y = q0; }",
    "circuit pair { kind multiclock;"
    " domain fast { clock cf; state 1 init 0; in df; next q0 = not(q0); out y = q0; }"
    " domain slow { clock cs; state 1 init 0; in ds; next q0 = xor(q0, ds); out y = q0; } }",
    "circuit pair2 {\n kind multiclock;\n"
    " domain one { clock c1; state 2 init 10; in a;\n"
    "   next q0 = xor(q0, a); next q1 = q0; out y = and(q0, q1); }\n"
    " domain two { clock c2; state 1 init 0; in b; next q0 = or(q0, b); out z = q0; }\n}",
]

# (text, offending token) pairs; the reported span must cover exactly the token.
INVALID_CORPUS = [
    ("circuit x { kind warp; }", "warp"),
    ("circuit x { kind dff; kind dff; }", "kind"),
    ("circuit x { kind dff; wires 3; }", "wires"),
    ("circuit x { kind sync; clock ck; state 1 init 0;"
     " next q0 = xor(q0, nope); out y = q0; }", "nope"),
    ("circuit x { kind sync; clock ck; state 1 init 0;"
     " next q0 = not(q0, q0); out y = q0; }", "not"),
    ("circuit x { kind sync; clock ck; state 2 init 00; in d;"
     " next q7 = d; next q0 = d; next q1 = d; out y = q0; }", "q7"),
    ("circuit x { kind dff; clock ck; }", "clock"),
    ("circuit x { kind sync; clock ck; state 1 init 0; in d; in d;"
     " next q0 = d; out y = q0; }", "d"),
    ("circuit x { kind sync; clock ck; state 1 init 0;"
     " next q0 = 2; out y = q0; }", "2"),
    ("circuit x { kind dff }", "}"),
]


def find_occurrences(text: str, token: str):
    """All (line, column) positions of ``token``, 1-based, per source line."""
    positions = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        start = 0
        while True:
            col = line.find(token, start)
            if col < 0:
                break
            positions.append((line_no, col + 1))
            start = col + 1
    return positions


class TestParseBasics:
    def test_minimal_dff(self):
        ast = parse("circuit ff { kind dff; }")
        assert ast == CircuitAst("ff", "dff")

    def test_sync_example(self):
        ast = parse(
            "circuit c { kind sync; clock clk; state 2 init 00;"
            " next q0 = xor(q0, d); next q1 = xor(q1, and(q0, d));"
            " out y = q1; in d; }"
        )
        assert ast.kind == "sync"
        assert ast.clocks == ("clk",)
        assert ast.state_width == 2
        assert ast.init_bits == "00"
        assert ast.inputs == ("d",)
        assert ast.next_exprs == (
            ("q0", Call("xor", (Var("q0"), Var("d")))),
            ("q1", Call("xor", (Var("q1"), Call("and", (Var("q0"), Var("d")))))),
        )
        assert ast.outputs == (("y", Var("q1")),)

    def test_unknown_kind_reports_its_token(self):
        with pytest.raises(ParseError) as info:
            parse("circuit x { kind warp; }")
        assert info.value.message == "unknown kind"
        assert info.value.token_text == "warp"

    def test_multiclock_blocks(self):
        ast = parse(VALID_CORPUS[18])
        assert ast.kind == "multiclock"
        assert [d.name for d in ast.domains] == ["fast", "slow"]
        assert ast.domains[0].clock == "cf"
        assert ast.domains[1].inputs == ("ds",)

    def test_leading_zero_init_is_preserved(self):
        ast = parse(
            "circuit z { kind sync; clock ck; state 3 init 001;"
            " next q0 = q1; next q1 = q2; next q2 = q0; out y = q0; }"
        )
        assert ast.init_bits == "001"

    def test_uppercase_is_rejected(self):
        with pytest.raises(ParseError) as info:
            parse("circuit X { kind dff; }")
        assert "unexpected character" in info.value.message

    def test_two_name_clock_clause_parses_but_sync_takes_one(self):
        with pytest.raises(ParseError) as info:
            parse(
                "circuit x { kind sync; clock a, b; state 1 init 0;"
                " next q0 = q0; out y = q0; }"
            )
        assert "single clock" in info.value.message
        assert info.value.token_text == "b"

    def test_missing_kind_is_reported_at_the_circuit_name(self):
        with pytest.raises(ParseError) as info:
            parse("circuit nameless { }")
        assert info.value.message == "missing kind clause"
        assert info.value.token_text == "nameless"

    def test_missing_register_next_is_reported(self):
        with pytest.raises(ParseError) as info:
            parse(
                "circuit x { kind sync; clock ck; state 2 init 00;"
                " next q0 = q1; out y = q0; }"
            )
        assert "missing next expression for register q1" in info.value.message


class TestCorpus:
    @pytest.mark.parametrize("text", VALID_CORPUS)
    def test_round_trip(self, text):
        ast = parse(text)
        printed = pretty_print(ast)
        assert parse(printed) == ast

    def test_corpus_size(self):
        assert len(VALID_CORPUS) >= 20

    @pytest.mark.parametrize("text,token", INVALID_CORPUS)
    def test_invalid_files_report_spans_inside_the_offending_token(self, text, token):
        with pytest.raises(ParseError) as info:
            parse(text)
        span = info.value.span
        positions = find_occurrences(text, token)
        assert any(
            span.line == line
            and span.column >= column
            and span.column + span.length <= column + len(token)
            for line, column in positions
        ), f"span {span} does not sit inside any occurrence of {token!r}"


# Random expression trees over the block's declared names.
_exprs = st.recursive(
    st.one_of(
        st.builds(Lit, st.sampled_from(("0", "1"))),
        st.builds(Var, st.sampled_from(("q0", "q1", "d", "e"))),
    ),
    lambda children: st.one_of(
        st.builds(lambda a: Call("not", (a,)), children),
        st.builds(
            lambda op, a, b: Call(op, (a, b)),
            st.sampled_from(("and", "or", "xor")),
            children,
            children,
        ),
    ),
    max_leaves=10,
)


class TestRoundTripProperty:
    @given(_exprs, _exprs, _exprs, st.sampled_from(("00", "01", "10", "11")))
    def test_generated_sync_asts_round_trip(self, e0, e1, out, init):
        ast = CircuitAst(
            name="gen",
            kind="sync",
            clocks=("ck",),
            state_width=2,
            init_bits=init,
            inputs=("d", "e"),
            next_exprs=(("q0", e0), ("q1", e1)),
            outputs=(("y", out),),
        )
        assert parse(pretty_print(ast)) == ast


class TestElaborate:
    def test_dff_ast_gets_read_map_and_evaluator(self):
        element = elaborate(parse("circuit ff { kind dff; }"))
        assert element.name == "ff"
        assert element.reads is not None
        control = Trace(BINARY, ("0", "1"))
        data = Trace(Alphabet(("x", "y")), ("x", "y"))
        assert output_stream(element, control, {"D": data}) == [None, "y"]

    def test_abmem_ast_uses_pair_control_alphabet(self):
        element = elaborate(parse("circuit m { kind abmem; }"))
        assert element.control_channels == ("W", "R")
        assert "A/-" in element.control_alphabet
        assert len(element.control_alphabet) == 9

    def test_sync_counter_matches_hand_mealy_oracle(self):
        # The xor/and ripple structure increments (q1 q0) at each edge where
        # d is high; the oracle steps that Mealy machine directly.
        element = elaborate(
            parse(
                "circuit c { kind sync; clock clk; state 2 init 00;"
                " next q0 = xor(q0, d); next q1 = xor(q1, and(q0, d));"
                " out y = q1; in d; }"
            )
        )
        rng = random.Random(4)
        for _ in range(60):
            n = rng.randint(1, 10)
            clock = tuple(rng.choice("01") for _ in range(n))
            data = tuple(rng.choice("01") for _ in range(n))
            q0 = q1 = "0"
            expected = []
            for t in range(n):
                if t >= 1 and clock[t - 1 : t + 1] == ("0", "1"):
                    d = data[t]
                    q0, q1 = (
                        "1" if q0 != d else "0",
                        "1" if q1 != ("1" if q0 == d == "1" else "0") else "0",
                    )
                expected.append(q1)
            outputs = output_stream(
                element, Trace(BINARY, clock), {"d": Trace(BINARY, data)}
            )
            assert outputs == expected

    def test_sync_circuit_output_bundles_out_clauses(self):
        element = elaborate(parse(VALID_CORPUS[13]))  # two_outs: hi then lo
        clock = Trace(BINARY, ("0", "1", "0", "1"))
        data = Trace(BINARY, ("1", "1", "0", "0"))
        # q0 samples d at each edge; q1 trails q0 by one edge.
        assert output_stream(element, clock, {"d": data}) == ["00", "01", "01", "10"]

    def test_multiclock_elaboration(self):
        element = elaborate(parse(VALID_CORPUS[18]))
        assert element.control_channels == ("cf", "cs")
        assert element.input_names == ("df", "ds")
        clocks = Trace(element.control_alphabet, ("0/0", "1/0", "0/1"))
        inputs = {
            "df": Trace(BINARY, ("0", "0", "0")),
            "ds": Trace(BINARY, ("1", "1", "1")),
        }
        assert output_stream(element, clocks, inputs) == ["0/0", "1/0", "1/1"]

    def test_init_width_mismatch_is_an_elaboration_error(self):
        ast = CircuitAst(
            name="bad",
            kind="sync",
            clocks=("ck",),
            state_width=2,
            init_bits="000",
            inputs=(),
            next_exprs=(("q0", Lit("0")), ("q1", Lit("0"))),
            outputs=(("y", Var("q0")),),
        )
        with pytest.raises(ElaborationError):
            elaborate(ast)

    def test_hand_built_ast_with_undeclared_variable_is_rejected(self):
        ast = CircuitAst(
            name="bad",
            kind="sync",
            clocks=("ck",),
            state_width=1,
            init_bits="0",
            inputs=(),
            next_exprs=(("q0", Var("ghost")),),
            outputs=(("y", Var("q0")),),
        )
        with pytest.raises(ElaborationError):
            elaborate(ast)

    def test_elaborated_sync_passes_read_soundness(self):
        element = elaborate(parse(VALID_CORPUS[9]))
        report = read_soundness_check(element, horizon=4, trials=300, seed=2)
        assert report.violations == 0
        assert report.mutations > 0
