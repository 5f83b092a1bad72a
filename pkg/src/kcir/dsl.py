"""Text format for circuit descriptions (.kcir files) and its elaborator.

Grammar (comments run from '#' to end of line, whitespace is insignificant,
LF and CRLF both work)::

    file   := "circuit" IDENT "{" clause* "}"
    clause := "kind" KIND ";"
            | "clock" IDENT ("," IDENT)? ";"
            | "state" INT "init" BITS ";"
            | "in" IDENT ";"
            | "next" IDENT "=" expr ";"
            | "out" IDENT "=" expr ";"
            | "domain" IDENT "{" clause* "}"
    expr   := "0" | "1" | IDENT | ("not"|"and"|"or"|"xor") "(" expr ("," expr)* ")"

KIND is one of dff, srlatch, mux, sync, multiclock, abmem.  Identifiers match
``[a-z][a-z0-9_]*``.  Registers are named q0..q(k-1) for ``state k``; the init
bit string lists q0 first.  ``sync`` circuits take exactly one clock and any
number of inputs and outputs; ``multiclock`` circuits consist of exactly two
``domain`` blocks, each shaped like a sync body.  Clause order inside a block
is free.

Parsing is all-or-nothing: the first problem raises :class:`ParseError` with
a source span covering the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import circuits
from .circuits import CircuitElement, SimulationError, SyncSpec
from .signals import Alphabet

KINDS = ("dff", "srlatch", "mux", "sync", "multiclock", "abmem")

_OPERATORS = {"not": (1, 1), "and": (2, None), "or": (2, None), "xor": (2, None)}
_CLAUSE_KEYWORDS = ("kind", "clock", "state", "in", "next", "out", "domain")
_LEGAL_CLAUSES = {
    "dff": {"kind"},
    "srlatch": {"kind"},
    "mux": {"kind"},
    "abmem": {"kind"},
    "sync": {"kind", "clock", "state", "in", "next", "out"},
    "multiclock": {"kind", "domain"},
}
_DOMAIN_CLAUSES = {"clock", "state", "in", "next", "out"}


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token in the source text."""

    line: int
    column: int
    length: int


_NO_SPAN = SourceSpan(1, 1, 1)


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, token_text: str = ""):
        super().__init__(f"line {span.line}, column {span.column}: {message}")
        self.message = message
        self.span = span
        self.token_text = token_text


class ElaborationError(Exception):
    """A structurally valid description that cannot be turned into a circuit."""


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class Lit:
    value: str
    span: SourceSpan = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: SourceSpan = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    op: str
    args: tuple["BoolExpr", ...]
    span: SourceSpan = field(default=_NO_SPAN, compare=False, repr=False)


BoolExpr = Union[Lit, Var, Call]


# ---------------------------------------------------------------------------
# Syntax trees

@dataclass(frozen=True)
class DomainAst:
    name: str
    clock: str
    state_width: int
    init_bits: str
    inputs: tuple[str, ...]
    next_exprs: tuple[tuple[str, BoolExpr], ...]
    outputs: tuple[tuple[str, BoolExpr], ...]


@dataclass(frozen=True)
class CircuitAst:
    name: str
    kind: str
    clocks: tuple[str, ...] = ()
    state_width: Optional[int] = None
    init_bits: Optional[str] = None
    inputs: tuple[str, ...] = ()
    next_exprs: tuple[tuple[str, BoolExpr], ...] = ()
    outputs: tuple[tuple[str, BoolExpr], ...] = ()
    domains: tuple[DomainAst, ...] = ()


# ---------------------------------------------------------------------------
# Lexer

@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "number", "punct", "eof"
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.text)))


_PUNCT = set("{}();,=")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, column = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch in " \t\r":
            column += 1
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                column += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, line, column))
            i += 1
            column += 1
            continue
        if ch.islower() and ch.isalpha() and ch.isascii():
            start, start_col = i, column
            while i < n and (text[i].isascii() and (text[i].islower() or text[i].isdigit() or text[i] == "_")):
                i += 1
                column += 1
            tokens.append(_Token("ident", text[start:i], line, start_col))
            continue
        if ch.isdigit():
            start, start_col = i, column
            while i < n and text[i].isdigit():
                i += 1
                column += 1
            tokens.append(_Token("number", text[start:i], line, start_col))
            continue
        raise ParseError(
            f"unexpected character {ch!r}", SourceSpan(line, column, 1), ch
        )
    tokens.append(_Token("eof", "", line, column))
    return tokens


# ---------------------------------------------------------------------------
# Parser

@dataclass
class _Clause:
    category: str
    keyword: _Token
    names: list[_Token]
    extra: tuple = ()


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def fail(self, message: str, token: _Token):
        span = token.span if token.kind != "eof" else SourceSpan(token.line, max(1, token.column - 1), 1)
        raise ParseError(message, span, token.text or "end of input")

    def expect_punct(self, text: str) -> _Token:
        token = self.peek()
        if token.kind != "punct" or token.text != text:
            self.fail(f"expected {text!r}", token)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> _Token:
        token = self.peek()
        if token.kind != "ident":
            self.fail(f"expected {what}", token)
        return self.advance()

    def expect_keyword(self, word: str) -> _Token:
        token = self.peek()
        if token.kind != "ident" or token.text != word:
            self.fail(f"expected {word!r}", token)
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse_file(self) -> CircuitAst:
        self.expect_keyword("circuit")
        name = self.expect_ident("circuit name")
        self.expect_punct("{")
        clauses = self.parse_clauses(in_domain=False)
        self.expect_punct("}")
        trailing = self.peek()
        if trailing.kind != "eof":
            self.fail("expected end of input", trailing)
        return _assemble_circuit(name, clauses)

    def parse_clauses(self, in_domain: bool) -> list[_Clause]:
        clauses = []
        while True:
            token = self.peek()
            if token.kind == "punct" and token.text == "}":
                return clauses
            if token.kind != "ident" or token.text not in _CLAUSE_KEYWORDS:
                self.fail("expected a clause keyword", token)
            clauses.append(self.parse_clause(self.advance(), in_domain))

    def parse_clause(self, keyword: _Token, in_domain: bool) -> _Clause:
        word = keyword.text
        if word == "kind":
            value = self.expect_ident("circuit kind")
            if value.text not in KINDS:
                self.fail("unknown kind", value)
            self.expect_punct(";")
            return _Clause("kind", keyword, [value])
        if word == "clock":
            names = [self.expect_ident("clock name")]
            if self.peek().kind == "punct" and self.peek().text == ",":
                self.advance()
                names.append(self.expect_ident("clock name"))
            self.expect_punct(";")
            return _Clause("clock", keyword, names)
        if word == "state":
            width = self.peek()
            if width.kind != "number":
                self.fail("expected state width", width)
            self.advance()
            if int(width.text) < 1:
                self.fail("state width must be positive", width)
            self.expect_keyword("init")
            bits = self.peek()
            if bits.kind != "number" or any(c not in "01" for c in bits.text):
                self.fail("init vector must contain only bits", bits)
            self.advance()
            self.expect_punct(";")
            return _Clause("state", keyword, [width, bits])
        if word == "in":
            name = self.expect_ident("input name")
            self.expect_punct(";")
            return _Clause("in", keyword, [name])
        if word in ("next", "out"):
            name = self.expect_ident("target name")
            self.expect_punct("=")
            expr = self.parse_expr()
            self.expect_punct(";")
            return _Clause(word, keyword, [name], (expr,))
        # domain
        if in_domain:
            self.fail("clause 'domain' not allowed inside a domain", keyword)
        name = self.expect_ident("domain name")
        self.expect_punct("{")
        body = self.parse_clauses(in_domain=True)
        self.expect_punct("}")
        return _Clause("domain", keyword, [name], (body,))

    def parse_expr(self) -> BoolExpr:
        token = self.peek()
        if token.kind == "number":
            if token.text not in ("0", "1"):
                self.fail("expected 0 or 1", token)
            self.advance()
            return Lit(token.text, token.span)
        if token.kind != "ident":
            self.fail("expected an expression", token)
        self.advance()
        follow = self.peek()
        if not (follow.kind == "punct" and follow.text == "("):
            return Var(token.text, token.span)
        if token.text not in _OPERATORS:
            self.fail("unknown operator", token)
        self.advance()
        args = [self.parse_expr()]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.advance()
            args.append(self.parse_expr())
        self.expect_punct(")")
        low, high = _OPERATORS[token.text]
        if len(args) < low or (high is not None and len(args) > high):
            self.fail("arity mismatch", token)
        return Call(token.text, tuple(args), token.span)


# ---------------------------------------------------------------------------
# Assembly and validation

def _fail(message: str, token):
    """Raise at a lexer token or an expression node; both carry a span."""
    text = getattr(token, "text", None)
    if text is None:
        text = getattr(token, "name", "")
    raise ParseError(message, token.span, text)


def _single(clauses: list[_Clause], category: str) -> Optional[_Clause]:
    found = [c for c in clauses if c.category == category]
    if len(found) > 1:
        _fail(f"duplicate {category} clause", found[1].keyword)
    return found[0] if found else None


def _check_legal(clauses: list[_Clause], legal: set[str], where: str):
    for clause in clauses:
        if clause.category not in legal:
            _fail(f"clause {clause.category!r} not allowed {where}", clause.keyword)


def _expr_vars(expr: BoolExpr):
    if isinstance(expr, Var):
        yield expr
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from _expr_vars(arg)


def _assemble_sync_body(clauses: list[_Clause], anchor: _Token, what: str):
    """Shared validation for a sync circuit body or a multiclock domain body."""
    clock = _single(clauses, "clock")
    if clock is None:
        _fail(f"{what} requires a clock clause", anchor)
    if len(clock.names) != 1:
        _fail(f"{what} takes a single clock", clock.names[1])
    state = _single(clauses, "state")
    if state is None:
        _fail(f"{what} requires a state clause", anchor)
    width = int(state.names[0].text)
    bits = state.names[1].text

    inputs: list[str] = []
    for clause in clauses:
        if clause.category != "in":
            continue
        name = clause.names[0]
        if name.text in inputs:
            _fail("duplicate input name", name)
        inputs.append(name.text)

    registers = {f"q{i}" for i in range(width)}
    declared = registers | set(inputs)

    nexts: list[tuple[str, BoolExpr]] = []
    for clause in clauses:
        if clause.category != "next":
            continue
        target = clause.names[0]
        if target.text not in registers:
            _fail("undeclared variable", target)
        if any(target.text == seen for seen, _ in nexts):
            _fail("duplicate next clause for register", target)
        nexts.append((target.text, clause.extra[0]))
    for i in range(width):
        if f"q{i}" not in {t for t, _ in nexts}:
            _fail(f"missing next expression for register q{i}", state.names[0])

    outputs: list[tuple[str, BoolExpr]] = []
    for clause in clauses:
        if clause.category != "out":
            continue
        name = clause.names[0]
        if any(name.text == seen for seen, _ in outputs):
            _fail("duplicate out clause", name)
        outputs.append((name.text, clause.extra[0]))
    if not outputs:
        _fail(f"{what} requires at least one out clause", anchor)

    for _, expr in (*nexts, *outputs):
        for var in _expr_vars(expr):
            if var.name not in declared:
                _fail("undeclared variable", var)

    nexts.sort(key=lambda item: int(item[0][1:]))
    return clock.names[0].text, width, bits, tuple(inputs), tuple(nexts), tuple(outputs)


def _assemble_circuit(name: _Token, clauses: list[_Clause]) -> CircuitAst:
    kind_clause = _single(clauses, "kind")
    if kind_clause is None:
        _fail("missing kind clause", name)
    kind = kind_clause.names[0].text
    anchor = kind_clause.names[0]
    _check_legal(clauses, _LEGAL_CLAUSES[kind], f"for kind {kind}")

    if kind in ("dff", "srlatch", "mux", "abmem"):
        return CircuitAst(name.text, kind)

    if kind == "sync":
        clock, width, bits, inputs, nexts, outputs = _assemble_sync_body(
            clauses, anchor, "sync circuit"
        )
        return CircuitAst(
            name.text,
            kind,
            clocks=(clock,),
            state_width=width,
            init_bits=bits,
            inputs=inputs,
            next_exprs=nexts,
            outputs=outputs,
        )

    # multiclock
    domain_clauses = [c for c in clauses if c.category == "domain"]
    if len(domain_clauses) != 2:
        _fail("multiclock circuit requires exactly two domain blocks", anchor)
    domains = []
    seen_names: dict[str, _Token] = {}
    for clause in domain_clauses:
        dom_name = clause.names[0]
        if dom_name.text in seen_names:
            _fail("duplicate domain name", dom_name)
        seen_names[dom_name.text] = dom_name
        body = clause.extra[0]
        _check_legal(body, _DOMAIN_CLAUSES, "inside a domain")
        clock, width, bits, inputs, nexts, outputs = _assemble_sync_body(
            body, dom_name, f"domain {dom_name.text}"
        )
        domains.append(
            DomainAst(dom_name.text, clock, width, bits, inputs, nexts, outputs)
        )
    if domains[0].clock == domains[1].clock:
        _fail("duplicate clock name across domains", domain_clauses[1].names[0])
    overlap = set(domains[0].inputs) & set(domains[1].inputs)
    if overlap:
        _fail("duplicate input name across domains", domain_clauses[1].names[0])
    return CircuitAst(name.text, kind, domains=tuple(domains))


def parse(text: str) -> CircuitAst:
    """Parse one circuit description, raising :class:`ParseError` on any problem."""
    return _Parser(text).parse_file()


# ---------------------------------------------------------------------------
# Pretty-printing

def _format_expr(expr: BoolExpr) -> str:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        return expr.name
    return f"{expr.op}({', '.join(_format_expr(a) for a in expr.args)})"


def _format_body(ast, indent: str) -> list[str]:
    clock = ast.clocks[0] if isinstance(ast, CircuitAst) else ast.clock
    lines = [f"{indent}clock {clock};"]
    lines.append(f"{indent}state {ast.state_width} init {ast.init_bits};")
    for name in ast.inputs:
        lines.append(f"{indent}in {name};")
    for target, expr in ast.next_exprs:
        lines.append(f"{indent}next {target} = {_format_expr(expr)};")
    for name, expr in ast.outputs:
        lines.append(f"{indent}out {name} = {_format_expr(expr)};")
    return lines


def pretty_print(ast: CircuitAst) -> str:
    """Canonical text for an AST; reparsing it yields an equal AST."""
    lines = [f"circuit {ast.name} {{", f"  kind {ast.kind};"]
    if ast.kind == "sync":
        lines.extend(_format_body(ast, "  "))
    elif ast.kind == "multiclock":
        for domain in ast.domains:
            lines.append(f"  domain {domain.name} {{")
            lines.extend(_format_body(domain, "    "))
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Elaboration

def _compile_expr(expr: BoolExpr):
    if isinstance(expr, Lit):
        value = expr.value
        return lambda env: value
    if isinstance(expr, Var):
        name = expr.name
        return lambda env: env[name]
    compiled = [_compile_expr(arg) for arg in expr.args]
    if expr.op == "not":
        inner = compiled[0]
        return lambda env: "1" if inner(env) == "0" else "0"
    if expr.op == "and":
        return lambda env: "1" if all(f(env) == "1" for f in compiled) else "0"
    if expr.op == "or":
        return lambda env: "1" if any(f(env) == "1" for f in compiled) else "0"
    return lambda env: "1" if sum(f(env) == "1" for f in compiled) % 2 else "0"


def _block_spec(width, init_bits, inputs, next_exprs, outputs, where) -> SyncSpec:
    if len(init_bits) != width:
        raise ElaborationError(
            f"{where}: init vector width {len(init_bits)} does not match "
            f"state width {width}"
        )
    declared = {f"q{i}" for i in range(width)} | set(inputs)
    for _, expr in (*next_exprs, *outputs):
        for var in _expr_vars(expr):
            if var.name not in declared:
                raise ElaborationError(f"{where}: undeclared variable {var.name!r}")
    next_fns = [_compile_expr(expr) for _, expr in next_exprs]
    out_fns = [_compile_expr(expr) for _, expr in outputs]
    input_names = tuple(inputs)

    def env_of(state: tuple[str, ...], samples: tuple[str, ...]) -> dict[str, str]:
        env = {f"q{i}": state[i] for i in range(width)}
        for name, value in zip(input_names, samples):
            if value not in ("0", "1"):
                raise SimulationError(f"input {name!r} sample {value!r} is not a bit")
            env[name] = value
        return env

    def step(state: tuple[str, ...], samples: tuple[str, ...]) -> tuple[str, ...]:
        env = env_of(state, samples)
        return tuple(fn(env) for fn in next_fns)

    def out(state: tuple[str, ...], samples: tuple[str, ...]) -> str:
        env = env_of(state, samples)
        return "".join(fn(env) for fn in out_fns)

    return SyncSpec(width, tuple(init_bits), step, out)


def _bitstring_alphabet(count: int) -> Alphabet:
    values = [""]
    for _ in range(count):
        values = [v + bit for v in values for bit in ("0", "1")]
    return Alphabet(tuple(values))


def elaborate(ast: CircuitAst) -> CircuitElement:
    """Instantiate the circuit element a description denotes."""
    if ast.kind == "dff":
        return circuits.dff_element(ast.name)
    if ast.kind == "srlatch":
        return circuits.sr_latch_element(ast.name)
    if ast.kind == "mux":
        return circuits.mux_element(ast.name)
    if ast.kind == "abmem":
        return circuits.abmem_element(ast.name)
    if ast.kind == "sync":
        spec = _block_spec(
            ast.state_width,
            ast.init_bits,
            ast.inputs,
            ast.next_exprs,
            ast.outputs,
            ast.name,
        )
        return circuits.sync_element(
            ast.name,
            spec,
            clock_channel=ast.clocks[0],
            data_channels=ast.inputs,
            output_alphabet=_bitstring_alphabet(len(ast.outputs)),
        )
    # multiclock
    dom_a, dom_b = ast.domains
    spec_a = _block_spec(
        dom_a.state_width, dom_a.init_bits, dom_a.inputs,
        dom_a.next_exprs, dom_a.outputs, f"{ast.name}.{dom_a.name}",
    )
    spec_b = _block_spec(
        dom_b.state_width, dom_b.init_bits, dom_b.inputs,
        dom_b.next_exprs, dom_b.outputs, f"{ast.name}.{dom_b.name}",
    )
    out_a = _bitstring_alphabet(len(dom_a.outputs))
    out_b = _bitstring_alphabet(len(dom_b.outputs))
    element = circuits.multiclock_element(
        ast.name,
        spec_a,
        spec_b,
        clock_channels=(dom_a.clock, dom_b.clock),
        data_channels_a=dom_a.inputs,
        data_channels_b=dom_b.inputs,
    )
    return CircuitElement(
        name=element.name,
        control_channels=element.control_channels,
        control_alphabet=element.control_alphabet,
        input_channels=element.input_channels,
        output_alphabet=Alphabet.product(out_a.values, out_b.values),
        evaluate=element.evaluate,
        reads=element.reads,
    )


def load_circuit(text: str) -> CircuitElement:
    """Parse and elaborate in one step."""
    return elaborate(parse(text))
