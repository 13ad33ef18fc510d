"""Parser, validator and canonical printer for ``.qcp`` protocol files.

Example::

    protocol superdense {
      n 2;
      epr 1;
      alice {
        if x[0] apply X on [ea[0]];
        if x[1] apply Z on [ea[0]];
        send [ea[0]];
      }
      bob {
        apply CNOT on [ea[0], eb[0]];
        apply H on [ea[0]];
      }
      outputs [eb[0], ea[0]];
    }

``epr E`` (or ``schmidt [l0, l1, ...]`` with 2^E coefficients) implicitly
declares Alice's register ``ea[E]`` and Bob's ``eb[E]``. Further registers are
declared with ``alice reg NAME[SIZE];`` / ``bob reg NAME[SIZE];``. Gates are
I X Y Z H S T CNOT SWAP or ``mat k [a+bi, ...]`` (row-major, 4^k entries).
``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import gates as G
from . import linalg
from .config import TOL
from .model import ALICE, BOB, Gate, MessageGate, Protocol, ProtocolError, Register, Round

KEYWORDS = {"protocol", "n", "epr", "schmidt", "alice", "bob", "reg", "if", "x",
            "apply", "on", "send", "outputs", "mat"}

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(rf"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?{_NUM}(?:[+-]{_NUM}i|i)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{{}}\[\];,])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str, token: str = ""):
        super().__init__(f"{line}:{column}: {message}" + (f" (at {token!r})" if token else ""))
        self.line = line
        self.column = column
        self.message = message
        self.token = token


class ValidationError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> Iterator[Token]:
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(line, col, "unexpected character", text[i])
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                yield Token(kind, m.group(), line, col)
            col += m.end() - m.start()
        i = m.end()
    yield Token("eof", "", line, col)


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class QRef:
    reg: str
    index: int
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GateSpec:
    name: str
    k: int | None = None
    entries: tuple[complex, ...] | None = None


@dataclass(frozen=True)
class Apply:
    gate: GateSpec
    targets: tuple[QRef, ...]
    control: int | None = None
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Send:
    targets: tuple[QRef, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RoundAst:
    actor: str
    stmts: tuple
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RegDecl:
    owner: str
    name: str
    size: int


@dataclass(frozen=True)
class ProtocolAst:
    name: str
    n: int
    epr: int | None
    schmidt: tuple[float, ...] | None
    regs: tuple[RegDecl, ...]
    rounds: tuple[RoundAst, ...]
    outputs: tuple[QRef, ...]

    @property
    def E(self) -> int:
        if self.epr is not None:
            return self.epr
        return max(len(self.schmidt) - 1, 0).bit_length()


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = list(tokenize(text))
        self.i = 0
        self.sizes: dict[str, int] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(tok.line, tok.column, msg, tok.text)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("ident", "punct"):
            self.fail(f"expected {text!r}")
        return self.next()

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("ident", "punct")

    def integer(self) -> int:
        if self.tok.kind != "number" or not self.tok.text.isdigit():
            self.fail("expected a non-negative integer")
        return int(self.next().text)

    def real(self) -> float:
        if self.tok.kind != "number" or self.tok.text.endswith("i"):
            self.fail("expected a real number")
        return float(self.next().text)

    def complex_(self) -> complex:
        if self.tok.kind != "number":
            self.fail("expected a complex number")
        return parse_complex(self.next().text)

    def name(self) -> Token:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            self.fail("expected a name")
        return self.next()

    def protocol(self) -> ProtocolAst:
        self.expect("protocol")
        name = self.name().text
        self.expect("{")
        self.expect("n")
        n = self.integer()
        self.expect(";")
        epr = schmidt = None
        if self.at("epr"):
            self.next()
            epr = self.integer()
        elif self.at("schmidt"):
            self.next()
            self.expect("[")
            vals = [self.real()]
            while self.at(","):
                self.next()
                vals.append(self.real())
            self.expect("]")
            schmidt = tuple(vals)
        else:
            self.fail("expected 'epr' or 'schmidt'")
        self.expect(";")
        E = epr if epr is not None else max(len(schmidt) - 1, 0).bit_length()
        if E:
            self.sizes = {"ea": E, "eb": E}
        regs = []
        while (self.at("alice") or self.at("bob")) and self.toks[self.i + 1].text == "reg":
            owner = self.next().text
            self.next()
            tok = self.name()
            if tok.text in self.sizes:
                self.fail(f"duplicate declaration of register {tok.text!r}", tok)
            self.expect("[")
            size = self.integer()
            self.expect("]")
            self.expect(";")
            self.sizes[tok.text] = size
            regs.append(RegDecl(owner, tok.text, size))
        rounds = []
        while self.at("alice") or self.at("bob"):
            rounds.append(self.round())
        self.expect("outputs")
        outputs = self.qlist()
        self.expect(";")
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("trailing input after protocol")
        return ProtocolAst(name, n, epr, schmidt, tuple(regs), tuple(rounds), outputs)

    def round(self) -> RoundAst:
        head = self.next()
        self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.stmt())
        self.next()
        return RoundAst(head.text, tuple(stmts), head.line, head.column)

    def stmt(self):
        start = self.tok
        if self.at("send"):
            self.next()
            targets = self.qlist()
            self.expect(";")
            return Send(targets, start.line, start.column)
        control = None
        if self.at("if"):
            self.next()
            self.expect("x")
            self.expect("[")
            control = self.integer()
            self.expect("]")
        if not self.at("apply"):
            self.fail("expected 'apply', 'if', 'send' or '}'")
        self.next()
        gate = self.gate()
        self.expect("on")
        targets = self.qlist()
        self.expect(";")
        return Apply(gate, targets, control, start.line, start.column)

    def gate(self) -> GateSpec:
        tok = self.tok
        if self.at("mat"):
            self.next()
            k = self.integer()
            self.expect("[")
            entries = [self.complex_()]
            while self.at(","):
                self.next()
                entries.append(self.complex_())
            if len(entries) != 4 ** k:
                self.fail(f"'mat {k}' needs {4 ** k} entries, got {len(entries)}")
            self.expect("]")
            return GateSpec("mat", k, tuple(entries))
        if tok.kind == "ident" and tok.text in G.NAMED:
            self.next()
            return GateSpec(tok.text)
        self.fail("unknown gate")

    def qlist(self) -> tuple[QRef, ...]:
        self.expect("[")
        refs = []
        if not self.at("]"):
            refs.append(self.qref())
            while self.at(","):
                self.next()
                refs.append(self.qref())
        self.expect("]")
        return tuple(refs)

    def qref(self) -> QRef:
        tok = self.name()
        if tok.text not in self.sizes:
            self.fail(f"undeclared register {tok.text!r}", tok)
        self.expect("[")
        itok = self.tok
        idx = self.integer()
        if idx >= self.sizes[tok.text]:
            self.fail(f"index {idx} out of range for {tok.text}[{self.sizes[tok.text]}]", itok)
        self.expect("]")
        return QRef(tok.text, idx, tok.line, tok.column)


def parse_complex(text: str) -> complex:
    if text.endswith("i"):
        return complex(text[:-1] + "j")
    return complex(float(text))


def parse(text: str) -> ProtocolAst:
    return _Parser(text).protocol()


# --- validation ------------------------------------------------------------

def _gate_matrix(g: GateSpec) -> np.ndarray:
    if g.name == "mat":
        d = 1 << g.k
        return np.array(g.entries, dtype=complex).reshape(d, d)
    return G.NAMED[g.name]


def validate(ast: ProtocolAst) -> Protocol:
    """Check the communication-model rules and build the executable protocol."""
    if ast.epr is not None:
        lam = np.full(1 << ast.epr, 2.0 ** -ast.epr)
    else:
        lam = np.array(ast.schmidt, dtype=float)
        if lam.size & (lam.size - 1):
            raise ValidationError(f"{lam.size} Schmidt coefficients; need a power of two")
        if np.any(lam < 0):
            raise ValidationError("Schmidt coefficients must be non-negative")
        if abs(lam.sum() - 1) > TOL.norm:
            raise ValidationError(f"Schmidt coefficients sum to {lam.sum():.12g}, not 1")
    out_regs = {t.reg for t in ast.outputs}
    regs = tuple(Register(r.name, r.owner, r.size, "output" if r.name in out_regs else "work")
                 for r in ast.regs)
    try:
        p = Protocol(ast.name, ast.n, lam, regs)
    except ProtocolError as e:
        raise ValidationError(str(e)) from None

    def q(ref: QRef) -> int:
        return p.qubit(ref.reg, ref.index)

    owners = list(p.initial_ledger().owners)
    rounds = []
    for r in ast.rounds:
        gl, send = [], []
        for st in r.stmts:
            idx = [q(t) for t in st.targets]
            if len(set(idx)) != len(idx):
                raise ValidationError("repeated qubit in one statement", st.line, st.column)
            for t, k in zip(st.targets, idx):
                if owners[k] != r.actor:
                    verb = "send" if isinstance(st, Send) else "gate on"
                    raise ValidationError(
                        f"{verb} non-owned qubit {t.reg}[{t.index}] by {r.actor}",
                        t.line, t.column)
            if isinstance(st, Send):
                send += idx
                for k in idx:
                    owners[k] = BOB if r.actor == ALICE else ALICE
                continue
            if st.control is not None:
                if r.actor == BOB:
                    raise ValidationError("input-conditioned gate by Bob", st.line, st.column)
                if st.control >= ast.n:
                    raise ValidationError(f"x[{st.control}] outside an {ast.n}-bit message",
                                          st.line, st.column)
            u = _gate_matrix(st.gate)
            if u.shape[0] != 1 << len(idx):
                raise ValidationError(
                    f"gate {st.gate.name} acts on {linalg.num_qubits(u.shape[0])} qubits, "
                    f"{len(idx)} given", st.line, st.column)
            if not linalg.is_unitary(u):
                raise ValidationError("non-unitary matrix literal", st.line, st.column)
            gl.append(Gate(u, tuple(idx), st.control,
                           None if st.gate.name == "mat" else st.gate.name))
        rounds.append(Round(r.actor, tuple(gl), tuple(send)))
    outs = [q(t) for t in ast.outputs]
    if len(set(outs)) != len(outs):
        raise ValidationError("repeated output qubit")
    for t, k in zip(ast.outputs, outs):
        if owners[k] != BOB:
            raise ValidationError(f"output qubit {t.reg}[{t.index}] is not held by Bob",
                                  t.line, t.column)
    return Protocol(ast.name, ast.n, lam, regs, tuple(rounds), tuple(outs))


def load(text: str) -> Protocol:
    return validate(parse(text))


# --- printing --------------------------------------------------------------

def format_real(v: float) -> str:
    return repr(float(v))


def format_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    if im == 0:
        return format_real(re_)
    if re_ == 0:
        return format_real(im) + "i"
    sign = "-" if im < 0 or (im == 0 and str(im).startswith("-")) else "+"
    return f"{format_real(re_)}{sign}{format_real(abs(im))}i"


def _qlist(refs) -> str:
    return "[" + ", ".join(f"{r.reg}[{r.index}]" for r in refs) + "]"


def format_ast(ast: ProtocolAst) -> str:
    out = [f"protocol {ast.name} {{", f"  n {ast.n};"]
    if ast.epr is not None:
        out.append(f"  epr {ast.epr};")
    else:
        out.append("  schmidt [" + ", ".join(format_real(v) for v in ast.schmidt) + "];")
    for r in ast.regs:
        out.append(f"  {r.owner} reg {r.name}[{r.size}];")
    for r in ast.rounds:
        out.append(f"  {r.actor} {{")
        for st in r.stmts:
            if isinstance(st, Send):
                out.append(f"    send {_qlist(st.targets)};")
                continue
            g = st.gate.name
            if g == "mat":
                g = f"mat {st.gate.k} [" + ", ".join(format_complex(z) for z in st.gate.entries) + "]"
            cond = f"if x[{st.control}] " if st.control is not None else ""
            out.append(f"    {cond}apply {g} on {_qlist(st.targets)};")
        out.append("  }")
    out.append(f"  outputs {_qlist(ast.outputs)};")
    out.append("}")
    return "\n".join(out) + "\n"


def to_ast(p: Protocol) -> ProtocolAst:
    """Protocol back to syntax; gates that match a named gate print by name."""
    names = []
    for r in p.layout:
        names += [(r.name, i) for i in range(r.size)]

    def refs(qs):
        return tuple(QRef(*names[q]) for q in qs)

    uniform = bool(np.all(p.schmidt == 2.0 ** -p.E))
    rounds = []
    for r in p.rounds:
        stmts = []
        for g in r.gates:
            if isinstance(g, MessageGate):
                raise ValueError("message-indexed gates have no .qcp syntax")
            if g.name in G.NAMED and np.array_equal(g.matrix, G.NAMED[g.name]):
                spec = GateSpec(g.name)
            else:
                k = linalg.num_qubits(g.matrix.shape[0])
                spec = GateSpec("mat", k, tuple(complex(z) for z in g.matrix.reshape(-1)))
            stmts.append(Apply(spec, refs(g.targets), g.control))
        if r.send:
            stmts.append(Send(refs(r.send)))
        rounds.append(RoundAst(r.actor, tuple(stmts)))
    regs = tuple(RegDecl(r.owner, r.name, r.size) for r in p.registers)
    return ProtocolAst(p.name, p.n, p.E if uniform else None,
                       None if uniform else tuple(float(v) for v in p.schmidt),
                       regs, tuple(rounds), refs(p.outputs))


def format_protocol(p: Protocol) -> str:
    return format_ast(to_ast(p))
