"""Text LP format and a minimal MPS reader.

Text format: statements end with ``;``, ``#`` starts a comment.

    # a comment
    min -1 x1 + 0 x2;
    s.t. 1 x1 + 1 x2 = 1;
    cap: 2 x1 - 1/3 x2 <= 5/2;

The first statement is the objective (``min`` or ``max``).  Every later
statement is a constraint, optionally named with ``name:``; the first may
be prefixed with ``s.t.`` or ``subject to``.  Coefficients are integers,
``p/q`` fractions or decimals and are stored exactly.  All variables are
nonnegative; ``free x;`` is rejected.
"""

import re
from pathlib import Path

from .errors import FreeVariableUnsupported, ParseError
from .model import Constraint, GeneralLP
from .numerics import mpq, to_rational

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<st>s\.t\.|subject\s+to\b)
  | (?P<num>\d+(?:/\d+|\.\d*(?:[eE][+-]?\d+)?|[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.\[\]]*)
  | (?P<sense><=|>=|=<|=>|==|=|<|>)
  | (?P<op>[+\-*:;])
""", re.VERBOSE | re.IGNORECASE)

_SENSES = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=",
           "=": "=", "==": "="}


def _tokens(text):
    """(kind, value, line, column) tuples; whitespace and comments dropped."""
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append((kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(("eof", "", line, pos - start + 1))
    return out


def _statements(tokens):
    stmt = []
    for tok in tokens:
        if tok[0] == "eof":
            if stmt:
                raise ParseError("missing ';' at end of input", tok[2], tok[3])
            break
        if tok[1] == ";":
            yield stmt, tok
            stmt = []
        else:
            stmt.append(tok)


def _linear(toks, end_tok):
    """Parse ``[+-] [coef] [*] var ...`` into an ordered {var: coef} map.

    A bare number without a variable is accepted only when it is zero.
    """
    terms = {}
    i = 0
    first = True
    if not toks:
        raise ParseError("empty expression", end_tok[2], end_tok[3])
    while i < len(toks):
        sign = 1
        if toks[i][1] in "+-" and toks[i][0] == "op":
            sign = -1 if toks[i][1] == "-" else 1
            i += 1
        elif not first:
            raise ParseError(f"expected '+' or '-' before {toks[i][1]!r}", toks[i][2], toks[i][3])
        first = False
        if i >= len(toks):
            raise ParseError("dangling sign", end_tok[2], end_tok[3])
        coef = mpq(1)
        if toks[i][0] == "num":
            coef = to_rational(toks[i][1])
            i += 1
            if i < len(toks) and toks[i][1] == "*":
                i += 1
            if i >= len(toks) or toks[i][0] != "ident":
                if coef != 0:
                    tok = toks[i - 1]
                    raise ParseError("constant terms are not supported", tok[2], tok[3])
                continue
        if toks[i][0] != "ident":
            raise ParseError(f"expected a variable, got {toks[i][1]!r}", toks[i][2], toks[i][3])
        name = toks[i][1]
        terms[name] = terms.get(name, mpq(0)) + sign * coef
        i += 1
    return terms


def _number(toks, end_tok):
    if not toks:
        raise ParseError("missing right-hand side", end_tok[2], end_tok[3])
    sign = 1
    i = 0
    if toks[0][1] in "+-" and toks[0][0] == "op":
        sign = -1 if toks[0][1] == "-" else 1
        i = 1
    if i != len(toks) - 1 or toks[i][0] != "num":
        tok = toks[min(i, len(toks) - 1)]
        raise ParseError("right-hand side must be a single number", tok[2], tok[3])
    return sign * to_rational(toks[i][1])


def parse_lp(text: str) -> GeneralLP:
    names = []
    objective = None
    sense = None
    rows = []
    seen_constraint = False
    for stmt, end in _statements(_tokens(text)):
        if not stmt:
            continue
        head = stmt[0]
        word = head[1].lower()
        if objective is None:
            if head[0] != "ident" or word not in ("min", "max", "minimize", "maximize"):
                raise ParseError(f"expected 'min' or 'max', got {head[1]!r}", head[2], head[3])
            sense = "min" if word.startswith("min") else "max"
            objective = _linear(stmt[1:], end)
            for v in objective:
                if v not in names:
                    names.append(v)
            continue
        if head[0] == "ident" and word == "free":
            raise FreeVariableUnsupported("free variables are not supported", head[2], head[3])
        if head[0] == "st":
            if seen_constraint:
                raise ParseError("'s.t.' may only precede the first constraint", head[2], head[3])
            stmt = stmt[1:]
            if not stmt:
                continue
        seen_constraint = True
        label = None
        if len(stmt) >= 2 and stmt[0][0] == "ident" and stmt[1][1] == ":":
            label = stmt[0][1]
            stmt = stmt[2:]
        at = [k for k, tok in enumerate(stmt) if tok[0] == "sense"]
        if len(at) != 1:
            tok = stmt[at[1]] if len(at) > 1 else (stmt[0] if stmt else end)
            raise ParseError("a constraint needs exactly one of <=, >=, =", tok[2], tok[3])
        k = at[0]
        lhs = _linear(stmt[:k], stmt[k])
        rhs = _number(stmt[k + 1:], end)
        for v in lhs:
            if v not in names:
                names.append(v)
        rows.append((lhs, _SENSES[stmt[k][1]], rhs, label))
    if objective is None:
        raise ParseError("no objective found", 1, 1)
    if not names:
        raise ParseError("the problem has no variables", 1, 1)
    obj = [objective.get(v, mpq(0)) for v in names]
    cons = [Constraint([lhs.get(v, mpq(0)) for v in names], s, rhs, label)
            for lhs, s, rhs, label in rows]
    return GeneralLP(sense, obj, cons, var_names=names)


def _fmt(v):
    v = to_rational(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _expr(coeffs, names, keep_zero=False):
    parts = []
    for c, name in zip(coeffs, names):
        c = to_rational(c)
        if c == 0 and not keep_zero:
            continue
        sign = "-" if c < 0 else "+"
        parts.append((sign, f"{_fmt(abs(c))} {name}"))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def emit_lp(p: GeneralLP) -> str:
    """Text form of ``p``; the objective lists every variable to fix their order."""
    lines = [f"{p.sense} {_expr(p.objective, p.var_names, keep_zero=True)};"]
    for k, con in enumerate(p.constraints):
        label = f"{con.name}: " if con.name else ""
        lead = "s.t. " if k == 0 else "     "
        lines.append(f"{lead}{label}{_expr(con.coeffs, p.var_names)} {con.sense} {_fmt(con.rhs)};")
    return "\n".join(lines) + "\n"


def read_mps(text: str) -> GeneralLP:
    """Fixed sections NAME, ROWS, COLUMNS, RHS, ENDATA; the objective is minimised."""
    section = None
    name = None
    obj_row = None
    row_sense = {}
    row_order = []
    columns = []
    entries = {}
    rhs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("*", 1)[0] if raw.startswith("*") else raw
        if not line.strip():
            continue
        fields = line.split()
        if not raw[0].isspace():
            key = fields[0].upper()
            if key == "NAME":
                name = fields[1] if len(fields) > 1 else None
                section = None
            elif key in ("ROWS", "COLUMNS", "RHS"):
                section = key
            elif key == "ENDATA":
                section = "END"
                break
            elif key == "BOUNDS":
                section = "BOUNDS"
            else:
                raise ParseError(f"unsupported MPS section {fields[0]!r}", lineno, 1)
            continue
        if section == "ROWS":
            if len(fields) != 2:
                raise ParseError("ROWS entries need a type and a name", lineno, 1)
            kind = fields[0].upper()
            if kind == "N":
                if obj_row is None:
                    obj_row = fields[1]
                continue
            if kind not in ("E", "L", "G"):
                raise ParseError(f"unknown row type {fields[0]!r}", lineno, 1)
            row_sense[fields[1]] = {"E": "=", "L": "<=", "G": ">="}[kind]
            row_order.append(fields[1])
        elif section == "COLUMNS":
            if "MARKER" in (f.strip("'").upper() for f in fields):
                raise ParseError("integer markers are not supported", lineno, 1)
            if len(fields) not in (3, 5):
                raise ParseError("COLUMNS entries need 1 or 2 (row, value) pairs", lineno, 1)
            col = fields[0]
            if col not in entries:
                columns.append(col)
                entries[col] = {}
            for r, v in zip(fields[1::2], fields[2::2]):
                if r != obj_row and r not in row_sense:
                    raise ParseError(f"unknown row {r!r}", lineno, 1)
                entries[col][r] = _mps_number(v, lineno)
        elif section == "RHS":
            if len(fields) not in (3, 5):
                raise ParseError("RHS entries need 1 or 2 (row, value) pairs", lineno, 1)
            for r, v in zip(fields[1::2], fields[2::2]):
                if r not in row_sense and r != obj_row:
                    raise ParseError(f"unknown row {r!r}", lineno, 1)
                rhs[r] = _mps_number(v, lineno)
        elif section == "BOUNDS":
            kind = fields[0].upper()
            if kind in ("FR", "MI"):
                raise FreeVariableUnsupported("free variables are not supported", lineno, 1)
            raise ParseError("BOUNDS are not supported", lineno, 1)
        else:
            raise ParseError("data outside a section", lineno, 1)
    if section != "END":
        raise ParseError("missing ENDATA")
    if not columns:
        raise ParseError("no columns")
    obj = [entries[c].get(obj_row, mpq(0)) for c in columns]
    cons = [Constraint([entries[c].get(r, mpq(0)) for c in columns], row_sense[r],
                       rhs.get(r, mpq(0)), r) for r in row_order]
    return GeneralLP("min", obj, cons, var_names=columns, name=name)


def _mps_number(text, lineno):
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number {text!r}", lineno, 1) from exc


def load_problem(path) -> GeneralLP:
    """Read a text LP, or MPS when the file ends in ``.mps``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".mps":
        return read_mps(text)
    return parse_lp(text)
