"""Exact integer-linear reformulation of the scheduling problem.

For binary schedules the pairwise bound becomes linear through one gate
variable per (device pair, channel):

    z[i1,i2,j] = max(e[i1,j] + e[i2,j] - 1, 0),

enforced by the rows

    e1 + e2 - z <= 1,      z >= 0 (variable bound),
    z + y <= e1 + e2,      z - y <= 0,      y binary,

giving a pure integer linear program with exactly L*N^2 variables: N*L
binary e, L*N*(N-1)/2 continuous z, and as many binary y.  The y rows are
kept even though, for a minimization with A >= 0, the first two rows
already force z at the optimum; ``reduced=True`` emits that 2-row variant
(no y variables) for comparison.

`export_lp` writes the model in the LP text interchange format so it can
be cross-checked against external branch-and-cut solvers; `parse_lp` reads
back our own dialect.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from corrsched.model import Assignment, JointActivationMatrix, ParseError, ValidationError

#: absolute feasibility tolerance for point evaluation
FEAS_TOL = 1e-9

_FLOAT_FMT = "%.17g"
_LINE_WIDTH = 200  # wrap long statements; continuation lines are indented


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "continuous"
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((coefficient, variable name), ...)
    sense: str  # "<=" | "=" | ">="
    rhs: float


@dataclass(frozen=True)
class PILPModel:
    """Solver-agnostic PILP: variables, rows, and a minimize objective."""

    variables: tuple
    constraints: tuple
    objective: tuple  # ((coefficient, variable name), ...)

    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]


def _evar(i: int, j: int) -> str:
    return f"e_{i}_{j}"


def _zvar(i1: int, i2: int, j: int) -> str:
    return f"z_{i1}_{i2}_{j}"


def _yvar(i1: int, i2: int, j: int) -> str:
    return f"y_{i1}_{i2}_{j}"


def _pairs(n: int):
    return [(i1, i2) for i1 in range(n) for i2 in range(i1 + 1, n)]


def build_pilp(a: JointActivationMatrix, l: int, reduced: bool = False) -> PILPModel:
    """Gate-linearized model minimizing (1/L) * sum A[i1,i2] * z[i1,i2,j].

    Deterministic ordering throughout: devices ascending, then pairs
    lexicographic, then channels.
    """
    if l < 1:
        raise ValidationError("need at least one channel")
    n = a.dim
    pairs = _pairs(n)

    variables = [
        Variable(_evar(i, j), "binary", 0.0, 1.0) for i in range(n) for j in range(l)
    ]
    variables += [
        Variable(_zvar(i1, i2, j), "continuous", 0.0, 1.0)
        for (i1, i2) in pairs
        for j in range(l)
    ]
    if not reduced:
        variables += [
            Variable(_yvar(i1, i2, j), "binary", 0.0, 1.0)
            for (i1, i2) in pairs
            for j in range(l)
        ]

    constraints = [
        Constraint(
            f"assign_{i}",
            tuple((1.0, _evar(i, j)) for j in range(l)),
            "=",
            1.0,
        )
        for i in range(n)
    ]
    for i1, i2 in pairs:
        for j in range(l):
            e1, e2, z = _evar(i1, j), _evar(i2, j), _zvar(i1, i2, j)
            constraints.append(
                Constraint(
                    f"cap_{i1}_{i2}_{j}",
                    ((1.0, e1), (1.0, e2), (-1.0, z)),
                    "<=",
                    1.0,
                )
            )
            if not reduced:
                y = _yvar(i1, i2, j)
                constraints.append(
                    Constraint(
                        f"link_{i1}_{i2}_{j}",
                        ((1.0, z), (1.0, y), (-1.0, e1), (-1.0, e2)),
                        "<=",
                        0.0,
                    )
                )
                constraints.append(
                    Constraint(
                        f"bind_{i1}_{i2}_{j}",
                        ((1.0, z), (-1.0, y)),
                        "<=",
                        0.0,
                    )
                )

    objective = tuple(
        (a.entries[i1, i2] / l, _zvar(i1, i2, j)) for (i1, i2) in pairs for j in range(l)
    )
    return PILPModel(tuple(variables), tuple(constraints), objective)


def verify_gate(e1: int, e2: int) -> int:
    """Value of z forced by the gate rows for binary inputs (e1, e2).

    Enumerates the feasible (z, y) set under the five gate constraints and
    confirms it pins z to max(e1 + e2 - 1, 0); raises if the inputs are
    not binary or z were not forced.
    """
    if e1 not in (0, 1) or e2 not in (0, 1):
        raise ValidationError("gate inputs must be binary")
    s = e1 + e2
    feasible_z = set()
    for y in (0, 1):
        lo = max(s - 1, 0)  # e1 + e2 - z <= 1 and z >= 0
        hi = min(s - y, y, 1)  # z + y <= e1 + e2, z - y <= 0, z <= 1
        if lo <= hi:
            if lo != hi:
                raise AssertionError(f"gate leaves z free in [{lo}, {hi}] for y={y}")
            feasible_z.add(lo)
    if len(feasible_z) != 1:
        raise AssertionError(f"gate does not force z for inputs ({e1}, {e2})")
    return feasible_z.pop()


def assignment_to_point(assignment: Assignment, l: int, reduced: bool = False) -> dict:
    """Gate-completed variable valuation for a hard assignment."""
    n = assignment.n_devices
    ch = assignment.channel_of
    if n and ch.max() >= l:
        raise ValidationError("assignment uses a channel index >= l")
    point = {}
    for i in range(n):
        for j in range(l):
            point[_evar(i, j)] = 1.0 if ch[i] == j else 0.0
    for i1, i2 in _pairs(n):
        for j in range(l):
            z = max(point[_evar(i1, j)] + point[_evar(i2, j)] - 1.0, 0.0)
            point[_zvar(i1, i2, j)] = z
            if not reduced:
                point[_yvar(i1, i2, j)] = z
    return point


def evaluate_pilp_point(m: PILPModel, point: dict) -> tuple[bool, float]:
    """Check a valuation against every row, bound, and integrality kind.

    Returns (feasible within 1e-9 absolute, objective value).  Raises
    KeyError naming any variable missing from the valuation.
    """
    for v in m.variables:
        if v.name not in point:
            raise KeyError(f"valuation is missing variable {v.name!r}")
    feasible = True
    for v in m.variables:
        x = point[v.name]
        if x < v.lower - FEAS_TOL or x > v.upper + FEAS_TOL:
            feasible = False
        if v.kind == "binary" and min(abs(x), abs(x - 1.0)) > FEAS_TOL:
            feasible = False
    for c in m.constraints:
        lhs = sum(coef * point[name] for coef, name in c.terms)
        if c.sense == "<=":
            ok = lhs <= c.rhs + FEAS_TOL
        elif c.sense == ">=":
            ok = lhs >= c.rhs - FEAS_TOL
        else:
            ok = abs(lhs - c.rhs) <= FEAS_TOL
        if not ok:
            feasible = False
    objective = sum(coef * point[name] for coef, name in m.objective)
    return feasible, float(objective)


# ---------------------------------------------------------------------------
# LP text interchange


def _format_terms(terms) -> str:
    parts = []
    for k, (coef, name) in enumerate(terms):
        coef = float(coef)
        if k == 0:
            parts.append(f"{_FLOAT_FMT % coef} {name}")
        elif coef < 0:
            parts.append(f"- {_FLOAT_FMT % -coef} {name}")
        else:
            parts.append(f"+ {_FLOAT_FMT % coef} {name}")
    return " ".join(parts)


def _wrap(statement: str) -> list[str]:
    words = statement.split(" ")
    lines, cur = [], " " + words[0]
    for w in words[1:]:
        if len(cur) + 1 + len(w) > _LINE_WIDTH:
            lines.append(cur)
            cur = "   " + w
        else:
            cur += " " + w
    lines.append(cur)
    return lines


def export_lp(m: PILPModel) -> str:
    """LP-format text with sections Minimize / Subject To / Bounds / Binaries / End.

    Output is deterministic (model order is deterministic and coefficients
    are written with 17 significant digits), so identical models export
    byte-identical files.
    """
    out = ["Minimize"]
    out += _wrap("obj: " + _format_terms(m.objective))
    out.append("Subject To")
    for c in m.constraints:
        out += _wrap(f"{c.name}: {_format_terms(c.terms)} {c.sense} {_FLOAT_FMT % c.rhs}")
    bounded = [v for v in m.variables if v.kind == "continuous"]
    if bounded:
        out.append("Bounds")
        for v in bounded:
            out.append(f" {_FLOAT_FMT % v.lower} <= {v.name} <= {_FLOAT_FMT % v.upper}")
    binaries = [v for v in m.variables if v.kind == "binary"]
    if binaries:
        out.append("Binaries")
        for v in binaries:
            out.append(f" {v.name}")
    out.append("End")
    return "\n".join(out) + "\n"


_SECTIONS = {"minimize", "subject to", "bounds", "binaries", "end"}
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _parse_terms(tokens: list[str]):
    terms = []
    sign = 1.0
    k = 0
    while k < len(tokens):
        tok = tokens[k]
        if tok == "+":
            sign = 1.0
            k += 1
        elif tok == "-":
            sign = -1.0
            k += 1
        else:
            try:
                coef = float(tok)
            except ValueError as exc:
                raise ParseError(f"expected a coefficient, got {tok!r}") from exc
            if k + 1 >= len(tokens) or not _NAME_RE.match(tokens[k + 1]):
                raise ParseError(f"expected a variable name after {tok!r}")
            terms.append((sign * coef, tokens[k + 1]))
            sign = 1.0
            k += 2
    return tuple(terms)


def parse_lp(text: str) -> PILPModel:
    """Minimal reader for the dialect written by `export_lp`.

    Reconstructs the model, including the canonical variable ordering
    (e block, then z block, then y block).  Not a general LP parser.
    """
    # join wrapped statements: continuation lines start with extra indent
    statements: list[str] = []
    for raw in text.splitlines():
        if raw.startswith("\\") or not raw.strip():
            continue
        if raw.strip().lower() in _SECTIONS:
            statements.append(raw.strip().lower())
        elif raw.startswith("   ") and statements and statements[-1] not in _SECTIONS:
            statements[-1] += " " + raw.strip()
        else:
            statements.append(raw.strip())

    section = None
    objective = None
    constraints = []
    bounds = []
    binaries = []
    for st in statements:
        if st in _SECTIONS:
            section = st
            continue
        if section == "minimize":
            if ":" not in st:
                raise ParseError(f"objective statement lacks a label: {st!r}")
            objective = _parse_terms(st.split(":", 1)[1].split())
        elif section == "subject to":
            if ":" not in st:
                raise ParseError(f"constraint lacks a name: {st!r}")
            name, body = st.split(":", 1)
            mt = re.match(r"^(.*?)(<=|>=|=)\s*(\S+)$", body.strip())
            if not mt:
                raise ParseError(f"constraint {name!r} lacks a sense and rhs")
            constraints.append(
                Constraint(name.strip(), _parse_terms(mt.group(1).split()), mt.group(2), float(mt.group(3)))
            )
        elif section == "bounds":
            mt = re.match(r"^(\S+)\s*<=\s*(\S+)\s*<=\s*(\S+)$", st)
            if not mt:
                raise ParseError(f"unsupported bounds line: {st!r}")
            bounds.append(Variable(mt.group(2), "continuous", float(mt.group(1)), float(mt.group(3))))
        elif section == "binaries":
            for name in st.split():
                binaries.append(Variable(name, "binary", 0.0, 1.0))
        elif section == "end":
            break
        else:
            raise ParseError(f"statement outside any section: {st!r}")
    if objective is None:
        raise ParseError("no objective found")
    # canonical block order: e binaries, z bounds, y binaries
    e_vars = [v for v in binaries if v.name.startswith("e_")]
    y_vars = [v for v in binaries if not v.name.startswith("e_")]
    variables = tuple(e_vars) + tuple(bounds) + tuple(y_vars)
    return PILPModel(variables, tuple(constraints), objective)
