"""CPLEX-style LP text export and a parser for the subset we emit.

Block tags have no place in the LP grammar, so relaxable rows are listed in
``\\ relaxable: <label>`` comment lines ahead of the objective; other readers
ignore them.
"""

from __future__ import annotations

import math
import re

from .model import Block, Domain, LinConstraint, LinObjective, Model, Sense, VarSpec

_SENSES = {"<=": Sense.LE, "=<": Sense.LE, ">=": Sense.GE, "=>": Sense.GE, "=": Sense.EQ}


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


def _expr(coeffs) -> str:
    parts = []
    for v, c in coeffs.items():
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {v}")
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def export_lp_format(model: Model, objective: LinObjective) -> str:
    out = ["\\ sscmo LP export"]
    for c in model.constraints:
        if c.block is Block.RELAXABLE:
            out.append(f"\\ relaxable: {c.label}")
    out.append("Minimize")
    terms = _expr(objective.coeffs)
    if objective.constant or not terms:
        const = _num(objective.constant)
        terms = f"{terms} + {const}" if terms else const
    out.append(f" obj: {terms}")
    out.append("Subject To")
    for c in model.constraints:
        out.append(f" {c.label}: {_expr(c.coeffs)} {c.sense.value} {_num(c.rhs)}")
    out.append("Bounds")
    for v in model.vars:
        if v.lower == -math.inf and v.upper == math.inf:
            out.append(f" {v.id} free")
        else:
            out.append(f" {_num(v.lower)} <= {v.id} <= {_num(v.upper)}")
    out.append("Generals")
    out.extend(f" {v.id}" for v in model.vars if v.domain is Domain.INTEGER)
    out.append("Binaries")
    out.extend(f" {v.id}" for v in model.vars if v.domain is Domain.BINARY)
    out.append("End")
    return "\n".join(out) + "\n"


_TOKEN = re.compile(r"\s*(?:(?P<sign>[+-])|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf(?:inity)?)"
                    r"|(?P<name>[A-Za-z_][^\s+\-]*))")


def _parse_num(tok: str) -> float:
    tok = tok.strip()
    if tok in ("+inf", "inf", "+infinity", "infinity"):
        return math.inf
    if tok in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _parse_expr(text: str) -> tuple[dict[str, float], float]:
    """Parse ``3 x + 4.5 y - z + 2`` into coefficients and a constant."""
    coeffs: dict[str, float] = {}
    const = 0.0
    sign, coef = 1.0, None
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression near {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group("sign"):
            if coef is not None:
                const += sign * coef
                coef = None
            sign = -1.0 if m.group("sign") == "-" else 1.0
        elif m.group("num"):
            coef = _parse_num(m.group("num"))
        else:
            name = m.group("name")
            coeffs[name] = coeffs.get(name, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
    if coef is not None:
        const += sign * coef
    return coeffs, const


def parse_lp_format(text: str) -> tuple[Model, LinObjective]:
    relaxable = set()
    section = None
    obj_text: list[str] = []
    rows: list[str] = []
    bounds: list[str] = []
    generals: list[str] = []
    binaries: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            m = re.match(r"\\\s*relaxable:\s*(\S+)", line)
            if m:
                relaxable.add(m.group(1))
            continue
        low = line.lower()
        if low in ("minimize", "minimise", "min"):
            section = "obj"
            continue
        if low in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("generals", "general", "gen"):
            section = "gen"
            continue
        if low in ("binaries", "binary", "bin"):
            section = "bin"
            continue
        if low == "end":
            break
        {"obj": obj_text, "rows": rows, "bounds": bounds, "gen": generals,
         "bin": binaries}[section].append(line)

    otext = " ".join(obj_text)
    if ":" in otext:
        otext = otext.split(":", 1)[1]
    ocoeffs, oconst = _parse_expr(otext)
    objective = LinObjective(ocoeffs, oconst)

    var_order: list[str] = []
    var_bounds: dict[str, tuple[float, float]] = {}
    for line in bounds:
        if line.endswith(" free"):
            name = line[:-5].strip()
            var_order.append(name)
            var_bounds[name] = (-math.inf, math.inf)
            continue
        m = re.match(r"(\S+)\s*<=\s*(\S+)\s*<=\s*(\S+)$", line)
        if not m:
            raise ValueError(f"unsupported bound line: {line!r}")
        name = m.group(2)
        var_order.append(name)
        var_bounds[name] = (_parse_num(m.group(1)), _parse_num(m.group(3)))
    gen, bins = set(generals), set(binaries)

    constraints = []
    for line in rows:
        # labels may themselves contain ':'; the separator is the last ':' before whitespace
        lm = re.match(r"(\S+):\s+(.*)$", line)
        if not lm:
            raise ValueError(f"cannot parse row {line!r}")
        label, body = lm.group(1), lm.group(2)
        m = re.match(r"(.*?)\s*(<=|>=|=<|=>|=)\s*(\S+)$", body.strip())
        if not m:
            raise ValueError(f"cannot parse row {line!r}")
        coeffs, const = _parse_expr(m.group(1))
        rhs = _parse_num(m.group(3)) - const
        label = label.strip()
        for v in coeffs:
            if v not in var_bounds:
                var_order.append(v)
                var_bounds[v] = (0.0, math.inf)
        block = Block.RELAXABLE if label in relaxable else Block.KEPT
        constraints.append(LinConstraint(coeffs, _SENSES[m.group(2)], rhs, label, block))

    vars = []
    for name in var_order:
        dom = Domain.BINARY if name in bins else Domain.INTEGER if name in gen else Domain.CONTINUOUS
        lo, hi = var_bounds[name]
        vars.append(VarSpec(name, dom, lo, hi))
    return Model(tuple(vars), tuple(constraints)), objective
