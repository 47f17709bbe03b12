"""LP-format and fixed-layout MPS text for ``MilpModel``.

Numbers are written exactly when the rational has a terminating decimal
expansion and as ``repr(float)`` (17 significant digits at most) otherwise,
so that export -> import -> export is a fixpoint.

Every variable is listed in the bounds section in model order, which is how
the reader recovers variable order. Row names carry the provenance label.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction

from .model import INF, Constraint, MilpModel, ModelError, Sense, Variable, tag_for_name

_TERMS_PER_LINE = 8


class LpFormatError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


def format_number(v) -> str:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise LpFormatError(f"non-finite coefficient {v!r}")
        v = Fraction(v)
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    k2 = k5 = 0
    while d % 2 == 0:
        d //= 2
        k2 += 1
    while d % 5 == 0:
        d //= 5
        k5 += 1
    if d != 1:
        return repr(float(v))
    k = max(k2, k5)
    scaled = abs(v.numerator) * (10 ** k // v.denominator)
    digits = str(scaled).rjust(k + 1, "0")
    text = (digits[:-k] + "." + digits[-k:]).rstrip("0").rstrip(".")
    return ("-" if v < 0 else "") + text


def _bound(v) -> str:
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    return format_number(v)


def _check_names(m: MilpModel):
    for v in m.variables:
        if not v.name or re.search(r"\s|:", v.name):
            raise LpFormatError(f"variable name {v.name!r} cannot be written")
    for c in m.constraints:
        if not c.name or re.search(r"\s|:", c.name):
            raise LpFormatError(f"constraint name {c.name!r} cannot be written")


def _header(m: MilpModel, mark: str) -> list[str]:
    out = []
    if m.name:
        out.append(f"{mark} model: {m.name}")
    if m.fingerprint:
        out.append(f"{mark} fingerprint: {m.fingerprint}")
    for k in sorted(m.meta):
        out.append(f"{mark} meta: {k}={m.meta[k]}")
    return out


def _linear(m: MilpModel, terms) -> list[str]:
    pieces = []
    for k, (idx, coef) in enumerate(sorted(terms, key=lambda t: t[0])):
        c = Fraction(coef)
        name = m.variables[idx].name
        if k == 0:
            pieces.append(f"{format_number(c)} {name}")
        else:
            sign = "-" if c < 0 else "+"
            pieces.append(f"{sign} {format_number(abs(c))} {name}")
    lines = [" ".join(pieces[i:i + _TERMS_PER_LINE]) for i in range(0, len(pieces), _TERMS_PER_LINE)]
    return lines or ["0"]


def export_lp(m: MilpModel) -> str:
    _check_names(m)
    out = _header(m, "\\")
    out.append("Maximize")
    obj = _linear(m, m.objective) if m.objective else []
    out.append(" obj: " + (obj[0] if obj else ""))
    out.extend("   " + ln for ln in obj[1:])
    out.append("Subject To")
    for con in m.constraints:
        body = _linear(m, con.terms) if con.terms else ["0"]
        tail = f" {con.sense.value} {format_number(con.rhs)}"
        if not con.terms:
            raise LpFormatError(f"constraint {con.name} has no terms")
        body[-1] += tail
        out.append(f" {con.name}: {body[0]}")
        out.extend("   " + ln for ln in body[1:])
    out.append("Bounds")
    for v in m.variables:
        if v.lower == -INF and v.upper == INF:
            out.append(f" {v.name} free")
        else:
            out.append(f" {_bound(v.lower)} <= {v.name} <= {_bound(v.upper)}")
    bins = [v.name for v in m.variables if v.binary]
    if bins:
        out.append("Binaries")
        for i in range(0, len(bins), _TERMS_PER_LINE):
            out.append(" " + " ".join(bins[i:i + _TERMS_PER_LINE]))
    out.append("End")
    return "\n".join(out) + "\n"


# --- LP reader ----------------------------------------------------------------------

_SECTIONS = {
    "maximize": "obj", "maximise": "obj", "maximum": "obj", "max": "obj",
    "minimize": "min", "minimise": "min", "minimum": "min", "min": "min",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "generals": "gen", "general": "gen", "gen": "gen",
    "end": "end",
}

_TOKEN = re.compile(r"\s*(?:(<=|>=|=<|=>|=|<|>)|([+-])|(:)|"
                    r"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|([A-Za-z_][^\s:<>=+\-]*))")


def _tokens(text: str, lineno: int):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LpFormatError(f"unexpected character {text[pos:].strip()[:1]!r}", lineno,
                                pos + 1 + len(text[pos:]) - len(text[pos:].lstrip()))
        col = m.start(m.lastindex) + 1
        kind = ("op", "sign", "colon", "num", "name")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), lineno, col))
        pos = m.end()
    return out


def _parse_linear(toks, i):
    """Parse ``[sign] [coef] name ...`` starting at ``toks[i]``."""
    terms = []
    while i < len(toks) and toks[i][0] != "op":
        sign = 1
        while toks[i][0] == "sign":
            sign = -sign if toks[i][1] == "-" else sign
            i += 1
            if i >= len(toks):
                raise LpFormatError("dangling sign", *toks[i - 1][2:])
        coef = Fraction(1)
        if toks[i][0] == "num":
            coef = Fraction(toks[i][1])
            i += 1
            if i >= len(toks) or toks[i][0] != "name":
                if i < len(toks) and toks[i][0] == "op" or i >= len(toks):
                    # bare constant in a linear expression
                    raise LpFormatError("constant term not supported", *toks[i - 1][2:])
                raise LpFormatError("expected a variable name", *toks[i][2:])
        if toks[i][0] != "name":
            raise LpFormatError(f"expected a variable name, got {toks[i][1]!r}", *toks[i][2:])
        terms.append((toks[i][1], sign * coef, toks[i][2], toks[i][3]))
        i += 1
    return terms, i


def _num_token(tok, sign=1):
    if tok[0] == "num":
        return sign * Fraction(tok[1])
    if tok[0] == "name" and tok[1].lower() in ("inf", "infinity"):
        return sign * INF
    raise LpFormatError(f"expected a number, got {tok[1]!r}", *tok[2:])


def import_lp(text: str) -> MilpModel:
    name = fingerprint = ""
    meta: dict[str, str] = {}
    section = None
    blocks: dict[str, list] = {"obj": [], "st": [], "bounds": [], "bin": []}
    seen_end = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("\\"):
            body = stripped[1:].strip()
            if body.startswith("model:"):
                name = body[6:].strip()
            elif body.startswith("fingerprint:"):
                fingerprint = body[12:].strip()
            elif body.startswith("meta:") and "=" in body:
                k, v = body[5:].strip().split("=", 1)
                meta[k] = v
            continue
        if "\\" in raw:
            raw = raw[:raw.index("\\")]
            stripped = raw.strip()
        if not stripped:
            continue
        key = re.sub(r"\s+", " ", stripped.lower())
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "min":
                raise LpFormatError("only maximization models are stored", lineno, 1)
            if section == "gen":
                raise LpFormatError("general integer variables are not supported", lineno, 1)
            if section == "end":
                seen_end = True
            continue
        if seen_end:
            raise LpFormatError("content after End", lineno, 1)
        if section is None:
            raise LpFormatError("content before the objective section", lineno, 1)
        if section == "bounds":
            blocks["bounds"].append(_tokens(raw, lineno))
        else:
            blocks[section].extend(_tokens(raw, lineno))

    var_order: list[str] = []
    bounds: dict[str, tuple] = {}
    for toks in blocks["bounds"]:
        vname, lo, hi = _parse_bound(toks)
        if vname not in bounds:
            var_order.append(vname)
            bounds[vname] = (Fraction(0), INF)
        plo, phi = bounds[vname]
        bounds[vname] = (plo if lo is None else lo, phi if hi is None else hi)

    def ensure(vn):
        if vn not in bounds:
            var_order.append(vn)
            bounds[vn] = (Fraction(0), INF)

    # objective
    toks = blocks["obj"]
    i = 0
    if len(toks) >= 2 and toks[0][0] == "name" and toks[1][0] == "colon":
        i = 2
    if i < len(toks) and len(toks) - i == 1 and toks[i][0] == "num" and Fraction(toks[i][1]) == 0:
        obj_terms = []
    else:
        obj_terms, i = _parse_linear(toks, i)
        if i != len(toks):
            raise LpFormatError("unexpected token in objective", *toks[i][2:])
    for vn, *_ in obj_terms:
        ensure(vn)

    # constraints
    rows = []
    toks = blocks["st"]
    i = 0
    names_seen = set()
    while i < len(toks):
        if not (toks[i][0] == "name" and i + 1 < len(toks) and toks[i + 1][0] == "colon"):
            raise LpFormatError("constraint must start with 'name:'", *toks[i][2:])
        rname, rl, rc = toks[i][1], toks[i][2], toks[i][3]
        if rname in names_seen:
            raise LpFormatError(f"duplicate row name {rname!r}", rl, rc)
        names_seen.add(rname)
        terms, i = _parse_linear(toks, i + 2)
        if i >= len(toks) or toks[i][0] != "op":
            raise LpFormatError(f"row {rname!r} has no sense", rl, rc)
        op = toks[i][1]
        sense = {"<=": Sense.LE, "=<": Sense.LE, "<": Sense.LE, ">=": Sense.GE, "=>": Sense.GE,
                 ">": Sense.GE, "=": Sense.EQ}[op]
        i += 1
        sign = 1
        while i < len(toks) and toks[i][0] == "sign":
            sign = -sign if toks[i][1] == "-" else sign
            i += 1
        if i >= len(toks):
            raise LpFormatError(f"row {rname!r} has no right-hand side", rl, rc)
        rhs = _num_token(toks[i], sign)
        i += 1
        for vn, *_ in terms:
            ensure(vn)
        rows.append((rname, terms, sense, rhs, rl, rc))

    binaries = []
    for tok in blocks["bin"]:
        if tok[0] != "name":
            raise LpFormatError(f"expected a variable name, got {tok[1]!r}", *tok[2:])
        ensure(tok[1])
        binaries.append(tok[1])
    binset = set(binaries)

    index = {vn: k for k, vn in enumerate(var_order)}
    variables = []
    for vn in var_order:
        lo, hi = bounds[vn]
        if vn in binset and (lo, hi) == (Fraction(0), INF):
            hi = Fraction(1)
        try:
            variables.append(Variable(vn, lo, hi, vn in binset))
        except ModelError as e:
            raise LpFormatError(str(e)) from None
    constraints = []
    for rname, terms, sense, rhs, rl, rc in rows:
        acc: dict[int, Fraction] = {}
        order = []
        for vn, coef, tl, tc in terms:
            k = index[vn]
            if k in acc:
                raise LpFormatError(f"variable {vn} repeated in row {rname}", tl, tc)
            acc[k] = coef
            order.append(k)
        tag, label = tag_for_name(rname)
        constraints.append(Constraint(rname, tuple((k, acc[k]) for k in order), sense,
                                      rhs, tag, label))
    objective = []
    seen = set()
    for vn, coef, tl, tc in obj_terms:
        k = index[vn]
        if k in seen:
            raise LpFormatError(f"variable {vn} repeated in objective", tl, tc)
        seen.add(k)
        objective.append((k, coef))
    return MilpModel(tuple(variables), tuple(constraints), tuple(objective), name,
                     fingerprint, meta)


def _parse_bound(toks):
    """One bounds line: ``v free``, ``lo <= v <= hi``, ``v >= lo``, ``v <= hi``, ``v = a``."""
    line, col = toks[0][2], toks[0][3]
    vals = []
    i = 0
    while i < len(toks):
        t = toks[i]
        if t[0] == "sign":
            if i + 1 >= len(toks):
                raise LpFormatError("dangling sign", t[2], t[3])
            vals.append(("val", _num_token(toks[i + 1], -1 if t[1] == "-" else 1)))
            i += 2
            continue
        if t[0] == "num" or (t[0] == "name" and t[1].lower() in ("inf", "infinity")):
            vals.append(("val", _num_token(t)))
        elif t[0] == "name":
            vals.append(("name", t[1]))
        elif t[0] == "op":
            vals.append(("op", t[1]))
        else:
            raise LpFormatError(f"unexpected {t[1]!r} in bounds", t[2], t[3])
        i += 1
    kinds = [k for k, _ in vals]
    if kinds == ["name", "name"] and vals[1][1].lower() == "free":
        return vals[0][1], -INF, INF
    if kinds == ["val", "op", "name", "op", "val"]:
        if vals[1][1] not in ("<=", "=<", "<") or vals[3][1] not in ("<=", "=<", "<"):
            raise LpFormatError("double bound must use <=", line, col)
        return vals[2][1], vals[0][1], vals[4][1]
    if kinds == ["name", "op", "val"]:
        op, v = vals[1][1], vals[2][1]
        if op in ("<=", "=<", "<"):
            return vals[0][1], None, v
        if op in (">=", "=>", ">"):
            return vals[0][1], v, None
        return vals[0][1], v, v
    if kinds == ["val", "op", "name"]:
        op, v = vals[1][1], vals[0][1]
        if op in ("<=", "=<", "<"):
            return vals[2][1], v, None
        if op in (">=", "=>", ">"):
            return vals[2][1], None, v
        return vals[2][1], v, v
    raise LpFormatError("unrecognized bound line", line, col)


# --- MPS --------------------------------------------------------------------------------

def _field(s: str, width: int) -> str:
    return s.ljust(width) if len(s) < width else s + " "


def _mps_line(code: str, f1: str, f2: str = "", v2: str = "", f3: str = "", v3: str = "") -> str:
    # standard fixed columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61; wider fields overflow
    line = " " + _field(code, 3) + _field(f1, 10) + _field(f2, 10) + v2
    if f3:
        line = _field(line, 39) + _field(f3, 10) + v3
    return line.rstrip()


def export_mps(m: MilpModel) -> str:
    _check_names(m)
    out = _header(m, "*")
    out.append(f"NAME          {m.name or 'MODEL'}".rstrip())
    out.append("OBJSENSE")
    out.append("    MAX")
    out.append("ROWS")
    out.append(" N  obj")
    code = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}
    for con in m.constraints:
        if con.name == "obj":
            raise LpFormatError("row name 'obj' is reserved")
        out.append(f" {code[con.sense]}  {con.name}")
    cols: list[list[tuple[str, Fraction]]] = [[] for _ in m.variables]
    for k, c in sorted(m.objective, key=lambda t: t[0]):
        cols[k].append(("obj", Fraction(c)))
    for con in m.constraints:
        for k, c in con.terms:
            cols[k].append((con.name, Fraction(c)))
    out.append("COLUMNS")
    in_int = False
    for k, v in enumerate(m.variables):
        if v.binary != in_int:
            tag = "'INTORG'" if v.binary else "'INTEND'"
            out.append(_mps_line("", "MARKER", "'MARKER'", "",
                                 tag, ""))
            in_int = v.binary
        entries = cols[k] or [("obj", Fraction(0))]
        for e in range(0, len(entries), 2):
            r1, c1 = entries[e]
            if e + 1 < len(entries):
                r2, c2 = entries[e + 1]
                out.append(_mps_line("", v.name, r1, format_number(c1), r2, format_number(c2)))
            else:
                out.append(_mps_line("", v.name, r1, format_number(c1)))
    if in_int:
        out.append(_mps_line("", "MARKER", "'MARKER'", "", "'INTEND'", ""))
    out.append("RHS")
    nz = [con for con in m.constraints if con.rhs != 0]
    for e in range(0, len(nz), 2):
        a = nz[e]
        if e + 1 < len(nz):
            b = nz[e + 1]
            out.append(_mps_line("", "RHS", a.name, format_number(a.rhs), b.name, format_number(b.rhs)))
        else:
            out.append(_mps_line("", "RHS", a.name, format_number(a.rhs)))
    out.append("BOUNDS")
    for v in m.variables:
        lo, hi = v.lower, v.upper
        if lo == -INF and hi == INF:
            out.append(_mps_line("FR", "BND", v.name))
            continue
        if lo == hi:
            out.append(_mps_line("FX", "BND", v.name, format_number(lo)))
            continue
        if lo == -INF:
            out.append(_mps_line("MI", "BND", v.name))
        else:
            out.append(_mps_line("LO", "BND", v.name, format_number(lo)))
        if hi != INF:
            out.append(_mps_line("UP", "BND", v.name, format_number(hi)))
        else:
            out.append(_mps_line("PL", "BND", v.name))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def import_mps(text: str) -> MilpModel:
    name = fingerprint = ""
    meta: dict[str, str] = {}
    section = None
    maximize = False
    rows: dict[str, Sense] = {}
    row_order: list[str] = []
    obj_row = None
    var_order: list[str] = []
    coefs: dict[str, list[tuple[str, Fraction]]] = {}
    binary: set[str] = set()
    rhs: dict[str, Fraction] = {}
    bounds: dict[str, list] = {}
    in_int = False

    def num(tok, ln):
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise LpFormatError(f"bad number {tok!r}", ln, 1) from None

    for ln, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("*"):
            body = raw[1:].strip()
            if body.startswith("model:"):
                name = body[6:].strip()
            elif body.startswith("fingerprint:"):
                fingerprint = body[12:].strip()
            elif body.startswith("meta:") and "=" in body:
                k, v = body[5:].strip().split("=", 1)
                meta[k] = v
            continue
        if not raw.strip():
            continue
        f = raw.split()
        if not raw[0].isspace():
            section = f[0].upper()
            if section == "NAME":
                name = name or (f[1] if len(f) > 1 else "")
            elif section == "OBJSENSE" and len(f) > 1:
                maximize = f[1].upper() in ("MAX", "MAXIMIZE")
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "OBJSENSE", "RANGES"):
                raise LpFormatError(f"unknown section {f[0]!r}", ln, 1)
            if section == "RANGES":
                raise LpFormatError("RANGES are not supported", ln, 1)
            continue
        if section == "OBJSENSE":
            maximize = f[0].upper() in ("MAX", "MAXIMIZE")
        elif section == "ROWS":
            if len(f) != 2 or f[0].upper() not in ("N", "L", "G", "E"):
                raise LpFormatError("malformed ROWS entry", ln, 2)
            if f[1] in rows or f[1] == obj_row:
                raise LpFormatError(f"duplicate row name {f[1]!r}", ln, 5)
            if f[0].upper() == "N":
                if obj_row is None:
                    obj_row = f[1]
                continue
            rows[f[1]] = {"L": Sense.LE, "G": Sense.GE, "E": Sense.EQ}[f[0].upper()]
            row_order.append(f[1])
        elif section == "COLUMNS":
            if len(f) >= 3 and f[1] == "'MARKER'":
                in_int = f[2] == "'INTORG'"
                continue
            if len(f) not in (3, 5):
                raise LpFormatError("malformed COLUMNS entry", ln, 5)
            col = f[0]
            if col not in coefs:
                var_order.append(col)
                coefs[col] = []
            if in_int:
                binary.add(col)
            for r, v in ((f[1], f[2]), (f[3], f[4])) if len(f) == 5 else ((f[1], f[2]),):
                if r != obj_row and r not in rows:
                    raise LpFormatError(f"unknown row {r!r}", ln, 15)
                coefs[col].append((r, num(v, ln)))
        elif section == "RHS":
            pairs = f[1:]
            if len(pairs) % 2:
                raise LpFormatError("malformed RHS entry", ln, 5)
            for r, v in zip(pairs[::2], pairs[1::2]):
                if r not in rows:
                    raise LpFormatError(f"unknown row {r!r} in RHS", ln, 15)
                rhs[r] = num(v, ln)
        elif section == "BOUNDS":
            kind = f[0].upper()
            if len(f) < 3 or f[2] not in coefs:
                raise LpFormatError("malformed or unknown-column bound", ln, 2)
            lo, hi = bounds.setdefault(f[2], [Fraction(0), INF])
            val = num(f[3], ln) if len(f) > 3 else None
            if kind == "UP":
                hi = val
            elif kind == "LO":
                lo = val
            elif kind == "FX":
                lo = hi = val
            elif kind == "FR":
                lo, hi = -INF, INF
            elif kind == "MI":
                lo = -INF
            elif kind == "PL":
                hi = INF
            elif kind == "BV":
                lo, hi = Fraction(0), Fraction(1)
                binary.add(f[2])
            else:
                raise LpFormatError(f"unsupported bound type {kind}", ln, 2)
            bounds[f[2]] = [lo, hi]
    if not maximize:
        raise LpFormatError("only maximization models are stored (OBJSENSE MAX missing)")

    index = {vn: k for k, vn in enumerate(var_order)}
    variables = []
    for vn in var_order:
        lo, hi = bounds.get(vn, [Fraction(0), INF if vn not in binary else Fraction(1)])
        variables.append(Variable(vn, lo, hi, vn in binary))
    row_terms: dict[str, list] = {r: [] for r in row_order}
    objective = []
    for vn in var_order:
        for r, c in coefs[vn]:
            if r == obj_row:
                if c != 0:
                    objective.append((index[vn], c))
            else:
                row_terms[r].append((index[vn], c))
    constraints = []
    for r in row_order:
        tag, label = tag_for_name(r)
        constraints.append(Constraint(r, tuple(row_terms[r]), rows[r], rhs.get(r, Fraction(0)),
                                      tag, label))
    try:
        return MilpModel(tuple(variables), tuple(constraints), tuple(objective), name,
                         fingerprint, meta)
    except ModelError as e:
        raise LpFormatError(str(e)) from None


__all__ = ["LpFormatError", "export_lp", "export_mps", "format_number", "import_lp", "import_mps"]
