"""Catalog of explicit QUBO linearizations and their builders.

Every model is described by a small recipe: a list of constraint blocks plus
bounds/integrality for the product variables y_ij. A block either emits one
row per product pair (i, j) or, when aggregated, one weighted row per i that
is the positive combination of the elementary rows of i.

Canonical names
---------------
    name    := ["OR"] FAMILY [ "(" first ["," token]* ")" ] ["[eq]"] [suffix]
    FAMILY  := DW | GW | FT | PK
    first   := "a" (type-1 rows aggregated with alpha) | "*"
    token   := b | g+d | g | d | t | t=        (beta, gamma+delta, gamma, delta, theta)
    suffix  := -A | -F | -RB | -NOUB | -HM     (flagged variants, see ``Variant``)

Examples: ``GW``, ``ORPK``, ``GW(a,g+d)``, ``FT(*,g,t)``, ``DW(*,b)``.
Greek letters are accepted on input and "*" placeholders after the first slot
are ignored, so ``FT(α,γ,*)`` parses as ``FT(a,g)``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

from .model import INF, Constraint, MilpModel, ModelError, Sense, Tag, Variable, LABELS
from .qubo import IndexSets, QuboInstance


class Family(enum.Enum):
    DW = "DW"
    GW = "GW"
    FT = "FT"
    PK = "PK"


class Agg2(enum.Enum):
    NONE = ""
    BETA = "b"
    BETA_INVALID = "b!"
    GAMMA_PLUS_DELTA = "g+d"
    GAMMA_AND_DELTA = "g,d"
    GAMMA_ONLY = "g"
    DELTA_ONLY = "d"
    HM_INVALID = "hm"
    GAMMA = "g."
    THETA = "t"
    GAMMA_AND_THETA = "g,t"
    THETA_EQUALITY_INVALID = "g,t="


class Variant(enum.Enum):
    NONE = ""
    ORDW_A = "A"             # ORDW with its own T1 rows aggregated over R_i^-
    ORDW_FULL_ALPHA = "F"    # ORDW with all T1 rows aggregated over R_i
    REDUCED_BOUNDS = "RB"    # ORPK(*,b) keeping y >= 0 only on R_i^-
    NO_UPPER_BOUNDS = "NOUB"  # PK(a) without y <= 1


_AGG2_BY_FAMILY = {
    Family.DW: {Agg2.NONE, Agg2.BETA_INVALID},
    Family.PK: {Agg2.NONE, Agg2.BETA},
    Family.GW: {Agg2.NONE, Agg2.GAMMA_PLUS_DELTA, Agg2.GAMMA_AND_DELTA, Agg2.GAMMA_ONLY,
                Agg2.DELTA_ONLY, Agg2.HM_INVALID},
    Family.FT: {Agg2.NONE, Agg2.GAMMA, Agg2.THETA, Agg2.GAMMA_AND_THETA,
                Agg2.THETA_EQUALITY_INVALID},
}

_INVALID_AGG2 = {Agg2.BETA_INVALID, Agg2.HM_INVALID, Agg2.THETA_EQUALITY_INVALID}


class CatalogError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ModelId:
    family: Family
    restricted: bool = False
    alpha: bool = False
    agg2: Agg2 = Agg2.NONE
    ft_equality: bool = False
    variant: Variant = Variant.NONE

    def __post_init__(self):
        f, a2, v = self.family, self.agg2, self.variant
        if a2 not in _AGG2_BY_FAMILY[f]:
            raise CatalogError(f"{a2.name} is not an aggregation of {f.value}")
        if f is Family.DW and self.alpha and a2 is not Agg2.NONE:
            raise CatalogError("DW has no simultaneous aggregation")
        if a2 in _INVALID_AGG2 and self.restricted:
            raise CatalogError(f"{a2.name} has no optimality restricted form")
        if a2 is Agg2.HM_INVALID and self.alpha:
            raise CatalogError("the Hansen-Meyer model does not aggregate type-1 rows")
        if a2 is Agg2.THETA_EQUALITY_INVALID and not self.alpha:
            raise CatalogError("the equality theta aggregation is defined on FT(a,g,.)")
        if self.ft_equality and not (f is Family.FT and a2 in (Agg2.NONE, Agg2.GAMMA)):
            raise CatalogError("[eq] needs FT with unaggregated symmetry rows")
        if v is Variant.ORDW_A or v is Variant.ORDW_FULL_ALPHA:
            ok = f is Family.DW and self.restricted and self.alpha and a2 is Agg2.NONE
        elif v is Variant.REDUCED_BOUNDS:
            ok = f is Family.PK and self.restricted and not self.alpha and a2 is Agg2.BETA
        elif v is Variant.NO_UPPER_BOUNDS:
            ok = f is Family.PK and not self.restricted and self.alpha and a2 is Agg2.NONE
        else:
            ok = True
        if not ok:
            raise CatalogError(f"variant {v.name} does not apply here")

    @property
    def known_invalid(self) -> bool:
        return self.agg2 in _INVALID_AGG2 or self.variant is not Variant.NONE

    @property
    def precise(self) -> bool:
        return not self.restricted

    @property
    def name(self) -> str:
        return format_name(self)

    def __str__(self) -> str:
        return self.name


_TOKEN_OUT = {
    Agg2.BETA: "b", Agg2.BETA_INVALID: "b", Agg2.GAMMA_PLUS_DELTA: "g+d",
    Agg2.GAMMA_AND_DELTA: "g,d", Agg2.GAMMA_ONLY: "g", Agg2.DELTA_ONLY: "d",
    Agg2.GAMMA: "g", Agg2.THETA: "t", Agg2.GAMMA_AND_THETA: "g,t",
    Agg2.THETA_EQUALITY_INVALID: "g,t=",
}

_TOKEN_IN = {
    Family.DW: {"b": Agg2.BETA_INVALID},
    Family.PK: {"b": Agg2.BETA},
    Family.GW: {"g+d": Agg2.GAMMA_PLUS_DELTA, "g,d": Agg2.GAMMA_AND_DELTA,
                "g": Agg2.GAMMA_ONLY, "d": Agg2.DELTA_ONLY},
    Family.FT: {"g": Agg2.GAMMA, "t": Agg2.THETA, "g,t": Agg2.GAMMA_AND_THETA,
                "g,t=": Agg2.THETA_EQUALITY_INVALID},
}

_GREEK = str.maketrans({"α": "a", "β": "b", "γ": "g", "δ": "d", "θ": "t"})
_NAME_RE = re.compile(r"^(OR)?(DW|GW|FT|PK)(?:\(([^()]*)\))?(\[eq\])?(?:-(A|F|RB|NOUB|HM))?$")


def format_name(mid: ModelId) -> str:
    s = ("OR" if mid.restricted else "") + mid.family.value
    if mid.agg2 is Agg2.HM_INVALID:
        return s + "-HM"
    if mid.variant in (Variant.ORDW_A, Variant.ORDW_FULL_ALPHA):
        return s + "-" + mid.variant.value
    if mid.alpha or mid.agg2 is not Agg2.NONE:
        s += "(" + ("a" if mid.alpha else "*")
        if mid.agg2 is not Agg2.NONE:
            s += "," + _TOKEN_OUT[mid.agg2]
        s += ")"
    if mid.ft_equality:
        s += "[eq]"
    if mid.variant is not Variant.NONE:
        s += "-" + mid.variant.value
    return s


def parse_name(text: str) -> ModelId:
    raw = text.strip().translate(_GREEK).replace(" ", "")
    m = _NAME_RE.match(raw)
    if not m:
        raise CatalogError(f"cannot parse model name {text!r}")
    restricted = m.group(1) is not None
    family = Family(m.group(2))
    args, eq, suffix = m.group(3), m.group(4) is not None, m.group(5)
    alpha, agg2, variant = False, Agg2.NONE, Variant.NONE
    if args is not None:
        toks = args.split(",")
        first = toks[0]
        if first not in ("a", "*"):
            raise CatalogError(f"first slot of {text!r} must be 'a' or '*'")
        alpha = first == "a"
        rest = ",".join(t for t in toks[1:] if t not in ("*", ""))
        if rest:
            try:
                agg2 = _TOKEN_IN[family][rest]
            except KeyError:
                raise CatalogError(f"{family.value} has no aggregation {rest!r}") from None
    if suffix == "HM":
        if args is not None or family is not Family.GW:
            raise CatalogError("-HM applies to plain GW only")
        agg2 = Agg2.HM_INVALID
    elif suffix in ("A", "F"):
        if args is not None:
            raise CatalogError(f"ORDW-{suffix} takes no arguments")
        alpha = True
        variant = Variant(suffix)
    elif suffix is not None:
        variant = Variant(suffix)
    try:
        return ModelId(family, restricted, alpha, agg2, eq, variant)
    except CatalogError as e:
        raise CatalogError(f"{text!r}: {e}") from None


# --- catalog ------------------------------------------------------------------------

_VALID_NAMES = [
    # basic models
    "DW", "GW", "FT", "FT[eq]", "PK",
    # type-1 aggregation
    "DW(a)", "GW(a)", "FT(a)", "PK(a)",
    # type-2 aggregation
    "PK(*,b)", "FT(*,g)", "FT(*,t)", "FT(*,g,t)",
    "GW(*,g+d)", "GW(*,g,d)", "GW(*,g)", "GW(*,d)",
    # simultaneous
    "GW(a,g+d)", "GW(a,g,d)", "GW(a,g)", "GW(a,d)",
    "FT(a,g)", "FT(a,t)", "FT(a,g,t)", "PK(a,b)",
    # optimality restricted
    "ORDW", "ORGW", "ORFT", "ORPK",
    "ORDW(a)", "ORGW(a)", "ORFT(a)", "ORPK(a)",
    "ORPK(*,b)", "ORGW(*,g+d)", "ORGW(*,g,d)", "ORGW(*,g)", "ORGW(*,d)",
    "ORFT(*,g,t)", "ORFT(*,g)", "ORFT(*,t)",
    "ORPK(a,b)", "ORGW(a,g+d)", "ORGW(a,g,d)", "ORGW(a,g)", "ORGW(a,d)",
    "ORFT(a,g,t)", "ORFT(a,g)", "ORFT(a,t)",
]

_INVALID_NAMES = [
    "DW(*,b)", "GW-HM", "FT(a,g,t=)", "ORDW-A", "ORDW-F", "ORPK(*,b)-RB", "PK(a)-NOUB",
]


def catalog(include_invalid: bool = True) -> list[ModelId]:
    names = _VALID_NAMES + (_INVALID_NAMES if include_invalid else [])
    return [parse_name(s) for s in names]


def valid_models() -> list[ModelId]:
    return catalog(include_invalid=False)


def invalid_models() -> list[ModelId]:
    return [parse_name(s) for s in _INVALID_NAMES]


# --- weights ------------------------------------------------------------------------

WEIGHT_KINDS = ("alpha", "beta", "gamma", "delta", "theta")


class WeightMode(enum.Enum):
    UNIT = "unit"
    CUSTOM = "custom"
    DUAL_EXACT = "dual-exact"
    DUAL_MILP_SAFE = "dual-safe"


class MissingWeightError(KeyError):
    pass


@dataclass(frozen=True)
class WeightSet:
    """Aggregation multipliers keyed by weight kind and 0-based pair (i, j).

    For ``delta`` the pair (i, j) refers to the row of i with j in S_i, i.e.
    the multiplier of ``y_ji - x_i <= 0``.
    """

    mode: WeightMode = WeightMode.UNIT
    alpha: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    beta: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    gamma: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    delta: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    theta: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    @classmethod
    def unit(cls) -> "WeightSet":
        return cls(WeightMode.UNIT)

    def get(self, kind: str, pair: tuple[int, int]) -> Fraction:
        if self.mode is WeightMode.UNIT:
            return Fraction(1)
        table = getattr(self, kind)
        try:
            return table[pair]
        except KeyError:
            raise MissingWeightError(f"missing {kind} weight for pair "
                                     f"({pair[0] + 1},{pair[1] + 1})") from None

    def with_replacement(self, eps=1) -> "WeightSet":
        """Replace zero (or tiny negative) multipliers by ``eps``."""
        e = Fraction(eps)

        def fix(tab):
            return {k: (v if v > 0 else e) for k, v in tab.items()}

        return WeightSet(WeightMode.DUAL_MILP_SAFE, *(fix(getattr(self, k)) for k in WEIGHT_KINDS))

    def merged(self, other: "WeightSet", mode: WeightMode | None = None) -> "WeightSet":
        tabs = {k: {**getattr(self, k), **getattr(other, k)} for k in WEIGHT_KINDS}
        return WeightSet(mode or other.mode, **tabs)

    def as_jsonable(self) -> dict:
        out = {"mode": self.mode.value}
        for k in WEIGHT_KINDS:
            tab = getattr(self, k)
            if tab:
                out[k] = {f"{i + 1},{j + 1}": str(v) for (i, j), v in sorted(tab.items())}
        return out

    @classmethod
    def from_jsonable(cls, data: Mapping) -> "WeightSet":
        mode = WeightMode(data.get("mode", "custom"))
        tabs = {}
        for k in WEIGHT_KINDS:
            tab = {}
            for key, v in data.get(k, {}).items():
                i, j = (int(t) - 1 for t in key.split(","))
                tab[(i, j)] = Fraction(v)
            tabs[k] = tab
        return cls(mode, **tabs)


# --- recipes ------------------------------------------------------------------------

# elementary rows: kind -> (label, weight kind)
_ELEMENTARY = {
    "T1": "alpha",
    "DW2": "beta",
    "GWR": "gamma",
    "GWC": "delta",
    "FT5": "gamma",
    "FT6": "theta",
    "FTEQ": None,
    "PK6": "beta",
}


@dataclass(frozen=True)
class Block:
    members: tuple[tuple[str, str], ...]  # (elementary kind, index set name)
    aggregated: bool = False
    label: str = ""                       # label of the aggregated row
    sense: Sense = Sense.LE


@dataclass(frozen=True)
class Recipe:
    blocks: tuple[Block, ...]
    y_lower: str          # index set where y >= 0 ("r" or "r_minus")
    y_upper: str | None   # index set where y <= 1
    y_binary: str | None  # index set where y is binary


def _blk(kind, which, agg=False, label="", sense=Sense.LE):
    return Block(((kind, which),), agg, label, sense)


def recipe(mid: ModelId) -> Recipe:
    f, a2, v = mid.family, mid.agg2, mid.variant
    if mid.restricted:
        full = mid.alpha  # with type-1 aggregation the type-2 rows come from the basic model
        r2, s2 = ("r", "s") if full else ("r_plus", "s_plus")
        t1 = (_blk("T1", "r_minus", True, "A1") if mid.alpha else _blk("T1", "r_minus"))
    else:
        r2, s2 = "r", "s"
        t1 = _blk("T1", "r", True, "A1") if mid.alpha else _blk("T1", "r")

    blocks: list[Block] = [t1]
    y_lower, y_upper, y_binary = "r", None, None

    if f is Family.DW:
        if v is Variant.ORDW_FULL_ALPHA:
            blocks = [_blk("T1", "r", True, "A1")]
        if mid.restricted and not mid.alpha or v is not Variant.NONE:
            blocks.append(_blk("DW2", "r_plus"))
            y_lower, y_binary = "r_minus", "r_plus"
        elif a2 is Agg2.BETA_INVALID:
            blocks.append(_blk("DW2", "r", True, "ADW2"))
            y_binary = "r"
        else:
            blocks.append(_blk("DW2", "r"))
            y_binary = "r"

    elif f is Family.GW:
        if mid.restricted and not mid.alpha and a2 is Agg2.NONE:
            y_lower = "r_minus"
        if a2 is Agg2.NONE:
            blocks += [_blk("GWR", r2), _blk("GWC", s2)]
        elif a2 is Agg2.GAMMA_PLUS_DELTA:
            blocks.append(Block((("GWR", r2), ("GWC", s2)), True, "AGW"))
        elif a2 is Agg2.GAMMA_AND_DELTA:
            blocks += [_blk("GWR", r2, True, "AGWR"), _blk("GWC", s2, True, "AGWC")]
        elif a2 is Agg2.GAMMA_ONLY:
            blocks += [_blk("GWR", r2, True, "AGWR"), _blk("GWC", s2)]
        elif a2 is Agg2.DELTA_ONLY:
            blocks += [_blk("GWR", r2), _blk("GWC", s2, True, "AGWC")]
        elif a2 is Agg2.HM_INVALID:
            blocks.append(_blk("GWR", "r", True, "AGWR"))
        if a2 is not Agg2.NONE:
            y_upper = "r"

    elif f is Family.FT:
        sym = _blk("FTEQ", "r_eq" if r2 == "r" else "r_plus_eq", sense=Sense.EQ) \
            if mid.ft_equality else _blk("FT6", r2)
        if mid.restricted and not mid.alpha and a2 is Agg2.NONE:
            y_lower = "r_minus"
        if a2 is Agg2.NONE:
            blocks += [_blk("FT5", r2), sym]
        elif a2 is Agg2.GAMMA:
            blocks += [_blk("FT5", r2, True, "AFT5"), sym]
        elif a2 is Agg2.THETA:
            blocks += [_blk("FT5", r2), _blk("FT6", r2, True, "AFT6")]
        elif a2 is Agg2.GAMMA_AND_THETA:
            blocks += [_blk("FT5", r2, True, "AFT5"), _blk("FT6", r2, True, "AFT6")]
        elif a2 is Agg2.THETA_EQUALITY_INVALID:
            blocks += [_blk("FT5", r2, True, "AFT5"),
                       _blk("FT6", r2, True, "AFT6E", Sense.EQ)]
        if mid.alpha and a2 is not Agg2.NONE:
            y_upper = "r"
        elif a2 in (Agg2.GAMMA, Agg2.GAMMA_AND_THETA):
            y_upper = "r" if not mid.restricted else "r_plus"
        elif a2 is Agg2.THETA and mid.restricted:
            y_upper = "r_plus"

    elif f is Family.PK:
        if a2 is Agg2.NONE:
            blocks.append(_blk("PK6", r2))
        else:
            blocks.append(_blk("PK6", r2, True, "APK6"))
        if mid.restricted and not mid.alpha:
            y_lower = "r_minus" if a2 is Agg2.NONE or v is Variant.REDUCED_BOUNDS else "r"
            y_upper = "r_plus" if a2 is Agg2.BETA else None
        elif mid.alpha or a2 is Agg2.BETA:
            y_upper = None if v is Variant.NO_UPPER_BOUNDS else "r"

    return Recipe(tuple(blocks), y_lower, y_upper, y_binary)


def _set_members(sets: IndexSets, which: str) -> list[list[int]]:
    if which.endswith("_eq"):
        base = getattr(sets, which[:-3])
        return [[j for j in base[i] if j > i] for i in range(sets.n)]
    return [list(t) for t in getattr(sets, which)]


def required_weights(mid: ModelId, sets: IndexSets) -> list[tuple[str, list[tuple[int, int]]]]:
    out: dict[str, list[tuple[int, int]]] = {}
    for blk in recipe(mid).blocks:
        if not blk.aggregated:
            continue
        for kind, which in blk.members:
            wk = _ELEMENTARY[kind]
            members = _set_members(sets, which)
            out.setdefault(wk, []).extend((i, j) for i in range(sets.n) for j in members[i])
    return [(k, sorted(set(v))) for k, v in out.items()]


# --- builder ------------------------------------------------------------------------

def _elementary(kind: str, i: int, j: int, x, y) -> tuple[dict[int, Fraction], Fraction]:
    one = Fraction(1)
    if kind == "T1":
        return {x(i): one, x(j): one, y(i, j): -one}, one
    if kind == "DW2":
        return {y(i, j): Fraction(2), x(i): -one, x(j): -one}, Fraction(0)
    if kind in ("GWR", "FT5"):
        return {y(i, j): one, x(i): -one}, Fraction(0)
    if kind == "GWC":
        return {y(j, i): one, x(i): -one}, Fraction(0)
    if kind in ("FT6", "FTEQ"):
        return {y(i, j): one, y(j, i): -one}, Fraction(0)
    if kind == "PK6":
        return {y(i, j): one, y(j, i): one, x(i): Fraction(-2)}, Fraction(0)
    raise AssertionError(kind)


def _fmt_frac(v: Fraction) -> str:
    return str(v)


def build(mid: ModelId, inst: QuboInstance, w: WeightSet | None = None, *,
          allow_invalid: bool = False, lp_study: bool = False,
          expand: bool = False) -> MilpModel:
    """Build the MILP of ``mid`` on ``inst``.

    ``expand`` emits every aggregated block as its individual member rows (same
    bounds and integrality); its LP duals are the aggregation multipliers that
    keep the LP value unchanged. ``lp_study`` drops all integrality and allows
    zero multipliers.
    """
    if mid.known_invalid and not allow_invalid:
        raise CatalogError(f"{mid.name} is a known invalid model; pass allow_invalid")
    if inst.asymmetric and not allow_invalid and not lp_study:
        raise CatalogError("asymmetric instances are accepted only for LP studies")
    w = w if w is not None else WeightSet.unit()
    if w.mode is WeightMode.DUAL_EXACT and not lp_study:
        zero = [k for k in WEIGHT_KINDS for v in getattr(w, k).values() if v <= 0]
        if zero:
            raise CatalogError("DUAL_EXACT weights contain zeros; use lp_study or DUAL_MILP_SAFE")

    sets = inst.sets
    n = inst.n
    rec = recipe(mid)

    variables: list[Variable] = [
        Variable(f"x_{i + 1}", 0, 1, not lp_study) for i in range(n)]
    ypos: dict[tuple[int, int], int] = {}
    lower_set = {(i, j) for i in range(n) for j in getattr(sets, rec.y_lower)[i]}
    upper_set = set() if rec.y_upper is None else {
        (i, j) for i in range(n) for j in getattr(sets, rec.y_upper)[i]}
    bin_set = set() if rec.y_binary is None else {
        (i, j) for i in range(n) for j in getattr(sets, rec.y_binary)[i]}
    for i, j in sets.pairs("r"):
        ypos[(i, j)] = len(variables)
        is_bin = (i, j) in bin_set
        lo = 0 if (i, j) in lower_set or is_bin else -INF
        hi = 1 if (i, j) in upper_set or is_bin else INF
        variables.append(Variable(f"y_{i + 1}_{j + 1}", lo, hi, is_bin and not lp_study))

    def x(i):
        return i

    def y(i, j):
        try:
            return ypos[(i, j)]
        except KeyError:
            raise CatalogError(f"product ({i + 1},{j + 1}) needs q_{j + 1}{i + 1} != 0") from None

    constraints: list[Constraint] = []
    for blk in rec.blocks:
        if blk.aggregated and not expand:
            for i in range(n):
                acc: dict[int, Fraction] = {}
                rhs = Fraction(0)
                count = 0
                for kind, which in blk.members:
                    wk = _ELEMENTARY[kind]
                    for j in _set_members(sets, which)[i]:
                        weight = Fraction(w.get(wk, (i, j)))
                        if weight < 0 and not allow_invalid:
                            raise CatalogError(f"negative {wk} weight at ({i + 1},{j + 1})")
                        if weight == 0 and not lp_study:
                            raise CatalogError(f"zero {wk} weight at ({i + 1},{j + 1})")
                        count += 1
                        terms, r = _elementary(kind, i, j, x, y)
                        for k, a in terms.items():
                            acc[k] = acc.get(k, Fraction(0)) + weight * a
                        rhs += weight * r
                if count == 0:
                    continue
                terms_t = tuple((k, a) for k, a in sorted(acc.items()) if a != 0)
                if not terms_t and rhs >= 0 and blk.sense is Sense.LE:
                    continue
                tag = LABELS[blk.label][0]
                constraints.append(Constraint(f"{blk.label}_{i + 1}", terms_t, blk.sense, rhs,
                                              tag, blk.label))
        else:
            for kind, which in blk.members:
                members = _set_members(sets, which)
                tag = LABELS[kind][0]
                sense = Sense.EQ if kind == "FTEQ" else Sense.LE
                for i in range(n):
                    for j in members[i]:
                        terms, r = _elementary(kind, i, j, x, y)
                        constraints.append(Constraint(
                            f"{kind}_{i + 1}_{j + 1}", tuple(sorted(terms.items())), sense, r,
                            tag, kind))

    objective = [(i, inst.c[i]) for i in range(n) if inst.c[i] != 0]
    objective += [(ypos[(i, j)], inst.q[i][j]) for i, j in sets.pairs("r")]
    meta = {"model": mid.name, "instance": inst.name, "weights": w.mode.value}
    if expand:
        meta["expanded"] = "1"
    return MilpModel(tuple(variables), tuple(constraints), tuple(objective),
                     name=mid.name, fingerprint=inst.fingerprint, meta=meta)


def weights_from_duals(mid: ModelId, expanded: MilpModel, duals: Mapping[str, float],
                       sets: IndexSets) -> WeightSet:
    """Read aggregation multipliers off the duals of an expanded model."""
    tabs: dict[str, dict[tuple[int, int], Fraction]] = {k: {} for k in WEIGHT_KINDS}
    for blk in recipe(mid).blocks:
        if not blk.aggregated:
            continue
        for kind, which in blk.members:
            wk = _ELEMENTARY[kind]
            members = _set_members(sets, which)
            for i in range(sets.n):
                for j in members[i]:
                    name = f"{kind}_{i + 1}_{j + 1}"
                    v = float(duals[name])
                    if blk.sense is Sense.LE and v < 0:
                        v = 0.0 if v > -1e-9 else v
                    tabs[wk][(i, j)] = Fraction(v)
    return WeightSet(WeightMode.DUAL_EXACT, **tabs)


# --- closed-form constraint counts --------------------------------------------------

def expected_constraint_count(mid: ModelId, sets: IndexSets) -> int:
    """General-constraint count from the closed-form formulas.

    Dense formulas such as 3n(n-1) are written in their sparse form: a sum of
    |R_i| terms for per-pair rows and the number of non-empty index sets for
    aggregated rows.
    """
    n = sets.n
    sz = {k: sum(len(t) for t in getattr(sets, k)) for k in
          ("r", "r_plus", "r_minus", "s", "s_plus")}
    nz = {k: sum(1 for t in getattr(sets, k) if t) for k in
          ("r", "r_plus", "r_minus", "s", "s_plus")}
    n_rs = sum(1 for i in range(n) if sets.r[i] or sets.s[i])
    n_rs_plus = sum(1 for i in range(n) if sets.r_plus[i] or sets.s_plus[i])
    upper_pairs = sum(1 for i in range(n) for j in sets.r[i] if j > i)
    upper_pairs_plus = sum(1 for i in range(n) for j in sets.r_plus[i] if j > i)
    R, Rp, Rm, S, Sp = sz["r"], sz["r_plus"], sz["r_minus"], sz["s"], sz["s_plus"]
    nR, nRp, nRm, nS, nSp = nz["r"], nz["r_plus"], nz["r_minus"], nz["s"], nz["s_plus"]

    name = mid.name
    table = {
        # 2n(n-1), 3n(n-1), 3n(n-1), 5/2 n(n-1), 2n(n-1)
        "DW": 2 * R, "GW": R + R + S, "FT": 3 * R, "FT[eq]": 2 * R + upper_pairs, "PK": 2 * R,
        # n^2, n(2n-1), n(2n-1), n^2
        "DW(a)": nR + R, "GW(a)": nR + R + S, "FT(a)": nR + 2 * R, "PK(a)": nR + R,
        "PK(a)-NOUB": nR + R,
        # n^2, n(2n-1), n(2n-1), n^2+n
        "PK(*,b)": R + nR, "FT(*,g)": 2 * R + nR, "FT(*,t)": 2 * R + nR,
        "FT(*,g,t)": R + 2 * nR, "FT(*,g)[eq]": R + upper_pairs + nR,
        # n^2, n(n+1), n(2n-1), n(2n-1)
        "GW(*,g+d)": R + n_rs, "GW(*,g,d)": R + nR + nS, "GW(*,g)": 2 * R + nR,
        "GW(*,d)": R + S + nS, "GW-HM": R + nR, "DW(*,b)": R + nR,
        # 2n, 3n, n(n+1), n(n+1)
        "GW(a,g+d)": nR + n_rs, "GW(a,g,d)": nR + nR + nS, "GW(a,g)": nR + nR + S,
        "GW(a,d)": nR + R + nS,
        # n(n+1), n(n+1), 3n, 3n, 2n
        "FT(a,g)": 2 * nR + R, "FT(a,t)": 2 * nR + R, "FT(a,g,t)": 3 * nR,
        "FT(a,g,t=)": 3 * nR, "PK(a,b)": 2 * nR,
        # sum(|R-|+|R+|), sum(2|R+|+|R-|), sum(2|R+|+|R-|), sum(|R-|+|R+|)
        "ORDW": Rm + Rp, "ORGW": Rm + Rp + Sp, "ORFT": Rm + 2 * Rp, "ORPK": Rm + Rp,
        "ORFT[eq]": Rm + Rp + upper_pairs_plus,
        # OR type-1 aggregation keeps the type-2 rows of the basic model
        "ORDW(a)": nRm + R, "ORGW(a)": nRm + R + S, "ORFT(a)": nRm + 2 * R, "ORPK(a)": nRm + R,
        "ORDW-A": nRm + Rp, "ORDW-F": nR + Rp,
        # n + sum|R-|, n + sum|R-|, 2n + sum|R-|, n + sum(|R-|+|R+|)
        "ORPK(*,b)": Rm + nRp, "ORPK(*,b)-RB": Rm + nRp,
        "ORGW(*,g+d)": Rm + n_rs_plus, "ORGW(*,g,d)": Rm + nRp + nSp,
        "ORGW(*,g)": Rm + nRp + Sp, "ORGW(*,d)": Rm + Rp + nSp,
        "ORFT(*,g,t)": Rm + 2 * nRp, "ORFT(*,g)": Rm + nRp + Rp, "ORFT(*,t)": Rm + Rp + nRp,
        "ORFT(*,g)[eq]": Rm + nRp + upper_pairs_plus,
        # simultaneous OR: aggregated full type-2 rows
        "ORPK(a,b)": nRm + nR, "ORGW(a,g+d)": nRm + n_rs, "ORGW(a,g,d)": nRm + nR + nS,
        "ORGW(a,g)": nRm + nR + S, "ORGW(a,d)": nRm + R + nS,
        "ORFT(a,g,t)": nRm + 2 * nR, "ORFT(a,g)": nRm + nR + R, "ORFT(a,t)": nRm + R + nR,
    }
    try:
        return table[name]
    except KeyError:
        raise CatalogError(f"no closed-form count for {name}") from None


def unit_weights_for(mid: ModelId, sets: IndexSets) -> WeightSet:
    tabs = {k: {} for k in WEIGHT_KINDS}
    for kind, pairs in required_weights(mid, sets):
        tabs[kind] = {p: Fraction(1) for p in pairs}
    return WeightSet(WeightMode.CUSTOM, **tabs)


def random_weights_for(mid: ModelId, sets: IndexSets, rng, low: int = 1, high: int = 10) -> WeightSet:
    tabs = {k: {} for k in WEIGHT_KINDS}
    for kind, pairs in required_weights(mid, sets):
        tabs[kind] = {p: Fraction(int(rng.integers(low, high + 1))) for p in pairs}
    return WeightSet(WeightMode.CUSTOM, **tabs)


__all__ = [
    "Agg2", "Block", "CatalogError", "Family", "MissingWeightError", "ModelId", "Recipe",
    "Variant", "WeightMode", "WeightSet", "build", "catalog", "expected_constraint_count",
    "format_name", "invalid_models", "parse_name", "random_weights_for", "recipe",
    "required_weights", "unit_weights_for", "valid_models", "weights_from_duals",
]
