"""Generic maximization MILP with constraint provenance."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

INF = math.inf


class Tag(enum.Enum):
    TYPE1 = "TYPE1"
    TYPE2 = "TYPE2"
    AGG_TYPE1 = "AGG_TYPE1"
    AGG_TYPE2 = "AGG_TYPE2"
    BOUND = "BOUND"
    SYMMETRY = "SYMMETRY"
    OTHER = "OTHER"


class Sense(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


# Row-name prefixes. Names are "<LABEL>_<i>_<j>" for single products and
# "<LABEL>_<i>" for aggregated rows (1-based).
LABELS: dict[str, tuple[Tag, str]] = {
    "T1": (Tag.TYPE1, "x_i + x_j - y_ij <= 1"),
    "DW2": (Tag.TYPE2, "2 y_ij - x_i - x_j <= 0"),
    "GWR": (Tag.TYPE2, "y_ij - x_i <= 0, j in R_i"),
    "GWC": (Tag.TYPE2, "y_ji - x_i <= 0, j in S_i"),
    "FT5": (Tag.TYPE2, "y_ij - x_i <= 0"),
    "FT6": (Tag.SYMMETRY, "y_ij - y_ji <= 0"),
    "FTEQ": (Tag.SYMMETRY, "y_ij = y_ji, j > i"),
    "PK6": (Tag.TYPE2, "y_ij + y_ji - 2 x_i <= 0"),
    "A1": (Tag.AGG_TYPE1, "weighted sum of T1 rows of i"),
    "ADW2": (Tag.AGG_TYPE2, "weighted sum of DW2 rows of i"),
    "AGWR": (Tag.AGG_TYPE2, "weighted sum of GWR rows of i"),
    "AGWC": (Tag.AGG_TYPE2, "weighted sum of GWC rows of i"),
    "AGW": (Tag.AGG_TYPE2, "weighted sum of GWR and GWC rows of i"),
    "AFT5": (Tag.AGG_TYPE2, "weighted sum of FT5 rows of i"),
    "AFT6": (Tag.AGG_TYPE2, "weighted sum of FT6 rows of i"),
    "AFT6E": (Tag.AGG_TYPE2, "weighted sum of FT6 rows of i, as equality"),
    "APK6": (Tag.AGG_TYPE2, "weighted sum of PK6 rows of i"),
}


def tag_for_name(name: str) -> tuple[Tag, str]:
    label = name.split("_", 1)[0]
    if label in LABELS:
        return LABELS[label][0], label
    return Tag.OTHER, ""


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float | Fraction = 0
    upper: float | Fraction = INF
    binary: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ModelError(f"{self.name}: lower bound above upper bound")
        if self.binary and (self.lower < 0 or self.upper > 1):
            raise ModelError(f"{self.name}: binary variable with bounds outside [0, 1]")


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, Fraction], ...]
    sense: Sense
    rhs: Fraction
    tag: Tag = Tag.OTHER
    label: str = ""


@dataclass(frozen=True)
class MilpModel:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, Fraction], ...]
    name: str = ""
    fingerprint: str = ""
    meta: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nv = len(self.variables)
        for con in self.constraints:
            seen = set()
            for k, _ in con.terms:
                if not 0 <= k < nv:
                    raise ModelError(f"{con.name}: unknown variable index {k}")
                if k in seen:
                    raise ModelError(f"{con.name}: duplicate variable {self.variables[k].name}")
                seen.add(k)
        for k, _ in self.objective:
            if not 0 <= k < nv:
                raise ModelError(f"objective: unknown variable index {k}")

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.name: k for k, v in enumerate(self.variables)}

    @property
    def integer_indices(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.binary]

    def evaluate(self, values: Sequence[float]) -> float:
        return sum(float(a) * values[k] for k, a in self.objective)

    def violations(self, values: Sequence[float], tol: float = 1e-9) -> list[str]:
        out = []
        for k, v in enumerate(self.variables):
            if values[k] < v.lower - tol or values[k] > v.upper + tol:
                out.append(v.name)
        for con in self.constraints:
            lhs = sum(float(a) * values[k] for k, a in con.terms)
            rhs = float(con.rhs)
            if (con.sense is Sense.LE and lhs > rhs + tol) or (
                    con.sense is Sense.GE and lhs < rhs - tol) or (
                    con.sense is Sense.EQ and abs(lhs - rhs) > tol):
                out.append(con.name)
        return out

    def relaxed(self) -> "MilpModel":
        vs = tuple(Variable(v.name, v.lower, v.upper, False) for v in self.variables)
        return MilpModel(vs, self.constraints, self.objective, self.name, self.fingerprint, self.meta)


def count_general_constraints(m: MilpModel) -> int:
    return sum(1 for con in m.constraints if con.tag is not Tag.BOUND)


def count_by_tag(m: MilpModel) -> dict[Tag, int]:
    out: dict[Tag, int] = {}
    for con in m.constraints:
        out[con.tag] = out.get(con.tag, 0) + 1
    return out
