"""QUBO instances, index sets and exact objective evaluation.

Indices are 0-based inside the library. Everything that leaves it (variable
names, constraint names, instance files, reports) is 1-based.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np


class InvalidInstanceError(ValueError):
    pass


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    f = float(v)
    if not np.isfinite(f):
        raise InvalidInstanceError(f"non-finite coefficient {v!r}")
    return Fraction(f)


@dataclass(frozen=True)
class QuboInstance:
    """maximize sum_i sum_{j in R_i} q_ij x_i x_j + sum_i c_i x_i over binary x.

    ``asymmetric`` switches on the research mode used for the asymmetric
    LP-relaxation example; only the support pattern of Q then has to be
    symmetric.
    """

    n: int
    q: tuple[tuple[Fraction, ...], ...]
    c: tuple[Fraction, ...]
    name: str = ""
    asymmetric: bool = field(default=False, compare=False)

    @classmethod
    def from_lists(cls, q: Sequence[Sequence], c: Sequence, name: str = "",
                   asymmetric: bool = False) -> "QuboInstance":
        qq = tuple(tuple(_as_fraction(v) for v in row) for row in q)
        cc = tuple(_as_fraction(v) for v in c)
        inst = cls(len(cc), qq, cc, name, asymmetric)
        problem = validate(inst)
        if problem is not None:
            raise InvalidInstanceError(problem)
        return inst

    @cached_property
    def q_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.q], dtype=float).reshape(self.n, self.n)

    @cached_property
    def c_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.c], dtype=float)

    @cached_property
    def sets(self) -> "IndexSets":
        return index_sets(self)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n}|{int(self.asymmetric)}|".encode())
        h.update(",".join(str(v) for v in self.c).encode())
        for row in self.q:
            h.update(("|" + ",".join(str(v) for v in row)).encode())
        return h.hexdigest()[:16]

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.c) and all(
            v.denominator == 1 for row in self.q for v in row)

    def transpose(self) -> "QuboInstance":
        qt = tuple(tuple(self.q[j][i] for j in range(self.n)) for i in range(self.n))
        return QuboInstance(self.n, qt, self.c, self.name, self.asymmetric)

    def permute(self, perm: Sequence[int]) -> "QuboInstance":
        """Relabel variable ``perm[k]`` as ``k``."""
        q = tuple(tuple(self.q[perm[i]][perm[j]] for j in range(self.n)) for i in range(self.n))
        c = tuple(self.c[perm[i]] for i in range(self.n))
        return QuboInstance(self.n, q, c, self.name, self.asymmetric)


@dataclass(frozen=True)
class IndexSets:
    r: tuple[tuple[int, ...], ...]
    r_plus: tuple[tuple[int, ...], ...]
    r_minus: tuple[tuple[int, ...], ...]
    s: tuple[tuple[int, ...], ...]
    s_plus: tuple[tuple[int, ...], ...]
    s_minus: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.r)

    def pairs(self, which: str = "r") -> list[tuple[int, int]]:
        sets = getattr(self, which)
        return [(i, j) for i in range(len(sets)) for j in sets[i]]


def index_sets(inst: QuboInstance) -> IndexSets:
    n, q = inst.n, inst.q
    r = tuple(tuple(j for j in range(n) if q[i][j] != 0) for i in range(n))
    rp = tuple(tuple(j for j in range(n) if q[i][j] > 0) for i in range(n))
    rm = tuple(tuple(j for j in range(n) if q[i][j] < 0) for i in range(n))
    s = tuple(tuple(j for j in range(n) if q[j][i] != 0) for i in range(n))
    sp = tuple(tuple(j for j in range(n) if q[j][i] > 0) for i in range(n))
    sm = tuple(tuple(j for j in range(n) if q[j][i] < 0) for i in range(n))
    return IndexSets(r, rp, rm, s, sp, sm)


def validate(inst: QuboInstance) -> str | None:
    """Return ``None`` for a valid instance, else the first violation found."""
    n = inst.n
    if n < 1:
        return "dimension must be at least 1"
    if len(inst.c) != n or len(inst.q) != n or any(len(row) != n for row in inst.q):
        return "shape mismatch between q and c"
    for i in range(n):
        if not np.isfinite(float(inst.c[i])):
            return f"non-finite linear coefficient at {i + 1}"
        for j in range(n):
            if not np.isfinite(float(inst.q[i][j])):
                return f"non-finite entry at ({i + 1},{j + 1})"
    for i in range(n):
        if inst.q[i][i] != 0:
            return f"nonzero diagonal at {i + 1}"
    for i in range(n):
        for j in range(i + 1, n):
            a, b = inst.q[i][j], inst.q[j][i]
            if inst.asymmetric:
                if (a == 0) != (b == 0):
                    return f"asymmetric support at ({i + 1},{j + 1})"
            elif a != b:
                return f"asymmetric at ({i + 1},{j + 1})"
    return None


def qubo_value(inst: QuboInstance, x: Sequence[int]) -> Fraction:
    """Exact objective. Both orientations of each pair are counted."""
    if len(x) != inst.n:
        raise ValueError(f"expected {inst.n} entries, got {len(x)}")
    xs = []
    for k, v in enumerate(x):
        if v not in (0, 1):
            raise ValueError(f"non-binary entry {v!r} at position {k + 1}")
        xs.append(int(v))
    ones = [i for i, v in enumerate(xs) if v]
    total = sum((inst.c[i] for i in ones), Fraction(0))
    for i in ones:
        row = inst.q[i]
        for j in ones:
            total += row[j]
    return total


# --- built-in fixtures ----------------------------------------------------------------

def ex1(alpha=1) -> QuboInstance:
    return QuboInstance.from_lists([[0, alpha], [alpha, 0]], [0, 0], name="ex1")


EX2_Q = [[0, 3, -6, -3], [3, 0, 6, 3], [-6, 6, 0, -6], [-3, 3, -6, 0]]


def ex2() -> QuboInstance:
    return QuboInstance.from_lists(EX2_Q, [-3, -6, 0, 3], name="ex2")


def ex3() -> QuboInstance:
    return QuboInstance.from_lists([[0, 1, 1], [1, 0, 0], [1, 0, 0]], [1, -5, -5], name="ex3")


def ex6a() -> QuboInstance:
    return QuboInstance.from_lists([[0, -2, 0], [-2, 0, -1], [0, -1, 0]], [5, 5, 0], name="ex6a")


def ex6b() -> QuboInstance:
    return QuboInstance.from_lists([[0, 6, 1], [6, 0, -7], [1, -7, 0]], [-7, -2, -15], name="ex6b")


def ex7(alpha=1) -> QuboInstance:
    a = Fraction(alpha)
    return QuboInstance.from_lists([[0, 3 * a], [-a, 0]], [-a, -a], name="ex7", asymmetric=True)


def ex8(alpha=1) -> QuboInstance:
    a = Fraction(alpha)
    return QuboInstance.from_lists([[0, a / 2], [a / 2, 0]], [-a, 1], name="ex8")


def hm(c2=0) -> QuboInstance:
    """Two-variable instance used against the Hansen-Meyer aggregation.

    The default has c = (-2, 0). With ``c2=1`` the aggregated model reaches 2
    while the true optimum is 1.
    """
    return QuboInstance.from_lists([[0, 1], [1, 0]], [-2, c2], name="hm" if c2 == 0 else f"hm-c{c2}")


FIXTURES = {
    "ex1": ex1,
    "ex2": ex2,
    "ex3": ex3,
    "ex6a": ex6a,
    "ex6b": ex6b,
    "ex7": ex7,
    "ex8": ex8,
    "hm": hm,
    "hm-c1": lambda: hm(1),
}


def fixture(name: str) -> QuboInstance:
    try:
        return FIXTURES[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
