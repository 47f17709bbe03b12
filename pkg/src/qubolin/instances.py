"""Instance generators, the OR-Library bqp parser and the canonical text format.

Canonical format (UTF-8, LF, 1-based)::

    QUBO <n> [asym]
    c <c_1> ... <c_n>
    <i> <j> <q_ij>        one line per nonzero entry with i < j
                          (every nonzero off-diagonal entry in asym mode)

Numbers are integers or exact fractions ``a/b``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .catalog import build, parse_name
from .qubo import FIXTURES, InvalidInstanceError, QuboInstance, fixture
from .simplex import solve_lp


class BalanceRule(enum.Enum):
    ALL_HALF = "all-half"
    HALF_INTEGRAL_SET = "half-integral-set"


class GenerationExhausted(RuntimeError):
    pass


class InstanceParseError(ValueError):
    def __init__(self, msg: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    c_range: tuple[int, int] = (-10, 10)
    q_range: tuple[int, int] = (-20, 20)
    seed: int = 0
    balance: BalanceRule = BalanceRule.ALL_HALF
    max_attempts: int = 10_000
    tol: float = 1e-7

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("balanced generation needs n >= 2")
        if self.c_range[0] > self.c_range[1] or self.q_range[0] > self.q_range[1]:
            raise ValueError("empty coefficient range")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


@dataclass(frozen=True)
class BalanceTrace:
    attempts: int
    rejections: int
    lp_x: tuple[float, ...]
    lp_value: float


def _symmetric_draw(rng, n, lo, hi):
    q = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    q[iu] = rng.integers(lo, hi + 1, size=len(iu[0]))
    return q + q.T


def gw_relaxation_x(inst: QuboInstance) -> tuple[float, tuple[float, ...]]:
    res = solve_lp(build(parse_name("GW"), inst, lp_study=True))
    return res.objective, tuple(res.primal[f"x_{i + 1}"] for i in range(inst.n))


def is_balanced(xs, rule: BalanceRule, tol: float = 1e-7) -> bool:
    if rule is BalanceRule.ALL_HALF:
        return all(abs(v - 0.5) <= tol for v in xs)
    near = [min(abs(v), abs(v - 0.5), abs(v - 1)) <= tol for v in xs]
    return all(near) and any(abs(v - 0.5) <= tol for v in xs)


def generate_balanced(cfg: GeneratorConfig) -> tuple[QuboInstance, BalanceTrace]:
    """Draw instances until the GW relaxation's x satisfies the balance rule."""
    rng = np.random.default_rng(cfg.seed)
    for attempt in range(1, cfg.max_attempts + 1):
        q = _symmetric_draw(rng, cfg.n, *cfg.q_range)
        c = rng.integers(cfg.c_range[0], cfg.c_range[1] + 1, size=cfg.n)
        inst = QuboInstance.from_lists(q.tolist(), c.tolist(),
                                       name=f"balanced-n{cfg.n}-s{cfg.seed}")
        val, xs = gw_relaxation_x(inst)
        if is_balanced(xs, cfg.balance, cfg.tol):
            return inst, BalanceTrace(attempt, attempt - 1, xs, val)
    raise GenerationExhausted(f"no balanced instance in {cfg.max_attempts} attempts")


def generate_uniform(n: int, q_range: tuple[int, int] = (-100, 100),
                     c_range: tuple[int, int] = (-100, 100), density: float = 1.0,
                     seed: int = 0, name: str = "") -> QuboInstance:
    """Each pair i < j is structurally nonzero with probability ``density``.

    Zero draws for selected pairs are redrawn so the support matches the
    density parameter exactly in distribution.
    """
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if q_range == (0, 0):
        raise ValueError("q range {0} cannot produce structural nonzeros")
    rng = np.random.default_rng(seed)
    q = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                v = 0
                while v == 0:
                    v = int(rng.integers(q_range[0], q_range[1] + 1))
                q[i, j] = q[j, i] = v
    c = rng.integers(c_range[0], c_range[1] + 1, size=n)
    return QuboInstance.from_lists(q.tolist(), c.tolist(),
                                   name=name or f"uniform-n{n}-d{density:g}-s{seed}")


def random_suite(seed: int = 2024, count: int = 50, n_min: int = 4, n_max: int = 10,
                 coef: tuple[int, int] = (-20, 20)) -> list[QuboInstance]:
    """Seeded dense-draw suite: q_ij and c_i uniform integers (zeros allowed)."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        q = _symmetric_draw(rng, n, *coef)
        c = rng.integers(coef[0], coef[1] + 1, size=n)
        out.append(QuboInstance.from_lists(q.tolist(), c.tolist(), name=f"rand-{seed}-{k:02d}"))
    return out


SYMMETRIC_FIXTURES = ("ex1", "ex2", "ex3", "ex6a", "ex6b", "ex8", "hm", "hm-c1")


def builtin_fixtures() -> list[QuboInstance]:
    return [fixture(k) for k in SYMMETRIC_FIXTURES]


# --- OR-Library ---------------------------------------------------------------------------

def parse_orlib(text: str) -> list[QuboInstance]:
    """OR-Library bqp text: count, then per instance ``n m`` and m lines ``i j v``.

    Diagonal entries become linear coefficients (x_i^2 = x_i). Off-diagonal
    entries are added to both q_ij and q_ji; repeated pairs accumulate.
    """
    tokens: list[tuple[str, int]] = []
    for ln, line in enumerate(text.splitlines(), 1):
        for tok in line.split():
            tokens.append((tok, ln))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][1] if tokens else 0
            raise InstanceParseError(f"unexpected end of data, expected {what}", last)
        tok, ln = tokens[pos]
        pos += 1
        try:
            return int(tok), ln
        except ValueError:
            try:
                return Fraction(tok), ln
            except ValueError:
                raise InstanceParseError(f"expected {what}, got {tok!r}", ln) from None

    count, ln = take("instance count")
    if not isinstance(count, int) or count < 0:
        raise InstanceParseError("instance count must be a nonnegative integer", ln)
    out = []
    for k in range(count):
        n, ln = take("dimension")
        m, _ = take("entry count")
        if not isinstance(n, int) or n < 1 or not isinstance(m, int) or m < 0:
            raise InstanceParseError("bad instance header", ln)
        q = [[Fraction(0)] * n for _ in range(n)]
        c = [Fraction(0)] * n
        for _ in range(m):
            i, ln = take("row index")
            j, _ = take("column index")
            v, _ = take("value")
            if not isinstance(i, int) or not isinstance(j, int) or not (1 <= i <= n and 1 <= j <= n):
                raise InstanceParseError(f"index ({i},{j}) out of range 1..{n}", ln)
            if i == j:
                c[i - 1] += v
            else:
                q[i - 1][j - 1] += v
                q[j - 1][i - 1] += v
        out.append(QuboInstance.from_lists(q, c, name=f"orlib-{k + 1}"))
    if pos != len(tokens):
        raise InstanceParseError("trailing data after the last instance", tokens[pos][1])
    return out


# --- canonical text -----------------------------------------------------------------------

def save_canonical(inst: QuboInstance) -> str:
    head = f"QUBO {inst.n}" + (" asym" if inst.asymmetric else "")
    lines = [head, "c " + " ".join(str(v) for v in inst.c)]
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j or inst.q[i][j] == 0 or (j < i and not inst.asymmetric):
                continue
            lines.append(f"{i + 1} {j + 1} {inst.q[i][j]}")
    return "\n".join(lines) + "\n"


def load_canonical(text: str, name: str = "") -> QuboInstance:
    lines = [(k, ln.strip()) for k, ln in enumerate(text.splitlines(), 1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InstanceParseError("empty document", 1)
    k, head = lines[0]
    parts = head.split()
    if len(parts) not in (2, 3) or parts[0] != "QUBO" or (len(parts) == 3 and parts[2] != "asym"):
        raise InstanceParseError("expected 'QUBO <n> [asym]'", k)
    try:
        n = int(parts[1])
    except ValueError:
        raise InstanceParseError("dimension must be an integer", k) from None
    asym = len(parts) == 3
    if len(lines) < 2:
        raise InstanceParseError("missing 'c' line", k)
    k, cl = lines[1]
    cp = cl.split()
    if not cp or cp[0] != "c" or len(cp) != n + 1:
        raise InstanceParseError(f"expected 'c' followed by {n} numbers", k)
    try:
        c = [Fraction(t) for t in cp[1:]]
    except ValueError as e:
        raise InstanceParseError(str(e), k) from None
    q = [[Fraction(0)] * n for _ in range(n)]
    for k, ln in lines[2:]:
        t = ln.split()
        if len(t) != 3:
            raise InstanceParseError("expected 'i j q'", k)
        try:
            i, j, v = int(t[0]), int(t[1]), Fraction(t[2])
        except ValueError:
            raise InstanceParseError("bad entry", k) from None
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise InstanceParseError(f"index ({i},{j}) out of range or on the diagonal", k)
        if not asym and i > j:
            raise InstanceParseError("symmetric files list the upper triangle only", k)
        q[i - 1][j - 1] = v
        if not asym:
            q[j - 1][i - 1] = v
    try:
        return QuboInstance.from_lists(q, c, name=name, asymmetric=asym)
    except InvalidInstanceError as e:
        raise InstanceParseError(str(e)) from None


def load_instance(source: str) -> QuboInstance:
    """A built-in fixture name, or a path to a canonical or OR-Library file."""
    if source.lower() in FIXTURES or source.lower() == "ex7":
        return fixture(source)
    with open(source, encoding="utf-8") as fh:
        text = fh.read()
    first = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if first == "QUBO":
        return load_canonical(text, name=source)
    insts = parse_orlib(text)
    if len(insts) != 1:
        raise InstanceParseError(f"{source} holds {len(insts)} instances; expected one")
    return insts[0]


__all__ = ["BalanceRule", "BalanceTrace", "GenerationExhausted", "GeneratorConfig",
           "InstanceParseError", "SYMMETRIC_FIXTURES", "generate_balanced", "generate_uniform",
           "gw_relaxation_x", "is_balanced", "load_canonical", "load_instance", "builtin_fixtures",
           "parse_orlib", "random_suite", "save_canonical"]
