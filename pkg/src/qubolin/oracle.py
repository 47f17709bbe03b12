"""Brute-force ground truth and model-validity verdicts."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bnb import EnumeratedPoint, MilpStatus, feasible_integral_enumeration, solve_milp
from .catalog import ModelId, WeightSet, build, random_weights_for
from .qubo import QuboInstance, qubo_value
from .simplex import SolverStall

DEFAULT_CAP = 24
_LOW_BITS = 12


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class BruteForceResult:
    value: Fraction
    argmax: tuple[tuple[int, ...], ...]
    truncated: bool = False


def _scaled_integers(inst: QuboInstance):
    den = 1
    for v in inst.c:
        den = math.lcm(den, v.denominator)
    for row in inst.q:
        for v in row:
            den = math.lcm(den, v.denominator)
    q = [[int(v * den) for v in row] for row in inst.q]
    c = [int(v * den) for v in inst.c]
    return q, c, den


def brute_force_opt(inst: QuboInstance, cap: int = DEFAULT_CAP,
                    max_argmax: int = 64) -> BruteForceResult:
    """Exact maximum over all 2^n binary vectors.

    The low ``min(n, 12)`` bits are evaluated as one vectorized block; the high
    bits are walked in Gray-code order, so each step updates the block offset
    and the cross terms by one column of Q.
    """
    n = inst.n
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the brute-force cap {cap}")
    q, c, den = _scaled_integers(inst)
    bound = sum(abs(v) for v in c) + sum(abs(v) for row in q for v in row)
    dtype = np.int64 if bound < 2 ** 62 else object
    qa = np.array(q, dtype=dtype).reshape(n, n)
    ca = np.array(c, dtype=dtype)
    lo = min(n, _LOW_BITS)
    hi = n - lo
    pats = np.arange(1 << lo, dtype=np.int64)
    bits = ((pats[:, None] >> np.arange(lo)) & 1).astype(dtype)   # 2^lo x lo
    ql = qa[:lo, :lo]
    base = bits @ ca[:lo] + np.einsum("pi,ij,pj->p", bits, ql, bits) if lo else np.zeros(1, dtype)
    base = np.asarray(base, dtype=dtype)

    best = None
    winners: list[int] = []
    truncated = False
    xh = [0] * hi
    offset = 0                           # value of the high block alone
    g = np.zeros(lo, dtype=dtype)        # 2 * sum_{j high, x_j = 1} q_ij for low i
    high_code = 0
    for step in range(1 << hi):
        if step:
            j = (step & -step).bit_length() - 1    # Gray code: bit flipped at this step
            col = lo + j
            sgn = 1 if xh[j] == 0 else -1
            inner = ca[col] + 2 * sum(qa[col, lo + k] for k in range(hi) if xh[k] and k != j)
            offset += sgn * inner
            g = g + sgn * 2 * qa[:lo, col]
            xh[j] ^= 1
            high_code ^= 1 << j
        vals = base + offset + (bits @ g if lo else 0)
        m = vals.max()
        if best is None or m > best:
            best = m
            winners = []
            truncated = False
        if m == best:
            for p in np.flatnonzero(vals == m):
                if len(winners) >= max_argmax:
                    truncated = True
                    break
                winners.append(int(p) | (high_code << lo))
    argmax = tuple(sorted(tuple((w >> k) & 1 for k in range(n)) for w in winners))
    return BruteForceResult(Fraction(int(best), den), argmax, truncated)


# --- validity verification -------------------------------------------------------------

class Verdict(enum.Enum):
    VALID_CONFIRMED = "VALID_CONFIRMED"
    INVALID_WITNESS = "INVALID_WITNESS"
    INCONCLUSIVE = "INCONCLUSIVE"


class WeightPolicy(enum.Enum):
    UNIT = "unit"
    RANDOM = "random"   # positive integer weights drawn per instance


@dataclass
class Witness:
    instance: QuboInstance
    model_objective: float
    incumbent: dict[str, float]
    recomputed: Fraction | None
    true_optimum: Fraction
    weights: WeightSet | None = None


@dataclass
class VerificationReport:
    model: ModelId
    verdict: Verdict
    witness: Witness | None = None
    instances_tested: int = 0
    seeds: tuple[int, ...] = ()
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        s = f"{self.model.name}: {self.verdict.value} after {self.instances_tested} instance(s)"
        if self.witness is not None:
            w = self.witness
            s += (f"; witness {w.instance.name or 'instance'}: model {_fmt(w.model_objective)}"
                  f" vs optimum {w.true_optimum}")
        return s


def _fmt(v: float) -> str:
    r = round(v)
    return str(r) if abs(v - r) <= 1e-6 else repr(v)


def _weights_for(mid: ModelId, inst: QuboInstance, policy, rng):
    if isinstance(policy, WeightSet):
        return policy
    if policy is WeightPolicy.RANDOM or policy == "random":
        return random_weights_for(mid, inst.sets, rng)
    return None


def _check_one(mid: ModelId, inst: QuboInstance, w, time_limit):
    m = build(mid, inst, w, allow_invalid=True)
    res = solve_milp(m, inst, time_limit=time_limit)
    return res


def verify_model(mid: ModelId, suite: Iterable[QuboInstance],
                 policy: WeightPolicy | WeightSet = WeightPolicy.UNIT, *,
                 seed: int = 0, time_limit: float | None = None,
                 stop_at_witness: bool = True) -> VerificationReport:
    """Solve the model on every instance and compare with brute force.

    Solver trouble is recorded as a note and makes the verdict INCONCLUSIVE
    unless a witness is found. Known-invalid models never get VALID_CONFIRMED.
    """
    rng = np.random.default_rng(seed)
    report = VerificationReport(mid, Verdict.INCONCLUSIVE, seeds=(seed,))
    for inst in suite:
        report.instances_tested += 1
        opt = brute_force_opt(inst).value
        w = _weights_for(mid, inst, policy, rng)
        try:
            res = _check_one(mid, inst, w, time_limit)
        except SolverStall as e:
            report.notes.append(f"{inst.name}: solver stall ({e})")
            continue
        if res.status is not MilpStatus.OPTIMAL:
            report.notes.append(f"{inst.name}: {res.status.value}")
            continue
        if abs(res.model_objective - float(opt)) > 1e-6:
            if report.witness is None:
                report.witness = Witness(inst, res.model_objective, res.incumbent,
                                         res.recomputed_objective, opt, w)
            if stop_at_witness:
                break
    if report.witness is not None:
        report.verdict = Verdict.INVALID_WITNESS
    elif not report.notes and not mid.known_invalid and report.instances_tested:
        report.verdict = Verdict.VALID_CONFIRMED
    return report


def random_instance(rng: np.random.Generator, n: int, lo: int = -10, hi: int = 10,
                    name: str = "") -> QuboInstance:
    q = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    q[iu] = rng.integers(lo, hi + 1, size=len(iu[0]))
    q = q + q.T
    c = rng.integers(lo, hi + 1, size=n)
    return QuboInstance.from_lists(q.tolist(), c.tolist(), name=name)


def counterexample_search(mid: ModelId, *, seed: int = 0, max_instances: int = 10_000,
                          n_range: tuple[int, int] = (3, 6), coef_range: tuple[int, int] = (-10, 10),
                          policy: WeightPolicy = WeightPolicy.UNIT,
                          time_budget: float | None = None) -> VerificationReport:
    """Seeded randomized search; failure to find a witness is INCONCLUSIVE."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()

    def gen():
        for k in range(max_instances):
            if time_budget is not None and time.perf_counter() - t0 > time_budget:
                return
            n = int(rng.integers(n_range[0], n_range[1] + 1))
            yield random_instance(rng, n, *coef_range, name=f"search-{seed}-{k}")

    rep = verify_model(mid, gen(), policy, seed=seed)
    if rep.verdict is Verdict.VALID_CONFIRMED:
        rep.verdict = Verdict.INCONCLUSIVE
        rep.notes.append("no witness found")
    elif rep.verdict is Verdict.INCONCLUSIVE and not rep.notes:
        rep.notes.append("no witness found")
    return rep


# --- precision ------------------------------------------------------------------------------

@dataclass
class PrecisionReport:
    model: ModelId
    precise: bool
    x: tuple[int, ...] | None = None
    y: dict[str, float] | None = None
    model_value: float | None = None
    recomputed: Fraction | None = None
    points: list[EnumeratedPoint] = field(default_factory=list, repr=False)


def check_precision(mid: ModelId, inst: QuboInstance, n_cap: int = 4,
                    weights: WeightSet | None = None) -> PrecisionReport:
    """Precise iff every feasible integral point has y_ij = x_i x_j."""
    m = build(mid, inst, weights, allow_invalid=True)
    pts = feasible_integral_enumeration(m, inst, n_cap)
    for pt in pts:
        if pt.feasible and pt.witness is not None:
            ys = {k: v for k, v in pt.witness.items() if k.startswith("y_")}
            return PrecisionReport(mid, False, pt.x, ys, pt.witness_value,
                                   qubo_value(inst, pt.x), pts)
    return PrecisionReport(mid, True, points=pts)


__all__ = ["BruteForceResult", "CapExceeded", "PrecisionReport", "VerificationReport", "Verdict",
           "WeightPolicy", "Witness", "brute_force_opt", "check_precision",
           "counterexample_search", "random_instance", "verify_model"]
