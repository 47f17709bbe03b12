"""Bounded-variable revised simplex (primal and dual) with dual extraction.

Rows are brought to equality form ``A x + s = b`` with one slack per row:
``<=`` rows get s in [0, inf), ``>=`` rows s in (-inf, 0] and ``=`` rows s in
[0, 0]. The basis inverse is kept explicitly and refreshed by product-form
updates, with a full refactorization every ``REFACTOR_EVERY`` pivots.

The objective is always maximized. Row duals are ``y = c_B B^-1``; for ``<=``
rows they are nonnegative at an optimum.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import MilpModel, Sense, Tag

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64

BASIC, AT_LOWER, AT_UPPER, FREE_ZERO = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


class SolverStall(RuntimeError):
    """Raised when the simplex cannot certify a result."""


@dataclass
class LpArrays:
    a: np.ndarray          # m x n
    b: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    senses: list[Sense]
    var_names: list[str]
    row_names: list[str]


def lp_arrays(m: MilpModel) -> LpArrays:
    nv, nr = len(m.variables), len(m.constraints)
    a = np.zeros((nr, nv))
    b = np.zeros(nr)
    for r, con in enumerate(m.constraints):
        for k, coef in con.terms:
            a[r, k] = float(coef)
        b[r] = float(con.rhs)
    c = np.zeros(nv)
    for k, coef in m.objective:
        c[k] += float(coef)
    lb = np.array([float(v.lower) for v in m.variables])
    ub = np.array([float(v.upper) for v in m.variables])
    return LpArrays(a, b, c, lb, ub, [con.sense for con in m.constraints],
                    [v.name for v in m.variables], [con.name for con in m.constraints])


@dataclass
class Basis:
    """Snapshot of a simplex basis, enough to warm start a related LP."""

    basic: np.ndarray    # column index per row
    status: np.ndarray   # per column status code

    def fingerprint(self) -> str:
        h = hashlib.sha256(self.basic.astype(np.int64).tobytes())
        h.update(self.status.astype(np.int8).tobytes())
        return h.hexdigest()[:16]


@dataclass
class LpResult:
    status: LpStatus
    objective: float = math.nan
    primal: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    basis_fingerprint: str = ""
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    iterations: int = 0
    basis: Basis | None = field(default=None, repr=False)
    row_tags: Mapping[str, Tag] = field(default_factory=dict, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class Simplex:
    """Working state for one LP; columns are the structurals followed by slacks."""

    def __init__(self, arr: LpArrays):
        self.arr = arr
        m, n = arr.a.shape
        self.m, self.n = m, n
        self.N = n + m
        self.A = np.hstack([arr.a, np.eye(m)]) if m else np.zeros((0, n))
        self.b = arr.b.copy()
        self.cost = np.concatenate([arr.c, np.zeros(m)])
        slo = np.array([0.0 if s is not Sense.GE else -np.inf for s in arr.senses])
        sup = np.array([np.inf if s is Sense.LE else 0.0 for s in arr.senses])
        self.lb = np.concatenate([arr.lb, slo]) if m else arr.lb.copy()
        self.ub = np.concatenate([arr.ub, sup]) if m else arr.ub.copy()
        self.iterations = 0
        self.basic = np.arange(n, n + m)
        self.status = np.empty(self.N, dtype=np.int8)
        self.x = np.zeros(self.N)
        for j in range(n):
            self._place_nonbasic(j)
        self.status[n:] = BASIC
        self.binv = np.eye(m)
        self._since_refactor = 0
        self._recompute_basics()

    # --- basic bookkeeping -----------------------------------------------------------

    def _place_nonbasic(self, j, prefer=None):
        lo, hi = self.lb[j], self.ub[j]
        st = prefer
        if st == AT_LOWER and not np.isfinite(lo):
            st = None
        if st == AT_UPPER and not np.isfinite(hi):
            st = None
        if st is None or st == FREE_ZERO or st == BASIC:
            if np.isfinite(lo):
                st = AT_LOWER
            elif np.isfinite(hi):
                st = AT_UPPER
            else:
                st = FREE_ZERO
        self.status[j] = st
        self.x[j] = lo if st == AT_LOWER else hi if st == AT_UPPER else 0.0

    def _refactor(self):
        if self.m:
            try:
                self.binv = np.linalg.inv(self.A[:, self.basic])
            except np.linalg.LinAlgError:
                raise SolverStall("singular basis") from None
        self._since_refactor = 0
        self._recompute_basics()

    def _recompute_basics(self):
        if not self.m:
            return
        xn = self.x.copy()
        xn[self.basic] = 0.0
        self.x[self.basic] = self.binv @ (self.b - self.A @ xn)

    def _pivot(self, r, j, w):
        """Column ``j`` replaces the basic variable of row ``r``; ``w = B^-1 a_j``."""
        piv = w[r]
        row = self.binv[r] / piv
        self.binv -= np.outer(w, row)
        self.binv[r] = row
        self.basic[r] = j
        self.status[j] = BASIC
        self._since_refactor += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self._refactor()

    def _reduced_costs(self, cb):
        yv = cb @ self.binv
        d = self.cost - yv @ self.A if self.m else self.cost.copy()
        d[self.basic] = 0.0
        return yv, d

    def snapshot(self) -> Basis:
        return Basis(self.basic.copy(), self.status.copy())

    def objective(self) -> float:
        return float(self.cost @ self.x)

    # --- primal simplex --------------------------------------------------------------

    def _entering(self, d, bland):
        st = self.status
        fixed = self.lb == self.ub
        up = ((st == AT_LOWER) | (st == FREE_ZERO)) & (d > OPT_TOL)
        down = ((st == AT_UPPER) | (st == FREE_ZERO)) & (d < -OPT_TOL)
        elig = (up | down) & ~fixed
        idx = np.flatnonzero(elig)
        if idx.size == 0:
            return -1, 0
        j = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]))])
        return j, (1 if d[j] > 0 else -1)

    def _ratio(self, delta, lo, hi, bland):
        """Step length limit for basics moving by ``delta`` per unit."""
        xb = self.x[self.basic]
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = (delta < -PIVOT_TOL) & np.isfinite(lo)
            inc = (delta > PIVOT_TOL) & np.isfinite(hi)
            ratio = np.full(self.m, np.inf)
            relaxed = np.full(self.m, np.inf)
            ratio[dec] = (xb[dec] - lo[dec]) / -delta[dec]
            relaxed[dec] = (xb[dec] - lo[dec] + FEAS_TOL) / -delta[dec]
            ratio[inc] = (hi[inc] - xb[inc]) / delta[inc]
            relaxed[inc] = (hi[inc] - xb[inc] + FEAS_TOL) / delta[inc]
        if not np.isfinite(relaxed).any():
            return -1, np.inf
        if bland:
            tmin = ratio.min()
            cand = np.flatnonzero(ratio <= tmin + 1e-12)
            r = int(cand[np.argmin(self.basic[cand])])
        else:
            tmax = relaxed.min()
            cand = np.flatnonzero(ratio <= tmax)
            r = int(cand[np.argmax(np.abs(delta[cand]))])
        return r, max(ratio[r], 0.0)

    def _primal(self, max_iter):
        """Composite primal simplex. Returns an ``LpStatus``."""
        stall = 0
        bland = False
        stall_limit = 3 * (self.m + self.N)
        last_obj = -np.inf
        last_phase = None
        while True:
            if self.iterations >= max_iter:
                raise SolverStall(f"iteration limit {max_iter} reached")
            xb = self.x[self.basic]
            lob, hib = self.lb[self.basic], self.ub[self.basic]
            below = xb < lob - FEAS_TOL
            above = xb > hib + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = below.astype(float) - above.astype(float)
                d = -(cb @ self.binv) @ self.A
                d[self.basic] = 0.0
                lo = np.where(below, -np.inf, np.where(above, hib, lob))
                hi = np.where(below, lob, np.where(above, np.inf, hib))
                obj = -float(np.sum(lob[below] - xb[below]) + np.sum(xb[above] - hib[above]))
            else:
                _, d = self._reduced_costs(self.cost[self.basic])
                lo, hi = lob, hib
                obj = self.objective()
            if phase1 != last_phase:
                last_phase, last_obj, stall = phase1, -np.inf, 0
            j, direction = self._entering(d, bland)
            if j < 0:
                return LpStatus.INFEASIBLE if phase1 else LpStatus.OPTIMAL
            w = self.binv @ self.A[:, j] if self.m else np.zeros(0)
            delta = -direction * w
            r, t = self._ratio(delta, lo, hi, bland) if self.m else (-1, np.inf)
            span = self.ub[j] - self.lb[j]
            if span <= t:
                t = span
                r = -1
            if not np.isfinite(t):
                if phase1:
                    raise SolverStall("unbounded ray during phase 1")
                return LpStatus.UNBOUNDED
            self.iterations += 1
            self.x[j] += direction * t
            if self.m:
                self.x[self.basic] += t * delta
            if r < 0:
                self.status[j] = AT_UPPER if direction > 0 else AT_LOWER
                self.x[j] = self.ub[j] if direction > 0 else self.lb[j]
            else:
                leaving = self.basic[r]
                # an infeasible basic only blocks at the bound it is approaching
                to_lower = bool(below[r]) or (not above[r] and delta[r] < 0)
                self._pivot(r, j, w)
                self._place_nonbasic(leaving, AT_LOWER if to_lower else AT_UPPER)
            if obj > last_obj + 1e-12:
                stall = 0
                last_obj = obj
            else:
                stall += 1
            if stall > stall_limit:
                bland = True

    # --- dual simplex ----------------------------------------------------------------

    def _dual(self, max_iter):
        """Dual simplex from a dual feasible basis. Returns status or ``None`` if the
        basis is not dual feasible (caller falls back to the primal method)."""
        while True:
            if self.iterations >= max_iter:
                return None
            _, d = self._reduced_costs(self.cost[self.basic])
            st = self.status
            bad = (((st == AT_LOWER) & (d > 1e-7)) | ((st == AT_UPPER) & (d < -1e-7))
                   | ((st == FREE_ZERO) & (np.abs(d) > 1e-7))) & (self.lb != self.ub)
            if bad.any():
                return None
            xb = self.x[self.basic]
            lob, hib = self.lb[self.basic], self.ub[self.basic]
            infeas = np.maximum(lob - xb, 0.0) + np.maximum(xb - hib, 0.0)
            r = int(np.argmax(infeas)) if self.m else 0
            if not self.m or infeas[r] <= FEAS_TOL:
                return LpStatus.OPTIMAL
            increase = xb[r] < lob[r]
            alpha = self.binv[r] @ self.A
            alpha[self.basic] = 0.0
            movable = (self.lb != self.ub) & (st != BASIC)
            if increase:
                elig = movable & (((st == AT_LOWER) & (alpha < -PIVOT_TOL)) |
                                  ((st == AT_UPPER) & (alpha > PIVOT_TOL)) |
                                  ((st == FREE_ZERO) & (np.abs(alpha) > PIVOT_TOL)))
            else:
                elig = movable & (((st == AT_LOWER) & (alpha > PIVOT_TOL)) |
                                  ((st == AT_UPPER) & (alpha < -PIVOT_TOL)) |
                                  ((st == FREE_ZERO) & (np.abs(alpha) > PIVOT_TOL)))
            idx = np.flatnonzero(elig)
            if idx.size == 0:
                return LpStatus.INFEASIBLE
            ratio = np.abs(d[idx]) / np.abs(alpha[idx])
            relaxed = (np.abs(d[idx]) + OPT_TOL) / np.abs(alpha[idx])
            cand = idx[ratio <= relaxed.min()]
            q = int(cand[np.argmax(np.abs(alpha[cand]))])
            target = lob[r] if increase else hib[r]
            step = (xb[r] - target) / alpha[q]
            w = self.binv @ self.A[:, q]
            self.iterations += 1
            self.x[q] += step
            self.x[self.basic] -= step * w
            leaving = self.basic[r]
            self._pivot(r, q, w)
            self._place_nonbasic(leaving, AT_LOWER if increase else AT_UPPER)
            self._recompute_basics()

    # --- drivers ---------------------------------------------------------------------

    def run(self, warm: bool = False) -> LpStatus:
        max_iter = self.iterations + 50 * (self.m + self.N) + 1000
        status = None
        if warm:
            status = self._dual(max_iter)
            if status is LpStatus.INFEASIBLE:
                status = None  # confirmed by the primal method below
        for attempt in range(3):
            if status is None or status is LpStatus.OPTIMAL:
                status = self._primal(max_iter)
            if status is not LpStatus.OPTIMAL:
                return status
            self._refactor()
            if self._certified():
                return status
            status = None
        raise SolverStall("could not certify optimality after refactorization")

    def _certified(self) -> bool:
        xb = self.x[self.basic]
        if np.any(xb < self.lb[self.basic] - FEAS_TOL) or np.any(xb > self.ub[self.basic] + FEAS_TOL):
            return False
        _, d = self._reduced_costs(self.cost[self.basic])
        st = self.status
        movable = self.lb != self.ub
        if np.any(movable & (st == AT_LOWER) & (d > OPT_TOL)):
            return False
        if np.any(movable & (st == AT_UPPER) & (d < -OPT_TOL)):
            return False
        if np.any(movable & (st == FREE_ZERO) & (np.abs(d) > OPT_TOL)):
            return False
        return True

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray):
        """Change structural bounds, keeping the basis (for warm starts)."""
        n = self.n
        self.lb[:n] = lb
        self.ub[:n] = ub
        for j in range(n):
            if self.status[j] != BASIC:
                self._place_nonbasic(j, int(self.status[j]))
        self._recompute_basics()

    def load_basis(self, basis: Basis):
        self.basic = basis.basic.copy()
        self.status = basis.status.copy()
        for j in range(self.N):
            if self.status[j] != BASIC:
                self._place_nonbasic(j, int(self.status[j]))
        self._refactor()

    def duals(self) -> np.ndarray:
        if not self.m:
            return np.zeros(0)
        return self.cost[self.basic] @ self.binv


def _result(model_arr: LpArrays, sx: Simplex, status: LpStatus, row_tags) -> LpResult:
    if status is not LpStatus.OPTIMAL:
        return LpResult(status, iterations=sx.iterations, row_tags=row_tags)
    n = sx.n
    x = sx.x[:n].copy()
    y = sx.duals()
    obj = float(model_arr.c @ x)
    # strong duality: c x = b y + sum over nonbasic columns of d_j x_j
    _, d = sx._reduced_costs(sx.cost[sx.basic])
    dual_obj = float(model_arr.b @ y + d @ sx.x)
    if abs(obj - dual_obj) > 1e-7 * max(1.0, abs(obj)):
        raise SolverStall(f"duality gap {obj - dual_obj:.3g}")
    ax = model_arr.a @ x if sx.m else np.zeros(0)
    for r, s in enumerate(model_arr.senses):
        slack = model_arr.b[r] - ax[r]
        if (s is Sense.LE and slack < -1e-8) or (s is Sense.GE and slack > 1e-8) or (
                s is Sense.EQ and abs(slack) > 1e-8):
            raise SolverStall(f"row {model_arr.row_names[r]} violated by {abs(slack):.3g}")
    basis = sx.snapshot()
    return LpResult(
        LpStatus.OPTIMAL, obj,
        dict(zip(model_arr.var_names, x.tolist())),
        dict(zip(model_arr.row_names, y.tolist())),
        basis.fingerprint(), x, y, sx.iterations, basis, row_tags)


def solve_lp(m: MilpModel, arrays: LpArrays | None = None) -> LpResult:
    """Solve the LP relaxation of ``m`` (integrality is ignored)."""
    arr = arrays if arrays is not None else lp_arrays(m)
    sx = Simplex(arr)
    status = sx.run()
    return _result(arr, sx, status, {con.name: con.tag for con in m.constraints})


def solve_arrays(arr: LpArrays, lb=None, ub=None, warm: Basis | None = None,
                 row_tags=None) -> tuple[LpResult, Simplex]:
    """Solve with replaced structural bounds, optionally warm started."""
    sx = Simplex(arr)
    if lb is not None:
        sx.lb[:sx.n] = lb
        sx.ub[:sx.n] = ub
    status = None
    if warm is not None:
        try:
            sx.load_basis(warm)
            status = sx.run(warm=True)
        except SolverStall:
            status = None
    if status is None:
        sx = Simplex(arr)
        if lb is not None:
            sx.lb[:sx.n] = lb
            sx.ub[:sx.n] = ub
            for j in range(sx.n):
                sx._place_nonbasic(j)
            sx._recompute_basics()
        status = sx.run()
    return _result(arr, sx, status, row_tags or {}), sx


def extract_duals(res: LpResult, tags: set[Tag] | Tag | None = None,
                  labels: set[str] | None = None) -> dict[str, dict[tuple[int, int], float]]:
    """Duals of per-pair rows grouped by row label and keyed by 0-based (i, j)."""
    if not res.optimal:
        raise ValueError("duals are only defined for an optimal result")
    if isinstance(tags, Tag):
        tags = {tags}
    out: dict[str, dict[tuple[int, int], float]] = {}
    for name, v in res.duals.items():
        parts = name.split("_")
        if len(parts) != 3:
            continue
        label = parts[0]
        if labels is not None and label not in labels:
            continue
        if tags is not None and res.row_tags.get(name) not in tags:
            continue
        out.setdefault(label, {})[(int(parts[1]) - 1, int(parts[2]) - 1)] = v
    return out


__all__ = ["Basis", "LpArrays", "LpResult", "LpStatus", "Simplex", "SolverStall",
           "extract_duals", "lp_arrays", "solve_arrays", "solve_lp"]
