"""Best-bound branch-and-bound on top of the simplex module."""
from __future__ import annotations

import enum
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence, TextIO

import numpy as np

from .model import MilpModel
from .qubo import QuboInstance, qubo_value
from .simplex import Basis, LpArrays, LpStatus, lp_arrays, solve_arrays

INT_TOL = 1e-6
PRUNE_TOL = 1e-6


class MilpStatus(enum.Enum):
    OPTIMAL = "OPTIMAL"
    FEASIBLE_TIMEOUT = "FEASIBLE_TIMEOUT"
    TIMEOUT = "TIMEOUT"          # stopped before any incumbent was found
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


class FingerprintMismatch(ValueError):
    pass


@dataclass
class MilpResult:
    status: MilpStatus
    incumbent: dict[str, float] = field(default_factory=dict)
    model_objective: float = -math.inf
    recomputed_objective: Fraction | None = None
    best_bound: float = math.inf
    nodes: int = 0
    elapsed: float = 0.0
    root_lp: float = math.nan
    incumbents_found: int = 0
    x: tuple[int, ...] | None = None

    @property
    def gap(self) -> float:
        return self.best_bound - self.model_objective

    def model_objective_int(self) -> int:
        return int(round(self.model_objective))


@dataclass(order=True)
class _Node:
    key: tuple
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    basis: Basis | None = field(compare=False)
    bound: float = field(compare=False)
    depth: int = field(compare=False)
    values: np.ndarray = field(compare=False)


def _x_indices(m: MilpModel) -> list[int]:
    idx = m.index
    out = []
    k = 1
    while f"x_{k}" in idx:
        out.append(idx[f"x_{k}"])
        k += 1
    return out


def _branch_var(values, primary, secondary):
    for group in (primary, secondary):
        best, best_frac = -1, INT_TOL
        for k in group:
            frac = abs(values[k] - round(values[k]))
            # most fractional; strict comparison keeps the lowest index on ties
            if frac > best_frac + 1e-12:
                best, best_frac = k, frac
        if best >= 0:
            return best
    return -1


def _emit(progress: TextIO | Callable | None, **rec):
    if progress is None:
        return
    line = " ".join(f"{k}={v}" for k, v in rec.items())
    if callable(progress):
        progress(line)
    else:
        progress.write(line + "\n")


def _fixed_x_completion(arr: LpArrays, xi: Sequence[int], x_vals: Sequence[int], int_idx):
    """Zero-cost feasibility solve for the non-x variables with x fixed."""
    lb, ub = arr.lb.copy(), arr.ub.copy()
    for k, v in zip(xi, x_vals):
        lb[k] = ub[k] = float(v)
    zero = replace(arr, c=np.zeros_like(arr.c))
    res, _ = solve_arrays(zero, lb, ub)
    if not res.optimal:
        return None
    vals = res.x
    if any(abs(vals[k] - round(vals[k])) > INT_TOL for k in int_idx):
        return None
    return vals


def solve_milp(m: MilpModel, inst: QuboInstance | None = None, *,
               time_limit: float | None = None, node_limit: int | None = None,
               stop_after_incumbents: int | None = None,
               start_x: Sequence[int] | None = None,
               progress: TextIO | Callable | None = None,
               arrays: LpArrays | None = None) -> MilpResult:
    """Maximize ``m`` exactly (within tolerances) by LP-based branch-and-bound.

    ``start_x`` seeds an incumbent by fixing x and completing the remaining
    variables with a zero-cost feasibility solve. Combined with
    ``stop_after_incumbents=1`` this reproduces a solver stopped on its first
    incumbent, whose model value can differ from the recomputed QUBO value.
    """
    if inst is not None and m.fingerprint and m.fingerprint != inst.fingerprint:
        raise FingerprintMismatch(f"model built for {m.fingerprint}, instance is {inst.fingerprint}")
    t0 = time.perf_counter()
    arr = arrays if arrays is not None else lp_arrays(m)
    int_idx = m.integer_indices
    xi = _x_indices(m)
    primary = [k for k in xi if k in set(int_idx)]
    secondary = [k for k in int_idx if k not in set(primary)]
    seq = itertools.count()

    best_val = -math.inf
    best_vals: np.ndarray | None = None
    found = 0
    nodes = 0

    def finish(status, bound):
        res = MilpResult(status, nodes=nodes, elapsed=time.perf_counter() - t0,
                         root_lp=root_val, incumbents_found=found)
        if best_vals is not None:
            vals = best_vals.copy()
            for k in int_idx:
                vals[k] = round(vals[k])
            res.incumbent = dict(zip(arr.var_names, vals.tolist()))
            res.model_objective = float(arr.c @ vals)
            xr = tuple(int(round(vals[k])) for k in xi)
            res.x = xr
            if inst is not None and len(xr) == inst.n:
                res.recomputed_objective = qubo_value(inst, xr)
        res.best_bound = bound if best_vals is None else max(bound, res.model_objective)
        return res

    def out_of_budget():
        if time_limit is not None and time.perf_counter() - t0 >= time_limit:
            return True
        if node_limit is not None and nodes >= node_limit:
            return True
        return stop_after_incumbents is not None and found >= stop_after_incumbents

    def accept(vals, val, source):
        nonlocal best_val, best_vals, found
        best_val, best_vals = val, vals.copy()
        found += 1
        _emit(progress, event="incumbent", source=source, node=nodes,
              objective=repr(val), elapsed=f"{time.perf_counter() - t0:.6f}")

    root_val = math.nan
    if start_x is not None:
        vals = _fixed_x_completion(arr, xi, start_x, int_idx)
        if vals is not None:
            accept(vals, float(arr.c @ vals), "start")
            if out_of_budget():
                return finish(MilpStatus.FEASIBLE_TIMEOUT, math.inf)

    root, _ = solve_arrays(arr, arr.lb.copy(), arr.ub.copy())
    nodes += 1
    if root.status is LpStatus.INFEASIBLE:
        return finish(MilpStatus.INFEASIBLE, -math.inf)
    if root.status is LpStatus.UNBOUNDED:
        return finish(MilpStatus.UNBOUNDED, math.inf)
    root_val = root.objective
    heap: list[_Node] = []

    def consider(lb, ub, res, depth):
        if not res.optimal or res.objective <= best_val + PRUNE_TOL:
            return
        k = _branch_var(res.x, primary, secondary)
        if k < 0:
            accept(res.x, res.objective, "lp")
            return
        heapq.heappush(heap, _Node((-res.objective, -depth, next(seq)), lb, ub, res.basis,
                                   res.objective, depth, res.x))

    consider(arr.lb.copy(), arr.ub.copy(), root, 0)
    while heap:
        if out_of_budget():
            bound = max(nd.bound for nd in heap)
            status = MilpStatus.FEASIBLE_TIMEOUT if best_vals is not None else MilpStatus.TIMEOUT
            return finish(status, bound)
        node = heapq.heappop(heap)
        if node.bound <= best_val + PRUNE_TOL:
            continue
        k = _branch_var(node.values, primary, secondary)
        v = node.values[k]
        for lo_k, hi_k in ((math.floor(v), math.floor(v)), (math.ceil(v), math.ceil(v))):
            lb, ub = node.lb.copy(), node.ub.copy()
            # binary variables: each child fixes the branching variable
            lb[k], ub[k] = max(lb[k], lo_k), min(ub[k], hi_k)
            if lb[k] > ub[k]:
                continue
            res, _ = solve_arrays(arr, lb, ub, warm=node.basis)
            nodes += 1
            consider(lb, ub, res, node.depth + 1)
            if out_of_budget():
                break
    if best_vals is None:
        return finish(MilpStatus.INFEASIBLE, -math.inf)
    return finish(MilpStatus.OPTIMAL, best_val)


# --- enumeration of feasible integral points -----------------------------------------

@dataclass
class EnumeratedPoint:
    x: tuple[int, ...]
    feasible: bool
    y_range: dict[str, tuple[float, float]]
    witness: dict[str, float] | None = None     # feasible y with some y_ij != x_i x_j
    witness_value: float | None = None          # model objective at the witness


class EnumerationCapExceeded(ValueError):
    pass


def _y_extreme(arr: LpArrays, lb, ub, k, sign, int_idx, xi):
    c = np.zeros_like(arr.c)
    c[k] = sign
    sub = replace(arr, c=c)
    model_free = [j for j in int_idx if j not in set(xi)]
    if not model_free:
        res, _ = solve_arrays(sub, lb, ub)
        return (res.x if res.optimal else None)
    # binary y: tiny search over the remaining integer variables
    best, best_val = None, -math.inf
    stack = [(lb.copy(), ub.copy())]
    while stack:
        lo, hi = stack.pop()
        res, _ = solve_arrays(sub, lo, hi)
        if not res.optimal or res.objective <= best_val + 1e-9:
            continue
        frac = [j for j in model_free if abs(res.x[j] - round(res.x[j])) > INT_TOL]
        if not frac:
            best, best_val = res.x.copy(), res.objective
            continue
        j = frac[0]
        for val in (math.floor(res.x[j]), math.ceil(res.x[j])):
            l2, h2 = lo.copy(), hi.copy()
            l2[j] = h2[j] = val
            stack.append((l2, h2))
    return best


def feasible_integral_enumeration(m: MilpModel, inst: QuboInstance,
                                  n_cap: int = 4) -> list[EnumeratedPoint]:
    """For every binary x: is it feasible, and what range can each y_ij take?

    A y variable whose range is not the single value x_i x_j exposes a feasible
    integral point violating the product relation.
    """
    if inst.n > n_cap:
        raise EnumerationCapExceeded(f"n={inst.n} exceeds the enumeration cap {n_cap}")
    arr = lp_arrays(m)
    xi = _x_indices(m)
    int_idx = m.integer_indices
    ys = [(k, name) for k, name in enumerate(arr.var_names) if name.startswith("y_")]
    out = []
    for bits in itertools.product((0, 1), repeat=inst.n):
        lb, ub = arr.lb.copy(), arr.ub.copy()
        for k, v in zip(xi, bits):
            lb[k] = ub[k] = float(v)
        base = _y_extreme(arr, lb, ub, xi[0] if xi else 0, 0.0, int_idx, xi)
        if base is None:
            out.append(EnumeratedPoint(bits, False, {}))
            continue
        pt = EnumeratedPoint(bits, True, {})
        for k, name in ys:
            _, i, j = name.split("_")
            prod = bits[int(i) - 1] * bits[int(j) - 1]
            hi_v = _y_extreme(arr, lb, ub, k, 1.0, int_idx, xi)
            lo_v = _y_extreme(arr, lb, ub, k, -1.0, int_idx, xi)
            top = math.inf if hi_v is None else hi_v[k]
            bot = -math.inf if lo_v is None else lo_v[k]
            pt.y_range[name] = (bot, top)
            if pt.witness is None:
                for cand in (lo_v, hi_v):
                    if cand is not None and abs(cand[k] - prod) > INT_TOL:
                        pt.witness = dict(zip(arr.var_names, cand.tolist()))
                        pt.witness_value = float(arr.c @ cand)
                        break
                if pt.witness is None and (top == math.inf or bot == -math.inf):
                    pt.witness = {}
        out.append(pt)
    return out


__all__ = ["EnumeratedPoint", "EnumerationCapExceeded", "FingerprintMismatch", "MilpResult",
           "MilpStatus", "feasible_integral_enumeration", "solve_milp"]
