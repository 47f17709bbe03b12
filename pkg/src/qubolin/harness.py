"""Experiment grids, LP-equivalence checks and report emission."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from .bnb import MilpStatus, solve_milp
from .catalog import (CatalogError, ModelId, WeightMode, WeightSet, build,
                      expected_constraint_count, parse_name, weights_from_duals)
from .model import count_general_constraints
from .qubo import QuboInstance
from .simplex import LpStatus, SolverStall, solve_lp

LP_TOL = 1e-6

# aggregation ids whose dual-weighted LP must equal the LP of their expanded model
DUAL_AGGREGATIONS = ("DW(a)", "GW(a)", "FT(a)", "PK(a)", "PK(*,b)", "FT(*,g)", "FT(*,t)",
                     "GW(*,g)", "GW(*,d)", "GW(*,g+d)", "GW(a,g+d)", "FT(a,g)", "PK(a,b)")


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("QUBOLIN_JOBS", "1")))
    except ValueError:
        return 1


@dataclass
class ComparisonRow:
    instance: str
    model: str
    weights: str
    lp_value: float | None = None
    milp_status: str = ""
    model_objective: float | None = None
    recomputed_objective: Fraction | None = None
    best_bound: float | None = None
    gap: float | None = None
    nodes: int | None = None
    wall_time: float | None = None
    constraints: int | None = None
    note: str = ""


COLUMNS = tuple(f.name for f in fields(ComparisonRow))


def _resolve(mid: ModelId | str) -> ModelId:
    return parse_name(mid) if isinstance(mid, str) else mid


def dual_weights(mid: ModelId, inst: QuboInstance) -> WeightSet:
    """Optimal LP duals of the expanded model, read as aggregation multipliers."""
    base = build(mid, inst, allow_invalid=True, lp_study=True, expand=True)
    res = solve_lp(base)
    if not res.optimal:
        raise CatalogError(f"base LP of {mid.name} is {res.status.value}; no duals")
    return weights_from_duals(mid, base, res.duals, inst.sets)


def weights_for_mode(mid: ModelId, inst: QuboInstance, mode: WeightMode | str) -> WeightSet:
    mode = WeightMode(mode)
    if mode is WeightMode.UNIT:
        return WeightSet.unit()
    if mode is WeightMode.DUAL_EXACT:
        return dual_weights(mid, inst)
    if mode is WeightMode.DUAL_MILP_SAFE:
        return dual_weights(mid, inst).with_replacement(1)
    raise CatalogError("custom weights must be passed explicitly")


def run_cell(inst: QuboInstance, mid: ModelId | str, mode: WeightMode | str = WeightMode.UNIT, *,
             time_limit: float | None = None, node_limit: int | None = None,
             allow_invalid: bool = False, weights: WeightSet | None = None) -> ComparisonRow:
    mid = _resolve(mid)
    mode = WeightMode(mode) if weights is None else weights.mode
    row = ComparisonRow(inst.name, mid.name, mode.value)
    t0 = time.perf_counter()
    try:
        w = weights if weights is not None else weights_for_mode(mid, inst, mode)
        lp_model = build(mid, inst, w, allow_invalid=allow_invalid, lp_study=True)
        lp = solve_lp(lp_model)
        row.lp_value = lp.objective if lp.optimal else None
        if lp.status is not LpStatus.OPTIMAL:
            row.note = f"LP {lp.status.value}"
        m = build(mid, inst, w, allow_invalid=allow_invalid)
        row.constraints = count_general_constraints(m)
        expected = expected_constraint_count(mid, inst.sets)
        if row.constraints != expected:
            row.note = f"constraint count {row.constraints} != expected {expected}"
        res = solve_milp(m, inst, time_limit=time_limit, node_limit=node_limit)
        row.milp_status = res.status.value
        row.nodes = res.nodes
        if res.status in (MilpStatus.OPTIMAL, MilpStatus.FEASIBLE_TIMEOUT):
            row.model_objective = res.model_objective
            row.recomputed_objective = res.recomputed_objective
            row.best_bound = res.best_bound
            row.gap = res.gap
    except (CatalogError, SolverStall, ValueError) as e:
        row.milp_status = "ERROR"
        row.note = f"{type(e).__name__}: {e}"
    row.wall_time = time.perf_counter() - t0
    return row


def _cell(args):
    inst, name, mode, kw = args
    return run_cell(inst, name, mode, **kw)


def run_grid(instances: Sequence[QuboInstance], models: Sequence[ModelId | str],
             modes: Sequence[WeightMode | str] = (WeightMode.UNIT,), *,
             time_limit: float | None = None, node_limit: int | None = None,
             allow_invalid: bool = False, jobs: int | None = None) -> list[ComparisonRow]:
    """One row per (instance, model, weight mode), in that nesting order.

    Failures become rows with status ERROR and a note. With ``jobs > 1`` the
    cells run in worker processes; row order is unchanged.
    """
    kw = dict(time_limit=time_limit, node_limit=node_limit, allow_invalid=allow_invalid)
    cells = [(inst, _resolve(m).name, WeightMode(mode).value, kw)
             for inst in instances for m in models for mode in modes]
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(cells) < 2:
        return [_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))


# --- theorem checks -----------------------------------------------------------------------

@dataclass
class CheckRow:
    instance: str
    check: str
    lhs: float
    rhs: float
    margin: float
    passed: bool


def lp_value(inst: QuboInstance, mid: ModelId | str, w: WeightSet | None = None) -> float:
    res = solve_lp(build(_resolve(mid), inst, w, allow_invalid=True, lp_study=True))
    if not res.optimal:
        raise SolverStall(f"LP of {_resolve(mid).name} on {inst.name}: {res.status.value}")
    return res.objective


def lp_equivalence_suite(instances: Iterable[QuboInstance]) -> list[CheckRow]:
    """GW = FT = PK, GW <= DW, and each base model equals its optimality-restricted form."""
    out = []
    for inst in instances:
        v = {k: lp_value(inst, k) for k in ("DW", "GW", "FT", "PK", "ORDW", "ORGW", "ORFT", "ORPK")}
        for other in ("FT", "PK"):
            d = abs(v["GW"] - v[other])
            out.append(CheckRow(inst.name, f"GW=={other}", v["GW"], v[other], d, d <= LP_TOL))
        out.append(CheckRow(inst.name, "GW<=DW", v["GW"], v["DW"], v["DW"] - v["GW"],
                            v["GW"] <= v["DW"] + LP_TOL))
        for base in ("DW", "GW", "FT", "PK"):
            d = abs(v[base] - v["OR" + base])
            out.append(CheckRow(inst.name, f"{base}==OR{base}", v[base], v["OR" + base], d,
                                d <= LP_TOL))
    return out


@dataclass
class DualCheckRow:
    instance: str
    model: str
    base_lp: float
    exact_lp: float
    safe_lp: float
    unit_lp: float
    exact_ok: bool
    safe_ok: bool
    unit_ok: bool

    @property
    def passed(self) -> bool:
        return self.exact_ok and self.safe_ok and self.unit_ok


def dual_weight_equality_suite(instances: Iterable[QuboInstance],
                               models: Sequence[ModelId | str] = DUAL_AGGREGATIONS) -> list[DualCheckRow]:
    """Aggregating with exact LP duals keeps the LP value; other weights only weaken it.

    The base model is the aggregation's own expanded form, whose rows are the
    members of each aggregated block.
    """
    out = []
    for inst in instances:
        for name in models:
            mid = _resolve(name)
            base_m = build(mid, inst, allow_invalid=True, lp_study=True, expand=True)
            base = solve_lp(base_m)
            if not base.optimal:
                raise SolverStall(f"base LP of {mid.name} on {inst.name}: {base.status.value}")
            w = weights_from_duals(mid, base_m, base.duals, inst.sets)
            exact = lp_value(inst, mid, w)
            safe = lp_value(inst, mid, w.with_replacement(1))
            unit = lp_value(inst, mid)
            b = base.objective
            out.append(DualCheckRow(inst.name, mid.name, b, exact, safe, unit,
                                    abs(exact - b) <= LP_TOL, safe >= b - LP_TOL,
                                    unit >= b - LP_TOL))
    return out


# --- emission -------------------------------------------------------------------------------

def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    return str(v)


def emit_csv(rows: Iterable[ComparisonRow], timing: bool = True) -> str:
    """RFC 4180 CSV with one header line and CRLF record ends.

    ``timing=False`` blanks the wall-time column so reports are byte-stable.
    """
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(COLUMNS)
    for r in rows:
        d = asdict(r)
        if not timing:
            d["wall_time"] = None
        wr.writerow([_cell_text(d[k]) for k in COLUMNS])
    return buf.getvalue()


def emit_jsonl(rows: Iterable[ComparisonRow], timing: bool = True) -> str:
    lines = []
    for r in rows:
        d = asdict(r)
        if not timing:
            d["wall_time"] = None
        d = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in d.items()}
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = "inf" if v > 0 else "-inf"
        lines.append(json.dumps(d, sort_keys=False))
    return "".join(line + "\n" for line in lines)


_FLOAT_COLS = {"lp_value", "model_objective", "best_bound", "gap", "wall_time"}
_INT_COLS = {"nodes", "constraints"}


def parse_csv(text: str) -> list[ComparisonRow]:
    rd = csv.reader(io.StringIO(text, newline=""))
    header = next(rd)
    if tuple(header) != COLUMNS:
        raise ValueError("unexpected CSV header")
    out = []
    for rec in rd:
        kw = {}
        for k, v in zip(COLUMNS, rec):
            if v == "" and k not in ("instance", "model", "weights", "milp_status", "note"):
                kw[k] = None
            elif k in _FLOAT_COLS:
                kw[k] = float(v)
            elif k in _INT_COLS:
                kw[k] = int(v)
            elif k == "recomputed_objective":
                kw[k] = Fraction(v)
            else:
                kw[k] = v
        out.append(ComparisonRow(**kw))
    return out


__all__ = ["COLUMNS", "CheckRow", "ComparisonRow", "DUAL_AGGREGATIONS", "DualCheckRow",
           "default_jobs", "dual_weight_equality_suite", "dual_weights", "emit_csv",
           "emit_jsonl", "lp_equivalence_suite", "lp_value", "parse_csv", "run_cell",
           "run_grid", "weights_for_mode"]
