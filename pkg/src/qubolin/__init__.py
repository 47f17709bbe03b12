"""Linearized MILP models for QUBO, with an in-house LP/MILP solver and a brute-force oracle."""
from .bnb import MilpResult, MilpStatus, solve_milp
from .catalog import (ModelId, WeightMode, WeightSet, build, catalog, expected_constraint_count,
                      format_name, invalid_models, parse_name, valid_models)
from .instances import (GeneratorConfig, generate_balanced, generate_uniform, load_canonical,
                        load_instance, parse_orlib, random_suite, save_canonical)
from .lpformat import export_lp, export_mps, import_lp, import_mps
from .model import MilpModel, count_general_constraints
from .oracle import Verdict, brute_force_opt, check_precision, counterexample_search, verify_model
from .qubo import QuboInstance, fixture, qubo_value
from .simplex import LpResult, LpStatus, solve_lp

__version__ = "0.1.0"

__all__ = ["GeneratorConfig", "LpResult", "LpStatus", "MilpModel", "MilpResult", "MilpStatus",
           "ModelId", "QuboInstance", "Verdict", "WeightMode", "WeightSet", "brute_force_opt",
           "build", "catalog", "check_precision", "count_general_constraints",
           "counterexample_search", "expected_constraint_count", "export_lp", "export_mps",
           "fixture", "format_name", "generate_balanced", "generate_uniform", "import_lp",
           "import_mps", "invalid_models", "load_canonical", "load_instance", "parse_name",
           "parse_orlib", "qubo_value", "random_suite", "save_canonical", "solve_lp",
           "solve_milp", "valid_models", "verify_model"]
