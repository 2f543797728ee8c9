from .metrics import RunRecord, composite_cost, cv_percent, read_records, summarize, write_records
from .runner import PLANNERS, PlannerParams, perturbation_study, run_planner, run_suite, write_outputs
from .suite import Scenario, Suite, SuiteError, load_suite, parse_suite

__all__ = ["PLANNERS", "PlannerParams", "RunRecord", "Scenario", "Suite", "SuiteError", "composite_cost",
           "cv_percent", "load_suite", "parse_suite", "perturbation_study", "read_records", "run_planner",
           "run_suite", "summarize", "write_outputs", "write_records"]
