from .main import load
from .syntax import load_system, parse, parse_term
from .conditions import full_report, ConditionReport
from .reduction import normalize, critical_pairs
from .typecheck import infer, check
from .utils import Verdict, Outcome, Config, load_config
