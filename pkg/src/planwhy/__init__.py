"""planwhy: contrastive "why not?" exploration of temporal PDDL plans."""

from .contrastive import (
    classify_behavior,
    compile_force_action,
    compile_time_window,
    plan_segments,
    replan_after,
    replan_from_initial,
    weakest_conditions,
)
from .grounding import GroundAction, GroundTask, ground
from .parser import parse_domain, parse_problem
from .planner import PlannerConfig, format_plan, parse_plan, plan_builtin, plan_external
from .printer import print_domain, print_model, print_problem
from .session import (
    Metric,
    Workspace,
    ask,
    compare,
    load_workspace,
    new_session,
    save_workspace,
)
from .simulate import (
    PlanStep,
    State,
    TimedPlan,
    ValidationReport,
    applicable_actions,
    state_at,
    validate,
)

__version__ = "0.1.0"
