"""Knowledge-based program checker.

Core pipeline: scenario documents declare programs and contexts;
protocols derived from programs build systems of lasso runs; fixed
points of that loop give the systems a knowledge-based program can
represent; specifications are checked against those systems under a
per-context, a family, and a maximal notion of satisfaction.
"""

from .errors import (BudgetError, FormulaError, KbpError, ProgramError,
                     ScenarioError, UndecidedError)
from .kernel import (Context, ContextFamily, Declarations, GlobalState,
                     LassoRun, LocalState, Mirror, Point, System, VarDecl,
                     canonicalize, indistinguishable_points, refines,
                     representative_points, state_at, state_value)
from .logic import (Evaluator, Formula, eval_formula, run_satisfies,
                    valid_in_system)
from .parsing import parse_formula, unparse_formula
from .programs import (AgentProgram, GuardedBranch, Program, ProtocolTable,
                       derive_protocol, eval_test, is_standard,
                       validate_program)
from .transitions import (AdmissibilityPredicate, EnvProtocol, TransitionSpec,
                          admissible, apply_transition, build_system,
                          joint_actions)
from .fixpoint import (Classification, IterateResult, classify,
                       fixpoint_enumerate, fixpoint_iterate, represents)
from .speccheck import (InitCondition, MonotonicityReport,
                        SatisfactionVerdict, Spec, Witness, is_strengthening,
                        maximally_satisfies, monotonicity_report,
                        program_satisfies, satisfies_given_init)
from .scenario import (Scenario, emit_scenario, list_bundled, load_bundled,
                       load_scenario, save_scenario, scenario_digest)

__version__ = "0.1.0"
