from metadesign.problems.instance import (  # noqa: F401
    ProblemError,
    ProblemInstance,
    WModelLayer,
    evaluate,
    make_instance,
)
from metadesign.problems.registry import instance_from_key, parse_problem_key  # noqa: F401
