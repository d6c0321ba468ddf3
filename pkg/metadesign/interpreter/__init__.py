from metadesign.interpreter.engine import (  # noqa: F401
    BudgetError,
    ExecutionReport,
    Interpreter,
    RunState,
    run,
)
