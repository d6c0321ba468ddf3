from enum import Enum


class TokenKind(Enum):
    """ Kinds of tokens in the design vocabulary """
    COMPONENT = 100
    N_VALUE = 200
    P_VALUE = 210
    POINTER = 300
    FORK_OFFSET = 310
    CONDITION = 400
    BEGIN = 900
    END = 999


class ComponentCategory(Enum):
    CHOOSE = 100
    SEARCH = 200
    SELECT = 300


class ParamKind(Enum):
    N_GRID = 1
    P_GRID = 2


class PointerKind(Enum):
    FORWARD = 1
    ITERATE = 2
    FORK = 3


class ConditionKind(Enum):
    ONCE = 1
    COUNT = 2
    EVENT = 3


class EventKind(Enum):
    LOCAL_OPTIMAL = 1
    STAGNATION_3 = 2


class Phase(Enum):
    """ Grammar phases while a token sequence is being consumed """
    EXPECT_COMPONENT = 1
    EXPECT_PARAM = 2
    EXPECT_POINTER = 3
    EXPECT_FORK_OFFSET = 4
    EXPECT_CONDITION = 5
    DONE = 9


class ProblemFamily(Enum):
    ONEMAX = "onemax"
    LEADINGONES = "leadingones"
    HARMONIC = "harmonic"
    LABS = "labs"
    ISING_RING = "ising_ring"
    ISING_TORUS = "ising_torus"
    MIVS = "mivs"
    NQUEENS = "nqueens"


class WModelKind(Enum):
    DUMMY = "dummy"
    NEUTRALITY = "neutrality"
    EPISTASIS = "epistasis"
    RUGGEDNESS = "ruggedness"


class BaselineKind(Enum):
    ILS = "ILS"
    SA = "SA"
    TS = "TS"
    GA = "GA"


# Names used in the text form of programs
POINTER_NAMES = {
    PointerKind.FORWARD: "forward",
    PointerKind.ITERATE: "iterate",
    PointerKind.FORK: "fork",
}

EVENT_NAMES = {
    EventKind.LOCAL_OPTIMAL: "local_optimal",
    EventKind.STAGNATION_3: "stagnation_3",
}

# Reverse mappings for parsing
POINTER_BY_NAME = {name: kind for kind, name in POINTER_NAMES.items()}
EVENT_BY_NAME = {name: kind for kind, name in EVENT_NAMES.items()}

# Families whose fitness is integer valued and therefore accept ruggedness
INTEGER_FAMILIES = frozenset(f for f in ProblemFamily if f is not ProblemFamily.LABS)

# Families whose working length must be a perfect square
SQUARE_FAMILIES = frozenset({ProblemFamily.ISING_TORUS, ProblemFamily.NQUEENS})
