from metadesign.landscape.features import FACTOR_NAMES, FactorVector, compute_factors  # noqa: F401
from metadesign.landscape.sampling import WalkSample, random_walk_sample  # noqa: F401
