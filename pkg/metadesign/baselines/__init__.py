from metadesign.baselines.handcoded import run_handcoded  # noqa: F401
from metadesign.baselines.programs import PUBLISHED, as_program, published_program  # noqa: F401
from metadesign.baselines.tuning import tune_ga  # noqa: F401
