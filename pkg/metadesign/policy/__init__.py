from metadesign.policy.network import PolicyError, PolicyHyper, PolicyNetwork  # noqa: F401
from metadesign.policy.sampling import (  # noqa: F401
    gradient,
    masked_sample,
    sample_sequence,
    sequence_logprob,
)
