"""
Training configuration and task descriptions.
"""
import configparser
import logging
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from metadesign.errors import ValidationError
from metadesign.landscape.features import compute_factors
from metadesign.policy.network import PolicyHyper
from metadesign.problems.instance import ProblemError
from metadesign.problems.registry import instance_from_key, parse_problem_key

log = logging.getLogger(__name__)

DEFAULT_TRAIN_DIMS = (100, 225, 400)
DEFAULT_TEST_DIM = 625


def parse_bool(value):
    """
    Booleans as given on the command line or in an ini file.
    """
    if isinstance(value, bool):
        return value
    if value is None:
        return False
    text = str(value).strip().lower()
    if not text:
        return False
    try:
        return configparser.RawConfigParser.BOOLEAN_STATES[text]
    except KeyError:
        raise ValueError(f"not a boolean: {value!r}")


def split_entries(value):
    """
    A whitespace separated string as a list; lists pass through, None is empty.
    """
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return str(value).split()


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 16
    ppo_iters: int = 5
    clip_eps: float = 0.2
    runs_per_instance: int = 5
    train_budget: int = 5000
    pop_size: int = 50
    lr: float = 5e-5
    lr_min_ratio: float = 0.1
    ewc_lambda: float = 200.0
    baseline_decay: float = 0.9
    fisher_samples: int = 256
    infer_samples: int = 16
    master_seed: int = 0
    workers: int = 1
    allow_events: bool = False
    d_model: int = 32
    heads: int = 8
    blocks: int = 2
    ffn_hidden: int = 128

    def __post_init__(self):
        errors = {}
        for name in ("epochs", "batch_size", "ppo_iters", "runs_per_instance", "train_budget", "pop_size",
                     "fisher_samples", "infer_samples", "workers", "d_model", "heads", "blocks", "ffn_hidden"):
            if getattr(self, name) < 1:
                errors[name] = "must be a positive integer"
        if not 0 < self.clip_eps < 1:
            errors["clip_eps"] = "must lie in (0, 1)"
        if self.lr <= 0:
            errors["lr"] = "must be positive"
        if not 0 < self.lr_min_ratio <= 1:
            errors["lr_min_ratio"] = "must lie in (0, 1]"
        if self.ewc_lambda < 0:
            errors["ewc_lambda"] = "must be non-negative"
        if not 0 <= self.baseline_decay < 1:
            errors["baseline_decay"] = "must lie in [0, 1)"
        if self.train_budget < self.pop_size:
            errors["train_budget"] = f"must be at least pop_size ({self.pop_size})"
        if self.d_model % self.heads:
            errors["heads"] = f"must divide d_model ({self.d_model})"
        if errors:
            raise ValidationError(errors)

    @classmethod
    def from_dict(cls, data):
        """
        Build a config from string or typed values, ignoring None entries.
        """
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        errors = {}
        for key, value in data.items():
            if value is None:
                continue
            if key not in types:
                errors[key] = "unknown training setting"
                continue
            try:
                kwargs[key] = _coerce(types[key], value)
            except (TypeError, ValueError):
                errors[key] = f"invalid value {value!r}"
        if errors:
            raise ValidationError(errors)
        return cls(**kwargs)

    def override(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def policy_hyper(self):
        return PolicyHyper(d_model=self.d_model, heads=self.heads, blocks=self.blocks, ffn_hidden=self.ffn_hidden)

    def as_dict(self):
        return asdict(self)


def _coerce(kind, value):
    if kind in (bool, "bool"):
        return parse_bool(value)
    if kind in (int, "int"):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return int(value)
    return float(value)


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """
    A problem family with its W-model layers and the training instances
    built from it. factors and walk samples are only filled in continual mode.
    """
    family_key: str
    dims: tuple = DEFAULT_TRAIN_DIMS
    instances: tuple = ()
    factors: object = None
    walk_samples: tuple = ()
    index: int = 0

    def __repr__(self):
        return f"<TaskSpec({self.key})>"

    @property
    def key(self):
        return f"{self.family_key}@{','.join(str(d) for d in self.dims)}"

    def initial_population(self, instance_index, seed, pop_size):
        """
        pop_size points of the instance's walk sample, charged no FEs.
        None when the task carries no walk samples.
        """
        if not self.walk_samples:
            return None
        rng = np.random.default_rng(seed)
        return self.walk_samples[instance_index].initial_population(rng, pop_size)


def parse_task_entry(entry):
    """
    `family[+layer...]@dim,dim,...` -> (family_key, dims).
    A bare problem key with a dimension is a single instance task.
    """
    entry = entry.strip()
    if "@" in entry:
        family_key, _, dims_text = entry.partition("@")
        try:
            dims = tuple(int(d) for d in dims_text.split(",") if d.strip())
        except ValueError:
            raise ValidationError({"tasks": f"invalid dimensions in {entry!r}"})
    else:
        family_key, dims = entry, ()
    try:
        family, key_dim, layers = parse_problem_key(family_key)
    except ProblemError as e:
        raise ValidationError({"tasks": str(e)})
    if key_dim is not None:
        dims = dims + (key_dim,)
    if not dims:
        dims = DEFAULT_TRAIN_DIMS
    if any(d < 1 for d in dims):
        raise ValidationError({"tasks": f"dimensions must be positive in {entry!r}"})
    bare = "+".join([family.value] + [layer.to_key() for layer in layers])
    return bare, dims


def build_task(entry, index=0, with_factors=False, master_seed=0, wall_clock=False, instance_seed=1):
    """
    Build the TaskSpec for a task entry. With factors, each training
    instance is embedded and the task factor vector is their mean; the first
    walk sample of every instance is kept for initial populations.
    """
    family_key, dims = parse_task_entry(entry) if isinstance(entry, str) else entry
    try:
        instances = tuple(instance_from_key(family_key, dim=d, seed=instance_seed) for d in dims)
    except ProblemError as e:
        raise ValidationError({"tasks": str(e)})
    if not with_factors:
        return TaskSpec(family_key, tuple(dims), instances, index=index)

    vectors = [compute_factors(inst, [master_seed, index, i], wall_clock=wall_clock)
               for i, inst in enumerate(instances)]
    mean = tuple(float(v) for v in np.mean([v.to_array() for v in vectors], axis=0))
    walks = tuple(v.samples[0] for v in vectors)
    log.info(f"task {index} {family_key}: factors from {len(instances)} instances")
    return TaskSpec(family_key, tuple(dims), instances, factors=mean, walk_samples=walks, index=index)


@dataclass
class TaskList:
    tasks: list = field(default_factory=list)

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    @classmethod
    def from_entries(cls, entries, with_factors=False, master_seed=0, wall_clock=False):
        return cls([build_task(e, i, with_factors, master_seed, wall_clock) for i, e in enumerate(entries)])
