from dataclasses import asdict, dataclass

# Column order of runs.csv
RUN_COLUMNS = ["program_id", "problem", "dim", "run", "seed", "best_fitness", "fe_used", "wall_ms"]

# Column order of train_log.csv
TRAIN_LOG_COLUMNS = ["epoch", "mean_reward", "max_reward", "baseline", "loss", "lr", "length_histogram"]


@dataclass(frozen=True)
class RunRecord:
    """
    Result of one interpreter run of a program on a problem instance.
    """
    program_id: str
    problem_key: str
    dim: int
    run_index: int
    seed: int
    best_fitness: float
    fe_used: int
    wall_ms: int = 0

    def __repr__(self):
        return (f"<RunRecord(program_id={self.program_id}, problem={self.problem_key}, "
                f"run={self.run_index}, best={self.best_fitness})>")

    def __str__(self):
        return f"RunRecord: {self.program_id} on {self.problem_key} run {self.run_index} -> {self.best_fitness:g}"

    def as_dict(self):
        return {
            "program_id": self.program_id,
            "problem": self.problem_key,
            "dim": self.dim,
            "run": self.run_index,
            "seed": self.seed,
            "best_fitness": self.best_fitness,
            "fe_used": self.fe_used,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True)
class TrainLogRow:
    epoch: int
    mean_reward: float
    max_reward: float
    baseline: float
    loss: float
    lr: float
    length_histogram: str

    def as_dict(self):
        return asdict(self)
