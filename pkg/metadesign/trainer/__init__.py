from metadesign.trainer.config import TaskSpec, TrainConfig, build_task  # noqa: F401
from metadesign.trainer.loop import infer, train, train_continual  # noqa: F401
