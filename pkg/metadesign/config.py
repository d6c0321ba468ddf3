"""
Reads `metadesign.*` settings from the `[app:main]` section of an ini file.

Precedence: built-in defaults < ini file < explicit overrides (command line
flags). Keys without the `metadesign.` prefix are left to other tools.
"""
import configparser
import logging
import logging.config
import os
from dataclasses import dataclass, field, fields, replace

from metadesign.errors import ObjectNotFound, ValidationError
from metadesign.trainer.config import TrainConfig, parse_bool, split_entries

log = logging.getLogger(__name__)

SECTION = "app:main"
PREFIX = "metadesign."
OUTPUT_DIR_ENV = "METADESIGN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "metadesign-output"

TRAIN_KEYS = {f.name for f in fields(TrainConfig)}
LIST_KEYS = {"problems", "tasks"}
BOOL_KEYS = {"trace", "wall_clock_costs", "zero_wall_ms"}
EXTRA_KEYS = LIST_KEYS | BOOL_KEYS | {"output_dir"}


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


@dataclass(frozen=True)
class Config:
    train: TrainConfig = field(default_factory=TrainConfig)
    problems: tuple = ()
    tasks: tuple = ()
    output_dir: str = field(default_factory=default_output_dir)
    trace: bool = False
    wall_clock_costs: bool = False
    zero_wall_ms: bool = False

    def override(self, **changes):
        """
        New config with `changes` applied; None values are ignored.
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        unknown = set(changes) - TRAIN_KEYS - EXTRA_KEYS
        if unknown:
            raise ValidationError({k: "unknown setting" for k in sorted(unknown)})
        train_changes = {k: v for k, v in changes.items() if k in TRAIN_KEYS}
        own = {k: v for k, v in changes.items() if k in EXTRA_KEYS}
        for key in LIST_KEYS & set(own):
            own[key] = tuple(split_entries(own[key]))
        train = TrainConfig.from_dict({**self.train.as_dict(), **train_changes}) if train_changes else self.train
        return replace(self, train=train, **own)

    def as_dict(self):
        return {
            "train": self.train.as_dict(),
            "problems": list(self.problems),
            "tasks": list(self.tasks),
            "output_dir": self.output_dir,
            "trace": self.trace,
            "wall_clock_costs": self.wall_clock_costs,
            "zero_wall_ms": self.zero_wall_ms,
        }


def read_settings(path):
    """
    The `metadesign.*` keys of the ini file as a {name: raw string} dict.
    """
    if not os.path.isfile(path):
        raise ObjectNotFound(f"Config file {path} not found")
    parser = configparser.RawConfigParser()
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ValidationError({"config": f"malformed config file {path}: {e}"})
    if not parser.has_section(SECTION):
        return {}, parser

    settings = {}
    errors = {}
    for key, value in parser.items(SECTION):
        if not key.startswith(PREFIX):
            continue
        name = key[len(PREFIX):]
        if name not in TRAIN_KEYS and name not in EXTRA_KEYS:
            errors[key] = "unknown setting"
            continue
        settings[name] = value
    if errors:
        raise ValidationError(errors)
    return settings, parser


def _parse_extra(name, value):
    if name in LIST_KEYS:
        return tuple(split_entries(value))
    if name in BOOL_KEYS:
        try:
            return parse_bool(value)
        except ValueError:
            raise ValidationError({PREFIX + name: f"invalid boolean {value!r}"})
    return value


def load_config(path=None, overrides=None, configure_logging=True):
    """
    Build a Config from defaults, the ini file at `path` (if any) and
    `overrides`. The file's logging sections configure logging.
    """
    settings = {}
    if path:
        settings, parser = read_settings(path)
        if configure_logging and parser.has_section("loggers"):
            logging.config.fileConfig(path, disable_existing_loggers=False)

    train_values = {k: v for k, v in settings.items() if k in TRAIN_KEYS}
    try:
        train = TrainConfig.from_dict(train_values)
    except ValidationError as e:
        raise ValidationError({PREFIX + k: v for k, v in e.error_dict.items()})
    extra = {k: _parse_extra(k, v) for k, v in settings.items() if k in EXTRA_KEYS}
    config = Config(train=train, **extra)
    if overrides:
        config = config.override(**overrides)
    log.debug(f"configuration: {config.as_dict()}")
    return config
