"""
Problem keys of the form `family[:dim][+layer...]`, where a layer is one of
dummyM, neutralityMU, epistasisNU or ruggednessGAMMA. The dimension and the
layers may come in either order, e.g. `onemax+neutrality3:120`.
"""
import re

from metadesign.models.enums import ProblemFamily, WModelKind
from metadesign.problems.instance import ProblemError, WModelLayer, make_instance

_LAYER_RE = re.compile(r"^(dummy|neutrality|epistasis|ruggedness)(\d+)$")


def parse_problem_key(key):
    """
    Split a key into (family, dim or None, layers).
    """
    if not key or not isinstance(key, str):
        raise ProblemError(f"invalid problem key {key!r}")
    parts = re.split(r"([+:])", key.strip())
    try:
        family = ProblemFamily(parts[0])
    except ValueError:
        raise ProblemError(f"unknown problem family {parts[0]!r} in {key!r}")
    dim = None
    layers = []
    for sep, part in zip(parts[1::2], parts[2::2]):
        if sep == ":":
            if not part.isdigit() or dim is not None:
                raise ProblemError(f"invalid dimension {part!r} in {key!r}")
            dim = int(part)
        else:
            m = _LAYER_RE.match(part)
            if not m:
                raise ProblemError(f"unknown layer {part!r} in {key!r}")
            layers.append(WModelLayer(WModelKind(m.group(1)), int(m.group(2))))
    return family, dim, tuple(layers)


def instance_from_key(key, dim=None, seed=1):
    """
    Build the instance named by `key`. `dim` overrides a missing dimension.
    """
    family, key_dim, layers = parse_problem_key(key)
    d = key_dim if key_dim is not None else dim
    if d is None:
        raise ProblemError(f"problem key {key!r} has no dimension")
    return make_instance(family, d, wmodel=layers, seed=seed)


def family_keys():
    return [f.value for f in ProblemFamily]
