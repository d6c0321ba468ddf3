import logging
import os

import torch

from metadesign import __VERSION__
from metadesign.errors import ObjectNotFound, ValidationError
from metadesign.policy.network import PolicyHyper, PolicyNetwork

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


def save_checkpoint(path, policy, config=None, factors=None):
    """
    Write the policy weights with their shapes, a config echo and the factor
    vectors of the tasks it was trained on.
    """
    payload = {
        "version": CHECKPOINT_VERSION,
        "package_version": __VERSION__,
        "hyper": policy.hyper.as_dict(),
        "state_dict": {k: v.detach().clone() for k, v in policy.state_dict().items()},
        "config": dict(config or {}),
        "factors": {k: [float(x) for x in v] for k, v in (factors or {}).items()},
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    torch.save(payload, path)
    log.info(f"checkpoint written to {path}")
    return path


def load_checkpoint(path):
    """
    Returns (policy, payload). Raises ObjectNotFound for a missing file and
    ValidationError for a version or shape mismatch.
    """
    if not os.path.isfile(path):
        raise ObjectNotFound(f"Checkpoint {path} not found")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise ValidationError({"checkpoint": f"unreadable checkpoint {path}: {e}"})
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValidationError({"checkpoint": f"unsupported checkpoint version {payload.get('version')}"})

    policy = PolicyNetwork(PolicyHyper(**payload["hyper"]))
    expected = policy.state_dict()
    state = payload["state_dict"]
    wrong = [k for k, v in expected.items() if k not in state or tuple(state[k].shape) != tuple(v.shape)]
    if wrong or set(state) - set(expected):
        raise ValidationError({"checkpoint": f"parameter shapes do not match: {', '.join(wrong) or 'extra keys'}"})
    policy.load_state_dict(state)
    log.debug(f"loaded checkpoint {path} ({policy.parameter_count()} parameters)")
    return policy, payload
