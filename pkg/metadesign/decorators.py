import logging
import os
from functools import wraps

from metadesign.config import Config

log = logging.getLogger(__name__)


def with_output_dir(func):
    '''
    Decorator for actions that write artifacts. Fills in context['config'],
    context['workers'] and context['output_dir'] (data_dict 'output_dir'
    first, then the config) and creates the directory.
    '''

    @wraps(func)
    def action_wrapper(context, data_dict):
        context = dict(context or {})
        data_dict = dict(data_dict or {})
        config = context.setdefault("config", Config())
        context.setdefault("workers", config.train.workers)
        out = data_dict.get("output_dir") or context.get("output_dir") or config.output_dir
        os.makedirs(out, exist_ok=True)
        context["output_dir"] = out
        return func(context, data_dict)

    return action_wrapper
