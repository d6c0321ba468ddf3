import logging

from metadesign.actions import design as design_actions
from metadesign.actions import evaluation as evaluation_actions
from metadesign.actions import export as export_actions

log = logging.getLogger(__name__)


class MetaDesignPlugin:
    """
    Registry of the actions the command line exposes.
    """

    def get_actions(self):
        actions = {
            'design_train': design_actions.design_train,
            'design_continual': design_actions.design_continual,
            'design_infer': design_actions.design_infer,
            'program_eval': evaluation_actions.program_eval,
            'baseline_bench': evaluation_actions.baseline_bench,
            'ga_tune': evaluation_actions.ga_tune,
            'problem_features': export_actions.problem_features,
            'vocab_export': export_actions.vocab_export,
            'program_export': export_actions.program_export,
        }

        return actions
