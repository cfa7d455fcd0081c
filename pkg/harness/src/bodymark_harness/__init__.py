"""bodymark-harness: desk-scale synthetic-pretraining experiment."""

from .data import HarnessConfigError, ImageSet, load_split, read_manifest
from .experiment import CONDITIONS, SPLITS, Cell, ExperimentConfig, ResultsTable, run_experiment
from .model import SmallConvNet, with_new_head
from .report import write_reports
from .train import (
    PretrainedWeights,
    TrainSettings,
    evaluate,
    finetune_and_eval,
    pretrain,
    train_classifier,
)

__version__ = "0.1.0"
