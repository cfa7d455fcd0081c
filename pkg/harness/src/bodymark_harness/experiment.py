"""The full experiment grid: {baseline, pre3, pre36} x {small, large} x seeds."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .data import HarnessConfigError, read_manifest
from .train import PretrainedWeights, TrainSettings, finetune_and_eval, pretrain

CONDITIONS = ("baseline", "pre3", "pre36")
SPLITS = ("small", "large")


@dataclass(frozen=True)
class ExperimentConfig:
    pretrain3_dir: str
    pretrain36_dir: str
    eval_dir: str  # large split: full diagnoses dataset
    eval_small_dir: str  # small split: few-shot subset
    out_dir: str
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    image_width: int = 125
    image_height: int = 100
    pretrain_epochs: int = 15
    pretrain_lr: float = 1e-3
    # per-split fine-tuning budgets (the 25-image split sees one batch per
    # epoch, so it needs many more epochs for a comparable step count)
    finetune_epochs_small: int = 100
    finetune_epochs_large: int = 60
    finetune_lr: float = 1e-3
    weight_decay: float = 0.05
    batch_size: int = 32
    pretrain_seed: int = 0

    def __post_init__(self) -> None:
        if not self.seeds:
            raise HarnessConfigError("at least one seed is required")

    @property
    def image_size(self) -> tuple[int, int]:
        return (self.image_width, self.image_height)

    def finetune_epochs(self, split: str) -> int:
        return self.finetune_epochs_small if split == "small" else self.finetune_epochs_large


@dataclass
class Cell:
    condition: str
    split: str
    seed: int
    accuracy: float
    confusion: list[list[int]]

    @property
    def oracle_accuracy(self) -> float:
        """Confusion-matrix trace over total count; must equal `accuracy`."""
        trace = sum(self.confusion[i][i] for i in range(len(self.confusion)))
        total = sum(sum(row) for row in self.confusion)
        return trace / total


@dataclass
class ResultsTable:
    cells: list[Cell] = field(default_factory=list)

    def accuracies(self, condition: str, split: str) -> list[float]:
        return [
            c.accuracy
            for c in self.cells
            if c.condition == condition and c.split == split
        ]

    def mean(self, condition: str, split: str) -> float:
        accs = self.accuracies(condition, split)
        return sum(accs) / len(accs)

    def spread(self, condition: str, split: str) -> float:
        """Population standard deviation across seeds."""
        accs = self.accuracies(condition, split)
        mean = sum(accs) / len(accs)
        return (sum((a - mean) ** 2 for a in accs) / len(accs)) ** 0.5


def _expect_family(directory: str, family: str) -> dict:
    info = read_manifest(directory)
    if info.family != family:
        raise HarnessConfigError(
            f"{directory}: expected a {family} dataset, found {info.family}"
        )
    counts = {"train": 0, "test": 0}
    for e in info.entries:
        counts[e["split"]] += 1
    return {
        "directory": str(directory),
        "family": info.family,
        "config_digest": info.config_digest,
        "train_images": counts["train"],
        "test_images": counts["test"],
    }


def run_experiment(config: ExperimentConfig) -> tuple[ResultsTable, dict]:
    """Run the grid and write reports; returns (table, dataset provenance)."""
    datasets = {
        "pretrain3": _expect_family(config.pretrain3_dir, "basic3"),
        "pretrain36": _expect_family(config.pretrain36_dir, "regions36"),
        "eval_large": _expect_family(config.eval_dir, "diagnoses"),
        "eval_small": _expect_family(config.eval_small_dir, "diagnoses"),
    }
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def pretrain_settings(flips: bool) -> TrainSettings:
        return TrainSettings(
            epochs=config.pretrain_epochs,
            lr=config.pretrain_lr,
            batch_size=config.batch_size,
            seed=config.pretrain_seed,
            weight_decay=config.weight_decay,
            augment_flips=flips,
        )

    pre_weights: dict[str, PretrainedWeights | None] = {"baseline": None}
    pre_weights["pre3"] = pretrain(
        config.pretrain3_dir, pretrain_settings(flips=True), config.image_size
    )
    pre_weights["pre3"].save(out / "weights_pre3.pt")
    # flips would relabel the positional region classes, so they stay off here
    pre_weights["pre36"] = pretrain(
        config.pretrain36_dir, pretrain_settings(flips=False), config.image_size
    )
    pre_weights["pre36"].save(out / "weights_pre36.pt")

    split_dirs = {"small": config.eval_small_dir, "large": config.eval_dir}
    table = ResultsTable()
    for split in SPLITS:
        for condition in CONDITIONS:
            for seed in config.seeds:
                settings = TrainSettings(
                    epochs=config.finetune_epochs(split),
                    lr=config.finetune_lr,
                    batch_size=config.batch_size,
                    seed=seed,
                    weight_decay=config.weight_decay,
                    augment_flips=True,
                )
                try:
                    accuracy, confusion = finetune_and_eval(
                        pre_weights[condition],
                        split_dirs[split],
                        split_dirs[split],
                        settings,
                        config.image_size,
                    )
                except Exception as e:
                    raise RuntimeError(
                        f"cell ({condition}, {split}, seed {seed}) failed: {e}"
                    ) from e
                table.cells.append(
                    Cell(
                        condition=condition,
                        split=split,
                        seed=seed,
                        accuracy=accuracy,
                        confusion=confusion.tolist(),
                    )
                )
    datasets["pretrain3"]["train_accuracy"] = pre_weights["pre3"].train_accuracy
    datasets["pretrain36"]["train_accuracy"] = pre_weights["pre36"].train_accuracy
    return table, datasets
