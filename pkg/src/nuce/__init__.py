"""Desk-scale lab for the uncertainty-weighted contractive-embedding
(NUCE) loss: loss math with analytic gradients, baseline losses, a
deterministic trainer, imbalanced-data experiments, classification
metrics, and a single-class detection evaluator."""

from .data import GroupedDataset, SynthConfig, generate_synthetic, group_kfold, load_csv
from .detection import Box, DetectionSet, average_precision, cascade_gate, iou, map_suite
from .losses import (AnchorSet, LossConfig, LossOutput, center_loss,
                     cross_entropy_loss, focal_loss, nuce_loss,
                     nuce_loss_matrix_form, uncertainty_weights)
from .metrics import confusion, metric_summary, prf1
from .model import (ModelParams, TrainConfig, TrainReport, adam_step, cosine_lr,
                    forward, load_model, save_model, train)

__all__ = [
    "GroupedDataset", "SynthConfig", "generate_synthetic", "group_kfold", "load_csv",
    "Box", "DetectionSet", "average_precision", "cascade_gate", "iou", "map_suite",
    "AnchorSet", "LossConfig", "LossOutput", "center_loss", "cross_entropy_loss",
    "focal_loss", "nuce_loss", "nuce_loss_matrix_form", "uncertainty_weights",
    "confusion", "metric_summary", "prf1",
    "ModelParams", "TrainConfig", "TrainReport", "adam_step", "cosine_lr",
    "forward", "load_model", "save_model", "train",
]

__version__ = "0.1.0"
