"""
Evaluation and reporting models.

Contains the confusion-matrix metrics, the per-epoch training record and
the ablation report row.
"""

from typing import ClassVar, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import Architecture, PreprocessMode, RunStatus

_TOLERANCE = 1e-12


class Metrics(BaseModel):
    """Confusion-matrix derived binary classification metrics (ratios in [0, 1])."""
    tp: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)
    accuracy: float = Field(..., ge=0, le=1)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f_score: float = Field(..., ge=0, le=1)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> "Metrics":
        """
        Derive all ratios from the four counts.

        Precision, recall and F-score are 0 when their denominators vanish.
        """
        total = tp + fp + tn + fn
        if total == 0:
            raise ValueError("metrics need at least one prediction")
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f_score = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(
            tp=tp, fp=fp, tn=tn, fn=fn,
            accuracy=(tp + tn) / total,
            precision=precision,
            recall=recall,
            f_score=f_score
        )

    @model_validator(mode="after")
    def validate_consistency(self):
        """Accuracy must equal correct / total."""
        total = self.tp + self.fp + self.tn + self.fn
        if total == 0:
            raise ValueError("metrics need at least one prediction")
        if abs(self.accuracy - (self.tp + self.tn) / total) > _TOLERANCE:
            raise ValueError("accuracy inconsistent with confusion counts")
        return self

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_percentages(self) -> Dict[str, str]:
        """Ratios rendered as percentages with two decimals."""
        return {
            "accuracy": f"{self.accuracy * 100:.2f}%",
            "precision": f"{self.precision * 100:.2f}%",
            "recall": f"{self.recall * 100:.2f}%",
            "f_score": f"{self.f_score * 100:.2f}%"
        }


class EpochRecord(BaseModel):
    """One line of the training log."""
    epoch: int = Field(..., ge=1)
    train_loss: float
    train_acc: float = Field(..., ge=0, le=1)
    test_acc: Optional[float] = Field(default=None, ge=0, le=1)

    model_config = ConfigDict(frozen=True)

    CSV_HEADER: ClassVar[str] = "epoch,train_loss,train_acc,test_acc"

    def to_csv(self) -> str:
        test_part = "" if self.test_acc is None else f"{self.test_acc:.6f}"
        return f"{self.epoch},{self.train_loss:.6f},{self.train_acc:.6f},{test_part}"


class ExperimentRow(BaseModel):
    """Outcome of one configuration of the ablation table."""
    name: str = Field(..., min_length=1)
    arch: Architecture
    mode: PreprocessMode
    epochs: int = Field(..., gt=0)
    seed: int = Field(..., ge=0)
    n_train: int = Field(default=0, ge=0)
    n_test: int = Field(default=0, ge=0)
    status: RunStatus = RunStatus.OK
    metrics: Optional[Metrics] = None
    error: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    CSV_HEADER: ClassVar[str] = "name,arch,mode,accuracy,f_score,precision,recall,epochs,seed,n_train,n_test,status,error"

    @model_validator(mode="after")
    def validate_outcome(self):
        """Successful rows carry metrics, failed rows carry an error."""
        if self.status == RunStatus.OK and self.metrics is None:
            raise ValueError("successful rows need metrics")
        if self.status == RunStatus.FAILED and not self.error:
            raise ValueError("failed rows need an error message")
        return self

    def to_csv_fields(self) -> List[str]:
        m = self.metrics
        ratios = [f"{v:.6f}" for v in (m.accuracy, m.f_score, m.precision, m.recall)] if m else [""] * 4
        return [
            self.name,
            self.arch.value,
            self.mode.value,
            *ratios,
            str(self.epochs),
            str(self.seed),
            str(self.n_train),
            str(self.n_test),
            self.status.value,
            self.error or ""
        ]
