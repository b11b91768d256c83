"""
Finite-difference gradient checking.

Every checked parameter entry is perturbed by ±h and the central difference
of the loss is compared with the backward pass using
|analytic − numeric| / max(1, |analytic|).

An entry over tolerance whose forward and backward one-sided differences
also disagree by more than the tolerance sits on a kink (a ReLU input or a
pooling tie at exactly zero margin). The loss has no derivative there, so
such entries are listed as kinks rather than failures.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import logging

import numpy as np

from ..errors import GradCheckError
from ..layers import LayerStack
from ..models.enums import LayerMode
from ..tensor_core import Rng, Tensor
from .trainer import output_gradient

logger = logging.getLogger("trainer.gradcheck")

LossFn = Callable[[Tensor], Tuple[float, Tensor]]

INPUT_NAME = "input"


@dataclass(frozen=True)
class GradCheckEntry:
    parameter: str
    index: Tuple[int, ...]
    analytic: float
    numeric: float
    rel_error: float
    one_sided: Tuple[float, float] = (0.0, 0.0)

    @property
    def layer(self) -> str:
        return self.parameter.split(".", 1)[0]


@dataclass
class GradCheckReport:
    """Per-layer maximum relative error, entries over tolerance and kinks."""
    tol: float
    h: float
    max_errors: Dict[str, float] = field(default_factory=dict)
    failures: List[GradCheckEntry] = field(default_factory=list)
    kinks: List[GradCheckEntry] = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_error(self) -> float:
        return max(self.max_errors.values(), default=0.0)

    def record(self, entry: GradCheckEntry) -> None:
        self.checked += 1
        if entry.rel_error > self.tol and relative_error(*entry.one_sided) > self.tol:
            self.kinks.append(entry)
            return
        layer = entry.layer
        self.max_errors[layer] = max(self.max_errors.get(layer, 0.0), entry.rel_error)
        if entry.rel_error > self.tol:
            self.failures.append(entry)

    def raise_for_failures(self) -> None:
        if self.failures:
            raise GradCheckError(self)

    def lines(self) -> List[str]:
        """Human-readable summary, one line per layer."""
        out = [f"{layer}: max_rel_error={err:.3e}" for layer, err in self.max_errors.items()]
        for entry in self.failures[:10]:
            out.append(
                f"FAIL {entry.parameter}{list(entry.index)}: analytic={entry.analytic:.10g} "
                f"numeric={entry.numeric:.10g} rel={entry.rel_error:.3e}"
            )
        if self.kinks:
            out.append(f"skipped {len(self.kinks)} non-differentiable entries")
        return out


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic))


def _indices(shape: Tuple[int, ...], limit: Optional[int], rng: Optional[Rng]):
    total = int(np.prod(shape, dtype=np.int64))
    if limit is None or limit >= total:
        return list(np.ndindex(*shape))
    chosen = np.sort((rng or Rng(0)).permutation(total)[:limit])
    return [np.unravel_index(int(i), shape) for i in chosen]


def grad_check(
    model: LayerStack,
    x: Tensor,
    label,
    h: float = 1e-5,
    tol: float = 1e-4,
    loss_fn: Optional[LossFn] = None,
    check_input: bool = False,
    max_per_parameter: Optional[int] = None,
    rng: Optional[Rng] = None
) -> GradCheckReport:
    """
    Compare backward-pass gradients with central differences.

    The model is switched to eval mode, so dropout is disabled and batch
    norm uses its running statistics.

    Args:
        model: Network to check; parameters are restored after each probe
        x: Batched input
        label: Label(s) for the default BCE loss
        h: Perturbation size
        tol: Maximum accepted relative error
        loss_fn: Maps a model output to (loss, d loss / d output); defaults
            to the model head's BCE
        check_input: Also check the gradient with respect to x
        max_per_parameter: Check at most this many sampled entries per tensor
        rng: Sampling stream for max_per_parameter

    Returns:
        GradCheckReport; call raise_for_failures() to turn failures into
        a GradCheckError
    """
    model.set_mode(LayerMode.EVAL)
    x = np.array(x, dtype=np.float64)
    if loss_fn is None:
        labels = np.atleast_1d(np.asarray(label, dtype=np.float64))

        def loss_fn(output):
            return output_gradient(model, output, labels)

    _, grad_output = loss_fn(model.forward(x))
    grad_x = model.backward(grad_output)
    analytic = {name: np.array(value) for name, value in model.named_grads().items()}

    def loss_at() -> float:
        return loss_fn(model.forward(x))[0]

    base = loss_at()
    report = GradCheckReport(tol=tol, h=h)
    targets = list(model.named_parameters())
    if check_input:
        targets.append((INPUT_NAME, x))
        analytic[INPUT_NAME] = np.array(grad_x)

    for name, tensor in targets:
        for idx in _indices(tensor.shape, max_per_parameter, rng):
            original = tensor[idx]
            tensor[idx] = original + h
            plus = loss_at()
            tensor[idx] = original - h
            minus = loss_at()
            tensor[idx] = original
            numeric = (plus - minus) / (2.0 * h)
            one_sided = ((plus - base) / h, (base - minus) / h)
            a = float(analytic[name][idx])
            report.record(GradCheckEntry(
                name, tuple(int(i) for i in idx), a, numeric, relative_error(a, numeric), one_sided
            ))

    logger.info(f"checked {report.checked} entries, max relative error {report.max_error:.3e}")
    if report.kinks:
        logger.info(f"{len(report.kinks)} entries sit on a kink and were not scored")
    if report.failures:
        logger.warning(f"{len(report.failures)} entries exceed tolerance {tol}")
    return report
