"""Central finite-difference gradient verification.

The numeric side only ever calls the forward pass, so it stays independent of
the backward implementations it checks.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .tensor import Tensor

# Relative error uses a floored denominator: below the floor the comparison
# degrades into an absolute check, which keeps near-zero gradient entries from
# amplifying finite-difference roundoff into spurious failures.
REL_FLOOR = 1e-3


def rel_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = REL_FLOOR) -> np.ndarray:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def numeric_gradient(loss_fn: Callable[[], Tensor], p: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of loss_fn's summed output w.r.t. every element of p.

    Summing matches how backward() seeds the output gradient with ones, so
    analytic and numeric sides agree for any output shape.
    """
    grad = np.zeros_like(p.data)
    flat = p.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        hi = float(np.asarray(loss_fn().data).sum())
        flat[i] = keep - h
        lo = float(np.asarray(loss_fn().data).sum())
        flat[i] = keep
        out[i] = (hi - lo) / (2.0 * h)
    return grad


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Iterable[tuple[str, Tensor]],
    h: float = 1e-5,
) -> dict[str, float]:
    """Max relative error per parameter between backprop and finite differences."""
    params = list(params)
    for _, p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for name, p in params}

    errors = {}
    for name, p in params:
        numeric = numeric_gradient(loss_fn, p, h=h)
        errors[name] = float(rel_error(analytic[name], numeric).max())
    return errors
