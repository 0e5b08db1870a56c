"""Finite-difference verification of every analytic gradient.

Central differences with step 1e-5 on random small instances. Two
conventions are pinned here:

* NUCE holds its uncertainty weights fixed during backprop, so its
  oracle differentiates the risk with the weights frozen at the base
  point (plus the live contraction term);
* focal differentiates through its modulating factor, so its oracle
  differentiates the focal value itself.
"""

from dataclasses import dataclass

import numpy as np

from .losses import (AnchorSet, LossConfig, center_loss, contraction_value,
                     cross_entropy_loss, focal_loss, nuce_loss,
                     nuce_loss_matrix_form, probabilities, uncertainty_weights,
                     weighted_risk_value)

FD_STEP = 1e-5
TOLERANCE = 1e-4


@dataclass
class CheckRow:
    loss: str
    block: str
    max_rel_err: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < TOLERANCE


def fd_gradient(f, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function of an array."""
    grad = np.zeros_like(x)
    flat = x.ravel()
    g = grad.ravel()
    for i in range(flat.shape[0]):
        orig = flat[i]
        flat[i] = orig + step
        up = f(x)
        flat[i] = orig - step
        down = f(x)
        flat[i] = orig
        g[i] = (up - down) / (2.0 * step)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def _random_instance(rng):
    b = int(rng.integers(2, 9))
    d = int(rng.integers(2, 7))
    k = int(rng.integers(2, 5))
    h = rng.normal(0.0, 1.0, (b, d))
    w = rng.normal(0.0, 1.0, (k, d))
    a = rng.normal(0.0, 1.0, (k, d))
    y = np.zeros((b, k))
    y[np.arange(b), rng.integers(0, k, b)] = 1.0
    return h, w, a, y


def _nuce_cases(rng, form):
    h, w, a, y = _random_instance(rng)
    cfg = LossConfig(
        lambda_r=float(rng.choice([0.5, 1.0, 1.5])),
        lambda_c=float(rng.choice([0.0, 0.5, 1.0])),
        gamma=float(rng.choice([0.0, 0.5, 1.0, 2.0])),
    )
    out = form(h, w, y, AnchorSet(a), cfg)
    # weights frozen at the base point: the detached-gradient oracle
    w0 = uncertainty_weights(probabilities(h, w), cfg.gamma)

    def risk_plus_contract_h(hp):
        return (cfg.lambda_r * weighted_risk_value(hp, w, y, w0)
                + cfg.lambda_c * contraction_value(hp, y, AnchorSet(a)))

    def risk_w(wp):
        return cfg.lambda_r * weighted_risk_value(h, wp, y, w0)

    def contract_a(ap):
        return cfg.lambda_c * contraction_value(h, y, AnchorSet(ap))

    return out, [("H", h, risk_plus_contract_h, out.grad_H),
                 ("W", w, risk_w, out.grad_W),
                 ("A", a, contract_a, out.grad_A)]


def _ce_cases(rng):
    h, w, _, y = _random_instance(rng)
    out = cross_entropy_loss(h, w, y)
    return out, [("H", h, lambda hp: cross_entropy_loss(hp, w, y).total, out.grad_H),
                 ("W", w, lambda wp: cross_entropy_loss(h, wp, y).total, out.grad_W)]


def _focal_cases(rng):
    h, w, _, y = _random_instance(rng)
    gamma = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
    out = focal_loss(h, w, y, gamma)
    return out, [("H", h, lambda hp: focal_loss(hp, w, y, gamma).total, out.grad_H),
                 ("W", w, lambda wp: focal_loss(h, wp, y, gamma).total, out.grad_W)]


def _center_cases(rng):
    h, w, c, y = _random_instance(rng)
    lam = float(rng.choice([0.0, 0.5, 1.0]))
    out = center_loss(h, w, y, AnchorSet(c), lam)
    return out, [
        ("H", h, lambda hp: center_loss(hp, w, y, AnchorSet(c), lam).total, out.grad_H),
        ("W", w, lambda wp: center_loss(h, wp, y, AnchorSet(c), lam).total, out.grad_W),
        ("centers", c, lambda cp: center_loss(h, w, y, AnchorSet(cp), lam).total, out.grad_A),
    ]


LOSS_BUILDERS = (
    ("nuce", lambda rng: _nuce_cases(rng, nuce_loss)),
    ("nuce_matrix", lambda rng: _nuce_cases(rng, nuce_loss_matrix_form)),
    ("cross_entropy", _ce_cases),
    ("focal", _focal_cases),
    ("center", _center_cases),
)


def gradient_check_suite(seed: int = 0, instances: int = 20,
                         perturb: bool = False) -> list:
    """Max relative FD error per (loss, block) over random instances.

    `perturb` injects a deliberate error into one analytic gradient; it
    exists so the harness can prove the suite actually detects failures.
    """
    worst = {}
    for name, builder in LOSS_BUILDERS:
        rng = np.random.default_rng(seed)
        for inst in range(instances):
            _, cases = builder(rng)
            for block, x, f, analytic in cases:
                analytic = analytic.copy()
                if perturb and name == "nuce" and block == "H" and inst == 0:
                    analytic[0, 0] += 1e-2
                err = max_relative_error(analytic, fd_gradient(f, x))
                key = (name, block)
                worst[key] = max(worst.get(key, 0.0), err)
    return [CheckRow(loss, block, err) for (loss, block), err in worst.items()]
