"""Classification losses returning values together with analytic gradients.

The NUCE objective couples an uncertainty-weighted cross-entropy term
("risk") with a contraction term that pulls each feature row toward a
learnable per-class anchor:

    w_i        = (1 - max_k p_ik)^gamma          (uncertainty weight)
    risk       = -(1/B) sum_i w_i log p_{i,y_i}
    contract   = (1/(2B)) ||H - Y A||_F^2
    total      = lambda_r * risk + lambda_c * contract

Cross-entropy, focal, and center losses are provided as baselines under
the same interface. Conventions, pinned by the finite-difference suite:

* the uncertainty weights w_i are treated as constants during
  backpropagation (no gradient flows through them), the usual choice
  for sample-reweighting schemes;
* the focal modulating factor (1 - p_y)^gamma IS differentiated,
  following its standard definition;
* probabilities are clamped below at PROB_FLOOR before any log;
* 0**0 is taken as 1, so gamma = 0 reduces NUCE exactly to CE.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DataError, ShapeError
from .linalg import as_matrix, frobenius_sq, matmul, softmax_rows

PROB_FLOOR = 1e-12

LOSS_KINDS = ("nuce", "cross_entropy", "focal", "center")


@dataclass(frozen=True)
class LossConfig:
    """Loss selection and hyperparameters.

    lambda_r scales the weighted risk term, lambda_c the contraction
    term (doubling as the center-loss weight), gamma the uncertainty
    exponent. Defaults follow the recommended operating point
    (lambda_r=1.0, lambda_c=0.5, gamma=2).
    """

    lambda_r: float = 1.0
    lambda_c: float = 0.5
    gamma: float = 2.0
    kind: str = "nuce"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigError(f"unknown loss kind {self.kind!r}, expected one of {LOSS_KINDS}")
        if self.lambda_r < 0 or self.lambda_c < 0:
            raise ConfigError("lambda_r and lambda_c must be >= 0")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")


@dataclass
class AnchorSet:
    """Learnable per-class anchor matrix, one row per class (K x d)."""

    anchors: np.ndarray

    def __post_init__(self):
        self.anchors = as_matrix(self.anchors)

    @property
    def n_classes(self) -> int:
        return self.anchors.shape[0]

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]


@dataclass
class LossOutput:
    """Scalar loss value plus gradients for each parameter block.

    total == lambda_r * risk_term + lambda_c * contract_term (the
    lambdas are 1 and the loss-specific weight for the baselines).
    grad_A is zero-sized for losses without anchors/centers.
    """

    total: float
    risk_term: float
    contract_term: float
    grad_H: np.ndarray
    grad_W: np.ndarray
    grad_A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def _check_shapes(H, W, Y, anchors=None):
    if H.ndim != 2 or W.ndim != 2 or Y.ndim != 2:
        raise ShapeError("H, W, Y must be 2-D")
    b, d = H.shape
    k = W.shape[0]
    if W.shape[1] != d:
        raise ShapeError(f"W is {W.shape}, expected (K, {d})")
    if Y.shape != (b, k):
        raise ShapeError(f"Y is {Y.shape}, expected ({b}, {k})")
    if anchors is not None and anchors.anchors.shape != (k, d):
        raise ShapeError(f"anchors are {anchors.anchors.shape}, expected ({k}, {d})")


def _check_one_hot(Y):
    if not np.all((Y == 0.0) | (Y == 1.0)) or not np.all(Y.sum(axis=1) == 1.0):
        raise DataError("Y must be one-hot (exactly one 1 per row)")


def probabilities(H: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Softmax class probabilities P = softmax(H W^T), one row per sample."""
    return softmax_rows(matmul(H, W.T))


def uncertainty_weights(p: np.ndarray, gamma: float) -> np.ndarray:
    """Per-sample weights w_i = (1 - max_k p_ik)^gamma.

    gamma = 0 gives w_i = 1 for every row (0**0 == 1), so the weighted
    risk reduces to plain cross-entropy.
    """
    if gamma < 0:
        raise ConfigError("gamma must be >= 0")
    pmax = p.max(axis=1)
    return np.power(1.0 - pmax, gamma)


def weighted_risk_value(H, W, Y, weights) -> float:
    """Weighted log-loss -(1/B) sum_i weights_i * log p_{i,y_i}.

    The weights are externally supplied constants; this is the function
    the finite-difference suite differentiates to verify the detached
    NUCE gradient convention.
    """
    b = H.shape[0]
    p = probabilities(H, W)
    correct = np.einsum("ik,ik->i", Y, p)
    return float(-np.dot(weights, np.log(np.maximum(correct, PROB_FLOOR))) / b)


def contraction_value(H, Y, anchors: AnchorSet) -> float:
    """(1/(2B)) ||H - Y A||_F^2, zero when every feature sits on its anchor."""
    b = H.shape[0]
    diff = H - matmul(Y, anchors.anchors)
    return frobenius_sq(diff) / (2.0 * b)


def _risk_grads(weights, P, Y, H, W, lambda_r):
    """Gradients of lambda_r * weighted risk w.r.t. H and W (weights detached).

    d(risk)/dU = (1/B) diag(w) (P - Y); then grad_H = dU W, grad_W = dU^T H.
    """
    b = H.shape[0]
    g_u = (lambda_r / b) * weights[:, None] * (P - Y)
    return matmul(g_u, W), matmul(g_u.T, H)


def nuce_loss(H, W, Y, anchors: AnchorSet, cfg: LossConfig) -> LossOutput:
    """Uncertainty-weighted risk plus anchor contraction, per-sample form.

    Loops over the batch accumulating each sample's contribution to the
    value and the gradients; the vectorized twin is
    nuce_loss_matrix_form, which must agree to 1e-12.
    """
    H, W, Y = as_matrix(H), as_matrix(W), as_matrix(Y)
    _check_shapes(H, W, Y, anchors)
    _check_one_hot(Y)
    b, d = H.shape
    k = W.shape[0]
    A = anchors.anchors

    P = probabilities(H, W)
    risk_sum = 0.0
    contract_sum = 0.0
    grad_H = np.zeros((b, d))
    grad_W = np.zeros((k, d))
    grad_A = np.zeros((k, d))
    for i in range(b):
        p_i = P[i]
        y_i = int(np.argmax(Y[i]))
        w_i = (1.0 - p_i.max()) ** cfg.gamma
        risk_sum += w_i * np.log(max(p_i[y_i], PROB_FLOOR))
        resid = H[i] - A[y_i]
        contract_sum += float(resid @ resid)
        # risk path: d(-w log p_y)/du = w (p - e_y), weights detached
        g_u = (cfg.lambda_r / b) * w_i * (p_i - Y[i])
        grad_H[i] = g_u @ W + (cfg.lambda_c / b) * resid
        grad_W += np.outer(g_u, H[i])
        grad_A[y_i] -= (cfg.lambda_c / b) * resid
    risk = -risk_sum / b
    contract = contract_sum / (2.0 * b)
    return LossOutput(
        total=cfg.lambda_r * risk + cfg.lambda_c * contract,
        risk_term=risk,
        contract_term=contract,
        grad_H=grad_H,
        grad_W=grad_W,
        grad_A=grad_A,
    )


def nuce_loss_matrix_form(H, W, Y, anchors: AnchorSet, cfg: LossConfig) -> LossOutput:
    """Vectorized NUCE: risk via w . log diag(Y P^T), contraction via Frobenius norm."""
    H, W, Y = as_matrix(H), as_matrix(W), as_matrix(Y)
    _check_shapes(H, W, Y, anchors)
    _check_one_hot(Y)
    b = H.shape[0]
    A = anchors.anchors

    P = probabilities(H, W)
    w = uncertainty_weights(P, cfg.gamma)
    correct = np.einsum("ik,ik->i", Y, P)  # diag(Y P^T)
    risk = float(-np.dot(w, np.log(np.maximum(correct, PROB_FLOOR))) / b)

    diff = H - matmul(Y, A)
    contract = frobenius_sq(diff) / (2.0 * b)

    grad_H_risk, grad_W = _risk_grads(w, P, Y, H, W, cfg.lambda_r)
    grad_H = grad_H_risk + (cfg.lambda_c / b) * diff
    grad_A = cfg.lambda_c * (-matmul(Y.T, diff) / b)
    return LossOutput(
        total=cfg.lambda_r * risk + cfg.lambda_c * contract,
        risk_term=risk,
        contract_term=contract,
        grad_H=grad_H,
        grad_W=grad_W,
        grad_A=grad_A,
    )


def cross_entropy_loss(H, W, Y) -> LossOutput:
    """Mean softmax cross-entropy; the lambda_c=0, gamma=0 specialization."""
    H, W, Y = as_matrix(H), as_matrix(W), as_matrix(Y)
    _check_shapes(H, W, Y)
    _check_one_hot(Y)
    b = H.shape[0]
    P = probabilities(H, W)
    ones = np.ones(b)
    risk = weighted_risk_value(H, W, Y, ones)
    grad_H, grad_W = _risk_grads(ones, P, Y, H, W, 1.0)
    return LossOutput(total=risk, risk_term=risk, contract_term=0.0,
                      grad_H=grad_H, grad_W=grad_W)


def focal_loss(H, W, Y, gamma: float) -> LossOutput:
    """Mean of -(1 - p_y)^gamma log p_y with the modulator differentiated.

    Unlike the NUCE weights, the focal factor is part of the function
    being optimized, so its derivative appears in the gradients:
        dl/dp = gamma (1-p)^(gamma-1) log p - (1-p)^gamma / p
        dp/du_k = p (delta_{k,y} - p_k)
    """
    if gamma < 0:
        raise ConfigError("gamma must be >= 0")
    H, W, Y = as_matrix(H), as_matrix(W), as_matrix(Y)
    _check_shapes(H, W, Y)
    _check_one_hot(Y)
    b = H.shape[0]
    P = probabilities(H, W)
    p_y = np.einsum("ik,ik->i", Y, P)
    p_c = np.maximum(p_y, PROB_FLOOR)
    t = 1.0 - p_y
    risk = float(np.sum(-np.power(t, gamma) * np.log(p_c)) / b)

    dl_dp = -np.power(t, gamma) / p_c
    if gamma > 0:
        # gamma t^(gamma-1) log p -> 0 as t -> 0, but t**(gamma-1) can
        # overflow for gamma < 1, so only evaluate where t > 0
        pos = t > 0.0
        dl_dp[pos] += gamma * np.power(t[pos], gamma - 1.0) * np.log(p_c[pos])
    g_u = (1.0 / b) * (dl_dp * p_y)[:, None] * (Y - P)
    return LossOutput(total=risk, risk_term=risk, contract_term=0.0,
                      grad_H=matmul(g_u, W), grad_W=matmul(g_u.T, H))


def center_loss(H, W, Y, centers: AnchorSet, lambda_center: float) -> LossOutput:
    """Cross-entropy plus (lambda/2B) sum_i ||h_i - c_{y_i}||^2."""
    if lambda_center < 0:
        raise ConfigError("lambda_center must be >= 0")
    H, W, Y = as_matrix(H), as_matrix(W), as_matrix(Y)
    _check_shapes(H, W, Y, centers)
    _check_one_hot(Y)
    b = H.shape[0]
    P = probabilities(H, W)
    ones = np.ones(b)
    risk = weighted_risk_value(H, W, Y, ones)
    grad_H_risk, grad_W = _risk_grads(ones, P, Y, H, W, 1.0)

    diff = H - matmul(Y, centers.anchors)
    contract = frobenius_sq(diff) / (2.0 * b)
    grad_H = grad_H_risk + (lambda_center / b) * diff
    grad_C = lambda_center * (-matmul(Y.T, diff) / b)
    return LossOutput(
        total=risk + lambda_center * contract,
        risk_term=risk,
        contract_term=contract,
        grad_H=grad_H,
        grad_W=grad_W,
        grad_A=grad_C,
    )


def evaluate_loss(H, W, Y, anchors: AnchorSet, cfg: LossConfig) -> LossOutput:
    """Dispatch on cfg.kind; the matrix NUCE form is used for training."""
    if cfg.kind == "nuce":
        return nuce_loss_matrix_form(H, W, Y, anchors, cfg)
    if cfg.kind == "cross_entropy":
        return cross_entropy_loss(H, W, Y)
    if cfg.kind == "focal":
        return focal_loss(H, W, Y, cfg.gamma)
    return center_loss(H, W, Y, anchors, cfg.lambda_c)
