"""Shared test oracles, all coded independently of the library paths
they check (pure-Python loops, no reuse of package internals)."""

import math

import numpy as np

from nuce.detection import Box, DetectionSet


def scalar_softmax(row):
    """High-school softmax on a python list, with max subtraction."""
    m = max(row)
    exps = [math.exp(v - m) for v in row]
    s = sum(exps)
    return [e / s for e in exps]


def scalar_nuce(H, W, Y, A, lambda_r, lambda_c, gamma):
    """Per-sample loop over the loss definition; returns (risk, contract, total).

    H, W, Y, A are lists of lists. Probabilities are floored at 1e-12
    before the log, matching the library convention.
    """
    b = len(H)
    d = len(H[0])
    k = len(W)
    risk_sum = 0.0
    contract_sum = 0.0
    for i in range(b):
        u = [sum(H[i][j] * W[c][j] for j in range(d)) for c in range(k)]
        p = scalar_softmax(u)
        y_i = max(range(k), key=lambda c: Y[i][c])
        w_i = (1.0 - max(p)) ** gamma
        risk_sum += w_i * math.log(max(p[y_i], 1e-12))
        contract_sum += sum((H[i][j] - A[y_i][j]) ** 2 for j in range(d))
    risk = -risk_sum / b
    contract = contract_sum / (2.0 * b)
    return risk, contract, lambda_r * risk + lambda_c * contract


def fd_gradient_of(f, x, step=1e-5):
    """Independent central-difference helper for the loss tests."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        up = f(x)
        x[idx] = orig - step
        down = f(x)
        x[idx] = orig
        grad[idx] = (up - down) / (2.0 * step)
        it.iternext()
    return grad


def oracle_iou(a, b):
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    if inter == 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def oracle_ap(sets, thresh):
    """Brute-force AP: explicit pooled ranking, explicit greedy matching,
    and the sum-over-recall-steps form of all-points interpolation."""
    pooled = []
    order = 0
    for si, ds in enumerate(sets):
        for box, conf in ds.predictions:
            pooled.append((-conf, order, si, box))
            order += 1
    pooled.sort()

    matched = {}
    flags = []
    for _, _, si, box in pooled:
        best = None
        best_iou = -1.0
        for gi, gt in enumerate(sets[si].ground_truth):
            if (si, gi) in matched:
                continue
            g = (gt.x_min, gt.y_min, gt.x_max, gt.y_max)
            v = oracle_iou((box.x_min, box.y_min, box.x_max, box.y_max), g)
            if v > best_iou:
                best_iou = v
                best = gi
        if best is not None and best_iou >= thresh:
            matched[(si, best)] = True
            flags.append(True)
        else:
            flags.append(False)

    n_gt = sum(len(ds.ground_truth) for ds in sets)
    points = []  # (recall, precision) after each prediction
    tp = fp = 0
    for hit in flags:
        tp, fp = (tp + 1, fp) if hit else (tp, fp + 1)
        points.append((tp / n_gt, tp / (tp + fp)))
    total_tp = tp
    ap = 0.0
    for t in range(1, total_tp + 1):
        level = t / n_gt
        ap += max(p for r, p in points if r >= level - 1e-15) / n_gt
    return ap


def random_detection_sets(rng, max_images=5, max_boxes=4):
    """Small random scenes with valid boxes and confidences."""
    sets = []
    for i in range(int(rng.integers(1, max_images + 1))):
        gts = []
        for _ in range(int(rng.integers(0, max_boxes + 1))):
            x0, y0 = rng.uniform(0, 8, 2)
            w, h = rng.uniform(0.5, 4, 2)
            gts.append(Box(x0, y0, x0 + w, y0 + h))
        preds = []
        for _ in range(int(rng.integers(0, max_boxes + 1))):
            if gts and rng.random() < 0.6:
                base = gts[int(rng.integers(0, len(gts)))]
                dx, dy = rng.uniform(-1.0, 1.0, 2)
                box = Box(base.x_min + dx, base.y_min + dy,
                          base.x_max + dx + rng.uniform(-0.3, 0.3),
                          base.y_max + dy + rng.uniform(-0.3, 0.3))
            else:
                x0, y0 = rng.uniform(0, 8, 2)
                w, h = rng.uniform(0.5, 4, 2)
                box = Box(x0, y0, x0 + w, y0 + h)
            preds.append((box, float(rng.uniform(0, 1))))
        sets.append(DetectionSet(f"img{i}", gts, preds))
    if sum(len(s.ground_truth) for s in sets) == 0:
        sets[0].ground_truth.append(Box(0, 0, 1, 1))
    return sets
