"""Fixed-step integration of orthonormal moving frames.

State is a frame ``W`` (4x4, rows are the frame vectors) and a point ``g``
with ``W' = A(t) W`` and ``g' = c(t) @ W``.  ``A`` is skew-symmetric so the
exact flow is orthogonal; after every step the frame is projected back onto
O(4) by the polar factor.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

CoefFn = Callable[[np.ndarray], np.ndarray]


def polar_project(W: np.ndarray, tol: float = 1e-15, max_iter: int = 30) -> np.ndarray:
    """Nearest orthogonal matrix, by iterating ``Q <- (Q + Q^-T) / 2``."""
    Q = np.array(W, dtype=float)
    for _ in range(max_iter):
        Qn = 0.5 * (Q + np.linalg.inv(Q).T)
        if np.max(np.abs(Qn - Q)) <= tol:
            return Qn
        Q = Qn
    return Q


def orthonormality_defect(W: np.ndarray) -> float:
    return float(np.max(np.abs(W @ W.T - np.eye(W.shape[0]))))


def integrate(
    coef: CoefFn,
    vel: CoefFn,
    nodes,
    W0,
    g0,
    step: float = 1e-3,
    project: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 from ``nodes[0]`` through every node.

    ``coef(ts)`` returns the stacked matrices A(ts) with shape (len(ts), 4, 4),
    ``vel(ts)`` the stacked velocity coefficients with shape (len(ts), 4).
    Each node interval is split into equal substeps no longer than ``step``.
    Nodes may be decreasing (backward integration).
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size == 0:
        raise ValueError("need at least one node")
    diffs = np.diff(nodes)
    if nodes.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("nodes must be strictly monotone")
    if step <= 0 or not math.isfinite(step):
        raise ValueError("step must be positive")

    # substep layout for the whole run, so coefficients are evaluated in one batch
    counts = [max(1, math.ceil(abs(d) / step - 1e-9)) for d in diffs]
    t_start, hs = [], []
    for a, d, m in zip(nodes[:-1], diffs, counts):
        h = d / m
        t_start.extend(a + h * np.arange(m))
        hs.extend([h] * m)
    t_start = np.asarray(t_start)
    hs = np.asarray(hs)
    if hs.size:
        # where a step is smaller than 1e-300 no progress is possible
        if np.any(np.abs(hs) < 1e-300):
            raise FloatingPointError("step-size underflow")
        samples = np.concatenate([t_start, t_start + hs / 2, t_start + hs])
        A_all = np.asarray(coef(samples), dtype=float)
        c_all = np.asarray(vel(samples), dtype=float)
        k = hs.size
        A0, Am, A1 = A_all[:k], A_all[k : 2 * k], A_all[2 * k :]
        c0, cm, c1 = c_all[:k], c_all[k : 2 * k], c_all[2 * k :]

    W = np.array(W0, dtype=float)
    g = np.array(g0, dtype=float)
    Ws = [W.copy()]
    gs = [g.copy()]
    idx = 0
    for m in counts:
        for _ in range(m):
            h = hs[idx]
            a0, am, a1 = A0[idx], Am[idx], A1[idx]
            k1 = a0 @ W
            k2 = am @ (W + 0.5 * h * k1)
            k3 = am @ (W + 0.5 * h * k2)
            k4 = a1 @ (W + h * k3)
            l1 = c0[idx] @ W
            l2 = cm[idx] @ (W + 0.5 * h * k1)
            l3 = cm[idx] @ (W + 0.5 * h * k2)
            l4 = c1[idx] @ (W + h * k3)
            W = W + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            g = g + (h / 6.0) * (l1 + 2 * l2 + 2 * l3 + l4)
            if project:
                W = polar_project(W)
            idx += 1
        Ws.append(W.copy())
        gs.append(g.copy())
    return np.array(Ws), np.array(gs)
