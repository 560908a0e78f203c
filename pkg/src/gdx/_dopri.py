"""Dormand-Prince 5(4) embedded explicit Runge-Kutta stepper.

Kept as a bare stepper (no driver loop) so the replicator integrator can
renormalize the state between steps and re-step from a saved state while
bisecting for events.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ORDER = 5


def step(
    f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float, k0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One autonomous DP5(4) step of size ``h``.

    Returns the 5th-order solution, the error estimate and ``f`` at the new
    point (first-same-as-last, reusable as the next step's ``k0``).
    """
    k = np.empty((7, y.size))
    k[0] = f(y) if k0 is None else k0
    for i in range(1, 7):
        k[i] = f(y + h * (np.asarray(A[i]) @ k[:i]))
    y_new = y + h * (B5 @ k)
    err = h * (E @ k)
    return y_new, err, k[6]


def error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray, atol: float, rtol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def next_step_size(h: float, err: float) -> float:
    if err == 0.0:
        return h * MAX_FACTOR
    factor = SAFETY * err ** (-1.0 / ORDER)
    return h * min(MAX_FACTOR, max(MIN_FACTOR, factor))


def initial_step(f, y: np.ndarray, f0: np.ndarray, atol: float, rtol: float) -> float:
    # Hairer-Norsett-Wanner starting step heuristic
    scale = atol + np.abs(y) * rtol
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(y + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)
