"""Fourier transform of the Bernoulli convolution measure.

The transform is evaluated in the ``e_t(x) = exp(2 pi i t x)`` convention,

    mu_hat(t) = prod_{k >= 1} cos(2 pi lambda^k t),

truncated after ``K`` factors with a certified bound on the omitted tail.
Factors are reduced modulo one before the cosine is taken, so cosine zeros at
odd multiples of pi/2 come out as exact floating zeros whenever
``4 * lambda^k * t`` is an odd integer (always the case for lambda = 1/4 and
integer differences of spectrum elements).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUARTER = 0.25


@dataclass(frozen=True)
class TransformValue:
    t: float
    value: float
    depth: int
    tail_bound: float


def _check(lam: float, tol: float) -> None:
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not 0 < lam < 1:
        raise ValueError(f"scale ratio must lie in (0, 1), got {lam!r}")


def tail_bound(t: float, lam: float, depth: int) -> float:
    """Bound on |mu_hat(t) - prod_{k<=depth} cos(2 pi lam^k t)|.

    Valid once every omitted argument is below 1/2, which `truncation_depth`
    enforces; uses 1 - prod(1 - a_k) <= sum a_k with a_k <= x_k^2 / 2.
    """
    x = 2 * np.pi * abs(t) * lam ** (depth + 1.0)
    return x * x / (2 * (1 - lam * lam))


def truncation_depth(t: float, lam: float = QUARTER, tol: float = 1e-12) -> int:
    """Smallest K >= 1 whose certified tail bound is at most ``tol``."""
    _check(lam, tol)
    return int(_depths(np.abs(np.atleast_1d(float(t))), lam, tol)[0])


def cos2pi(u):
    """cos(2 pi u) with exact zeros (and exact +-1) at quarter periods."""
    u = np.asarray(u, dtype=float)
    r = u - np.floor(u)
    out = np.cos(2 * np.pi * r)
    q = 4 * r
    out = np.where((q == 1) | (q == 3), 0.0, out)
    out = np.where(r == 0.5, -1.0, out)
    return np.where(r == 0, 1.0, out)


def mu_hat_values(t, lam: float = QUARTER, tol: float = 1e-12) -> np.ndarray:
    """Vectorised transform; every entry is bit-identical to `mu_hat`.

    Each frequency keeps its own depth: factors beyond it are padded with 1.0,
    which leaves the k = K..1 multiplication order unchanged.
    """
    _check(lam, tol)
    t = np.abs(np.asarray(t, dtype=float))
    if t.size == 0:
        return np.ones_like(t)
    depths = _depths(t, lam, tol)
    out = np.ones_like(t)
    for k in range(int(depths.max()), 0, -1):
        active = depths >= k
        f = cos2pi(t * lam**k)
        out *= np.where(active, f, 1.0)
    # a single exact zero factor makes the whole infinite product zero
    return out + 0.0


def _criterion(t, lam, tol, k):
    a = 2 * np.pi * t
    x = a * lam ** (k + 1.0)
    return (a == 0) | ((x / (1 - lam) <= 0.5) & (x * x / (2 * (1 - lam * lam)) <= tol))


def _depths(t: np.ndarray, lam: float, tol: float) -> np.ndarray:
    # closed-form guess, then walk to the exact minimal K (criterion is monotone)
    a = 2 * np.pi * t
    with np.errstate(divide="ignore", over="ignore"):
        need_tail = np.log(np.sqrt(2 * (1 - lam * lam) * tol) / a) / np.log(lam) - 1
        need_arg = np.log(0.5 * (1 - lam) / a) / np.log(lam) - 1
    k = np.ceil(np.maximum(need_tail, need_arg))
    k = np.where(a == 0, 1, np.maximum(k, 1)).astype(np.int64)
    while True:
        down = (k > 1) & _criterion(t, lam, tol, k - 1)
        if not down.any():
            break
        k = k - down
    while True:
        up = ~_criterion(t, lam, tol, k)
        if not up.any():
            return k
        k = k + up


def mu_hat(t: float, lam: float = QUARTER, tol: float = 1e-12) -> TransformValue:
    """Truncated product value of the transform at ``t``.

    >>> mu_hat(0.0).value
    1.0
    >>> mu_hat(1.0).value
    0.0
    """
    _check(lam, tol)
    t = float(t)
    k = truncation_depth(t, lam, tol)
    at = abs(t)
    value = 1.0
    for j in range(k, 0, -1):
        f = float(cos2pi(at * lam**j))
        if f == 0.0:
            return TransformValue(t, 0.0, k, 0.0)
        value *= f
    return TransformValue(t, value, k, tail_bound(t, lam, k))


def functional_eq_residual(t: float, tol: float = 1e-12) -> float:
    """|mu_hat(4t) - cos(2 pi t) mu_hat(t)| for the 1/4 measure."""
    a = mu_hat(4 * t, QUARTER, tol).value
    b = float(cos2pi(t)) * mu_hat(t, QUARTER, tol).value
    return abs(a - b)
