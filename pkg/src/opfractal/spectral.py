"""Scalar spectral measures of U through trigonometric moments.

For a vector ``v`` the measure ``m_v`` on the circle is only ever touched via
its moments ``c_k = <U^k v, v>``, computed by repeated application of the
compressed operator ``T = P U P`` (and ``T*`` for negative ``k``).  Every
application loses the mass mapped outside the truncation; these losses are
summed into a leakage budget which is reported next to every result.

Forward leakage (applications of ``T``) gates the computation: beyond
``max_leakage`` a `TruncationError` is raised.  Adjoint leakage is recorded
but not gated, since ``<T*^k v, v>`` is the conjugate of ``<T^k v, v>``
whatever ``P`` does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh, toeplitz

from .basis import CoeffVector, GammaSet, gamma_set
from .operators import TruncationError, build_U
from .transform import QUARTER, mu_hat_values

HERMITIAN_TOL = 1e-10
DEFAULT_MAX_LEAKAGE = 0.1
DENSITY_FLOOR = 1e-4


@dataclass
class LaurentPoly:
    """phi(z) = sum_k coeffs[k] z^k over a finite set of integer degrees."""

    coeffs: dict[int, complex]

    def __post_init__(self):
        self.coeffs = {int(k): complex(c) for k, c in self.coeffs.items() if c != 0}

    @property
    def degree(self) -> int:
        return max((abs(k) for k in self.coeffs), default=0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, c in self.coeffs.items():
            out = out + c * z**k
        return out

    @classmethod
    def parse(cls, text: str) -> "LaurentPoly":
        """Parse ``"1:2,-1:1"`` style ``degree:coefficient`` lists."""
        terms: dict[int, complex] = {}
        for part in text.split(","):
            k, _, c = part.partition(":")
            terms[int(k)] = terms.get(int(k), 0) + complex(c or "1")
        return cls(terms)


@dataclass
class MomentSequence:
    center: CoeffVector
    K: int
    c: np.ndarray  # c[k + K] = <U^k v, v>, k = -K..K
    leakage_budget: float
    adjoint_leakage: float = 0.0
    cumulative_leakage: np.ndarray = field(default=None, repr=False)

    def moment(self, k: int) -> complex:
        if abs(k) > self.K:
            raise IndexError(f"moment {k} outside [-{self.K}, {self.K}]")
        return complex(self.c[k + self.K])

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)


@dataclass
class MeasureEstimate:
    grid: np.ndarray
    density: np.ndarray
    atom_at_1: float


def _operator(S: GammaSet, tol: float) -> np.ndarray:
    return build_U(S, tol).entries


def _embed(v: CoeffVector, S: GammaSet | None) -> CoeffVector:
    if S is None or S == v.index_set:
        return v
    small, big = v.index_set, S
    if small.scale != big.scale or small.digit_count > big.digit_count:
        raise ValueError("vector is not supported in the requested truncation")
    # gamma_set(m) is a prefix of gamma_set(m') for m <= m'
    c = np.zeros(len(big), dtype=complex)
    c[: len(small)] = v.coeffs
    return CoeffVector(big, c)


def _check_unit(v: CoeffVector) -> None:
    if abs(v.norm2 - 1) > 1e-9:
        raise ValueError(f"expected a unit vector, got norm^2 = {v.norm2!r}")


def _iterate(A, x, steps, limit, start=0.0):
    """Yield (T^k x, cumulative leakage) for k = 1..steps."""
    leak = start
    n2 = float(np.vdot(x, x).real)
    for k in range(1, steps + 1):
        y = A @ x
        m2 = float(np.vdot(y, y).real)
        leak += n2 - m2
        if limit is not None and leak > limit:
            raise TruncationError(leak, limit, k)
        yield y, leak
        x, n2 = y, m2


def _moment_sequence(v, K, tol, max_leakage):
    A = _operator(v.index_set, tol)
    x = v.coeffs
    c = np.empty(2 * K + 1, dtype=complex)
    c[K] = np.vdot(x, x)
    cum = np.zeros(K + 1)
    leak = 0.0
    for k, (y, leak) in enumerate(_iterate(A, x, K, max_leakage), start=1):
        c[K + k] = np.vdot(x, y)
        cum[k] = leak
    adj = 0.0
    for k, (y, adj) in enumerate(_iterate(A.conj().T, x, K, None), start=1):
        c[K - k] = np.vdot(x, y)
    ms = MomentSequence(v, K, c, leak, adj, cum)
    herm = np.max(np.abs(c[::-1] - c.conj()), initial=0.0)
    if herm > HERMITIAN_TOL:
        raise ArithmeticError(f"moments fail Hermitian symmetry by {herm:.3g}")
    return ms


def moments(
    v: CoeffVector,
    K: int,
    S: GammaSet | None = None,
    tol: float = 1e-12,
    max_leakage: float | None = DEFAULT_MAX_LEAKAGE,
) -> MomentSequence:
    """Moments c_k = <U^k v, v> for |k| <= K on the truncation ``S``.

    Negative orders are computed with the adjoint and then checked against
    the conjugates of the positive ones.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    v = _embed(v, S)
    _check_unit(v)
    return _moment_sequence(v, int(K), tol, max_leakage)


def atom_at_one(ms: MomentSequence) -> float:
    """Cesaro mean (2K+1)^-1 sum_k c_k, which tends to m_v({1})."""
    return float(np.sum(ms.c).real / (2 * ms.K + 1))


def herglotz_defect(ms: MomentSequence) -> float:
    """Smallest eigenvalue of the Toeplitz matrix [c_{i-j}], 0 <= i, j <= K."""
    c, K = ms.c, ms.K
    herm = np.max(np.abs(c[::-1] - c.conj()), initial=0.0)
    if herm > HERMITIAN_TOL:
        raise ValueError(f"moment sequence is not Hermitian (defect {herm:.3g})")
    T = toeplitz(c[K:], c[K::-1])
    return float(eigvalsh(T)[0])


def fejer_density(ms: MomentSequence, M: int | None = None) -> MeasureEstimate:
    """Fejer-smoothed density of m_v w.r.t. normalised arc length d(theta)/2pi.

    Order equals the moment order K; default grid has 8K points.
    """
    K = ms.K
    M = 8 * max(K, 1) if M is None else int(M)
    theta = 2 * np.pi * np.arange(M) / M
    k = ms.orders
    w = 1 - np.abs(k) / (K + 1)
    dens = (np.exp(-1j * np.outer(theta, k)) @ (w * ms.c)).real
    return MeasureEstimate(theta, dens, atom_at_one(ms))


def apply_phi(phi: LaurentPoly, v: CoeffVector, tol: float = 1e-12):
    """phi(T) v on the truncation of ``v``; returns (vector, total leakage)."""
    A = _operator(v.index_set, tol)
    out = np.zeros(len(v.index_set), dtype=complex)
    leak = 0.0
    out += phi.coeffs.get(0, 0) * v.coeffs
    for sign, B in ((1, A), (-1, A.conj().T)):
        top = max((sign * k for k in phi.coeffs if sign * k > 0), default=0)
        last = 0.0
        for k, (y, last) in enumerate(_iterate(B, v.coeffs, top, None), start=1):
            out += phi.coeffs.get(sign * k, 0) * y
        leak += last
    return CoeffVector(v.index_set, out), leak


def _weight(phi: LaurentPoly) -> float:
    # both sides are quadratic in phi, so leakage enters with (sum |phi_a|)^2
    return max(1.0, sum(abs(c) for c in phi.coeffs.values()) ** 2)


@dataclass(frozen=True)
class IdentityResidual:
    residual: float
    leakage_budget: float


def isometry_residual(
    v: CoeffVector,
    phi: LaurentPoly,
    S: GammaSet | None = None,
    tol: float = 1e-12,
    max_leakage: float | None = DEFAULT_MAX_LEAKAGE,
) -> IdentityResidual:
    """| ||phi(U) v||^2 - sum_{a,b} conj(phi_a) phi_b c_{b-a}(v) |."""
    v = _embed(v, S)
    _check_unit(v)
    w, leak_w = apply_phi(phi, v, tol)
    ms = _moment_sequence(v, 2 * phi.degree, tol, max_leakage)
    rhs = sum(
        np.conj(pa) * pb * ms.moment(b - a)
        for a, pa in phi.coeffs.items()
        for b, pb in phi.coeffs.items()
    )
    budget = _weight(phi) * (leak_w + ms.leakage_budget + ms.adjoint_leakage)
    return IdentityResidual(abs(w.norm2 - complex(rhs)), budget)


def _power_moment(w: CoeffVector, k: int, tol: float):
    A = _operator(w.index_set, tol)
    B = A if k >= 0 else A.conj().T
    y, leak = w.coeffs, 0.0
    for y, leak in _iterate(B, w.coeffs, abs(k), None):
        pass
    return complex(np.vdot(w.coeffs, y)), leak


def pushforward_identity_residual(
    v: CoeffVector,
    phi: LaurentPoly,
    k: int,
    S: GammaSet | None = None,
    tol: float = 1e-12,
    max_leakage: float | None = DEFAULT_MAX_LEAKAGE,
) -> IdentityResidual:
    """| c_k(phi(U) v) - sum_{a,b} conj(phi_a) phi_b c_{k+b-a}(v) |."""
    v = _embed(v, S)
    _check_unit(v)
    w, leak_w = apply_phi(phi, v, tol)
    lhs, leak_k = _power_moment(w, k, tol)
    ms = _moment_sequence(v, abs(k) + 2 * phi.degree, tol, max_leakage)
    rhs = sum(
        np.conj(pa) * pb * ms.moment(k + b - a)
        for a, pa in phi.coeffs.items()
        for b, pb in phi.coeffs.items()
    )
    budget = _weight(phi) * (leak_w + leak_k + ms.leakage_budget + ms.adjoint_leakage)
    return IdentityResidual(abs(lhs - complex(rhs)), budget)


@dataclass
class RNProfile:
    theta: np.ndarray
    estimate: np.ndarray
    phi_abs: np.ndarray
    diagnostic: str = ""


def rn_sqrt_profile(
    v: CoeffVector,
    phi: LaurentPoly,
    K: int,
    S: GammaSet | None = None,
    gridM: int | None = None,
    floor: float = DENSITY_FLOOR,
    tol: float = 1e-12,
    max_leakage: float | None = DEFAULT_MAX_LEAKAGE,
) -> RNProfile:
    """sqrt(p_w / p_v) on the grid, with w = phi(U) v and p the Fejer densities.

    Only grid points where p_v exceeds ``floor`` are kept.  Diagnostic only:
    smoothing bias is not controlled.
    """
    v = _embed(v, S)
    _check_unit(v)
    w, _ = apply_phi(phi, v, tol)
    dv = fejer_density(_moment_sequence(v, K, tol, max_leakage), gridM)
    dw = fejer_density(_moment_sequence(w, K, tol, max_leakage), gridM)
    keep = dv.density > floor
    theta = dv.grid[keep]
    phi_abs = np.abs(phi(np.exp(1j * theta)))
    if not keep.any():
        return RNProfile(theta, theta.copy(), phi_abs, "density of m_v never exceeds the floor")
    ratio = np.maximum(dw.density[keep] / dv.density[keep], 0.0)
    return RNProfile(theta, np.sqrt(ratio), phi_abs)


@dataclass(frozen=True)
class CesaroResult:
    projection_coeff: complex
    residual_norm: float
    leakage_budget: float
    N: int


def cesaro_average(
    f: CoeffVector,
    N: int,
    S: GammaSet | None = None,
    tol: float = 1e-12,
    max_leakage: float | None = DEFAULT_MAX_LEAKAGE,
) -> CesaroResult:
    """A_N f = (N+1)^-1 sum_{k<=N} U^k f, compared with <f, e_0> e_0."""
    f = _embed(f, S)
    _check_unit(f)
    A = _operator(f.index_set, tol)
    acc = f.coeffs.copy()
    leak = 0.0
    for y, leak in _iterate(A, f.coeffs, int(N), max_leakage):
        acc += y
    avg = acc / (N + 1)
    p = f.coeff(0)
    avg[0] -= p  # e_0 is the first element of every truncation
    return CesaroResult(p, float(np.linalg.norm(avg)), leak, int(N))


def eigenvector_floor(
    m_cols: int = 6, m_rows: int = 10, n_phases: int = 64, tol: float = 1e-12
) -> tuple[float, complex]:
    """Lower bound for min ||U v - lam v|| over unit v in span{e_g : 0 != g, g < 4^m_cols}.

    The rows are cut to ``gamma_set(m_rows)``; dropping coordinates can only
    shrink the norm, so the smallest singular value over the phase grid is a
    lower bound for the untruncated minimum.
    """
    rows = gamma_set(m_rows).elements.astype(float)
    cols = gamma_set(m_cols).elements[1:].astype(float)
    A = mu_hat_values(5 * cols[None, :] - rows[:, None], QUARTER, tol).astype(complex)
    E = np.zeros_like(A)
    E[np.arange(1, len(cols) + 1), np.arange(len(cols))] = 1.0
    best, arg = np.inf, 1 + 0j
    for j in range(n_phases):
        lam = np.exp(2j * np.pi * j / n_phases)
        s = np.linalg.svd(A - lam * E, compute_uv=False)[-1]
        if s < best:
            best, arg = float(s), complex(lam)
    return best, arg


def named_vector(name: str, S: GammaSet, seed: int = 0, support_m: int | None = None) -> CoeffVector:
    """Build a unit vector from ``e0``, ``e1+e5``, ``random`` style names."""
    name = name.replace(" ", "")
    if name == "random":
        rng = np.random.default_rng(seed)
        n = len(gamma_set(S.digit_count if support_m is None else support_m))
        c = np.zeros(len(S), dtype=complex)
        c[:n] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c /= np.linalg.norm(c)
        return CoeffVector(S, c)
    terms: dict[int, complex] = {}
    for part in name.split("+"):
        if not part.startswith("e"):
            raise ValueError(f"cannot parse vector term {part!r}")
        g = int(part[1:])
        terms[g] = terms.get(g, 0) + 1
    return CoeffVector.from_terms(S, terms, normalize=True)
