"""Finite truncations of the scaling unitary U (e_g -> e_5g) and the Cuntz pair.

All matrices are Galerkin compressions onto span{e_g : g in S}: column ``g``
holds the coordinates of the image of ``e_g`` that fall inside ``S``.  Mass
mapped outside ``S`` is reported as leakage and never renormalised.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import CoeffVector, GammaSet, gamma_set, parseval_defect
from .transform import QUARTER, mu_hat, mu_hat_values

KINDS = ("U5", "U5_adjoint", "S0", "S1", "S0_adjoint", "S1_adjoint", "product")
_ADJOINT = {"U5": "U5_adjoint", "S0": "S0_adjoint", "S1": "S1_adjoint"}
_ADJOINT.update({v: k for k, v in _ADJOINT.items()})
_ADJOINT["product"] = "product"


class TruncationError(RuntimeError):
    """Raised when accumulated leakage exceeds the allowed budget."""

    def __init__(self, budget: float, limit: float, steps: int):
        super().__init__(
            f"truncation too small: leakage {budget:.3g} exceeds {limit:.3g} after {steps} steps"
        )
        self.budget = budget
        self.limit = limit
        self.steps = steps


@dataclass
class TruncatedOperator:
    index_set: GammaSet
    entries: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        n = len(self.index_set)
        if self.entries.shape != (n, n):
            raise ValueError("entries must be square over the index set")

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.index_set, self.entries.conj().T, _ADJOINT[self.kind])

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        if other.index_set != self.index_set:
            raise ValueError("index sets differ")
        return TruncatedOperator(self.index_set, self.entries @ other.entries, "product")

    def column_norms2(self) -> np.ndarray:
        e = self.entries
        return np.sum(e.real**2 + e.imag**2, axis=0)


@dataclass(frozen=True)
class LeakageReport:
    input_norm2: float
    output_norm2: float

    @property
    def leakage(self) -> float:
        return self.input_norm2 - self.output_norm2


@functools.lru_cache(maxsize=8)
def _u_entries(S: GammaSet, tol: float, threads: int) -> np.ndarray:
    g = S.elements.astype(float)
    n = len(g)
    out = np.empty((n, n), dtype=complex)

    def fill(cols):
        # entries[xi, gamma] = mu_hat(5 gamma - xi)
        out[:, cols] = mu_hat_values(5 * g[cols][None, :] - g[:, None], QUARTER, tol)

    step = max(1, min(n, 2**20 // max(n, 1)))
    chunks = [slice(i, min(i + step, n)) for i in range(0, n, step)]
    if threads == 1 or len(chunks) == 1:
        for c in chunks:
            fill(c)
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            list(pool.map(fill, chunks))
    out.setflags(write=False)
    return out


def build_U(S: GammaSet, tol: float = 1e-12, threads: int = 1) -> TruncatedOperator:
    """Compression of U onto ``S``; entries[xi, gamma] = mu_hat(5 gamma - xi)."""
    if S.scale != 1:
        raise ValueError("U is indexed by Gamma itself (scale 1)")
    return TruncatedOperator(S, _u_entries(S, float(tol), int(threads)), "U5")


def build_S(S: GammaSet, which: int) -> TruncatedOperator:
    """Cuntz isometry e_g -> e_{4g + which}, cut to ``S``."""
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    n = len(S)
    e = np.zeros((n, n), dtype=complex)
    for j, g in enumerate(S.elements):
        i = S.position(4 * int(g) + which)
        if i is not None:
            e[i, j] = 1.0
    return TruncatedOperator(S, e, f"S{which}")


def closed_columns(S: GammaSet, which: int) -> np.ndarray:
    """Indices of ``g`` in ``S`` with ``4g + which`` still in ``S``."""
    return np.array(
        [j for j, g in enumerate(S.elements) if (4 * int(g) + which) in S], dtype=np.int64
    )


def apply(op: TruncatedOperator, v: CoeffVector) -> tuple[CoeffVector, LeakageReport]:
    if v.index_set != op.index_set:
        raise ValueError("vector and operator are indexed by different sets")
    w = CoeffVector(op.index_set, op.entries @ v.coeffs)
    return w, LeakageReport(v.norm2, w.norm2)


@dataclass(frozen=True)
class RegressionRecord:
    coeff_e5_of_U3e1: float
    coeff_e5_of_e125: float
    terms: int


def iterate_regression(m: int = 9, tol: float = 1e-12) -> RegressionRecord:
    """Coefficient of e_5 in U^3 e_1 versus in e_125, over 2**m terms of Gamma.

    U^2 e_1 = e_25 exactly; expanding e_25 and applying U gives
    sum_g mu_hat(25 - g) mu_hat(5g - 5) at xi = 5, against mu_hat(120).
    """
    g = gamma_set(m).elements.astype(float)
    a = mu_hat_values(25 - g, QUARTER, tol)
    b = mu_hat_values(5 * g - 5, QUARTER, tol)
    return RegressionRecord(
        coeff_e5_of_U3e1=float(np.sum(a * b)),
        coeff_e5_of_e125=mu_hat(120.0, QUARTER, tol).value,
        terms=len(g),
    )


@functools.lru_cache(maxsize=64)
def _converged_column(gamma: int, tol: float, max_defect: float):
    m = max(9, gamma.bit_length() // 2 + 4)
    S = gamma_set(m)
    while parseval_defect(5 * gamma, S, tol) > max_defect and m < 24:
        m += 1
        S = gamma_set(m)
    col = mu_hat_values(5 * gamma - S.elements.astype(float), QUARTER, tol)
    col.setflags(write=False)
    return S, col


def eigen_residual(
    gamma: int,
    phase: complex,
    S: GammaSet | None = None,
    tol: float = 1e-12,
    max_defect: float = 1e-9,
) -> float:
    """||U e_gamma - phase * e_gamma||^2 from the truncated expansion of e_{5 gamma}.

    Without an explicit ``S`` the truncation grows until the Parseval defect of
    ``5 gamma`` drops below ``max_defect``.
    """
    gamma = int(gamma)
    if gamma == 0:
        raise ValueError("gamma = 0 is the fixed point U e_0 = e_0")
    if S is None:
        S, col = _converged_column(gamma, float(tol), float(max_defect))
    else:
        col = mu_hat_values(5 * gamma - S.elements.astype(float), QUARTER, tol)
    i = S.position(gamma)
    if i is None:
        raise ValueError(f"{gamma} is not an element of the truncation")
    col = col.astype(complex)
    col[i] -= phase
    return float(np.sum(col.real**2 + col.imag**2))


@dataclass(frozen=True)
class CommutatorReport:
    us0_minus_s0u: float
    us1_minus_s1u: float
    closed_size_s0: int
    closed_size_s1: int


def commutator_norms(S: GammaSet, tol: float = 1e-12) -> CommutatorReport:
    """Frobenius norms of U S_i - S_i U on columns where S_i stays inside S."""
    U = build_U(S, tol).entries
    norms, sizes = [], []
    for which in (0, 1):
        Si = build_S(S, which).entries
        cols = closed_columns(S, which)
        c = (U @ Si - Si @ U)[:, cols]
        norms.append(float(np.linalg.norm(c)))
        sizes.append(len(cols))
    return CommutatorReport(norms[0], norms[1], sizes[0], sizes[1])


@dataclass(frozen=True)
class SpatialReport:
    const_coeff_e10: float
    const_coeff_Ue2: float
    collapsed_const_coeff_Ue2: float
    terms: int

    @property
    def gap(self) -> float:
        return abs(self.const_coeff_e10 - self.const_coeff_Ue2)


def spatial_obstruction(S: GammaSet | None = None, tol: float = 1e-12) -> SpatialReport:
    """Constant terms of U(e_1)U(e_1) = e_10 and of U(e_1 e_1) = U e_2.

    ``const_coeff_Ue2`` is <U e_2, e_0> from the compressed matrix, i.e.
    sum_g mu_hat(2 - g) mu_hat(5 g).  ``collapsed_const_coeff_Ue2`` is the
    expression mu_hat(5) * sum_g mu_hat(2 - g) that drops the factor g inside
    mu_hat(5 g - xi); it vanishes identically.
    """
    S = gamma_set(9) if S is None else S
    g = S.elements.astype(float)
    e2 = mu_hat_values(2 - g, QUARTER, tol)
    row0 = mu_hat_values(5 * g, QUARTER, tol)
    return SpatialReport(
        const_coeff_e10=mu_hat(10.0, QUARTER, tol).value,
        const_coeff_Ue2=float(np.sum(row0 * e2)),
        collapsed_const_coeff_Ue2=mu_hat(5.0, QUARTER, tol).value * float(np.sum(e2)) + 0.0,
        terms=len(g),
    )
