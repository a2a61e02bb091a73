"""The spectrum Gamma = {sum a_i 4^i : a_i in {0, 1}} and its scalings.

Element ``n`` of ``s * Gamma`` is obtained by spreading the binary digits of
``n`` into base 4, so enumeration order and sorting coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .transform import QUARTER, mu_hat_values

MAX_DIGITS = 31
_INT64_MAX = 2**63 - 1


def gamma_element(n: int, scale: int = 1) -> int:
    """``scale * sum_i bit_i(n) 4^i``.

    >>> [gamma_element(n) for n in range(6)]
    [0, 1, 4, 5, 16, 17]
    """
    if n < 0 or scale < 1:
        raise ValueError("need n >= 0 and scale >= 1")
    if n >= 2**MAX_DIGITS:
        raise OverflowError(f"index {n} needs more than {MAX_DIGITS} base-4 digits")
    g = 0
    i = 0
    while n:
        if n & 1:
            g += 4**i
        n >>= 1
        i += 1
    g *= scale
    if g > _INT64_MAX:
        raise OverflowError(f"element {g} does not fit in 64 bits")
    return g


@dataclass(frozen=True, eq=False)
class GammaSet:
    """The ``2**digit_count`` smallest elements of ``scale * Gamma``.

    Equality and hashing go through ``(digit_count, scale)``, which determine
    the elements completely.
    """

    digit_count: int
    scale: int = 1
    elements: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m, s = self.digit_count, self.scale
        if not 0 <= m <= MAX_DIGITS:
            raise OverflowError(f"digit count must be in [0, {MAX_DIGITS}], got {m}")
        if s < 1:
            raise ValueError("scale must be a positive integer")
        if s * (4**m - 1) // 3 > _INT64_MAX:
            raise OverflowError("largest element does not fit in 64 bits")
        n = np.arange(2**m, dtype=np.int64)
        g = np.zeros_like(n)
        for i in range(m):
            g += ((n >> i) & 1) * np.int64(4**i)
        g *= s
        g.setflags(write=False)
        object.__setattr__(self, "elements", g)
        object.__setattr__(self, "_pos", None)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other):
        if not isinstance(other, GammaSet):
            return NotImplemented
        return (self.digit_count, self.scale) == (other.digit_count, other.scale)

    def __hash__(self):
        return hash((GammaSet, self.digit_count, self.scale))

    def position(self, gamma: int) -> int | None:
        """Index of ``gamma`` in the enumeration, or None if absent."""
        if self._pos is None:
            object.__setattr__(self, "_pos", {int(g): i for i, g in enumerate(self.elements)})
        return self._pos.get(int(gamma))

    def __contains__(self, gamma) -> bool:
        return self.position(gamma) is not None

    def digits(self, i: int) -> list[int]:
        """Base-4 digits (least significant first) of ``elements[i] / scale``."""
        return [(i >> k) & 1 for k in range(self.digit_count)]


def gamma_set(m: int, scale: int = 1) -> GammaSet:
    return GammaSet(m, scale)


@dataclass
class CoeffVector:
    """Coordinates of an element of L^2(mu) in the ONB indexed by a GammaSet."""

    index_set: GammaSet
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (len(self.index_set),):
            raise ValueError("coefficient count does not match the index set")

    @property
    def norm2(self) -> float:
        return float(np.sum(self.coeffs.real**2 + self.coeffs.imag**2))

    def inner(self, other: "CoeffVector") -> complex:
        """<self, other>, linear in the first slot."""
        if other.index_set != self.index_set:
            raise ValueError("index sets differ")
        return complex(np.vdot(other.coeffs, self.coeffs))

    def coeff(self, gamma: int) -> complex:
        i = self.index_set.position(gamma)
        return 0j if i is None else complex(self.coeffs[i])

    @classmethod
    def basis(cls, S: GammaSet, gamma: int) -> "CoeffVector":
        return cls.from_terms(S, {gamma: 1.0})

    @classmethod
    def from_terms(cls, S: GammaSet, terms: dict, normalize: bool = False) -> "CoeffVector":
        c = np.zeros(len(S), dtype=complex)
        for g, a in terms.items():
            i = S.position(g)
            if i is None:
                raise ValueError(f"{g} is not in the index set")
            c[i] += a
        v = cls(S, c)
        if normalize:
            v.coeffs /= np.sqrt(v.norm2)
        return v


def expand(t: float, S: GammaSet, tol: float = 1e-12) -> CoeffVector:
    """Coefficients <e_t, e_gamma> = mu_hat(t - gamma) over a truncation."""
    return CoeffVector(S, mu_hat_values(t - S.elements.astype(float), QUARTER, tol))


def gram_matrix(freqs, tol: float = 1e-12) -> np.ndarray:
    f = np.asarray(freqs, dtype=float)
    if np.unique(f).size != f.size:
        raise ValueError("frequencies must be distinct")
    return mu_hat_values(f[:, None] - f[None, :], QUARTER, tol)


def parseval_defect(t: float, S: GammaSet, tol: float = 1e-12) -> float:
    """1 - sum_{gamma in S} |mu_hat(t - gamma)|^2."""
    c = mu_hat_values(t - S.elements.astype(float), QUARTER, tol)
    return 1.0 - float(np.sum(c * c))
