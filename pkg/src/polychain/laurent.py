"""DFT/Laurent analysis of boundary data on a circle and meromorphic extension.

Coefficients are kept in the normalized variable w = (z - c)/r, so that
f(c + r e^{i theta}) ~ sum_k a_k e^{i k theta} and the extension into the disc
is G(c + r w) = sum_{k >= -nu} a_k w^k.  The coefficient of (z - c)^k is a_k / r^k.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chains import CircleT
from .errors import BandLimitError, EvaluationError, ExtrapolationWarning, PoleEvaluationError

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class LaurentData:
    center: complex
    radius: float
    coeffs: np.ndarray  # a_k for k = -K..K, index k + K
    N: int
    residual: float
    t: float = float("nan")

    @property
    def K(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coeff(self, k: int) -> complex:
        if abs(k) > self.K:
            raise BandLimitError(f"index {k} outside retained band |k| <= {self.K}")
        return complex(self.coeffs[k + self.K])

    def negative(self) -> np.ndarray:
        """a_{-1}, a_{-2}, ..., a_{-K}."""
        return self.coeffs[: self.K][::-1]

    def evaluate_boundary(self, theta) -> np.ndarray:
        k = np.arange(-self.K, self.K + 1)
        return np.exp(1j * np.outer(np.atleast_1d(theta), k)) @ self.coeffs


def sample_circle(f: Callable, circle: CircleT, N: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(N) / N
    z = circle.center + circle.radius * np.exp(1j * theta)
    vals = np.asarray(f(z), dtype=complex)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape).astype(complex)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"non-finite value at theta={theta[j]:.6g}", theta=float(theta[j]))
    return vals


def coefficients_from_samples(vals: np.ndarray, K: int) -> np.ndarray:
    """a_k = (1/N) sum_j f_j e^{-i k theta_j} for |k| <= K."""
    N = len(vals)
    spec = np.fft.fft(vals) / N
    k = np.arange(-K, K + 1)
    return spec[k % N]


def analyze_circle(f: Callable, circle: CircleT, N: int = 1024, K: int | None = None) -> LaurentData:
    if K is None:
        K = N // 4
    if N < 2 * K + 2:
        raise BandLimitError(f"N={N} too small for band K={K}; need N >= 2K + 2")
    vals = sample_circle(f, circle, N)
    return laurent_from_samples(vals, circle, K)


def laurent_from_samples(vals: np.ndarray, circle: CircleT, K: int) -> LaurentData:
    N = len(vals)
    coeffs = coefficients_from_samples(vals, K)
    spec = np.zeros(N, dtype=complex)
    k = np.arange(-K, K + 1)
    spec[k % N] = coeffs
    recon = np.fft.ifft(spec) * N
    residual = float(np.max(np.abs(recon - vals)))
    return LaurentData(complex(circle.center), float(circle.radius), coeffs, N, residual, circle.t)


def moment(data: LaurentData, m: int) -> complex:
    """Contour moment of f (z - c)^m dz over the circle, 2 pi i r^(m+1) a_(-(m+1))."""
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    if m + 1 > data.K:
        raise BandLimitError(f"moment {m} needs a_(-{m + 1}) beyond band K={data.K}")
    return 2j * np.pi * data.radius ** (m + 1) * data.coeff(-(m + 1))


@dataclass(frozen=True)
class MeromTest:
    passed: bool
    defect: float
    zero_function: bool = False


def merom_test(data: LaurentData, nu: int, tol: float = DEFAULT_TOL) -> MeromTest:
    """Relative energy of the coefficients below -nu; pass iff it is at most tol."""
    if nu < 0 or nu > data.K:
        raise BandLimitError(f"pole order {nu} outside [0, {data.K}]")
    energy = np.abs(data.coeffs) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return MeromTest(True, 0.0, zero_function=True)
    tail = float(energy[: data.K - nu].sum())
    defect = float(np.sqrt(tail / total))
    return MeromTest(defect <= tol, defect)


@dataclass(frozen=True)
class MeromorphicExtension:
    """G(z) = sum_{k=-nu}^{K} series[k + nu] w^k with w = (z - c)/r."""

    center: complex
    radius: float
    pole_order: int
    series: np.ndarray
    tail_norm: float
    t: float = float("nan")

    @property
    def K(self) -> int:
        return len(self.series) - 1 - self.pole_order

    def laurent_coefficients(self) -> dict:
        """Coefficients of (z - c)^k, k = -nu..K."""
        ks = range(-self.pole_order, self.K + 1)
        return {k: complex(self.series[k + self.pole_order] / self.radius**k) for k in ks}

    def polynomial(self) -> np.ndarray:
        """Increasing-power coefficients of w^nu G in w."""
        return self.series

    def __call__(self, z):
        return evaluate_extension(self, z)


def build_extension(data: LaurentData, nu: int) -> MeromorphicExtension:
    if nu < 0 or nu > data.K:
        raise BandLimitError(f"pole order {nu} outside [0, {data.K}]")
    series = data.coeffs[data.K - nu:].copy()
    tail = float(np.sqrt(np.sum(np.abs(data.coeffs[: data.K - nu]) ** 2)))
    return MeromorphicExtension(data.center, data.radius, nu, series, tail, data.t)


def evaluate_extension(ext: MeromorphicExtension, z, warn: bool = True):
    z = np.asarray(z, dtype=complex)
    w = (z - ext.center) / ext.radius
    if ext.pole_order > 0 and np.any(w == 0):
        raise PoleEvaluationError("evaluation at the center pole")
    if warn and np.any(np.abs(w) > 1 + 1e-12):
        warnings.warn("evaluating extension outside its circle", ExtrapolationWarning, stacklevel=2)
    # Horner in w on the polynomial w^nu G(w)
    p = np.polynomial.polynomial.polyval(w, ext.series)
    out = p / w**ext.pole_order if ext.pole_order else p
    return out[()] if out.ndim == 0 else out


def extension_boundary_values(ext: MeromorphicExtension, N: int) -> np.ndarray:
    """G on the N-point circle grid via inverse FFT of the retained band."""
    spec = np.zeros(N, dtype=complex)
    k = np.arange(-ext.pole_order, ext.K + 1)
    np.add.at(spec, k % N, ext.series)  # aliased indices accumulate
    return np.fft.ifft(spec) * N


# -- CSV-shaped tables ---------------------------------------------------------

def coefficient_rows(data: LaurentData):
    for k in range(-data.K, data.K + 1):
        a = data.coeff(k)
        yield (data.t, k, a.real, a.imag)


def moment_rows(data: LaurentData, m_max: int):
    for m in range(min(m_max, data.K - 1) + 1):
        yield (data.t, m, abs(moment(data, m)))
