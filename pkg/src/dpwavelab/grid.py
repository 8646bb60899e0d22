"""Periodic Fourier collocation grids, fields and the nonlocal symbol operators.

Everything downstream (soliton sampling, time stepping, operator assembly)
works on a uniform periodic grid.  Nonlocal operators such as (a - d^2/dx^2)^-1
are applied through their exact Fourier symbols, so they are spectrally exact
for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform collocation grid on a periodic box [-period/2, period/2)."""

    n: int
    period: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)) or self.n < 8:
            raise ValueError(f"node count must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.period) or self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def h(self) -> float:
        return self.period / self.n

    @property
    def nodes(self) -> np.ndarray:
        return -0.5 * self.period + self.h * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Signed wavenumbers xi_k = 2*pi*k/period in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)


def make_grid(n: int, period: float) -> PeriodicGrid:
    return PeriodicGrid(n=int(n), period=float(period))


@dataclass(frozen=True)
class Field:
    """Real grid function: samples at the collocation nodes of one grid."""

    grid: PeriodicGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != (self.grid.n,):
            raise ValueError(f"samples shape {samples.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", samples)

    def _check_same_grid(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.samples - other.samples)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.samples)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(self.samples**2)))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))


def _apply_symbol(f: Field, symbol: np.ndarray) -> Field:
    out = np.fft.ifft(symbol * np.fft.fft(f.samples))
    return Field(f.grid, out.real)


def helmholtz_inverse(f: Field, a: float) -> Field:
    """Solve (a - d^2/dx^2) g = f by dividing Fourier coefficients by a + xi^2."""
    if not a > 0:
        raise ValueError(f"helmholtz parameter must be positive, got {a}")
    xi = f.grid.wavenumbers
    return _apply_symbol(f, 1.0 / (a + xi**2))


def sqrt_helmholtz_inverse4(f: Field) -> Field:
    """Apply (4 - d^2/dx^2)^(-1/2): divide Fourier coefficients by sqrt(4 + xi^2)."""
    xi = f.grid.wavenumbers
    return _apply_symbol(f, 1.0 / np.sqrt(4.0 + xi**2))


def derivative(f: Field, order: int) -> Field:
    """Spectral derivative of order 1, 2 or 3; Nyquist mode zeroed for odd orders."""
    if order not in (1, 2, 3):
        raise ValueError(f"unsupported derivative order {order}")
    xi = f.grid.wavenumbers
    symbol = (1j * xi) ** order
    if order % 2 == 1:
        symbol = symbol.copy()
        symbol[f.grid.n // 2] = 0.0
    return _apply_symbol(f, symbol)


def integrate(f: Field) -> float:
    """Trapezoid rule; spectrally accurate on the periodic grid."""
    return float(f.grid.h * np.sum(f.samples))


def s_inner(u: Field, v: Field) -> float:
    """Energy pairing (u, (1 - d^2)(4 - d^2)^-1 v), via the symbol (1+xi^2)/(4+xi^2).

    Symmetric and positive definite; the symbol lies in [1/4, 1), so
    (1/4)||u||^2 <= s_inner(u, u) < ||u||^2.
    """
    u._check_same_grid(v)
    xi = u.grid.wavenumbers
    symbol = (1.0 + xi**2) / (4.0 + xi**2)
    uh = np.fft.fft(u.samples)
    vh = np.fft.fft(v.samples)
    # Parseval: h * sum(u * Kv) = h/n * sum(conj(uh) * symbol * vh)
    return float(np.real(np.sum(np.conj(uh) * symbol * vh)) * u.grid.h / u.grid.n)


def smoothing_operator(f: Field) -> Field:
    """Apply (1 - d^2)(4 - d^2)^-1, the operator inducing the S-pairing."""
    xi = f.grid.wavenumbers
    return _apply_symbol(f, (1.0 + xi**2) / (4.0 + xi**2))
