"""Uniform complex grids over a square with FFT-based singular integral operators.

The square [-L, L]^2 is sampled at n x n nodes z = (-L + i*h) + 1j*(-L + j*h),
h = 2L/n.  The Fourier transform follows the non-unitary convention

    F f (xi) = integral of exp(2i xi . z) f(z) dm(z),

with xi . z the real scalar product, so the resolvable frequencies are
xi in (pi/(2L)) * {-n/2, ..., n/2 - 1}^2 and Parseval reads
||F f||_2 = pi ||f||_2.  Under this convention the Wirtinger derivatives act
as the multipliers

    dbar <-> -i xi,      d <-> -i conj(xi),

the Beurling transform as conj(xi)/xi, and the Cauchy transform (computed
through the compactly supported kernel Phi(z) = 1/(pi z) for |z| < 4, zero
beyond) as the bounded symbol (i/xi) * (1 - J0(8 |xi|)).
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy.special import j0

from .errors import UnsupportedSupport

#: Radius where the truncated Cauchy kernel Phi(z) = 1/(pi z) is cut off.
CAUCHY_CUTOFF_RADIUS = 4.0

#: Relative L2 mass allowed outside the declared support of a field.
SUPPORT_TOL = 1e-12

_FFT_WORKERS = 1


def set_fft_workers(workers: int) -> None:
    """Cap the number of threads used by the FFT backend."""
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(workers))


@dataclass(frozen=True)
class Grid:
    """Uniform n x n sampling of the square [-L, L]^2.

    Parameters
    ----------
    n : int
        Samples per axis; power of two, at least 64.
    half_width : float
        Half side length L; at least 4 so the truncated Cauchy kernel
        (supported in 5 D) fits after zero padding.
    """

    n: int
    half_width: float = 4.0

    def __post_init__(self):
        if self.n < 64 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size n must be a power of two with n >= 64")
        if self.half_width < 4:
            raise ValueError("half_width L must be at least 4")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    def nodes(self) -> np.ndarray:
        """Complex node array Z with Z[i, j] = x_i + 1j * y_j."""
        return _nodes(self.n, self.half_width)

    def frequencies(self) -> np.ndarray:
        """Complex frequency array in FFT index order, spacing pi/(2L)."""
        return _frequencies(self.n, self.half_width)

    @property
    def max_frequency(self) -> float:
        return np.pi / (2.0 * self.h)


@lru_cache(maxsize=32)
def _nodes(n: int, L: float) -> np.ndarray:
    ax = -L + (2.0 * L / n) * np.arange(n)
    Z = ax[:, None] + 1j * ax[None, :]
    Z.setflags(write=False)
    return Z


@lru_cache(maxsize=32)
def _frequencies(n: int, L: float) -> np.ndarray:
    # integer frequencies in FFT order scaled by the fundamental pi/(2L)
    m = scipy.fft.fftfreq(n, d=1.0 / n)
    Xi = (np.pi / (2.0 * L)) * (m[:, None] + 1j * m[None, :])
    Xi.setflags(write=False)
    return Xi


class GridField:
    """Complex samples on a :class:`Grid`; values are immutable after construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: np.ndarray, *, check_finite: bool = True):
        values = np.ascontiguousarray(values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        if check_finite and not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridField is immutable")

    def copy_values(self) -> np.ndarray:
        return np.array(self.values)

    def __add__(self, other):
        return GridField(self.grid, self.values + _coerce(self.grid, other), check_finite=False)

    def __sub__(self, other):
        return GridField(self.grid, self.values - _coerce(self.grid, other), check_finite=False)

    def __mul__(self, other):
        return GridField(self.grid, self.values * _coerce(self.grid, other), check_finite=False)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridField(self.grid, -self.values, check_finite=False)


def _coerce(grid: Grid, other) -> np.ndarray:
    if isinstance(other, GridField):
        if other.grid != grid:
            raise ValueError("fields live on different grids")
        return other.values
    return np.asarray(other)


class FrequencyField:
    """Spectral samples in FFT index order; ``xi()`` gives the matching frequencies."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.ascontiguousarray(values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise ValueError("values shape does not match grid")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("FrequencyField is immutable")

    def xi(self) -> np.ndarray:
        return self.grid.frequencies()


# ---------------------------------------------------------------------------
# raw-array spectral pipeline (fft index order throughout)

def _fft_raw(values: np.ndarray, n: int, L: float) -> np.ndarray:
    h = 2.0 * L / n
    return (h * h * n * n) * scipy.fft.ifft2(
        scipy.fft.ifftshift(values), workers=_FFT_WORKERS
    )


def _ifft_raw(values: np.ndarray, n: int, L: float) -> np.ndarray:
    h = 2.0 * L / n
    return scipy.fft.fftshift(scipy.fft.fft2(values, workers=_FFT_WORKERS)) / (h * h * n * n)


def fft(f: GridField) -> FrequencyField:
    """Discrete surrogate of the non-unitary Fourier transform."""
    return FrequencyField(f.grid, _fft_raw(f.values, f.grid.n, f.grid.half_width))


def ifft(F: FrequencyField) -> GridField:
    """Exact inverse of :func:`fft`."""
    return GridField(F.grid, _ifft_raw(F.values, F.grid.n, F.grid.half_width), check_finite=False)


def _apply_multiplier(f: GridField, symbol: np.ndarray) -> GridField:
    g = f.grid
    out = _ifft_raw(symbol * _fft_raw(f.values, g.n, g.half_width), g.n, g.half_width)
    return GridField(g, out, check_finite=False)


def dbar(f: GridField) -> GridField:
    """Wirtinger dbar derivative as the Fourier multiplier -i xi."""
    return _apply_multiplier(f, -1j * f.grid.frequencies())


def d(f: GridField) -> GridField:
    """Wirtinger d derivative as the Fourier multiplier -i conj(xi)."""
    return _apply_multiplier(f, -1j * np.conj(f.grid.frequencies()))


@lru_cache(maxsize=32)
def _beurling_symbol(n: int, L: float) -> np.ndarray:
    Xi = _frequencies(n, L)
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = np.conj(Xi) / Xi
    sym[0, 0] = 0.0  # p.v. operator annihilates constants
    sym.setflags(write=False)
    return sym


def beurling(f: GridField) -> GridField:
    """Beurling transform: bin-wise multiplication by conj(xi)/xi, zero at xi = 0."""
    return _apply_multiplier(f, _beurling_symbol(f.grid.n, f.grid.half_width))


@lru_cache(maxsize=32)
def _cauchy_symbol(n: int, L: float) -> np.ndarray:
    """Closed-form symbol of convolution with the truncated kernel Phi."""
    Xi = _frequencies(n, L)
    a = np.abs(Xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = (1j / Xi) * (1.0 - j0(2.0 * CAUCHY_CUTOFF_RADIUS * a))
    sym[0, 0] = 0.0  # symbol extends continuously by 0
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=8)
def _dbar_cauchy_symbol(n: int, L: float) -> np.ndarray:
    sym = (-1j * _frequencies(n, L)) * _cauchy_symbol(n, L)
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=8)
def _d_cauchy_symbol(n: int, L: float) -> np.ndarray:
    sym = (-1j * np.conj(_frequencies(n, L))) * _cauchy_symbol(n, L)
    sym.setflags(write=False)
    return sym


def relative_mass_outside(f: GridField, radius: float) -> float:
    """Relative L2 mass of f on the nodes with |z| > radius."""
    Z = f.grid.nodes()
    total = np.sum(np.abs(f.values) ** 2)
    if total == 0.0:
        return 0.0
    outside = np.sum(np.abs(f.values[np.abs(Z) > radius]) ** 2)
    return float(np.sqrt(outside / total))


def _pad_values(values: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    out[n // 2 : n // 2 + n, n // 2 : n // 2 + n] = values
    return out


def cauchy(f: GridField, *, support_radius: float = 1.0) -> GridField:
    """Cauchy transform of a disk-supported field via zero-padded convolution with Phi.

    The convolution f * Phi is evaluated on a 2n x 2n extension of the grid
    (same spacing, doubled half-width) so there is no wraparound; the result
    agrees with the true Cauchy transform wherever |z| < 4 - support_radius.
    Raises :class:`UnsupportedSupport` when the relative mass of f outside
    ``support_radius`` (plus one cell of slack for boundary-straddling
    samples) exceeds ``SUPPORT_TOL``.
    """
    g = f.grid
    if relative_mass_outside(f, support_radius + g.h) > SUPPORT_TOL:
        raise UnsupportedSupport(
            f"cauchy requires support in the disk of radius {support_radius}"
        )
    padded = _pad_values(f.values, g.n)
    sym = _cauchy_symbol(2 * g.n, 2 * g.half_width)
    out = _ifft_raw(sym * _fft_raw(padded, 2 * g.n, 2 * g.half_width), 2 * g.n, 2 * g.half_width)
    out = out[g.n // 2 : g.n // 2 + g.n, g.n // 2 : g.n // 2 + g.n]
    return GridField(g, out, check_finite=False)


def cauchy_with_derivatives(
    f: GridField, *, support_radius: float = 1.0
) -> tuple[GridField, GridField, GridField]:
    """Cauchy transform together with its Wirtinger derivatives (Cf, d Cf, dbar Cf).

    All three are computed on the 2n x 2n zero-padded torus, where f * Phi
    vanishes near the frame, so the spectral derivatives carry no wraparound
    bias; dbar Cf reproduces f and d Cf realizes the alias-free Beurling
    transform on the region |z| < 4 - support_radius.
    """
    g = f.grid
    if relative_mass_outside(f, support_radius + g.h) > SUPPORT_TOL:
        raise UnsupportedSupport(
            f"cauchy requires support in the disk of radius {support_radius}"
        )
    n2, L2 = 2 * g.n, 2 * g.half_width
    F = _fft_raw(_pad_values(f.values, g.n), n2, L2)
    sym = _cauchy_symbol(n2, L2)
    Xi = _frequencies(n2, L2)
    sl = slice(g.n // 2, g.n // 2 + g.n)
    c = _ifft_raw(sym * F, n2, L2)[sl, sl]
    dc = _ifft_raw(-1j * np.conj(Xi) * sym * F, n2, L2)[sl, sl]
    dbc = _ifft_raw(-1j * Xi * sym * F, n2, L2)[sl, sl]
    return (
        GridField(g, c, check_finite=False),
        GridField(g, dc, check_finite=False),
        GridField(g, dbc, check_finite=False),
    )


def modulate(f: GridField, k: complex) -> GridField:
    """Pointwise product with the unimodular character e_k(z) = exp(i(kz + conj(kz)))."""
    phase = modulation_field(f.grid, k)
    return GridField(f.grid, f.values * phase, check_finite=False)


def modulation_field(grid: Grid, k: complex) -> np.ndarray:
    """The character e_k sampled on the grid."""
    Z = grid.nodes()
    return np.exp(2j * (k * Z).real)


def lp_norm(f: GridField, p: float, region: tuple[complex, float] | None = None) -> float:
    """Riemann-sum L^p norm, optionally restricted to a disk region=(center, radius)."""
    if p <= 0:
        raise ValueError("p must be positive")
    vals = np.abs(f.values)
    if region is not None:
        center, radius = region
        mask = np.abs(f.grid.nodes() - center) <= radius
        vals = vals[mask]
    if vals.size == 0:
        return 0.0
    if np.isinf(p):
        return float(vals.max())
    return float((np.sum(vals**p) * f.grid.cell_area) ** (1.0 / p))


def translate(f: GridField, shift: tuple[int, int]) -> GridField:
    """Lattice translation tau_y f(z) = f(z - y) with y = (shift[0] h, shift[1] h).

    Shifts are periodic; fields supported well inside the square make the
    periodization inert.
    """
    return GridField(f.grid, np.roll(f.values, shift, axis=(0, 1)), check_finite=False)


# ---------------------------------------------------------------------------
# standard test fields

def disk_indicator(grid: Grid, radius: float = 1.0, center: complex = 0.0) -> GridField:
    Z = grid.nodes()
    return GridField(grid, (np.abs(Z - center) <= radius).astype(np.complex128))


def gaussian(grid: Grid, width: float = 1.0, center: complex = 0.0) -> GridField:
    Z = grid.nodes()
    return GridField(grid, np.exp(-(np.abs(Z - center) ** 2) / width**2).astype(np.complex128))


def smooth_bump(grid: Grid, radius: float = 1.0, center: complex = 0.0) -> GridField:
    """C-infinity bump exp(1 - 1/(1 - |z/r|^2)) supported in the closed disk."""
    Z = grid.nodes()
    r2 = np.abs((Z - center) / radius) ** 2
    vals = np.zeros(grid.shape, dtype=np.complex128)
    inside = r2 < 1.0
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return GridField(grid, vals)


def smooth_bump_derivatives(
    grid: Grid, radius: float = 1.0, center: complex = 0.0
) -> tuple[GridField, GridField, GridField]:
    """The bump of :func:`smooth_bump` with its analytic Wirtinger derivatives.

    Returns (b, d b, dbar b), all exactly supported in the closed disk; handy
    as an oracle family for the transform identities d C = B and dbar C = Id.
    """
    Z = grid.nodes()
    r2 = np.abs((Z - center) / radius) ** 2
    inside = r2 < 1.0
    b = np.zeros(grid.shape, dtype=np.complex128)
    db = np.zeros(grid.shape, dtype=np.complex128)
    dbb = np.zeros(grid.shape, dtype=np.complex128)
    w = 1.0 - r2[inside]
    core = np.exp(1.0 - 1.0 / w) / (w * w) / radius**2
    b[inside] = np.exp(1.0 - 1.0 / w)
    db[inside] = -np.conj(Z[inside] - center) * core
    dbb[inside] = -(Z[inside] - center) * core
    return GridField(grid, b), GridField(grid, db), GridField(grid, dbb)


def wave(grid: Grid, xi0: complex) -> GridField:
    """The exponential e_{conj(xi0)}(z) = exp(2i xi0 . z)."""
    return GridField(grid, modulation_field(grid, np.conj(xi0)))


# ---------------------------------------------------------------------------
# binary field file: magic CKF1, length-prefixed JSON header, float64 pairs

_MAGIC = b"CKF1"


def write_field(f: GridField, path) -> None:
    header = json.dumps(
        {"n": f.grid.n, "L": f.grid.half_width, "dtype": "c128", "layout": "row-major"},
        sort_keys=True,
    ).encode("utf-8")
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<I", len(header)))
    buf.write(header)
    interleaved = np.empty((f.grid.n, f.grid.n, 2), dtype="<f8")
    interleaved[..., 0] = f.values.real
    interleaved[..., 1] = f.values.imag
    buf.write(interleaved.tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_field(path) -> GridField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise ValueError("not a CKF1 field file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    if header.get("dtype") != "c128" or header.get("layout") != "row-major":
        raise ValueError("unsupported field file header")
    n, L = int(header["n"]), float(header["L"])
    data = np.frombuffer(raw[8 + hlen :], dtype="<f8").reshape(n, n, 2)
    return GridField(Grid(n, L), data[..., 0] + 1j * data[..., 1])
