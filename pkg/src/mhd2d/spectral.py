"""Spectral primitives on the 2pi-periodic square torus.

Conventions used throughout the package:

* Physical fields are sampled on the uniform n x n collocation grid
  x_i = 2*pi*k/n, array axis 0 <-> x1, axis 1 <-> x2.
* Spectral fields hold the full n x n complex coefficient array in numpy
  FFT layout (integer wavenumbers fftfreq(n)*n, each component in
  [-n/2, n/2)).  The forward transform is unnormalized, the inverse
  carries 1/n^2, so a single Fourier mode a*exp(i xi.x) has coefficient
  a*n^2.
* Parseval with this normalization:
      ||f||_{L^2}^2 = (2*pi)^2 * n^-4 * sum |coef|^2
  (the L^2 norm is over [0, 2*pi)^2, not the mean square).
* Real fields are kept exactly real by doing the physical<->spectral
  round trips with rfft2/irfft2 and extending the half spectrum by
  Hermitian symmetry, which also keeps coef(-xi) == conj(coef(xi))
  exact at the bit level.

All operations are pure: they never mutate their inputs, and the arrays
wrapped by a field are frozen (writeable=False) at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Fields attached to different grids were combined."""


class NonFiniteFieldError(ValueError):
    """A field contains NaN or Inf samples/coefficients."""


class MeanModeError(ValueError):
    """An operation required a zero-mean field but xi=0 carries mass."""


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


class TorusGrid:
    """Collocation grid and integer wavenumber lattice on [0, 2*pi)^2.

    n must be a power of two, n >= 8.  Grids with equal n are
    interchangeable; equality and hashing go by n.
    """

    def __init__(self, n: int):
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        self.n = int(n)
        k = np.fft.fftfreq(n, 1.0 / n)  # exact integers as floats
        self.k1, self.k2 = (_frozen(a) for a in np.meshgrid(k, k, indexing="ij"))
        self.ksq = _frozen(self.k1**2 + self.k2**2)
        self.kmag = _frozen(np.sqrt(self.ksq))
        inv = np.zeros_like(self.ksq)
        inv[self.ksq > 0] = 1.0 / self.ksq[self.ksq > 0]
        self.inv_ksq = _frozen(inv)
        # Odd-order multipliers annihilate the Nyquist line so that they
        # map Hermitian-symmetric arrays to Hermitian-symmetric arrays.
        kd = k.copy()
        kd[n // 2] = 0.0
        self.kd1, self.kd2 = (_frozen(a) for a in np.meshgrid(kd, kd, indexing="ij"))
        self.dealias_cutoff = n // 3
        self.dealias_mask = _frozen(
            (np.abs(self.k1) <= self.dealias_cutoff)
            & (np.abs(self.k2) <= self.dealias_cutoff)
        )

    def coordinates(self):
        """Meshgrid (X1, X2) of collocation points."""
        x = np.arange(self.n) * (TWO_PI / self.n)
        return np.meshgrid(x, x, indexing="ij")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and other.n == self.n

    def __hash__(self):
        return hash(("TorusGrid", self.n))

    def __repr__(self):
        return f"TorusGrid(n={self.n})"


def _check_same_grid(*objs):
    n = objs[0].grid.n
    for o in objs[1:]:
        if o.grid.n != n:
            raise GridMismatchError(f"grids differ: {n} vs {o.grid.n}")


@dataclass(frozen=True)
class RealField:
    """Real scalar samples on the collocation grid."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n,) * 2}, got {v.shape}")
        if not np.isfinite(v).all():
            raise NonFiniteFieldError("real field contains non-finite samples")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn) -> "RealField":
        x1, x2 = grid.coordinates()
        return cls(grid, fn(x1, x2))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real scalar field (Hermitian-symmetric)."""

    grid: TorusGrid
    coef: np.ndarray
    dealiased: bool = False

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=np.complex128)
        if c.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n,) * 2}, got {c.shape}")
        if not np.isfinite(c.view(np.float64)).all():
            raise NonFiniteFieldError("spectral field contains non-finite coefficients")
        object.__setattr__(self, "coef", _frozen(c))

    @classmethod
    def zeros(cls, grid: TorusGrid, dealiased: bool = True) -> "SpectralField":
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128), dealiased)

    def hermitian_defect(self) -> float:
        """Max |coef(-xi) - conj(coef(xi))| over the lattice."""
        flipped = self.coef[_negated_index(self.grid.n)][:, _negated_index(self.grid.n)]
        return float(np.max(np.abs(flipped - np.conj(self.coef))))

    def mean_coefficient(self) -> complex:
        return complex(self.coef[0, 0])

    def is_zero_mean(self, rel_tol: float = 1e-12) -> bool:
        """True if the xi=0 coefficient is zero up to round-off relative to
        the largest coefficient (exactly zero for a zero field)."""
        top = np.max(np.abs(self.coef))
        return abs(self.coef[0, 0]) <= rel_tol * top


def _negated_index(n: int) -> np.ndarray:
    return (-np.arange(n)) % n


def _hermitian_extend(half: np.ndarray, n: int) -> np.ndarray:
    """Full n x n spectrum from the rfft2 half spectrum; exact symmetry."""
    full = np.empty((n, n), dtype=np.complex128)
    full[:, : n // 2 + 1] = half
    rows = _negated_index(n)
    # Columns 0 and n/2 mirror onto themselves; average out the round-off
    # asymmetry the real FFT leaves there.
    for c in (0, n // 2):
        full[:, c] = 0.5 * (half[:, c] + np.conj(half[rows, c]))
    cols = np.arange(n // 2 + 1, n)
    full[:, cols] = np.conj(full[rows][:, n - cols])
    return full


def forward(f: RealField) -> SpectralField:
    """Physical samples -> spectral coefficients (unnormalized)."""
    half = np.fft.rfft2(f.values)
    return SpectralField(f.grid, _hermitian_extend(half, f.grid.n))


def inverse(F: SpectralField) -> RealField:
    """Spectral coefficients -> physical samples (1/n^2 normalization)."""
    n = F.grid.n
    return RealField(F.grid, np.fft.irfft2(F.coef[:, : n // 2 + 1], s=(n, n)))


def _forward_array(grid: TorusGrid, values: np.ndarray) -> np.ndarray:
    return _hermitian_extend(np.fft.rfft2(values), grid.n)


def _inverse_array(grid: TorusGrid, coef: np.ndarray) -> np.ndarray:
    n = grid.n
    return np.fft.irfft2(coef[:, : n // 2 + 1], s=(n, n))


def symbol_power(grid: TorusGrid, gamma: float) -> np.ndarray:
    """|xi|^(2*gamma) on the lattice; the xi=0 entry is 0 unless gamma == 0."""
    if gamma == 0.0:
        return np.ones((grid.n, grid.n))
    sym = np.zeros((grid.n, grid.n))
    nz = grid.ksq > 0
    sym[nz] = grid.ksq[nz] ** gamma
    return sym


def fractional_laplacian(F: SpectralField, gamma: float) -> SpectralField:
    """Fourier multiplier |xi|^(2*gamma); xi=0 is annihilated for gamma > 0
    and left unchanged for gamma == 0."""
    if gamma < -1.0:
        raise ValueError(f"exponent gamma must be >= -1, got {gamma}")
    if gamma < 0.0 and not F.is_zero_mean():
        raise MeanModeError("negative-order multiplier needs a zero-mean field")
    if gamma == 0.0:
        return SpectralField(F.grid, F.coef.copy(), F.dealiased)
    return SpectralField(F.grid, symbol_power(F.grid, gamma) * F.coef, F.dealiased)


def partial_derivative(F: SpectralField, axis: int) -> SpectralField:
    """d/dx_axis via the multiplier i*xi_axis (axis is 1 or 2)."""
    if axis == 1:
        k = F.grid.kd1
    elif axis == 2:
        k = F.grid.kd2
    else:
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    return SpectralField(F.grid, 1j * k * F.coef, F.dealiased)


def perp_gradient(psi: SpectralField):
    """(-d2 psi, d1 psi), the rotated gradient of a streamfunction."""
    d1 = partial_derivative(psi, 1)
    d2 = partial_derivative(psi, 2)
    return SpectralField(psi.grid, -d2.coef, psi.dealiased), d1


def biot_savart(w: SpectralField):
    """Divergence-free velocity with curl u = w and zero mean.

    u_hat(xi) = (i xi_2, -i xi_1) w_hat(xi)/|xi|^2, u_hat(0) = 0.
    """
    if not w.is_zero_mean():
        raise MeanModeError("curl fields have zero mean; got a nonzero xi=0 mode")
    g = w.grid
    # inv_ksq leaves u_hat(0) = 0: the zero-mean-velocity gauge.
    u1 = 1j * g.kd2 * g.inv_ksq * w.coef
    u2 = -1j * g.kd1 * g.inv_ksq * w.coef
    return SpectralField(g, u1, w.dealiased), SpectralField(g, u2, w.dealiased)


def velocity_gradient(w: SpectralField):
    """The four components (d1u1, d2u1, d1u2, d2u2) of grad u for the
    divergence-free u with curl u = w, straight from the vorticity."""
    g = w.grid
    q = g.inv_ksq * w.coef
    return (
        SpectralField(g, -g.k1 * g.k2 * q, w.dealiased),
        SpectralField(g, -g.k2 * g.k2 * q, w.dealiased),
        SpectralField(g, g.k1 * g.k1 * q, w.dealiased),
        SpectralField(g, g.k1 * g.k2 * q, w.dealiased),
    )


def curl(v1: SpectralField, v2: SpectralField) -> SpectralField:
    """Scalar curl d1 v2 - d2 v1."""
    _check_same_grid(v1, v2)
    g = v1.grid
    coef = 1j * (g.kd1 * v2.coef - g.kd2 * v1.coef)
    return SpectralField(g, coef, v1.dealiased and v2.dealiased)


def divergence(v1: SpectralField, v2: SpectralField) -> SpectralField:
    _check_same_grid(v1, v2)
    g = v1.grid
    coef = 1j * (g.kd1 * v1.coef + g.kd2 * v2.coef)
    return SpectralField(g, coef, v1.dealiased and v2.dealiased)


def dealias(F: SpectralField) -> SpectralField:
    """Zero every mode with max(|xi_1|, |xi_2|) > n/3 (the 2/3 rule)."""
    return SpectralField(F.grid, np.where(F.grid.dealias_mask, F.coef, 0.0), True)


def zero_mean(F: SpectralField) -> SpectralField:
    """Copy with the xi=0 coefficient set exactly to zero."""
    coef = F.coef.copy()
    coef[0, 0] = 0.0
    return SpectralField(F.grid, coef, F.dealiased)


# --- norms -----------------------------------------------------------------

def l2_norm_sq(F: SpectralField) -> float:
    """||f||_{L^2([0,2pi)^2)}^2 by Parseval."""
    n = F.grid.n
    return float(TWO_PI**2 / n**4 * np.sum(np.abs(F.coef) ** 2))


def l2_norm(F: SpectralField) -> float:
    return float(np.sqrt(l2_norm_sq(F)))


def weighted_l2_norm_sq(F: SpectralField, weight: np.ndarray) -> float:
    """sum weight(xi)*|coef(xi)|^2 scaled to an L^2 integral."""
    n = F.grid.n
    return float(TWO_PI**2 / n**4 * np.sum(weight * np.abs(F.coef) ** 2))


def active_band(F: SpectralField, rel_tol: float = 0.0) -> int:
    """Largest max(|xi_1|, |xi_2|) carrying a coefficient above
    rel_tol * max|coef| (0 if the field is zero)."""
    mags = np.abs(F.coef)
    top = mags.max()
    if top == 0.0:
        return 0
    comp = np.maximum(np.abs(F.grid.k1), np.abs(F.grid.k2))
    return int(comp[mags > rel_tol * top].max())


def oversampled_values(F: SpectralField, factor: int = 4) -> np.ndarray:
    """Evaluate the trigonometric polynomial on a factor-times finer grid.

    Requires the spectrum to be Nyquist-free (max component <= n/2 - 1),
    which every dealiased field satisfies.
    """
    n = F.grid.n
    if factor == 1:
        return _inverse_array(F.grid, F.coef)
    if active_band(F, rel_tol=1e-13) > n // 2 - 1:
        raise ValueError("field carries Nyquist content; cannot oversample exactly")
    m = factor * n
    half = np.zeros((m, m // 2 + 1), dtype=np.complex128)
    rows = np.fft.fftfreq(n, 1.0 / n).astype(int) % m
    half[rows, : n // 2 + 1] = F.coef[:, : n // 2 + 1]
    return np.fft.irfft2(half, s=(m, m)) * factor**2


def lp_norm(F: SpectralField, p: float, oversample: int = 4) -> float:
    """L^p norm over [0, 2pi)^2; p=2 by Parseval, otherwise the field is
    evaluated on an oversampled physical grid (grid max for p = inf)."""
    if p == 2:
        return l2_norm(F)
    vals = np.abs(oversampled_values(F, oversample))
    if np.isinf(p):
        return float(vals.max())
    return float((TWO_PI**2 * np.mean(vals**p)) ** (1.0 / p))


def pointwise_magnitude_sup(fields, oversample: int = 4) -> float:
    """Grid max of sqrt(sum_i f_i(x)^2) for a tuple of spectral fields."""
    acc = None
    for F in fields:
        v = oversampled_values(F, oversample)
        acc = v**2 if acc is None else acc + v**2
    return float(np.sqrt(acc.max()))


# --- random data -----------------------------------------------------------

def random_band_field(
    grid: TorusGrid,
    rng: np.random.Generator,
    band: int,
    amplitude: float = 1.0,
    zero_mean: bool = True,
) -> SpectralField:
    """Seeded random real field with spectrum confined to 1 <= |xi| <= band,
    normalized so ||f||_{L^2} = amplitude (zero field for amplitude 0)."""
    if band < 1 or band > grid.n // 2 - 1:
        raise ValueError(f"band must lie in [1, n/2-1], got {band}")
    noise = rng.standard_normal((grid.n, grid.n))
    coef = _forward_array(grid, noise)
    keep = grid.kmag <= band
    if zero_mean:
        keep &= grid.ksq > 0
    coef = np.where(keep, coef, 0.0)
    F = SpectralField(grid, coef, dealiased=band <= grid.dealias_cutoff)
    nrm = l2_norm(F)
    if amplitude == 0.0 or nrm == 0.0:
        return SpectralField.zeros(grid)
    return SpectralField(grid, coef * (amplitude / nrm), F.dealiased)
