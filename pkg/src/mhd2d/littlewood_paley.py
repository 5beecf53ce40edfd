"""Dyadic frequency decomposition, Besov norms, paraproducts, and the
frequency-localized inequalities built on them.

The dyadic family lives on annuli A_j = {2^(j-1) < |xi| < 2^(j+1)}.  Each
multiplier starts from one smooth compactly supported radial bump scaled
by 2^j and is then normalized pointwise on the lattice so the dyadic sum
is exactly 1 on every resolved xi != 0; lattice exactness is what the
reconstruction tests lean on.  Block indices outside [j_min, j_max] meet
no lattice point and are treated as zero fields.

On the integer lattice the smallest nonzero |xi| is 1, so the
inhomogeneous low-pass multiplier degenerates to the mean mode: the
j = -1 block is the field's average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import spectral as sp
from .spectral import SpectralField, TorusGrid, TWO_PI


def _bump_profile(r: np.ndarray) -> np.ndarray:
    """Smooth bump supported exactly on (1/2, 2)."""
    out = np.zeros_like(r)
    inside = (r > 0.5) & (r < 2.0)
    x = r[inside]
    out[inside] = np.exp(-1.0 / ((x - 0.5) * (2.0 - x)))
    return out


class DyadicPartition:
    """Multipliers Phi_j (annuli) and Psi (mean mode) for one grid."""

    def __init__(self, grid: TorusGrid):
        self.grid = grid
        self.j_min = 0
        self.j_max = math.ceil(math.log2(grid.n / 2))
        raw = np.stack(
            [_bump_profile(grid.kmag / 2.0**j) for j in range(self.j_min, self.j_max + 1)]
        )
        total = raw.sum(axis=0)
        nonzero = grid.ksq > 0
        scale = np.where(total > 0, total, 1.0)
        phi = np.where(nonzero, raw / scale, 0.0)
        phi.flags.writeable = False
        self.phi = phi
        psi = np.zeros((grid.n, grid.n))
        psi[0, 0] = 1.0
        psi.flags.writeable = False
        self.psi = psi

    def multiplier(self, j: int) -> np.ndarray | None:
        """Phi_j on the lattice, or None when A_j misses the lattice."""
        if self.j_min <= j <= self.j_max:
            return self.phi[j - self.j_min]
        return None

    def resolved(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def partition_residual(self) -> float:
        """max over xi != 0 of |sum_j Phi_j(xi) - 1|."""
        total = self.phi.sum(axis=0)
        return float(np.max(np.abs(total - 1.0)[self.grid.ksq > 0]))

    def max_overlap(self) -> int:
        """Largest number of blocks touching one lattice mode."""
        return int((self.phi > 0).sum(axis=0).max())


@lru_cache(maxsize=16)
def build_partition(grid: TorusGrid) -> DyadicPartition:
    return DyadicPartition(grid)


def dyadic_block(
    f: SpectralField, j: int, partition: DyadicPartition | None = None, homogeneous: bool = True
) -> SpectralField:
    """Frequency-localized piece of f.

    Homogeneous: multiply by Phi_j (zero field when A_j misses the
    lattice).  Inhomogeneous: zero for j <= -2, the mean mode for j = -1,
    Phi_j for j >= 0.
    """
    partition = partition or build_partition(f.grid)
    if not homogeneous:
        if j <= -2:
            return SpectralField.zeros(f.grid, f.dealiased)
        if j == -1:
            return SpectralField(f.grid, partition.psi * f.coef, f.dealiased)
    mult = partition.multiplier(j)
    if mult is None:
        return SpectralField.zeros(f.grid, f.dealiased)
    return SpectralField(f.grid, mult * f.coef, f.dealiased)


def low_pass(f: SpectralField, j: int, partition: DyadicPartition | None = None) -> SpectralField:
    """Running sum S_j f = sum_{l <= j-1} block_l f (homogeneous family)."""
    partition = partition or build_partition(f.grid)
    mult = np.zeros((f.grid.n, f.grid.n))
    for l in partition.resolved():
        if l <= j - 1:
            mult += partition.phi[l - partition.j_min]
    return SpectralField(f.grid, mult * f.coef, f.dealiased)


@dataclass(frozen=True)
class BesovSpec:
    """Regularity s, integrability (p, q), homogeneous or not."""

    s: float
    p: float
    q: float
    homogeneous: bool = True

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError("regularity index must be finite")
        for name, v in (("p", self.p), ("q", self.q)):
            if not (v >= 1.0):
                raise ValueError(f"{name} must lie in [1, inf], got {v}")


def besov_norm(
    f: SpectralField, spec: BesovSpec, partition: DyadicPartition | None = None
) -> float:
    """l^q over resolved j of 2^(j s) ||block_j f||_{L^p}."""
    partition = partition or build_partition(f.grid)
    if spec.homogeneous and not f.is_zero_mean():
        raise sp.MeanModeError("homogeneous Besov norm needs a zero-mean field")
    j_lo = partition.j_min if spec.homogeneous else -1
    terms = []
    for j in range(j_lo, partition.j_max + 1):
        block = dyadic_block(f, j, partition, homogeneous=spec.homogeneous)
        terms.append(2.0 ** (j * spec.s) * sp.lp_norm(block, spec.p))
    terms = np.asarray(terms)
    if np.isinf(spec.q):
        return float(terms.max())
    return float((terms**spec.q).sum() ** (1.0 / spec.q))


def sobolev_norm(f: SpectralField, s: float, homogeneous: bool = True) -> float:
    """Exact multiplier form: |xi|^s, or (1 + |xi|^2)^(s/2) with the mean."""
    g = f.grid
    if homogeneous:
        if s < 0 and not f.is_zero_mean():
            raise sp.MeanModeError("negative-order homogeneous norm needs zero mean")
        weight = sp.symbol_power(g, s)
        weight = np.where(g.ksq > 0, weight, 0.0)
    else:
        weight = (1.0 + g.ksq) ** s
    return math.sqrt(sp.weighted_l2_norm_sq(f, weight))


def vector_sobolev_norm(fields, s: float, homogeneous: bool = True) -> float:
    return math.sqrt(sum(sobolev_norm(F, s, homogeneous) ** 2 for F in fields))


# --- paraproducts ------------------------------------------------------------


def bony_decompose(f: SpectralField, g: SpectralField, partition: DyadicPartition | None = None):
    """Low-high, high-high, and high-low parts of the product fg:

        fg = T(f,g) + R(f,g) + T(g,f)
        T(f,g) = sum_j S_{j-1} f block_j g,
        R(f,g) = sum_{|i|<=1} sum_j block_j f block_{j+i} g

    with S_{j-1} = sum_{l <= j-2} block_l.  All block products are formed
    on a 2x padded grid so the three parts (and their sum) are alias-free;
    the returned RealFields live on that padded grid.
    """
    sp._check_same_grid(f, g)
    partition = partition or build_partition(f.grid)
    for name, F in (("f", f), ("g", g)):
        if not F.is_zero_mean():
            raise sp.MeanModeError(f"{name} must be zero-mean for the paraproduct split")
    fine = sp.TorusGrid(2 * f.grid.n)
    js = list(partition.resolved())
    f_blocks = [sp.oversampled_values(dyadic_block(f, j, partition), 2) for j in js]
    g_blocks = [sp.oversampled_values(dyadic_block(g, j, partition), 2) for j in js]

    def paraproduct(lows, highs):
        acc = np.zeros_like(lows[0])
        running = np.zeros_like(lows[0])
        for idx in range(len(js)):
            # running holds sum_{l <= j-2} at the time block j is consumed
            if idx >= 2:
                running += lows[idx - 2]
            acc += running * highs[idx]
        return acc

    t_fg = paraproduct(f_blocks, g_blocks)
    t_gf = paraproduct(g_blocks, f_blocks)
    r_fg = np.zeros_like(t_fg)
    for a in range(len(js)):
        for b in (a - 1, a, a + 1):
            if 0 <= b < len(js):
                r_fg += f_blocks[a] * g_blocks[b]
    return (
        sp.RealField(fine, t_fg),
        sp.RealField(fine, r_fg),
        sp.RealField(fine, t_gf),
    )


def product_estimate_ratio(f: SpectralField, g: SpectralField, sigma1: float, sigma2: float) -> float:
    """||fg||_{H^dot(s1+s2-1)} / (||f||_{H^dot s1} ||g||_{H^dot s2}) for
    s1, s2 < 1 with s1 + s2 > 0; zero when f or g vanishes."""
    if not (sigma1 < 1.0 and sigma2 < 1.0 and sigma1 + sigma2 > 0.0):
        raise ValueError(
            f"need sigma1, sigma2 < 1 and sigma1 + sigma2 > 0, got ({sigma1}, {sigma2})"
        )
    sp._check_same_grid(f, g)
    for name, F in (("f", f), ("g", g)):
        if not F.is_zero_mean():
            raise sp.MeanModeError(f"{name} must be zero-mean")
    denom = sobolev_norm(f, sigma1) * sobolev_norm(g, sigma2)
    if denom == 0.0:
        return 0.0
    n = f.grid.n
    bf, bg = sp.active_band(f, 1e-13), sp.active_band(g, 1e-13)
    factor = 2
    while factor * n // 2 - 1 < bf + bg:
        factor *= 2
    fine = sp.TorusGrid(factor * n)
    prod = sp.forward(
        sp.RealField(fine, sp.oversampled_values(f, factor) * sp.oversampled_values(g, factor))
    )
    num = sobolev_norm(sp.zero_mean(prod), sigma1 + sigma2 - 1.0)
    return num / denom


# --- localized inequalities --------------------------------------------------


@dataclass(frozen=True)
class GradientLogReport:
    """Sup-gradient bound diagnostics: the ratio against the logarithmic
    bracket, and the low/middle/high block split behind it."""

    ratio: float
    grad_sup: float
    l2_u: float
    linf_w: float
    hs_u: float
    n_split: int
    term_low: float
    term_mid: float
    term_high: float
    high_tail_bound: float


def log_inequality_ratio(
    w: SpectralField,
    s: float,
    partition: DyadicPartition | None = None,
    include_split: bool = True,
) -> GradientLogReport:
    """||grad u||_inf against ||u||_2 + ||w||_inf log2(2 + ||u||_{H^s}) + 1
    for the divergence-free u with curl u = w; requires s > 2.

    The split reports sup norms of the blocked gradient: the first
    `n_split` dyadic blocks (each controlled by ||w||_inf) and the tail
    (controlled by 2^(n_split (2-s)) ||u||_{H^s}), with
    n_split = ceil(log2(2 + ||u||_{H^s}) / (s - 2)) clamped to the
    resolved range.
    """
    if s <= 2.0:
        raise ValueError(f"regularity s must exceed 2, got {s}")
    partition = partition or build_partition(w.grid)
    if not w.is_zero_mean():
        raise sp.MeanModeError("vorticity must be zero-mean")
    u1, u2 = sp.biot_savart(w)
    grads = sp.velocity_gradient(w)
    grad_sup = sp.pointwise_magnitude_sup(grads, 4)
    l2_u = math.sqrt(sp.l2_norm_sq(u1) + sp.l2_norm_sq(u2))
    hs_u = vector_sobolev_norm((u1, u2), s, homogeneous=False)
    linf_w = sp.lp_norm(w, np.inf, 4)
    denom = l2_u + linf_w * math.log2(2.0 + hs_u) + 1.0
    ratio = grad_sup / denom

    n_split = math.ceil(math.log2(2.0 + hs_u) / (s - 2.0))
    n_split = min(max(n_split, 1), partition.j_max)
    term_mid = term_high = 0.0
    if include_split:
        for j in partition.resolved():
            mult = partition.multiplier(j)
            blocked = tuple(
                SpectralField(w.grid, mult * c.coef, c.dealiased) for c in grads
            )
            block_sup = sp.pointwise_magnitude_sup(blocked, 4)
            if j < n_split:
                term_mid += block_sup
            else:
                term_high += block_sup
    return GradientLogReport(
        ratio=ratio,
        grad_sup=grad_sup,
        l2_u=l2_u,
        linf_w=linf_w,
        hs_u=hs_u,
        n_split=n_split,
        term_low=l2_u,
        term_mid=term_mid,
        term_high=term_high,
        high_tail_bound=2.0 ** (n_split * (2.0 - s)) * hs_u,
    )


@dataclass(frozen=True)
class BernsteinRatios:
    l2: float
    linf: float


def bernstein_ratio(f: SpectralField, j: int, k: int, support: str = "annulus") -> BernsteinRatios:
    """sup_{|gamma| = k} ||d^gamma f||_p / (2^(jk) ||f||_p) for p = 2 and
    p = inf.

    `support` declares what the caller built: "annulus" requires the
    active spectrum inside 2^(j-1) <= |xi| <= 2^(j+1) (two-sided bounds
    apply), "ball" inside |xi| <= 2^j (upper bound only).
    """
    if k < 0:
        raise ValueError("derivative order k must be nonnegative")
    if support not in ("annulus", "ball"):
        raise ValueError(f"support must be 'annulus' or 'ball', got {support!r}")
    g = f.grid
    mags = np.abs(f.coef)
    top = mags.max()
    if top == 0.0:
        raise ValueError("zero input")
    active = mags > 1e-13 * top
    radius = g.kmag[active]
    if support == "annulus":
        if radius.min() < 2.0 ** (j - 1) or radius.max() > 2.0 ** (j + 1):
            raise ValueError(f"spectrum not supported in the dyadic annulus at scale 2^{j}")
    else:
        if radius.max() > 2.0**j:
            raise ValueError(f"spectrum not supported in the ball of radius 2^{j}")
    if k == 0:
        return BernsteinRatios(l2=1.0, linf=1.0)

    scale = 2.0 ** (j * k)
    sup2 = 0.0
    supinf = 0.0
    for k1 in range(k + 1):
        k2 = k - k1
        weight = np.abs(g.kd1) ** k1 * np.abs(g.kd2) ** k2
        sup2 = max(sup2, math.sqrt(sp.weighted_l2_norm_sq(f, weight**2)))
        deriv = SpectralField(g, (1j * g.kd1) ** k1 * (1j * g.kd2) ** k2 * f.coef, f.dealiased)
        supinf = max(supinf, sp.lp_norm(deriv, np.inf, 4))
    return BernsteinRatios(
        l2=sup2 / (scale * sp.l2_norm(f)),
        linf=supinf / (scale * sp.lp_norm(f, np.inf, 4)),
    )
