"""2D MHD dynamics with fractional dissipation, in vorticity-current form.

The evolved state is the pair (w, j) = (curl u, curl b); velocities are
recovered through Biot-Savart, which eliminates the pressure and keeps
both fields divergence-free by construction.  The momentum/induction form
is retained only as a cross-check oracle for the curl system, bracket
term included.

Time stepping is integrating-factor RK4: the stiff linear terms
nu*Lambda^(2a) w and eta*Lambda^(2b) j are integrated exactly by
exp(-nu|xi|^(2a) dt) / exp(-eta|xi|^(2b) dt), the nonlinear terms by the
classical 4-stage rule.  Nonlinear products are formed in physical space
from spectral derivatives and dealiased with the 2/3 rule afterwards, so
the retained band is alias-free.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from . import spectral as sp
from .spectral import SpectralField, TorusGrid

INTEGRATOR_TAG = "if-rk4"
INIT_KINDS = ("orszag-tang", "random-band")


class SimulationAbort(RuntimeError):
    """Raised when a run must stop: instability, NaN/Inf, or a violated
    step-size bound.  Carries the time and the last valid state."""

    def __init__(self, t, reason, state=None):
        super().__init__(f"simulation aborted at t={t:.6g}: {reason}")
        self.t = t
        self.reason = reason
        self.state = state


@dataclass(frozen=True)
class SolverConfig:
    """Exponents, coefficients, resolution, and stepping parameters."""

    alpha: float
    beta: float
    nu: float
    eta: float
    n: int = 256
    dt: float = 2.5e-4
    t_end: float = 1.0
    output_every: int = 40
    integrator: str = INTEGRATOR_TAG
    seed: int = 0
    init_kind: str = "orszag-tang"
    amplitude: float = 1.0
    band: int = 8

    def __post_init__(self):
        if self.nu < 0 or self.eta < 0:
            raise ValueError("coefficients nu, eta must be nonnegative")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("exponents alpha, beta must be nonnegative")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("exponents must be finite")
        if self.nu == 0.0 and self.alpha != 0.0:
            raise ValueError("nu = 0 requires alpha recorded as 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.output_every < 1:
            raise ValueError("output_every must be a positive integer")
        if self.integrator != INTEGRATOR_TAG:
            raise ValueError(f"unknown integrator {self.integrator!r}; only {INTEGRATOR_TAG!r}")
        if self.init_kind not in INIT_KINDS:
            raise ValueError(f"init_kind must be one of {INIT_KINDS}, got {self.init_kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        TorusGrid(self.n)  # validates the resolution
        if self.band < 1 or self.band > self.n // 3:
            raise ValueError(f"band must lie in [1, n/3], got {self.band}")

    @property
    def ideal_flags(self):
        return {"nu_zero": self.nu == 0.0, "eta_zero": self.eta == 0.0}


@dataclass(frozen=True)
class MHDState:
    """(vorticity, current) pair at time t; both zero-mean and dealiased."""

    t: float
    w: SpectralField
    j: SpectralField

    def __post_init__(self):
        sp._check_same_grid(self.w, self.j)
        for name, f in (("w", self.w), ("j", self.j)):
            if f.coef[0, 0] != 0.0:
                raise sp.MeanModeError(f"{name} must have an exactly zero mean mode")

    @property
    def grid(self) -> TorusGrid:
        return self.w.grid


@functools.lru_cache(maxsize=32)
def _cached_grid(n: int) -> TorusGrid:
    return TorusGrid(n)


def _half(arr, n):
    return arr[:, : n // 2 + 1]


def _nonlinear_half(grid: TorusGrid, wc, jc, t: float):
    """Non-stiff right-hand side of the curl system on half spectra.

    dw = -(u.grad)w + (b.grad)j
    dj = -(u.grad)j + (b.grad)w + 2[d1b1 (d1u2 + d2u1) - d1u1 (d1b2 + d2b1)]

    Products are formed pointwise in physical space and 2/3-dealiased, so
    the outputs are alias-free, zero-mean half spectra.
    """
    n = grid.n
    kd1 = _half(grid.kd1, n)
    kd2 = _half(grid.kd2, n)
    inv = _half(grid.inv_ksq, n)
    mask = _half(grid.dealias_mask, n)

    def ir(c):
        return np.fft.irfft2(c, s=(n, n))

    u1h = 1j * kd2 * inv * wc
    u2h = -1j * kd1 * inv * wc
    b1h = 1j * kd2 * inv * jc
    b2h = -1j * kd1 * inv * jc

    u1, u2, b1, b2 = ir(u1h), ir(u2h), ir(b1h), ir(b2h)
    w_1, w_2 = ir(1j * kd1 * wc), ir(1j * kd2 * wc)
    j_1, j_2 = ir(1j * kd1 * jc), ir(1j * kd2 * jc)
    d1u1, d1u2, d2u1 = ir(1j * kd1 * u1h), ir(1j * kd1 * u2h), ir(1j * kd2 * u1h)
    d1b1, d1b2, d2b1 = ir(1j * kd1 * b1h), ir(1j * kd1 * b2h), ir(1j * kd2 * b1h)

    dw_phys = -(u1 * w_1 + u2 * w_2) + (b1 * j_1 + b2 * j_2)
    bracket = 2.0 * (d1b1 * (d1u2 + d2u1) - d1u1 * (d1b2 + d2b1))
    dj_phys = -(u1 * j_1 + u2 * j_2) + (b1 * w_1 + b2 * w_2) + bracket

    if not (np.isfinite(dw_phys).all() and np.isfinite(dj_phys).all()):
        raise SimulationAbort(t, "non-finite value in a nonlinear product")

    dw = np.where(mask, np.fft.rfft2(dw_phys), 0.0)
    dj = np.where(mask, np.fft.rfft2(dj_phys), 0.0)
    dw[0, 0] = 0.0
    dj[0, 0] = 0.0
    return dw, dj


def vorticity_rhs(state: MHDState):
    """Non-stiff part of the curl-system tendency as spectral fields."""
    g = state.grid
    n = g.n
    dw, dj = _nonlinear_half(g, _half(state.w.coef, n), _half(state.j.coef, n), state.t)
    return (
        SpectralField(g, sp._hermitian_extend(dw, n), True),
        SpectralField(g, sp._hermitian_extend(dj, n), True),
    )


@functools.lru_cache(maxsize=16)
def _integrating_factors(n, dt, nu, alpha, eta, beta):
    """Half-spectrum exp(-nu|xi|^(2a) dt/2), its square, and the same for
    (eta, beta); exact linear flow over one step and half step."""
    grid = _cached_grid(n)
    lam_w = nu * _half(sp.symbol_power(grid, alpha), n)
    lam_j = eta * _half(sp.symbol_power(grid, beta), n)
    return (
        np.exp(-0.5 * dt * lam_w),
        np.exp(-dt * lam_w),
        np.exp(-0.5 * dt * lam_j),
        np.exp(-dt * lam_j),
    )


def step(state: MHDState, config: SolverConfig, dt: float | None = None) -> MHDState:
    """Advance one step of integrating-factor RK4."""
    g = state.grid
    if g.n != config.n:
        raise sp.GridMismatchError(f"state grid n={g.n} != config n={config.n}")
    h = float(config.dt if dt is None else dt)
    ewh, ewf, ejh, ejf = _integrating_factors(
        g.n, h, float(config.nu), float(config.alpha), float(config.eta), float(config.beta)
    )
    n = g.n
    wc = _half(state.w.coef, n)
    jc = _half(state.j.coef, n)
    t = state.t

    k1w, k1j = _nonlinear_half(g, wc, jc, t)
    k2w, k2j = _nonlinear_half(g, ewh * (wc + 0.5 * h * k1w), ejh * (jc + 0.5 * h * k1j), t)
    k3w, k3j = _nonlinear_half(g, ewh * wc + 0.5 * h * k2w, ejh * jc + 0.5 * h * k2j, t)
    k4w, k4j = _nonlinear_half(g, ewf * wc + h * ewh * k3w, ejf * jc + h * ejh * k3j, t)

    new_w = ewf * wc + (h / 6.0) * (ewf * k1w + 2.0 * ewh * (k2w + k3w) + k4w)
    new_j = ejf * jc + (h / 6.0) * (ejf * k1j + 2.0 * ejh * (k2j + k3j) + k4j)

    out = MHDState(
        t=t + h,
        w=SpectralField(g, sp._hermitian_extend(new_w, n), True),
        j=SpectralField(g, sp._hermitian_extend(new_j, n), True),
    )
    old_norm = sp.l2_norm(state.w)
    if old_norm > 0.0 and sp.l2_norm(out.w) > 10.0 * old_norm:
        raise SimulationAbort(t, "vorticity L2 norm grew more than 10x in one step", state)
    return out


def advective_dt_bound(state: MHDState, safety: float = 0.5) -> float:
    """safety * (grid spacing) / max(||u||_inf, ||b||_inf) on the
    collocation grid; inf when the state is at rest."""
    g = state.grid
    n = g.n
    u1, u2 = sp.biot_savart(state.w)
    b1, b2 = sp.biot_savart(state.j)
    umax = np.sqrt(
        sp._inverse_array(g, u1.coef) ** 2 + sp._inverse_array(g, u2.coef) ** 2
    ).max()
    bmax = np.sqrt(
        sp._inverse_array(g, b1.coef) ** 2 + sp._inverse_array(g, b2.coef) ** 2
    ).max()
    vmax = max(umax, bmax)
    if vmax == 0.0:
        return np.inf
    return safety * g.spacing / vmax


def run(config: SolverConfig, init: MHDState):
    """Generator of (state snapshot, DiagnosticsRecord) every
    config.output_every steps (plus the initial and final samples).

    The cumulative dissipation integrals are accumulated by the trapezoid
    rule at every step, so the energy budget closes to the stepper's
    accuracy regardless of the output cadence.  Deterministic given
    (config, init).  Step aborts propagate with the last valid state
    attached.
    """
    if init.grid.n != config.n:
        raise sp.GridMismatchError(f"initial state n={init.grid.n} != config n={config.n}")
    state = init
    integrals = np.zeros(3)
    g_prev = np.array(diagnostics.budget_integrand(state, config))
    yield state, diagnostics.compute_record(state, config, integrals)

    eps = 1e-9 * config.dt
    step_idx = 0
    while config.t_end - state.t > eps:
        if step_idx % config.output_every == 0:
            bound = advective_dt_bound(state)
            if config.dt > bound:
                raise SimulationAbort(
                    state.t, f"advective step bound violated: dt={config.dt:g} > {bound:g}", state
                )
        h = min(config.dt, config.t_end - state.t)
        try:
            state = step(state, config, h)
        except SimulationAbort as err:
            if err.state is None:
                err.state = state
            raise
        g_new = np.array(diagnostics.budget_integrand(state, config))
        integrals += 0.5 * h * (g_prev + g_new)
        g_prev = g_new
        step_idx += 1
        if step_idx % config.output_every == 0 or config.t_end - state.t <= eps:
            yield state, diagnostics.compute_record(state, config, integrals)


# --- initial data ------------------------------------------------------------


def make_initial(
    grid: TorusGrid,
    kind: str,
    seed: int = 0,
    amplitude: float = 1.0,
    band: int = 8,
) -> MHDState:
    """Zero-mean, dealiased initial (w, j), reproducible from the seed.

    orszag-tang: u = a(-sin x2, sin x1), b = a(-sin x2, sin 2x1), i.e.
    w = a(cos x1 + cos x2) and j = a(2 cos 2x1 + cos x2).
    random-band: independent noise for w and j confined to 1 <= |xi| <= band,
    each normalized to ||.||_L2 = amplitude.
    """
    if kind not in INIT_KINDS:
        raise ValueError(f"kind must be one of {INIT_KINDS}, got {kind!r}")
    if band > grid.dealias_cutoff:
        raise ValueError(f"band {band} exceeds the dealias cutoff {grid.dealias_cutoff}")
    n = grid.n
    if kind == "orszag-tang":
        wc = np.zeros((n, n), dtype=np.complex128)
        jc = np.zeros((n, n), dtype=np.complex128)
        half_amp = 0.5 * amplitude * n**2
        wc[1, 0] = wc[-1, 0] = half_amp
        wc[0, 1] = wc[0, -1] = half_amp
        jc[2, 0] = jc[-2, 0] = amplitude * n**2
        jc[0, 1] = jc[0, -1] = half_amp
        w = SpectralField(grid, wc, True)
        j = SpectralField(grid, jc, True)
    else:
        rng = np.random.default_rng(seed)
        w = sp.random_band_field(grid, rng, band, amplitude)
        j = sp.random_band_field(grid, rng, band, amplitude)
    return MHDState(t=0.0, w=w, j=j)


def initial_state(config: SolverConfig) -> MHDState:
    return make_initial(
        _cached_grid(config.n), config.init_kind, config.seed, config.amplitude, config.band
    )


def rescale(state: MHDState, lam: int, gamma: float, tail_tol: float = 0.0) -> MHDState:
    """Dilation xi -> lam*xi with amplitude factor lam^(2*gamma) on (w, j)
    and time label t -> t / lam^(2*gamma); the lattice image of
    u_lam(x, t) = lam^(2*gamma - 1) u(lam x, lam^(2*gamma) t).

    lam must be a positive integer so the dilation preserves periodicity.
    Modes whose dilated image leaves the dealiased band must carry at most
    a `tail_tol` fraction of the spectral mass (0 = strict) or the
    rescaling errors out.
    """
    if lam != int(lam) or lam < 1:
        raise ValueError(f"lambda must be a positive integer, got {lam}")
    lam = int(lam)
    factor = float(lam) ** (2.0 * gamma)
    if lam == 1:
        return state
    g = state.grid
    n = g.n
    cutoff = g.dealias_cutoff
    k = np.fft.fftfreq(n, 1.0 / n).astype(int)
    keep = np.where(np.abs(k) * lam <= cutoff)[0]
    target = (k[keep] * lam) % n

    def dilate(F: SpectralField) -> SpectralField:
        total = float(np.sum(np.abs(F.coef) ** 2))
        box = F.coef[np.ix_(keep, keep)]
        kept = float(np.sum(np.abs(box) ** 2))
        if total > 0.0:
            dropped = np.sqrt(max(total - kept, 0.0) / total)
            if dropped > tail_tol:
                raise ValueError(
                    f"dilated spectrum exceeds resolution: {dropped:.3e} of the "
                    f"spectral mass lies beyond max|xi| = {cutoff}/{lam}"
                )
        out = np.zeros((n, n), dtype=np.complex128)
        out[np.ix_(target, target)] = factor * box
        return SpectralField(g, out, True)

    return MHDState(t=state.t / factor, w=dilate(state.w), j=dilate(state.j))


# --- primitive (velocity/magnetic) form: cross-check oracle ------------------


@dataclass(frozen=True)
class PrimitiveState:
    """Divergence-free (u, b) as spectral components."""

    u1: SpectralField
    u2: SpectralField
    b1: SpectralField
    b2: SpectralField

    def __post_init__(self):
        sp._check_same_grid(self.u1, self.u2, self.b1, self.b2)

    def divergence_defect(self) -> float:
        top = max(
            np.max(np.abs(f.coef)) for f in (self.u1, self.u2, self.b1, self.b2)
        )
        if top == 0.0:
            return 0.0
        return (
            max(
                np.max(np.abs(sp.divergence(self.u1, self.u2).coef)),
                np.max(np.abs(sp.divergence(self.b1, self.b2).coef)),
            )
            / top
        )


def primitive_from_state(state: MHDState) -> PrimitiveState:
    u1, u2 = sp.biot_savart(state.w)
    b1, b2 = sp.biot_savart(state.j)
    return PrimitiveState(u1, u2, b1, b2)


def leray_project(v1: SpectralField, v2: SpectralField):
    """Remove the gradient part: v - xi (xi.v)/|xi|^2; the mean is kept."""
    sp._check_same_grid(v1, v2)
    g = v1.grid
    d = (g.k1 * v1.coef + g.k2 * v2.coef) * g.inv_ksq
    flag = v1.dealiased and v2.dealiased
    return (
        SpectralField(g, v1.coef - g.k1 * d, flag),
        SpectralField(g, v2.coef - g.k2 * d, flag),
    )


def primitive_rhs(pstate: PrimitiveState, config: SolverConfig) -> PrimitiveState:
    """Tendency of the momentum/induction form:

    du = P[-(u.grad)u + (b.grad)b] - nu Lambda^(2a) u
    db = P[-(u.grad)b + (b.grad)u] - eta Lambda^(2b) b

    P is the Leray projection (analytically redundant on db; applied as a
    numerical safeguard).  Products are dealiased like the curl form.
    """
    g = pstate.u1.grid
    n = g.n
    mask = g.dealias_mask

    def ir(F):
        return sp._inverse_array(g, F.coef)

    u1, u2, b1, b2 = ir(pstate.u1), ir(pstate.u2), ir(pstate.b1), ir(pstate.b2)
    d = {}
    for name, F in (("u1", pstate.u1), ("u2", pstate.u2), ("b1", pstate.b1), ("b2", pstate.b2)):
        for ax in (1, 2):
            d[name, ax] = ir(sp.partial_derivative(F, ax))

    def advect(a1, a2, name):
        return a1 * d[name, 1] + a2 * d[name, 2]

    terms = {
        "u1": -advect(u1, u2, "u1") + advect(b1, b2, "b1"),
        "u2": -advect(u1, u2, "u2") + advect(b1, b2, "b2"),
        "b1": -advect(u1, u2, "b1") + advect(b1, b2, "u1"),
        "b2": -advect(u1, u2, "b2") + advect(b1, b2, "u2"),
    }
    out = {}
    for name, phys in terms.items():
        if not np.isfinite(phys).all():
            raise SimulationAbort(0.0, f"non-finite value in a nonlinear product ({name})")
        coef = np.where(mask, sp._forward_array(g, phys), 0.0)
        coef[0, 0] = 0.0
        out[name] = SpectralField(g, coef, True)

    du1, du2 = leray_project(out["u1"], out["u2"])
    db1, db2 = leray_project(out["b1"], out["b2"])
    visc = config.nu * sp.symbol_power(g, config.alpha)
    diff = config.eta * sp.symbol_power(g, config.beta)
    return PrimitiveState(
        u1=SpectralField(g, du1.coef - visc * pstate.u1.coef, True),
        u2=SpectralField(g, du2.coef - visc * pstate.u2.coef, True),
        b1=SpectralField(g, db1.coef - diff * pstate.b1.coef, True),
        b2=SpectralField(g, db2.coef - diff * pstate.b2.coef, True),
    )
