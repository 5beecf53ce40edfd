"""Tests for the vorticity-current dynamics, stepping, and checkpoints."""

import numpy as np
import pytest

from mhd2d import checkpoint as ckpt
from mhd2d import dynamics as dyn
from mhd2d import spectral as sp


def ideal_config(n=64, **kw):
    base = dict(
        alpha=0.0, beta=0.0, nu=0.0, eta=0.0, n=n, dt=1e-3, t_end=0.0,
        output_every=10, init_kind="random-band", band=8, amplitude=1.0, seed=0,
    )
    base.update(kw)
    return dyn.SolverConfig(**base)


def random_state(n=64, band=12, seed=1, amp=1.0):
    g = sp.TorusGrid(n)
    rng = np.random.default_rng(seed)
    w = sp.random_band_field(g, rng, band, amp)
    j = sp.random_band_field(g, rng, band, amp)
    return dyn.MHDState(0.0, w, j)


class TestSolverConfig:
    def test_rejects_negative_exponents_and_coefficients(self):
        with pytest.raises(ValueError):
            ideal_config(beta=-1.0)
        with pytest.raises(ValueError):
            ideal_config(nu=-0.1)

    def test_nu_zero_requires_alpha_zero(self):
        with pytest.raises(ValueError, match="alpha"):
            ideal_config(nu=0.0, alpha=0.3)

    def test_unknown_integrator_rejected(self):
        with pytest.raises(ValueError, match="integrator"):
            ideal_config(integrator="euler")

    def test_band_capped_by_dealias_cutoff(self):
        with pytest.raises(ValueError, match="band"):
            ideal_config(n=64, band=22)

    def test_ideal_flags(self):
        cfg = ideal_config(nu=0.0, eta=1.0, beta=1.6)
        assert cfg.ideal_flags == {"nu_zero": True, "eta_zero": False}


class TestMHDState:
    def test_mean_mode_must_be_exactly_zero(self):
        g = sp.TorusGrid(16)
        c = np.zeros((16, 16), dtype=np.complex128)
        c[0, 0] = 1e-13
        with pytest.raises(sp.MeanModeError):
            dyn.MHDState(0.0, sp.SpectralField(g, c), sp.SpectralField.zeros(g))


class TestVorticityRHS:
    def test_zero_state_gives_zero_tendency(self):
        g = sp.TorusGrid(32)
        state = dyn.MHDState(0.0, sp.SpectralField.zeros(g), sp.SpectralField.zeros(g))
        dw, dj = dyn.vorticity_rhs(state)
        assert np.max(np.abs(dw.coef)) == 0.0
        assert np.max(np.abs(dj.coef)) == 0.0

    def test_parallel_shear_is_steady(self):
        # u = (sin x2, 0), b = 0: the advection of w = -cos x2 vanishes.
        g = sp.TorusGrid(64)
        w = sp.forward(sp.RealField.from_function(g, lambda x1, x2: -np.cos(x2)))
        state = dyn.MHDState(0.0, sp.zero_mean(sp.dealias(w)), sp.SpectralField.zeros(g))
        dw, dj = dyn.vorticity_rhs(state)
        scale = np.max(np.abs(w.coef))
        assert np.max(np.abs(dw.coef)) / scale < 1e-14
        assert np.max(np.abs(dj.coef)) / scale < 1e-14

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_curl_of_primitive_form(self, seed):
        state = random_state(n=64, band=12, seed=seed)
        cfg = ideal_config(n=64)
        dw, dj = dyn.vorticity_rhs(state)
        dp = dyn.primitive_rhs(dyn.primitive_from_state(state), cfg)
        cw = sp.curl(dp.u1, dp.u2)
        cj = sp.curl(dp.b1, dp.b2)
        assert np.max(np.abs(cw.coef - dw.coef)) / np.max(np.abs(dw.coef)) < 1e-10
        assert np.max(np.abs(cj.coef - dj.coef)) / np.max(np.abs(dj.coef)) < 1e-10

    def test_matches_curl_of_primitive_with_dissipation(self):
        state = random_state(n=64, band=12, seed=17)
        cfg = dyn.SolverConfig(alpha=0.7, beta=1.3, nu=0.4, eta=0.9, n=64, dt=1e-3, t_end=0.0)
        dw, dj = dyn.vorticity_rhs(state)
        dp = dyn.primitive_rhs(dyn.primitive_from_state(state), cfg)
        lin_w = cfg.nu * sp.symbol_power(state.grid, cfg.alpha) * state.w.coef
        lin_j = cfg.eta * sp.symbol_power(state.grid, cfg.beta) * state.j.coef
        cw = sp.curl(dp.u1, dp.u2)
        cj = sp.curl(dp.b1, dp.b2)
        assert np.max(np.abs(cw.coef + lin_w - dw.coef)) / np.max(np.abs(dw.coef)) < 1e-10
        assert np.max(np.abs(cj.coef + lin_j - dj.coef)) / np.max(np.abs(dj.coef)) < 1e-10

    def test_primitive_tendency_is_divergence_free(self):
        state = random_state(n=64, band=12, seed=23)
        dp = dyn.primitive_rhs(dyn.primitive_from_state(state), ideal_config(n=64))
        assert dp.divergence_defect() < 1e-13


class TestLerayProjection:
    def test_gradient_field_projects_to_zero(self):
        g = sp.TorusGrid(64)
        phi = sp.random_band_field(g, np.random.default_rng(2), band=12)
        v1 = sp.partial_derivative(phi, 1)
        v2 = sp.partial_derivative(phi, 2)
        p1, p2 = dyn.leray_project(v1, v2)
        scale = np.max(np.abs(v1.coef))
        assert np.max(np.abs(p1.coef)) / scale < 1e-13
        assert np.max(np.abs(p2.coef)) / scale < 1e-13

    def test_divergence_free_field_unchanged(self):
        g = sp.TorusGrid(64)
        w = sp.random_band_field(g, np.random.default_rng(3), band=12)
        u1, u2 = sp.biot_savart(w)
        p1, p2 = dyn.leray_project(u1, u2)
        scale = np.max(np.abs(u1.coef))
        assert np.max(np.abs(p1.coef - u1.coef)) / scale < 1e-13

    def test_idempotent_and_divergence_free(self):
        g = sp.TorusGrid(64)
        rng = np.random.default_rng(4)
        v1 = sp.random_band_field(g, rng, band=12)
        v2 = sp.random_band_field(g, rng, band=12)
        p1, p2 = dyn.leray_project(v1, v2)
        q1, q2 = dyn.leray_project(p1, p2)
        scale = np.max(np.abs(p1.coef))
        assert np.max(np.abs(q1.coef - p1.coef)) / scale < 1e-13
        assert np.max(np.abs(sp.divergence(p1, p2).coef)) / scale < 1e-13

    def test_mean_preserved(self):
        g = sp.TorusGrid(16)
        c = np.zeros((16, 16), dtype=np.complex128)
        c[0, 0] = 3.0 * 16**2
        p1, p2 = dyn.leray_project(sp.SpectralField(g, c), sp.SpectralField.zeros(g))
        assert p1.coef[0, 0] == 3.0 * 16**2


class TestStep:
    def test_zero_state_stays_zero(self):
        g = sp.TorusGrid(32)
        state = dyn.MHDState(0.0, sp.SpectralField.zeros(g), sp.SpectralField.zeros(g))
        out = dyn.step(state, ideal_config(n=32, dt=0.01))
        assert out.t == pytest.approx(0.01)
        assert np.max(np.abs(out.w.coef)) == 0.0

    def test_pure_diffusion_single_mode_is_exact(self):
        # Frozen u, single-mode j with |xi| = 2, eta = 1, beta = 1.
        g = sp.TorusGrid(64)
        jc = np.zeros((64, 64), dtype=np.complex128)
        jc[2, 0] = jc[-2, 0] = 0.5 * 64**2
        state = dyn.MHDState(0.0, sp.SpectralField.zeros(g), sp.SpectralField(g, jc, True))
        cfg = dyn.SolverConfig(alpha=0.0, beta=1.0, nu=0.0, eta=1.0, n=64, dt=0.01, t_end=0.0)
        out = dyn.step(state, cfg)
        assert out.j.coef[2, 0] == 0.5 * 64**2 * np.exp(-4 * 0.01)
        assert np.max(np.abs(out.w.coef)) == 0.0

    def test_fourth_order_self_convergence(self):
        def final(dt):
            cfg = dyn.SolverConfig(
                alpha=1.0, beta=1.0, nu=0.02, eta=0.02, n=64, dt=dt, t_end=0.1,
                output_every=10**9, init_kind="random-band", band=8, amplitude=2.0, seed=9,
            )
            state = dyn.initial_state(cfg)
            for state, _ in dyn.run(cfg, state):
                pass
            return state

        s1, s2, s3 = final(4e-3), final(2e-3), final(1e-3)
        e1 = np.max(np.abs(s1.w.coef - s2.w.coef))
        e2 = np.max(np.abs(s2.w.coef - s3.w.coef))
        assert e1 / e2 == pytest.approx(16.0, rel=0.2)

    def test_blowup_raises_simulation_abort(self):
        state = random_state(n=32, band=10, seed=5, amp=300.0)
        cfg = ideal_config(n=32, dt=0.5)
        with pytest.raises(dyn.SimulationAbort):
            s = state
            for _ in range(40):
                s = dyn.step(s, cfg)


class TestRun:
    def test_t_end_zero_emits_only_initial_record(self):
        cfg = ideal_config(t_end=0.0)
        out = list(dyn.run(cfg, dyn.initial_state(cfg)))
        assert len(out) == 1
        assert out[0][1].t == 0.0

    def test_cadence_and_final_sample(self):
        cfg = ideal_config(t_end=0.025, dt=1e-3, output_every=10)
        recs = [r for _, r in dyn.run(cfg, dyn.initial_state(cfg))]
        assert [round(r.t, 6) for r in recs] == [0.0, 0.01, 0.02, 0.025]

    def test_deterministic_given_config_and_seed(self):
        cfg = ideal_config(t_end=0.02, dt=1e-3, seed=33)
        a = [s for s, _ in dyn.run(cfg, dyn.initial_state(cfg))]
        b = [s for s, _ in dyn.run(cfg, dyn.initial_state(cfg))]
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.w.coef, sb.w.coef)
            assert np.array_equal(sa.j.coef, sb.j.coef)

    def test_mean_modes_stay_exactly_zero(self):
        cfg = ideal_config(t_end=0.05, dt=1e-3, amplitude=2.0, seed=8)
        for state, _ in dyn.run(cfg, dyn.initial_state(cfg)):
            assert state.w.coef[0, 0] == 0.0
            assert state.j.coef[0, 0] == 0.0

    def test_hermitian_symmetry_maintained(self):
        cfg = ideal_config(t_end=0.02, dt=1e-3, amplitude=2.0, seed=8)
        for state, _ in dyn.run(cfg, dyn.initial_state(cfg)):
            assert state.w.hermitian_defect() == 0.0

    def test_cfl_violation_aborts_with_state(self):
        cfg = ideal_config(t_end=1.0, dt=0.5, amplitude=5.0, seed=2)
        with pytest.raises(dyn.SimulationAbort) as info:
            list(dyn.run(cfg, dyn.initial_state(cfg)))
        assert info.value.state is not None
        assert "step bound" in info.value.reason

    def test_ideal_energy_conserved(self):
        cfg = ideal_config(t_end=0.5, dt=2e-3, output_every=50, amplitude=1.0, seed=4)
        recs = [r for _, r in dyn.run(cfg, dyn.initial_state(cfg))]
        e = [r.energy_u + r.energy_b for r in recs]
        assert max(abs(x - e[0]) for x in e) / e[0] < 1e-10


class TestMakeInitial:
    def test_zero_amplitude_gives_zero_state(self):
        g = sp.TorusGrid(32)
        st = dyn.make_initial(g, "random-band", seed=1, amplitude=0.0, band=5)
        assert np.max(np.abs(st.w.coef)) == 0.0

    def test_orszag_tang_norms_match_closed_form(self):
        g = sp.TorusGrid(64)
        a = 0.8
        st = dyn.make_initial(g, "orszag-tang", amplitude=a)
        # w = a(cos x1 + cos x2): ||w||^2 = 4 pi^2 a^2
        assert sp.l2_norm(st.w) == pytest.approx(2 * np.pi * a, rel=1e-13)
        # j = a(2cos 2x1 + cos x2): ||j||^2 = 10 pi^2 a^2
        assert sp.l2_norm(st.j) == pytest.approx(np.pi * np.sqrt(10) * a, rel=1e-13)
        x1, x2 = g.coordinates()
        w_phys = sp.inverse(st.w).values
        assert np.max(np.abs(w_phys - a * (np.cos(x1) + np.cos(x2)))) < 1e-12

    def test_same_seed_is_bit_identical(self):
        g = sp.TorusGrid(32)
        a = dyn.make_initial(g, "random-band", seed=7, band=5)
        b = dyn.make_initial(g, "random-band", seed=7, band=5)
        assert np.array_equal(a.w.coef, b.w.coef)
        assert np.array_equal(a.j.coef, b.j.coef)

    def test_band_beyond_cutoff_rejected(self):
        g = sp.TorusGrid(32)
        with pytest.raises(ValueError, match="cutoff"):
            dyn.make_initial(g, "random-band", band=11)


class TestRescale:
    def test_lambda_one_is_identity(self):
        state = random_state(n=32, band=5)
        out = dyn.rescale(state, 1, 1.3)
        assert out.t == state.t
        assert np.array_equal(out.w.coef, state.w.coef)

    def test_single_mode_amplitude_law(self):
        # Velocity mode at (1,0) with amplitude a moves to (2,0) with 2a,
        # i.e. the vorticity picks up the factor lambda^(2 gamma) = 4.
        g = sp.TorusGrid(64)
        wc = np.zeros((64, 64), dtype=np.complex128)
        wc[1, 0] = wc[-1, 0] = 64**2
        state = dyn.MHDState(0.25, sp.SpectralField(g, wc, True), sp.SpectralField.zeros(g))
        out = dyn.rescale(state, 2, 1.0)
        assert out.w.coef[2, 0] == 4.0 * 64**2
        assert out.w.coef[1, 0] == 0.0
        assert out.t == 0.25 / 4.0

    def test_overflowing_spectrum_rejected(self):
        state = random_state(n=32, band=10)
        with pytest.raises(ValueError, match="resolution"):
            dyn.rescale(state, 2, 1.0)

    def test_two_path_covariance(self):
        # evolve->rescale against rescale->evolve with (dt, t) / lambda^2.
        n, lam = 64, 2
        cfg_a = dyn.SolverConfig(
            alpha=1.0, beta=1.0, nu=1.0, eta=1.0, n=n, dt=2e-3, t_end=0.2,
            output_every=10**9, init_kind="random-band", band=5, amplitude=1.0, seed=12,
        )
        init = dyn.initial_state(cfg_a)
        for state_a, _ in dyn.run(cfg_a, init):
            pass
        path_a = dyn.rescale(state_a, lam, 1.0, tail_tol=1e-6)
        cfg_b = dyn.SolverConfig(
            alpha=1.0, beta=1.0, nu=1.0, eta=1.0, n=n, dt=2e-3 / lam**2,
            t_end=0.2 / lam**2, output_every=10**9, init_kind="random-band",
            band=5, amplitude=1.0, seed=12,
        )
        for state_b, _ in dyn.run(cfg_b, dyn.rescale(init, lam, 1.0)):
            pass
        assert path_a.t == pytest.approx(state_b.t, rel=1e-12)
        for a, b in ((path_a.w, state_b.w), (path_a.j, state_b.j)):
            err = np.max(np.abs(a.coef - b.coef)) / np.max(np.abs(b.coef))
            assert err < 1e-6


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, tmp_path):
        state = random_state(n=32, band=9, seed=91, amp=1.7)
        cfg = dyn.SolverConfig(alpha=0.3, beta=1.4, nu=0.1, eta=1.0, n=32, dt=1e-3, t_end=0.0)
        path = tmp_path / "state.mhd2"
        ckpt.write_checkpoint(path, state, cfg)
        loaded = ckpt.read_checkpoint(path)
        assert loaded.state.t == state.t
        assert loaded.alpha == cfg.alpha and loaded.eta == cfg.eta
        assert np.array_equal(loaded.state.w.coef, state.w.coef)
        assert np.array_equal(loaded.state.j.coef, state.j.coef)
        # byte-stable on rewrite
        path2 = tmp_path / "state2.mhd2"
        ckpt.write_checkpoint(path2, loaded.state, cfg)
        assert path.read_bytes() == path2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.mhd2"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ckpt.CheckpointFormatError):
            ckpt.read_checkpoint(path)

    def test_truncated_payload_rejected(self, tmp_path):
        state = random_state(n=32, band=9)
        cfg = ideal_config(n=32)
        path = tmp_path / "cut.mhd2"
        ckpt.write_checkpoint(path, state, cfg)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ckpt.CheckpointFormatError):
            ckpt.read_checkpoint(path)
