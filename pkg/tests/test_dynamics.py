import numpy as np
import pytest

import sheafkit as sk
from sheafkit import dynamics
from sheafkit.errors import NonMonotoneMap, StabilityViolation


def make_grid(n=512, length=16.0):
    return sk.Grid(n, length)


# --- grid and params ---------------------------------------------------------


def test_grid_validation():
    with pytest.raises(ValueError):
        sk.Grid(500, 16.0)  # not a power of two
    with pytest.raises(ValueError):
        sk.Grid(32, 16.0)  # below 64
    with pytest.raises(ValueError):
        sk.Grid(64, -1.0)
    g = sk.Grid(64, 8.0)
    assert g.dx == 0.125
    assert len(g.x) == 64 and abs(g.x[0] + 4.0) < 1e-15


def test_hbar_sigma_relation():
    g = make_grid(64, 8.0)
    p = sk.physical_params(g, mass=2.0, sigma=0.5)
    assert p.hbar == 1.0
    # consistent pair accepted
    sk.physical_params(g, mass=2.0, sigma=0.5, hbar=1.0)
    with pytest.raises(ValueError):
        sk.physical_params(g, mass=2.0, sigma=0.5, hbar=0.9)


def test_lambda_range_enforced():
    g = make_grid(64, 8.0)
    with pytest.raises(ValueError):
        sk.physical_params(g, lam=1.5)
    with pytest.raises(ValueError):
        sk.physical_params(g, lam=-0.1)


def test_potential_shape_checked():
    g = make_grid(64, 8.0)
    with pytest.raises(ValueError):
        sk.physical_params(g, potential=np.zeros(32))


# --- polar form ----------------------------------------------------------------


def test_polar_uniform_state():
    g = make_grid()
    p = sk.physical_params(g)
    rho = np.full(g.n_points, 1.0 / g.length)
    psi = sk.polar_decompose(rho, np.zeros(g.n_points), p)
    assert np.allclose(psi.imag, 0)
    assert np.allclose(psi.real, np.sqrt(1.0 / g.length))


def test_polar_plane_wave_gaussian():
    g = make_grid()
    p = sk.physical_params(g)
    st = dynamics.gaussian_state(g, p, mu=0.0, sigma0=0.5, momentum=2.0)
    psi = sk.polar_decompose(st.rho, st.s, p)
    # |psi|^2 is the Gaussian; local wavenumber is momentum / hbar
    assert np.allclose(np.abs(psi) ** 2, st.rho)
    core = np.abs(g.x) < 1.0
    phase = np.unwrap(np.angle(psi[core]))
    k_local = np.gradient(phase, g.dx)
    assert np.allclose(k_local, 2.0, atol=1e-6)


def test_polar_round_trip():
    g = make_grid()
    p = sk.physical_params(g)
    rng = np.random.default_rng(12)
    # smooth random state, well above the floor
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * g.x / g.length)
    rho += 0.1 * np.real(np.fft.ifft(rng.normal(size=g.n_points) * (np.abs(g.k) < 3)))
    rho = np.clip(rho, 0.05, None)
    rho /= rho.sum() * g.dx
    s = 0.3 * np.cos(2 * np.pi * g.x / g.length)
    psi = sk.polar_decompose(rho, s, p)
    rho2, s2 = sk.polar_compose(psi, p)
    assert np.max(np.abs(rho2 - rho)) < 1e-12
    # S is defined modulo 2 pi hbar: compare after removing a global shift
    shift = np.round((s2 - s)[0] / (2 * np.pi * p.hbar)) * 2 * np.pi * p.hbar
    assert np.max(np.abs(s2 - s - shift)) < 1e-10


def test_phase_mask():
    g = make_grid()
    p = sk.physical_params(g)
    rho = dynamics.gaussian_density(g, 0.0, 0.3)
    mask = dynamics.phase_defined_mask(rho, p)
    assert mask.any() and not mask.all()


# --- quantum potential -----------------------------------------------------------


def test_quantum_potential_uniform_zero():
    g = make_grid()
    p = sk.physical_params(g)
    rho = np.full(g.n_points, 1.0 / g.length)
    for method in ("spectral", "fd"):
        q = sk.quantum_potential(rho, g, p, method=method)
        assert np.max(np.abs(q)) < 1e-9


def test_quantum_potential_gaussian_analytic():
    g = make_grid()
    p = sk.physical_params(g)
    sigma0 = 0.5
    rho = dynamics.gaussian_density(g, 0.0, sigma0)
    analytic = (p.hbar**2 / (2 * p.mass)) * (
        1.0 / (2 * sigma0**2) - g.x**2 / (4 * sigma0**4)
    )
    core = np.abs(g.x) < 2.0
    for method in ("spectral", "fd"):
        q = sk.quantum_potential(rho, g, p, method=method)
        assert np.max(np.abs(q - analytic)[core]) < 5e-3


def test_quantum_potential_fd_second_order():
    sigma0 = 0.5
    errs = {}
    for n in (512, 1024):
        g = sk.Grid(n, 16.0)
        p = sk.physical_params(g)
        rho = dynamics.gaussian_density(g, 0.0, sigma0)
        analytic = (p.hbar**2 / (2 * p.mass)) * (
            1.0 / (2 * sigma0**2) - g.x**2 / (4 * sigma0**4)
        )
        core = np.abs(g.x) < 2.0
        q = sk.quantum_potential(rho, g, p, method="fd")
        errs[n] = np.max(np.abs(q - analytic)[core])
    ratio = errs[512] / errs[1024]
    assert 3.0 < ratio < 5.0


def test_quantum_potential_finite_on_floored_tails():
    g = make_grid()
    p = sk.physical_params(g)
    rho = dynamics.gaussian_density(g, 0.0, 0.2)  # tails deep below the floor
    q = sk.quantum_potential(rho, g, p)
    assert np.all(np.isfinite(q))


# --- stepping --------------------------------------------------------------------


def test_stability_bound_enforced():
    g = make_grid()
    p = sk.physical_params(g)
    st = dynamics.gaussian_state(g, p, 0.0, 0.5)
    bad_dt = 0.3 * g.dx**2  # above the 0.2 dx^2 m/hbar default bound
    with pytest.raises(StabilityViolation):
        sk.step(st, bad_dt, p, g)
    with pytest.raises(StabilityViolation):
        sk.evolve(st, p, g, t_final=0.1, dt=bad_dt)


def test_step_advances_and_conserves_norm():
    g = make_grid()
    p = sk.physical_params(g, lam=1.0)
    st = dynamics.gaussian_state(g, p, 0.0, 0.5)
    st2 = sk.step(st, 1.5e-4, p, g)
    assert st2.time == pytest.approx(1.5e-4)
    assert abs(st2.rho.sum() * g.dx - 1.0) < 1e-10


def test_free_gaussian_width_law():
    g = make_grid()
    p = sk.physical_params(g, lam=1.0)
    sigma0 = 0.5
    st = dynamics.gaussian_state(g, p, 0.0, sigma0)
    recs, _ = sk.evolve(st, p, g, t_final=1.0, dt=1.5e-4, record_every=1000)
    for r in recs:
        expected = sigma0 * np.sqrt(1.0 + (p.hbar * r.time / (2 * p.mass * sigma0**2)) ** 2)
        assert abs(r.width - expected) / expected < 0.01


def test_lambda_zero_zero_momentum_static():
    g = make_grid()
    p = sk.physical_params(g, lam=0.0)
    st = dynamics.gaussian_state(g, p, 0.0, 0.5)
    recs, frames = sk.evolve(
        st, p, g, t_final=0.5, dt=1.5e-4, record_every=500, collect_frames=True
    )
    drift = max(np.max(np.abs(f - frames[0])) for f in frames)
    assert drift < 1e-6


def test_lambda_zero_rigid_transport():
    # with uniform momentum the lam=0 packet translates without spreading
    g = make_grid()
    p = sk.physical_params(g, lam=0.0)
    st = dynamics.gaussian_state(g, p, mu=-2.0, sigma0=0.5, momentum=1.0)
    recs, frames = sk.evolve(
        st, p, g, t_final=0.4, dt=1.6e-4, record_every=10**9, collect_frames=True
    )
    expected = dynamics.gaussian_density(g, -2.0 + 0.4, 0.5)
    assert np.max(np.abs(frames[-1] - expected)) < 1e-6
    assert abs(recs[-1].width - 0.5) < 1e-4


def test_lambda_one_equals_plain_linear_solver():
    g = make_grid()
    p = sk.physical_params(g, lam=1.0, potential=dynamics.harmonic_potential(g, 2.0))
    st = dynamics.gaussian_state(g, p, 0.5, 0.4)
    psi = sk.polar_decompose(st.rho, st.s, p)
    dt = 1.5e-4

    # independent plain split-step without any lambda machinery
    ref = psi.copy()
    kin = np.exp(-1j * p.hbar * g.k**2 * dt / (4 * p.mass))
    for _ in range(200):
        ref = np.fft.ifft(kin * np.fft.fft(ref))
        ref *= np.exp(-1j * p.potential * dt / p.hbar)
        ref = np.fft.ifft(kin * np.fft.fft(ref))

    cur = st
    for _ in range(200):
        cur = sk.step(cur, dt, p, g)
    rho_ref = np.abs(ref) ** 2
    assert np.max(np.abs(cur.rho - rho_ref)) < 1e-10


def test_step_loop_matches_evolve():
    # the public step() round-trips through polar form each call; that must
    # not disturb the density relative to evolve's internal complex loop
    g = make_grid()
    p = sk.physical_params(g, lam=0.6)
    st = dynamics.gaussian_state(g, p, 0.5, 0.4, momentum=0.8)
    dt = 1.5e-4
    cur = st
    for _ in range(50):
        cur = sk.step(cur, dt, p, g)
    _, frames = sk.evolve(st, p, g, t_final=50 * dt, dt=dt, record_every=10**9,
                          collect_frames=True)
    assert np.max(np.abs(cur.rho - frames[-1])) < 1e-9
    assert cur.time == pytest.approx(50 * dt)


def test_coherent_state_width_constant():
    g = make_grid()
    k_spring = 4.0
    omega = 2.0
    p = sk.physical_params(g, lam=1.0, potential=dynamics.harmonic_potential(g, k_spring))
    sig = np.sqrt(p.hbar / (2 * p.mass * omega))
    st = dynamics.gaussian_state(g, p, mu=1.0, sigma0=sig)
    period = 2 * np.pi / omega
    recs, _ = sk.evolve(st, p, g, t_final=period, dt=1.5e-4, record_every=500)
    widths = [r.width for r in recs]
    assert (max(widths) - min(widths)) / sig < 0.005


def test_norm_conservation_long_run():
    g = make_grid()
    for lam in (1.0, 0.3):
        p = sk.physical_params(g, lam=lam)
        st = dynamics.gaussian_state(g, p, 0.0, 0.5)
        recs, _ = sk.evolve(st, p, g, t_final=1.5, dt=1.5e-4, record_every=2500)
        for r in recs:
            assert abs(r.norm - 1.0) < 1e-8


def test_convergence_second_order_in_dt():
    # harmonic coherent state vs its analytic evolution; halving dt must
    # shrink the global density error about fourfold
    g = make_grid()
    k_spring = 4.0
    omega = 2.0
    pot = dynamics.harmonic_potential(g, k_spring)
    sig = np.sqrt(1.0 / (2 * omega))

    def err(dt):
        p = sk.physical_params(g, lam=1.0, potential=pot)
        st = dynamics.gaussian_state(g, p, mu=1.0, sigma0=sig)
        t_fin = 0.5
        _, frames = sk.evolve(st, p, g, t_final=t_fin, dt=dt, record_every=10**9,
                              collect_frames=True)
        mu_t = np.cos(omega * t_fin)
        ana = np.exp(-((g.x - mu_t) ** 2) / (2 * sig**2))
        ana /= ana.sum() * g.dx
        return np.max(np.abs(frames[-1] - ana))

    e1, e2 = err(1.6e-4), err(0.8e-4)
    assert 3.0 < e1 / e2 < 5.5


def test_observables_and_visibility_window():
    g = make_grid()
    rho = dynamics.gaussian_density(g, 1.0, 0.5)
    obs = sk.compute_observables(rho, g, time=2.0, window=(-0.5, 0.5))
    assert obs.time == 2.0
    assert abs(obs.norm - 1.0) < 1e-12
    assert abs(obs.mean_x - 1.0) < 1e-9
    assert abs(obs.width - 0.5) < 1e-3
    assert 0.0 <= obs.visibility <= 1.0
    with pytest.raises(ValueError):
        sk.compute_observables(rho, g, window=(7.91, 7.92))  # between grid points


def test_two_gaussian_state_symmetric():
    g = make_grid(1024, 32.0)
    p = sk.physical_params(g)
    st = dynamics.two_gaussian_state(g, p, separation=8.0, sigma0=0.15)
    assert abs(st.rho.sum() * g.dx - 1.0) < 1e-12
    # mirror symmetric about the origin (x grid is asymmetric by one cell)
    mid = g.n_points // 2
    left = st.rho[1:mid]
    right = st.rho[mid + 1 :][::-1]
    assert np.max(np.abs(left - right)) < 1e-12


def test_energy_diagnostic():
    g = make_grid()
    p = sk.physical_params(g, lam=1.0)
    st = dynamics.gaussian_state(g, p, 0.0, 0.5, momentum=1.5)
    e = dynamics.energy(st, p, g)
    # kinetic = p^2/2m + hbar^2/(8 m sigma^2)
    expected = 1.5**2 / 2 + 1.0 / (8 * 0.25)
    assert abs(e - expected) < 1e-3


def test_lambda_from_sigma_default_map():
    g = make_grid()
    p = sk.physical_params(g, mass=1.0, hbar=1.0)
    assert sk.lambda_from_sigma(1.0, p) == 1.0  # sigma = hbar/m clamps to 1
    assert sk.lambda_from_sigma(0.0, p) == 0.0
    assert sk.lambda_from_sigma(0.25, p) == 0.25
    assert sk.lambda_from_sigma(5.0, p) == 1.0
    with pytest.raises(ValueError):
        sk.lambda_from_sigma(-1.0, p)


def test_lambda_from_sigma_table():
    g = make_grid()
    p = sk.physical_params(g)
    table = [(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]
    assert sk.lambda_from_sigma(1.0, p, table) == 0.5
    assert sk.lambda_from_sigma(1.5, p, table) == 0.75
    assert sk.lambda_from_sigma(9.0, p, table) == 1.0  # clamped to end value
    with pytest.raises(NonMonotoneMap):
        sk.lambda_from_sigma(1.0, p, [(0.0, 0.5), (1.0, 0.2)])
    with pytest.raises(NonMonotoneMap):
        sk.lambda_from_sigma(1.0, p, [(0.0, 0.0), (0.0, 1.0)])
    with pytest.raises(NonMonotoneMap):
        sk.lambda_from_sigma(1.0, p, [(0.0, 0.0)])


def test_lambda_from_sigma_monotone_surjective():
    g = make_grid()
    p = sk.physical_params(g, mass=2.0, hbar=1.0)
    sigmas = np.linspace(0.0, p.hbar / p.mass, 41)
    lams = [sk.lambda_from_sigma(s, p) for s in sigmas]
    assert lams[0] == 0.0 and lams[-1] == 1.0
    assert all(b >= a for a, b in zip(lams, lams[1:]))
