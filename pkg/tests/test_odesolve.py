"""Integrator quality, events, classification, and critical-velocity search."""

import math
from fractions import Fraction

import pytest

from fluidsym import expr as ex, fluid, odesolve as od, reduction as rd


def test_exponential_decay_within_tolerance():
    cfg = od.SolverConfig(span=1.0, rtol=1e-8, atol=1e-10)
    tr = od.integrate(lambda t, u: [-u[0]], [1.0], cfg)
    assert tr.termination == "reached-end"
    assert tr.states[-1][0] == pytest.approx(0.3678794411714423, abs=2e-8)


def test_observed_convergence_order():
    order = od.convergence_order(lambda t, u: [-u[0]], [1.0], 1.0,
                                 [math.exp(-1.0)])
    assert order >= 3.9


def test_harmonic_oscillator_energy_drift():
    cfg = od.SolverConfig(span=20 * math.pi, rtol=1e-8, atol=1e-10,
                          max_step=1e9)
    tr = od.integrate(lambda t, u: [u[1], -u[0]], [1.0, 0.0], cfg)
    drift = max(abs(0.5 * (s[0] ** 2 + s[1] ** 2) - 0.5) for s in tr.states)
    assert drift < 1e-6


def test_determinism_bit_identical():
    cfg = od.SolverConfig(span=3.0, rtol=1e-7, atol=1e-9)
    rhs = lambda t, u: [u[1], -math.sin(u[0])]
    tr1 = od.integrate(rhs, [1.0, 0.2], cfg)
    tr2 = od.integrate(rhs, [1.0, 0.2], cfg)
    assert tr1.ts == tr2.ts
    assert tr1.states == tr2.states


def test_event_bracketing_width():
    # crossing of u = 1/2 during exponential decay at t = ln 2
    delta = 1e-6
    ev = od.EventSpec(guards=(lambda t, u: u[0] - 0.5,), names=("half",),
                      delta=delta)
    cfg = od.SolverConfig(span=2.0, rtol=1e-9, atol=1e-12)
    tr = od.integrate(lambda t, u: [-u[0]], [1.0], cfg, ev)
    assert tr.termination == "event"
    assert tr.event_name == "half"
    t_event = tr.ts[-1]
    assert abs(t_event - math.log(2.0)) < 2 * delta
    # guard changed sign across the final bracket
    assert tr.states[-1][0] - 0.5 <= 0


def test_step_failure_reported_not_raised():
    # finite-time singularity u' = u^2 from u0 = 1 blows at t = 1
    cfg = od.SolverConfig(span=2.0, rtol=1e-8, atol=1e-10, max_step=1e9)
    tr = od.integrate(lambda t, u: [u[0] ** 2], [1.0], cfg)
    assert tr.termination == "step-failure"
    assert tr.ts[-1] < 1.01


def test_dense_output_accuracy():
    # the dense output is a cubic Hermite interpolant (O(h^4)); with the
    # step clamped its error sits well below the sampling needs
    cfg = od.SolverConfig(span=1.0, rtol=1e-9, atol=1e-12, dense_points=97,
                          max_step=0.05)
    tr = od.integrate(lambda t, u: [-u[0]], [1.0], cfg)
    for t, s in zip(tr.ts, tr.states):
        assert abs(s[0] - math.exp(-t)) < 1e-7


def _case1_rhs(theory):
    lam = Fraction(0) if theory == "eckart" else Fraction(1)
    params = fluid.FluidParams(lam=lam)
    rs = rd.reduced_system(1, theory)
    return rs, params, od.compile_rhs(rs, params)


def test_homogeneous_conservation_along_trajectory():
    rs, params, rhs = _case1_rhs("eckart")
    psi0 = math.atanh(0.4)
    cfg = od.SolverConfig(span=2.0, rtol=1e-10, atol=1e-12, max_step=0.02)
    tr = od.integrate(rhs, [psi0, 1.0, 1.0, -0.05], cfg)
    names = ["particle", "energy_flux", "momentum_flux"]
    fns = ex.compile_exprs([rs.first_integrals[n] for n in names],
                           ["psi", "n", "rho", "q"])
    ref = fns(*tr.states[0])
    for s in tr.states:
        vals = fns(*s)
        for a, b in zip(ref, vals):
            assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


def test_blowup_classification_fires_event():
    rs, params, rhs = _case1_rhs("eckart")
    psi0 = math.atanh(0.5)
    fac = od.scaled_time_factor(params, 1.0, psi0)
    cfg = od.SolverConfig(span=50.0 / fac, rtol=1e-8, atol=1e-10, max_step=1e9)
    ev = od.default_events(rs, params, blowup_delta=6e-2)
    tr = od.integrate(rhs, [psi0, 1.0, 1.0, -0.1], cfg, ev)
    assert od.classify_trajectory(tr) == "blowing-up"
    assert tr.event_name == "v-blowup"


def test_decaying_classification():
    rs, params, rhs = _case1_rhs("israel-stewart")
    psi0 = math.atanh(0.3)
    fac = od.scaled_time_factor(params, 1.0, psi0)
    cfg = od.SolverConfig(span=50.0 / fac, rtol=1e-8, atol=1e-10, max_step=1e9)
    ev = od.default_events(rs, params, blowup_delta=6e-2)
    tr = od.integrate(rhs, [psi0, 1.0, 1.0, -0.1], cfg, ev)
    assert od.classify_trajectory(tr) == "decaying"


def test_empty_trajectory_inconclusive():
    tr = od.Trajectory(ts=[0.0], states=[[0.1, 1, 1, 0]],
                       termination="reached-end")
    assert od.classify_trajectory(tr) == "inconclusive"


def _case4_exact_constant(u_val, du_val, m):
    """The separable traveling-wave flow obeys u*u' = m*u - 2C with
    u = exp(-2 psi); C is fixed by initial data and G(u) - y is constant
    along exact solutions."""
    C = (m * u_val - u_val * du_val) / 2.0
    return C


def test_case4_quadrature_first_integral():
    """Independent oracle: the traveling-wave reduction has an exact
    quadrature; the integrator must follow it to tolerance."""
    params = fluid.FluidParams(lam=Fraction(0))
    rs = rd.reduced_system(4, "eckart")
    rhs = od.compile_rhs(rs, params)
    psi0, n0, rho0, q0 = 0.3, 1.0, 1.0, 0.1
    N0 = n0 * math.exp(-psi0)
    m = 2.0 * 1.0 * N0 / 1.0  # 2 k N0 / kappa
    # d(u)/dy from the compiled right-hand side
    d = rhs(0.0, [psi0, n0, rho0, q0])
    u0 = math.exp(-2 * psi0)
    du0 = -2.0 * u0 * d[0]
    C = _case4_exact_constant(u0, du0, m)

    def G(u):
        return u / m + (2 * C / m ** 2) * math.log(abs(m * u - 2 * C))

    cfg = od.SolverConfig(span=3.0, rtol=1e-10, atol=1e-12, max_step=1e9)
    tr = od.integrate(rhs, [psi0, n0, rho0, q0], cfg)
    assert tr.termination == "reached-end"
    ref = G(u0)
    for t, s in zip(tr.ts, tr.states):
        u = math.exp(-2 * s[0])
        assert abs(G(u) - t - ref) < 1e-7


def test_tolerance_monotonicity_against_quadrature():
    params = fluid.FluidParams(lam=Fraction(0))
    rs = rd.reduced_system(4, "eckart")
    rhs = od.compile_rhs(rs, params)
    psi0, n0, rho0, q0 = 0.3, 1.0, 1.0, 0.1
    N0 = n0 * math.exp(-psi0)
    m = 2.0 * N0
    d = rhs(0.0, [psi0, n0, rho0, q0])
    u0 = math.exp(-2 * psi0)
    C = _case4_exact_constant(u0, -2.0 * u0 * d[0], m)

    def defect(rtol):
        cfg = od.SolverConfig(span=3.0, rtol=rtol, atol=rtol * 1e-2,
                              max_step=1e9)
        tr = od.integrate(rhs, [psi0, n0, rho0, q0], cfg)
        ref = u0 / m + (2 * C / m ** 2) * math.log(abs(m * u0 - 2 * C))
        worst = 0.0
        for t, s in zip(tr.ts, tr.states):
            u = math.exp(-2 * s[0])
            g = u / m + (2 * C / m ** 2) * math.log(abs(m * u - 2 * C))
            worst = max(worst, abs(g - t - ref))
        return worst

    errs = [defect(rt) for rt in (1e-6, 1e-7, 1e-8, 1e-9)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a * 1.05  # tightening never increases the defect


def test_self_convergence_under_tolerance_tightening():
    rs, params, rhs = _case1_rhs("eckart")
    psi0 = math.atanh(0.5)
    results = {}
    for rtol in (1e-6, 1e-7, 1e-8):
        cfg = od.SolverConfig(span=0.5, rtol=rtol, atol=rtol * 1e-2,
                              max_step=1e9, dense_points=50)
        results[rtol] = od.integrate(rhs, [psi0, 1.0, 1.0, -0.1], cfg)
    d1 = max(abs(x[0] - y[0]) for x, y in
             zip(results[1e-6].states, results[1e-7].states))
    d2 = max(abs(x[0] - y[0]) for x, y in
             zip(results[1e-7].states, results[1e-8].states))
    assert d2 < d1  # pointwise convergence as tolerance tightens
    assert d2 <= 10 * 1e-7  # successive difference below 10x the finer rtol


def test_find_critical_requires_bracket():
    rs, params, rhs = _case1_rhs("eckart")

    def run(v0):
        psi0 = math.atanh(v0)
        fac = od.scaled_time_factor(params, 1.0, psi0)
        cfg = od.SolverConfig(span=50.0 / fac, rtol=1e-7, atol=1e-9,
                              max_step=1e9)
        ev = od.default_events(rs, params, blowup_delta=6e-2)
        return od.integrate(rhs, [psi0, 1.0, 1.0, -0.5], cfg, ev)

    # the non-relaxing homogeneous family diverges from every initial state
    with pytest.raises(od.NoBracketError):
        od.find_critical(run, 0.1, 0.9)


def test_find_critical_bisects_relaxing_family():
    rs = rd.reduced_system(1, "israel-stewart")
    params = fluid.FluidParams(lam=Fraction(1))
    rhs = od.compile_rhs(rs, params)
    ev = od.default_events(rs, params, blowup_delta=6e-2)

    def run(v0):
        psi0 = math.atanh(v0)
        fac = od.scaled_time_factor(params, 1.0, psi0)
        cfg = od.SolverConfig(span=50.0 / fac, rtol=1e-7, atol=1e-9,
                              max_step=1e9)
        return od.integrate(rhs, [psi0, 1.0, 1.0, -0.5], cfg, ev)

    res = od.find_critical(run, 0.5, 0.9, tol=5e-3)
    assert res.lo_class == "decaying" and res.hi_class == "blowing-up"
    assert 0.5 < res.v_critical < 0.9
    assert res.hi - res.lo <= 5e-3
