"""Invariants, reduced systems, and the symbolic verification of every
catalogued reduction."""

import math
from fractions import Fraction

import numpy as np
import pytest

from fluidsym import expr as ex, fluid, reduction as rd, symmetry as sm


def test_dilatation_invariants():
    inv = rd.invariants_of(sm.v_dilation())
    assert inv.invariants["y"].equivalent(ex.sym("x") / ex.sym("t"))
    assert inv.invariants["alpha"].equivalent(ex.sym("n") * ex.sym("t"))
    for e in inv.invariants.values():
        assert rd.verify_invariant(sm.v_dilation(), e).is_zero()


def test_traveling_frame_invariants():
    gen = sm.v_time() + sm.v_space().scale(ex.number(2))
    inv = rd.invariants_of(gen, a_value=Fraction(2))
    y = inv.invariants["y"]
    assert y.equivalent(ex.sym("x") - 2 * ex.sym("t"))
    assert rd.verify_invariant(gen, y).is_zero()


def test_scaling_invariants():
    gen = sm.v_scaling() + sm.v_time() + sm.v_space().scale(ex.number(1))
    inv = rd.invariants_of(gen, a_value=Fraction(1))
    assert rd.verify_invariant(gen, inv.invariants["theta"]).is_zero()
    assert rd.verify_invariant(gen, inv.invariants["sigma"]).is_zero()


def test_unsupported_generator_rejected():
    V = sm.VectorField(ex.sym("x") ** 2, ex.ZERO, ex.ZERO, ex.ZERO,
                       ex.ZERO, ex.ZERO)
    with pytest.raises(rd.UnsupportedReductionError):
        rd.invariants_of(V)


def test_mixed_scaling_annihilation_corrected_and_stated():
    a = ex.sym("a")
    gen = sm.v_dilation() + sm.v_scaling().scale(a)
    rho, t, x, n = ex.syms("rho t x n")
    # the product n*x is invariant
    assert rd.verify_invariant(gen, n * x).is_zero()
    # corrected density scaling: rho * t^-a
    assert rd.verify_invariant(gen, rho * t ** (-a)).is_zero()
    # the stated variant rho * t^a is not annihilated: residual 2a rho t^a
    res = rd.verify_invariant(gen, rho * t ** a)
    assert res.equivalent(2 * a * rho * t ** a)


def test_traveling_invariant_corrected_and_stated():
    a = ex.sym("a")
    gen = sm.v_time() + sm.v_space().scale(a)
    t, x = ex.sym("t"), ex.sym("x")
    assert rd.verify_invariant(gen, x - a * t).is_zero()
    res = rd.verify_invariant(gen, t - a * x)
    assert res.equivalent(1 - a ** 2)  # vanishes only for a = +-1


def test_supported_case_lists():
    assert rd.supported_cases("eckart") == (1, 2, 3, 4, 5, 6)
    assert rd.supported_cases("israel-stewart") == (1, 2)
    with pytest.raises(rd.UnsupportedReductionError):
        rd.reduced_system(3, "israel-stewart")
    with pytest.raises(rd.UnsupportedReductionError):
        rd.reduced_system(7, "eckart")


@pytest.mark.parametrize("theory,case_no", [
    ("eckart", 1), ("eckart", 2), ("eckart", 3), ("eckart", 4),
    ("eckart", 5), ("eckart", 6),
    ("israel-stewart", 1), ("israel-stewart", 2),
])
def test_symbolic_check_all_supported_reductions(theory, case_no):
    rep = rd.symbolic_check_reduction(case_no, theory)
    assert rep["ok"], [ex.to_text(r) for r in rep["residuals"] if not r.is_zero()]


def test_first_integrals_are_exact():
    for theory in ("eckart", "israel-stewart"):
        for case_no in rd.supported_cases(theory):
            rs = rd.reduced_system(case_no, theory)
            defects = rd.first_integral_defects(rs)
            assert all(v.is_zero() for v in defects.values()), (theory, case_no)


def test_case3_particle_relation():
    rs = rd.reduced_system(3, "eckart")
    I = rs.first_integrals["particle"]
    expect = ex.parse("alpha*(sinh(psi) + y*cosh(psi))")
    assert I.equivalent(expect)


def test_case4_density_and_flat_energy():
    rs = rd.reduced_system(4, "eckart")  # default a = -1
    # the energy density is constant along the traveling profile
    assert rs.rhs["rho"].is_zero()
    # particle first integral is n*(sinh - cosh) = -n*exp(-psi), equivalent
    # to n proportional to exp(psi)
    I = rs.first_integrals["particle"]
    expect = -ex.sym("n") * ex.exp(-ex.sym("psi"))
    assert I.equivalent(expect)


def test_case4_general_speed_has_dynamic_density():
    rs = rd.reduced_system(4, "eckart", a_value=Fraction(-2))
    assert not rs.rhs["rho"].is_zero()
    rep = rd.symbolic_check_reduction(4, "eckart", a_value=Fraction(-2))
    assert rep["ok"]


def test_case5_alternative_scaling_weight():
    rep = rd.symbolic_check_reduction(5, "eckart", a_value=Fraction(2))
    assert rep["ok"]


def test_singular_loci_are_reported():
    rs = rd.reduced_system(3, "eckart")
    assert rs.singular
    env = {"y": 1.0, "psi": 0.4, "alpha": 1.0, "rho": 1.0, "q": 0.0}
    # the locus includes the light-cone factor: at y = 1 some denominator
    # must vanish together with 1 - y^2
    vals = [ex.evalf(s, env) for s in rs.singular]
    assert min(abs(v) for v in vals) > 0  # generic point off the locus
    # functional dependence on y present
    env2 = dict(env)
    env2["y"] = 0.5
    vals2 = [ex.evalf(s, env2) for s in rs.singular]
    assert any(abs(a - b) > 1e-12 for a, b in zip(vals, vals2))


def test_invariants_functionally_independent():
    rng = np.random.default_rng(123)
    inv = rd._case_invariants(3, ex.number(Fraction(1)))
    names = ["y", "psi", "alpha", "rho", "q"]
    exprs = [inv.invariants[n] for n in names]
    base = ["t", "x", "psi", "n", "rho", "q"]
    for _ in range(5):
        env = {"t": rng.uniform(0.5, 2), "x": rng.uniform(-2, 2),
               "psi": rng.uniform(-1, 1), "n": rng.uniform(0.5, 2),
               "rho": rng.uniform(0.5, 2), "q": rng.uniform(-1, 1)}
        J = np.zeros((len(exprs), len(base)))
        h = 1e-6
        for j, b in enumerate(base):
            envp = dict(env)
            envm = dict(env)
            envp[b] += h
            envm[b] -= h
            for i, e in enumerate(exprs):
                J[i, j] = (ex.evalf(e, envp) - ex.evalf(e, envm)) / (2 * h)
        s = np.linalg.svd(J, compute_uv=False)
        assert s[len(exprs) - 1] > 1e-8


def test_reference_closed_form_values():
    params = fluid.FluidParams(lam=Fraction(0))
    b = 1.5
    C1 = b * b  # kappa = k = N0 = 1
    # at the ordinate where the inner argument reaches 1 the velocity is 0
    eta = math.atanh(1.0 / b) / b
    out = rd.closed_form_case4(params, C1=C1, C2=0.0, y=eta)
    assert out["v"] == pytest.approx(0.0, abs=1e-12)
    # unit coefficient: far field approaches v = 0, n = N0
    out = rd.closed_form_case4(params, C1=1.0, C2=0.0, y=40.0)
    assert out["v"] == pytest.approx(0.0, abs=1e-12)
    assert out["n"] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ex.DomainError):
        rd.closed_form_case4(params, C1=-1.0, C2=0.0, y=1.0)
    with pytest.raises(ex.DomainError):
        rd.closed_form_case4(params, C1=1.0, C2=0.0, y=-2.0)


def test_reference_closed_form_residuals_document_defect():
    """The reference profile satisfies particle conservation exactly but
    leaves the energy-momentum residuals nonzero; the defect is intrinsic
    to the published formula, not to the solver (documented discrepancy)."""
    params = fluid.FluidParams(lam=Fraction(0))
    sys = fluid.build_system(params)
    out = rd.closed_form_case4(params, C1=1.0, C2=0.0, y=1.3)
    jets = {}
    for nm in ("psi", "n", "rho", "q"):
        jets[f"{nm}_t"] = out[f"{nm}_y"]
        jets[f"{nm}_x"] = out[f"{nm}_y"]
    st = fluid.FluidState(psi=out["psi"], n=out["n"], rho=out["rho"], q=out["q"])
    res = fluid.residual_at(sys, st, jets)
    assert abs(res[0]) < 1e-10          # particle conservation holds
    assert abs(res[1]) > 1e-3           # energy residual does not vanish
    assert abs(res[2]) > 1e-3           # momentum residual does not vanish


def test_machine_reduction_residuals_vanish_on_case4_flow():
    """States generated by the verified case-4 right-hand sides do satisfy
    the full system, unlike the reference formula."""
    params = fluid.FluidParams(lam=Fraction(0))
    sys = fluid.build_system(params)
    rs = rd.reduced_system(4, "eckart")
    from fluidsym import odesolve as od
    rhs = od.compile_rhs(rs, params)
    u = [0.4, 1.2, 1.0, -0.2]
    derivs = rhs(0.0, u)
    jets = {}
    for nm, d in zip(rs.states, derivs):
        jets[f"{nm}_t"] = d  # a = -1 travelling frame
        jets[f"{nm}_x"] = d
    st = fluid.FluidState(psi=u[0], n=u[1], rho=u[2], q=u[3])
    res = fluid.residual_at(sys, st, jets)
    assert max(abs(r) for r in res) < 1e-12


def test_pure_scaling_invariants():
    inv = rd.invariants_of(sm.v_scaling())
    assert inv.similarity_variable is None
    theta = inv.invariants["theta"]
    assert theta.equivalent(ex.sym("q") / ex.sym("rho"))
    for e in inv.invariants.values():
        assert rd.verify_invariant(sm.v_scaling(), e).is_zero()
