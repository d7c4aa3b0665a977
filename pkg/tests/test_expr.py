"""Exact expression kernel: differentiation, normalization, substitution,
collection, nullspace, parsing."""

import math
import random
from fractions import Fraction

import pytest

from fluidsym import expr as ex
from fluidsym.expr import JetSpace


def test_derivative_of_sinh_is_cosh():
    psi = ex.sym("psi")
    assert ex.diff(ex.sinh(psi), "psi") == ex.cosh(psi)


def test_derivative_of_affine_in_t():
    c1, c4, t = ex.syms("c1 c4 t")
    assert ex.diff(c1 + t * c4, "t") == c4


def test_derivative_of_rational_heat_term():
    n, k, q, kappa, rho = ex.syms("n k q kappa rho")
    e = 3 * n * k * q / (kappa * rho)
    expect = -3 * n * k * q / (kappa * rho ** 2)
    assert ex.diff(e, "rho") == expect


def test_hyperbolic_identity_normalizes_to_zero():
    psi = ex.sym("psi")
    assert (ex.cosh(psi) ** 2 - ex.sinh(psi) ** 2 - 1).is_zero()


def test_double_angle_identity():
    psi = ex.sym("psi")
    assert (2 * ex.sinh(psi) * ex.cosh(psi) - ex.sinh(2 * psi)).is_zero()


def test_equation_of_state_substitution():
    rho = ex.sym("rho")
    p = rho / 3
    assert (p + rho) == 4 * rho / 3


def test_substitute_temperature():
    n, k, q, kappa, rho, T = ex.syms("n k q kappa rho T")
    e = q / (kappa * T)
    out = ex.subs(e, {"T": rho / (3 * n * k)})
    assert out == 3 * n * k * q / (kappa * rho)


def test_substitute_into_cosh():
    psi = ex.sym("psi")
    assert ex.subs(ex.cosh(psi), {"psi": ex.ZERO}) == ex.ONE


def test_singular_substitution_raises():
    rho = ex.sym("rho")
    with pytest.raises(ex.SingularSubstitutionError):
        ex.subs(1 / rho, {"rho": ex.ZERO})


def test_collect_simple():
    A, B, px, nx = ex.syms("A B psi_x n_x")
    parts = ex.collect(A * px + B * nx * px, ["psi_x", "n_x"])
    assert parts[(("psi_x", 1),)] == A
    assert parts[(("n_x", 1), ("psi_x", 1))] == B
    assert len(parts) == 2


def test_collect_zero_gives_empty_map():
    assert ex.collect(ex.ZERO, ["psi_x"]) == {}


def test_collect_rejects_nonpolynomial_basis_usage():
    rho = ex.sym("rho")
    with pytest.raises(ex.NonPolynomialError):
        ex.collect(ex.sym("x") / (1 + rho), ["rho"])


def test_collect_then_resum_roundtrip():
    rng = random.Random(7)
    for _ in range(20):
        e = _random_poly(rng)
        parts = ex.collect(e, ["psi_x", "n_x", "rho_x"])
        assert ex.collect_resum(parts).equivalent(e)


def test_nullspace_single_constraint():
    rows = [{"c1": Fraction(1), "c2": Fraction(1)}]
    basis = ex.nullspace(rows, ["c1", "c2"])
    assert len(basis) == 1
    vec = basis[0]
    # spans (1, -1)
    assert vec["c1"] == -vec["c2"]


def test_nullspace_no_constraints():
    basis = ex.nullspace([], ["c1"])
    assert basis == [{"c1": Fraction(1)}]


def test_nullspace_deterministic_order():
    rows = [{"c1": Fraction(2), "c3": Fraction(-1)}]
    b1 = ex.nullspace(rows, ["c1", "c2", "c3"])
    b2 = ex.nullspace(rows, ["c1", "c2", "c3"])
    assert b1 == b2


def _random_poly(rng, depth=0):
    names = ["t", "x", "psi", "n", "rho", "q", "psi_x", "n_x", "rho_x"]
    terms = rng.randint(1, 4)
    e = ex.ZERO
    for _ in range(terms):
        c = ex.number(Fraction(rng.randint(-6, 6), rng.randint(1, 4)))
        mono = c
        for _ in range(rng.randint(0, 3)):
            mono = mono * ex.sym(rng.choice(names))
        e = e + mono
    return e


def _random_expr(rng):
    e = _random_poly(rng)
    if rng.random() < 0.4:
        e = e + ex.sinh(ex.sym("psi")) * _random_poly(rng)
    if rng.random() < 0.3:
        den = _random_poly(rng)
        if not den.is_zero():
            e = e / den + ex.cosh(ex.sym("psi"))
    return e


def test_leibniz_rule_randomized():
    rng = random.Random(13)
    for _ in range(25):
        e1 = _random_expr(rng)
        e2 = _random_expr(rng)
        s = rng.choice(["psi", "n", "x"])
        lhs = ex.diff(e1 * e2, s)
        rhs = e1 * ex.diff(e2, s) + e2 * ex.diff(e1, s)
        assert lhs.equivalent(rhs)


def test_linearity_of_derivative_randomized():
    rng = random.Random(5)
    for _ in range(20):
        e1, e2 = _random_expr(rng), _random_expr(rng)
        a = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        lhs = ex.diff(a * e1 + e2, "psi")
        rhs = a * ex.diff(e1, "psi") + ex.diff(e2, "psi")
        assert lhs.equivalent(rhs)


def test_normalization_idempotent_via_rebuild():
    # rebuilding a normalized expression from its own parts is the identity
    rng = random.Random(23)
    for _ in range(20):
        e = _random_expr(rng)
        rebuilt = ex.numerator(e) / ex.denominator(e)
        assert rebuilt == e


def test_numeric_cross_check_of_equivalent_builds():
    # the same function assembled along two different syntactic routes
    # evaluates identically after normalization
    rng = random.Random(31)
    psi, n, rho = ex.syms("psi n rho")
    e1 = (ex.cosh(psi) ** 2 - ex.sinh(psi) ** 2) * (n + rho) ** 2 / (n + rho)
    e2 = n + rho
    assert e1 == e2
    for _ in range(100):
        env = {"psi": rng.uniform(-2, 2), "n": rng.uniform(0.1, 3),
               "rho": rng.uniform(0.1, 3)}
        v1, v2 = ex.evalf(e1, env), ex.evalf(e2, env)
        assert abs(v1 - v2) <= 1e-12 * max(1.0, abs(v1))


def test_numeric_eval_matches_math_functions():
    psi = ex.sym("psi")
    e = ex.sinh(psi) * ex.cosh(psi) + ex.ln(ex.sym("rho"))
    env = {"psi": 0.7, "rho": 2.5}
    expect = math.sinh(0.7) * math.cosh(0.7) + math.log(2.5)
    assert abs(ex.evalf(e, env) - expect) < 1e-14


def test_total_derivative_expansion():
    js = JetSpace(("t", "x"), ("psi", "n", "rho", "q"))
    phi = ex.sym("x") * ex.sym("psi") + ex.sym("n") ** 2
    out = js.total_derivative(phi, "x")
    expect = (ex.sym("psi") + ex.sym("x") * ex.sym("psi_x")
              + 2 * ex.sym("n") * ex.sym("n_x"))
    assert out == expect


def test_total_derivative_trivial_cases():
    js = JetSpace(("t", "x"), ("psi", "n", "rho", "q"))
    assert js.total_derivative(ex.sym("x"), "x") == ex.ONE
    assert js.total_derivative(ex.sym("psi"), "t") == ex.sym("psi_t")


def test_total_derivatives_commute_on_first_order_jets():
    js = JetSpace(("t", "x"), ("psi", "n", "rho", "q"))
    rng = random.Random(3)
    for _ in range(15):
        e = _random_poly(rng)
        com = (js.total_derivative(js.total_derivative(e, "t"), "x")
               - js.total_derivative(js.total_derivative(e, "x"), "t"))
        assert com.is_zero()


def test_symbolic_power_differentiation():
    t, a, rho = ex.syms("t a rho")
    w = rho * t ** a
    assert (t * ex.diff(w, "t") - a * w).is_zero()


def test_exponent_merging_cancels():
    t, a = ex.syms("t a")
    assert (t ** a * t ** (-a)).equivalent(ex.ONE)


def test_parser_roundtrip_randomized():
    rng = random.Random(11)
    for _ in range(25):
        e = _random_expr(rng)
        text = ex.to_text(e)
        assert ex.parse(text) == e


def test_parser_function_names():
    assert ex.parse("sinh(psi)") == ex.sinh(ex.sym("psi"))
    assert ex.parse("exp(2*psi)") == ex.exp(2 * ex.sym("psi"))
    assert ex.parse("ln(t)") == ex.ln(ex.sym("t"))
    assert ex.parse("(1/3)*rho") == ex.sym("rho") / 3


def test_compiled_expressions_match_evalf():
    rng = random.Random(17)
    psi, n = ex.syms("psi n")
    e = ex.cosh(psi) * n + 1 / (1 + n ** 2)
    fn = ex.compile_exprs([e], ["psi", "n"])
    for _ in range(20):
        env = {"psi": rng.uniform(-2, 2), "n": rng.uniform(0.1, 4)}
        assert abs(fn(env["psi"], env["n"])[0] - ex.evalf(e, env)) < 1e-13


def test_normalize_is_idempotent_identity():
    import random as _r
    rng = _r.Random(29)
    for _ in range(10):
        e = _random_expr(rng)
        n1 = ex.normalize(e)
        assert n1 == e
        assert ex.normalize(n1) == n1
