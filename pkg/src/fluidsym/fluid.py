"""Residuals of the 1+1 dimensional relativistic heat-conducting fluid.

The four dependent fields are the rapidity ``psi`` (velocity v = tanh psi),
number density ``n``, energy density ``rho`` and heat-flux magnitude ``q``.
The ultrarelativistic ideal-gas equation of state p = rho/3 = n k T is
substituted throughout, eliminating pressure and temperature, and the
second-order transport coefficient is closed as 15*lam/(4*rho): lam = 0
selects the Eckart theory (no heat-flux relaxation), lam = 1 the
Israel-Stewart theory.

Sign convention: the relaxation source enters the heat-flow residual as
``-3 n k q / (kappa rho)``.  With this orientation the spatially homogeneous
Eckart fluid is unstable for every boosted initial state while the
Israel-Stewart fluid is stable below a critical velocity, the behaviour the
rest of the package (reductions, critical-velocity searches) reproduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import expr as ex
from .expr import Expr, JetSpace

__all__ = [
    "FluidParams",
    "FluidState",
    "PDESystem",
    "FIELD_NAMES",
    "JETS",
    "build_system",
    "quasilinear_time_form",
    "heat_flux_constraint",
    "residual_at",
]

FIELD_NAMES = ("psi", "n", "rho", "q")
JET_SPACE = JetSpace(("t", "x"), FIELD_NAMES)
JETS = tuple(JET_SPACE.jet(u, d) for u in FIELD_NAMES for d in ("t", "x"))
TIME_JETS = tuple(JET_SPACE.jet(u, "t") for u in FIELD_NAMES)
SPACE_JETS = tuple(JET_SPACE.jet(u, "x") for u in FIELD_NAMES)


@dataclass(frozen=True)
class FluidParams:
    """Physical parameters; exact rationals so the symbolic layer stays exact.

    k and kappa may be None, which keeps them as symbols.
    """

    k: Fraction | None = Fraction(1)
    kappa: Fraction | None = Fraction(1)
    lam: Fraction = Fraction(0)
    N0: float = 1.0
    E0: float = 1.0

    def __post_init__(self):
        if self.k is not None and self.k <= 0:
            raise ValueError("k must be positive")
        if self.kappa is not None and self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if not (0 <= self.lam <= 1):
            raise ValueError("lam must lie in [0, 1]")

    @property
    def k_expr(self) -> Expr:
        return ex.sym("k") if self.k is None else ex.number(self.k)

    @property
    def kappa_expr(self) -> Expr:
        return ex.sym("kappa") if self.kappa is None else ex.number(self.kappa)


def eckart_params(**kw) -> FluidParams:
    return FluidParams(lam=Fraction(0), **kw)


def israel_stewart_params(**kw) -> FluidParams:
    return FluidParams(lam=Fraction(1), **kw)


@dataclass(frozen=True)
class FluidState:
    psi: float
    n: float
    rho: float
    q: float

    def __post_init__(self):
        if self.n <= 0 or self.rho <= 0:
            raise ValueError("physical states require n > 0 and rho > 0")

    @property
    def v(self) -> float:
        return math.tanh(self.psi)

    def env(self) -> dict:
        return {"psi": self.psi, "n": self.n, "rho": self.rho, "q": self.q}


@dataclass(frozen=True)
class PDESystem:
    residuals: tuple  # four Expr values, quasilinear in the eight jets
    params: FluidParams

    @property
    def lam(self) -> Fraction:
        return self.params.lam


def build_system(params: FluidParams) -> PDESystem:
    """Assemble the four normalized residuals."""
    psi, n, rho, q = ex.syms("psi n rho q")
    s = ex.sinh(psi)
    c = ex.cosh(psi)
    j = {name: ex.sym(name) for name in JETS}
    k = params.k_expr
    kappa = params.kappa_expr
    lam = ex.number(params.lam)

    p_plus_rho = rho * 4 / 3  # p = rho/3
    beta1 = lam * 15 / (4 * rho)  # 5*lam/(4p) with p = rho/3

    d1 = (s * j["n_x"] - c * j["n_t"]
          + n * c * j["psi_x"] - n * s * j["psi_t"])

    d2 = (c * j["rho_t"] - s * j["rho_x"] + s * j["q_t"] - c * j["q_x"]
          + (p_plus_rho * s + 2 * q * c) * j["psi_t"]
          - (p_plus_rho * c + 2 * q * s) * j["psi_x"])

    d3 = ((c * j["rho_x"] - s * j["rho_t"]) / 3
          + s * j["q_x"] - c * j["q_t"]
          - (p_plus_rho * c + 2 * q * s) * j["psi_t"]
          + (p_plus_rho * s + 2 * q * c) * j["psi_x"])

    # T = rho/(3 n k) makes d(ln T) = d(ln rho) - d(ln n)
    dlnT_x = j["rho_x"] / rho - j["n_x"] / n
    dlnT_t = j["rho_t"] / rho - j["n_t"] / n
    d4 = (c * dlnT_x - s * dlnT_t
          + beta1 * (s * j["q_x"] - c * j["q_t"])
          + s * j["psi_x"] - c * j["psi_t"]
          - 3 * n * k * q / (kappa * rho))

    return PDESystem(residuals=(d1, d2, d3, d4), params=params)


def _clear_row(coeffs, rhs):
    """Multiply a row equation by its distinct denominators, making every
    entry polynomial (denominator one)."""
    entries = list(coeffs) + [rhs]
    seen = set()
    mult = ex.ONE
    for e in entries:
        d = ex.denominator(e)
        if d.key() not in seen and not d.equivalent(ex.ONE):
            seen.add(d.key())
            mult = mult * d
    return [e * mult for e in coeffs], rhs * mult


def _det(matrix):
    """Determinant by cofactor expansion; entries are Exprs."""
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    total = ex.ZERO
    for j in range(size):
        a = matrix[0][j]
        if a.is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = a * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _solve_linear_system(rows, cols):
    """Exact solve by Cramer's rule after clearing denominators row-wise.

    rows: list of (coefficient list per col, rhs Expr).  Returns (solution
    list per col, determinant Expr of the cleared coefficient matrix).
    """
    cleared = [_clear_row(cs, rhs) for cs, rhs in rows]
    mat = [cs for cs, _ in cleared]
    rhs = [r for _, r in cleared]
    det = _det(mat)
    if det.is_zero():
        raise ValueError("characteristic degeneracy: singular coefficient matrix")
    sol = []
    for j in range(len(cols)):
        mod = [row[:j] + [rhs[i]] + row[j + 1:] for i, row in enumerate(mat)]
        sol.append(_det(mod) / det)
    return sol, det


def quasilinear_time_form(sys: PDESystem) -> dict:
    """Solve the residuals for the four time derivatives.

    Returns a dict with keys 'psi_t', 'n_t', 'rho_t', 'q_t' (Exprs affine in
    the x-derivative jets) plus '_det' carrying the coefficient determinant.
    """
    rows = []
    zero_times = {name: ex.ZERO for name in TIME_JETS}
    for res in sys.residuals:
        coeffs = [ex.diff(res, tj) for tj in TIME_JETS]
        rhs = -ex.subs(res, zero_times)
        rows.append((coeffs, rhs))
    sol, det = _solve_linear_system(rows, TIME_JETS)
    if det.is_zero():
        raise ValueError("characteristic degeneracy: zero determinant")
    out = {tj: s for tj, s in zip(TIME_JETS, sol)}
    out["_det"] = det
    return out


def quasilinear_space_form(sys: PDESystem) -> dict:
    """Solve the residuals for the four x derivatives (stationary problems)."""
    rows = []
    zero_space = {name: ex.ZERO for name in SPACE_JETS}
    for res in sys.residuals:
        coeffs = [ex.diff(res, sj) for sj in SPACE_JETS]
        rhs = -ex.subs(res, zero_space)
        rows.append((coeffs, rhs))
    sol, det = _solve_linear_system(rows, SPACE_JETS)
    if det.is_zero():
        raise ValueError("characteristic degeneracy: zero determinant")
    out = {sj: s for sj, s in zip(SPACE_JETS, sol)}
    out["_det"] = det
    return out


def heat_flux_constraint(sys: PDESystem) -> Expr:
    """Solve the heat-flow residual for q (Eckart diagnostic).

    For lam = 0 the heat-flow equation carries no q_t, so it fixes q
    algebraically in terms of the remaining first derivatives.
    """
    d4 = sys.residuals[3]
    q = ex.sym("q")
    a = ex.diff(d4, "q")
    if a.is_zero():
        raise ValueError("residual does not determine q")
    b = ex.subs(d4, {"q": ex.ZERO})
    return -b / a


def residual_at(sys: PDESystem, state: FluidState, jets: Mapping[str, float],
                extra: Mapping[str, float] | None = None) -> tuple:
    """Numeric residual values at a state with given first-derivative jets."""
    env = state.env()
    for name in JETS:
        env[name] = float(jets.get(name, 0.0))
    if extra:
        env.update(extra)
    return tuple(ex.evalf(res, env) for res in sys.residuals)
