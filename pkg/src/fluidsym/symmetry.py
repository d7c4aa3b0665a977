"""Point-symmetry machinery: prolongation, determining equations, solving.

A candidate generator is written with polynomial coefficient functions of
the base variables (t, x, psi, n, rho, q); demanding that its first
prolongation annihilate the fluid residuals on the solution manifold yields
a homogeneous linear system for the polynomial coefficients.  The solution
manifold is parameterized by eliminating the four time-derivative jets with
the quasilinear solved form, after which the residual of the symmetry
condition must vanish identically in the remaining coordinates; equating
every monomial coefficient to zero gives the determining equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import expr as ex
from . import fluid
from .expr import Expr
from .fluid import JET_SPACE, PDESystem, TIME_JETS, FIELD_NAMES

__all__ = [
    "Ansatz",
    "VectorField",
    "prolong1",
    "determining_equations",
    "solve_determining",
    "verify_symmetry",
]

BASE_VARS = ("t", "x") + FIELD_NAMES
_SLOTS = ("tau", "xi", "phi", "sigma", "gamma", "omega")
_SLOT_VAR = {"tau": "t", "xi": "x", "phi": "psi",
             "sigma": "n", "gamma": "rho", "omega": "q"}


@dataclass(frozen=True)
class VectorField:
    """Infinitesimal generator tau*d_t + xi*d_x + phi*d_psi + sigma*d_n
    + gamma*d_rho + omega*d_q with jet-free coefficients."""

    tau: Expr
    xi: Expr
    phi: Expr
    sigma: Expr
    gamma: Expr
    omega: Expr

    def coefficients(self) -> dict:
        return {"t": self.tau, "x": self.xi, "psi": self.phi,
                "n": self.sigma, "rho": self.gamma, "q": self.omega}

    def apply(self, e: Expr) -> Expr:
        """Act on a jet-free expression as a first-order operator."""
        out = ex.ZERO
        for var, coeff in self.coefficients().items():
            if not coeff.is_zero():
                out = out + coeff * ex.diff(e, var)
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.tau + other.tau, self.xi + other.xi,
                           self.phi + other.phi, self.sigma + other.sigma,
                           self.gamma + other.gamma, self.omega + other.omega)

    def scale(self, c) -> "VectorField":
        c = ex.number(c) if not isinstance(c, Expr) else c
        return VectorField(*(c * v for v in self._tuple()))

    def _tuple(self):
        return (self.tau, self.xi, self.phi, self.sigma, self.gamma, self.omega)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self._tuple())

    def text(self) -> str:
        names = ("d_t", "d_x", "d_psi", "d_n", "d_rho", "d_q")
        parts = []
        for coeff, basis in zip(self._tuple(), names):
            if coeff.is_zero():
                continue
            txt = ex.to_text(coeff)
            if txt == "1":
                parts.append(basis)
            elif txt == "-1":
                parts.append(f"-{basis}")
            else:
                if "+" in txt or (" - " in txt):
                    txt = f"({txt})"
                parts.append(f"{txt}*{basis}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        return out


def field_from_text(text: str) -> VectorField:
    """Parse the d_var component notation emitted by VectorField.text()."""
    coeffs = {v: ex.ZERO for v in BASE_VARS}
    basis = {"d_t": "t", "d_x": "x", "d_psi": "psi",
             "d_n": "n", "d_rho": "rho", "d_q": "q"}
    expr = ex.parse(text.replace("d_psi", "D_PSI").replace("d_rho", "D_RHO")
                    .replace("d_t", "D_T").replace("d_x", "D_X")
                    .replace("d_n", "D_N").replace("d_q", "D_Q"))
    markers = {"D_T": "t", "D_X": "x", "D_PSI": "psi",
               "D_N": "n", "D_RHO": "rho", "D_Q": "q"}
    for marker, var in markers.items():
        coeffs[var] = ex.diff(expr, marker)
    return VectorField(coeffs["t"], coeffs["x"], coeffs["psi"],
                       coeffs["n"], coeffs["rho"], coeffs["q"])


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    jets: dict  # jet symbol name -> Expr


def prolong1(V: VectorField) -> ProlongedField:
    """First prolongation via the reduced formula.

    phi_u^d = D_d(phi_u) - u_x D_d(xi) - u_t D_d(tau); the second-order jet
    terms of the textbook formula cancel identically, which the test suite
    verifies once symbolically.
    """
    jets = {}
    dxi = {d: JET_SPACE.total_derivative(V.xi, d) for d in ("t", "x")}
    dtau = {d: JET_SPACE.total_derivative(V.tau, d) for d in ("t", "x")}
    per_field = {"psi": V.phi, "n": V.sigma, "rho": V.gamma, "q": V.omega}
    for u, coeff in per_field.items():
        ux = ex.sym(JET_SPACE.jet(u, "x"))
        ut = ex.sym(JET_SPACE.jet(u, "t"))
        for d in ("t", "x"):
            val = JET_SPACE.total_derivative(coeff, d) - ux * dxi[d] - ut * dtau[d]
            jets[JET_SPACE.jet(u, d)] = val
    return ProlongedField(base=V, jets=jets)


def prolonged_action(V: VectorField, residual: Expr) -> Expr:
    """pr(1)V applied to a quasilinear residual (off-shell)."""
    pr = prolong1(V)
    out = ex.ZERO
    for var, coeff in V.coefficients().items():
        if not coeff.is_zero():
            out = out + coeff * ex.diff(residual, var)
    for jet, coeff in pr.jets.items():
        if not coeff.is_zero():
            d = ex.diff(residual, jet)
            if not d.is_zero():
                out = out + coeff * d
    return out


@dataclass(frozen=True)
class Ansatz:
    """Polynomial coefficient ansatz: one unknown constant per
    (coefficient slot, monomial) pair."""

    degree: int = 1

    def monomials(self) -> list:
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        monos = [ex.ONE]
        layer = [ex.ONE]
        for _ in range(self.degree):
            nxt = []
            for m in layer:
                for v in BASE_VARS:
                    cand = m * ex.sym(v)
                    if cand not in monos and cand not in nxt:
                        nxt.append(cand)
            monos.extend(nxt)
            layer = nxt
        return monos

    def unknowns(self) -> list:
        count = len(self.monomials()) * len(_SLOTS)
        return [f"c{i}" for i in range(count)]

    def field(self) -> VectorField:
        """Generator with all unknowns symbolic."""
        monos = self.monomials()
        coeffs = {}
        i = 0
        for slot in _SLOTS:
            total = ex.ZERO
            for m in monos:
                total = total + ex.sym(f"c{i}") * m
                i += 1
            coeffs[slot] = total
        return VectorField(coeffs["tau"], coeffs["xi"], coeffs["phi"],
                           coeffs["sigma"], coeffs["gamma"], coeffs["omega"])

    def elementary_fields(self) -> list:
        """One generator per unknown, with that coefficient set to 1."""
        monos = self.monomials()
        fields = []
        for si, slot in enumerate(_SLOTS):
            for m in monos:
                vals = [ex.ZERO] * 6
                vals[si] = m
                fields.append(VectorField(*vals))
        return fields

    def assemble(self, coeffs: dict) -> VectorField:
        """Build the generator for an assignment {unknown: Fraction}."""
        monos = self.monomials()
        vals = []
        i = 0
        for slot in _SLOTS:
            total = ex.ZERO
            for m in monos:
                c = coeffs.get(f"c{i}", 0)
                if c:
                    total = total + ex.number(c) * m
                i += 1
            vals.append(total)
        return VectorField(*vals)


# Priority ordering of unknowns used for the echelon solve: it makes the
# emitted basis come out as translations, then the space-time dilatation,
# then field scalings, matching the commutator-table ordering.
def _unknown_priority(ansatz: Ansatz) -> list:
    monos = ansatz.monomials()
    names = {}
    i = 0
    for slot in _SLOTS:
        for m in monos:
            names[(slot, m.key())] = f"c{i}"
            i += 1

    def get(slot, mono_expr):
        return names.get((slot, mono_expr.key()))

    priority = []
    preferred = [("tau", ex.ONE), ("xi", ex.ONE),
                 ("tau", ex.sym("t")), ("gamma", ex.sym("rho")),
                 ("phi", ex.ONE), ("sigma", ex.sym("n")),
                 ("omega", ex.sym("q"))]
    for slot, m in preferred:
        u = get(slot, m)
        if u is not None:
            priority.append(u)
    for u in names.values():
        if u not in priority:
            priority.append(u)
    return priority


def on_shell_map(sys: PDESystem) -> dict:
    """Time-jet elimination map from the quasilinear solved form."""
    qf = fluid.quasilinear_time_form(sys)
    return {tj: qf[tj] for tj in TIME_JETS}


def _cleared_on_shell(on_shell: dict):
    """Split the time-jet map into cleared numerators over a common denominator."""
    dens = {tj: ex.denominator(on_shell[tj]) for tj in on_shell}
    keys = {d.key() for d in dens.values()}
    if len(keys) != 1:
        # bring to a common denominator the slow way
        common = ex.ONE
        seen = set()
        for d in dens.values():
            if d.key() not in seen:
                seen.add(d.key())
                common = common * d
        nums = {tj: ex.numerator(on_shell[tj] * common) for tj in on_shell}
        return nums, common
    common = next(iter(dens.values()))
    nums = {tj: ex.numerator(on_shell[tj]) for tj in on_shell}
    return nums, common


def _substitute_cleared(act: Expr, nums: dict, common: Expr,
                        cache: dict) -> Expr:
    """act with time jets replaced, multiplied through by common**2.

    act must be a Laurent polynomial (denominator one) of degree <= 2 in the
    time jets; the result is again denominator-free, so no rational-function
    arithmetic happens while rows accumulate.
    """
    parts = ex.collect(act, list(nums))
    out = ex.ZERO
    for key, coeff in parts.items():
        deg = sum(k for _, k in key)
        if deg > 2:
            raise ValueError("unexpected cubic time-jet term")
        factor = cache.get(key)
        if factor is None:
            factor = ex.ONE
            for name, k in key:
                for _ in range(k):
                    factor = factor * nums[name]
            for _ in range(2 - deg):
                factor = factor * common
            cache[key] = factor
        out = out + coeff * factor
    return out


def determining_equations(sys: PDESystem, ansatz: Ansatz,
                          on_shell: dict | None = None) -> list:
    """Linear forms (dicts unknown -> Fraction) whose common nullspace is
    the symmetry algebra within the ansatz class."""
    if on_shell is None:
        on_shell = on_shell_map(sys)
    nums, common = _cleared_on_shell(on_shell)
    unknown_names = ansatz.unknowns()
    fields = ansatz.elementary_fields()
    totals = [ex.ZERO] * len(sys.residuals)
    cache: dict = {}
    res_clear = []
    for res in sys.residuals:
        # clear monomial denominators (1/rho, 1/n) into Laurent numerators
        res_clear.append(res * ex.denominator(res))
    for name, Vu in zip(unknown_names, fields):
        cu = ex.sym(name)
        pr = prolong1(Vu)
        for k, res in enumerate(res_clear):
            act = _action_with_prolongation(Vu, pr, res)
            if act.is_zero():
                continue
            if not ex.denominator(act).equivalent(ex.ONE):
                act = act * ex.denominator(act)
            cleared = _substitute_cleared(act, nums, common, cache)
            if not cleared.is_zero():
                totals[k] = totals[k] + cu * cleared
    rows = []
    seen = set()
    unknown_set = set(unknown_names)
    for total in totals:
        if total.is_zero():
            continue
        groups: dict = {}
        for (atoms, exparg), c in total.num.items():
            cname = None
            rest = []
            for a, e in atoms:
                if a[0] == "s" and a[1] in unknown_set:
                    if cname is not None or e != 1:
                        raise ValueError("ansatz produced nonlinear unknown terms")
                    cname = a[1]
                else:
                    rest.append((a, e))
            if cname is None:
                raise ValueError("ansatz produced unknown-free residual terms")
            key = (tuple(rest), exparg.key() if exparg is not None else None)
            groups.setdefault(key, {})
            groups[key][cname] = groups[key].get(cname, Fraction(0)) + c
        for key in sorted(groups, key=str):
            row = {k: v for k, v in groups[key].items() if v}
            if not row:
                continue
            sig = tuple(sorted((k, str(v)) for k, v in row.items()))
            if sig not in seen:
                seen.add(sig)
                rows.append(row)
    return rows


def _action_with_prolongation(V: VectorField, pr: "ProlongedField",
                              residual: Expr) -> Expr:
    out = ex.ZERO
    for var, coeff in V.coefficients().items():
        if not coeff.is_zero():
            d = ex.diff(residual, var)
            if not d.is_zero():
                out = out + coeff * d
    for jet, coeff in pr.jets.items():
        if not coeff.is_zero():
            d = ex.diff(residual, jet)
            if not d.is_zero():
                out = out + coeff * d
    return out


# Two generic positive rational parameter points; solving at both and
# intersecting guards against accidental degeneracies at a special point.
_PARAM_POINTS = ((Fraction(1), Fraction(1)), (Fraction(2, 3), Fraction(3, 5)))


def solve_determining(sys_or_lam, ansatz: Ansatz = None) -> list:
    """Nullspace basis of the determining system, as vector fields.

    Accepts a PDESystem (its lam is reused) or a bare lam value.  Parameters
    k and kappa are instantiated at two generic rational points and the
    nullspaces intersected; the returned basis is deterministic.
    """
    if ansatz is None:
        ansatz = Ansatz(degree=1)
    lam = sys_or_lam.params.lam if isinstance(sys_or_lam, PDESystem) else Fraction(sys_or_lam)
    rows = []
    for k_val, kappa_val in _PARAM_POINTS:
        inst = fluid.build_system(fluid.FluidParams(k=k_val, kappa=kappa_val, lam=lam))
        rows.extend(determining_equations(inst, ansatz))
    priority = _unknown_priority(ansatz)
    basis_vectors = ex.nullspace(rows, priority)
    fields = [ansatz.assemble(vec) for vec in basis_vectors]
    return [f for f in fields if not f.is_zero()]


def verify_symmetry(V: VectorField, sys: PDESystem,
                    on_shell: dict | None = None) -> list:
    """On-shell residual of the symmetry condition, one Expr per equation.

    All residuals structurally zero iff V generates a point symmetry.  The
    residuals are returned cleared of the (nonzero) characteristic
    determinant, which does not affect the zero test.
    """
    if on_shell is None:
        on_shell = on_shell_map(sys)
    nums, common = _cleared_on_shell(on_shell)
    cache: dict = {}
    pr = prolong1(V)
    out = []
    for res in sys.residuals:
        act = _action_with_prolongation(V, pr, res * ex.denominator(res))
        if not act.is_zero():
            if not ex.denominator(act).equivalent(ex.ONE):
                act = act * ex.denominator(act)
            act = _substitute_cleared(act, nums, common, cache)
        out.append(act)
    return out


def in_span(V: VectorField, basis: Sequence[VectorField],
            ansatz: Ansatz = None) -> bool:
    """Exact membership of V in the rational span of a basis (affine fields)."""
    if ansatz is None:
        ansatz = Ansatz(degree=1)
    vecs = []
    for f in list(basis) + [V]:
        vecs.append(_field_to_vector(f, ansatz))
    unknowns = [f"a{i}" for i in range(len(basis))]
    rows = []
    # solve sum a_i basis_i = V coordinate-wise; solvable iff V in span
    coords = sorted({k for v in vecs for k in v})
    mat = []
    for c in coords:
        row = {unknowns[i]: vecs[i].get(c, Fraction(0)) for i in range(len(basis))}
        row["rhs"] = vecs[-1].get(c, Fraction(0))
        mat.append(row)
    # gaussian elimination on the small dense system
    m = [[r[u] for u in unknowns] + [r["rhs"]] for r in mat]
    ncols = len(unknowns)
    rank_a = _rank([row[:ncols] for row in m])
    rank_aug = _rank(m)
    return rank_a == rank_aug


def span_equal(basis1: Sequence[VectorField], basis2: Sequence[VectorField]) -> bool:
    return all(in_span(v, basis2) for v in basis1) and \
        all(in_span(v, basis1) for v in basis2)


def _field_to_vector(V: VectorField, ansatz: Ansatz) -> dict:
    monos = ansatz.monomials()
    out = {}
    i = 0
    for slot, coeff in zip(_SLOTS, V._tuple()):
        parts = ex.collect(coeff, BASE_VARS)
        covered = ex.ZERO
        for m in monos:
            mk = _mono_key_of(m)
            if mk in parts:
                c = parts[mk]
                if not c.is_rational():
                    raise ValueError("field is not in the polynomial ansatz class")
                if not c.is_zero():
                    out[f"c{i}"] = c.as_fraction()
                covered = covered + c * m
            i += 1
        if not (coeff - covered).is_zero():
            raise ValueError("field has monomials outside the ansatz")
    return out


def _mono_key_of(m: Expr):
    parts = ex.collect(m, BASE_VARS)
    if len(parts) != 1:
        raise ValueError("not a monomial")
    return next(iter(parts))


def _rank(rows) -> int:
    m = [list(map(Fraction, r)) for r in rows if any(r)]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = None
        for r in range(rank, len(m)):
            if m[r][c]:
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][c]
        m[rank] = [v / pv for v in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def canonical_presentation(basis: Sequence[VectorField]) -> list:
    """Re-present a computed basis in a stable, readable generator order.

    Named generators contained in the span are emitted first (translations,
    field scaling, dilatation, boost), then any remaining independent
    directions from the raw basis.
    """
    named = [v_time(), v_space(), v_dilation(), v_scaling(), v_lorentz_boost()]
    out = []
    for g in named:
        if in_span(g, list(basis)) and not in_span(g, out):
            out.append(g)
    for f in basis:
        if not in_span(f, out):
            out.append(f)
    return out


# Named generators in the commutator-table ordering.
def v_time() -> VectorField:
    return VectorField(ex.ONE, ex.ZERO, ex.ZERO, ex.ZERO, ex.ZERO, ex.ZERO)


def v_space() -> VectorField:
    return VectorField(ex.ZERO, ex.ONE, ex.ZERO, ex.ZERO, ex.ZERO, ex.ZERO)


def v_dilation() -> VectorField:
    return VectorField(ex.sym("t"), ex.sym("x"), ex.ZERO,
                       -ex.sym("n"), ex.ZERO, ex.ZERO)


def v_scaling() -> VectorField:
    return VectorField(ex.ZERO, ex.ZERO, ex.ZERO, ex.ZERO,
                       ex.sym("rho"), ex.sym("q"))


def v_rapidity_shift() -> VectorField:
    """d_psi alone; not a symmetry (kept as a negative-control generator)."""
    return VectorField(ex.ZERO, ex.ZERO, ex.ONE, ex.ZERO, ex.ZERO, ex.ZERO)


def v_lorentz_boost() -> VectorField:
    """x*d_t + t*d_x - d_psi: the Lorentz boost in rapidity variables."""
    return VectorField(ex.sym("x"), ex.sym("t"), -ex.ONE,
                       ex.ZERO, ex.ZERO, ex.ZERO)
