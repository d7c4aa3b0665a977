"""Structure of the symmetry algebra: commutators, structure constants,
solvability, the adjoint representation and canonical one-dimensional
subalgebra representatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import expr as ex
from . import symmetry as sm
from .symmetry import VectorField

__all__ = [
    "AlgebraElement",
    "LieAlgebra",
    "adjoint_action",
    "commutator",
    "is_solvable",
    "normalize_element",
    "structure_constants",
]


def commutator(V: VectorField, W: VectorField) -> VectorField:
    """[V, W]: coefficient-wise V(W_coeff) - W(V_coeff)."""
    coeffs = []
    for var in ("t", "x", "psi", "n", "rho", "q"):
        cv = V.coefficients()[var]
        cw = W.coefficients()[var]
        coeffs.append(V.apply(cw) - W.apply(cv))
    return VectorField(*coeffs)


def _expand_in_basis(V: VectorField, basis: Sequence[VectorField]) -> list | None:
    """Exact coordinates of V in the given basis, or None if outside the span."""
    ansatz = sm.Ansatz(degree=2)
    vecs = [sm._field_to_vector(b, ansatz) for b in basis]
    target = sm._field_to_vector(V, ansatz)
    coords = sorted({k for v in vecs for k in v} | set(target))
    mat = [[vecs[j].get(c, Fraction(0)) for j in range(len(basis))] + [target.get(c, Fraction(0))]
           for c in coords]
    ncols = len(basis)
    # gaussian elimination with exact back-substitution
    rank = 0
    piv = []
    for c in range(ncols):
        sel = None
        for r in range(rank, len(mat)):
            if mat[r][c]:
                sel = r
                break
        if sel is None:
            continue
        mat[rank], mat[sel] = mat[sel], mat[rank]
        pv = mat[rank][c]
        mat[rank] = [v / pv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        piv.append(c)
        rank += 1
    out = [Fraction(0)] * ncols
    for i, c in enumerate(piv):
        out[c] = mat[i][ncols]
    for r in range(rank, len(mat)):
        if mat[r][ncols]:
            return None
    return out


@dataclass(frozen=True)
class AlgebraElement:
    coefficients: tuple  # rationals or floats over the basis

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    def is_zero(self) -> bool:
        return all(not c for c in self.coefficients)


@dataclass(frozen=True)
class LieAlgebra:
    basis: tuple  # VectorFields
    constants: dict  # (i, j, k) -> Fraction with [V_i, V_j] = sum_k c^k_ij V_k

    @property
    def dim(self) -> int:
        return len(self.basis)

    def c(self, i: int, j: int, k: int) -> Fraction:
        return self.constants.get((i, j, k), Fraction(0))

    def bracket_coords(self, a: Sequence, b: Sequence) -> list:
        out = [Fraction(0) if isinstance(a[0], Fraction) else 0.0] * self.dim
        for i in range(self.dim):
            if not a[i]:
                continue
            for j in range(self.dim):
                if not b[j]:
                    continue
                for k in range(self.dim):
                    cijk = self.c(i, j, k)
                    if cijk:
                        out[k] = out[k] + a[i] * b[j] * cijk
        return out

    def ad_matrix(self, i: int) -> list:
        """Matrix of ad_{V_i}: column j holds the coordinates of [V_i, V_j]."""
        mat = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for j in range(self.dim):
            for k in range(self.dim):
                mat[k][j] = self.c(i, j, k)
        return mat

    def field_of(self, w) -> VectorField:
        coeffs = w.coefficients if isinstance(w, AlgebraElement) else w
        out = None
        for c, V in zip(coeffs, self.basis):
            term = V.scale(ex.number(c)) if isinstance(c, (int, Fraction)) else V.scale(c)
            out = term if out is None else out + term
        return out


def structure_constants(basis: Sequence[VectorField]) -> LieAlgebra:
    """Exact structure constants; raises if the basis is not closed."""
    constants = {}
    for i in range(len(basis)):
        for j in range(len(basis)):
            if i == j:
                continue
            com = commutator(basis[i], basis[j])
            if com.is_zero():
                continue
            coords = _expand_in_basis(com, basis)
            if coords is None:
                raise ValueError(
                    f"basis not closed under commutator at pair ({i + 1}, {j + 1})")
            for k, c in enumerate(coords):
                if c:
                    constants[(i, j, k)] = c
    return LieAlgebra(basis=tuple(basis), constants=constants)


def jacobi_defect(alg: LieAlgebra) -> Fraction:
    """Max |cyclic sum| over all index triples; exactly zero for a Lie algebra."""
    worst = Fraction(0)
    d = alg.dim
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for m in range(d):
                    total = Fraction(0)
                    for l in range(d):
                        total += alg.c(j, k, l) * alg.c(i, l, m)
                        total += alg.c(k, i, l) * alg.c(j, l, m)
                        total += alg.c(i, j, l) * alg.c(k, l, m)
                    worst = max(worst, abs(total))
    return worst


def derived_series(alg: LieAlgebra) -> list:
    """Dimensions of the derived series, computed on coordinates."""
    def span_close(vectors):
        # row reduce a list of coordinate vectors
        rows = [list(v) for v in vectors]
        rank = 0
        for c in range(alg.dim):
            sel = None
            for r in range(rank, len(rows)):
                if rows[r][c]:
                    sel = r
                    break
            if sel is None:
                continue
            rows[rank], rows[sel] = rows[sel], rows[rank]
            pv = rows[rank][c]
            rows[rank] = [v / pv for v in rows[rank]]
            for r in range(len(rows)):
                if r != rank and rows[r][c]:
                    f = rows[r][c]
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
            rank += 1
        return rows[:rank]

    current = span_close([[Fraction(1) if i == j else Fraction(0)
                           for j in range(alg.dim)] for i in range(alg.dim)])
    dims = [len(current)]
    while True:
        brackets = []
        for a in current:
            for b in current:
                v = alg.bracket_coords(a, b)
                if any(v):
                    brackets.append(v)
        nxt = span_close(brackets)
        dims.append(len(nxt))
        if len(nxt) == 0 or len(nxt) == dims[-2]:
            return dims
        current = nxt


def witness_order_valid(alg: LieAlgebra, order: Sequence[int]) -> bool:
    """Check [V_i, V_j] in span{V_ord[0]..V_ord[p-1]} for every position p
    of ord and every earlier position i."""
    for p in range(len(order)):
        prefix = set(order[:p])
        for a in range(p):
            v = alg.bracket_coords(_unit(alg.dim, order[a]),
                                   _unit(alg.dim, order[p]))
            for k, c in enumerate(v):
                if c and k not in prefix:
                    return False
    return True


def is_solvable(alg: LieAlgebra):
    """(solvable?, witness basis ordering) per the triangular criterion.

    On success the returned index order satisfies [V_i, V_j] in
    span{V_1..V_{j-1}} for i < j.  The witness is searched over basis
    permutations (exact check), which suffices for the algebras here.
    """
    dims = derived_series(alg)
    solvable = dims[-1] == 0
    if not solvable:
        return False, None
    import itertools
    if witness_order_valid(alg, list(range(alg.dim))):
        return True, list(range(alg.dim))
    for order in itertools.permutations(range(alg.dim)):
        if witness_order_valid(alg, list(order)):
            return True, list(order)
    return True, None


def _unit(n, i):
    v = [Fraction(0)] * n
    v[i] = Fraction(1)
    return v


def _rank_frac(rows) -> int:
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    rank = 0
    for c in range(len(m[0])):
        sel = None
        for r in range(rank, len(m)):
            if m[r][c]:
                sel = r
                break
        if sel is None:
            continue
        m[rank], m[sel] = m[sel], m[rank]
        pv = m[rank][c]
        m[rank] = [v / pv for v in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _is_nilpotent(mat, dim) -> bool:
    m = [row[:] for row in mat]
    for _ in range(dim):
        m = _mat_mul(m, mat)
        if all(not v for row in m for v in row):
            return True
    return False


def _mat_mul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]


def adjoint_action(alg: LieAlgebra, eps, i: int, w) -> AlgebraElement:
    """Ad(exp(eps*V_i)) w = exp(-eps*ad_{V_i}) w.

    Exact (rational/closed-form) when ad_{V_i} is nilpotent or diagonal;
    otherwise a scaled-and-squared numeric matrix exponential is used.
    """
    coords = list(w.coefficients if isinstance(w, AlgebraElement) else w)
    mat = alg.ad_matrix(i)
    dim = alg.dim
    diag = all(mat[r][c] == 0 for r in range(dim) for c in range(dim) if r != c)
    if diag:
        out = []
        for k in range(dim):
            lam = mat[k][k]
            factor = math.exp(-float(eps) * float(lam)) if lam else 1.0
            if lam == 0:
                out.append(coords[k])
            else:
                out.append(factor * float(coords[k]))
        return AlgebraElement(tuple(out))
    if _is_nilpotent(mat, dim):
        # finite series with exact rational arithmetic when eps is rational
        exact = isinstance(eps, (int, Fraction)) and \
            all(isinstance(c, (int, Fraction)) for c in coords)
        e = Fraction(eps) if exact else float(eps)
        acc = list(coords)
        term = list(coords)
        fact = 1
        for p in range(1, dim + 1):
            term = [-e * x for x in _mat_apply(mat, term)]
            fact *= p
            acc = [a + t / fact for a, t in zip(acc, term)]
            if all(not v for v in term):
                break
        return AlgebraElement(tuple(acc))
    from scipy.linalg import expm
    m = np.array([[float(v) for v in row] for row in mat])
    vec = np.array([float(c) for c in coords])
    return AlgebraElement(tuple(expm(-float(eps) * m) @ vec))


def _mat_apply(mat, vec):
    n = len(mat)
    return [sum(mat[i][j] * vec[j] for j in range(n)) for i in range(n)]


def adjoint_table_entry(alg: LieAlgebra, i: int, j: int) -> str:
    """Symbolic text of Ad(exp(eps*V_i)) V_j for table emission."""
    dim = alg.dim
    mat = alg.ad_matrix(i)
    # column j of exp(-eps*ad): exact for the nilpotent/diagonal cases
    col = [Fraction(1) if k == j else Fraction(0) for k in range(dim)]
    diag = all(mat[r][c] == 0 for r in range(dim) for c in range(dim) if r != c)
    if diag:
        lam = mat[j][j]
        if lam == 0:
            return f"V{j + 1}"
        coeff = "exp(eps)" if lam == -1 else (
            "exp(-eps)" if lam == 1 else f"exp({-lam}*eps)")
        return f"{coeff}*V{j + 1}"
    if _is_nilpotent(mat, dim):
        # exp(-eps*ad) V_j = V_j - eps*[V_i, V_j] + ... (finite)
        terms = {j: "1"}
        vec = {j: Fraction(1)}
        out = [f"V{j + 1}"]
        current = [Fraction(1) if k == j else Fraction(0) for k in range(dim)]
        sign = Fraction(-1)
        fact = 1
        epspow = "eps"
        for p in range(1, dim + 1):
            current = _mat_apply(mat, current)
            if not any(current):
                break
            fact *= p
            for k, c in enumerate(current):
                c = sign * c / fact
                if c:
                    mag = "" if abs(c) == 1 else f"{abs(c)}*"
                    s = " - " if c < 0 else " + "
                    out.append(f"{s}{mag}{epspow}*V{k + 1}")
            sign = -sign
            epspow = f"eps^{p + 1}"
        return "".join(out)
    raise ValueError("no closed-form adjoint entry for this generator")


def commutator_table_entry(alg: LieAlgebra, i: int, j: int) -> str:
    coords = [alg.c(i, j, k) for k in range(alg.dim)]
    if not any(coords):
        return "0"
    parts = []
    for k, c in enumerate(coords):
        if not c:
            continue
        if c == 1:
            parts.append(f"V{k + 1}" if not parts else f"+ V{k + 1}")
        elif c == -1:
            parts.append(f"-V{k + 1}" if not parts else f"- V{k + 1}")
        else:
            parts.append(f"{c}*V{k + 1}" if not parts else f"+ {c}*V{k + 1}")
    return " ".join(parts)


def normalize_element(alg: LieAlgebra, w) -> tuple:
    """Canonical representative of the one-dimensional subalgebra span{w}.

    Deterministic rules for the four-generator table algebra
    (V1,V2 translations; V3 dilatation; V4 field scaling):
      * translations absorb into V3 when the V3 coefficient is nonzero;
      * the translation pair is rescaled to unit sup-norm with the V3
        action when V3 is absent;
      * finally the leading surviving coefficient is scaled to +-1.
    Returns (AlgebraElement, list of (action, parameter) applied).
    """
    coords = [float(c) for c in (w.coefficients if isinstance(w, AlgebraElement) else w)]
    if not any(abs(c) > 0 for c in coords):
        raise ValueError("zero element has no one-dimensional subalgebra")
    word = []
    dim = alg.dim
    idx_dil = _index_of(alg, sm.v_dilation())
    idx_t = _index_of(alg, sm.v_time())
    idx_x = _index_of(alg, sm.v_space())
    if idx_dil is not None and abs(coords[idx_dil]) > 1e-14:
        # Ad(exp(eps V1)) shifts a1 by -eps*a3; kill both translations
        for idx in (idx_t, idx_x):
            if idx is None:
                continue
            if abs(coords[idx]) > 1e-14:
                epsv = coords[idx] / coords[idx_dil]
                out = adjoint_action(alg, epsv, idx, coords)
                coords = [float(c) for c in out.coefficients]
                word.append((f"Ad(exp(eps*V{idx + 1}))", epsv))
    elif idx_dil is not None:
        # no dilatation part: V3-action scales translations; normalize size
        tr = [abs(coords[i]) for i in (idx_t, idx_x) if i is not None]
        mx = max(tr) if tr else 0.0
        if mx > 1e-14 and abs(mx - 1.0) > 1e-14:
            epsv = math.log(mx)
            out = adjoint_action(alg, epsv, idx_dil, coords)
            coords = [float(c) for c in out.coefficients]
            word.append((f"Ad(exp(eps*V{idx_dil + 1}))", epsv))
    # positive scaling of the leading surviving coefficient to +-1
    lead = None
    for c in coords:
        if abs(c) > 1e-12:
            lead = abs(c)
            break
    if lead is not None and abs(lead - 1.0) > 1e-14:
        coords = [c / lead for c in coords]
        word.append(("scale", 1.0 / lead))
    coords = [0.0 if abs(c) < 1e-12 else c for c in coords]
    return AlgebraElement(tuple(coords)), word


def _index_of(alg: LieAlgebra, field: VectorField):
    target = sm._field_to_vector(field, sm.Ansatz(degree=1))
    for i, b in enumerate(alg.basis):
        if sm._field_to_vector(b, sm.Ansatz(degree=1)) == target:
            return i
    return None


def table_algebra(theory: str) -> LieAlgebra:
    """The named generator list used for commutator/adjoint table output.

    Four generators for the lam = 0 theory, three for lam = 1, matching the
    reference tables cell-for-cell; both are genuine subalgebras of the
    computed five-dimensional symmetry algebra.
    """
    if theory == "eckart":
        basis = [sm.v_time(), sm.v_space(), sm.v_dilation(), sm.v_scaling()]
    elif theory == "israel-stewart":
        basis = [sm.v_time(), sm.v_space(), sm.v_dilation()]
    else:
        raise ValueError(f"unknown theory '{theory}'")
    return structure_constants(basis)


def full_algebra() -> LieAlgebra:
    """The five-dimensional point-symmetry algebra shared by both theories."""
    basis = [sm.v_time(), sm.v_space(), sm.v_dilation(), sm.v_scaling(),
             sm.v_lorentz_boost()]
    return structure_constants(basis)
