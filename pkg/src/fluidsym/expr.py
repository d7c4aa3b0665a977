"""Exact symbolic expression kernel.

Expressions are kept in a canonical normalized form at all times: a ratio of
two Laurent polynomials with rational coefficients over a set of atoms.  An
atom is either a named symbol or a ``ln(...)`` application; ``exp(...)``
factors are carried separately inside each monomial so that products of
exponentials merge by adding their arguments.  Hyperbolic functions never
survive normalization: ``sinh u``, ``cosh u`` and ``tanh u`` are rewritten in
terms of ``exp(u)`` on construction, which turns every hyperbolic identity
into Laurent-polynomial arithmetic and makes zero-testing decidable.

Zero testing is exact: an expression is zero iff its numerator polynomial is
empty.  Equality of two expressions is decided by cross-multiplication, so no
polynomial gcd machinery is needed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "DomainError",
    "Expr",
    "JetSpace",
    "NonPolynomialError",
    "SingularSubstitutionError",
    "collect",
    "nullspace",
    "parse",
]


class DomainError(ValueError):
    """Numeric evaluation hit a pole or an invalid function argument."""


class SingularSubstitutionError(ZeroDivisionError):
    """A substitution produced a structurally zero denominator."""


class NonPolynomialError(ValueError):
    """collect() was asked to decompose over symbols it cannot isolate."""


# Symbols are ordered for deterministic printing and monomial sorting:
# independent variables, the rapidity and its exponential, the remaining
# dependent variables, then everything else alphabetically.
_CANONICAL_ORDER = ("t", "x", "psi", "n", "rho", "q")


def _atom_sort_key(atom) -> tuple:
    if atom[0] == "s":
        name = atom[1]
        try:
            return (0, _CANONICAL_ORDER.index(name), name)
        except ValueError:
            return (1, 0, name)
    # ln atoms sort after all plain symbols, by their argument key
    return (2, 0, atom[1].key())


def _mono_sort_key(mono) -> tuple:
    atoms, exparg = mono
    degree = sum(e for _, e in atoms)
    vec = tuple((_atom_sort_key(a), -e) for a, e in atoms)
    ekey = exparg.key() if exparg is not None else ()
    return (degree, vec, ekey)


_ONE_MONO = ((), None)


def _mono_mul(m1, m2):
    """Multiply two monomials, merging exp factors by argument addition."""
    atoms1, e1 = m1
    atoms2, e2 = m2
    if not atoms2:
        atoms = atoms1
    elif not atoms1:
        atoms = atoms2
    else:
        acc = dict(atoms1)
        for a, e in atoms2:
            ne = acc.get(a, 0) + e
            if ne:
                acc[a] = ne
            else:
                del acc[a]
        atoms = tuple(sorted(acc.items(), key=lambda it: _atom_sort_key(it[0])))
    if e1 is None:
        exparg = e2
    elif e2 is None:
        exparg = e1
    else:
        s = e1 + e2
        exparg = None if s.is_zero() else s
    return (atoms, exparg)


def _poly_add(p1: dict, p2: dict) -> dict:
    if len(p1) < len(p2):
        p1, p2 = p2, p1
    out = dict(p1)
    for m, c in p2.items():
        nc = out.get(m, 0) + c
        if nc:
            out[m] = nc
        else:
            out.pop(m, None)
    return out


def _poly_mul(p1: dict, p2: dict) -> dict:
    if not p1 or not p2:
        return {}
    out: dict = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            m = _mono_mul(m1, m2)
            c = c1 * c2
            nc = out.get(m, 0) + c
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
    return out


def _poly_scale(p: dict, c: Fraction) -> dict:
    if not c:
        return {}
    return {m: cc * c for m, cc in p.items()}


def _poly_neg(p: dict) -> dict:
    return {m: -c for m, c in p.items()}


def _leading_mono(p: dict):
    return max(p, key=_mono_sort_key)


def _mono_div(m1, m2):
    """m1 / m2 as a Laurent monomial (always defined)."""
    atoms2, e2 = m2
    inv_atoms = tuple((a, -e) for a, e in atoms2)
    inv_exp = None if e2 is None else -e2
    return _mono_mul(m1, (inv_atoms, inv_exp))


def _poly_try_div(num: dict, den: dict, max_steps: int = None):
    """Exact polynomial division; returns quotient dict or None on failure."""
    if not num:
        return {}
    lead = _leading_mono(den)
    lead_c = den[lead]
    rem = dict(num)
    quo: dict = {}
    if max_steps is None:
        max_steps = len(num) * 4 + 8
    for _ in range(max_steps):
        if not rem:
            return quo
        rlead = _leading_mono(rem)
        qm = _mono_div(rlead, lead)
        qc = rem[rlead] / lead_c
        quo[qm] = quo.get(qm, 0) + qc
        rem = _poly_add(rem, _poly_mul({qm: -qc}, den))
    return None


class Expr:
    """Immutable normalized rational expression."""

    __slots__ = ("num", "den", "_key", "_hash")

    def __init__(self, num: dict, den: dict):
        # internal constructor; callers use the factory helpers below
        self.num = num
        self.den = den
        self._key = None
        self._hash = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def number(value) -> "Expr":
        c = Fraction(value)
        num = {_ONE_MONO: c} if c else {}
        return Expr(num, {_ONE_MONO: Fraction(1)})

    @staticmethod
    def symbol(name: str) -> "Expr":
        mono = (((("s", name), 1),), None)
        return Expr({mono: Fraction(1)}, {_ONE_MONO: Fraction(1)})

    @staticmethod
    def _normalized(num: dict, den: dict) -> "Expr":
        if not den:
            raise SingularSubstitutionError("zero denominator")
        if not num:
            return Expr({}, {_ONE_MONO: Fraction(1)})
        # strip the common Laurent-monomial content of the denominator
        if len(den) == 1:
            (m, c), = den.items()
            inv = (tuple((a, -e) for a, e in m[0]), None if m[1] is None else -m[1])
            num = _poly_mul(num, {inv: 1 / c})
            return Expr(num, {_ONE_MONO: Fraction(1)})
        # factor a common monomial out of the denominator terms
        common = _common_mono(den)
        if common != _ONE_MONO:
            inv = (tuple((a, -e) for a, e in common[0]),
                   None if common[1] is None else -common[1])
            den = _poly_mul(den, {inv: Fraction(1)})
            num = _poly_mul(num, {inv: Fraction(1)})
        # cheap exact-division attempt, only for small operands: catches the
        # frequent case where the denominator divides the numerator outright
        if len(den) <= 8 and len(num) <= 64:
            quo = _poly_try_div(num, den, max_steps=len(num) + 4)
            if quo is not None:
                return Expr(quo, {_ONE_MONO: Fraction(1)})
        # make the denominator monic on its leading monomial
        lc = den[_leading_mono(den)]
        if lc != 1:
            den = _poly_scale(den, 1 / lc)
            num = _poly_scale(num, 1 / lc)
        return Expr(num, den)

    # -- canonical key, equality, hashing ---------------------------------

    def key(self):
        if self._key is None:
            def mono_key(m):
                atoms, exparg = m
                akey = tuple(
                    (("s", a[1]) if a[0] == "s" else ("ln", a[1].key()), e)
                    for a, e in atoms
                )
                ekey = exparg.key() if exparg is not None else None
                return (akey, ekey)

            def poly_key(p):
                items = sorted(p.items(), key=lambda it: _mono_sort_key(it[0]))
                return tuple((mono_key(m), c.numerator, c.denominator) for m, c in items)

            self._key = (poly_key(self.num), poly_key(self.den))
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return self.key() == other.key()

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_rational(self) -> bool:
        return (not self.num or (len(self.num) == 1 and _ONE_MONO in self.num)) \
            and len(self.den) == 1 and _ONE_MONO in self.den

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("expression is not a plain rational constant")
        if not self.num:
            return Fraction(0)
        return self.num[_ONE_MONO] / self.den[_ONE_MONO]

    def atoms(self) -> set:
        """Names of plain symbols occurring anywhere in the expression."""
        names: set = set()

        def visit_poly(p):
            for m in p:
                at, exparg = m
                for a, _ in at:
                    if a[0] == "s":
                        names.add(a[1])
                    else:
                        names.update(a[1].atoms())
                if exparg is not None:
                    names.update(exparg.atoms())

        visit_poly(self.num)
        visit_poly(self.den)
        return names

    def equivalent(self, other) -> bool:
        """Mathematical equality by cross-multiplication (exact)."""
        other = _coerce(other)
        lhs = _poly_mul(self.num, other.den)
        rhs = _poly_mul(other.num, self.den)
        return not _poly_add(lhs, _poly_neg(rhs))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if self.den == other.den:
            return Expr._normalized(_poly_add(self.num, other.num), dict(self.den))
        num = _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den))
        return Expr._normalized(num, _poly_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return Expr(_poly_neg(self.num), dict(self.den))

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        return Expr._normalized(_poly_mul(self.num, other.num),
                                _poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.is_zero():
            raise SingularSubstitutionError("division by structurally zero expression")
        return Expr._normalized(_poly_mul(self.num, other.den),
                                _poly_mul(self.den, other.num))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, int) or (isinstance(exponent, Fraction)
                                         and exponent.denominator == 1):
            k = int(exponent)
            if k == 0:
                return ONE
            base = self if k > 0 else ONE / self
            out = ONE
            for _ in range(abs(k)):
                out = out * base
            return out
        # symbolic or non-integer exponent: u^e == exp(e*ln u)
        return exp(_coerce(exponent) * ln(self))

    def __repr__(self):
        return f"Expr({to_text(self)})"


def _common_mono(p: dict):
    """Greatest common Laurent monomial of all terms of p."""
    atoms_min: dict = None
    exp_common = None
    first = True
    for m in p:
        atoms, exparg = m
        d = dict(atoms)
        if first:
            atoms_min = d
            exp_common = exparg
            first = False
            continue
        if exp_common is not None and exp_common != exparg:
            exp_common = None
        for a in list(atoms_min):
            e = d.get(a)
            if e is None:
                # keep negative powers (they divide every monomial)
                if atoms_min[a] > 0:
                    del atoms_min[a]
            else:
                atoms_min[a] = min(atoms_min[a], e)
                if atoms_min[a] == 0:
                    del atoms_min[a]
    atoms = tuple(sorted(atoms_min.items(), key=lambda it: _atom_sort_key(it[0])))
    return (atoms, exp_common)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Expr.number(value)


ZERO = Expr.number(0)
ONE = Expr.number(1)


def number(v) -> Expr:
    return Expr.number(v)


def normalize(e: Expr) -> Expr:
    """Canonical form of an expression.

    Arithmetic in this module normalizes eagerly, so every Expr is already
    canonical and this is the identity; it exists as the explicit contract
    (idempotent, decidable structural equality of results).
    """
    return Expr._normalized(dict(e.num), dict(e.den))


def numerator(e: Expr) -> Expr:
    return Expr(dict(e.num), {_ONE_MONO: Fraction(1)})


def denominator(e: Expr) -> Expr:
    return Expr(dict(e.den), {_ONE_MONO: Fraction(1)})


def sym(name: str) -> Expr:
    return Expr.symbol(name)


def syms(names: str) -> list:
    return [Expr.symbol(n) for n in names.split()]


# -- function applications --------------------------------------------------


def exp(arg) -> Expr:
    arg = _coerce(arg)
    if arg.is_zero():
        return ONE
    # exp(k*ln u) with integer k folds back into a power of u
    if len(arg.num) == 1 and len(arg.den) == 1 and _ONE_MONO in arg.den:
        (mono, coeff), = arg.num.items()
        atoms, exparg = mono
        if exparg is None and len(atoms) == 1 and atoms[0][0][0] == "ln" \
                and atoms[0][1] == 1 and coeff.denominator == 1:
            return atoms[0][0][1] ** int(coeff)
    return Expr({((), arg): Fraction(1)}, {_ONE_MONO: Fraction(1)})


def ln(arg) -> Expr:
    arg = _coerce(arg)
    if arg == ONE:
        return ZERO
    if arg.is_zero():
        raise DomainError("ln of structurally zero expression")
    # ln(exp(u)) == u when the argument is a bare exponential
    if len(arg.num) == 1 and len(arg.den) == 1 and _ONE_MONO in arg.den:
        (mono, coeff), = arg.num.items()
        atoms, exparg = mono
        if coeff == 1 and not atoms and exparg is not None:
            return exparg
    atom = ("ln", arg)
    mono = (((atom, 1),), None)
    return Expr({mono: Fraction(1)}, {_ONE_MONO: Fraction(1)})


def sinh(arg) -> Expr:
    e = exp(arg)
    return (e - ONE / e) / 2


def cosh(arg) -> Expr:
    e = exp(arg)
    return (e + ONE / e) / 2


def tanh(arg) -> Expr:
    e = exp(arg)
    return (e - ONE / e) / (e + ONE / e)


# -- differentiation ---------------------------------------------------------


def _poly_diff(p: dict, name: str) -> Expr:
    """Derivative of a polynomial dict; dict-level fast path for plain
    symbol powers, Expr arithmetic only for chain rule through ln/exp."""
    fast: dict = {}
    slow = ZERO
    for (atoms, exparg), c in p.items():
        for i, (a, e) in enumerate(atoms):
            if a[0] == "s":
                if a[1] == name:
                    new_atoms = list(atoms)
                    if e == 1:
                        del new_atoms[i]
                    else:
                        new_atoms[i] = (a, e - 1)
                    m = (tuple(new_atoms), exparg)
                    nc = fast.get(m, 0) + c * e
                    if nc:
                        fast[m] = nc
                    else:
                        fast.pop(m, None)
            else:  # ln(u): chain term e * mono * u' / (u * ln(u))
                du = diff(a[1], name)
                if not du.is_zero():
                    base = Expr({(atoms, exparg): c}, {_ONE_MONO: Fraction(1)})
                    latom = Expr({(((a, 1),), None): Fraction(1)},
                                 {_ONE_MONO: Fraction(1)})
                    slow = slow + base * e * du / (a[1] * latom)
        if exparg is not None:
            darg = diff(exparg, name)
            if not darg.is_zero():
                base = Expr({(atoms, exparg): c}, {_ONE_MONO: Fraction(1)})
                slow = slow + base * darg
    out = Expr(fast, {_ONE_MONO: Fraction(1)})
    return out + slow if not slow.is_zero() else out


def diff(e: Expr, s) -> Expr:
    """Exact partial derivative treating all other symbols as constants."""
    name = s if isinstance(s, str) else _symbol_name(s)
    num_d = _poly_diff(e.num, name)
    if len(e.den) == 1 and _ONE_MONO in e.den:
        return num_d / e.den[_ONE_MONO]
    den_d = _poly_diff(e.den, name)
    den = Expr(dict(e.den), {_ONE_MONO: Fraction(1)})
    if den_d.is_zero():
        return num_d / den
    num = Expr(dict(e.num), {_ONE_MONO: Fraction(1)})
    return (num_d * den - num * den_d) / (den * den)


def _symbol_name(e: Expr) -> str:
    if len(e.num) == 1 and len(e.den) == 1 and _ONE_MONO in e.den:
        (mono, coeff), = e.num.items()
        atoms, exparg = mono
        if coeff == 1 and exparg is None and len(atoms) == 1 \
                and atoms[0][0][0] == "s" and atoms[0][1] == 1:
            return atoms[0][0][1]
    raise ValueError("expected a bare symbol")


# -- substitution ------------------------------------------------------------


def subs(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution followed by normalization."""
    table = {}
    for k, v in bindings.items():
        name = k if isinstance(k, str) else _symbol_name(k)
        table[name] = _coerce(v)
    return _subs_table(e, table)


def _subs_table(e: Expr, table: Mapping[str, Expr]) -> Expr:
    def poly_subs(p: dict) -> Expr:
        out = ZERO
        for (atoms, exparg), c in p.items():
            term = Expr.number(c)
            for a, k in atoms:
                if a[0] == "s":
                    repl = table.get(a[1])
                    factor = repl if repl is not None else Expr.symbol(a[1])
                else:
                    factor = ln(_subs_table(a[1], table))
                if k >= 0:
                    term = term * factor ** k
                else:
                    if factor.is_zero():
                        raise SingularSubstitutionError(
                            f"substitution makes a denominator zero: {a}")
                    term = term / factor ** (-k)
            if exparg is not None:
                term = term * exp(_subs_table(exparg, table))
            out = out + term
        return out

    num = poly_subs(e.num)
    den = poly_subs(e.den)
    if den.is_zero():
        raise SingularSubstitutionError("substitution makes a denominator zero")
    return num / den


def subs_poly(e: Expr, bindings: Mapping) -> Expr:
    """Substitution fast path for symbols occurring only polynomially.

    Requires the substituted symbols to appear with non-negative exponents in
    the numerator and nowhere in the denominator or inside ln/exp arguments;
    falls back to the generic route otherwise.
    """
    table = {}
    for k, v in bindings.items():
        name = k if isinstance(k, str) else _symbol_name(k)
        table[name] = _coerce(v)
    names = set(table)
    try:
        parts = collect(e, names)
    except NonPolynomialError:
        return _subs_table(e, table)
    # precompute powers of each replacement
    out = ZERO
    pow_cache: dict = {}
    for key, coeff in parts.items():
        factor = ONE
        for name, k in key:
            if k < 0:
                return _subs_table(e, table)
            pk = pow_cache.get((name, k))
            if pk is None:
                pk = table[name] ** k
                pow_cache[(name, k)] = pk
            factor = factor * pk
        out = out + coeff * factor
    return out


# -- numeric evaluation -------------------------------------------------------


def evalf(e: Expr, env: Mapping[str, float]) -> float:
    def mono_val(mono, c: Fraction) -> float:
        atoms, exparg = mono
        v = float(c)
        for a, k in atoms:
            if a[0] == "s":
                try:
                    base = float(env[a[1]])
                except KeyError:
                    raise DomainError(f"no value provided for symbol '{a[1]}'")
            else:
                inner = evalf(a[1], env)
                if inner <= 0.0:
                    raise DomainError("ln of non-positive value")
                base = math.log(inner)
            if base == 0.0 and k < 0:
                raise DomainError("pole: zero raised to negative power")
            v *= base ** k
        if exparg is not None:
            v *= math.exp(evalf(exparg, env))
        return v

    num = sum(mono_val(m, c) for m, c in e.num.items())
    den = sum(mono_val(m, c) for m, c in e.den.items())
    if den == 0.0:
        raise DomainError("denominator evaluates to zero")
    return num / den


def _mono_pycode(mono, coeff: Fraction, names: Mapping[str, str]) -> str:
    atoms, exparg = mono
    parts = []
    if coeff.denominator == 1:
        parts.append(f"{coeff.numerator}")
    else:
        parts.append(f"({coeff.numerator}/{coeff.denominator})")
    for a, e in atoms:
        if a[0] == "s":
            base = names[a[1]]
        else:
            base = f"_log({_pycode_expr(a[1], names)})"
        parts.append(base if e == 1 else f"{base}**({e})")
    if exparg is not None:
        parts.append(f"_exp({_pycode_expr(exparg, names)})")
    return "*".join(parts)


def _pycode_expr(e: Expr, names: Mapping[str, str]) -> str:
    num = " + ".join(_mono_pycode(m, c, names) for m, c in e.num.items()) or "0.0"
    if len(e.den) == 1 and _ONE_MONO in e.den and e.den[_ONE_MONO] == 1:
        return f"({num})"
    den = " + ".join(_mono_pycode(m, c, names) for m, c in e.den.items())
    return f"(({num})/({den}))"


def compile_exprs(exprs: Sequence[Expr], arg_names: Sequence[str]):
    """Compile expressions into one fast positional-argument function.

    Returns f(*values) -> tuple of floats.  Symbols must all be listed in
    arg_names; ln/exp map to math.log/math.exp.
    """
    names = {}
    for i, n in enumerate(arg_names):
        names[n] = f"_a{i}"
    missing = set()
    for e in exprs:
        missing |= (e.atoms() - set(arg_names))
    if missing:
        raise ValueError(f"unbound symbols in compiled expression: {sorted(missing)}")
    args = ", ".join(names[n] for n in arg_names)
    body = ", ".join(_pycode_expr(e, names) for e in exprs)
    src = f"def _compiled({args}):\n    return ({body},)\n"
    scope = {"_exp": math.exp, "_log": math.log}
    exec(src, scope)
    return scope["_compiled"]


# -- total derivatives over a jet space ---------------------------------------


class JetSpace:
    """Naming scheme for jet symbols of dependent variables.

    First-order jets are named ``u_d`` and second-order jets ``u_dd'`` with
    the direction suffix kept sorted so mixed partials are represented once.
    """

    def __init__(self, independents: Sequence[str], dependents: Sequence[str]):
        self.independents = tuple(independents)
        self.dependents = tuple(dependents)

    def jet(self, u: str, *dirs: str) -> str:
        suffix = "".join(sorted(dirs))
        return f"{u}_{suffix}"

    def first_jets(self) -> list:
        return [self.jet(u, d) for u in self.dependents for d in self.independents]

    def split_jet(self, name: str):
        if "_" not in name:
            return None
        base, suffix = name.rsplit("_", 1)
        if base in self.dependents and suffix and \
                all(ch in self.independents for ch in suffix):
            return base, suffix
        return None

    def total_derivative(self, e: Expr, direction: str) -> Expr:
        if direction not in self.independents:
            raise ValueError(f"unknown direction '{direction}'")
        out = diff(e, direction)
        for name in sorted(e.atoms()):
            if name == direction:
                continue
            if name in self.dependents:
                out = out + Expr.symbol(self.jet(name, direction)) * diff(e, name)
                continue
            parts = self.split_jet(name)
            if parts is not None:
                base, suffix = parts
                higher = self.jet(base, *(list(suffix) + [direction]))
                out = out + Expr.symbol(higher) * diff(e, name)
        return out


# -- monomial collection -------------------------------------------------------


def collect(e: Expr, basis: Iterable[str]) -> dict:
    """Decompose ``e`` as a Laurent polynomial in the basis symbols.

    Returns a map from basis monomial (tuple of (name, exponent), sorted by
    name) to coefficient Expr.  The denominator and every exp/ln argument must
    be free of basis symbols, otherwise the expression is not polynomial in
    the requested sense and NonPolynomialError is raised.
    """
    basis = set(basis)
    den_syms = Expr(dict(e.den), {_ONE_MONO: Fraction(1)}).atoms()
    if basis & den_syms:
        raise NonPolynomialError(
            f"denominator contains basis symbols: {sorted(basis & den_syms)}")
    groups: dict = {}
    for (atoms, exparg), c in e.num.items():
        key_parts = []
        rest_atoms = []
        for a, k in atoms:
            if a[0] == "s" and a[1] in basis:
                key_parts.append((a[1], k))
            else:
                inner = a[1].atoms() if a[0] == "ln" else set()
                if inner & basis:
                    raise NonPolynomialError(
                        f"ln argument contains basis symbols: {sorted(inner & basis)}")
                rest_atoms.append((a, k))
        if exparg is not None and exparg.atoms() & basis:
            raise NonPolynomialError("exp argument contains basis symbols")
        key = tuple(sorted(key_parts))
        mono = (tuple(rest_atoms), exparg)
        groups.setdefault(key, {})
        g = groups[key]
        g[mono] = g.get(mono, 0) + c
    den = Expr(dict(e.den), {_ONE_MONO: Fraction(1)})
    out = {}
    for key, poly in groups.items():
        poly = {m: c for m, c in poly.items() if c}
        if poly:
            out[key] = Expr(poly, {_ONE_MONO: Fraction(1)}) / den
    return out


def collect_resum(parts: Mapping, basis_pow: Callable[[tuple], Expr] = None) -> Expr:
    """Reassemble a collect() result; inverse of collect up to normalization."""
    total = ZERO
    for key, coeff in parts.items():
        mono = ONE
        for name, k in key:
            mono = mono * Expr.symbol(name) ** k
        total = total + mono * coeff
    return total


# -- exact linear algebra -------------------------------------------------------


def nullspace(rows: Sequence[Mapping[str, Fraction]], unknowns: Sequence[str]) -> list:
    """Exact rational basis of the solution space of homogeneous linear forms.

    Each row maps unknown names to rational coefficients.  The basis is
    produced from the reduced row echelon form with free variables set to one
    in the fixed unknown order, so the output ordering is deterministic.
    """
    cols = list(unknowns)
    index = {u: i for i, u in enumerate(cols)}
    mat = []
    for row in rows:
        vec = [Fraction(0)] * len(cols)
        nonzero = False
        for name, c in row.items():
            if name not in index:
                raise KeyError(f"row references unknown '{name}'")
            c = Fraction(c)
            if c:
                vec[index[name]] = c
                nonzero = True
        if nonzero:
            mat.append(vec)
    # reduced row echelon form
    pivot_cols = []
    r = 0
    for c in range(len(cols)):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][c]
        mat[r] = [v / pv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivot_cols.append(c)
        r += 1
        if r == len(mat):
            break
    free_cols = [c for c in range(len(cols)) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * len(cols)
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivot_cols):
            vec[pc] = -mat[i][fc]
        basis.append({cols[j]: vec[j] for j in range(len(cols)) if vec[j]})
    return basis


# -- printing -------------------------------------------------------------------


def _frac_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


def _mono_text(mono, coeff: Fraction) -> str:
    atoms, exparg = mono
    parts = []
    neg = coeff < 0
    c = -coeff if neg else coeff
    if c != 1 or (not atoms and exparg is None):
        parts.append(_frac_text(c))
    for a, e in atoms:
        base = a[1] if a[0] == "s" else f"ln({to_text(a[1])})"
        parts.append(base if e == 1 else f"{base}^{e}")
    if exparg is not None:
        parts.append(f"exp({to_text(exparg)})")
    body = "*".join(parts)
    return ("-" + body) if neg else body


def _poly_text(p: dict) -> str:
    if not p:
        return "0"
    terms = sorted(p.items(), key=lambda it: _mono_sort_key(it[0]), reverse=True)
    out = _mono_text(*terms[0])
    for m, c in terms[1:]:
        piece = _mono_text(m, c)
        out += (" - " + piece[1:]) if piece.startswith("-") else (" + " + piece)
    return out


def to_text(e: Expr) -> str:
    """Deterministic plain-text infix form; parse(to_text(e)) == e."""
    num = _poly_text(e.num)
    if len(e.den) == 1 and _ONE_MONO in e.den and e.den[_ONE_MONO] == 1:
        return num
    return f"({num})/({_poly_text(e.den)})"


# -- parsing --------------------------------------------------------------------


_FUNCTIONS = {"exp": exp, "ln": ln, "sinh": sinh, "cosh": cosh, "tanh": tanh}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ValueError(f"parse error at {self.pos}: {msg} in {self.text!r}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> Expr:
        node = self.term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                node = node + self.term()
            elif ch == "-":
                self.pos += 1
                node = node - self.term()
            else:
                return node

    def term(self) -> Expr:
        node = self.power()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                node = node * self.power()
            elif ch == "/":
                self.pos += 1
                node = node / self.power()
            else:
                return node

    def power(self) -> Expr:
        base = self.unary()
        if self.peek() == "^":
            self.pos += 1
            expo = self.unary()
            if expo.is_rational():
                f = expo.as_fraction()
                return base ** (int(f) if f.denominator == 1 else f)
            return base ** expo
        return base

    def unary(self) -> Expr:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return -self.unary()
        if ch == "+":
            self.pos += 1
            return self.unary()
        return self.atom()

    def atom(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return node
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return Expr.number(int(self.text[start:self.pos]))
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                                 or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name in _FUNCTIONS:
                if self.peek() != "(":
                    self.error(f"expected '(' after {name}")
                self.pos += 1
                arg = self.expr()
                if self.peek() != ")":
                    self.error("expected ')'")
                self.pos += 1
                return _FUNCTIONS[name](arg)
            return Expr.symbol(name)
        self.error(f"unexpected character {ch!r}")


def parse(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    if p.peek():
        p.error("trailing input")
    return node
