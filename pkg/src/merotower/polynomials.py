"""Exact sparse polynomial arithmetic over the rationals.

A multivariate polynomial is a dictionary mapping exponent tuples to nonzero
Fraction coefficients:

    Poly.terms : dict[tuple[int, ...], Fraction]

The zero polynomial has an empty dict.  All symbolic computation in this
package (map components, chart expressions, resultants) runs on this exact
representation; floating point only enters when orbits are evaluated
numerically.

Term order is fixed once for the whole package: graded lexicographic with
ascending total degree and, within a degree, descending lexicographic
comparison of exponent tuples.  Canonical strings produced by ``to_string``
follow that order, so they are usable as golden-file keys.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected exact rational coefficient, got {type(value).__name__}")


def term_sort_key(exps: tuple[int, ...]):
    """Graded-lex key: ascending degree, then descending exponent tuple."""
    return (sum(exps), tuple(-e for e in exps))


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: dict | None = None):
        self.num_vars = num_vars
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff == 0:
                    continue
                exps = tuple(exps)
                if len(exps) != num_vars or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent tuple {exps} for {num_vars} variables")
                clean[exps] = coeff
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> Poly:
        return cls(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, value) -> Poly:
        return cls(num_vars, {(0,) * num_vars: _as_fraction(value)})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> Poly:
        if not 0 <= index < num_vars:
            raise ValueError(f"variable index {index} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, num_vars: int, exps: Iterable[int], coeff=1) -> Poly:
        return cls(num_vars, {tuple(exps): _as_fraction(coeff)})

    # -- basic queries -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial by convention."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    @property
    def is_homogeneous(self) -> bool:
        if not self.terms:
            return True
        degrees = {sum(e) for e in self.terms}
        return len(degrees) == 1

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def degree_in(self, var: int) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def variables_present(self) -> tuple[int, ...]:
        present = [False] * self.num_vars
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    present[i] = True
        return tuple(i for i, p in enumerate(present) if p)

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        """Leading term under the package term order (largest key)."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self.terms, key=term_sort_key)
        return exps, self.terms[exps]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Poly({self.num_vars}, '{self.to_string()}')"

    # -- arithmetic ----------------------------------------------------------

    def _check_compatible(self, other: Poly):
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"variable count mismatch: {self.num_vars} vs {other.num_vars}"
            )

    def __add__(self, other: Poly) -> Poly:
        self._check_compatible(other)
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = out.get(exps, Fraction(0)) + coeff
            if acc == 0:
                out.pop(exps, None)
            else:
                out[exps] = acc
        return Poly(self.num_vars, out)

    def __neg__(self) -> Poly:
        return Poly(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check_compatible(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                acc = out.get(key, Fraction(0)) + ca * cb
                if acc == 0:
                    out.pop(key, None)
                else:
                    out[key] = acc
        return Poly(self.num_vars, out)

    __rmul__ = __mul__

    def scale(self, factor) -> Poly:
        factor = _as_fraction(factor)
        if factor == 0:
            return Poly.zero(self.num_vars)
        return Poly(self.num_vars, {e: c * factor for e, c in self.terms.items()})

    def __pow__(self, exponent: int) -> Poly:
        if exponent < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.constant(self.num_vars, 1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- evaluation and substitution ------------------------------------------

    def eval_exact(self, values: Sequence[Fraction]) -> Fraction:
        if len(values) != self.num_vars:
            raise ValueError("wrong number of values")
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for v, e in zip(values, exps):
                if e:
                    term *= _as_fraction(v) ** e
            total += term
        return total

    def eval_complex(self, values: Sequence):
        """Evaluate with complex (scalar or numpy array) inputs.

        Coefficients are converted to float once per call; for repeated
        evaluation use :func:`compile_numeric`.
        """
        if len(values) != self.num_vars:
            raise ValueError("wrong number of values")
        total = 0j
        for exps, coeff in self.terms.items():
            term = complex(coeff)
            for v, e in zip(values, exps):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def substitute(self, replacements: Sequence[Poly]) -> Poly:
        """Substitute a polynomial for every variable."""
        if len(replacements) != self.num_vars:
            raise ValueError("wrong number of replacement polynomials")
        if not replacements:
            raise ValueError("cannot substitute into a polynomial with no variables")
        nv = replacements[0].num_vars
        # Cache powers of each replacement as they are needed.
        powers: list[dict[int, Poly]] = [
            {0: Poly.constant(nv, 1), 1: r} for r in replacements
        ]

        def power(i: int, e: int) -> Poly:
            cache = powers[i]
            if e not in cache:
                cache[e] = power(i, e - 1) * cache[1]
            return cache[e]

        total = Poly.zero(nv)
        for exps, coeff in self.terms.items():
            term = Poly.constant(nv, coeff)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            total = total + term
        return total

    def set_variable(self, var: int, value) -> Poly:
        """Substitute a rational constant for one variable (exponent drops to 0)."""
        value = _as_fraction(value)
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            c = coeff * value ** exps[var]
            if c == 0:
                continue
            key = tuple(0 if i == var else e for i, e in enumerate(exps))
            acc = out.get(key, Fraction(0)) + c
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
        return Poly(self.num_vars, out)

    def derivative(self, var: int) -> Poly:
        out = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            key = tuple(x - 1 if i == var else x for i, x in enumerate(exps))
            out[key] = coeff * e
        return Poly(self.num_vars, out)

    # -- structure -----------------------------------------------------------

    def monomial_content(self) -> tuple[int, ...]:
        """Componentwise minimum exponent over all terms (the common monomial)."""
        if not self.terms:
            return (0,) * self.num_vars
        mins = [min(e[i] for e in self.terms) for i in range(self.num_vars)]
        return tuple(mins)

    def divide_monomial(self, exps: tuple[int, ...]) -> Poly:
        out = {}
        for e, c in self.terms.items():
            key = tuple(x - y for x, y in zip(e, exps))
            if any(k < 0 for k in key):
                raise ValueError("monomial does not divide polynomial")
            out[key] = c
        return Poly(self.num_vars, out)

    def coefficients_in(self, var: int) -> dict[int, Poly]:
        """View as univariate in ``var``: degree -> coefficient polynomial."""
        out: dict[int, dict] = {}
        for exps, coeff in self.terms.items():
            d = exps[var]
            key = tuple(0 if i == var else e for i, e in enumerate(exps))
            out.setdefault(d, {})[key] = coeff
        return {d: Poly(self.num_vars, t) for d, t in out.items()}

    def divide_exact(self, divisor: Poly) -> Poly | None:
        """Exact multivariate division; None when the division is not exact."""
        self._check_compatible(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        quotient = Poly.zero(self.num_vars)
        remainder = self
        d_exps, d_coeff = divisor.leading()
        while not remainder.is_zero:
            r_exps, r_coeff = remainder.leading()
            diff = tuple(a - b for a, b in zip(r_exps, d_exps))
            if any(x < 0 for x in diff):
                return None
            t = Poly.monomial(self.num_vars, diff, r_coeff / d_coeff)
            quotient = quotient + t
            remainder = remainder - t * divisor
        return quotient

    # -- rendering -----------------------------------------------------------

    def to_string(self, var_names: Sequence[str] | None = None) -> str:
        """Canonical text form, e.g. ``'1 + beta^2*u'``; deterministic."""
        if var_names is None:
            var_names = default_var_names(self.num_vars)
        if len(var_names) != self.num_vars:
            raise ValueError("wrong number of variable names")
        if not self.terms:
            return "0"
        parts: list[str] = []
        for exps in sorted(self.terms, key=term_sort_key):
            coeff = self.terms[exps]
            factors = []
            for name, e in zip(var_names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(("+ " if coeff > 0 else "- ") + body)
        return " ".join(parts)


def default_var_names(num_vars: int) -> tuple[str, ...]:
    """z, w, t for three variables (projective plane); x0.. otherwise."""
    if num_vars == 3:
        return ("z", "w", "t")
    if num_vars == 2:
        return ("x", "y")
    return tuple(f"x{i}" for i in range(num_vars))


class HomoPoly(Poly):
    """Homogeneous polynomial: every exponent tuple sums to the same degree.

    Addition enforces equal degrees (adding forms of different degrees is a
    bug in projective-map code); general mixed-degree arithmetic should use
    plain :class:`Poly`.
    """

    __slots__ = ()

    def __init__(self, num_vars: int, terms: dict | None = None):
        super().__init__(num_vars, terms)
        degrees = {sum(e) for e in self.terms}
        if len(degrees) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degrees)}")

    @classmethod
    def from_poly(cls, p: Poly) -> HomoPoly:
        return cls(p.num_vars, p.terms)

    def __add__(self, other: Poly) -> HomoPoly:
        if not self.is_zero and not other.is_zero and self.degree != other.degree:
            raise ValueError(
                f"degree mismatch in homogeneous addition: {self.degree} vs {other.degree}"
            )
        return HomoPoly.from_poly(Poly.__add__(self, other))

    def __neg__(self) -> HomoPoly:
        return HomoPoly.from_poly(Poly.__neg__(self))

    def __mul__(self, other) -> HomoPoly | Poly:
        result = Poly.__mul__(self, other)
        if isinstance(other, (int, Fraction)) or isinstance(other, HomoPoly):
            return HomoPoly.from_poly(result)
        return result

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# Numeric compilation


class CompiledPoly:
    """Float-coefficient view of a Poly for fast repeated evaluation."""

    __slots__ = ("exponents", "coeffs", "num_vars")

    def __init__(self, p: Poly):
        self.num_vars = p.num_vars
        items = sorted(p.terms.items(), key=lambda kv: term_sort_key(kv[0]))
        self.exponents = [e for e, _ in items]
        self.coeffs = [complex(c) for _, c in items]

    def __call__(self, values):
        total = 0j
        for exps, coeff in zip(self.exponents, self.coeffs):
            term = coeff
            for v, e in zip(values, exps):
                if e:
                    term = term * v**e
            total = total + term
        return total


def compile_numeric(p: Poly) -> CompiledPoly:
    return CompiledPoly(p)


# ---------------------------------------------------------------------------
# GCD machinery (primitive pseudo-remainder sequences, no modular tricks)


def _integer_normalize(p: Poly) -> Poly:
    """Scale to integer coefficients with content 1 and positive leading sign."""
    if p.is_zero:
        return p
    denom_lcm = 1
    for c in p.terms.values():
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    num_gcd = 0
    for c in p.terms.values():
        num_gcd = math.gcd(num_gcd, abs(c.numerator * (denom_lcm // c.denominator)))
    factor = Fraction(denom_lcm, num_gcd)
    out = p.scale(factor)
    _, lead = out.leading()
    if lead < 0:
        out = -out
    return out


def _content_primitive(p: Poly, var: int) -> tuple[Poly, Poly]:
    """Content (gcd of univariate-in-var coefficients) and primitive part."""
    coeffs = list(p.coefficients_in(var).values())
    content = coeffs[0]
    for c in coeffs[1:]:
        content = _gcd_inner(content, c)
        if content.is_constant():
            break
    content = _integer_normalize(content)
    if content.is_constant():
        return Poly.constant(p.num_vars, 1), _integer_normalize(p)
    pp = p.divide_exact(content)
    assert pp is not None, "content must divide its polynomial"
    return content, _integer_normalize(pp)


def _pseudo_remainder(a: Poly, b: Poly, var: int) -> Poly:
    db = b.degree_in(var)
    lb = b.coefficients_in(var)[db]
    r = a
    while not r.is_zero and r.degree_in(var) >= db:
        dr = r.degree_in(var)
        lr = r.coefficients_in(var)[dr]
        shift = Poly.monomial(a.num_vars, tuple(dr - db if i == var else 0 for i in range(a.num_vars)))
        r = lb * r - lr * shift * b
    return r


def _gcd_inner(p: Poly, q: Poly) -> Poly:
    if p.is_zero:
        return q
    if q.is_zero:
        return p
    shared = sorted(set(p.variables_present()) | set(q.variables_present()))
    if not shared:
        return Poly.constant(p.num_vars, 1)
    var = shared[0]
    if p.degree_in(var) == 0 or q.degree_in(var) == 0:
        # One input does not involve the main variable: gcd lives in its
        # content with respect to the remaining variables.
        if p.degree_in(var) == 0:
            const, other = p, q
        else:
            const, other = q, p
        cont, _ = _content_primitive(other, var)
        return _gcd_inner(const, cont)
    cp, pp = _content_primitive(p, var)
    cq, pq = _content_primitive(q, var)
    cont = _gcd_inner(cp, cq)
    a, b = pp, pq
    if a.degree_in(var) < b.degree_in(var):
        a, b = b, a
    while not b.is_zero and b.degree_in(var) > 0:
        r = _pseudo_remainder(a, b, var)
        if r.is_zero:
            a, b = b, r
            break
        _, r = _content_primitive(r, var)
        a, b = b, r
    if not b.is_zero:
        # Terminated with a nonzero remainder of degree 0: primitive parts coprime.
        return _integer_normalize(cont)
    _, g = _content_primitive(a, var)
    return _integer_normalize(cont * g)


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """A gcd of p and q, normalized to integer content 1 and positive lead.

    Strategy: peel off the common monomial factor first, then apply the
    recursive content/primitive-part reduction with one main variable.
    """
    if p.num_vars != q.num_vars:
        raise ValueError("variable count mismatch")
    if p.is_zero:
        return _integer_normalize(q)
    if q.is_zero:
        return _integer_normalize(p)
    mono_p = p.monomial_content()
    mono_q = q.monomial_content()
    common = tuple(min(a, b) for a, b in zip(mono_p, mono_q))
    p1 = p.divide_monomial(mono_p)
    q1 = q.divide_monomial(mono_q)
    core = _gcd_inner(p1, q1)
    result = core * Poly.monomial(p.num_vars, common)
    return _integer_normalize(result)


def gcd_many(polys: Sequence[Poly]) -> Poly:
    nonzero = [p for p in polys if not p.is_zero]
    if not nonzero:
        raise ValueError("gcd of all-zero family")
    g = nonzero[0]
    for p in nonzero[1:]:
        if g.is_constant():
            break
        g = poly_gcd(g, p)
    return _integer_normalize(g)


# ---------------------------------------------------------------------------
# Univariate polynomials and resultants


class UniPoly:
    """Dense univariate polynomial over Q, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"UniPoly({self.coeffs!r})"

    def derivative(self) -> UniPoly:
        return UniPoly([c * i for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> UniPoly:
        if self.is_zero:
            return self
        lead = self.coeffs[-1]
        return UniPoly([c / lead for c in self.coeffs])

    def divmod(self, other: UniPoly) -> tuple[UniPoly, UniPoly]:
        if other.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        div = other.coeffs
        dd = len(div) - 1
        if len(rem) <= dd:
            return UniPoly([]), UniPoly(rem)
        quot = [Fraction(0)] * (len(rem) - dd)
        for i in range(len(rem) - 1, dd - 1, -1):
            factor = rem[i] / div[-1]
            quot[i - dd] = factor
            if factor != 0:
                for j, c in enumerate(div):
                    rem[i - dd + j] -= factor * c
        return UniPoly(quot), UniPoly(rem)

    def gcd(self, other: UniPoly) -> UniPoly:
        a, b = self, other
        while not b.is_zero:
            _, r = a.divmod(b)
            a, b = b, r
        return a.monic()

    def eval_complex(self, x: complex) -> complex:
        total = 0j
        for c in reversed(self.coeffs):
            total = total * x + complex(c)
        return total


def to_unipoly(p: Poly) -> tuple[UniPoly, int]:
    """Convert a Poly in at most one effective variable to dense form.

    Returns the UniPoly and the index of the variable it lives in (0 when
    the polynomial is constant).
    """
    present = p.variables_present()
    if len(present) > 1:
        raise ValueError("polynomial has more than one effective variable")
    var = present[0] if present else 0
    coeffs = [Fraction(0)] * (p.degree_in(var) + 1) if not p.is_zero else []
    for exps, coeff in p.terms.items():
        coeffs[exps[var]] = coeff
    return UniPoly(coeffs), var


def squarefree_root_count(u: UniPoly) -> int:
    """Number of distinct complex roots: deg(u / gcd(u, u'))."""
    if u.is_zero:
        raise ValueError("zero polynomial has no well-defined root count")
    if u.degree == 0:
        return 0
    g = u.gcd(u.derivative())
    q, r = u.divmod(g)
    assert r.is_zero
    return q.degree


def squarefree_part(u: UniPoly) -> UniPoly:
    if u.is_zero or u.degree == 0:
        return u
    g = u.gcd(u.derivative())
    q, _ = u.divmod(g)
    return q


def complex_roots(u: UniPoly) -> list[complex]:
    """Distinct complex roots of u, via eigenvalues of the companion matrix."""
    sf = squarefree_part(u)
    if sf.degree <= 0:
        return []
    coeffs = [float(c) for c in reversed(sf.coeffs)]
    return [complex(r) for r in np.roots(coeffs)]


def _poly_matrix_det(matrix: list[list[Poly]], num_vars: int) -> Poly:
    """Fraction-free Bareiss determinant of a matrix of polynomials."""
    n = len(matrix)
    if n == 0:
        return Poly.constant(num_vars, 1)
    m = [row[:] for row in matrix]
    sign = 1
    prev = Poly.constant(num_vars, 1)
    for k in range(n - 1):
        if m[k][k].is_zero:
            pivot_row = next((i for i in range(k + 1, n) if not m[i][k].is_zero), None)
            if pivot_row is None:
                return Poly.zero(num_vars)
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                q = num.divide_exact(prev)
                assert q is not None, "Bareiss division must be exact"
                m[i][j] = q
            m[i][k] = Poly.zero(num_vars)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def det_poly_matrix(matrix: list[list[Poly]], num_vars: int) -> Poly:
    """Determinant of a square matrix of polynomials (fraction-free)."""
    return _poly_matrix_det(matrix, num_vars)


def resultant(p: Poly, q: Poly, var: int) -> Poly:
    """Sylvester resultant of p and q with respect to one variable.

    Convention: rows of p-coefficients (descending) come first.  The sign is
    convention-dependent; every consumer in this package only uses vanishing,
    roots, or degrees of the result.
    """
    if p.num_vars != q.num_vars:
        raise ValueError("variable count mismatch")
    nv = p.num_vars
    if p.is_zero or q.is_zero:
        return Poly.zero(nv)
    dp = p.degree_in(var)
    dq = q.degree_in(var)
    if dp == 0 and dq == 0:
        raise ValueError("both polynomials are constant in the eliminated variable")
    if dp == 0:
        return p**dq
    if dq == 0:
        return q**dp
    pc = p.coefficients_in(var)
    qc = q.coefficients_in(var)
    zero = Poly.zero(nv)
    size = dp + dq
    rows: list[list[Poly]] = []
    p_desc = [pc.get(d, zero) for d in range(dp, -1, -1)]
    q_desc = [qc.get(d, zero) for d in range(dq, -1, -1)]
    for shift in range(dq):
        rows.append([zero] * shift + p_desc + [zero] * (size - shift - dp - 1))
    for shift in range(dp):
        rows.append([zero] * shift + q_desc + [zero] * (size - shift - dq - 1))
    return _poly_matrix_det(rows, nv)


# ---------------------------------------------------------------------------
# Rational functions


class RatFunc:
    """Quotient of two polynomials, kept with gcd cancelled.

    The denominator is normalized to integer coefficients with content 1 and
    positive leading sign, so the printed form is canonical.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, cancel: bool = True):
        if den is None:
            den = Poly.constant(num.num_vars, 1)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if num.num_vars != den.num_vars:
            raise ValueError("variable count mismatch")
        if cancel and not num.is_zero:
            g = poly_gcd(num, den)
            if not g.is_constant() or g.terms.get((0,) * g.num_vars, 1) != 1:
                n2 = num.divide_exact(g)
                d2 = den.divide_exact(g)
                if n2 is not None and d2 is not None:
                    num, den = n2, d2
        norm = _integer_normalize(den)
        # Rescale the numerator so num/den is unchanged by the normalization.
        _, lead_old = den.leading()
        _, lead_new = norm.leading()
        ratio = lead_new / lead_old
        self.num = num.scale(ratio)
        self.den = norm

    @classmethod
    def from_poly(cls, p: Poly) -> RatFunc:
        return cls(p, cancel=False)

    @property
    def num_vars(self) -> int:
        return self.num.num_vars

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    def __repr__(self) -> str:
        return f"RatFunc('{self.to_string()}')"

    def __mul__(self, other: RatFunc) -> RatFunc:
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: RatFunc) -> RatFunc:
        if other.num.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __add__(self, other: RatFunc) -> RatFunc:
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: RatFunc) -> RatFunc:
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def shift(self, constant) -> RatFunc:
        """self - constant."""
        c = _as_fraction(constant)
        return RatFunc(self.num - self.den.scale(c), self.den)

    def substitute(self, replacements: Sequence[Poly]) -> RatFunc:
        return RatFunc(self.num.substitute(replacements), self.den.substitute(replacements))

    def eval_complex(self, values: Sequence) -> complex:
        d = self.den.eval_complex(values)
        return self.num.eval_complex(values) / d

    def to_string(self, var_names: Sequence[str] | None = None) -> str:
        num_s = self.num.to_string(var_names)
        if self.is_polynomial():
            c = self.den.terms.get((0,) * self.den.num_vars, Fraction(1))
            if c == 1:
                return num_s
            return f"({num_s}) / {c}"
        den_s = self.den.to_string(var_names)
        if len(self.num.terms) > 1:
            num_s = f"({num_s})"
        return f"{num_s} / ({den_s})"


# ---------------------------------------------------------------------------
# Parsing (canonical strings back to polynomials)


def parse_poly(text: str, var_names: Sequence[str], *, homogeneous: bool = False) -> Poly:
    """Parse a polynomial in the canonical text form.

    Accepts sums of terms like ``3/2*z^2*w``, ``-t^2``, ``beta`` with ``+``
    and ``-`` separators.  Raises ValueError with the offending fragment on
    malformed input.
    """
    names = list(var_names)
    nv = len(names)
    s = text.replace("-", "+-").replace(" ", "")
    if s.startswith("+"):
        s = s[1:]
    if not s:
        raise ValueError("empty polynomial string")
    total = Poly.zero(nv)
    for raw in s.split("+"):
        if not raw:
            raise ValueError(f"dangling sign in polynomial string: {text!r}")
        chunk = raw
        sign = 1
        if chunk.startswith("-"):
            sign = -1
            chunk = chunk[1:]
        coeff = Fraction(sign)
        exps = [0] * nv
        for factor in chunk.split("*"):
            if not factor:
                raise ValueError(f"empty factor in term {raw!r}")
            if factor[0].isdigit():
                try:
                    coeff *= Fraction(factor)
                except ValueError as exc:
                    raise ValueError(f"bad coefficient {factor!r} in {raw!r}") from exc
                continue
            name, _, power = factor.partition("^")
            if name not in names:
                raise ValueError(f"unknown variable {name!r} in term {raw!r}")
            e = 1
            if power:
                if not power.isdigit():
                    raise ValueError(f"bad exponent {power!r} in term {raw!r}")
                e = int(power)
            exps[names.index(name)] += e
        total = total + Poly.monomial(nv, exps, coeff)
    if homogeneous:
        return HomoPoly.from_poly(total)
    return total
