"""Dominant rational self-maps of the projective plane.

A map is a tuple of equal-degree homogeneous polynomials with exact rational
coefficients, normalized so the components are coprime (the common gcd is
divided out at construction).  On top of evaluation and composition this
module computes:

* the indeterminacy locus (common zeros of the components),
* fibers of points (preimages), the generic fiber count (topological degree),
* degree sequences of iterates and the growth-rate estimate they induce,
* backward chain images of finite sets and the pairwise disjointness verdict
  for the chain preimages of the indeterminacy locus.

Solving is restricted to maps of the plane (dim_k = 2), where every system
reduces to pairs of curves handled by resultants.  Point coordinates are kept
as complex floats; exact rational coordinates ride along when known so that
elimination can stay symbolic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polynomials import (
    CompiledPoly,
    HomoPoly,
    Poly,
    compile_numeric,
    complex_roots,
    default_var_names,
    det_poly_matrix,
    gcd_many,
    parse_poly,
    poly_gcd,
    resultant,
    to_unipoly,
)

INDETERMINACY_EVAL_TOL = 1e-12
POINT_MERGE_TOL = 1e-9
FIBER_VERIFY_TOL = 1e-8

# Exact elimination is used only when target coordinates convert to rationals
# with denominators below this bound; larger ones fall to the numeric path.
_EXACT_DENOMINATOR_BOUND = 1 << 24


class OrbitUndefined(Exception):
    """An orbit ran into the indeterminacy locus.

    ``step`` is the first iterate index at which the map was undefined.
    """

    def __init__(self, message: str, step: int = 0):
        super().__init__(message)
        self.step = step


class DegenerateMapError(ValueError):
    """Component tuple does not define a dominant rational map."""


class ProjPoint:
    """Point of P^k, stored with the largest-modulus coordinate scaled to 1."""

    __slots__ = ("coords", "exact")

    def __init__(self, coords: Sequence, exact: Sequence[Fraction] | None = None):
        vals = [complex(c) for c in coords]
        mags = [abs(v) for v in vals]
        top = max(mags)
        if top == 0.0:
            raise ValueError("all homogeneous coordinates are zero")
        pivot = vals[mags.index(top)]
        self.coords = tuple(v / pivot for v in vals)
        if exact is None and all(isinstance(c, (int, Fraction)) for c in coords):
            exact = [Fraction(c) for c in coords]
        if exact is not None:
            exact = [Fraction(e) for e in exact]
            piv = max(exact, key=abs)
            exact = tuple(e / piv for e in exact)
        self.exact = exact

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def unit_vector(self) -> np.ndarray:
        v = np.array(self.coords, dtype=complex)
        return v / np.linalg.norm(v)

    def projector(self) -> np.ndarray:
        """Rank-one Hermitian projector vv*; a phase-free representative."""
        v = self.unit_vector()
        return np.outer(v, v.conj())

    def fs_distance(self, other: ProjPoint) -> float:
        """Fubini-Study chordal distance sin(angle), in [0, 1].

        Computed as ||P - Q||_F / sqrt(2) on projectors, which stays accurate
        for nearby points where the inner-product form loses half the digits.
        """
        diff = self.projector() - other.projector()
        return float(np.linalg.norm(diff) / np.sqrt(2.0))

    def close_to(self, other: ProjPoint, tol: float = POINT_MERGE_TOL) -> bool:
        return self.fs_distance(other) < tol

    def rational_coords(self) -> tuple[Fraction, ...] | None:
        """Exact coordinates when available or recoverable from the floats."""
        if self.exact is not None:
            return tuple(self.exact)
        out = []
        for c in self.coords:
            if abs(c.imag) > 0.0:
                return None
            f = Fraction(c.real)
            if f.denominator > _EXACT_DENOMINATOR_BOUND:
                return None
            out.append(f)
        return tuple(out)

    def __repr__(self) -> str:
        body = " : ".join(_fmt_complex(c) for c in self.coords)
        return f"[{body}]"

    def to_json(self) -> list:
        return [[c.real, c.imag] for c in self.coords]


def _fmt_complex(c: complex) -> str:
    if abs(c.imag) < 1e-14:
        return f"{c.real:.6g}"
    return f"{c.real:.6g}{c.imag:+.6g}i"


def fs_uniform_point(rng: np.random.Generator, dim: int = 2) -> ProjPoint:
    """Fubini-Study uniform random point (normalized complex Gaussian)."""
    re = rng.standard_normal(dim + 1)
    im = rng.standard_normal(dim + 1)
    return ProjPoint(re + 1j * im)


@dataclass
class PointRecord:
    point: ProjPoint
    via_indeterminacy: bool = False


@dataclass
class AlgebraicPointSet:
    """Finite point set with a flag for positive-dimensional leftovers."""

    records: list[PointRecord] = field(default_factory=list)
    positive_dimensional: bool = False

    @property
    def points(self) -> list[ProjPoint]:
        return [r.point for r in self.records]

    def unflagged_points(self) -> list[ProjPoint]:
        return [r.point for r in self.records if not r.via_indeterminacy]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def add(self, point: ProjPoint, via_indeterminacy: bool = False) -> None:
        for rec in self.records:
            if rec.point.close_to(point):
                rec.via_indeterminacy = rec.via_indeterminacy or via_indeterminacy
                return
        self.records.append(PointRecord(point, via_indeterminacy))

    def contains(self, point: ProjPoint, tol: float = POINT_MERGE_TOL) -> bool:
        return any(rec.point.close_to(point, tol) for rec in self.records)

    def intersects(self, other: AlgebraicPointSet, tol: float = POINT_MERGE_TOL) -> bool:
        return any(other.contains(rec.point, tol) for rec in self.records)

    def to_json(self) -> dict:
        return {
            "points": [rec.point.to_json() for rec in self.records],
            "via_indeterminacy": [rec.via_indeterminacy for rec in self.records],
            "positive_dimensional_part": self.positive_dimensional,
        }


class RationalMap:
    """Rational self-map of P^k given by coprime same-degree components."""

    def __init__(self, components: Sequence[Poly], *, check_dominant: bool = True):
        comps = [HomoPoly.from_poly(c) for c in components]
        if not comps:
            raise ValueError("no components")
        nv = comps[0].num_vars
        if any(c.num_vars != nv for c in comps):
            raise ValueError("components live in different variable counts")
        if len(comps) != nv:
            raise ValueError("a self-map of P^k needs k+1 components in k+1 variables")
        if all(c.is_zero for c in comps):
            raise DegenerateMapError("all components are zero")
        degrees = {c.degree for c in comps if not c.is_zero}
        if len(degrees) > 1:
            raise ValueError(f"components have different degrees {sorted(degrees)}")
        g = gcd_many([c for c in comps if not c.is_zero])
        if not g.is_constant():
            comps = [HomoPoly.from_poly(c.divide_exact(g)) for c in comps]
        if any(c.is_zero for c in comps):
            raise DegenerateMapError("a component is identically zero")
        self.components: tuple[HomoPoly, ...] = tuple(comps)
        self.dim_k = nv - 1
        self.degree = self.components[0].degree
        if self.degree < 1:
            raise DegenerateMapError("components are proportional: map is constant")
        if check_dominant and self.dim_k == 2 and not self._jacobian_nonsingular():
            raise DegenerateMapError("Jacobian determinant vanishes identically: map is not dominant")
        self._compiled: tuple[CompiledPoly, ...] = tuple(compile_numeric(c) for c in self.components)
        self._indeterminacy: AlgebraicPointSet | None = None

    def _jacobian_nonsingular(self) -> bool:
        n = self.dim_k + 1
        jac = [[self.components[i].derivative(j) for j in range(n)] for i in range(n)]
        return not det_poly_matrix(jac, n).is_zero

    # -- basics ---------------------------------------------------------------

    def __repr__(self) -> str:
        names = default_var_names(self.dim_k + 1)
        body = " : ".join(c.to_string(names) for c in self.components)
        return f"RationalMap([{body}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMap):
            return NotImplemented
        if self.dim_k != other.dim_k or self.degree != other.degree:
            return False
        # Equality up to a common scalar: cross-multiply against a pivot pair.
        for i in range(len(self.components)):
            if not self.components[i].is_zero and not other.components[i].is_zero:
                a, b = self.components[i], other.components[i]
                return all(
                    (self.components[j] * b) == (other.components[j] * a)
                    for j in range(len(self.components))
                )
        return False

    @classmethod
    def identity(cls, dim_k: int = 2) -> RationalMap:
        n = dim_k + 1
        return cls([Poly.variable(n, i) for i in range(n)])

    def evaluate(self, point: ProjPoint) -> ProjPoint | None:
        """Apply the map; None signals an indeterminate point (not an error)."""
        values = point.coords
        image = [comp(values) for comp in self._compiled]
        if max(abs(v) for v in image) < INDETERMINACY_EVAL_TOL:
            return None
        return ProjPoint(image)

    def evaluate_or_raise(self, point: ProjPoint, step: int = 0) -> ProjPoint:
        out = self.evaluate(point)
        if out is None:
            raise OrbitUndefined(f"orbit hit the indeterminacy locus at step {step}", step)
        return out

    def compose(self, inner: RationalMap) -> RationalMap:
        """self after inner, with the common factor of the pullback cancelled."""
        if self.dim_k != inner.dim_k:
            raise ValueError("dimension mismatch in composition")
        comps = [c.substitute(list(inner.components)) for c in self.components]
        return RationalMap(comps, check_dominant=False)

    def iterate(self, n: int) -> RationalMap:
        if n < 1:
            raise ValueError("iterate count must be >= 1")
        result = self
        for _ in range(n - 1):
            result = result.compose(self)
        return result

    # -- degrees ---------------------------------------------------------------

    def degree_sequence(self, n_max: int) -> list[int]:
        """Degrees of f, f^2, ..., f^n_max with cancellation at every step."""
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        out = []
        current = self
        out.append(current.degree)
        for _ in range(n_max - 1):
            current = current.compose(self)
            out.append(current.degree)
        return out

    def d1_estimate(self, n_max: int = 6) -> float:
        """(deg f^n)^(1/n); exact when the degree is a perfect n-th power."""
        if n_max < 2:
            raise ValueError("n_max must be >= 2 for a growth estimate")
        deg = self.degree_sequence(n_max)[-1]
        root = round(deg ** (1.0 / n_max))
        if root >= 1 and root**n_max == deg:
            return float(root)
        return deg ** (1.0 / n_max)

    # -- indeterminacy and fibers ----------------------------------------------

    def _require_plane(self):
        if self.dim_k != 2:
            raise ValueError(f"operation implemented for maps of P^2 only (got k={self.dim_k})")

    def indeterminacy_locus(self) -> AlgebraicPointSet:
        """Common zeros of the components (cached)."""
        self._require_plane()
        if self._indeterminacy is not None:
            return self._indeterminacy
        f0, f1, f2 = self.components
        result = AlgebraicPointSet()
        g = poly_gcd(f0, f1)
        candidates: list[ProjPoint] = []
        if not g.is_constant():
            pts1 = _solve_projective_pair(g, f2, result)
            r0 = f0.divide_exact(g)
            r1 = f1.divide_exact(g)
            pts2 = _solve_projective_pair(r0, r1, result)
            candidates = pts1 + pts2
        else:
            candidates = _solve_projective_pair(f0, f1, result)
        for pt in candidates:
            if self._vanishes_at(pt):
                result.add(pt)
        self._indeterminacy = result
        return result

    def _vanishes_at(self, point: ProjPoint, tol: float = 1e-10) -> bool:
        return all(abs(comp(point.coords)) < tol for comp in self._compiled)

    def in_indeterminacy(self, point: ProjPoint, tol: float = POINT_MERGE_TOL) -> bool:
        return self.indeterminacy_locus().contains(point, tol)

    def preimage_points(self, target: ProjPoint) -> AlgebraicPointSet:
        """Solve f(x) = target as a pair of curves in P^2.

        The two equations pair the largest target coordinate against the other
        two.  Points of the fiber that lie in the indeterminacy locus are kept
        and flagged ``via_indeterminacy`` rather than dropped.
        """
        self._require_plane()
        result = AlgebraicPointSet()
        exact = target.rational_coords()
        if exact is not None:
            i_star = max(range(3), key=lambda i: abs(exact[i]))
            eqs = []
            for j in range(3):
                if j == i_star:
                    continue
                eqs.append(
                    self.components[j].scale(exact[i_star])
                    - self.components[i_star].scale(exact[j])
                )
            candidates = _solve_projective_pair(eqs[0], eqs[1], result)
        else:
            coords = target.coords
            i_star = max(range(3), key=lambda i: abs(coords[i]))
            eqs_num = []
            for j in range(3):
                if j == i_star:
                    continue
                eqs_num.append(
                    _NumPoly.from_poly(self.components[j]).scale(coords[i_star])
                    - _NumPoly.from_poly(self.components[i_star]).scale(coords[j])
                )
            candidates = _solve_projective_pair_numeric(eqs_num[0], eqs_num[1], result)
        locus = self.indeterminacy_locus()
        for pt in candidates:
            in_locus = locus.contains(pt)
            if not in_locus and not self._fiber_verified(pt, target):
                continue
            result.add(pt, via_indeterminacy=in_locus)
        return result

    def _fiber_verified(self, point: ProjPoint, target: ProjPoint) -> bool:
        image = self.evaluate(point)
        return image is not None and image.fs_distance(target) < FIBER_VERIFY_TOL

    def generic_fiber_counts(self, trials: int, seed: int) -> list[int]:
        """Unflagged preimage counts over seeded rational targets.

        Targets have integer numerators in [-10, 10] and denominators up to 7.
        """
        self._require_plane()
        rng = np.random.default_rng(seed)
        counts: list[int] = []
        for _ in range(trials):
            coords = [
                Fraction(int(rng.integers(-10, 11)), int(rng.integers(1, 8)))
                for _ in range(3)
            ]
            if all(c == 0 for c in coords):
                coords[0] = Fraction(1)
            target = ProjPoint(coords)
            fiber = self.preimage_points(target)
            counts.append(len(fiber.unflagged_points()))
        return counts

    def topological_degree(self, trials: int = 5, seed: int = 0) -> int:
        """Generic fiber cardinality: majority count over seeded targets.

        Raises when no count occurs twice.
        """
        if trials < 3:
            raise ValueError("need at least 3 trials")
        counts = self.generic_fiber_counts(trials, seed)
        best, multiplicity = _majority(counts)
        if multiplicity < 2:
            raise ValueError(f"fiber counts inconclusive: {counts}")
        return best

    def backward_chain_set(self, start: AlgebraicPointSet, n: int) -> AlgebraicPointSet:
        """n-fold preimage of a finite set (chain semantics, flags kept)."""
        self._require_plane()
        if n < 0:
            raise ValueError("n must be >= 0")
        current = AlgebraicPointSet(positive_dimensional=start.positive_dimensional)
        for rec in start:
            current.add(rec.point, rec.via_indeterminacy)
        for _ in range(n):
            nxt = AlgebraicPointSet(positive_dimensional=current.positive_dimensional)
            for rec in current:
                fiber = self.preimage_points(rec.point)
                nxt.positive_dimensional = nxt.positive_dimensional or fiber.positive_dimensional
                for frec in fiber:
                    nxt.add(frec.point, frec.via_indeterminacy)
            current = nxt
        return current

    def disjointness_check(self, n_max: int) -> DisjointnessReport:
        """Pairwise intersection test of the chain preimages of I.

        Verdicts: HOLDS (all disjoint), FAILS (with the intersecting pairs),
        UNDECIDED (a positive-dimensional part blocked certification).
        """
        self._require_plane()
        locus = self.indeterminacy_locus()
        sets: list[AlgebraicPointSet] = []
        current = locus
        for _ in range(n_max + 1):
            sets.append(current)
            current = self.backward_chain_set(current, 1)
        pairs = [
            (m, q)
            for m in range(len(sets))
            for q in range(m + 1, len(sets))
            if sets[m].intersects(sets[q])
        ]
        positive = any(s.positive_dimensional for s in sets)
        if pairs:
            verdict = "FAILS"
        elif positive:
            verdict = "UNDECIDED"
        else:
            verdict = "HOLDS"
        return DisjointnessReport(verdict, pairs, sets)

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        names = default_var_names(self.dim_k + 1)
        return {
            "dim": self.dim_k,
            "degree": self.degree,
            "components": [c.to_string(names) for c in self.components],
        }

    @classmethod
    def from_json(cls, payload: dict) -> RationalMap:
        try:
            dim = int(payload["dim"])
            raw = payload["components"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"map JSON needs integer 'dim' and a 'components' list: {exc}") from exc
        names = default_var_names(dim + 1)
        if not isinstance(raw, list) or len(raw) != dim + 1:
            raise ValueError(f"'components' must list exactly {dim + 1} polynomials")
        comps = []
        for i, text in enumerate(raw):
            try:
                comps.append(parse_poly(text, names, homogeneous=True))
            except ValueError as exc:
                raise ValueError(f"component {i} invalid: {exc}") from exc
        return cls(comps)

    @classmethod
    def load(cls, path) -> RationalMap:
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))


@dataclass
class DisjointnessReport:
    verdict: str
    intersecting_pairs: list[tuple[int, int]]
    chain_sets: list[AlgebraicPointSet]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "intersecting_pairs": [list(p) for p in self.intersecting_pairs],
            "chain_sets": [s.to_json() for s in self.chain_sets],
        }


def _majority(values: list[int]) -> tuple[int, int]:
    best, mult = values[0], 0
    for v in set(values):
        c = values.count(v)
        if c > mult or (c == mult and v < best):
            best, mult = v, c
    return best, mult


# ---------------------------------------------------------------------------
# Pair-of-curves solving in P^2
#
# The exact path keeps rational arithmetic through elimination; the numeric
# path mirrors it with complex coefficient arrays for targets that do not
# rationalize.  Both feed the same dedup/verification downstream.


def _solve_projective_pair(p: Poly, q: Poly, flags: AlgebraicPointSet) -> list[ProjPoint]:
    """Common zeros in P^2 of two homogeneous polynomials in (z, w, t)."""
    if p.is_zero or q.is_zero:
        flags.positive_dimensional = True
        return []
    g = poly_gcd(p, q)
    if not g.is_constant():
        flags.positive_dimensional = True
        p = p.divide_exact(g)
        q = q.divide_exact(g)
        if p.is_constant() or q.is_constant():
            return []
    points: list[ProjPoint] = []
    # Affine chart t = 1.
    pa = p.set_variable(2, 1)
    qa = q.set_variable(2, 1)
    for a, b in _solve_affine_pair(pa, qa, 0, 1, flags):
        points.append(ProjPoint([a, b, 1.0]))
    # Line at infinity t = 0: binary forms in (z, w).
    p0 = p.set_variable(2, 0)
    q0 = q.set_variable(2, 0)
    points.extend(_solve_on_line(p0, q0, flags))
    return points


def affine_common_zeros(p: Poly, q: Poly, flags: AlgebraicPointSet | None = None) -> list[tuple[complex, complex]]:
    """Common zeros of two polynomials in the first two variables.

    Positive-dimensional parts are recorded on ``flags`` when given.
    """
    if flags is None:
        flags = AlgebraicPointSet()
    return _solve_affine_pair(p, q, 0, 1, flags)


def _solve_affine_pair(p: Poly, q: Poly, vi: int, vj: int, flags: AlgebraicPointSet) -> list[tuple[complex, complex]]:
    """Common zeros of two exact polynomials effective in variables (vi, vj)."""
    if p.is_zero and q.is_zero:
        flags.positive_dimensional = True
        return []
    if p.is_zero or q.is_zero:
        other = q if p.is_zero else p
        if not other.is_constant():
            flags.positive_dimensional = True
        return []
    if p.is_constant() or q.is_constant():
        return []
    g = poly_gcd(p, q)
    if not g.is_constant():
        flags.positive_dimensional = True
        p = p.divide_exact(g)
        q = q.divide_exact(g)
        if p.is_constant() or q.is_constant():
            return []
    if p.degree_in(vj) == 0 and q.degree_in(vj) == 0:
        # Both independent of vj: any common root in vi is a whole line.
        up, _ = to_unipoly(p)
        uq, _ = to_unipoly(q)
        if not up.gcd(uq).degree <= 0:
            flags.positive_dimensional = True
        return []
    res = resultant(p, q, vj)
    if res.is_zero:
        flags.positive_dimensional = True
        return []
    if res.is_constant():
        return []
    uni, _ = to_unipoly(res)
    solutions: list[tuple[complex, complex]] = []
    for a in complex_roots(uni):
        solutions.extend(_back_substitute(p, q, vi, vj, a, flags))
    return solutions


def _specialize(p: Poly, vi: int, vj: int, a: complex) -> np.ndarray:
    """Coefficients (in vj, ascending) of p with vi = a; complex array."""
    out = np.zeros(p.degree_in(vj) + 1, dtype=complex)
    for exps, coeff in p.terms.items():
        out[exps[vj]] += complex(coeff) * a ** exps[vi]
    return out


def _back_substitute(p, q, vi, vj, a, flags, scale_p=None, scale_q=None) -> list[tuple[complex, complex]]:
    pa = _specialize(p, vi, vj, a) if isinstance(p, Poly) else p.specialize(vi, vj, a)
    qa = _specialize(q, vi, vj, a) if isinstance(q, Poly) else q.specialize(vi, vj, a)
    mag = max(1.0, abs(a)) ** max(_poly_degree(p), _poly_degree(q))
    tol_p = 1e-10 * mag * (scale_p if scale_p else _coeff_scale(p))
    tol_q = 1e-10 * mag * (scale_q if scale_q else _coeff_scale(q))
    p_zero = np.all(np.abs(pa) <= tol_p)
    q_zero = np.all(np.abs(qa) <= tol_q)
    if p_zero and q_zero:
        flags.positive_dimensional = True
        return []
    if p_zero or q_zero:
        roots = _np_roots(qa if p_zero else pa)
        return [(a, b) for b in roots]
    first, second = (pa, qa) if _np_degree(pa) <= _np_degree(qa) else (qa, pa)
    out = []
    for b in _np_roots(first):
        val = _np_eval(second, b)
        if abs(val) <= 1e-6 * max(1.0, abs(b)) ** _np_degree(second) * max(np.abs(second)):
            out.append((a, b))
    return out


def _poly_degree(p) -> int:
    return p.degree if isinstance(p, Poly) else p.degree_total()


def _coeff_scale(p) -> float:
    if isinstance(p, Poly):
        return max(abs(float(c)) for c in p.terms.values())
    return p.scale_max()


def _np_degree(coeffs: np.ndarray) -> int:
    nz = np.nonzero(np.abs(coeffs) > 0)[0]
    return int(nz[-1]) if len(nz) else -1


def _np_roots(coeffs: np.ndarray) -> list[complex]:
    top = max(np.abs(coeffs))
    trimmed = np.array(coeffs, dtype=complex)
    trimmed[np.abs(trimmed) < 1e-13 * top] = 0
    d = _np_degree(trimmed)
    if d <= 0:
        return []
    return [complex(r) for r in np.roots(trimmed[: d + 1][::-1])]


def _np_eval(coeffs: np.ndarray, x: complex) -> complex:
    total = 0j
    for c in coeffs[::-1]:
        total = total * x + c
    return total


def _solve_on_line(p0: Poly, q0: Poly, flags: AlgebraicPointSet) -> list[ProjPoint]:
    """Common zeros on the line t=0 of two binary forms in (z, w)."""
    if p0.is_zero and q0.is_zero:
        flags.positive_dimensional = True
        return []
    points = []
    if p0.is_zero or q0.is_zero:
        form = q0 if p0.is_zero else p0
        points.extend(_binary_form_zeros(form))
        return points
    # Roots of one form kept when the other vanishes there too.
    cp = compile_numeric(q0)
    for pt in _binary_form_zeros(p0):
        if abs(cp(pt.coords)) < 1e-8 * _coeff_scale(q0):
            points.append(pt)
    return points


def _binary_form_zeros(form: Poly) -> list[ProjPoint]:
    """Projective zeros [z:w:0] of a nonzero binary form in (z, w)."""
    points = []
    mono = form.monomial_content()
    if mono[0] > 0:
        points.append(ProjPoint([Fraction(0), Fraction(1), Fraction(0)]))
    if mono[1] > 0:
        points.append(ProjPoint([Fraction(1), Fraction(0), Fraction(0)]))
    core = form.divide_monomial(mono)
    if not core.is_constant():
        dehom = core.set_variable(1, 1)
        uni, _ = to_unipoly(dehom)
        for r in complex_roots(uni):
            points.append(ProjPoint([r, 1.0, 0.0]))
    return points


class _NumPoly:
    """Bivariate-in-(z,w) polynomial of three homogeneous variables with
    complex coefficients; mirror of Poly for non-rational targets."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int, int], complex]):
        self.terms = {e: c for e, c in terms.items() if abs(c) > 0.0}

    @classmethod
    def from_poly(cls, p: Poly) -> _NumPoly:
        return cls({e: complex(c) for e, c in p.terms.items()})

    def scale(self, factor: complex) -> _NumPoly:
        return _NumPoly({e: c * factor for e, c in self.terms.items()})

    def __sub__(self, other: _NumPoly) -> _NumPoly:
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0j) - c
        return _NumPoly(out)

    def is_zero(self, tol: float = 0.0) -> bool:
        if not self.terms:
            return True
        return max(abs(c) for c in self.terms.values()) <= tol

    def degree_total(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def scale_max(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def set_var(self, var: int, value: complex) -> _NumPoly:
        out: dict[tuple[int, int, int], complex] = {}
        for exps, coeff in self.terms.items():
            c = coeff * value ** exps[var]
            key = tuple(0 if i == var else e for i, e in enumerate(exps))
            out[key] = out.get(key, 0j) + c
        return _NumPoly(out)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def coeff_vectors(self, var: int, other: int) -> list[np.ndarray]:
        """For each power of ``var``: dense coefficient vector in ``other``."""
        dv = max(self.degree_in(var), 0)
        do = max(self.degree_in(other), 0)
        vecs = [np.zeros(do + 1, dtype=complex) for _ in range(dv + 1)]
        for exps, coeff in self.terms.items():
            vecs[exps[var]][exps[other]] += coeff
        return vecs

    def specialize(self, vi: int, vj: int, a: complex) -> np.ndarray:
        out = np.zeros(max(self.degree_in(vj), 0) + 1, dtype=complex)
        for exps, coeff in self.terms.items():
            out[exps[vj]] += coeff * a ** exps[vi]
        return out


def _num_resultant(p: _NumPoly, q: _NumPoly, var: int, other: int) -> np.ndarray:
    """Sylvester resultant with complex coefficients; returns poly in `other`."""
    dp = p.degree_in(var)
    dq = q.degree_in(var)
    pv = p.coeff_vectors(var, other)
    qv = q.coeff_vectors(var, other)
    size = dp + dq
    one = np.array([1.0 + 0j])

    matrix: list[list[np.ndarray]] = []
    p_desc = pv[::-1]
    q_desc = qv[::-1]
    zero = np.zeros(1, dtype=complex)
    for shift in range(dq):
        matrix.append([zero] * shift + p_desc + [zero] * (size - shift - dp - 1))
    for shift in range(dp):
        matrix.append([zero] * shift + q_desc + [zero] * (size - shift - dq - 1))

    def det(rows: list[int], cols: list[int]) -> np.ndarray:
        if len(rows) == 1:
            return matrix[rows[0]][cols[0]]
        total = np.zeros(1, dtype=complex)
        sign = 1.0
        for k, c in enumerate(cols):
            entry = matrix[rows[0]][c]
            if np.any(np.abs(entry) > 0):
                sub = det(rows[1:], cols[:k] + cols[k + 1 :])
                prod = np.convolve(entry, sub)
                width = max(len(total), len(prod))
                padded = np.zeros(width, dtype=complex)
                padded[: len(total)] = total
                padded[: len(prod)] += sign * prod
                total = padded
            sign = -sign
        return total

    if size == 0:
        return one
    return det(list(range(size)), list(range(size)))


def _solve_projective_pair_numeric(p: _NumPoly, q: _NumPoly, flags: AlgebraicPointSet) -> list[ProjPoint]:
    scale = max(p.scale_max(), q.scale_max(), 1e-300)
    if p.is_zero(1e-14 * scale) or q.is_zero(1e-14 * scale):
        flags.positive_dimensional = True
        return []
    points: list[ProjPoint] = []
    pa = p.set_var(2, 1.0)
    qa = q.set_var(2, 1.0)
    if pa.degree_in(1) == 0 and qa.degree_in(1) == 0:
        pass  # both free of w in the chart; covered through the line solve below
    else:
        res = _num_resultant(pa, qa, 1, 0)
        top = max(np.abs(res)) if len(res) else 0.0
        if top <= 1e-12 * max(pa.scale_max(), qa.scale_max()) ** (pa.degree_in(1) + qa.degree_in(1) or 1):
            flags.positive_dimensional = True
        else:
            for a in _np_roots(res):
                points.extend(
                    ProjPoint([za, zb, 1.0])
                    for za, zb in _back_substitute(pa, qa, 0, 1, a, flags,
                                                   scale_p=pa.scale_max(), scale_q=qa.scale_max())
                )
    # Line t = 0.
    p0 = p.set_var(2, 0.0)
    q0 = q.set_var(2, 0.0)
    p0_zero = p0.is_zero(1e-13 * scale)
    q0_zero = q0.is_zero(1e-13 * scale)
    if p0_zero and q0_zero:
        flags.positive_dimensional = True
    else:
        if p0_zero or q0_zero:
            form = q0 if p0_zero else p0
            points.extend(_num_binary_zeros(form))
        else:
            for pt in _num_binary_zeros(p0):
                val = sum(c * pt.coords[0] ** e[0] * pt.coords[1] ** e[1] for e, c in q0.terms.items())
                if abs(val) < 1e-7 * q0.scale_max():
                    points.append(pt)
    return points


def _num_binary_zeros(form: _NumPoly) -> list[ProjPoint]:
    points = []
    vec = np.zeros(max(form.degree_in(0), 0) + 1, dtype=complex)  # coefficients in z at w = 1
    for exps, coeff in form.terms.items():
        vec[exps[0]] += coeff
    # w = 0 root present when every term has positive w-exponent.
    if all(e[1] > 0 for e in form.terms):
        points.append(ProjPoint([1.0, 0.0, 0.0]))
    for r in _np_roots(vec):
        points.append(ProjPoint([r, 1.0, 0.0]))
    return points


# ---------------------------------------------------------------------------
# Orbit helpers


def orbit(f: RationalMap, start: ProjPoint, length: int) -> list[ProjPoint]:
    """[x, f(x), ..., f^{length-1}(x)]; raises OrbitUndefined on failure."""
    pts = [start]
    current = start
    for step in range(1, length):
        current = f.evaluate_or_raise(current, step)
        pts.append(current)
    return pts
