"""Chart atlases for point blow-ups of the projective plane.

An :class:`Atlas` starts from the three standard affine charts of P^2 and
grows by blowing up rational points.  Each blow-up replaces a point (given in
some chart) by two new charts in the familiar coordinates

    chart 1: (x, s)  with blow-down (a + x, b + x*s)
    chart 2: (s, y)  with blow-down (a + y*s, b + y)

around the center (a, b) of the host chart.  Everything the atlas knows about
a chart is symbolic: the blow-down into the parent chart, the induced triple
of homogeneous coordinates, and the inverse expressed as two degree-zero
rational functions of the homogeneous coordinates.  That makes chart
transitions, lifts of rational maps through the blow-downs, and induced
self-maps all computable by exact substitution plus gcd cancellation.

Chart domains are the bidisks |coords| <= radius (default 2); overlaps are
resolved by preferring the representation with the smaller coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .maps import (
    AlgebraicPointSet,
    ProjPoint,
    RationalMap,
    affine_common_zeros,
)
from .polynomials import (
    Poly,
    RatFunc,
    compile_numeric,
    gcd_many,
    poly_gcd,
)

CHART_RADIUS = 2.0
CENTER_EXCLUSION_TOL = 1e-13


# Numeric common-zero extraction sees a removed blow-up center as a (often
# multiple) root with square-root-of-epsilon noise; zeros this close to an
# excluded center are artifacts of the unresolved pullback, not points of the
# chart domain.
EXCLUSION_FILTER_TOL = 1e-7


class NoLiftError(Exception):
    """A point could not be represented in any chart of the atlas."""


class FiberNotPointError(NoLiftError):
    """Inversion requested over a blow-up center, where the fiber is a curve."""


@dataclass
class Chart:
    """One coordinate chart with its symbolic glue.

    ``blowdown`` maps this chart's coordinates into the parent chart; it is
    None for the standard affine charts of P^2.  ``to_homog`` is the induced
    triple of homogeneous coordinates, ``from_homog`` its inverse as rational
    functions of (y0, y1, y2).  ``excluded`` lists centers of later blow-ups
    that were removed from this chart's domain.
    """

    id: str
    var_names: tuple[str, str]
    parent: str | None
    blowdown: tuple[Poly, Poly] | None
    to_homog: tuple[Poly, Poly, Poly]
    from_homog: tuple[RatFunc, RatFunc]
    exceptional: Poly | None = None
    excluded: list[tuple[Fraction, Fraction]] = field(default_factory=list)

    def __post_init__(self):
        self._num_homog = tuple(compile_numeric(p) for p in self.to_homog)
        self._num_inverse = tuple(
            (compile_numeric(r.num), compile_numeric(r.den)) for r in self.from_homog
        )

    def project(self, coords: Sequence[complex]) -> ProjPoint:
        return ProjPoint([f(coords) for f in self._num_homog])

    def invert(self, point: ProjPoint, tol: float = 1e-12) -> tuple[complex, complex] | None:
        """Chart coordinates of a projective point, or None when undefined."""
        out = []
        for num, den in self._num_inverse:
            d = den(point.coords)
            if abs(d) < tol:
                return None
            out.append(num(point.coords) / d)
        return tuple(out)

    def is_excluded(self, coords: Sequence[complex], tol: float = CENTER_EXCLUSION_TOL) -> bool:
        return any(
            max(abs(coords[0] - complex(a)), abs(coords[1] - complex(b))) < tol
            for a, b in self.excluded
        )

    def to_json(self) -> dict:
        names = self.var_names
        payload = {
            "id": self.id,
            "variables": list(names),
            "parent": self.parent,
            "homogeneous_lift": [p.to_string(names) for p in self.to_homog],
        }
        if self.blowdown is not None:
            payload["blowdown"] = [p.to_string(names) for p in self.blowdown]
        if self.exceptional is not None:
            payload["exceptional"] = self.exceptional.to_string(names)
        return payload


@dataclass(frozen=True)
class SurfPoint:
    """Point on a blown-up surface: chart id plus two complex coordinates."""

    chart_id: str
    coords: tuple[complex, complex]

    @classmethod
    def of(cls, chart_id: str, a, b) -> SurfPoint:
        return cls(chart_id, (complex(a), complex(b)))

    def close_to(self, other: SurfPoint, tol: float = 1e-9) -> bool:
        return self.chart_id == other.chart_id and (
            max(abs(a - b) for a, b in zip(self.coords, other.coords)) < tol
        )

    def to_json(self) -> dict:
        return {
            "chart": self.chart_id,
            "coords": [[c.real, c.imag] for c in self.coords],
        }


@dataclass(frozen=True)
class BlowupRecord:
    parent_chart: str
    center: tuple[Fraction, Fraction]
    chart_ids: tuple[str, str]


@dataclass
class LocalMap:
    """A rational map expressed in one chart, with common factors cancelled.

    ``components`` are the three homogeneous target coordinates as
    polynomials in the chart variables.  ``indeterminacy`` lists the common
    zeros inside the chart domain; the map is holomorphic on the chart iff
    that list is empty and no positive-dimensional part was hit.
    """

    source_chart: str
    components: tuple[Poly, Poly, Poly]
    indeterminacy: list[tuple[complex, complex]]
    positive_dimensional: bool = False

    def __post_init__(self):
        self._compiled = tuple(compile_numeric(p) for p in self.components)

    @property
    def holomorphic(self) -> bool:
        return not self.indeterminacy and not self.positive_dimensional

    def evaluate(self, coords: Sequence[complex], tol: float = 1e-12) -> ProjPoint | None:
        values = [f(coords) for f in self._compiled]
        if max(abs(v) for v in values) < tol:
            return None
        return ProjPoint(values)

    def component_strings(self, var_names: Sequence[str]) -> list[str]:
        return [p.to_string(var_names) for p in self.components]


def _std_chart(index: int) -> Chart:
    names3 = ("z", "w", "t")
    others = [i for i in range(3) if i != index]
    var_names = (names3[others[0]], names3[others[1]])
    to_homog = [None, None, None]
    to_homog[index] = Poly.constant(2, 1)
    to_homog[others[0]] = Poly.variable(2, 0)
    to_homog[others[1]] = Poly.variable(2, 1)
    y = [Poly.variable(3, i) for i in range(3)]
    from_homog = (
        RatFunc(y[others[0]], y[index]),
        RatFunc(y[others[1]], y[index]),
    )
    return Chart(
        id=f"std_{names3[index]}",
        var_names=var_names,
        parent=None,
        blowdown=None,
        to_homog=tuple(to_homog),
        from_homog=from_homog,
    )


class Atlas:
    """Immutable chart atlas for P^2 after a sequence of point blow-ups."""

    def __init__(self, charts: list[Chart], blowups: list[BlowupRecord], radius: float = CHART_RADIUS):
        self.charts = {c.id: c for c in charts}
        self.order = [c.id for c in charts]
        self.blowups = list(blowups)
        self.radius = radius

    @classmethod
    def projective_plane(cls) -> Atlas:
        return cls([_std_chart(i) for i in range(3)], [])

    def chart(self, chart_id: str) -> Chart:
        return self.charts[chart_id]

    @property
    def depth(self) -> int:
        return len(self.blowups)

    def blowup_charts(self) -> list[str]:
        return [cid for rec in self.blowups for cid in rec.chart_ids]

    # -- construction -----------------------------------------------------------

    def blow_up(
        self,
        center: ProjPoint | tuple[str, tuple[Fraction, Fraction]],
        var_names: tuple[tuple[str, str], tuple[str, str]] | None = None,
        chart_ids: tuple[str, str] | None = None,
    ) -> Atlas:
        """New atlas with two extra charts replacing the given smooth point."""
        if isinstance(center, ProjPoint):
            exact = center.rational_coords()
            if exact is None:
                raise ValueError("blow-up centers must have exact rational coordinates")
            host_id = None
            local = None
            for cid in self.order:
                chart = self.charts[cid]
                inv = _invert_exact(chart, exact)
                if inv is None:
                    continue
                a, b = inv
                if max(abs(a), abs(b)) <= self.radius and not chart.is_excluded(
                    (complex(a), complex(b))
                ):
                    host_id = cid
                    local = (a, b)
                    break
            if host_id is None:
                raise ValueError(f"point {center} not covered by any chart")
        else:
            host_id, local = center
            local = (Fraction(local[0]), Fraction(local[1]))
            if host_id not in self.charts:
                raise ValueError(f"unknown chart {host_id!r}")
            if self.charts[host_id].is_excluded((complex(local[0]), complex(local[1]))):
                raise ValueError("center already blown up")
        host = self.charts[host_id]
        a, b = local
        hx, hy = host.var_names
        if var_names is None:
            var_names = ((hx, f"{hy}_{hx}"), (hy, f"{hx}_{hy}"))
        if chart_ids is None:
            chart_ids = tuple("_".join(n) for n in var_names)
        if any(cid in self.charts for cid in chart_ids):
            raise ValueError(f"chart id clash: {chart_ids}")

        first_var = Poly.variable(2, 0)
        slope_var = Poly.variable(2, 1)
        ca = Poly.constant(2, a)
        cb = Poly.constant(2, b)
        # Chart 1: coords (x, s), blow-down (a + x, b + x*s).
        # Chart 2: coords (y, s'), blow-down (a + y*s', b + y).
        blowdown1 = (ca + first_var, cb + first_var * slope_var)
        blowdown2 = (ca + first_var * slope_var, cb + first_var)
        pa, pb = host.from_homog
        inverse1 = (pa.shift(a), pb.shift(b) / pa.shift(a))
        inverse2 = (pb.shift(b), pa.shift(a) / pb.shift(b))

        new_charts = []
        for names, cid, bd, inv in (
            (var_names[0], chart_ids[0], blowdown1, inverse1),
            (var_names[1], chart_ids[1], blowdown2, inverse2),
        ):
            to_homog = tuple(_cancel_triple([p.substitute(list(bd)) for p in host.to_homog]))
            chart = Chart(
                id=cid,
                var_names=names,
                parent=host_id,
                blowdown=bd,
                to_homog=to_homog,
                from_homog=inv,
                exceptional=Poly.variable(2, 0),
            )
            new_charts.append(chart)

        charts = []
        for cid in self.order:
            old = self.charts[cid]
            copy = Chart(
                id=old.id,
                var_names=old.var_names,
                parent=old.parent,
                blowdown=old.blowdown,
                to_homog=old.to_homog,
                from_homog=old.from_homog,
                exceptional=old.exceptional,
                excluded=list(old.excluded),
            )
            charts.append(copy)
        # Remove the center from every chart that used to contain it.  The
        # exact transition from the host chart sees the center even on
        # exceptional curves, where inversion through P^2 is blind.
        for chart in charts:
            spot = self._transition_exact(host_id, chart.id, (a, b))
            if spot is not None and max(abs(spot[0]), abs(spot[1])) <= self.radius:
                chart.excluded.append(spot)
        charts = new_charts + charts
        blowups = self.blowups + [BlowupRecord(host_id, (a, b), chart_ids)]
        return Atlas(charts, blowups, self.radius)

    # -- point movement -----------------------------------------------------------

    def to_projective(self, point: SurfPoint) -> ProjPoint:
        return self.charts[point.chart_id].project(point.coords)

    def from_projective(self, point: ProjPoint) -> SurfPoint:
        """The unique surface point over ``point``.

        Raises :class:`FiberNotPointError` over a blow-up center, where the
        fiber is a whole exceptional curve.
        """
        mags = [abs(c) for c in point.coords]
        std = ("std_z", "std_w", "std_t")[mags.index(max(mags))]
        chart_id = std
        coords = self.charts[std].invert(point)
        for record in self.blowups:
            if chart_id != record.parent_chart:
                # Transportable only through the record's parent chart.
                alt = self.charts[record.parent_chart].invert(point)
                if alt is None:
                    continue
                if max(abs(c) for c in alt) > self.radius:
                    continue
                chart_id, coords = record.parent_chart, alt
            dx = coords[0] - complex(record.center[0])
            dy = coords[1] - complex(record.center[1])
            top = max(abs(dx), abs(dy))
            if top > self.radius:
                continue
            if top < CENTER_EXCLUSION_TOL:
                raise FiberNotPointError(
                    f"{point} is a blow-up center; its fiber is an exceptional curve"
                )
            if abs(dx) >= abs(dy):
                chart_id, coords = record.chart_ids[0], (dx, dy / dx)
            else:
                chart_id, coords = record.chart_ids[1], (dy, dx / dy)
        return SurfPoint(chart_id, (complex(coords[0]), complex(coords[1])))

    def transition(self, source: str, target: str) -> tuple[RatFunc, RatFunc]:
        """Symbolic coordinate change between two charts."""
        triple = list(self.charts[source].to_homog)
        fa, fb = self.charts[target].from_homog
        return (_substitute_cancel(fa, triple), _substitute_cancel(fb, triple))

    def _transition_exact(
        self, source: str, target: str, coords: tuple[Fraction, Fraction]
    ) -> tuple[Fraction, Fraction] | None:
        """Transition applied to exact rational coordinates; None off-domain."""
        values = [Fraction(coords[0]), Fraction(coords[1])]
        out = []
        for r in self.transition(source, target):
            den = r.den.eval_exact(values)
            if den == 0:
                return None
            out.append(r.num.eval_exact(values) / den)
        return tuple(out)

    def migrate(self, point: SurfPoint, target: str, tol: float = 1e-12) -> SurfPoint | None:
        """Re-express a point in another chart; None when undefined there."""
        ta, tb = self.transition(point.chart_id, target)
        da = ta.den.eval_complex(point.coords)
        db = tb.den.eval_complex(point.coords)
        if abs(da) < tol or abs(db) < tol:
            return None
        return SurfPoint(
            target,
            (
                ta.num.eval_complex(point.coords) / da,
                tb.num.eval_complex(point.coords) / db,
            ),
        )

    def direction_pair(self, blowup_index: int, chart_id: str) -> tuple[Poly, Poly]:
        """Exceptional-direction coordinates of one blow-up, seen in a chart.

        For the blow-up with record index ``i`` this is the projective pair
        measuring the displacement direction from its center, composed with
        the chart, with common factors cancelled so the pair extends over the
        exceptional curve.
        """
        record = self.blowups[blowup_index]
        pa, pb = self.charts[record.parent_chart].from_homog
        da = pa.shift(record.center[0])
        db = pb.shift(record.center[1])
        # Projective pair [da : db] over a common denominator.
        num_a = da.num * db.den
        num_b = db.num * da.den
        triple = list(self.charts[chart_id].to_homog)
        comp_a = num_a.substitute(triple)
        comp_b = num_b.substitute(triple)
        if comp_a.is_zero and comp_b.is_zero:
            raise ValueError("direction pair degenerates identically on this chart")
        g = poly_gcd(comp_a, comp_b)
        if not g.is_constant():
            comp_a = comp_a.divide_exact(g)
            comp_b = comp_b.divide_exact(g)
        return comp_a, comp_b

    # -- lifting rational maps ------------------------------------------------------

    def lift_map(self, f: RationalMap) -> dict[str, LocalMap]:
        """Express f composed with the full blow-down in every chart.

        Components are divided by their full polynomial gcd, so a chart whose
        lifted components have no common zero is certified holomorphic there.
        Remaining common zeros inside the chart domain are reported in local
        coordinates.
        """
        if f.dim_k != 2:
            raise ValueError("atlas lifting is for maps of P^2")
        out = {}
        for cid in self.order:
            chart = self.charts[cid]
            triple = list(chart.to_homog)
            comps = [c.substitute(triple) for c in f.components]
            if all(c.is_zero for c in comps):
                raise ValueError(f"lift degenerates to zero on chart {cid}")
            comps = _cancel_triple(comps)
            zeros, positive = _triple_zeros(comps)
            zeros = [
                zc
                for zc in zeros
                if max(abs(zc[0]), abs(zc[1])) <= self.radius
                and not chart.is_excluded(zc, EXCLUSION_FILTER_TOL)
            ]
            out[cid] = LocalMap(cid, tuple(comps), zeros, positive)
        return out

    # -- serialization -----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "charts": [self.charts[cid].to_json() for cid in self.order],
            "blowups": [
                {
                    "parent": rec.parent_chart,
                    "center": [str(rec.center[0]), str(rec.center[1])],
                    "charts": list(rec.chart_ids),
                }
                for rec in self.blowups
            ],
        }

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json(), handle, indent=2, sort_keys=True)


def _invert_exact(chart: Chart, coords: tuple[Fraction, ...]) -> tuple[Fraction, Fraction] | None:
    """Chart coordinates of an exact projective point; None off-domain."""
    values = list(coords)
    out = []
    for r in chart.from_homog:
        den = r.den.eval_exact(values)
        if den == 0:
            return None
        out.append(r.num.eval_exact(values) / den)
    return tuple(out)


def _substitute_cancel(r: RatFunc, triple: list[Poly]) -> RatFunc:
    return RatFunc(r.num.substitute(triple), r.den.substitute(triple))


def _cancel_triple(comps: list[Poly]) -> list[Poly]:
    g = gcd_many([c for c in comps if not c.is_zero])
    if g.is_constant():
        return comps
    return [c.divide_exact(g) if not c.is_zero else c for c in comps]


def _triple_zeros(comps: list[Poly]) -> tuple[list[tuple[complex, complex]], bool]:
    """Common zeros of three 2-variable polynomials (coprime as a triple)."""
    nonzero = [c for c in comps if not c.is_zero]
    if any(c.is_constant() for c in nonzero):
        return [], False
    p0, p1, p2 = comps
    flags = AlgebraicPointSet()
    candidates: list[tuple[complex, complex]] = []
    g = poly_gcd(p0, p1)
    if not g.is_constant():
        candidates.extend(affine_common_zeros(g, p2, flags))
        candidates.extend(affine_common_zeros(p0.divide_exact(g), p1.divide_exact(g), flags))
    else:
        candidates.extend(affine_common_zeros(p0, p1, flags))
    compiled = [compile_numeric(c) for c in comps]
    zeros = []
    for cand in candidates:
        if all(abs(c(cand)) < 1e-10 for c in compiled):
            if not any(max(abs(cand[0] - z[0]), abs(cand[1] - z[1])) < 1e-9 for z in zeros):
                zeros.append(cand)
    return zeros, flags.positive_dimensional


def find_indeterminacy_points(atlas: Atlas, lifted: dict[str, LocalMap]) -> list[SurfPoint]:
    """Surface points where a lifted map is undefined, deduplicated.

    Scans the blow-up charts first (that is where cancellation can leave
    indeterminacy on the exceptional curves) and then the ambient charts.
    """
    found: list[SurfPoint] = []
    ordered = atlas.blowup_charts() + [
        cid for cid in atlas.order if cid not in atlas.blowup_charts()
    ]
    for cid in ordered:
        local = lifted[cid]
        for coords in local.indeterminacy:
            candidate = SurfPoint(cid, (complex(coords[0]), complex(coords[1])))
            duplicate = False
            for prior in found:
                moved = atlas.migrate(candidate, prior.chart_id)
                if moved is not None and moved.close_to(prior, 1e-8):
                    duplicate = True
                    break
            if not duplicate:
                found.append(candidate)
    return found


class LiftedSelfMap:
    """The self-map an atlas induces from a rational map of the plane.

    For every ordered chart pair the composition (chart inverse) after
    (lifted map) is computed symbolically with gcd cancellation, which
    extends the dynamics over the exceptional curves exactly where the
    cancelled formulas stay finite.  Numeric evaluation tries the source
    chart first, then the remaining charts, and keeps the first image inside
    a chart domain.
    """

    def __init__(self, atlas: Atlas, f: RationalMap):
        self.atlas = atlas
        self.f = f
        self.lifted = atlas.lift_map(f)
        self._formulas: dict[tuple[str, str], tuple[RatFunc, RatFunc]] = {}
        self._numeric: dict[tuple[str, str], tuple] = {}

    def formula(self, source: str, target: str) -> tuple[RatFunc, RatFunc]:
        key = (source, target)
        if key not in self._formulas:
            triple = list(self.lifted[source].components)
            fa, fb = self.atlas.charts[target].from_homog
            self._formulas[key] = (
                _substitute_cancel(fa, triple),
                _substitute_cancel(fb, triple),
            )
        return self._formulas[key]

    def _numeric_formula(self, source: str, target: str):
        key = (source, target)
        if key not in self._numeric:
            fa, fb = self.formula(source, target)
            self._numeric[key] = (
                compile_numeric(fa.num),
                compile_numeric(fa.den),
                compile_numeric(fb.num),
                compile_numeric(fb.den),
            )
        return self._numeric[key]

    def _target_order(self, source: str) -> list[str]:
        sibling = []
        for rec in self.atlas.blowups:
            if source in rec.chart_ids:
                sibling = [cid for cid in rec.chart_ids if cid != source]
        rest = [cid for cid in self.atlas.order if cid != source and cid not in sibling]
        return [source] + sibling + rest

    def step(self, point: SurfPoint, tol: float = 1e-12) -> SurfPoint:
        """One application of the induced map; NoLiftError when undefined."""
        for target in self._target_order(point.chart_id):
            na, da, nb, db = self._numeric_formula(point.chart_id, target)
            den_a = da(point.coords)
            den_b = db(point.coords)
            if abs(den_a) < tol or abs(den_b) < tol:
                continue
            ca = na(point.coords) / den_a
            cb = nb(point.coords) / den_b
            if max(abs(ca), abs(cb)) <= self.atlas.radius:
                chart = self.atlas.charts[target]
                if chart.is_excluded((ca, cb)):
                    continue
                return SurfPoint(target, (ca, cb))
        raise NoLiftError(f"no chart holds the image of {point}")
