"""Towers of spaces over P^2, truncated limit points, and the shift map.

A tower is a finite stack of levels.  Level 0 is the plane with a rational
self-map; every higher level carries a holomorphic projection ``pi`` one
level down, a holomorphic ``s`` one level down (the resolved map), a metric,
and a diameter.  Metrics are built so that

    dist_n(x, y) >= dist_{n-1}(pi(x), pi(y))

holds exactly; the truncated-limit metric is then

    delta(x, y) = sum_n dist_n(x_n, y_n) / (2^n * diam_n),

whose tail beyond depth N is bounded by 2^{-N}.

A :class:`TruncatedPoint` stores a compatible finite sequence (x_0..x_N).
Applying the shift consumes one level: entries (s_1(x_1), .., s_N(x_N))
re-indexed to depth N-1.  Workflows that iterate the shift m times must lift
to depth >= m plus whatever depth they still want to observe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .blowup import Atlas, FiberNotPointError, NoLiftError, SurfPoint
from .maps import OrbitUndefined, ProjPoint, RationalMap, fs_uniform_point
from .polynomials import compile_numeric

COMPAT_TOL = 1e-9
DIAMETER_PAIRS = 4096
DIAMETER_SEED = 91760


@dataclass
class TowerLevel:
    """One level: metric, projections, and the resolved map evaluator.

    ``pi``/``s``/``lift`` are None at level 0.  ``self_map`` evaluates the
    (possibly meromorphic) induced self-map of the level and raises
    :class:`OrbitUndefined` where it is not defined.
    """

    index: int
    dist: Callable[[object, object], float]
    sample: Callable[[np.random.Generator], object]
    self_map: Callable[[object], object] | None = None
    pi: Callable[[object], object] | None = None
    s: Callable[[object], object] | None = None
    lift: Callable[[object], object] | None = None
    diam: float = 1.0
    space_tag: str = "P2"
    metric_tag: str = "fubini-study"


class Tower:
    """A finite tower of levels with the truncated-limit metric.

    Diameters are estimated once at construction by seeded random-pair
    maximization unless a level already provides one; the base diameter is
    floored at 1 so the metric normalization below stays bounded by 2^{-n}.
    """

    def __init__(self, levels: Sequence[TowerLevel], name: str = "tower", estimate_diameters: bool = True):
        if not levels:
            raise ValueError("a tower needs at least level 0")
        self.levels = list(levels)
        self.name = name
        if estimate_diameters:
            self._estimate_diameters()
        self.levels[0].diam = max(1.0, self.levels[0].diam)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def _estimate_diameters(self) -> None:
        for level in self.levels:
            rng = np.random.default_rng(DIAMETER_SEED + level.index)
            best = 0.0
            for _ in range(DIAMETER_PAIRS):
                a = level.sample(rng)
                b = level.sample(rng)
                d = level.dist(a, b)
                if d > best:
                    best = d
            if best <= 0.0:
                raise ValueError(f"level {level.index} metric looks degenerate")
            level.diam = best

    # -- points -----------------------------------------------------------------

    def lift_point(self, base_point, depth: int | None = None, hint: dict[int, object] | None = None) -> TruncatedPoint:
        """Lift a base point through the single-point fibers of the projections.

        ``hint`` may supply the fiber point for levels where the fiber is not
        a single point (blow-up centers); without one those lifts fail.
        """
        if depth is None:
            depth = self.depth
        if depth > self.depth:
            raise ValueError(f"tower has depth {self.depth}, requested {depth}")
        entries = [base_point]
        for n in range(1, depth + 1):
            level = self.levels[n]
            supplied = (hint or {}).get(n)
            if supplied is not None:
                below = level.pi(supplied)
                if self.levels[n - 1].dist(below, entries[-1]) > COMPAT_TOL:
                    raise ValueError(f"hint at level {n} does not project to the lifted point")
                entries.append(supplied)
                continue
            try:
                entries.append(level.lift(entries[-1]))
            except (FiberNotPointError, NoLiftError) as exc:
                raise FiberNotPointError(
                    f"fiber over level-{n - 1} point is not a single point: {exc}"
                ) from exc
        return TruncatedPoint(tuple(entries))

    def check_compatible(self, point: TruncatedPoint, tol: float = COMPAT_TOL) -> float:
        worst = 0.0
        for n in range(1, point.depth + 1):
            below = self.levels[n].pi(point.entries[n])
            worst = max(worst, self.levels[n - 1].dist(below, point.entries[n - 1]))
        if worst > tol:
            raise ValueError(f"incompatible truncated point: projection error {worst:.3e}")
        return worst

    # -- metric and shift ----------------------------------------------------------

    def delta(self, x: TruncatedPoint, y: TruncatedPoint) -> float:
        """Truncated-limit distance; tail error beyond depth N is <= 2^-N."""
        if x.depth != y.depth:
            raise ValueError(f"depth mismatch: {x.depth} vs {y.depth}")
        total = 0.0
        for n in range(x.depth + 1):
            level = self.levels[n]
            total += level.dist(x.entries[n], y.entries[n]) / (2.0**n * level.diam)
        return total

    def sigma(self, x: TruncatedPoint) -> TruncatedPoint:
        """One shift step: depth drops by one; compatibility is re-checked."""
        if x.depth < 1:
            raise ValueError("shift needs depth >= 1: the truncation is exhausted")
        entries = tuple(self.levels[n].s(x.entries[n]) for n in range(1, x.depth + 1))
        out = TruncatedPoint(entries)
        self.check_compatible(out)
        return out

    def sigma_iterates(self, x: TruncatedPoint, count: int) -> list[TruncatedPoint]:
        """[x, sigma(x), ..., sigma^{count-1}(x)]; consumes count-1 levels."""
        if count - 1 > x.depth:
            raise ValueError(f"depth {x.depth} supports at most {x.depth} shift steps")
        out = [x]
        for _ in range(count - 1):
            out.append(self.sigma(out[-1]))
        return out

    def describe(self) -> dict:
        return {
            "name": self.name,
            "levels": len(self.levels),
            "space_tags": [lvl.space_tag for lvl in self.levels],
            "metric_tags": [lvl.metric_tag for lvl in self.levels],
            "diameters": [lvl.diam for lvl in self.levels],
        }


@dataclass(frozen=True)
class TruncatedPoint:
    """Finite compatible sequence (x_0, ..., x_N) standing in for a limit point."""

    entries: tuple

    @property
    def depth(self) -> int:
        return len(self.entries) - 1

    @property
    def base(self):
        return self.entries[0]


# ---------------------------------------------------------------------------
# Generic constructions


def _map_evaluator(f: RationalMap):
    def step(x: ProjPoint) -> ProjPoint:
        out = f.evaluate(x)
        if out is None:
            raise OrbitUndefined("map undefined at sampled point")
        return out

    return step


def identity_tower(f: RationalMap, depth: int, name: str = "identity-tower") -> Tower:
    """Tower with all levels the plane, trivial projections, and s = f.

    The legs of the defining triangles must be holomorphic, so the map must
    have an empty indeterminacy locus.
    """
    if f.dim_k != 2:
        raise ValueError("identity towers are built over maps of P^2")
    if len(f.indeterminacy_locus()) > 0 or f.indeterminacy_locus().positive_dimensional:
        raise ValueError("identity towers need a holomorphic map (empty indeterminacy locus)")
    step = _map_evaluator(f)
    fs = ProjPoint.fs_distance

    levels = [
        TowerLevel(
            index=0,
            dist=fs,
            sample=fs_uniform_point,
            self_map=step,
        )
    ]
    for n in range(1, depth + 1):
        scale = float(n + 1)
        levels.append(
            TowerLevel(
                index=n,
                dist=(lambda a, b, _s=scale: _s * fs(a, b)),
                sample=fs_uniform_point,
                self_map=step,
                pi=lambda x: x,
                s=step,
                lift=lambda x: x,
                metric_tag="fubini-study-stacked",
            )
        )
    tower = Tower(levels, name=name, estimate_diameters=True)
    # The recursive metric construction makes level n exactly (n+1) copies of
    # the base distance, so the diameters are known in closed form; keep the
    # sampled base estimate only as the floor-at-1 input.
    for n, level in enumerate(tower.levels):
        level.diam = float(n + 1) * tower.levels[0].diam
    return tower


# ---------------------------------------------------------------------------
# Probes


@dataclass
class CommutationReport:
    """Outcome of comparing iterate-then-project with the resolved-map chain."""

    max_discrepancy: float
    comparisons: int
    resampled: int
    by_pair: dict[tuple[int, int], float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "max_discrepancy": self.max_discrepancy,
            "comparisons": self.comparisons,
            "resampled": self.resampled,
            "by_pair": {f"p={p},l={l}": v for (p, l), v in sorted(self.by_pair.items())},
        }


def commutation_check(tower: Tower, samples: int = 100, seed: int = 0) -> CommutationReport:
    """Sample-check that projecting down then iterating the level-p map
    agrees with chaining the resolved maps from above.

    Points whose downward orbit hits an indeterminacy are resampled and
    counted.  The maximum metric discrepancy over all sampled (p, l) pairs is
    reported; an exact tower keeps it at roundoff scale.
    """
    if tower.depth < 1:
        raise ValueError("commutation check needs a tower of depth >= 1")
    rng = np.random.default_rng(seed)
    pairs = [(p, l) for p in range(tower.depth) for l in range(1, tower.depth - p + 1)]
    report = CommutationReport(0.0, 0, 0)
    per_pair = max(1, samples // len(pairs))
    for p, l in pairs:
        done = 0
        attempts = 0
        worst = 0.0
        while done < per_pair and attempts < 50 * per_pair:
            attempts += 1
            x = tower.levels[p + l].sample(rng)
            try:
                down = x
                for n in range(p + l, p, -1):
                    down = tower.levels[n].pi(down)
                lhs = down
                for _ in range(l):
                    lhs = tower.levels[p].self_map(lhs)
                rhs = x
                for n in range(p + l, p, -1):
                    rhs = tower.levels[n].s(rhs)
            except (OrbitUndefined, NoLiftError, FiberNotPointError):
                report.resampled += 1
                continue
            worst = max(worst, tower.levels[p].dist(lhs, rhs))
            done += 1
        report.by_pair[(p, l)] = worst
        report.comparisons += done
        report.max_discrepancy = max(report.max_discrepancy, worst)
    return report


@dataclass
class ContinuityReport:
    epsilon: float
    eta: float
    pairs_tested: int
    discarded: int
    counterexample: dict | None = None

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "pairs_tested": self.pairs_tested,
            "discarded": self.discarded,
            "counterexample": self.counterexample,
        }


def _perturb_base(rng: np.random.Generator, point: ProjPoint, scale: float) -> ProjPoint:
    noise = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    coords = np.array(point.coords, dtype=complex) + scale * noise
    return ProjPoint(coords)


def continuity_probe(
    tower: Tower,
    epsilon: float,
    samples: int = 2000,
    seed: int = 0,
    schedule_steps: int = 40,
    perturb=None,
) -> ContinuityReport:
    """Empirical modulus of continuity for one shift application.

    Samples base-point pairs at log-spaced separations, lifts them, and finds
    the largest eta from the halving schedule (2*eps, eps, eps/2, ...) such
    that every sampled pair closer than eta stays eps-close after the shift.
    The counterexample recorded is for the smallest failing eta.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if tower.depth < 1:
        raise ValueError("continuity probe needs depth >= 1")
    rng = np.random.default_rng(seed)
    measured: list[tuple[float, float, TruncatedPoint, TruncatedPoint]] = []
    discarded = 0
    while len(measured) < samples and discarded < 50 * samples:
        x0 = tower.levels[0].sample(rng)
        scale = 10.0 ** rng.uniform(-7.0, -0.3)
        y0 = _perturb_base(rng, x0, scale) if perturb is None else perturb(rng, x0, scale)
        try:
            x = tower.lift_point(x0)
            y = tower.lift_point(y0)
            din = tower.delta(x, y)
            dout = tower.delta(tower.sigma(x), tower.sigma(y))
        except (FiberNotPointError, OrbitUndefined, NoLiftError, ValueError):
            discarded += 1
            continue
        measured.append((din, dout, x, y))
    schedule = [2.0 * epsilon / (2.0**k) for k in range(schedule_steps)]
    counterexample = None
    chosen = 0.0
    for eta in schedule:
        bad = [(din, dout, x, y) for din, dout, x, y in measured if din < eta and dout >= epsilon]
        if not bad:
            chosen = eta
            break
        worst = max(bad, key=lambda item: item[1])
        counterexample = {
            "delta_in": worst[0],
            "delta_out": worst[1],
            "x": _point_json(worst[2]),
            "y": _point_json(worst[3]),
        }
    return ContinuityReport(epsilon, chosen, len(measured), discarded, counterexample)


def _point_json(point: TruncatedPoint) -> list:
    """Full per-level coordinates of a truncated point, JSON-friendly."""
    out = []
    for entry in point.entries:
        if hasattr(entry, "to_json"):
            out.append(entry.to_json())
        else:
            out.append(str(entry))
    return out


# ---------------------------------------------------------------------------
# Level-1 geometry over a blow-up atlas


CUTOFF_RADIUS = 0.5


class SurfaceMetric:
    """Metric on a twice-blown-up plane built from separating invariants.

    The distance is the sum of three pseudometrics: the base Fubini-Study
    distance of the projections, the direction coordinate of the first
    blow-up compared on P^1, and a cone-weighted comparison of the second
    blow-up's direction coordinate.  The cone weight fades with base distance
    from the blow-up center, vanishing before the second direction map loses
    definition, so the sum is a true metric dominating the projected one.
    """

    def __init__(self, atlas: Atlas):
        if len(atlas.blowups) != 2:
            raise ValueError("surface metric expects exactly two blow-ups")
        self.atlas = atlas
        self._center = atlas.charts[atlas.blowups[0].parent_chart].project(
            tuple(complex(c) for c in atlas.blowups[0].center)
        )
        self._dir1 = {}
        self._dir2 = {}
        for cid in atlas.order:
            pa, pb = atlas.direction_pair(0, cid)
            self._dir1[cid] = (compile_numeric(pa), compile_numeric(pb))
            qa, qb = atlas.direction_pair(1, cid)
            self._dir2[cid] = (compile_numeric(qa), compile_numeric(qb))

    # Embedding layout: [18: base projector | 8: dir1 projector | 1: cone radius
    #                    | 8: cone direction projector]
    EMBED_DIM = 35

    def embed(self, point: SurfPoint) -> np.ndarray:
        base = self.atlas.to_projective(point)
        out = np.empty(self.EMBED_DIM)
        out[:18] = _flat_projector(np.array(base.coords, dtype=complex))
        pa, pb = self._dir1[point.chart_id]
        out[18:26] = _flat_projector(np.array([pa(point.coords), pb(point.coords)], dtype=complex))
        rho = max(0.0, 1.0 - base.fs_distance(self._center) / CUTOFF_RADIUS)
        out[26] = rho
        if rho > 0.0:
            qa, qb = self._dir2[point.chart_id]
            va, vb = qa(point.coords), qb(point.coords)
            if max(abs(va), abs(vb)) < 1e-13:
                raise ValueError("second direction undefined inside its cutoff region")
            out[27:35] = _flat_projector(np.array([va, vb], dtype=complex))
        else:
            out[27:35] = 0.0
        return out

    def dist_embedded(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized distance on embedded coordinate arrays (  ..., 35)."""
        base = np.linalg.norm(a[..., :18] - b[..., :18], axis=-1) / np.sqrt(2.0)
        dir1 = np.linalg.norm(a[..., 18:26] - b[..., 18:26], axis=-1) / np.sqrt(2.0)
        ra = a[..., 26]
        rb = b[..., 26]
        dir2 = np.linalg.norm(a[..., 27:35] - b[..., 27:35], axis=-1) / np.sqrt(2.0)
        cone = np.abs(ra - rb) + np.minimum(ra, rb) * dir2
        return base + dir1 + cone

    def dist(self, x: SurfPoint, y: SurfPoint) -> float:
        return float(self.dist_embedded(self.embed(x), self.embed(y)))


def _flat_projector(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    p = np.outer(v, v.conj())
    return np.concatenate([p.real.ravel(), p.imag.ravel()])
