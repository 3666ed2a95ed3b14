"""Topological-entropy estimation from maximal separated orbit sets.

The growth rate of N(m, eps) — the size of a maximal set of points whose
orbits stay pairwise eps-apart in the sup-over-time (Bowen) metric for m
steps — is estimated by a greedy packing over a finite sample:

* orbits are precomputed and embedded into flat coordinate arrays where the
  system's metric is vectorizable;
* a greedy pass keeps a sample point iff its Bowen distance to every kept
  point is at least eps (a spatial hash on the time-0 coordinates prunes the
  comparisons; the Bowen distance dominates the time-0 distance, so pruning
  never changes the result);
* counts for increasing m reuse the kept set of the previous m as the head of
  the feed order.  A set separated at m stays separated at m+1, so the counts
  are non-decreasing in m by construction;
* the rate is the least-squares slope of log N(m, eps) against m, fitted only
  over the m whose counts stay below half the admissible sample (beyond that
  the sample, not the dynamics, caps the count).  Saturated ranges are
  flagged and the fitted slope is reported as a lower-bound estimate.

Sampling can only exhibit separated sets, never bound them from above, so
every rate this module produces is lower-bound evidence by nature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .maps import OrbitUndefined

# Above this fraction of the admissible sample, a separated-set count is
# sample-limited outright (the published warning threshold).
SATURATION_FRACTION = 0.5
# The growth-rate fit stops earlier: once a count passes this fraction, the
# finite sample spacing inflates packing gaps enough to bias the next
# log-increment visibly downward, so those m are excluded from the fit.
FIT_FRACTION = 0.25


@dataclass(frozen=True)
class BowenParams:
    """Orbit length and separation radius for one packing computation."""

    m: int
    epsilon: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("orbit length m must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("separation radius must be positive")


class OrbitSystem:
    """Base for systems the estimator can drive.

    Subclasses provide a point step, a metric, and an embedding of points
    into R^D on which the metric is computable with numpy.  ``key_lipschitz``
    bounds the embedded time-0 coordinate spread of an eps-ball, making the
    spatial hash sound.
    """

    name = "system"
    key_dims = 3
    key_lipschitz = math.sqrt(2.0)

    def step(self, point):
        raise NotImplementedError

    def embed(self, point) -> np.ndarray:
        raise NotImplementedError

    def dist_embedded(self, a: np.ndarray, b: np.ndarray, step_index: int = 0) -> np.ndarray:
        raise NotImplementedError

    def dist(self, x, y) -> float:
        return float(self.dist_embedded(self.embed(x), self.embed(y)))

    def sample_points(self, count: int, seed: int) -> list:
        raise NotImplementedError

    def admissible(self, point) -> bool:
        """Cheap pre-filter applied to orbit points (e.g. stay off fibers)."""
        return True

    # Optional fast path: systems with array-friendly steps override this.
    def orbit_embeddings(self, points: Sequence, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Embedded orbits (N, m, D) plus a validity mask (N,)."""
        n = len(points)
        probe = self.embed(points[0])
        out = np.zeros((n, m, len(probe)))
        valid = np.ones(n, dtype=bool)
        for i, start in enumerate(points):
            x = start
            try:
                if not self.admissible(x):
                    raise OrbitUndefined("sample point inadmissible", 0)
                out[i, 0] = self.embed(x)
                for l in range(1, m):
                    x = self.step(x)
                    if not self.admissible(x):
                        raise OrbitUndefined("orbit left the admissible region", l)
                    out[i, l] = self.embed(x)
            except OrbitUndefined:
                valid[i] = False
        return out, valid


@dataclass
class OrbitEnsemble:
    """Precomputed embedded orbits over one sample set."""

    system: OrbitSystem
    embeddings: np.ndarray  # (N, m_max, D), rows meaningful where valid
    valid: np.ndarray  # (N,) bool
    sample_size: int

    @property
    def m_max(self) -> int:
        return self.embeddings.shape[1]

    @property
    def admissible_indices(self) -> np.ndarray:
        return np.flatnonzero(self.valid)

    @property
    def discards(self) -> int:
        return self.sample_size - int(self.valid.sum())


def build_orbits(system: OrbitSystem, points: Sequence, m: int) -> OrbitEnsemble:
    emb, valid = system.orbit_embeddings(points, m)
    return OrbitEnsemble(system, emb, valid, len(points))


def bowen_dist(system: OrbitSystem, x, y, m: int) -> float:
    """Sup over the first m steps of the distance between the two orbits.

    Raises :class:`OrbitUndefined` (with the offending step) when either
    orbit leaves the domain before m steps.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    best = 0.0
    a, b = x, y
    for l in range(m):
        if l > 0:
            try:
                a = system.step(a)
            except OrbitUndefined as exc:
                raise OrbitUndefined(f"first orbit undefined at step {l}", l) from exc
            try:
                b = system.step(b)
            except OrbitUndefined as exc:
                raise OrbitUndefined(f"second orbit undefined at step {l}", l) from exc
        best = max(best, system.dist(a, b))
    return best


def _bowen_block(system: OrbitSystem, block: np.ndarray, cand: np.ndarray, eps: float) -> bool:
    """True iff some orbit in ``block`` stays eps-close to ``cand`` at every step.

    Works incrementally: after each step only the orbits still below eps
    remain under consideration, which exits early for generic pairs.
    """
    m = cand.shape[0]
    alive = np.flatnonzero(system.dist_embedded(block[:, 0, :], cand[0][None, :], 0) < eps)
    if alive.size == 0:
        return False
    for l in range(1, m):
        d = system.dist_embedded(block[alive, l, :], cand[l][None, :], l)
        alive = alive[d < eps]
        if alive.size == 0:
            return False
    return True


class _HashGrid:
    """Spatial hash over the leading embedded coordinates at time 0."""

    def __init__(self, cell: float, dims: int):
        self.cell = max(cell, 1e-12)
        self.dims = dims
        self.table: dict[tuple, list[int]] = {}
        self.offsets = list(product((-1, 0, 1), repeat=dims))

    def key(self, coords: np.ndarray) -> tuple:
        return tuple(int(math.floor(c / self.cell)) for c in coords[: self.dims])

    def neighbors(self, coords: np.ndarray) -> list[int]:
        base = self.key(coords)
        out: list[int] = []
        for off in self.offsets:
            bucket = self.table.get(tuple(b + o for b, o in zip(base, off)))
            if bucket:
                out.extend(bucket)
        return out

    def insert(self, coords: np.ndarray, index: int) -> None:
        self.table.setdefault(self.key(coords), []).append(index)


def greedy_separated_set(
    ensemble: OrbitEnsemble,
    params: BowenParams,
    feed_first: Sequence[int] = (),
) -> list[int]:
    """Indices of a maximal-within-sample (m, eps)-separated subset.

    The pass keeps a point iff its Bowen distance to every previously kept
    point is >= eps, scanning ``feed_first`` (assumed pairwise separated,
    e.g. the kept set of a shorter orbit length) before the remaining
    admissible samples in index order.
    """
    m, eps = params.m, params.epsilon
    if m > ensemble.m_max:
        raise ValueError(f"ensemble holds {ensemble.m_max} steps, requested {m}")
    admissible = ensemble.admissible_indices
    if admissible.size == 0:
        raise ValueError("no admissible samples: every orbit was discarded")
    system = ensemble.system
    emb = ensemble.embeddings
    dims = min(system.key_dims, emb.shape[2])
    grid = _HashGrid(system.key_lipschitz * eps, dims)
    head = [int(i) for i in feed_first]
    head_set = set(head)
    order = head + [int(i) for i in admissible if int(i) not in head_set]
    kept: list[int] = []
    for idx in order:
        cand = emb[idx, :m, :]
        nbrs = grid.neighbors(cand[0])
        if nbrs and _bowen_block(system, emb[np.array(nbrs)][:, :m, :], cand, eps):
            continue
        kept.append(idx)
        grid.insert(cand[0], idx)
    return kept


def verify_separated(ensemble: OrbitEnsemble, kept: Sequence[int], params: BowenParams) -> bool:
    """Exhaustive pairwise recheck that the kept set is eps-separated."""
    emb = ensemble.embeddings
    system = ensemble.system
    idx = np.array(sorted(kept))
    for i, a in enumerate(idx):
        block = emb[idx[i + 1 :]][:, : params.m, :]
        if block.shape[0] and _bowen_block(system, block, emb[a, : params.m, :], params.epsilon):
            return False
    return True


def verify_maximal(ensemble: OrbitEnsemble, kept: Sequence[int], params: BowenParams) -> bool:
    """Every admissible non-kept sample is within eps of some kept point."""
    emb = ensemble.embeddings
    system = ensemble.system
    kept_arr = np.array(sorted(kept))
    block = emb[kept_arr][:, : params.m, :]
    for idx in ensemble.admissible_indices:
        if idx in set(int(k) for k in kept_arr):
            continue
        if not _bowen_block(system, block, emb[int(idx), : params.m, :], params.epsilon):
            return False
    return True


# ---------------------------------------------------------------------------
# Rates and reports


@dataclass
class SlopeFit:
    """Least-squares growth rate of log N(m) on the unsaturated prefix.

    ``band`` is the two-standard-error interval of the fitted slope; it needs
    at least three fitted points (otherwise the residual variance has no
    degrees of freedom) and quantifies scatter, not the sampling bias.
    """

    epsilon: float
    slope: float | None
    m_used: list[int]
    saturated: bool
    counts: dict[int, int]
    band: tuple[float, float] | None = None

    @property
    def lower_bound_only(self) -> bool:
        return self.saturated

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "slope": self.slope,
            "confidence_band": list(self.band) if self.band else None,
            "m_used": self.m_used,
            "saturated": self.saturated,
            "lower_bound_only": self.lower_bound_only,
        }


def fit_growth_rate(
    counts: dict[int, int],
    admissible: int,
    epsilon: float,
    fit_fraction: float = FIT_FRACTION,
) -> SlopeFit:
    """Slope of log N against m over the sample-dominated-free prefix.

    Counts at or above ``fit_fraction`` of the admissible sample are excluded
    from the fit (they measure the sample, not the dynamics); at least two
    usable m values are needed for a slope.  Any truncation marks the fit
    saturated, i.e. a lower-bound estimate.
    """
    cutoff = fit_fraction * admissible
    ms = sorted(counts)
    usable = []
    for m in ms:
        if counts[m] >= cutoff:
            break
        usable.append(m)
    saturated = len(usable) < len(ms)
    if len(usable) < 2:
        return SlopeFit(epsilon, None, usable, True, dict(counts))
    xs = np.array(usable, dtype=float)
    ys = np.array([math.log(counts[m]) for m in usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    band = None
    if len(usable) >= 3:
        resid = ys - (slope * xs + intercept)
        denom = float(np.sum((xs - xs.mean()) ** 2))
        se = math.sqrt(float(np.sum(resid**2)) / (len(usable) - 2) / denom)
        band = (float(slope) - 2.0 * se, float(slope) + 2.0 * se)
    return SlopeFit(epsilon, float(slope), usable, saturated, dict(counts), band)


def separated_counts(
    ensemble: OrbitEnsemble,
    m_values: Sequence[int],
    epsilon: float,
) -> dict[int, int]:
    """N(m, eps) for each m over one shared orbit ensemble.

    Each m gets an independent greedy pass in the common sample order.
    (Seeding the pass with the previous kept set would force monotone counts
    but caps the growth ratio near 1.5 per step: a packing at spacing 2g
    rarely leaves room to interleave a full second packing at spacing g, so
    the fitted rate would be biased well below the true one.)
    """
    counts: dict[int, int] = {}
    for m in sorted(m_values):
        kept = greedy_separated_set(ensemble, BowenParams(m, epsilon))
        counts[m] = len(kept)
    return counts


@dataclass
class EntropyReport:
    """Table of separated-set counts with per-epsilon growth rates."""

    system_name: str
    m_values: list[int]
    epsilons: list[float]
    sample_size: int
    admissible: int
    counts: dict[float, dict[int, int]] = field(default_factory=dict)
    slopes: dict[float, SlopeFit] = field(default_factory=dict)

    @property
    def discards(self) -> int:
        return self.sample_size - self.admissible

    def __post_init__(self):
        self._check_monotone()

    def _check_monotone(self) -> None:
        for eps, table in self.counts.items():
            ms = sorted(table)
            for a, b in zip(ms, ms[1:]):
                assert table[a] <= table[b], (
                    f"count dropped with orbit length: N({a})={table[a]} > N({b})={table[b]} at eps={eps}"
                )
        for m in self.m_values:
            by_eps = [(eps, self.counts[eps][m]) for eps in sorted(self.counts) if m in self.counts[eps]]
            for (e1, n1), (e2, n2) in zip(by_eps, by_eps[1:]):
                assert n2 <= n1, (
                    f"count grew with radius: N(eps={e2})={n2} > N(eps={e1})={n1} at m={m}"
                )

    def rows(self) -> list[tuple[int, float, int, int]]:
        out = []
        for eps in self.epsilons:
            for m in self.m_values:
                out.append((m, eps, self.counts[eps][m], self.discards))
        return out

    def csv_text(self) -> str:
        lines = ["m,epsilon,separated_count,discards"]
        for m, eps, count, discards in self.rows():
            lines.append(f"{m},{eps},{count},{discards}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "system": self.system_name,
            "sample_size": self.sample_size,
            "admissible": self.admissible,
            "discards": self.discards,
            "m_values": self.m_values,
            "epsilons": self.epsilons,
            "counts": {str(eps): {str(m): n for m, n in table.items()} for eps, table in self.counts.items()},
            "slopes": {str(eps): fit.to_json() for eps, fit in self.slopes.items()},
            "note": "sampled separated sets witness growth from below only",
        }


def entropy_report(
    system: OrbitSystem,
    points: Sequence,
    m_values: Sequence[int],
    epsilons: Sequence[float],
    threads: int = 1,
) -> EntropyReport:
    """Counts and growth rates over a grid of orbit lengths and radii.

    ``threads`` caps the workers used for the per-radius packing passes;
    results do not depend on the schedule.
    """
    m_values = sorted(set(int(m) for m in m_values))
    epsilons = sorted(set(float(e) for e in epsilons), reverse=True)
    if len(m_values) < 2:
        raise ValueError("need at least two orbit lengths for a growth rate")
    ensemble = build_orbits(system, points, max(m_values))
    counts: dict[float, dict[int, int]] = {}
    slopes: dict[float, SlopeFit] = {}
    admissible = int(ensemble.valid.sum())
    if threads > 1 and len(epsilons) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(lambda e: separated_counts(ensemble, m_values, e), epsilons))
        for eps, table in zip(epsilons, tables):
            counts[eps] = table
            slopes[eps] = fit_growth_rate(table, admissible, eps)
    else:
        for eps in epsilons:
            table = separated_counts(ensemble, m_values, eps)
            counts[eps] = table
            slopes[eps] = fit_growth_rate(table, admissible, eps)
    return EntropyReport(
        system_name=system.name,
        m_values=m_values,
        epsilons=epsilons,
        sample_size=len(points),
        admissible=admissible,
        counts=counts,
        slopes=slopes,
    )


def entropy_rate(
    system: OrbitSystem,
    points: Sequence,
    m_values: Sequence[int],
    epsilon: float,
) -> SlopeFit:
    """Growth-rate fit for a single radius (see :func:`fit_growth_rate`)."""
    if len(m_values) < 4:
        raise ValueError("m range should span at least 4 values")
    ensemble = build_orbits(system, points, max(m_values))
    table = separated_counts(ensemble, sorted(m_values), epsilon)
    return fit_growth_rate(table, int(ensemble.valid.sum()), epsilon)


# ---------------------------------------------------------------------------
# Lifting separated sets through a tower level


@dataclass
class LiftCheckReport:
    downstairs_count: int
    upstairs_count: int
    violations: list[tuple[int, int]]
    lift_failures: int
    orbit_failures: int

    @property
    def cardinality_preserved(self) -> bool:
        return (
            not self.violations
            and self.lift_failures == 0
            and self.orbit_failures == 0
            and self.upstairs_count == self.downstairs_count
        )

    def to_json(self) -> dict:
        return {
            "downstairs_count": self.downstairs_count,
            "upstairs_count": self.upstairs_count,
            "violations": [list(v) for v in self.violations],
            "lift_failures": self.lift_failures,
            "orbit_failures": self.orbit_failures,
            "cardinality_preserved": self.cardinality_preserved,
        }


def separated_lift_check(tower, base_points: Sequence, params: BowenParams) -> LiftCheckReport:
    """Lift a base separated set one level up and recheck separation there.

    The level-1 metric dominates the projected base metric and the level maps
    commute with the projection, so the lifted set must be separated at the
    same (m, eps) with the same cardinality; any violating pair is reported.
    """
    level0 = tower.levels[0]
    level1 = tower.levels[1]

    # Downstairs: orbits of length m, greedy separated subset.
    survivors = []
    orbits0 = []
    for p in base_points:
        orbit = [p]
        try:
            for _ in range(params.m - 1):
                orbit.append(level0.self_map(orbit[-1]))
        except OrbitUndefined:
            continue
        survivors.append(p)
        orbits0.append(orbit)
    kept: list[int] = []
    for i, orbit in enumerate(orbits0):
        ok = True
        for j in kept:
            d = max(level0.dist(a, b) for a, b in zip(orbit, orbits0[j]))
            if d < params.epsilon:
                ok = False
                break
        if ok:
            kept.append(i)
    downstairs = [survivors[i] for i in kept]

    # Upstairs: lift, iterate the level-1 map, recheck every pair.
    lifted = []
    lift_failures = 0
    for p in downstairs:
        try:
            lifted.append(tower.lift_point(p, depth=1).entries[1])
        except Exception:
            lift_failures += 1
            lifted.append(None)
    orbit_failures = 0
    orbits1 = []
    for q in lifted:
        if q is None:
            orbits1.append(None)
            continue
        orbit = [q]
        try:
            for _ in range(params.m - 1):
                orbit.append(level1.self_map(orbit[-1]))
            orbits1.append(orbit)
        except OrbitUndefined:
            orbit_failures += 1
            orbits1.append(None)
    violations = []
    good = [i for i, o in enumerate(orbits1) if o is not None]
    for ai in range(len(good)):
        for bi in range(ai + 1, len(good)):
            i, j = good[ai], good[bi]
            d = max(level1.dist(a, b) for a, b in zip(orbits1[i], orbits1[j]))
            if d < params.epsilon:
                violations.append((i, j))
    return LiftCheckReport(
        downstairs_count=len(downstairs),
        upstairs_count=len(good),
        violations=violations,
        lift_failures=lift_failures,
        orbit_failures=orbit_failures,
    )
