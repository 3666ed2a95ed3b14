"""Concrete dynamical systems wired for the entropy estimator.

Each system fixes a point type, a step, a metric with a vector-friendly
embedding, and a seeded sampler.  Invariant circles and tori get stratified
(jittered-grid) samples; generic plane maps get uniform chart boxes.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .blowup import LiftedSelfMap, NoLiftError, SurfPoint
from .entropy import OrbitSystem
from .maps import OrbitUndefined, ProjPoint, RationalMap
from .tower import Tower, TruncatedPoint


def _flat_projector_batch(vectors: np.ndarray) -> np.ndarray:
    """Row-wise rank-one projectors of complex rows, flattened to reals."""
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    v = vectors / norms
    p = np.einsum("...i,...j->...ij", v, v.conj())
    n = vectors.shape[-1]
    flat = p.reshape(p.shape[:-2] + (n * n,))
    return np.concatenate([flat.real, flat.imag], axis=-1)


def circle_grid(count: int, seed: int) -> np.ndarray:
    """Jittered uniform grid of angles on [0, 2pi).

    The jitter keeps greedy packing counts from snapping to divisors of the
    grid spacing, which would bias the growth-rate fit at large m.
    """
    rng = np.random.default_rng(seed)
    base = (np.arange(count) + rng.uniform(0.0, 1.0, count)) / count
    return 2.0 * np.pi * base


def torus_grid(count: int, seed: int) -> np.ndarray:
    """Jittered grid on the 2-torus, shape (side*side, 2); side = floor(sqrt)."""
    side = int(math.isqrt(count))
    rng = np.random.default_rng(seed)
    us = (np.arange(side)[:, None] + rng.uniform(0, 1, (side, side))) / side
    vs = (np.arange(side)[None, :] + rng.uniform(0, 1, (side, side))) / side
    return 2.0 * np.pi * np.stack([us.ravel(), vs.ravel()], axis=-1)


class CircleDoublingSystem(OrbitSystem):
    """Angle doubling on the unit circle.

    The metric is the rotation angle normalized by the full turn,
    d(a, b) = wrap(|arg a - arg b|) / 2pi, so the circle has diameter 1/2.
    """

    name = "circle-doubling"
    key_dims = 2
    key_lipschitz = 2.0 * math.pi

    def step(self, point: complex) -> complex:
        return point * point

    def embed(self, point: complex) -> np.ndarray:
        theta = (np.angle(point) / (2.0 * np.pi)) % 1.0
        return np.array([point.real, point.imag, theta])

    def dist_embedded(self, a, b, step_index: int = 0):
        d = np.abs(a[..., 2] - b[..., 2])
        return np.minimum(d, 1.0 - d)

    def sample_points(self, count: int, seed: int) -> list[complex]:
        return [complex(np.cos(t), np.sin(t)) for t in circle_grid(count, seed)]

    def orbit_embeddings(self, points: Sequence[complex], m: int):
        alphas = np.array(points, dtype=complex)
        out = np.empty((len(points), m, 3))
        for l in range(m):
            out[:, l, 0] = alphas.real
            out[:, l, 1] = alphas.imag
            out[:, l, 2] = (np.angle(alphas) / (2.0 * np.pi)) % 1.0
            alphas = alphas * alphas
        return out, np.ones(len(points), dtype=bool)


class ExceptionalCircleSystem(OrbitSystem):
    """The induced self-map restricted to the invariant exceptional circle.

    Points are surface points (0, alpha) with |alpha| = 1 in the slope chart
    of the first blow-up; the step is the induced map's evaluator there.  The
    metric is the rotation-angle distance normalized to [0, 1/2], under which
    the circle has diameter 1/2.
    """

    name = "guedj-circle"
    key_dims = 2
    key_lipschitz = 2.0 * math.pi
    chart = "t_alpha"

    def __init__(self, induced: LiftedSelfMap):
        self.induced = induced
        ta, tb = induced.formula(self.chart, self.chart)
        from .polynomials import compile_numeric

        self._num = (
            compile_numeric(ta.num),
            compile_numeric(ta.den),
            compile_numeric(tb.num),
            compile_numeric(tb.den),
        )

    def step(self, point: SurfPoint) -> SurfPoint:
        try:
            image = self.induced.step(point)
        except NoLiftError as exc:
            raise OrbitUndefined(str(exc)) from exc
        if image.chart_id != self.chart:
            raise OrbitUndefined("orbit left the exceptional chart")
        return image

    def embed(self, point: SurfPoint) -> np.ndarray:
        alpha = point.coords[1]
        theta = (np.angle(alpha) / (2.0 * np.pi)) % 1.0
        return np.array([alpha.real, alpha.imag, theta])

    def dist_embedded(self, a, b, step_index: int = 0):
        d = np.abs(a[..., 2] - b[..., 2])
        return np.minimum(d, 1.0 - d)

    def sample_points(self, count: int, seed: int) -> list[SurfPoint]:
        return [
            SurfPoint.of(self.chart, 0.0, complex(np.cos(t), np.sin(t)))
            for t in circle_grid(count, seed)
        ]

    def orbit_embeddings(self, points: Sequence[SurfPoint], m: int):
        ts = np.array([p.coords[0] for p in points], dtype=complex)
        alphas = np.array([p.coords[1] for p in points], dtype=complex)
        out = np.empty((len(points), m, 3))
        na, da, nb, db = self._num
        for l in range(m):
            if np.max(np.abs(ts)) > 1e-9:
                raise OrbitUndefined("orbit drifted off the exceptional divisor", l)
            out[:, l, 0] = alphas.real
            out[:, l, 1] = alphas.imag
            out[:, l, 2] = (np.angle(alphas) / (2.0 * np.pi)) % 1.0
            if l + 1 < m:
                coords = (ts, alphas)
                ts = na(coords) / da(coords)
                alphas = nb(coords) / db(coords)
        return out, np.ones(len(points), dtype=bool)


class TorusDoublingSystem(OrbitSystem):
    """Coordinate squaring restricted to the unit torus |z|=|w|=|t|, with the
    ambient Fubini-Study metric.  Points are angle pairs (theta1, theta2)."""

    name = "torus-squaring"
    key_dims = 3
    key_lipschitz = math.sqrt(2.0)

    def step(self, point: tuple[float, float]) -> tuple[float, float]:
        return ((2.0 * point[0]) % (2.0 * np.pi), (2.0 * point[1]) % (2.0 * np.pi))

    def _vectors(self, angles: np.ndarray) -> np.ndarray:
        ones = np.ones(angles.shape[:-1] + (1,), dtype=complex)
        return np.concatenate([np.exp(1j * angles), ones], axis=-1)

    def embed(self, point) -> np.ndarray:
        return _flat_projector_batch(self._vectors(np.array(point, dtype=float)))

    def dist_embedded(self, a, b, step_index: int = 0):
        return np.linalg.norm(a - b, axis=-1) / np.sqrt(2.0)

    def sample_points(self, count: int, seed: int) -> list[tuple[float, float]]:
        return [tuple(row) for row in torus_grid(count, seed)]

    def orbit_embeddings(self, points, m: int):
        angles = np.array(points, dtype=float)
        out = np.empty((len(points), m, 18))
        for l in range(m):
            out[:, l, :] = _flat_projector_batch(self._vectors(angles))
            angles = (2.0 * angles) % (2.0 * np.pi)
        return out, np.ones(len(points), dtype=bool)

    def as_projective(self, point) -> ProjPoint:
        return ProjPoint([np.exp(1j * point[0]), np.exp(1j * point[1]), 1.0])


def chart_box_points(count: int, seed: int) -> list[ProjPoint]:
    """Uniform points in the unit coordinate boxes of the standard charts."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        chart = int(rng.integers(0, 3))
        coords = rng.uniform(-1.0, 1.0, 4)
        values = [0j, 0j, 0j]
        values[chart] = 1.0 + 0j
        slots = [i for i in range(3) if i != chart]
        values[slots[0]] = complex(coords[0], coords[1])
        values[slots[1]] = complex(coords[2], coords[3])
        out.append(ProjPoint(values))
    return out


class PlaneMapSystem(OrbitSystem):
    """A rational self-map of the plane under the Fubini-Study metric.

    Orbit points closer than ``exclusion`` to the indeterminacy locus are
    discarded along with their orbit (the admissible region is approximated
    by survival of the finite orbit).
    """

    key_dims = 3
    key_lipschitz = math.sqrt(2.0)

    def __init__(self, f: RationalMap, name: str | None = None, exclusion: float = 1e-9):
        self.f = f
        self.name = name or "plane-map"
        self.exclusion = exclusion
        self._locus = f.indeterminacy_locus() if f.dim_k == 2 else None

    def step(self, point: ProjPoint) -> ProjPoint:
        return self.f.evaluate_or_raise(point)

    def admissible(self, point: ProjPoint) -> bool:
        if self._locus is None or len(self._locus) == 0:
            return True
        return all(point.fs_distance(rec.point) > self.exclusion for rec in self._locus)

    def embed(self, point: ProjPoint) -> np.ndarray:
        return _flat_projector_batch(point.unit_vector()[None, :])[0]

    def dist_embedded(self, a, b, step_index: int = 0):
        return np.linalg.norm(a - b, axis=-1) / np.sqrt(2.0)

    def sample_points(self, count: int, seed: int) -> list[ProjPoint]:
        return chart_box_points(count, seed)


class TowerShiftSystem(OrbitSystem):
    """The truncated shift acting on lifted points of a tower over the plane.

    Level entries must be projective points (identity-style towers).  A
    depth-N lift supports N shift steps, so orbits of length m consume m-1
    levels; the metric at orbit step l is the truncated-limit distance at the
    remaining depth.
    """

    key_dims = 3

    def __init__(self, tower: Tower, name: str | None = None):
        self.tower = tower
        self.name = name or f"shift-{tower.name}"
        self.levels = tower.depth + 1
        self.key_lipschitz = math.sqrt(2.0) * tower.levels[0].diam
        # Embeddings store raw projective data per level; each level's metric
        # must be a scalar multiple of the base distance for the vectorized
        # path to reproduce the tower metric.  Measure the scale on a probe
        # pair once.
        probe_a, probe_b = ProjPoint([1, 2, 3]), ProjPoint([3, 1, 2])
        fs = probe_a.fs_distance(probe_b)
        scales = []
        for level in tower.levels:
            ratio = level.dist(probe_a, probe_b) / fs
            scales.append(ratio)
        self._weights = np.array(
            [scales[n] / (2.0**n * tower.levels[n].diam) for n in range(self.levels)]
        )

    def step(self, point: TruncatedPoint) -> TruncatedPoint:
        if point.depth < 1:
            raise OrbitUndefined("truncation exhausted: no levels left to shift")
        return self.tower.sigma(point)

    def lift_samples(self, base_points: Sequence[ProjPoint]) -> list[TruncatedPoint]:
        return [self.tower.lift_point(p) for p in base_points]

    def embed(self, point: TruncatedPoint) -> np.ndarray:
        out = np.zeros(self.levels * 18)
        for n, entry in enumerate(point.entries):
            out[18 * n : 18 * (n + 1)] = _flat_projector_batch(entry.unit_vector()[None, :])[0]
        return out

    def dist_embedded(self, a, b, step_index: int = 0):
        depth_now = self.tower.depth - step_index
        if depth_now < 0:
            raise ValueError("orbit longer than the truncation depth")
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        total = np.zeros(shape)
        for n in range(depth_now + 1):
            sl = slice(18 * n, 18 * (n + 1))
            total += self._weights[n] * (
                np.linalg.norm(a[..., sl] - b[..., sl], axis=-1) / np.sqrt(2.0)
            )
        return total

    def dist(self, x: TruncatedPoint, y: TruncatedPoint) -> float:
        return self.tower.delta(x, y)

    def orbit_embeddings(self, points: Sequence[TruncatedPoint], m: int):
        n = len(points)
        out = np.zeros((n, m, self.levels * 18))
        valid = np.ones(n, dtype=bool)
        current: list[TruncatedPoint | None] = list(points)
        for l in range(m):
            live = [i for i in range(n) if valid[i] and current[i] is not None]
            if not live:
                break
            depth_now = current[live[0]].depth
            coords = np.array(
                [[list(entry.coords) for entry in current[i].entries] for i in live],
                dtype=complex,
            )  # (len(live), depth_now + 1, 3)
            flat = _flat_projector_batch(coords).reshape(len(live), -1)
            out[np.array(live), l, : 18 * (depth_now + 1)] = flat
            if l + 1 < m:
                for i in live:
                    try:
                        current[i] = self.step(current[i])
                    except OrbitUndefined:
                        valid[i] = False
                        current[i] = None
        return out, valid

    @property
    def metric_scale(self) -> float:
        """Sum of the level weights: the factor by which the truncated-limit
        metric stretches the base distance on identity-style lifts."""
        return float(np.sum(self._weights))

    def sample_points(self, count: int, seed: int) -> list[TruncatedPoint]:
        return self.lift_samples(chart_box_points(count, seed))
