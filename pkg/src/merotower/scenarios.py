"""Ready-made objects: the quadratic example map, its resolved tower, and a
holomorphic toy tower, plus the end-to-end demo drivers."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .blowup import Atlas, FiberNotPointError, LiftedSelfMap, SurfPoint, find_indeterminacy_points
from .maps import OrbitUndefined, ProjPoint, RationalMap, fs_uniform_point
from .polynomials import parse_poly
from .tower import SurfaceMetric, Tower, TowerLevel, identity_tower

ZWT = ("z", "w", "t")


def guedj_map() -> RationalMap:
    """The plane map [z^2 : wt + t^2 : t^2] (quadratic, one indeterminacy point)."""
    return RationalMap([parse_poly(c, ZWT, homogeneous=True) for c in ("z^2", "w*t + t^2", "t^2")])


def squaring_map() -> RationalMap:
    """The holomorphic coordinate-squaring map [z^2 : w^2 : t^2]."""
    return RationalMap([parse_poly(c, ZWT, homogeneous=True) for c in ("z^2", "w^2", "t^2")])


def guedj_atlases() -> tuple[Atlas, Atlas]:
    """Atlases after the first and second blow-up resolving the example map."""
    once = Atlas.projective_plane().blow_up(
        ProjPoint([0, 1, 0]), var_names=(("z", "beta"), ("t", "alpha"))
    )
    lifted = once.lift_map(guedj_map())
    residual = find_indeterminacy_points(once, lifted)
    assert len(residual) == 1 and residual[0].chart_id == "z_beta"
    twice = once.blow_up(
        ("z_beta", (Fraction(0), Fraction(0))), var_names=(("z", "v"), ("beta", "u"))
    )
    return once, twice


@dataclass
class GuedjTower:
    """Depth-1 tower resolving the example map, with its surface geometry."""

    tower: Tower
    atlas_once: Atlas
    atlas: Atlas
    metric: SurfaceMetric
    lifted: dict
    induced: LiftedSelfMap
    map: RationalMap


def build_guedj_tower() -> GuedjTower:
    """Resolve the example map by two point blow-ups and wrap it as a tower.

    The resolved map is verified holomorphic on every chart before the tower
    is assembled; the level-1 metric dominates the projected base metric by
    construction.
    """
    f = guedj_map()
    once, twice = guedj_atlases()
    lifted = twice.lift_map(f)
    if not all(local.holomorphic for local in lifted.values()):
        bad = [cid for cid, local in lifted.items() if not local.holomorphic]
        raise AssertionError(f"resolved map is not holomorphic on charts {bad}")
    metric = SurfaceMetric(twice)
    center = ProjPoint([0, 1, 0])

    def s1(point: SurfPoint) -> ProjPoint:
        image = lifted[point.chart_id].evaluate(point.coords)
        if image is None:
            raise OrbitUndefined("resolved map degenerated numerically")
        return image

    def pi1(point: SurfPoint) -> ProjPoint:
        return twice.to_projective(point)

    def level1_self_map(point: SurfPoint) -> SurfPoint:
        base_image = f.evaluate(pi1(point))
        if base_image is None:
            raise OrbitUndefined("projected orbit hit the indeterminacy point")
        try:
            return twice.from_projective(base_image)
        except FiberNotPointError as exc:
            raise OrbitUndefined(str(exc)) from exc

    exceptional_charts = twice.blowup_charts()

    def sample_level1(rng: np.random.Generator) -> SurfPoint:
        while True:
            if rng.uniform() < 0.15:
                cid = exceptional_charts[int(rng.integers(len(exceptional_charts)))]
                second = complex(rng.uniform(-1.4, 1.4), rng.uniform(-1.4, 1.4))
                if abs(second) < 1e-6:
                    continue
                point = SurfPoint(cid, (0j, second))
                if twice.charts[cid].is_excluded(point.coords):
                    continue
                return point
            try:
                return twice.from_projective(fs_uniform_point(rng))
            except FiberNotPointError:
                continue

    def base_map(point: ProjPoint) -> ProjPoint:
        image = f.evaluate(point)
        if image is None:
            raise OrbitUndefined("orbit hit the indeterminacy point")
        return image

    levels = [
        TowerLevel(index=0, dist=ProjPoint.fs_distance, sample=fs_uniform_point, self_map=base_map),
        TowerLevel(
            index=1,
            dist=metric.dist,
            sample=sample_level1,
            self_map=level1_self_map,
            pi=pi1,
            s=s1,
            lift=twice.from_projective,
            space_tag="blown-up-P2",
            metric_tag="base+direction+cone",
        ),
    ]
    tower = Tower(levels, name="guedj-tower")
    induced = LiftedSelfMap(once, f)
    return GuedjTower(tower, once, twice, metric, lifted, induced, f)


def build_toy_tower(depth: int = 8) -> Tower:
    """Identity tower over the squaring map (all legs holomorphic)."""
    return identity_tower(squaring_map(), depth, name="toy-tower")


# ---------------------------------------------------------------------------
# Demo drivers


class DemoStageError(RuntimeError):
    """A demo aborted; the message names the failing stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"demo stage '{stage}' failed: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except DemoStageError:
        raise
    except Exception as exc:
        raise DemoStageError(name, exc) from exc


@dataclass
class GuedjDemoConfig:
    seed: int = 7
    samples: int = 2**14
    m_values: tuple = tuple(range(6, 13))
    epsilons: tuple = (0.01, 0.02, 0.05)
    degree_n: int = 6
    disjoint_n: int = 2
    trials: int = 5
    slope_band: tuple = (0.62, 0.76)
    threads: int = 1

    @classmethod
    def from_dict(cls, payload: dict) -> "GuedjDemoConfig":
        cfg = cls()
        for key, value in payload.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config field {key!r}")
            setattr(cfg, key, tuple(value) if isinstance(value, list) else value)
        return cfg


@dataclass
class ToyDemoConfig:
    seed: int = 7
    depth: int = 8
    samples: int = 4096
    m_values: tuple = tuple(range(2, 7))
    epsilon: float = 0.3
    degree_n: int = 6
    slope_tolerance: float = 0.1
    probe_epsilon: float = 0.1
    probe_samples: int = 400

    @classmethod
    def from_dict(cls, payload: dict) -> "ToyDemoConfig":
        cfg = cls()
        for key, value in payload.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config field {key!r}")
            setattr(cfg, key, tuple(value) if isinstance(value, list) else value)
        return cfg


def golden_formulas() -> list[str]:
    """The symbolic outputs of the resolution, in canonical string form.

    Everything is recomputed from scratch: the map, its indeterminacy, the
    lifts through one and two blow-downs, the residual indeterminacy on the
    exceptional curve, and the induced self-map formula on the slope chart.
    """
    f = guedj_map()
    once, twice = guedj_atlases()
    lines = []
    lines.append("map: [" + " : ".join(c.to_string(ZWT) for c in f.components) + "]")
    locus = f.indeterminacy_locus()
    lines.append("indeterminacy: " + ", ".join(repr(rec.point) for rec in locus))
    lifted_once = once.lift_map(f)
    for cid in ("z_beta", "t_alpha"):
        chart = once.charts[cid]
        comps = lifted_once[cid].component_strings(chart.var_names)
        lines.append(
            f"lift through first blow-down, chart {cid}{chart.var_names}: ["
            + " : ".join(comps)
            + "]"
        )
    residual = find_indeterminacy_points(once, lifted_once)
    for sp in residual:
        a, b = sp.coords
        lines.append(
            f"residual indeterminacy after first blow-up: chart {sp.chart_id} at ({a.real:g}, {b.real:g})"
        )
    lifted_twice = twice.lift_map(f)
    for cid in ("z_v", "beta_u"):
        chart = twice.charts[cid]
        comps = lifted_twice[cid].component_strings(chart.var_names)
        lines.append(
            f"lift through both blow-downs, chart {cid}{chart.var_names}: ["
            + " : ".join(comps)
            + "]"
        )
    induced = LiftedSelfMap(once, f)
    ta, tb = induced.formula("t_alpha", "t_alpha")
    names = once.charts["t_alpha"].var_names
    lines.append(
        f"induced self-map on chart t_alpha{names}: ({ta.to_string(names)}, {tb.to_string(names)})"
    )
    return lines


def _degree_rows(f: RationalMap, n_max: int) -> list[tuple[int, int, float]]:
    seq = f.degree_sequence(n_max)
    rows = []
    prev = 1
    for n, deg in enumerate(seq, start=1):
        rows.append((n, deg, deg / prev))
        prev = deg
    return rows


def run_guedj_demo(out_dir, config: GuedjDemoConfig | None = None) -> dict:
    """End-to-end reproduction around the example map; writes a report bundle.

    Emits formulas.txt (symbolic goldens), degrees.csv, entropy.csv,
    verdicts.json and summary.json, plus figures/ renderings.  The summary is
    byte-deterministic for a fixed config.
    """
    from . import reporting
    from .entropy import entropy_report
    from .systems import ExceptionalCircleSystem

    cfg = config or GuedjDemoConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "figures").mkdir(exist_ok=True)

    with _stage("symbolic-goldens"):
        formulas = golden_formulas()
        reporting.write_text(out / "formulas.txt", "\n".join(formulas) + "\n")

    f = guedj_map()
    with _stage("degree-table"):
        rows = _degree_rows(f, cfg.degree_n)
        d1 = f.d1_estimate(cfg.degree_n)
        topo = f.topological_degree(trials=cfg.trials, seed=cfg.seed)
        reporting.write_csv(
            out / "degrees.csv",
            ["n", "degree", "ratio"],
            rows,
            comments=[f"d1_estimate={d1:.12g}", f"topological_degree={topo}"],
        )
        reporting.degrees_figure(out / "figures" / "degrees.png", rows, "degree growth of the iterates")

    with _stage("exceptional-circle-entropy"):
        bundle = build_guedj_tower()
        system = ExceptionalCircleSystem(bundle.induced)
        points = system.sample_points(cfg.samples, cfg.seed)
        report = entropy_report(system, points, cfg.m_values, cfg.epsilons, threads=cfg.threads)
        reporting.write_csv(
            out / "entropy.csv",
            ["m", "epsilon", "separated_count", "discards"],
            report.rows(),
        )
        reporting.entropy_figure(out / "figures" / "entropy.png", [report], "separated-set growth on the invariant circle")

    with _stage("disjointness"):
        disjoint = f.disjointness_check(cfg.disjoint_n)

    with _stage("verdicts"):
        lo, hi = cfg.slope_band
        slope_flags = {
            f"{eps:g}": (fit.slope is not None and lo <= fit.slope <= hi)
            for eps, fit in report.slopes.items()
        }
        upper = float(np.log(max(d1, float(topo))))
        verdicts = {
            "chain_preimage_disjointness": {
                "verdict": disjoint.verdict,
                "intersecting_pairs": [list(p) for p in disjoint.intersecting_pairs],
                "n_max": cfg.disjoint_n,
            },
            "variational_hypothesis_met": disjoint.verdict == "HOLDS",
            "degrees": {
                "sequence": [r[1] for r in rows],
                "d1_estimate": d1,
                "topological_degree": topo,
                "log_degree_upper_bound": upper,
            },
            "entropy": {
                "slopes": {f"{eps:g}": fit.to_json() for eps, fit in report.slopes.items()},
                "band": [lo, hi],
                "slope_in_band": slope_flags,
                "band_hits": sum(slope_flags.values()),
            },
            "lower_and_upper_bounds_consistent": all(
                fit.slope is None or fit.slope <= upper + 0.1
                for fit in report.slopes.values()
            ),
        }
        reporting.write_json(out / "verdicts.json", verdicts)

    summary = {
        "demo": "guedj",
        "config": {
            "seed": cfg.seed,
            "samples": cfg.samples,
            "m_values": list(cfg.m_values),
            "epsilons": list(cfg.epsilons),
            "degree_n": cfg.degree_n,
            "disjoint_n": cfg.disjoint_n,
            "trials": cfg.trials,
        },
        "formulas": formulas,
        "degrees": {"rows": [list(r) for r in rows], "d1_estimate": d1, "topological_degree": topo},
        "entropy": report.to_json(),
        "verdicts": verdicts,
    }
    reporting.write_json(out / "summary.json", summary)
    return summary


def run_toy_tower_demo(out_dir, config: ToyDemoConfig | None = None) -> dict:
    """Identity-tower consistency demo; writes the same bundle layout.

    Compares the shift's separated-set growth on lifted samples against the
    base map on the matching samples, runs the projection-commutation probe,
    and checks the closed-form value of the truncated-limit metric on lifts.
    """
    from . import reporting
    from .entropy import entropy_rate
    from .maps import fs_uniform_point
    from .systems import PlaneMapSystem, TorusDoublingSystem, TowerShiftSystem
    from .tower import commutation_check, continuity_probe

    cfg = config or ToyDemoConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "figures").mkdir(exist_ok=True)

    f = squaring_map()
    with _stage("tower-build"):
        tower = build_toy_tower(cfg.depth)

    with _stage("commutation-probe"):
        commutation = commutation_check(tower, samples=144, seed=cfg.seed)

    with _stage("metric-closed-form"):
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(64):
            a, b = fs_uniform_point(rng), fs_uniform_point(rng)
            lifted_delta = tower.delta(tower.lift_point(a), tower.lift_point(b))
            closed = a.fs_distance(b) * (2.0 - 2.0 ** (-tower.depth))
            worst = max(worst, abs(lifted_delta - closed))
        closed_form_error = worst

    with _stage("matched-entropy"):
        torus = TorusDoublingSystem()
        angles = torus.sample_points(cfg.samples, cfg.seed)
        base_points = [torus.as_projective(p) for p in angles]
        base_system = PlaneMapSystem(f, name="squaring-base")
        base_fit = entropy_rate(base_system, base_points, cfg.m_values, cfg.epsilon)
        shift_system = TowerShiftSystem(tower)
        lifted_points = shift_system.lift_samples(base_points)
        eps_shift = cfg.epsilon * shift_system.metric_scale
        shift_fit = entropy_rate(shift_system, lifted_points, cfg.m_values, eps_shift)

    with _stage("continuity-probe"):
        probe = continuity_probe(tower, cfg.probe_epsilon, samples=cfg.probe_samples, seed=cfg.seed)

    with _stage("verdicts"):
        diff = None
        if base_fit.slope is not None and shift_fit.slope is not None:
            diff = abs(base_fit.slope - shift_fit.slope)
        verdicts = {
            "tower_entropy_matches_base": diff is not None and diff < cfg.slope_tolerance,
            "base_slope": base_fit.slope,
            "shift_slope": shift_fit.slope,
            "slope_difference": diff,
            "slope_tolerance": cfg.slope_tolerance,
            "commutation_max_discrepancy": commutation.max_discrepancy,
            "delta_closed_form_max_error": closed_form_error,
            "continuity_modulus": probe.to_json(),
        }
        reporting.write_json(out / "verdicts.json", verdicts)

    with _stage("tables"):
        rows = _degree_rows(f, cfg.degree_n)
        reporting.write_csv(
            out / "degrees.csv",
            ["n", "degree", "ratio"],
            rows,
            comments=[f"d1_estimate={f.d1_estimate(cfg.degree_n):.12g}"],
        )
        entropy_rows = []
        for m in sorted(base_fit.counts):
            entropy_rows.append(("base", m, cfg.epsilon, base_fit.counts[m]))
        for m in sorted(shift_fit.counts):
            entropy_rows.append(("shift", m, eps_shift, shift_fit.counts[m]))
        reporting.write_csv(
            out / "entropy.csv",
            ["system", "m", "epsilon", "separated_count"],
            entropy_rows,
        )
        formulas = [
            "map: [" + " : ".join(c.to_string(ZWT) for c in f.components) + "]",
            f"tower: identity projections, depth {tower.depth}",
            "level metrics: (n+1) stacked copies of the base distance",
            "lift of x: the constant compatible sequence (x, x, ..., x)",
        ]
        reporting.write_text(out / "formulas.txt", "\n".join(formulas) + "\n")
        reporting.degrees_figure(out / "figures" / "degrees.png", rows, "degree growth (holomorphic squaring)")
        reporting.matched_rates_figure(
            out / "figures" / "entropy.png",
            [(base_fit, f"base eps={cfg.epsilon:g}"), (shift_fit, f"shift eps={eps_shift:.3g}")],
            "base map vs truncated shift on matched samples",
        )

    summary = {
        "demo": "toy-tower",
        "config": {
            "seed": cfg.seed,
            "depth": cfg.depth,
            "samples": cfg.samples,
            "m_values": list(cfg.m_values),
            "epsilon": cfg.epsilon,
        },
        "tower": tower.describe(),
        "commutation": commutation.to_json(),
        "entropy": {
            "base": base_fit.to_json(),
            "shift": shift_fit.to_json(),
            "base_counts": {str(m): n for m, n in base_fit.counts.items()},
            "shift_counts": {str(m): n for m, n in shift_fit.counts.items()},
            "shift_epsilon": eps_shift,
        },
        "verdicts": verdicts,
    }
    reporting.write_json(out / "summary.json", summary)
    return summary
