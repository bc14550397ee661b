"""Experiment families: toy deviation runs, Toda energy sweeps and sections, celestial orbits.

Every experiment is a pure function of its :class:`ExperimentConfig`
(including the seed) and returns an :class:`ExperimentRecord` whose tables
are written to disk by :func:`localchaos.report.emit_report`.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.optimize import brentq

from .integrate import DeviationState, propagate_coupled, propagate_deviation
from .models import GM, DomainError, ModelKind, ModelSpec, PhaseState, ToyParams, evaluate_potential
from .sections import ApsisKind, apsis_events, section_crossings
from .stability import (
    DEFAULT_TOL,
    Indicator,
    StabilityVerdict,
    UnstableInterval,
    detect_unstable_intervals,
    symmetric_eigenvalues,
    uncertainty_verdict,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentRecord",
    "RunStatus",
    "Table",
    "periapsis_state",
    "run_experiment",
    "section_start",
    "toda_accessible_range",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class ExperimentKind(str, enum.Enum):
    TOY = "toy"
    TODA_SWEEP = "toda-sweep"
    TODA_POINCARE = "toda-poincare"
    CELESTIAL = "celestial"


_DEFAULT_STEP = {
    ExperimentKind.TOY: 1e-3,
    ExperimentKind.TODA_SWEEP: 1e-3,
    ExperimentKind.TODA_POINCARE: 1e-3,
    ExperimentKind.CELESTIAL: 5e-5,
}
_DEFAULT_T_FINAL = {
    ExperimentKind.TOY: 12.0,
    ExperimentKind.TODA_SWEEP: 200.0,
    ExperimentKind.TODA_POINCARE: 500.0,
}


@dataclass
class ExperimentConfig:
    """Configuration for one experiment.

    Unused fields are ignored by the other experiment kinds. ``step`` and
    ``t_final`` default per kind; the celestial horizon defaults to
    ``periods`` orbital periods.
    """

    kind: ExperimentKind
    seed: int = 0
    step: float | None = None
    t_final: float | None = None
    indicator: Indicator = Indicator.GEM
    tol: float = DEFAULT_TOL
    # toy
    delta_t: float = 5.0
    rho: float = 1.0
    theta: float = 0.0
    lambda_ref: float | None = None
    # toda
    energies: tuple[float, ...] = (0.18, 0.19, 0.20, 0.21, 0.22, 0.23, 0.24)
    ensemble: int = 16
    energy: float = 0.215
    # celestial
    model: str = "kepler"
    a: float = 1.0
    ecc: float = 0.9
    periods: float = 3.0
    m_e: float = 1.0
    m_j: float = 9.547919e-4
    r_j: float = 5.2026
    omega_j: float | None = None
    initial: tuple[float, float, float, float] | None = None
    series_stride: int = 10
    output_dir: str | None = None

    def __post_init__(self):
        try:
            self.kind = ExperimentKind(self.kind)
            self.indicator = Indicator(self.indicator)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        if self.indicator is Indicator.TOY:
            raise ConfigError("indicator must be gem or lyapunov")
        self.energies = tuple(float(e) for e in self.energies)
        if self.initial is not None:
            self.initial = tuple(float(v) for v in self.initial)
        if self.step is None:
            self.step = _DEFAULT_STEP[self.kind]
        if self.t_final is None:
            self.t_final = _DEFAULT_T_FINAL.get(self.kind)
            if self.t_final is None:
                self.t_final = self.periods * self.a**1.5 if self.a > 0 else 0.0
        self.validate()

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        need(self.step > 0 and math.isfinite(self.step), "step must be positive")
        need(self.t_final > 0 and math.isfinite(self.t_final), "t_final must be positive")
        need(self.tol >= 0, "tol must be non-negative")
        need(self.series_stride >= 1, "series_stride must be >= 1")
        if self.kind is ExperimentKind.TOY:
            need(self.delta_t > 0 and self.rho > 0, "delta_t and rho must be positive")
        elif self.kind is ExperimentKind.TODA_SWEEP:
            need(len(self.energies) > 0, "energy grid must be non-empty")
            need(all(e > 0 for e in self.energies), "Toda energies must be positive")
            need(self.ensemble >= 1, "ensemble must be >= 1")
        elif self.kind is ExperimentKind.TODA_POINCARE:
            need(self.energy > 0, "Toda energy must be positive")
            need(self.ensemble >= 1, "ensemble must be >= 1")
        else:
            need(self.model in ("kepler", "threebody"), "model must be kepler or threebody")
            need(self.m_e > 0 and self.m_j >= 0, "masses must be positive")
            if self.initial is None:
                need(self.a > 0 and 0 <= self.ecc < 1, "need a > 0 and 0 <= ecc < 1")
            else:
                need(len(self.initial) == 4, "initial must be (x, y, px, py)")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError(str(err)) from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["indicator"] = self.indicator.value
        out["energies"] = list(self.energies)
        if self.initial is not None:
            out["initial"] = list(self.initial)
        return out


@dataclass
class Table:
    """A named table: column names and row tuples of floats, ints or strings."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple]

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    @classmethod
    def from_columns(cls, name, **cols):
        arrays = [np.asarray(v) for v in cols.values()]
        rows = list(zip(*(a.tolist() for a in arrays)))
        return cls(name, tuple(cols), rows)


@dataclass
class RunStatus:
    name: str
    ok: bool
    reason: str = ""


@dataclass
class ExperimentRecord:
    config: ExperimentConfig
    tables: dict[str, Table]
    verdicts: dict[str, StabilityVerdict]
    runs: list[RunStatus]
    summary: dict
    wall_time: float = 0.0
    files: list[str] = field(default_factory=list)


INTERVAL_COLUMNS = ("t_start", "t_end", "delta_t", "lambda_max", "product", "mu_product")


def _interval_rows(intervals: list[UnstableInterval], prefix=()):
    return [(*prefix, iv.t_start, iv.t_end, iv.delta_t, iv.lambda_max, iv.product, iv.mu_product) for iv in intervals]


def _verdict_summary(v: StabilityVerdict) -> dict:
    return {
        "n_intervals": len(v.intervals),
        "max_product": v.max_product,
        "cumulative_product": v.cumulative_product,
        "max_mu_product": v.max_mu_product,
        "chaos_possible": v.chaos_possible,
    }


# -- toy ---------------------------------------------------------------------


def _run_toy(cfg: ExperimentConfig) -> ExperimentRecord:
    params = ToyParams(cfg.delta_t, cfg.rho, cfg.theta)
    lam_ref = cfg.rho if cfg.lambda_ref is None else cfg.lambda_ref
    dev = propagate_deviation(params, DeviationState((1.0, 0.0), (0.0, 0.0)), cfg.step, cfg.t_final, lambda_ref=lam_ref)
    t = dev.t
    a = -t / params.delta_t
    lo, hi = symmetric_eigenvalues(a + params.rho * math.sin(params.theta), params.rho * math.cos(params.theta),
                                   a - params.rho * math.sin(params.theta))
    intervals = detect_unstable_intervals(t, hi, tol=cfg.tol)
    verdict = uncertainty_verdict(intervals)
    tables = {
        "toy": Table.from_columns(
            "toy", t=t, xi1=dev.xi[:, 0], xi2=dev.xi[:, 1], eta1=dev.eta[:, 0], eta2=dev.eta[:, 1],
            envelope=dev.envelope,
        ),
        "toy_eigen": Table.from_columns("toy_eigen", t=t, lambda_minus=lo, lambda_plus=hi),
        "intervals": Table("intervals", INTERVAL_COLUMNS, _interval_rows(intervals)),
    }
    norm = dev.norm
    summary = {
        "max_abs_xi1": float(np.abs(dev.xi[:, 0]).max()),
        "t_max_abs_xi1": float(t[np.abs(dev.xi[:, 0]).argmax()]),
        "max_norm_after_start": float(norm[1:].max()),
        "verdict": _verdict_summary(verdict),
    }
    return ExperimentRecord(cfg, tables, {"toy": verdict}, [RunStatus("toy", True)], summary)


# -- Toda --------------------------------------------------------------------


def toda_accessible_range(energy: float) -> tuple[float, float]:
    """Interval of y on the line x = 0 where V(0, y) <= energy."""
    model = ModelSpec.toda()

    def f(y):
        return evaluate_potential(model, (0.0, y), 0.0)[0] - energy

    # V(0, y) = y^2/2 - y^3/3 + y^4/2 is increasing in |y| on each side of 0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2
    lo = -1.0
    while f(lo) < 0:
        lo *= 2
    return brentq(f, lo, 0.0, xtol=1e-15), brentq(f, 0.0, hi, xtol=1e-15)


def section_start(energy: float, y: float) -> PhaseState:
    """Initial state on x = 0, p_y = 0 at height ``y`` with p_x > 0 fixed by the energy."""
    v = evaluate_potential(ModelSpec.toda(), (0.0, y), 0.0)[0]
    if not energy > v:
        raise ValueError(f"y={y} is not inside the accessible region at E={energy}")
    return PhaseState((0.0, y), (math.sqrt(2.0 * (energy - v)), 0.0), 0.0)


def _ensemble_heights(energy: float, n: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = toda_accessible_range(energy)
    # stay off the zero-velocity curve so that p_x > 0 strictly
    shrink = 1e-6 * (hi - lo)
    return rng.uniform(lo + shrink, hi - shrink, size=n)


def _toda_member(energy, y0, cfg):
    start = section_start(energy, y0)
    run = propagate_coupled(ModelSpec.toda(), start, DeviationState(), cfg.indicator, cfg.step, cfg.t_final)
    return start, run


def _run_toda_sweep(cfg: ExperimentConfig) -> ExperimentRecord:
    children = np.random.SeedSequence(cfg.seed).spawn(len(cfg.energies))
    sweep_rows, member_rows, runs = [], [], []
    verdicts = {}
    for energy, child in zip(cfg.energies, children):
        rng = np.random.default_rng(child)
        heights = _ensemble_heights(energy, cfg.ensemble, rng)
        best, best_cum, n_iv, n_ok = 0.0, 0.0, 0, 0
        all_intervals = []
        for j, y0 in enumerate(heights):
            name = f"E={energy:g}/member={j}"
            try:
                start, run = _toda_member(energy, y0, cfg)
            except (DomainError, ValueError) as err:
                runs.append(RunStatus(name, False, str(err)))
                member_rows.append((energy, j, y0, math.nan, math.nan, math.nan, 0, math.nan, 0))
                continue
            v = uncertainty_verdict(run.eigen.intervals(cfg.tol))
            all_intervals.extend(v.intervals)
            n_ok += 1
            n_iv += len(v.intervals)
            best = max(best, v.max_product)
            best_cum = max(best_cum, v.cumulative_product)
            drift = run.trajectory.max_relative_drift()
            member_rows.append((energy, j, y0, float(start.p[0]), v.max_product, v.cumulative_product,
                                len(v.intervals), drift, 1))
            runs.append(RunStatus(name, True))
        sweep_rows.append((energy, best, best_cum, n_iv, n_ok))
        verdicts[f"E={energy:g}"] = uncertainty_verdict(all_intervals)
    tables = {
        "toda_sweep": Table(
            "toda_sweep", ("energy", "max_product", "cumulative_product", "n_intervals", "n_ensemble_valid"),
            sweep_rows,
        ),
        "toda_ensemble": Table(
            "toda_ensemble",
            ("energy", "member", "y0", "px0", "max_product", "cumulative_product", "n_intervals",
             "energy_drift", "ok"),
            member_rows,
        ),
    }
    summary = {
        "energies": list(cfg.energies),
        "max_product": [r[1] for r in sweep_rows],
        "max_energy_drift": float(np.nanmax([r[7] for r in member_rows])) if member_rows else math.nan,
    }
    return ExperimentRecord(cfg, tables, verdicts, runs, summary)


def _run_toda_poincare(cfg: ExperimentConfig) -> ExperimentRecord:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    heights = _ensemble_heights(cfg.energy, cfg.ensemble, rng)
    section_rows, interval_rows, orbit_rows, runs, intervals = [], [], [], [], []
    for j, y0 in enumerate(heights):
        try:
            start, run = _toda_member(cfg.energy, y0, cfg)
        except (DomainError, ValueError) as err:
            runs.append(RunStatus(f"orbit={j}", False, str(err)))
            continue
        points = section_crossings(run.trajectory)
        section_rows.extend((j, p.y, p.p_y, p.t_cross) for p in points)
        ivs = run.eigen.intervals(cfg.tol)
        intervals.extend(ivs)
        interval_rows.extend(_interval_rows(ivs, (j,)))
        v = uncertainty_verdict(ivs)
        orbit_rows.append((j, y0, float(start.p[0]), len(points), v.max_product, v.cumulative_product,
                           len(ivs), run.trajectory.max_relative_drift()))
        runs.append(RunStatus(f"orbit={j}", True))
    verdict = uncertainty_verdict(intervals)
    tables = {
        "section": Table("section", ("orbit", "y", "p_y", "t_cross"), section_rows),
        "intervals": Table("intervals", ("orbit", *INTERVAL_COLUMNS), interval_rows),
        "orbits": Table(
            "orbits",
            ("orbit", "y0", "px0", "n_points", "max_product", "cumulative_product", "n_intervals", "energy_drift"),
            orbit_rows,
        ),
    }
    summary = {"energy": cfg.energy, "n_points": len(section_rows), "verdict": _verdict_summary(verdict)}
    return ExperimentRecord(cfg, tables, {"section": verdict}, runs, summary)


# -- celestial ---------------------------------------------------------------


def periapsis_state(a: float, ecc: float, mass: float = 1.0) -> PhaseState:
    """State at perihelion on the +x axis, counter-clockwise, from vis-viva with GM = 4 pi^2."""
    r = a * (1.0 - ecc)
    v = math.sqrt(GM * (2.0 / r - 1.0 / a))
    return PhaseState((r, 0.0), (0.0, mass * v), 0.0)


def _celestial_model(cfg):
    if cfg.model == "kepler":
        return ModelSpec.kepler(cfg.m_e)
    return ModelSpec.three_body(cfg.m_e, cfg.m_j, cfg.r_j, cfg.omega_j)


def _run_celestial(cfg: ExperimentConfig) -> ExperimentRecord:
    model = _celestial_model(cfg)
    if cfg.initial is None:
        start = periapsis_state(cfg.a, cfg.ecc, model.mass)
    else:
        start = PhaseState(cfg.initial[:2], cfg.initial[2:], 0.0)
    runs, verdicts, eigen, tables = [], {}, {}, {}
    trajectory = None
    for ind in (Indicator.LYAPUNOV, Indicator.GEM):
        try:
            run = propagate_coupled(model, start, DeviationState(), ind, cfg.step, cfg.t_final)
        except DomainError as err:
            runs.append(RunStatus(ind.value, False, str(err)))
            continue
        runs.append(RunStatus(ind.value, True))
        trajectory = run.trajectory
        eigen[ind] = run.eigen
        verdicts[ind.value] = uncertainty_verdict(run.eigen.intervals(cfg.tol))
        tables[f"intervals_{ind.value}"] = Table(
            f"intervals_{ind.value}", INTERVAL_COLUMNS, _interval_rows(verdicts[ind.value].intervals)
        )
    if trajectory is None:
        return ExperimentRecord(cfg, {}, {}, runs, {"status": "failed"})

    s = slice(None, None, cfg.series_stride)
    lyap, gem = eigen[Indicator.LYAPUNOV], eigen[Indicator.GEM]
    tables["series"] = Table.from_columns(
        "series",
        t=trajectory.t[s], x=trajectory.q[s, 0], y=trajectory.q[s, 1], px=trajectory.p[s, 0],
        py=trajectory.p[s, 1], r=trajectory.r[s], energy=trajectory.energy[s],
        lyapunov_minus=lyap.lambda_minus[s], lyapunov_plus=lyap.lambda_plus[s],
        gem_minus=gem.lambda_minus[s], gem_plus=gem.lambda_plus[s], gem_valid=gem.valid[s].astype(int),
    )
    apsides = apsis_events(trajectory)
    tables["apsides"] = Table("apsides", ("t", "r", "kind"), [(e.t, e.r, e.kind.value) for e in apsides])
    tables["verdicts"] = Table(
        "verdicts",
        ("indicator", "n_intervals", "max_product", "cumulative_product", "max_mu_product", "chaos_possible"),
        [(k, len(v.intervals), v.max_product, v.cumulative_product, v.max_mu_product, int(v.chaos_possible))
         for k, v in verdicts.items()],
    )
    lyap_valid = lyap.valid
    summary = {
        "model": cfg.model,
        "energy_drift": trajectory.max_relative_drift(),
        "lyapunov_positive_fraction": float(np.mean(lyap.lambda_plus[lyap_valid] > 0)),
        "gem_invalid_samples": int(np.sum(~gem.valid)),
        "perihelia": [e.t for e in apsides if e.kind is ApsisKind.PERIHELION],
        "verdicts": {k: _verdict_summary(v) for k, v in verdicts.items()},
        "primary_indicator": cfg.indicator.value,
    }
    return ExperimentRecord(cfg, tables, verdicts, runs, summary)


_RUNNERS = {
    ExperimentKind.TOY: _run_toy,
    ExperimentKind.TODA_SWEEP: _run_toda_sweep,
    ExperimentKind.TODA_POINCARE: _run_toda_poincare,
    ExperimentKind.CELESTIAL: _run_celestial,
}


def run_experiment(config: ExperimentConfig) -> ExperimentRecord:
    """Run one experiment and return its tables, verdicts and per-run status."""
    t0 = time.perf_counter()
    record = _RUNNERS[config.kind](config)
    record.wall_time = time.perf_counter() - t0
    return record
