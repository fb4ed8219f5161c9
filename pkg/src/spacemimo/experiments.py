"""Figure reproduction and parameter sweeps.

Each runner turns a :class:`SweepSpec` into a :class:`FigureOutput`, a flat
table of ``(x, series, value, stderr, provenance)`` rows that is written as
CSV.  Series names are ``<curve>/<estimator>``, e.g. ``d0=4/montecarlo``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from .array_channel import ArrayMode, make_geometry
from .errors import DomainError, InvariantViolation
from .montecarlo import TrialPlan, estimate_inner_moments, estimate_sum_rate_mrt

__all__ = [
    "Figure",
    "Row",
    "SweepSpec",
    "FigureOutput",
    "CUSTOM_ESTIMATORS",
    "default_spec",
    "run_fig1",
    "run_fig2",
    "run_fig3",
    "run_custom",
    "run",
]

CSV_HEADER = ("x", "series", "value", "stderr", "provenance")
PROVENANCES = ("montecarlo", "exact", "asymptotic", "reference")

CUSTOM_ESTIMATORS = (
    "mean_mc", "mean_exact", "mean_asymptotic",
    "second_mc", "second_exact", "second_asymptotic",
    "variance_mc", "variance_exact", "variance_asymptotic",
    "rate_mc", "rate_bound",
)
DEFAULT_CUSTOM_ESTIMATORS = ("mean_exact", "variance_exact", "rate_mc", "rate_bound")


class Figure(enum.Enum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG2A = "fig2a"
    FIG2B = "fig2b"
    FIG3 = "fig3"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Row:
    x: float
    series: str
    value: float
    stderr: Optional[float]
    provenance: str


def _fmt(v):
    return format(v, ".12g")


@dataclass
class FigureOutput:
    figure: Figure
    rows: list = field(default_factory=list)
    # Axis labels for optional rendering.
    xlabel: str = "N"
    log_x: bool = True

    def add(self, x, series, value, provenance, stderr=None):
        self.rows.append(Row(float(x), series, float(value),
                             None if stderr is None else float(stderr), provenance))

    def series(self):
        out = {}
        for r in self.rows:
            out.setdefault(r.series, []).append(r)
        return out

    def column(self, series):
        rows = self.series().get(series, [])
        return np.array([r.x for r in rows]), np.array([r.value for r in rows])

    def finish(self):
        """Group rows by series (in order of first appearance), sort by x, validate."""
        first = {}
        for r in self.rows:
            first.setdefault(r.series, len(first))
        self.rows.sort(key=lambda r: (first[r.series], r.x))
        return self.validate()

    def validate(self):
        for name, rows in self.series().items():
            xs = [r.x for r in rows]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise InvariantViolation(f"x not strictly increasing in series {name!r}")
            for r in rows:
                if r.provenance not in PROVENANCES:
                    raise InvariantViolation(f"unknown provenance {r.provenance!r}")
                if (r.provenance == "montecarlo") != (r.stderr is not None):
                    raise InvariantViolation(
                        f"series {name!r}: stderr must accompany exactly the Monte Carlo rows")
                if not math.isfinite(r.value):
                    raise InvariantViolation(f"non-finite value in series {name!r}")
                if name.startswith("variance") and r.value < -1e-12:
                    raise InvariantViolation(f"negative variance in series {name!r}")
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow((_fmt(r.x), r.series, _fmt(r.value),
                        "" if r.stderr is None else _fmt(r.stderr), r.provenance))
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def write_svg(self, path):
        import matplotlib
        matplotlib.use("svg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, rows in self.series().items():
            style = "o" if rows[0].provenance == "montecarlo" else "-"
            ax.plot([r.x for r in rows], [r.value for r in rows], style,
                    label=name, markersize=3)
        if self.log_x:
            ax.set_xscale("log")
        ax.set_xlabel(self.xlabel)
        ax.legend(fontsize=6)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


@dataclass(frozen=True)
class SweepSpec:
    """Experiment grid.

    ``d0_grid`` lists constrained apertures; ``reference`` adds the
    half-wavelength array. ``users`` and ``rho_db`` are lists so that custom
    sweeps can range over them; the figures use the first entry.
    ``epsilon_terms=None`` truncates the correction series at ``N - 1``.
    """

    figure: Figure
    n_grid: tuple
    d0_grid: tuple
    reference: bool = True
    users: tuple = (10,)
    rho_db: tuple = (10.0,)
    loss_db: float = 30.0
    trials: int = 100_000
    seed: int = 0
    workers: int = 1
    epsilon_terms: Optional[int] = None
    estimators: tuple = DEFAULT_CUSTOM_ESTIMATORS

    def __post_init__(self):
        object.__setattr__(self, "figure", Figure(self.figure))
        n = tuple(sorted({int(v) for v in self.n_grid}))
        d = tuple(sorted({float(v) for v in self.d0_grid}))
        object.__setattr__(self, "n_grid", n)
        object.__setattr__(self, "d0_grid", d)
        object.__setattr__(self, "users", tuple(int(k) for k in self.users))
        object.__setattr__(self, "rho_db", tuple(float(r) for r in self.rho_db))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not n or n[0] < 1:
            raise DomainError("n_grid must be a nonempty list of positive integers")
        if not d and not self.reference:
            raise DomainError("need at least one d0 value or the reference array")
        if d and d[0] <= 0.0:
            raise DomainError("d0 values must be positive")
        if not self.users or min(self.users) < 1:
            raise DomainError("users must be positive")
        if not self.rho_db:
            raise DomainError("rho_db must be nonempty")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")
        if self.epsilon_terms is not None and self.epsilon_terms < 1:
            raise DomainError("epsilon_terms must be positive")
        unknown = set(self.estimators) - set(CUSTOM_ESTIMATORS)
        if unknown:
            raise DomainError(f"unknown estimators: {sorted(unknown)}")
        for r in self.rho_db:
            if not math.isfinite(self.rho_eff_of(r)) or self.rho_eff_of(r) <= 0.0:
                raise DomainError(f"effective SNR must be positive (rho_db={r})")

    def rho_eff_of(self, rho_db):
        return 10.0 ** ((rho_db - self.loss_db) / 10.0)

    @property
    def rho_eff(self):
        return self.rho_eff_of(self.rho_db[0])

    def plan(self):
        return TrialPlan(self.trials, self.seed, self.workers)

    def geometries(self, N):
        """``(label, geometry)`` for every curve at ``N``, reference last."""
        out = [(f"d0={d0:g}", make_geometry(ArrayMode.SPACE_CONSTRAINED, N, d0))
               for d0 in self.d0_grid]
        if self.reference:
            out.append(("reference", make_geometry(ArrayMode.HALF_WAVELENGTH_REFERENCE, N)))
        return out


def _log_grid(lo, hi, count):
    return tuple(sorted({int(round(v)) for v in np.geomspace(lo, hi, count)}))


_DEFAULTS = {
    Figure.FIG1: dict(n_grid=_log_grid(10, 1000, 13), d0_grid=(4.0, 10.0), trials=100_000),
    Figure.FIG2: dict(n_grid=(200,), d0_grid=tuple(float(v) for v in range(1, 21)),
                      trials=100_000),
    Figure.FIG3: dict(n_grid=(20, 32, 48, 64, 96, 128, 192, 256, 384, 512, 768, 1024),
                      d0_grid=(4.0, 10.0), trials=10_000),
    Figure.CUSTOM: dict(n_grid=(64,), d0_grid=(4.0,), trials=10_000),
}
_DEFAULTS[Figure.FIG2A] = _DEFAULTS[Figure.FIG2B] = _DEFAULTS[Figure.FIG2]


def default_spec(figure, **overrides) -> SweepSpec:
    """Spec with the figure's default grid, updated by ``overrides``."""
    figure = Figure(figure)
    kw = dict(_DEFAULTS[figure])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(figure=figure, **kw)


def _eps(spec, N, d0):
    return analytic.epsilon_correction(N, d0, spec.epsilon_terms)


def _asymptotic_ok(N, d0):
    return 2.0 * d0 <= N


def run_fig1(spec: SweepSpec) -> FigureOutput:
    """Scaled mean inner product against ``N`` for each aperture."""
    out = FigureOutput(Figure.FIG1, xlabel="N", log_x=True)
    plan = spec.plan()
    for N in spec.n_grid:
        for label, geom in spec.geometries(N):
            est = estimate_inner_moments(geom, plan)
            out.add(N, f"{label}/montecarlo", est.mean_scaled.real, "montecarlo",
                    est.stderr_mean)
            if geom.is_reference:
                out.add(N, f"{label}/exact",
                        analytic.unlimited_reference_moments(N).mean_scaled, "reference")
                continue
            out.add(N, f"{label}/exact", analytic.exact_mean_scaled(N, geom.aperture), "exact")
            if _asymptotic_ok(N, geom.aperture):
                out.add(N, f"{label}/asymptotic",
                        analytic.asymptotic_mean_scaled(N, geom.aperture), "asymptotic")
    return out.finish()


def run_fig2(spec: SweepSpec) -> FigureOutput:
    """Scaled mean (panel a) and variance (panel b) against ``d0`` at fixed ``N``."""
    fig = spec.figure if spec.figure in (Figure.FIG2A, Figure.FIG2B) else Figure.FIG2
    want_mean = fig in (Figure.FIG2, Figure.FIG2A)
    want_var = fig in (Figure.FIG2, Figure.FIG2B)
    out = FigureOutput(fig, xlabel="d0", log_x=False)
    plan = spec.plan()
    for N in spec.n_grid:
        tag = f"N={N}"
        ref = analytic.unlimited_reference_moments(N)
        for d0 in spec.d0_grid:
            geom = make_geometry(ArrayMode.SPACE_CONSTRAINED, N, d0)
            est = estimate_inner_moments(geom, plan)
            exact = analytic.exact_moments(N, d0)
            asym = analytic.asymptotic_moments(N, d0, _eps(spec, N, d0)) \
                if _asymptotic_ok(N, d0) else None
            if want_mean:
                out.add(d0, f"mean/{tag}/montecarlo", est.mean_scaled.real, "montecarlo",
                        est.stderr_mean)
                out.add(d0, f"mean/{tag}/exact", exact.mean_scaled, "exact")
                if asym is not None:
                    out.add(d0, f"mean/{tag}/asymptotic", asym.mean_scaled, "asymptotic")
                if spec.reference:
                    out.add(d0, f"mean/{tag}/reference", ref.mean_scaled, "reference")
            if want_var:
                out.add(d0, f"variance/{tag}/montecarlo", est.variance_scaled, "montecarlo",
                        est.stderr_variance)
                out.add(d0, f"variance/{tag}/exact", exact.variance_scaled, "exact")
                if asym is not None:
                    out.add(d0, f"variance/{tag}/asymptotic", asym.variance_scaled,
                            "asymptotic")
                if spec.reference:
                    out.add(d0, f"variance/{tag}/reference", ref.variance_scaled, "reference")
    return out.finish()


def run_fig3(spec: SweepSpec) -> FigureOutput:
    """MRT ergodic sum rate and its Jensen bound against ``N``."""
    out = FigureOutput(Figure.FIG3, xlabel="N", log_x=True)
    plan = spec.plan()
    K = spec.users[0]
    rho = spec.rho_eff
    for N in spec.n_grid:
        if N < K:
            raise DomainError(f"N={N} is below the user count K={K}")
        for label, geom in spec.geometries(N):
            est = estimate_sum_rate_mrt(geom, K, rho, plan)
            out.add(N, f"{label}/montecarlo", est.sum_rate, "montecarlo", est.stderr)
            out.add(N, f"{label}/jensen",
                    analytic.jensen_sum_rate_bound(N, K, geom.aperture, rho), "exact")
    return out.finish()


def _custom_point(spec, est_names, N, label, geom, K, rho_db, out):
    series = f"{label},K={K},rho_db={rho_db:g}"
    rho = spec.rho_eff_of(rho_db)
    plan = spec.plan()
    d0 = geom.aperture
    if any(e.endswith("_mc") and not e.startswith("rate") for e in est_names):
        mc = estimate_inner_moments(geom, plan)
        for kind, val, err in (("mean", mc.mean_scaled.real, mc.stderr_mean),
                               ("second", mc.second_moment_scaled, mc.stderr_second),
                               ("variance", mc.variance_scaled, mc.stderr_variance)):
            if f"{kind}_mc" in est_names:
                out.add(N, f"{series}/{kind}_mc", val, "montecarlo", err)
    exact_needed = [e for e in est_names if e.endswith("_exact")]
    if exact_needed:
        if geom.is_reference:
            ms, prov = analytic.unlimited_reference_moments(N), "reference"
        else:
            ms, prov = analytic.exact_moments(N, d0), "exact"
        vals = {"mean": ms.mean_scaled, "second": ms.second_moment_scaled,
                "variance": ms.variance_scaled}
        for e in exact_needed:
            out.add(N, f"{series}/{e}", vals[e.split("_")[0]], prov)
    asym_needed = [e for e in est_names if e.endswith("_asymptotic")]
    if asym_needed and not geom.is_reference and _asymptotic_ok(N, d0):
        ms = analytic.asymptotic_moments(N, d0, _eps(spec, N, d0))
        vals = {"mean": ms.mean_scaled, "second": ms.second_moment_scaled,
                "variance": ms.variance_scaled}
        for e in asym_needed:
            out.add(N, f"{series}/{e}", vals[e.split("_")[0]], "asymptotic")
    if "rate_mc" in est_names:
        est = estimate_sum_rate_mrt(geom, K, rho, plan)
        out.add(N, f"{series}/rate_mc", est.sum_rate, "montecarlo", est.stderr)
    if "rate_bound" in est_names:
        out.add(N, f"{series}/rate_bound", analytic.jensen_sum_rate_bound(N, K, d0, rho),
                "exact")


def run_custom(spec: SweepSpec) -> FigureOutput:
    """Arbitrary grid over ``N``, aperture, user count and SNR; ``x`` is ``N``."""
    out = FigureOutput(Figure.CUSTOM, xlabel="N", log_x=False)
    est_names = set(spec.estimators)
    for N in spec.n_grid:
        for K in spec.users:
            if N < K:
                raise DomainError(f"grid point N={N} is below the user count K={K}")
        for label, geom in spec.geometries(N):
            for K in spec.users:
                for rho_db in spec.rho_db:
                    _custom_point(spec, est_names, N, label, geom, K, rho_db, out)
    return out.finish()


_RUNNERS = {
    Figure.FIG1: run_fig1,
    Figure.FIG2: run_fig2,
    Figure.FIG2A: run_fig2,
    Figure.FIG2B: run_fig2,
    Figure.FIG3: run_fig3,
    Figure.CUSTOM: run_custom,
}


def run(spec: SweepSpec) -> FigureOutput:
    return _RUNNERS[spec.figure](spec)
