"""Experiment harness: eigenvalue counts against effective operators and Weyl volumes.

Each experiment takes an :class:`ExperimentConfig`, fans out over the
h-grid and returns a report whose rows are ordered as the grid. Reports are
written by :func:`emit_report` as CSV plus a JSON provenance sidecar.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .effective_ops import (
    EffectiveParams,
    boundary_laplacian_spectrum,
    count_operator,
    effective_spectrum,
    laplacian_lattice_count,
    weyl_prediction,
)
from .errors import ParameterError, SolverError
from .geometry import PlanarCurve, make_curve
from .robin2d.disk import disk_negative_spectrum
from .robin2d.fem import RobinProblem, fem_count_below
from .robin2d.tube import tube_spectrum

RATIO_FLOOR = 5
C_CAP = 100.0
C_RESOLUTION = 1e-3
LOWER_BRACKET_RTOL = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs shared by all experiments.

    ``curve`` is a preset description such as ``{"kind": "circle", "R": 1.0}``.
    ``C_plus`` and ``C_minus`` are numbers or ``"fit"``.
    """

    curve: dict = field(default_factory=lambda: {"kind": "circle", "R": 1.0})
    h_grid: tuple = (1e-2, 1e-3, 1e-4)
    E: float = 0.0
    epsilon0: float = 0.9
    C_plus: float | str = "fit"
    C_minus: float | str = "fit"
    delta_list: tuple = ()
    threads: int = 1

    def __post_init__(self):
        grid = tuple(float(h) for h in self.h_grid)
        object.__setattr__(self, "h_grid", grid)
        object.__setattr__(self, "delta_list", tuple(float(d) for d in self.delta_list))
        if not grid:
            raise ParameterError("h_grid is empty")
        if any(not 0 < h < 1 for h in grid):
            raise ParameterError("every h must lie in (0, 1)")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("h_grid must be strictly decreasing")
        if not 0 < self.epsilon0 < 1:
            raise ParameterError("epsilon0 must lie in (0, 1)")
        for name in ("C_plus", "C_minus"):
            c = getattr(self, name)
            if c != "fit" and not (isinstance(c, (int, float)) and c >= 0):
                raise ParameterError(f"{name} must be a nonnegative number or 'fit'")
        if any(d <= 0 for d in self.delta_list):
            raise ParameterError("delta values must be positive")
        if self.threads < 1:
            raise ParameterError("threads must be at least 1")
        make_curve(**self.curve_kwargs())

    def curve_kwargs(self):
        spec = dict(self.curve)
        return {"kind": spec.pop("kind"), **spec}

    def build_curve(self) -> PlanarCurve:
        return make_curve(**self.curve_kwargs())

    @property
    def is_disk(self):
        return self.curve.get("kind") == "circle"

    def to_dict(self):
        return {
            "curve": dict(self.curve),
            "h_grid": list(self.h_grid),
            "E": self.E,
            "epsilon0": self.epsilon0,
            "C_plus": self.C_plus,
            "C_minus": self.C_minus,
            "delta_list": list(self.delta_list),
        }


@dataclass
class Report:
    """Rows (ordered dicts) with a column list, provenance and pass/fail checks."""

    kind: str
    columns: list
    rows: list
    provenance: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def column(self, name):
        return [row[name] for row in self.rows]


class CountingReport(Report):
    """Counts ``N_full``, ``N_effective`` and the Weyl prediction per h.

    ``ratio1 = N_full / N_effective`` and ``ratio2 = N_full / weyl`` are left
    empty (and the row flagged) when the denominator is below 5.
    """

    def deviations(self):
        return [abs(r["ratio1"] - 1) if r["ratio1"] is not None else None for r in self.rows]


def _map(config, fn, items):
    if config.threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(fn, items))


def _provenance(config, solver_tags):
    return {
        "artifact_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": config.to_dict(),
        "solvers": solver_tags,
        "tolerances": {
            "count_tie_rtol": 1e-10,
            "bessel_ratio_rtol": 1e-16,
            "ratio_denominator_floor": RATIO_FLOOR,
        },
    }


def _ratio(num, den):
    return num / den if den >= RATIO_FLOOR else None


def _counting_row(h, n_full, n_eff, weyl, **extra):
    r1, r2 = _ratio(n_full, n_eff), _ratio(n_full, weyl)
    row = {"h": h, "N_full": int(n_full), "N_effective": int(n_eff), "weyl": float(weyl), "ratio1": r1, "ratio2": r2}
    row["flagged"] = r1 is None or r2 is None
    row.update(extra)
    return row


def _full_count(config, curve, h, threshold):
    if config.is_disk:
        return len(disk_negative_spectrum(curve.params["R"], h, threshold))
    return fem_count_below(RobinProblem(curve, h), threshold)


def _trend_checks(report, final_cap):
    dev = report.deviations()
    if any(d is None for d in dev):
        return {"ratios_available": False}
    return {
        "deviation_non_increasing": all(b <= a for a, b in zip(dev, dev[1:])),
        f"final_deviation_le_{final_cap}": dev[-1] <= final_cap,
    }


def theorem1_experiment(config: ExperimentConfig) -> CountingReport:
    """Counts below ``-h + E h^{3/2}`` against ``h^{1/2} L - kappa <= E``."""
    curve = config.build_curve()
    E = config.E

    def row(h):
        threshold = -h + E * h**1.5
        if config.is_disk and threshold > 0:
            raise ParameterError(f"-h + E h^(3/2) is positive at h={h}; the disk oracle counts negative eigenvalues only")
        n_full = _full_count(config, curve, h, threshold)
        n_eff = count_operator(curve, math.sqrt(h), 1.0, 0.0, E)
        return _counting_row(h, n_full, n_eff, weyl_prediction(curve, h, E, "low_lying"), threshold=threshold)

    rows = _map(config, row, config.h_grid)
    tags = {"N_full": "bessel_oracle" if config.is_disk else "fem_p1", "N_effective": "fourier_effective", "weyl": "phase_space_quadrature"}
    report = CountingReport("theorem1", ["h", "N_full", "N_effective", "weyl", "ratio1", "ratio2"], rows, _provenance(config, tags))
    report.summary["clipped_volume"] = E + curve.kappa_min <= 0
    report.checks.update(_trend_checks(report, 0.15))
    return report


def theorem2_experiment(config: ExperimentConfig) -> CountingReport:
    """Nonpositive eigenvalue counts against ``h L <= 1``."""
    curve = config.build_curve()

    def row(h):
        n_full = _full_count(config, curve, h, 0.0)
        n_lattice = laplacian_lattice_count(curve, h)
        n_operator = count_operator(curve, h, 0.0, 0.0, 1.0)
        return _counting_row(h, n_full, n_lattice, weyl_prediction(curve, h, mode="nonpositive"), N_effective_operator=n_operator)

    rows = _map(config, row, config.h_grid)
    tags = {"N_full": "bessel_oracle" if config.is_disk else "fem_p1", "N_effective": "lattice_count", "weyl": "closed_form"}
    report = CountingReport("theorem2", ["h", "N_full", "N_effective", "weyl", "ratio1", "ratio2"], rows, _provenance(config, tags))
    report.checks["effective_counts_agree"] = all(r["N_effective"] == r["N_effective_operator"] for r in rows)
    report.checks.update(_trend_checks(report, 0.10))
    return report


def _require_disk(config):
    if not config.is_disk:
        raise ParameterError("this experiment needs the exact disk spectrum (curve kind 'circle')")


def _sandwich_data(config, curve):
    R = curve.params["R"]
    data = []
    for h in config.h_grid:
        mu = disk_negative_spectrum(R, h, -config.epsilon0 * h).eigenvalues
        if len(mu) == 0:
            continue
        lam = boundary_laplacian_spectrum(curve, len(mu)).eigenvalues
        data.append((h, mu, lam))
    return data


def _effective(curve, h, n, variant, C):
    p = EffectiveParams(h=h, variant=variant, C_plus=C, C_minus=C, n_modes=max(8, n))
    return effective_spectrum(curve, p).eigenvalues[:n]


def _violations(curve, data, C_plus, C_minus):
    """Number of (h, n) with mu_n outside [mu_n^-, mu_n^+]; minus needs (1 - C h^{1/2}) > 0."""
    bad = 0
    for h, mu, _ in data:
        upper = _effective(curve, h, len(mu), "plus", C_plus)
        bad += int(np.count_nonzero(mu > upper))
        if C_minus * math.sqrt(h) >= 1:
            bad += len(mu)
            continue
        lower = _effective(curve, h, len(mu), "minus", C_minus)
        bad += int(np.count_nonzero(mu < lower))
    return bad


def _fit_constant(ok, upper=C_CAP):
    """Smallest C in [0, upper] (to C_RESOLUTION) with ``ok(C)``, assuming monotonicity."""
    if ok(0.0):
        return 0.0
    if not ok(upper):
        raise SolverError(f"no admissible sandwich constant below {upper:.6g}")
    lo, hi = 0.0, upper
    while hi - lo > C_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def sandwich_experiment(config: ExperimentConfig) -> Report:
    """Fit sandwich constants on the disk and check both inequalities.

    Rows hold ``mu_n(h)``, the effective bounds with the common constant
    ``C_fit = max(C_plus, C_minus)`` and the residual
    ``(mu_n - (-h + h^2 lambda_n - h^{3/2} kappa)) / h^2``.
    """
    _require_disk(config)
    curve = config.build_curve()
    data = _sandwich_data(config, curve)
    if not data:
        raise ParameterError("no eigenvalue below -epsilon0 h on the grid")
    if config.C_plus == "fit":
        c_plus = _fit_constant(lambda C: _plus_only(curve, data, C) == 0)
    else:
        c_plus = float(config.C_plus)
    if config.C_minus == "fit":
        # the minus operator loses its kinetic term once C h^{1/2} reaches 1
        upper = min(C_CAP, (1 - 1e-9) / math.sqrt(max(h for h, _, _ in data)))
        c_minus = _fit_constant(lambda C: _minus_only(curve, data, C) == 0, upper)
    else:
        c_minus = float(config.C_minus)
    c_fit = max(c_plus, c_minus)
    kappa = 1.0 / curve.params["R"]
    rows = []
    for h, mu, lam in data:
        upper = _effective(curve, h, len(mu), "plus", c_fit)
        lower = _effective(curve, h, len(mu), "minus", c_fit) if c_fit * math.sqrt(h) < 1 else np.full(len(mu), -np.inf)
        for n in range(len(mu)):
            r = (mu[n] - (-h + h * h * lam[n] - h**1.5 * kappa)) / (h * h)
            rows.append({"h": h, "n": n + 1, "mu": mu[n], "mu_minus": lower[n], "mu_plus": upper[n], "residual_over_h2": r})
    violations = sum(1 for r in rows if not r["mu_minus"] <= r["mu"] <= r["mu_plus"])
    report = Report(
        "sandwich",
        ["h", "n", "mu", "mu_minus", "mu_plus", "residual_over_h2"],
        rows,
        _provenance(config, {"mu": "bessel_oracle", "bounds": "fourier_effective"}),
    )
    residual_constant = max(abs(r["residual_over_h2"]) for r in rows)
    report.summary.update(
        C_plus=c_plus,
        C_minus=c_minus,
        C_fit=c_fit,
        violations=violations,
        residual_constant=residual_constant,
        violations_without_constants=_violations(curve, data, 0.0, 0.0),
    )
    report.checks["C_fit_le_cap"] = c_fit <= C_CAP
    report.checks["no_violations"] = violations == 0
    return report


def _plus_only(curve, data, C):
    return sum(int(np.count_nonzero(mu > _effective(curve, h, len(mu), "plus", C))) for h, mu, _ in data)


def _minus_only(curve, data, C):
    bad = 0
    for h, mu, _ in data:
        if C * math.sqrt(h) >= 1:
            return len(mu) + bad + 1
        bad += int(np.count_nonzero(mu < _effective(curve, h, len(mu), "minus", C)))
    return bad


def bracketing_experiment(config: ExperimentConfig, delta_list=None) -> Report:
    """Tube eigenvalues against the exact disk eigenvalues for each delta.

    For every h and every n with ``mu_n <= -epsilon0 h`` the excess
    ``mu_n^delta - mu_n`` must be nonnegative and decrease with delta; the
    slope of ``log(excess)`` against ``delta h^{-1/2}`` is fitted per n.
    """
    _require_disk(config)
    deltas = tuple(sorted(float(d) for d in (delta_list if delta_list is not None else config.delta_list)))
    if not deltas:
        raise ParameterError("delta_list is empty")
    curve = config.build_curve()
    R = curve.params["R"]
    rows, slopes, lower_ok, decreasing = [], [], True, True

    def per_h(h):
        mu = disk_negative_spectrum(R, h, -config.epsilon0 * h).eigenvalues
        return h, mu, [tube_spectrum(curve, h, d, len(mu)).eigenvalues for d in deltas] if len(mu) else []

    for h, mu, tubes in _map(config, per_h, config.h_grid):
        if len(mu) == 0:
            continue
        excess = np.array([t - mu for t in tubes])
        for d, ex in zip(deltas, excess):
            for n in range(len(mu)):
                rows.append({"h": h, "delta": d, "n": n + 1, "mu": mu[n], "mu_delta": mu[n] + ex[n], "excess": ex[n]})
        lower_ok &= bool(np.all(excess >= -LOWER_BRACKET_RTOL * np.abs(mu)[None, :]))
        decreasing &= bool(np.all(np.diff(excess, axis=0) <= 0))
        x = np.array(deltas) / math.sqrt(h)
        for n in range(len(mu)):
            if len(deltas) >= 2 and np.all(excess[:, n] > 0):
                slopes.append(float(np.polyfit(x, np.log(excess[:, n]), 1)[0]))
    report = Report(
        "bracketing",
        ["h", "delta", "n", "mu", "mu_delta", "excess"],
        rows,
        _provenance(config, {"mu": "bessel_oracle", "mu_delta": "tube_fourier_fem"}),
    )
    report.summary.update(max_log_slope=max(slopes) if slopes else None, slopes=slopes)
    report.checks["lower_bracket"] = lower_ok
    report.checks["excess_decreasing"] = decreasing
    if slopes:
        report.checks["log_slope_le_-0.9"] = max(slopes) <= -0.9
    return report


def ratio_deviations(report: CountingReport):
    return report.deviations()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def report_csv(report: Report) -> str:
    columns = ["h", "N_full", "N_effective", "weyl", "ratio1", "ratio2"] if isinstance(report, CountingReport) else report.columns
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in report.rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def report_dict(report: Report):
    return _jsonable(
        {
            "kind": report.kind,
            "rows": report.rows,
            "summary": report.summary,
            "checks": report.checks,
            "passed": report.passed,
            "provenance": report.provenance,
        }
    )


def emit_report(report: Report, path) -> tuple[Path, Path]:
    """Write ``report`` as CSV at ``path`` and JSON provenance at ``path`` with suffix ``.json``.

    Output depends only on the report contents, so identical inputs give
    byte-identical files. Nothing is written for an empty report.
    """
    if not report.rows:
        raise ParameterError("report has no rows; nothing written")
    path = Path(path)
    sidecar = path.with_suffix(".json") if path.suffix != ".json" else path.with_suffix(".meta.json")
    text = report_csv(report)
    meta = json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n"
    try:
        path.write_text(text)
        sidecar.write_text(meta)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return path, sidecar
