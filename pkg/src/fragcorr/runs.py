"""Trajectory, verification and sweep runs behind the command line.

Every run returns an in-memory report; writers turn reports into CSV or JSON
with a fixed column order and 17 significant digits, so identical configs give
byte-identical files however the work was scheduled.
"""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import analytic, entangle, moments, oracle
from .config import RunConfig
from .errors import ConfigError
from .model import SystemParams, classify_regime, min_uncertainty_state

THREADS_ENV = "FRAGCORR_THREADS"

TRAJECTORY_COLUMNS = (
    "t", "alpha", "alpha_free", "p_perfect_1d", "p_perfect_3d",
    "var_X", "mean_x", "tan_theta", "schmidt_per_vol",
)
SWEEP_COLUMNS = (
    "kappa", "a", "omega", "critical_omega", "regime", "alpha_minus", "alpha_plus",
    "alpha_min", "alpha_max", "retention", "tan_theta_inf_derived", "tan_theta_inf_printed",
)

DEFAULT_TOLERANCES = {
    "alpha_match": 1e-6,
    "alpha_fit_agreement": 1e-6,
    "alpha_identity": 1e-10,
    "phase_fidelity": 1e-8,
    "norm_drift": 1e-10,
    "moment_variance": 1e-6,
    "moment_mean": 1e-6,
    "purity_match": 2e-2,
    "decay_exponent_3d": 1e-2,
    "decay_exponent_1d": 1e-2,
}

ERRATA = {
    "variance_denominator": {"derived": "M^2 omega^2 (free: M^2)", "printed": "4 M^2 Omega^2 (free: 4 M^2)"},
    "free_alignment_constant": {"derived": "lambda/(8 pi dX)", "printed": "lambda/(16 pi dX)"},
}


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive")
    return value


def _pmap(fn: Callable, items: list) -> list:
    """Order-preserving parallel map."""
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def cell_summary(params: SystemParams, p0: float, t_max: float, samples: int) -> dict:
    """Regime and correlation-retention figures for one parameter cell.

    Width extremes over ``[0, t_max]`` include the turning points
    ``k pi / (2 omega)`` inside the window, not only the sample times.
    """
    times = np.linspace(0.0, t_max, samples)
    if not params.is_free:
        quarter = math.pi / (2.0 * params.omega)
        kmax = int(math.floor(t_max / quarter))
        times = np.concatenate([times, quarter * np.arange(min(kmax, 2) + 1)])
    al = np.atleast_1d(analytic.alpha(params, times))
    lo, hi = analytic.alpha_bounds(params)
    regime = classify_regime(params)
    state = min_uncertainty_state(params, p0)
    asym = asym_printed = None
    if p0 > 0:
        asym = moments.tan_theta_asymptote(state, params)
        asym_printed = moments.tan_theta_asymptote_printed(state, params)
    return {
        "kappa": params.kappa,
        "a": params.a,
        "omega": params.omega,
        "critical_omega": regime.critical_omega,
        "regime": regime.tag.value,
        "alpha_minus": lo,
        "alpha_plus": hi,
        "alpha_min": float(al.min()),
        "alpha_max": float(al.max()),
        "retention": float((al.min() / al.max()) ** 1.5),
        "tan_theta_inf_derived": asym,
        "tan_theta_inf_printed": asym_printed,
    }


@dataclass
class Report:
    kind: str
    config: RunConfig
    columns: tuple
    rows: list
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# fragcorr {self.kind}\n")
        buf.write(f"# config: {self.config.to_json()}\n")
        if self.summary:
            buf.write("# summary: " + json.dumps(_jsonable(self.summary), sort_keys=True) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "summary": self.summary,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
        }
        return json.dumps(_jsonable(payload), sort_keys=True, indent=1) + "\n"

    def render(self, fmt: Optional[str] = None) -> str:
        return self.to_json() if (fmt or self.config.format) == "json" else self.to_csv()

    def write(self, path=None, fmt: Optional[str] = None) -> str:
        text = self.render(fmt)
        path = path or self.config.path
        if path:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def parse_config_header(text: str) -> RunConfig:
    """Recover the config echoed into a CSV or JSON report."""
    if text.lstrip().startswith("{"):
        return RunConfig.from_dict(json.loads(text)["config"])
    for line in text.splitlines():
        if line.startswith("# config: "):
            return RunConfig.from_dict(json.loads(line[len("# config: "):]))
    raise ConfigError("no config header found")


def _trajectory_rows(params: SystemParams, p0: float, volume: float, times: np.ndarray) -> list:
    state = min_uncertainty_state(params, p0)
    al = np.atleast_1d(analytic.alpha(params, times))
    al_free = np.atleast_1d(analytic.alpha_free(params, times))
    rep = moments.alignment_report(state, params, times)
    cols = [
        times,
        al,
        al_free,
        (2.0 * al / np.pi) ** 0.5,
        (2.0 * al / np.pi) ** 1.5,
        rep.var_X,
        rep.mean_x,
        rep.tan_theta,
        entangle.schmidt_per_volume_at_alpha(al, volume, 3),
    ]
    return [tuple(float(c[i]) for c in cols) for i in range(times.size)]


def run_trajectory(cfg: RunConfig) -> Report:
    cfg.validate()
    params = cfg.params()
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    chunks = [c for c in np.array_split(times, min(thread_count(), cfg.samples)) if c.size]
    parts = _pmap(lambda c: _trajectory_rows(params, cfg.p0, cfg.volume, c), chunks)
    rows = [r for part in parts for r in part]
    summary = cell_summary(params, cfg.p0, cfg.t_max, cfg.samples)
    summary["errata"] = ERRATA
    if params.is_free:
        tau = entangle.free_decay_timescale(params)
        summary["free_decay_exponent_3d"] = entangle.free_decay_exponent(params, (10 * tau, 1000 * tau), 3)
    return Report("trajectory", cfg, TRAJECTORY_COLUMNS, rows, summary)


def run_sweep(cfg: RunConfig) -> Report:
    cfg.validate()
    if not cfg.kappas and not cfg.a_values:
        raise ConfigError("sweep needs at least one of kappas or a_values")
    base = cfg.params()
    kappas = sorted(float(k) for k in cfg.kappas) or [base.kappa]
    widths = sorted(float(a) for a in cfg.a_values) or [base.a]
    cells = [(k, a) for k in kappas for a in widths]

    def one(cell):
        k, a = cell
        return cell_summary(cfg.params(kappa=k, a=a), cfg.p0, cfg.t_max, cfg.samples)

    summaries = _pmap(one, cells)
    rows = [tuple(s[c] for c in SWEEP_COLUMNS) for s in summaries]
    return Report("sweep", cfg, SWEEP_COLUMNS, rows, {"errata": ERRATA})


def regime_lines(cfg: RunConfig) -> list[str]:
    cfg.validate()
    base = cfg.params()
    kappas = sorted(float(k) for k in cfg.kappas) or [base.kappa]
    widths = sorted(float(a) for a in cfg.a_values) or [base.a]
    out = []
    for k in kappas:
        for a in widths:
            p = cfg.params(kappa=k, a=a)
            r = classify_regime(p)
            out.append(f"kappa={_fmt(k)} a={_fmt(a)} omega={_fmt(p.omega)} "
                       f"critical_omega={_fmt(r.critical_omega)} regime={r.tag.value}")
    return out


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e} {self.detail}".rstrip()


def _oracle_grid(cfg: RunConfig, params: SystemParams, t_final: float,
                 state=None) -> oracle.GridSpec:
    state = state or min_uncertainty_state(params)
    spec = oracle.grid_for_state(params, state, t_final, n=cfg.n, dt=cfg.dt)
    if cfg.extent is not None:
        spec = oracle.GridSpec(n=spec.n, extent=float(cfg.extent), dt=spec.dt)
    return spec


def _width_checks(cfg, params, tol) -> list[Check]:
    t_end = cfg.t_max if params.is_free else math.pi / params.omega
    times = np.linspace(0.0, t_end, 51)[1:]
    spec = _oracle_grid(cfg, params, t_end)
    wf0 = oracle.gaussian_state(spec, params)
    snaps = oracle.propagate(wf0, params, times)
    est = [oracle.extract_alpha(s) for s in snaps]
    ana = np.atleast_1d(analytic.alpha(params, times))
    rel = max(abs(e.alpha / a - 1.0) for e, a in zip(est, ana))
    fit = max(abs(e.alpha_fit / e.alpha - 1.0) for e in est)
    fid = min(oracle.fidelity(s, analytic.wavefunction(params, s.t, s.x)) for s in snaps)
    drift = max(abs(s.norm - wf0.norm) for s in snaps)
    span = f"t in (0, {t_end:.6g}], 50 samples"
    return [
        Check("alpha_match", rel, tol["alpha_match"], span),
        Check("alpha_fit_agreement", fit, tol["alpha_fit_agreement"]),
        Check("phase_fidelity", 1.0 - fid, tol["phase_fidelity"], "1 - |<grid|analytic>|"),
        Check("norm_drift", drift, tol["norm_drift"]),
    ]


def _identity_check(cfg, params, tol) -> list[Check]:
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    state = min_uncertainty_state(params)
    prod = 4.0 * np.asarray(analytic.alpha(params, times)) * moments.variance_X(state, params, times)
    return [Check("alpha_identity", float(np.max(np.abs(prod - 1.0))), tol["alpha_identity"], "4 alpha var_X = 1")]


def _moment_checks(cfg, params, tol) -> list[Check]:
    state = min_uncertainty_state(params, cfg.p0)
    t = cfg.t_max
    spec = _oracle_grid(cfg, params, t, state)
    var_o, mean_o = oracle.moment_oracle(state, params, t, spec)
    var_a = moments.variance_X(state, params, t)
    var_p = moments.variance_X_printed(state, params, t)
    mean_a = moments.mean_position(state, params, t)
    detail = f"t={t:.6g} oracle={var_o:.12g} derived={var_a:.12g} printed={var_p:.12g}"
    return [
        Check("moment_variance", abs(var_o - var_a), tol["moment_variance"], detail),
        Check("moment_mean", abs(mean_o - mean_a), tol["moment_mean"], f"<x>={mean_o:.12g}"),
    ]


def _purity_check(cfg, params, tol) -> list[Check]:
    res = oracle.grid_purity(params, 0.0, cfg.box_L, cfg.box_n)
    al = float(analytic.alpha(params, 0.0))
    expected = math.sqrt(al / math.pi)
    ratio = res.schmidt_1d / cfg.box_L
    return [Check("purity_match", abs(ratio / expected - 1.0), tol["purity_match"],
                  f"schmidt_1d/box_L={ratio:.6g} sqrt(alpha/pi)={expected:.6g}")]


def _decay_checks(cfg, params, tol) -> list[Check]:
    free = SystemParams(m=params.m, hbar=params.hbar, kappa=0.0, a=params.a)
    tau = entangle.free_decay_timescale(free)
    window = (10.0 * tau, 1000.0 * tau)
    s3 = entangle.free_decay_exponent(free, window, 3)
    s1 = entangle.free_decay_exponent(free, window, 1)
    return [
        Check("decay_exponent_3d", abs(s3 + 3.0), tol["decay_exponent_3d"], f"slope={s3:.6f}"),
        Check("decay_exponent_1d", abs(s1 + 1.0), tol["decay_exponent_1d"], f"slope={s1:.6f}"),
    ]


@dataclass
class VerifyResult:
    config: RunConfig
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]

    def report(self) -> Report:
        rows = [(c.name, "pass" if c.passed else "fail", c.measured, c.tolerance, c.detail) for c in self.checks]
        return Report("verify", self.config, ("check", "status", "measured", "tolerance", "detail"), rows,
                      {"passed": self.passed, "errata": ERRATA})


def run_verify(cfg: RunConfig) -> VerifyResult:
    """Compare every closed form against its oracle.

    Numerical failures inside an oracle propagate as exceptions; only completed
    comparisons produce pass/fail entries.
    """
    cfg.validate()
    unknown = set(cfg.tolerances) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance names: {sorted(unknown)}")
    tol = {**DEFAULT_TOLERANCES, **{k: float(v) for k, v in cfg.tolerances.items()}}
    params = cfg.params()
    groups = [_width_checks, _identity_check, _moment_checks, _purity_check, _decay_checks]
    results = _pmap(lambda fn: fn(cfg, params, tol), groups)
    return VerifyResult(cfg, [c for group in results for c in group])
