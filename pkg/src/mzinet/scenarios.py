"""Scenario files, figure-reproduction runs, CSV emission and the
cross-engine verification suite.

A scenario is a JSON document (schema 1):

    {
      "schema": 1,
      "name": "fig3a",
      "seed": 20260808,
      "network": {"d": 6, "r": 0.75, "K": 1, "weights": "ave",
                  "n_c": 2.7e16, "eta_dis": 0.99, "eta_mzi": 0.89,
                  "eta_m": 0.9999},
      "scans": [{"label": "K1", "axis": "n_c",
                 "grid": [...] or {"start":..,"stop":..,"num":..,"spacing":..},
                 "engines": ["analytic", "numeric"],
                 "overrides": {"K": 1}}],
      "trace": {"sample_rate": 2e7, "cycle": 8e-3, "gate": [2.4e-3, 4e-3],
                "n_cycles": 10, "drive_freq": 4e6, "delta_theta": 1e-7,
                "rbw": 1e5}
    }

Each scan emits one CSV (atomic write, LF endings, 17-significant-digit
scientific notation) named <name>_<label>.csv plus a sidecar metadata text
block <name>_meta.txt.  Identical scenario + seed gives byte-identical
outputs.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import laws, optimize, tracelab
from .errors import ConfigError, ScenarioParseError
from .fock import oracle_sensitivity
from .network import (
    NetworkConfig,
    closed_form_variance,
    noise_matrix,
    qc_cascade,
    response_matrix,
    sensitivity_numeric,
    sensitivity_separable,
    weight_pattern,
)

__all__ = [
    "Scenario",
    "load_scenario",
    "bundled_scenario_path",
    "run_scenario",
    "reproduce",
    "verify",
    "VerifyReport",
    "photon_flux",
    "FIGURES",
]

SCHEMA_VERSION = 1
FIGURES = ("fig2", "fig3a", "fig3b", "fig3c", "fig4", "fig5a", "fig5b")

PLANCK = 6.62607015e-34
LIGHT_SPEED = 299792458.0

CSV_COLUMNS = (
    "variance_numeric",
    "variance_closed_form",
    "variance_oracle",
    "variance_qcrb",
    "sql",
    "db_below_sql",
    "regime",
    "n_s_opt",
    "branch_low",
    "branch_heisenberg",
    "branch_floor",
    "db_below_sql_mc",
    "snr_db_mc",
    "status",
)

ENGINES = ("numeric", "analytic", "oracle", "trace")


@dataclass
class ScanSpec:
    label: str
    axis: str
    grid: list
    engines: tuple
    overrides: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    seed: int
    network: dict
    scans: list
    trace: dict = field(default_factory=dict)

    def base_config(self, overrides=None) -> NetworkConfig:
        spec = dict(self.network)
        if overrides:
            spec.update(overrides)
        return _config_from_spec(spec)


def _config_from_spec(spec: dict) -> NetworkConfig:
    spec = dict(spec)
    d = int(spec.pop("d"))
    weights = spec.pop("weights", "ave")
    if isinstance(weights, str):
        weights = weight_pattern(weights, d)
    else:
        weights = tuple(float(w) for w in weights)
        if len(weights) != d:
            raise ConfigError("weights", f"need {d} weights")
    r = spec.pop("r", 0.0)
    kwargs = {
        "K": int(spec.pop("K", 1)),
        "mu": spec.pop("mu", None),
        "eta_dis": float(spec.pop("eta_dis", 1.0)),
        "eta_mzi": float(spec.pop("eta_mzi", 1.0)),
        "eta_m": float(spec.pop("eta_m", 1.0)),
    }
    alphas = spec.pop("alphas", None)
    P = spec.pop("P", None)
    thetas = spec.pop("thetas", None)
    if isinstance(thetas, (int, float)):
        thetas = (float(thetas),) * d
    n_c = spec.pop("n_c", None)
    topology = spec.pop("topology", "entangled")
    if spec:
        raise ConfigError(sorted(spec)[0], "unknown network field")
    if alphas is None or P is None:
        if n_c is None:
            raise ConfigError("n_c", "need n_c when alphas/P are not explicit")
        return optimize.configure_optimal(
            weights, float(n_c), r,
            thetas=tuple(thetas) if thetas is not None else None,
            topology=topology, **kwargs,
        )
    return NetworkConfig(
        d=d, r=r, alphas=tuple(tuple(a) for a in alphas),
        thetas=tuple(thetas) if thetas is not None else (0.0,) * d,
        weights=weights, P=tuple(P), topology=topology, **kwargs,
    )


def _expand_grid(grid):
    if isinstance(grid, dict):
        num = int(grid["num"])
        spacing = grid.get("spacing", "linear")
        if spacing == "log":
            values = np.logspace(
                math.log10(float(grid["start"])),
                math.log10(float(grid["stop"])), num)
        elif spacing == "linear":
            values = np.linspace(float(grid["start"]), float(grid["stop"]), num)
        else:
            raise ScenarioParseError(f"unknown grid spacing {spacing!r}")
        extra = [float(x) for x in grid.get("include", [])]
        return sorted(set(np.round(values, 12).tolist()) | set(extra))
    if not isinstance(grid, list) or not grid:
        raise ScenarioParseError("grid must be a nonempty list or range spec")
    return list(grid)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from exc
    return _scenario_from_doc(doc)


def _scenario_from_doc(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ScenarioParseError(
            f"schema {doc.get('schema')!r} not supported (want {SCHEMA_VERSION})"
        )
    try:
        name = doc["name"]
        network = doc["network"]
        scans_doc = doc["scans"]
    except KeyError as exc:
        raise ScenarioParseError(f"missing field {exc.args[0]!r}") from exc
    scans = []
    for entry in scans_doc:
        engines = tuple(entry.get("engines", ("analytic",)))
        for engine in engines:
            if engine not in ENGINES:
                raise ScenarioParseError(f"unknown engine {engine!r}")
        scans.append(
            ScanSpec(
                label=entry.get("label", entry["axis"]),
                axis=entry["axis"],
                grid=_expand_grid(entry["grid"]),
                engines=engines,
                overrides=dict(entry.get("overrides", {})),
            )
        )
    scenario = Scenario(
        name=name,
        seed=int(doc.get("seed", 0)),
        network=dict(network),
        scans=scans,
        trace=dict(doc.get("trace", {})),
    )
    _validate_scenario(scenario)
    return scenario


def _validate_scenario(scenario: Scenario):
    for spec in scenario.scans:
        cfg = scenario.base_config(spec.overrides)
        if "oracle" in spec.engines:
            if cfg.d > 3:
                raise ConfigError("engines", "oracle refuses d > 3")
            if float(cfg.r) > 0.4:
                raise ConfigError("engines", "oracle refuses r > 0.4")
        if "trace" in spec.engines and not scenario.trace:
            raise ConfigError("trace", "trace engine needs a trace block")


def _trace_params(trace_doc: dict) -> tracelab.TraceParams:
    return tracelab.TraceParams(
        sample_rate=float(trace_doc.get("sample_rate", tracelab.DEFAULT_SAMPLE_RATE)),
        cycle=float(trace_doc.get("cycle", tracelab.DEFAULT_CYCLE)),
        gate=tuple(trace_doc.get("gate", tracelab.DEFAULT_GATE)),
        n_cycles=int(trace_doc.get("n_cycles", 1)),
        drive_freq=float(trace_doc.get("drive_freq", tracelab.DEFAULT_DRIVE)),
    )


def _run_trace_point(cfg, scenario, row_seed):
    params = _trace_params(scenario.trace)
    delta = float(scenario.trace.get("delta_theta", 1e-7))
    rbw = float(scenario.trace.get("rbw", 100e3))
    signs = np.sign(np.asarray(cfg.weights))
    signs[signs == 0] = 1.0
    traces = tracelab.synthesize(cfg, signs * delta, params, seed=row_seed)
    result = tracelab.joint_noise_analysis(traces, cfg.weights, cfg, rbw=rbw)
    return result.db_below_sql, result.snr_db


def _format_value(value):
    if value is None:
        return ""
    if isinstance(value, str):
        # keep the CSV grid intact whatever an error message contains
        return value.replace(",", ";").replace("\n", " ")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return ""
    return f"{value:.16e}"


def _write_csv(path: Path, axis: str, rows):
    tmp = path.with_suffix(path.suffix + ".tmp")
    lines = [",".join((axis,) + CSV_COLUMNS)]
    for row in rows:
        cells = [_format_value(row.value)]
        for col in CSV_COLUMNS:
            cells.append(_format_value(getattr(row, col)))
        lines.append(",".join(cells))
    tmp.write_text("\n".join(lines) + "\n", newline="\n")
    os.replace(tmp, path)


def run_scenario(path_or_scenario, out_dir, seed=None, max_workers=None):
    """Run every scan of a scenario; returns the list of CSV paths written.

    Per-point engine errors land in the row status column and the run
    continues; scenario-level problems raise before anything is written.
    """
    if isinstance(path_or_scenario, Scenario):
        scenario = path_or_scenario
    else:
        scenario = load_scenario(path_or_scenario)
    if seed is not None:
        scenario.seed = int(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    meta_lines = [f"scenario: {scenario.name}", f"seed: {scenario.seed}",
                  f"schema: {SCHEMA_VERSION}"]
    for scan_index, spec in enumerate(scenario.scans):
        base = scenario.base_config(spec.overrides)
        rows = optimize.scan(spec.axis, spec.grid, base, engines=spec.engines,
                             max_workers=max_workers)
        if "trace" in spec.engines:
            for row_index, row in enumerate(rows):
                if row.status != "ok":
                    continue
                try:
                    cfg, _ = optimize._config_for_point(
                        spec.axis, row.value, base, base.weights)
                    row_seed = (scenario.seed * 1000003 + scan_index * 9973
                                + row_index) % 2**63
                    row.db_below_sql_mc, row.snr_db_mc = _run_trace_point(
                        cfg, scenario, row_seed)
                except Exception as exc:
                    row.status = f"error:{type(exc).__name__}: {exc}"
        csv_path = out_dir / f"{scenario.name}_{spec.label}.csv"
        _write_csv(csv_path, spec.axis, rows)
        written.append(csv_path)
        meta_lines.append(
            f"scan {spec.label}: axis={spec.axis} points={len(rows)} "
            f"engines={','.join(spec.engines)} overrides={json.dumps(spec.overrides, sort_keys=True)}"
        )
    if scenario.trace:
        meta_lines.append("trace: " + json.dumps(scenario.trace, sort_keys=True))
        meta_lines.append(
            "trace calibration: unit-variance white channel reads "
            "rbw/(sample_rate/2) linear; sinusoid amplitude A reads A^2/3"
        )
    meta_path = out_dir / f"{scenario.name}_meta.txt"
    meta_path.write_text("\n".join(meta_lines) + "\n", newline="\n")
    return written


def bundled_scenario_path(name: str) -> Path:
    if name not in FIGURES:
        raise ConfigError("figure", f"unknown figure {name!r}; know {FIGURES}")
    resource = importlib.resources.files("mzinet") / "scenarios" / f"{name}.json"
    return Path(str(resource))


def reproduce(figure: str, out_dir, seed=None, max_workers=None):
    """Run the bundled scenario for one figure panel family."""
    return run_scenario(bundled_scenario_path(figure), out_dir, seed=seed,
                        max_workers=max_workers)


def photon_flux(power: float, wavelength: float) -> float:
    """Photon rate of a monochromatic beam: power * wavelength / (h c)."""
    if power <= 0 or wavelength <= 0:
        raise ValueError("power and wavelength must be > 0")
    return power * wavelength / (PLANCK * LIGHT_SPEED)


# ---------------------------------------------------------------------------
# cross-engine verification


@dataclass
class VerifyCheck:
    name: str
    deviation: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.deviation <= self.bound

    def line(self) -> str:
        flag = "PASS" if self.ok else "FAIL"
        return f"{flag}  {self.name}: deviation {self.deviation:.3e} (bound {self.bound:.1e})"


@dataclass
class VerifyReport:
    level: str
    checks: list
    elapsed: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(
            f"{'OK' if self.ok else 'FAILED'}: {sum(c.ok for c in self.checks)}"
            f"/{len(self.checks)} checks passed in {self.elapsed:.1f} s ({self.level})"
        )
        return "\n".join(lines)


def _random_config(rng, d_max=4, r_max=1.0, optimal_p=True):
    d = int(rng.integers(1, d_max + 1))
    nu = rng.uniform(0.2, 1.0, d) * rng.choice([-1.0, 1.0], d)
    mags = rng.uniform(0.5, 3.0, d)
    alphas = tuple(
        (m, 0.0 if w >= 0 else math.pi) for m, w in zip(mags, nu)
    )
    if optimal_p:
        p = nu**2 / mags**2
    else:
        p = rng.uniform(0.05, 1.0, d)
    p = p / p.sum()
    return NetworkConfig(
        d=d,
        r=float(rng.uniform(0.0, r_max)),
        K=int(rng.integers(1, 4)),
        alphas=alphas,
        weights=tuple(nu),
        P=tuple(p),
        eta_dis=float(rng.uniform(0.85, 1.0)),
        eta_mzi=float(rng.uniform(0.85, 1.0)),
        eta_m=float(rng.uniform(0.98, 1.0)),
    )


def _rel_dev(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify(level="quick", seed=20260808, _flip_gamma_sign=False) -> VerifyReport:
    """Run the cross-engine agreement suites.

    quick targets tens of seconds, full also exercises the trace pipeline.
    The _flip_gamma_sign hook deliberately corrupts the noise matrix inside
    the oracle-agreement check; it exists so tests can confirm that a wrong
    sign is actually caught.
    """
    start = time.time()
    full = level == "full"
    if level not in ("quick", "full"):
        raise ConfigError("level", "level must be 'quick' or 'full'")
    rng = np.random.default_rng(seed)
    checks = []

    # engine vs closed form at the working point
    dev = 0.0
    for _ in range(200 if full else 40):
        cfg = _random_config(rng, optimal_p=bool(rng.integers(0, 2)))
        dev = max(dev, _rel_dev(sensitivity_numeric(cfg), closed_form_variance(cfg)))
    checks.append(VerifyCheck("engine vs closed form", dev, 1e-9))

    # analytic response vs finite differences of the engine means
    dev = 0.0
    for _ in range(10 if full else 3):
        cfg = _random_config(rng)
        cfg = cfg.with_updates(thetas=tuple(rng.uniform(-0.3, 0.3, cfg.d)))
        dev = max(dev, _response_fd_deviation(cfg))
    checks.append(VerifyCheck("response matrix vs finite differences", dev, 1e-6))

    # shared resource vs separable nodes at equal fixed squeezing
    dev = 0.0
    for _ in range(10):
        cfg = _random_config(rng, optimal_p=True)
        sep = cfg.with_updates(topology="separable", r=(float(cfg.r),) * cfg.d)
        dev = max(dev, _rel_dev(sensitivity_numeric(cfg), sensitivity_separable(sep)))
    checks.append(VerifyCheck("entangled vs separable (fixed r)", dev, 1e-10))

    # weight/phase sign flips leave the variance unchanged
    dev = 0.0
    for _ in range(10):
        cfg = _random_config(rng, optimal_p=True)
        flipped = _flip_signs(cfg)
        dev = max(dev, _rel_dev(sensitivity_numeric(cfg), sensitivity_numeric(flipped)))
    checks.append(VerifyCheck("sign-structure invariance", dev, 1e-10))

    # lumped vs placed losses at the measured port
    dev = 0.0
    for _ in range(5):
        cfg = _random_config(rng)
        lumped = cfg.with_updates(
            eta_dis=1.0, eta_mzi=cfg.eta_total / cfg.eta_m ** (2 * cfg.K - 1))
        dev = max(dev, float(np.max(np.abs(noise_matrix(cfg) - noise_matrix(lumped)))))
        dev = max(dev, float(np.max(np.abs(
            response_matrix(cfg) - response_matrix(lumped)))))
    checks.append(VerifyCheck("lumped-loss equivalence", dev, 1e-12))

    # cascade realizes the requested splitting exactly
    dev = 0.0
    for _ in range(10):
        d = int(rng.integers(1, 8))
        p = rng.uniform(0.0, 1.0, d)
        p = p / p.sum()
        amp = np.zeros(d)
        amp[0] = 1.0
        for (i, j), t in qc_cascade(p):
            ai, aj = amp[i], amp[j]
            amp[i] = math.sqrt(t) * ai + math.sqrt(1 - t) * aj
            amp[j] = -math.sqrt(1 - t) * ai + math.sqrt(t) * aj
        dev = max(dev, float(np.max(np.abs(amp**2 - p))))
    checks.append(VerifyCheck("cascade splitting distribution", dev, 1e-12))

    # fock oracle vs engine vs closed form
    dev = 0.0
    for _ in range(25 if full else 5):
        cfg = _random_config(rng, d_max=3, r_max=0.4, optimal_p=True)
        cfg = cfg.with_updates(
            alphas=tuple((min(m, 0.95), ph) for m, ph in cfg.alphas),
            K=1,
        )
        oracle = oracle_sensitivity(cfg)
        if _flip_gamma_sign:
            # corrupt the cross-correlations the oracle reproduces
            oracle = _oracle_with_flipped_gamma(cfg)
        dev = max(dev, _rel_dev(oracle, sensitivity_numeric(cfg)))
        dev = max(dev, _rel_dev(oracle, closed_form_variance(cfg)))
    checks.append(VerifyCheck("fock oracle agreement", dev, 1e-6))

    # optimizer never loses to a brute-force grid
    dev = 0.0
    for _ in range(30 if full else 10):
        n_t = float(10 ** rng.uniform(-2, 3))
        lam = float(10 ** rng.uniform(-4, 0))
        k = float(rng.integers(1, 6))
        _, best = optimize.optimize_squeezing(n_t, Lambda=lam, K=k)
        ns_grid = np.linspace(0.0, n_t * (1 - 1e-9), 10_000)
        grid_best = min(
            laws.variance_vs_ns(n_t, x, Lambda=lam, K=k) for x in ns_grid
        )
        dev = max(dev, max(0.0, (best - grid_best) / grid_best))
    checks.append(VerifyCheck("squeezing optimizer vs grid", dev, 1e-8))

    # closed-form identities
    dev = 0.0
    for n_s in np.logspace(-6, 6, 25):
        dev = max(dev, abs(laws.varq_from_ns(n_s)
                           - math.exp(-2 * laws.ns_to_r(n_s))))
    dev = max(dev, abs(laws.db_below_sql(0.75, 1 - math.exp(-1.5))))
    checks.append(VerifyCheck("resource conversion identities", dev, 1e-12))

    if full:
        dev = 0.0
        params = tracelab.TraceParams(sample_rate=2e7, cycle=8e-3,
                                      gate=(2.4e-3, 4e-3), n_cycles=8,
                                      drive_freq=4e6)
        for r in (0.0, 0.3, 0.75):
            cfg = optimize.configure_optimal(
                weight_pattern("ave", 4), 1e12, r,
                eta_dis=0.99, eta_mzi=0.89, eta_m=0.9999)
            traces = tracelab.synthesize(cfg, 0.0, params,
                                         seed=int(rng.integers(2**62)))
            result = tracelab.joint_noise_analysis(traces, cfg.weights, cfg)
            model = laws.db_below_sql(r, cfg.Lambda)
            dev = max(dev, abs(result.db_below_sql - model))
        checks.append(VerifyCheck("trace noise recovery (dB)", dev, 0.2))

    return VerifyReport(level=level, checks=checks, elapsed=time.time() - start)


def _response_fd_deviation(cfg, step=1e-6):
    from .network import build_network
    from .gaussian import homodyne_moments

    analytic = response_matrix(cfg)
    dev = 0.0
    for j in range(cfg.d):
        thetas = list(cfg.thetas)
        thetas[j] += step
        up, _ = homodyne_moments(build_network(cfg.with_updates(thetas=tuple(thetas))),
                                 list(range(cfg.d)), "q")
        thetas[j] -= 2 * step
        dn, _ = homodyne_moments(build_network(cfg.with_updates(thetas=tuple(thetas))),
                                 list(range(cfg.d)), "q")
        fd = (up - dn) / (2 * step)
        for i in range(cfg.d):
            scale = max(abs(analytic[i, j]), np.max(np.abs(analytic)))
            dev = max(dev, abs(fd[i] - analytic[i, j]) / scale)
    return dev


def _flip_signs(cfg: NetworkConfig) -> NetworkConfig:
    flipped_nu = tuple(-w for w in cfg.weights)
    flipped_alphas = tuple((m, ph + math.pi) for m, ph in cfg.alphas)
    return cfg.with_updates(weights=flipped_nu, alphas=flipped_alphas)


def _oracle_with_flipped_gamma(cfg: NetworkConfig) -> float:
    """Oracle variance with every noise deviation from vacuum negated
    (Gamma -> 2I - Gamma): the sign-bug mutation target for the
    verification sanity test, detectable even on single-node configs."""
    gamma = noise_matrix(cfg)
    bad = 2.0 * np.eye(cfg.d) - gamma
    c = response_matrix(cfg)
    nu = np.asarray(cfg.weights)
    x = nu / np.diag(c)
    return float(x @ bad @ x)
