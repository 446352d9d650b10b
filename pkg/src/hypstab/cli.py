"""Command-line driver: classification, scans, shock stability, symmetrizer
verification, and estimate probes as reproducible batch jobs.

Every job writes plain-data artifacts (CSV with 17 significant digits, JSON
with sorted keys) into the output directory plus a ``run.json`` sidecar; the
sidecar's ``metadata`` field is the only place a timestamp appears, so two
runs with the same configuration and seed produce byte-identical data files.

Exit codes: 0 on success, 1 when the analysis itself is negative (an
instability, a failed verification, a broken convergence trend), 2 on
configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import models
from .boundary import Frequency, build_G, constant_boundary_problem, positive_count
from .classify import classify_root
from .errors import (
    ConfigError,
    HypstabError,
    LopatinskiFailureAtPoint,
    Singular,
)
from .lopatinski import (
    ScanResult,
    half_sphere_grid,
    lopatinski_det,
    refine_scan_minimum,
    uniform_scan,
)
from .symbol import (
    MODEL_NAMES,
    HyperbolicSystem,
    assemble,
    check_friedrichs,
    load_system,
    registered_system,
)
from .symmetrizer import (
    dissipative_symmetrizer,
    estimate_probe,
    sign_check,
    two_by_two_lopatinski,
    two_by_two_normal_form,
    verify_kreiss,
    verify_symmetrizer,
)
from .util import geometric_ladder

__all__ = ["JobConfig", "run", "emit_plot_data", "main"]

COMMANDS = ("classify", "scan", "shock", "verify", "probe", "demo")

_FMT = "%.17g"


@dataclass
class JobConfig:
    """One batch job: a command plus everything that parametrizes it.

    ``model`` is a registry name, the literal "normal-form", or a path to a
    JSON document (a serialized shock problem or a raw system).  ``config``
    carries the model/problem description; command behaviour is controlled
    by the remaining fields.  ``seed`` feeds the single random generator
    used for any sampling, making runs reproducible.
    """

    command: str
    model: str | None = None
    config: dict = field(default_factory=dict)
    point: dict | None = None
    sweep: list[float] | None = None
    compare_euler: bool = False
    out: str = "hypstab-out"
    grid: int = 320
    gamma_floor: float = 1e-3
    seed: int = 0
    threads: int = 0
    threshold: float = 1e-6

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command: must be one of {', '.join(COMMANDS)}")
        if not isinstance(self.config, dict):
            raise ConfigError("config: must be a JSON object")
        if not (isinstance(self.grid, int) and self.grid > 0):
            raise ConfigError(f"grid: must be a positive integer, got {self.grid!r}")
        if not (0 < self.gamma_floor < 1):
            raise ConfigError(
                f"gamma-floor: must lie in (0, 1), got {self.gamma_floor!r}"
            )
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed: must be a nonnegative integer, got {self.seed!r}")
        if self.threads < 0:
            raise ConfigError(f"threads: must be nonnegative, got {self.threads!r}")
        if not self.threshold > 0:
            raise ConfigError(f"threshold: must be positive, got {self.threshold!r}")

    @property
    def worker_count(self) -> int:
        if self.threads > 0:
            return self.threads
        env = os.environ.get("HYPSTAB_THREADS", "")
        if env.strip():
            try:
                parsed = int(env)
            except ValueError as exc:
                raise ConfigError(f"HYPSTAB_THREADS: not an integer: {env!r}") from exc
            if parsed > 0:
                return parsed
        return 1


# ---------------------------------------------------------------- plumbing


def _pmap(fn, items, workers: int) -> list:
    """Map with an optional thread pool; output order always follows input
    order, so reductions are deterministic regardless of worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FMT % value
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def emit_plot_data(scan: ScanResult, out_dir, stem: str = "scan", extra=None):
    """Write a scan as a long-format CSV plus a JSON sidecar (min/argmin).

    One CSV row per grid point.  An empty grid produces a header-only CSV
    and a sidecar with null minimum.  ``extra`` entries are merged into the
    sidecar (refined minima, verdicts).  Returns the two paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    if scan.grid:
        scan.to_csv(csv_path)
        side = scan.summary()
    else:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("tau,gamma,absD,converged\n")
        side = {"min_value": None, "argmin": None, "grid_points": 0}
    if extra:
        side.update(extra)
    _write_json(json_path, side)
    return csv_path, json_path


def _frequency_doc(freq: Frequency) -> dict:
    return {"tau": freq.tau, "eta": list(freq.eta), "gamma": freq.gamma}


def _finish(cfg: JobConfig, out_dir, summary: dict, exit_code: int) -> int:
    """Write the run sidecar and print the human-readable summary table."""
    os.makedirs(out_dir, exist_ok=True)
    sidecar = {
        "command": cfg.command,
        "model": cfg.model,
        "config": cfg.config,
        "seed": cfg.seed,
        "grid": cfg.grid,
        "gamma_floor": cfg.gamma_floor,
        "threshold": cfg.threshold,
        "exit_code": exit_code,
        "summary": summary,
        "metadata": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    }
    _write_json(os.path.join(out_dir, "run.json"), sidecar)
    width = max((len(k) for k in summary), default=0)
    print(f"[{cfg.command}] artifacts in {out_dir}")
    for key, value in summary.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"  {key:<{width}}  {value}")
    print(f"  {'exit':<{width}}  {exit_code}")
    return exit_code


# --------------------------------------------------------- model resolution


def _load_json_doc(path_or_text, label: str) -> dict:
    try:
        if os.path.exists(str(path_or_text)):
            with open(path_or_text, "r", encoding="utf-8") as fh:
                return json.load(fh)
        return json.loads(path_or_text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{label}: not a readable JSON document: {exc}") from exc


def _normal_form_target(config: dict):
    for key in ("a", "c"):
        if key not in config:
            raise ConfigError(f"config.{key}: required for the normal-form model")
        if not isinstance(config[key], (int, float)):
            raise ConfigError(f"config.{key}: must be a number")
    a = float(config["a"])
    c = float(config["c"])
    if a <= 0:
        raise ConfigError(f"config.a: boundary speed ratio must be positive, got {a}")
    extra = set(config) - {"a", "c"}
    if extra:
        raise ConfigError(f"config.{sorted(extra)[0]}: unknown normal-form field")
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    normal = np.diag([a, -1.0 / a])
    system = HyperbolicSystem(
        n=2,
        d=2,
        coeff=lambda p, _m=[coupling, normal]: _m,
        symmetrizer=lambda p: np.eye(2),
        label=f"normal-form(a={a:g})",
    )
    bp = constant_boundary_problem(system, np.array([[1.0, -c]]), label="oblique")
    return system, bp, a, c


def _resolve_target(cfg: JobConfig):
    """Classify cfg.model into one of: ("registry", system, param),
    ("system", system, None), ("shock", ShockProblem), ("normal-form", ...)."""
    name = cfg.model
    if name is None:
        raise ConfigError("model: required for this command")
    if name == "normal-form":
        return ("normal-form",) + _normal_form_target(cfg.config)
    if name in MODEL_NAMES:
        try:
            system, param = registered_system(name, cfg.config or None)
        except ValueError as exc:
            raise ConfigError(f"config: {exc}") from exc
        return ("registry", system, param)
    if not os.path.exists(name) and not name.lstrip().startswith("{"):
        raise ConfigError(
            f"model: unknown model {name!r}; expected one of "
            f"{', '.join(MODEL_NAMES)}, 'normal-form', or a JSON path"
        )
    doc = _load_json_doc(name, "model")
    if "rho_minus" in doc:
        try:
            return ("shock", models.shock_from_json(doc))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"model: malformed shock document: {exc}") from exc
    if "matrices" in doc:
        return ("system", load_system(doc), None)
    raise ConfigError(
        "model: JSON document is neither a shock problem (rho_minus ...) "
        "nor a system (matrices ...)"
    )


def _random_frequencies(rng, d: int, count: int, gamma_lo=0.05, gamma_hi=1.0):
    out = []
    for _ in range(count):
        out.append(
            Frequency(
                float(rng.uniform(-2.0, 2.0)),
                tuple(rng.uniform(-2.0, 2.0, d - 1)),
                float(rng.uniform(gamma_lo, gamma_hi)),
            )
        )
    return out


def _sphere_grid(cfg: JobConfig, d: int, include_zero: bool):
    levels = 5
    directions = max(4, round(cfg.grid / levels))
    return half_sphere_grid(
        d,
        directions=directions,
        gamma_levels=levels,
        gamma_floor=cfg.gamma_floor,
        include_zero=include_zero,
    )


# ------------------------------------------------------------------ classify


def _distinct_roots(values: np.ndarray) -> list[float]:
    scale = max(1.0, float(np.max(np.abs(values))))
    out: list[float] = []
    for v in np.sort(values):
        if not out or abs(v - out[-1]) > 1e-8 * scale:
            out.append(float(v))
    return out


def _run_classify(cfg: JobConfig, out_dir) -> int:
    kind, *rest = _resolve_target(cfg)
    if kind not in ("registry", "system"):
        raise ConfigError("model: classify expects a registry model or a system JSON")
    system, param = rest
    if cfg.point is None:
        raise ConfigError("point: required for classify")
    doc = cfg.point
    if "xi" not in doc:
        raise ConfigError("point.xi: required (real frequency vector)")
    xi = np.asarray(doc["xi"], dtype=float).reshape(-1)
    if xi.shape != (system.d,):
        raise ConfigError(f"point.xi: expected {system.d} components, got {xi.shape[0]}")
    if not np.linalg.norm(xi) > 0:
        raise ConfigError("point.xi: must be nonzero")
    extra = set(doc) - {"xi", "tau"}
    if extra:
        raise ConfigError(f"point.{sorted(extra)[0]}: unknown field")
    if "tau" in doc:
        taus = [float(doc["tau"])]
    else:
        eigs = np.linalg.eigvals(assemble(system, param, xi))
        taus = [-v for v in _distinct_roots(eigs.real)]
    eta = tuple(float(xi[j]) for j in system.tangential_axes)
    xi_normal = float(xi[system.boundary_axis])
    rows = []
    for tau in taus:
        rc = classify_root(system, param, tau, eta, xi_normal)
        rows.append(
            {
                "tau": tau,
                "algebraic_multiplicity": rc.alg_mult,
                "geometric_multiplicity": rc.geom_mult,
                "semi_simple": rc.semi_simple,
                "regularity": rc.regularity,
                "glancing": rc.glancing,
            }
        )
    _write_json(
        os.path.join(out_dir, "classify.json"),
        {"model": cfg.model, "xi": [float(v) for v in xi], "roots": rows},
    )
    _write_csv(
        os.path.join(out_dir, "classify.csv"),
        ["tau", "alg_mult", "geom_mult", "semi_simple", "regularity", "glancing"],
        [
            [
                r["tau"],
                r["algebraic_multiplicity"],
                r["geometric_multiplicity"],
                int(r["semi_simple"]),
                r["regularity"],
                r["glancing"],
            ]
            for r in rows
        ],
    )
    undetermined = sum(r["regularity"] == "undetermined" for r in rows)
    summary = {
        "roots": len(rows),
        "regularities": " ".join(r["regularity"] for r in rows),
        "undetermined": undetermined,
    }
    return _finish(cfg, out_dir, summary, 1 if undetermined else 0)


# ---------------------------------------------------------------------- scan


def _refine_majda(sp, start: Frequency, maxiter: int = 200):
    """Nelder-Mead polish of a front-determinant grid minimum, folding the
    iterates back onto the closed half-sphere."""
    x0 = start.as_array()

    def fold(x):
        v = np.array([*x[:-1], abs(x[-1])])
        norm = np.linalg.norm(v)
        if norm == 0:
            return None
        v /= norm
        return Frequency(v[0], tuple(v[1:-1]), v[-1])

    def objective(x):
        freq = fold(x)
        if freq is None:
            return 1.0
        try:
            return models.majda_lopatinski(sp, freq)
        except HypstabError:
            return 1.0

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-15},
    )
    best = fold(res.x)
    base = objective(x0)
    if best is None or res.fun > base:
        return base, start
    return float(res.fun), best


def _scan_shock(cfg: JobConfig, sp, out_dir, stem: str = "scan"):
    grid = _sphere_grid(cfg, 3, include_zero=False)
    values = _pmap(
        lambda z: models.majda_lopatinski(sp, z), grid, cfg.worker_count
    )
    scan = ScanResult(
        grid=list(grid),
        values=np.asarray(values),
        gamma_floor=cfg.gamma_floor,
        converged=[True] * len(grid),
        label="front-determinant",
    )
    refined, argmin = _refine_majda(sp, scan.argmin)
    stable = refined >= cfg.threshold
    emit_plot_data(
        scan,
        out_dir,
        stem,
        extra={
            "refined_min": refined,
            "refined_argmin": _frequency_doc(argmin),
            "threshold": cfg.threshold,
            "stable": bool(stable),
        },
    )
    return scan, refined, stable


def _run_scan(cfg: JobConfig, out_dir) -> int:
    target = _resolve_target(cfg)
    if target[0] == "shock":
        sp = target[1]
        scan, refined, stable = _scan_shock(cfg, sp, out_dir)
        summary = {
            "grid_points": len(scan.grid),
            "grid_min": scan.min_value,
            "refined_min": refined,
            "stable": stable,
        }
        return _finish(cfg, out_dir, summary, 0 if stable else 1)
    if target[0] == "normal-form":
        _, bp, a, c = target[1:]
        grid = _sphere_grid(cfg, 2, include_zero=True)
        scan = uniform_scan(
            bp, None, grid=grid, gamma_floor=cfg.gamma_floor, label="oblique-2x2"
        )
        refined, argmin = refine_scan_minimum(bp, None, scan.argmin)
        stable = refined >= cfg.threshold
        closed_form = a * abs(c) < 1.0
        emit_plot_data(
            scan,
            out_dir,
            extra={
                "refined_min": refined,
                "refined_argmin": _frequency_doc(argmin),
                "threshold": cfg.threshold,
                "stable": bool(stable),
                "closed_form_stable": bool(closed_form),
            },
        )
        summary = {
            "grid_points": len(scan.grid),
            "grid_min": scan.min_value,
            "refined_min": refined,
            "stable": stable,
            "closed_form_stable": closed_form,
        }
        return _finish(cfg, out_dir, summary, 0 if stable else 1)
    raise ConfigError(
        "model: scan needs a shock JSON or the normal-form model "
        "(plain systems carry no boundary condition)"
    )


# --------------------------------------------------------------------- shock


def _shock_from_config(cfg: JobConfig):
    doc = cfg.config
    if "rho_minus" in doc:
        return models.shock_from_json(doc)
    if "upstream" not in doc:
        raise ConfigError(
            "config.upstream: required (either a serialized shock with "
            "rho_minus ... or a construction request)"
        )
    extra = set(doc) - {"upstream", "family", "strength"}
    if extra:
        raise ConfigError(f"config.{sorted(extra)[0]}: unknown shock field")
    if not isinstance(doc["upstream"], dict):
        raise ConfigError("config.upstream: must be an object (rho, u, H, pressure)")
    upstream = dict(doc["upstream"])
    # unspecified field means a gas-dynamic (zero-field) upstream here, not
    # the registry's magnetized default
    upstream.setdefault("H", [0.0, 0.0, 0.0])
    try:
        _, state = models.build("mhd", upstream)
    except ValueError as exc:
        raise ConfigError(f"config.upstream: {exc}") from exc
    family = doc.get("family", "fast")
    strength = doc.get("strength", 1.0)
    if not isinstance(strength, (int, float)) or not strength > 0:
        raise ConfigError(f"config.strength: must be a positive number, got {strength!r}")
    try:
        return models.construct_lax_shock(state, family, float(strength))
    except ValueError as exc:
        raise ConfigError(f"config.family: {exc}") from exc


def _shock_diagnostics(sp, rng) -> dict:
    resid = models.rh_residual(sp.minus, sp.plus, *reversed(sp.unit_front()))
    freq = Frequency(
        float(rng.uniform(-1, 1)), tuple(rng.uniform(-1, 1, 2)), float(rng.uniform(0.2, 1))
    )
    dims = models.lax_dimensions(sp, freq)
    return {
        "sigma": sp.sigma,
        "rh_residual_max": float(np.max(np.abs(resid))),
        "stable_dimensions": list(dims),
        "compression_ratio": sp.plus.rho / sp.minus.rho,
    }


def _run_shock(cfg: JobConfig, out_dir) -> int:
    sp = _shock_from_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    _write_json(
        os.path.join(out_dir, "shock.json"),
        {"problem": sp.to_dict(), "diagnostics": _shock_diagnostics(sp, rng)},
    )
    if cfg.sweep is None:
        scan, refined, stable = _scan_shock(cfg, sp, out_dir)
        summary = {
            "sigma": sp.sigma,
            "grid_min": scan.min_value,
            "refined_min": refined,
            "stable": stable,
        }
        return _finish(cfg, out_dir, summary, 0 if stable else 1)

    if cfg.compare_euler and float(np.linalg.norm(sp.minus.H)) > 0:
        raise ConfigError(
            "config: --compare-euler needs a zero-field (Euler) base shock"
        )
    grid = _sphere_grid(cfg, 3, include_zero=False)
    base_vals = np.asarray(
        _pmap(lambda z: models.majda_lopatinski(sp, z), grid, cfg.worker_count)
    )
    rows = []
    sups = []
    mins = []
    for h in cfg.sweep:
        if not h > 0:
            raise ConfigError(f"sweep: field magnitudes must be positive, got {h!r}")
        cont = models.continued_shock(sp, (float(h), 0.0, 0.0))
        vals = np.asarray(
            _pmap(lambda z: models.majda_lopatinski(cont, z), grid, cfg.worker_count)
        )
        sup = float(np.max(np.abs(vals - base_vals))) if cfg.compare_euler else None
        rows.append([h, float(np.min(vals))] + ([sup] if cfg.compare_euler else []))
        mins.append(float(np.min(vals)))
        if cfg.compare_euler:
            sups.append(sup)
    header = ["field_magnitude", "min_absD"] + (
        ["sup_diff_vs_euler"] if cfg.compare_euler else []
    )
    _write_csv(os.path.join(out_dir, "sweep.csv"), header, rows)
    monotone = all(a > b for a, b in zip(sups, sups[1:])) if len(sups) > 1 else True
    side = {
        "field_magnitudes": [float(h) for h in cfg.sweep],
        "min_absD": mins,
        "base_min_absD": float(np.min(base_vals)),
        "grid_points": len(grid),
    }
    if cfg.compare_euler:
        side.update({"sup_diff_vs_euler": sups, "monotone_convergence": bool(monotone)})
    _write_json(os.path.join(out_dir, "sweep.json"), side)
    negative = any(m < cfg.threshold for m in mins) or (
        cfg.compare_euler and not monotone
    )
    summary = {
        "sweep_points": len(rows),
        "worst_min_absD": min(mins),
    }
    if cfg.compare_euler:
        summary["final_sup_diff"] = sups[-1]
        summary["monotone_convergence"] = monotone
    return _finish(cfg, out_dir, summary, 1 if negative else 0)


# -------------------------------------------------------------------- verify


def _check(name: str, passed: bool, detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _verify_system(cfg: JobConfig, system, param, rng) -> list[dict]:
    checks = []
    fr = check_friedrichs(system, param)
    checks.append(
        _check(
            "friedrichs-symmetrizer",
            fr.passed,
            {"min_eigenvalue": fr.min_eigenvalue, "max_asymmetry": fr.max_asymmetry},
        )
    )
    samples = _random_frequencies(rng, system.d, 25)
    boundary = system.boundary_matrix(param)
    singular_boundary = (
        float(np.min(np.abs(np.linalg.eigvals(boundary))))
        <= 1e-12 * np.linalg.norm(boundary)
    )
    if singular_boundary:
        refused = False
        try:
            build_G(system, param, samples[0])
        except Singular:
            refused = True
        checks.append(
            _check(
                "characteristic-boundary-refused",
                refused,
                "boundary matrix singular; reduced symbol must be refused",
            )
        )
        dims_ok = True
        expected = positive_count(system, param)
        for freq in samples[:10]:
            dim = models.pencil_stable_space(system, param, freq).dim
            if dim != expected:
                dims_ok = False
        checks.append(
            _check(
                "pencil-stable-dimension",
                dims_ok,
                {"expected": expected},
            )
        )
        return checks
    cand = dissipative_symmetrizer(system, param)
    rep = verify_symmetrizer(cand, system, samples, p=param)
    checks.append(
        _check(
            "interior-identity",
            rep["passed"] and rep["worst_margin"] > -1e-12,
            {"worst_margin": rep["worst_margin"]},
        )
    )
    sgn = sign_check(cand, system, samples, p=param)
    checks.append(
        _check("stable-space-negativity", sgn["passed"], {"worst": sgn["worst"]})
    )
    if isinstance(param, models.MHDState) and system.n == 7:
        worst = 0.0
        for _ in range(20):
            omega = rng.uniform(-1.0, 1.0, 3)
            if np.linalg.norm(omega) < 1e-2:
                continue
            closed = np.sort(models.mhd_eigenvalues(param, omega))
            numeric = np.sort(np.linalg.eigvals(assemble(system, param, omega)).real)
            scale = max(1.0, float(np.max(np.abs(closed))))
            worst = max(worst, float(np.max(np.abs(closed - numeric))) / scale)
        checks.append(
            _check("wave-speed-closed-form", worst < 1e-9, {"worst_relative": worst})
        )
    return checks


def _verify_shock(cfg: JobConfig, sp, rng) -> list[dict]:
    checks = []
    normal, speed = sp.unit_front()
    resid = float(np.max(np.abs(models.rh_residual(sp.minus, sp.plus, speed, normal))))
    checks.append(_check("jump-conditions", resid < 1e-9, {"residual": resid}))
    dims_ok = True
    for freq in _random_frequencies(rng, 3, 10, gamma_lo=0.1):
        if sum(models.lax_dimensions(sp, freq)) != 6:
            dims_ok = False
    checks.append(_check("lax-dimension-count", dims_ok, {"expected_total": 6}))
    tp = models.shock_boundary_problem(sp)
    fr = check_friedrichs(tp.problem.sys, sp)
    checks.append(
        _check("doubled-friedrichs", fr.passed, {"min_eigenvalue": fr.min_eigenvalue})
    )
    ratios = []
    verdicts_agree = True
    for freq in _random_frequencies(rng, 3, 8, gamma_lo=0.1):
        full = models.majda_lopatinski(sp, freq)
        reduced = lopatinski_det(tp.problem, sp, freq)
        if (full >= cfg.threshold) != (reduced >= cfg.threshold * 1e-2):
            verdicts_agree = False
        if reduced > 0:
            ratios.append(full / reduced)
    spread = max(ratios) / min(ratios) if ratios else np.inf
    checks.append(
        _check(
            "front-vs-reduced-determinant",
            verdicts_agree and spread < 10.0,
            {"ratio_spread": spread},
        )
    )
    return checks


def _run_verify(cfg: JobConfig, out_dir) -> int:
    rng = np.random.default_rng(cfg.seed)
    target = _resolve_target(cfg)
    if target[0] == "normal-form":
        system, bp, a, c = target[1:]
        nf = two_by_two_normal_form(system.matrices(None)[1], system.matrices(None)[0])
        closed = two_by_two_lopatinski(nf, c)
        cand = dissipative_symmetrizer(system, None)
        samples = _random_frequencies(rng, 2, 20)
        report = verify_kreiss(cand, bp, samples, p=None)
        checks = [
            _check("closed-form-verdict", closed, {"a": a, "c": c, "product": a * abs(c)}),
            _check(
                "boundary-coercivity",
                report["passed"],
                {
                    "worst_full_margin": report["worst_full_margin"],
                    "worst_kernel_margin": report["worst_kernel_margin"],
                },
            ),
        ]
        agree = closed == report["passed"]
        checks.append(_check("routes-agree", agree, None))
    elif target[0] == "shock":
        checks = _verify_shock(cfg, target[1], rng)
    else:
        checks = _verify_system(cfg, target[1], target[2], rng)
    passed = all(c["passed"] for c in checks)
    _write_json(
        os.path.join(out_dir, "verify.json"),
        {"model": cfg.model, "checks": checks, "passed": passed},
    )
    summary = {c["name"]: ("pass" if c["passed"] else "FAIL") for c in checks}
    summary["all_passed"] = passed
    return _finish(cfg, out_dir, summary, 0 if passed else 1)


# --------------------------------------------------------------------- probe


def _probe_frequency(gamma: float) -> Frequency:
    # adversarial ray tau = -eta on the unit sphere at the requested gamma
    if not 0 < gamma <= 1:
        raise ConfigError(f"config.gammas: entries must lie in (0, 1], got {gamma!r}")
    rest = np.sqrt(max(0.0, (1.0 - gamma * gamma) / 2.0))
    return Frequency(-rest, (rest,), gamma)


def _run_probe(cfg: JobConfig, out_dir) -> int:
    if cfg.model != "normal-form":
        raise ConfigError("model: probe supports the normal-form model only")
    doc = dict(cfg.config)
    gammas = doc.pop("gammas", [1e-2, 1e-1, 1.0])
    samples = doc.pop("samples", 50)
    _, bp, a, c = _normal_form_target(doc)
    if not (isinstance(samples, int) and samples > 0):
        raise ConfigError(f"config.samples: must be a positive integer, got {samples!r}")
    if not isinstance(gammas, (list, tuple)) or not gammas:
        raise ConfigError("config.gammas: must be a nonempty list of numbers")
    rng = np.random.default_rng(cfg.seed)
    rows = []
    per_gamma = {}
    failed_at = None
    for gamma in gammas:
        freq = _probe_frequency(float(gamma))
        # the estimate weighs the forcing by 1/gamma, so sample data on the
        # sphere of that weighted norm: a sqrt(gamma) forcing amplitude keeps
        # both data terms comparable and lets the boundary amplification show
        amplitude = np.sqrt(float(gamma))
        ratios = []
        for k in range(samples):
            coeffs = amplitude * (
                rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            )
            rates = rng.uniform(0.3, 3.0, 2)
            datum = complex(rng.standard_normal() + 1j * rng.standard_normal())

            def forcing(x, _c=coeffs, _r=rates):
                decay = np.exp(-_r * x)
                return _c[0] * decay + _c[1] * x * decay

            try:
                probe = estimate_probe(bp, None, freq, forcing, [datum])
            except LopatinskiFailureAtPoint as exc:
                failed_at = {"gamma": float(gamma), "reason": str(exc)}
                break
            rows.append([float(gamma), k, float(probe.ratio)])
            ratios.append(float(probe.ratio))
        if failed_at:
            break
        per_gamma[float(gamma)] = {
            "max_ratio": max(ratios),
            "median_ratio": float(np.median(ratios)),
        }
    _write_csv(os.path.join(out_dir, "probe.csv"), ["gamma", "sample", "ratio"], rows)
    side = {
        "a": a,
        "c": c,
        "closed_form_stable": bool(a * abs(c) < 1.0),
        "per_gamma": {f"{g:.17g}": v for g, v in per_gamma.items()},
        "samples": samples,
        "failure": failed_at,
    }
    _write_json(os.path.join(out_dir, "probe.json"), side)
    worst = max((v["max_ratio"] for v in per_gamma.values()), default=np.inf)
    summary = {
        "frequencies": len(gammas),
        "worst_ratio": worst,
        "bounded": failed_at is None and np.isfinite(worst),
    }
    return _finish(cfg, out_dir, summary, 0 if summary["bounded"] else 1)


# ---------------------------------------------------------------------- demo


def _run_demo(cfg: JobConfig, out_dir) -> int:
    results = {}
    # stable oblique 2x2 problem: coarse scan plus closed form
    sub_dir = os.path.join(out_dir, "oblique")
    os.makedirs(sub_dir, exist_ok=True)
    sub = JobConfig(
        command="scan",
        model="normal-form",
        config={"a": 1.4, "c": 0.3},
        out=sub_dir,
        grid=80,
        gamma_floor=cfg.gamma_floor,
        seed=cfg.seed,
        threads=cfg.threads,
    )
    results["oblique_scan_exit"] = _run_scan(sub, sub_dir)
    # gas-dynamic Lax shock: construct and scan coarsely
    sub_dir = os.path.join(out_dir, "shock")
    os.makedirs(sub_dir, exist_ok=True)
    sub = JobConfig(
        command="shock",
        model=None,
        config={"upstream": {"rho": 1.0}, "family": "fast", "strength": 1.0},
        out=sub_dir,
        grid=80,
        gamma_floor=cfg.gamma_floor,
        seed=cfg.seed,
        threads=cfg.threads,
    )
    results["shock_exit"] = _run_shock(sub, sub_dir)
    # conical degeneracy of the default crystal
    roots = models.maxwell_double_roots(models.BiaxialCrystal(), check_points=15)
    _write_json(
        os.path.join(out_dir, "crystal.json"),
        {
            "double_roots": [
                {
                    "direction": [float(v) for v in r.direction],
                    "tau": r.tau,
                    "normal_form_a": r.normal_form.a,
                }
                for r in roots
            ]
        },
    )
    results["crystal_double_roots"] = len(roots)
    negative = any(v != 0 for k, v in results.items() if k.endswith("_exit"))
    return _finish(cfg, out_dir, results, 1 if negative else 0)


# ---------------------------------------------------------------- dispatcher


_RUNNERS = {
    "classify": _run_classify,
    "scan": _run_scan,
    "shock": _run_shock,
    "verify": _run_verify,
    "probe": _run_probe,
    "demo": _run_demo,
}


def run(config: JobConfig) -> int:
    """Execute one job; writes artifacts and returns the exit status."""
    out_dir = os.path.abspath(config.out)
    os.makedirs(out_dir, exist_ok=True)
    return _RUNNERS[config.command](config, out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypstab",
        description=(
            "Stability analysis for hyperbolic boundary and shock problems: "
            "root classification, Lopatinski scans, shock construction, "
            "symmetrizer verification, energy-estimate probes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "classify": "classify characteristic roots at a frequency point",
        "scan": "minimum determinant modulus over a frequency grid",
        "shock": "construct or load a shock; scan or sweep its determinant",
        "verify": "run the model's structural checks or boundary coercivity",
        "probe": "measure the maximal energy-estimate ratio on random data",
        "demo": "small end-to-end run exercising the main commands",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "--model",
            help="registry name (mhd, euler-isentropic, maxwell-biaxial), "
            "'normal-form', or a path to a JSON document",
        )
        p.add_argument(
            "--config",
            help="JSON object or path: model parameters / problem description",
        )
        p.add_argument("--out", default="hypstab-out", help="output directory")
        p.add_argument(
            "--grid", type=int, default=320, help="approximate grid point count"
        )
        p.add_argument("--gamma-floor", type=float, default=1e-3)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--threads",
            type=int,
            default=0,
            help="worker threads (0: HYPSTAB_THREADS or 1)",
        )
        p.add_argument(
            "--threshold",
            type=float,
            default=1e-6,
            help="determinant modulus below which a point counts as a failure",
        )
        if name == "classify":
            p.add_argument(
                "--point",
                required=True,
                help='JSON object or path: {"xi": [...], "tau": optional}',
            )
        if name == "shock":
            p.add_argument(
                "--sweep",
                nargs=2,
                metavar=("FIELD", "RANGE"),
                help="sweep the upstream field magnitude, e.g. 'H 1e-1..1e-4'",
            )
            p.add_argument(
                "--compare-euler",
                action="store_true",
                help="tabulate sup |D_H - D_0| against the zero-field base",
            )
    return parser


def _parse_sweep(raw) -> list[float]:
    field_name, range_text = raw
    if field_name != "H":
        raise ConfigError(f"sweep: only the field magnitude 'H' is supported, got {field_name!r}")
    try:
        if ".." in range_text:
            top_text, bottom_text = range_text.split("..", 1)
            ladder = geometric_ladder(float(top_text), float(bottom_text), per_decade=1)
            return [float(v) for v in ladder]
        return [float(v) for v in range_text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"sweep: malformed range {range_text!r}: {exc}") from exc


def config_from_args(args: argparse.Namespace) -> JobConfig:
    config = _load_json_doc(args.config, "config") if args.config else {}
    point = None
    if getattr(args, "point", None) is not None:
        point = _load_json_doc(args.point, "point")
    sweep = None
    if getattr(args, "sweep", None) is not None:
        sweep = _parse_sweep(args.sweep)
    return JobConfig(
        command=args.command,
        model=args.model,
        config=config,
        point=point,
        sweep=sweep,
        compare_euler=bool(getattr(args, "compare_euler", False)),
        out=args.out,
        grid=args.grid,
        gamma_floor=args.gamma_floor,
        seed=args.seed,
        threads=args.threads,
        threshold=args.threshold,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        return run(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=_sys.stderr)
        return 2
    except HypstabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
