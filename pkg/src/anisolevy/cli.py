"""Command-line driver: config parsing, presets, experiments and reproducible output.

Usage::

    anisolevy run.yaml --seed 3 --paths 200 --experiment moments
    anisolevy --preset anisotropic-1d --experiment check-assumptions --out runs/check

Exit status is 0 iff every check selected by the experiment passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .estimates import (
    EnsembleError,
    continuous_dependence,
    estimate_moments,
    pathwise_uniqueness_check,
    refinement_convergence,
)
from .mesh import GridError, build_grid
from .model import (
    ANISOTROPIC,
    PRESETS,
    QUASILINEAR,
    ConfigurationError,
    LevyMeasureSpec,
    ModelSpec,
    quasilinear_scenario,
)
from .noise import sample_path, truncation_bias_probe
from .operators import assumption_suite, check_hemicontinuity, random_grid_function
from .stepper import SimulationError, SolverConfig, integrate

log = logging.getLogger("anisolevy")

EXPERIMENTS = ("simulate", "check-assumptions", "moments", "dependence", "convergence", "uniqueness", "noise-probe")
PRESET_NAMES = (*PRESETS, "quasilinear-case1")

REQUIRED_KEYS = (
    "scenario", "grid.d", "grid.n", "time.T", "time.steps", "model.p", "model.p0", "model.zeta",
    "model.J", "noise.alpha", "noise.eps", "noise.lambda_large", "ensemble.M", "ensemble.seed",
    "experiment", "out_dir",
)

# optional keys and their defaults
OPTIONAL_KEYS = {
    "model.p2": 3.0,
    "model.delta": 0.1,
    "model.f": None,
    "noise.c": 0.2,
    "noise.skew": 0.0,
    "ensemble.workers": 1,
    "solver.newton_tol": 1e-10,
    "solver.max_iters": 100,
    "solver.explicit": False,
    "moments.p": 2.0,
    "dependence.deltas": [1e-1, 1e-2, 1e-3],
    "dependence.p": 2.0,
    "convergence.levels": 3,
    "convergence.noise": False,
    "checks.trials": 200,
    "noise_probe.eps": [0.1, 0.05, 0.025, 0.0125],
    "verbosity": 0,
}

_PRESET_DEFAULTS = {
    "anisotropic-1d": {"grid.n": 64, "time.steps": 40},
    "anisotropic-2d": {"grid.n": 16, "time.steps": 20},
    "quasilinear-case1": {"grid.n": 63, "time.steps": 40},
}


def _preset_flat(name: str) -> dict:
    if name == "quasilinear-case1":
        model = {"d": 1, "p": [3.0], "p0": 6.0, "zeta": [0.3], "p2": 3.0}
    else:
        base = PRESETS[name]
        model = {"d": base["d"], "p": list(base["p"]), "p0": base["p0"], "zeta": list(base["zeta"])}
    nu = LevyMeasureSpec()
    flat = {
        "scenario": name, "grid.d": model["d"], "time.T": 0.2, "model.p": model["p"],
        "model.p0": model["p0"], "model.zeta": model["zeta"], "model.J": 4,
        "noise.alpha": nu.alpha, "noise.eps": nu.eps, "noise.lambda_large": nu.lambda_large,
        "ensemble.M": 100, "ensemble.seed": 0, "experiment": "simulate", "out_dir": "runs",
        **_PRESET_DEFAULTS[name],
    }
    if "p2" in model:
        flat["model.p2"] = model["p2"]
    return flat


def _flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    spec: ModelSpec
    d: int
    n: int
    T: float
    steps: int
    M: int
    seed: int
    experiment: str
    out_dir: Path
    solver: SolverConfig = SolverConfig()
    workers: int = 1
    verbosity: int = 0
    options: dict = field(default_factory=dict)

    @property
    def spec_hash(self) -> str:
        return self.spec.spec_hash(self.canonical(include_spec=False))

    def canonical(self, include_spec: bool = True) -> dict:
        """Everything that determines the outputs, except the seed and output location."""
        out = {
            "scenario": self.scenario, "grid": {"d": self.d, "n": self.n},
            "time": {"T": self.T, "steps": self.steps}, "ensemble": {"M": self.M},
            "experiment": self.experiment, "solver": asdict(self.solver), "options": self.options,
        }
        if include_spec:
            out["model"] = self.spec.to_dict()
        return out


# -- parsing ----------------------------------------------------------------------------

def _num(key, v, kind=float, lo=None, lo_strict=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{key}: expected a number, got {v!r}")
    if kind is int and float(v) != int(v):
        raise ConfigurationError(f"{key}: expected an integer, got {v!r}")
    v = kind(v)
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigurationError(f"{key}: must be finite, got {v!r}")
    if lo is not None and (v <= lo if lo_strict else v < lo):
        raise ConfigurationError(f"{key}: must be {'>' if lo_strict else '>='} {lo}, got {v!r}")
    return v


def _vec(key, v, d):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v] * d
    if not isinstance(v, (list, tuple)):
        raise ConfigurationError(f"{key}: expected a list of {d} numbers, got {v!r}")
    if len(v) != d:
        raise ConfigurationError(f"{key}: expected {d} entries (grid.d = {d}), got {len(v)}")
    return tuple(_num(f"{key}[{i}]", x) for i, x in enumerate(v))


def _load_file(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file {p} does not exist")
    try:
        tree = yaml.safe_load(p.read_text())
    except yaml.YAMLError as err:
        raise ConfigurationError(f"config file {p} is not valid YAML: {err}") from err
    if tree is None:
        raise ConfigurationError(f"config file {p} is empty; required keys: {', '.join(REQUIRED_KEYS)}")
    if not isinstance(tree, dict):
        raise ConfigurationError(f"config file {p}: top level must be a mapping")
    return _flatten(tree)


def parse_overrides(items) -> dict:
    """``key=value`` strings; values are read as YAML scalars or lists."""
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(v)
    return out


def parse_config(path=None, overrides: dict | None = None, preset: str | None = None, smoke: bool = True) -> RunConfig:
    """Merge preset < file < overrides, validate, and run the smoke assumption suite."""
    flat: dict = {}
    file_keys = _load_file(path) if path is not None else {}
    name = preset or file_keys.get("scenario") or (overrides or {}).get("scenario")
    if name in PRESET_NAMES:
        flat.update(_preset_flat(name))
    elif preset is not None:
        raise ConfigurationError(f"--preset: unknown preset {preset!r}; choose from {list(PRESET_NAMES)}")
    flat.update(file_keys)
    flat.update(overrides or {})
    if not flat:
        raise ConfigurationError(f"no configuration given; required keys: {', '.join(REQUIRED_KEYS)}")
    unknown = sorted(set(flat) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in flat]
    if missing:
        raise ConfigurationError(f"missing required keys: {', '.join(missing)}")
    opt = {k: flat.get(k, v) for k, v in OPTIONAL_KEYS.items()}

    scenario = flat["scenario"]
    if scenario not in (*PRESET_NAMES, ANISOTROPIC, QUASILINEAR):
        raise ConfigurationError(
            f"scenario: unknown value {scenario!r}; use a preset {list(PRESET_NAMES)} or "
            f"{ANISOTROPIC!r} / {QUASILINEAR!r}"
        )
    d = _num("grid.d", flat["grid.d"], int)
    if d not in (1, 2):
        raise ConfigurationError(f"grid.d: must be 1 or 2, got {d}")
    n = _num("grid.n", flat["grid.n"], int, lo=2)
    T = _num("time.T", flat["time.T"], lo=0, lo_strict=True)
    steps = _num("time.steps", flat["time.steps"], int, lo=1)
    M = _num("ensemble.M", flat["ensemble.M"], int, lo=1)
    seed = _num("ensemble.seed", flat["ensemble.seed"], int, lo=0)
    experiment = flat["experiment"]
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"experiment: unknown value {experiment!r}; choose from {list(EXPERIMENTS)}")
    if not isinstance(flat["out_dir"], str) or not flat["out_dir"]:
        raise ConfigurationError(f"out_dir: expected a path string, got {flat['out_dir']!r}")

    p = _vec("model.p", flat["model.p"], d)
    zeta = _vec("model.zeta", flat["model.zeta"], d)
    p0 = _num("model.p0", flat["model.p0"], lo=2)
    J = _num("model.J", flat["model.J"], int, lo=1)
    try:
        nu = LevyMeasureSpec(
            alpha=_num("noise.alpha", flat["noise.alpha"]),
            eps=_num("noise.eps", flat["noise.eps"]),
            lambda_large=_num("noise.lambda_large", flat["noise.lambda_large"]),
            c=_num("noise.c", opt["noise.c"]),
            skew=_num("noise.skew", opt["noise.skew"]),
        )
        common = dict(J=J, nu=nu, delta=_num("model.delta", opt["model.delta"], lo=0))
        if opt["model.f"] is not None:
            common["f"] = _num("model.f", opt["model.f"], lo=0)
        if scenario in (QUASILINEAR, "quasilinear-case1"):
            if len(set(p)) != 1 or len(set(zeta)) != 1:
                raise ConfigurationError("model.p / model.zeta: quasi-linear scenario takes one p1 and one zeta")
            spec = quasilinear_scenario(
                p1=p[0], p2=_num("model.p2", opt["model.p2"]), d=d, p0=p0, zeta=zeta[0], **common
            )
        else:
            spec = ModelSpec(d=d, p=p, p0=p0, zeta=zeta, **common).validate()
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigurationError(str(err)) from err
    if not math.isfinite(spec.h.tail_sq(J)):
        raise ConfigurationError("model.J: h family is not square-summable")

    solver = SolverConfig(
        newton_tol=_num("solver.newton_tol", opt["solver.newton_tol"], lo=0, lo_strict=True),
        max_iters=_num("solver.max_iters", opt["solver.max_iters"], int, lo=1),
        explicit=bool(opt["solver.explicit"]),
    )
    options = {
        "moments.p": _num("moments.p", opt["moments.p"], lo=2),
        "dependence.deltas": [_num("dependence.deltas", x, lo=0) for x in opt["dependence.deltas"]],
        "dependence.p": _num("dependence.p", opt["dependence.p"], lo=2),
        "convergence.levels": _num("convergence.levels", opt["convergence.levels"], int, lo=2),
        "convergence.noise": bool(opt["convergence.noise"]),
        "checks.trials": _num("checks.trials", opt["checks.trials"], int, lo=1),
        "noise_probe.eps": [_num("noise_probe.eps", x, lo=0, lo_strict=True) for x in opt["noise_probe.eps"]],
    }
    if options["moments.p"] > p0:
        raise ConfigurationError(f"moments.p: {options['moments.p']} exceeds model.p0 = {p0}")
    cfg = RunConfig(
        scenario=scenario, spec=spec, d=d, n=n, T=T, steps=steps, M=M, seed=seed,
        experiment=experiment, out_dir=Path(flat["out_dir"]), solver=solver,
        workers=_num("ensemble.workers", opt["ensemble.workers"], int, lo=1),
        verbosity=_num("verbosity", opt["verbosity"], int, lo=0), options=options,
    )
    if smoke:
        _smoke(cfg)
    return cfg


def _smoke(cfg: RunConfig):
    """16 random pairs through the residual suite on a small grid."""
    try:
        grid = build_grid(cfg.d, min(cfg.n, 16))
    except GridError as err:
        raise ConfigurationError(f"grid.n: {err}") from err
    bad = [r for r in assumption_suite(cfg.spec, grid, 16, seed=0) if not r["pass"]]
    if bad:
        r = bad[0]
        raise ConfigurationError(
            f"smoke assumption suite failed: {r['check']} residual {r['residual']:.3g} > tol * {r['scale']:.3g}"
        )


# -- experiments ------------------------------------------------------------------------

def _u0(grid):
    def bump(*xs):
        out = np.ones_like(xs[0])
        for x in xs:
            out = out * np.sin(np.pi * x)
        return out

    return grid.sample(bump)


def _direction(grid):
    def shape(*xs):
        out = np.ones_like(xs[0])
        for x in xs:
            out = out * x * (1.0 - x) * (1.0 + np.sin(2.0 * np.pi * x))
        return out

    return grid.sample(shape)


def _finite(*xs) -> bool:
    return all(np.all(np.isfinite(np.asarray(x, dtype=float))) for x in xs)


class _Outputs:
    """One writer per output file; every JSON-lines record carries the spec hash."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.hash = cfg.spec_hash
        self.stem = f"{cfg.experiment}-{self.hash}-s{cfg.seed}"
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        self.records: list[dict] = []
        self.files: list[str] = []

    def emit(self, event: str, **payload):
        self.records.append({"spec_hash": self.hash, "event": event, **payload})

    def write_csv(self, header, rows, suffix="summary"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
        self._write(f"{self.stem}-{suffix}.csv", buf.getvalue())

    def write_json(self, obj, suffix="report"):
        self._write(f"{self.stem}-{suffix}.json", json.dumps(obj, indent=2, default=float) + "\n")

    def write_bytes(self, name, data: bytes):
        (self.cfg.out_dir / name).write_bytes(data)
        self.files.append(name)

    def _write(self, name, text):
        (self.cfg.out_dir / name).write_text(text)
        self.files.append(name)

    def flush(self):
        text = "".join(json.dumps(r, sort_keys=True, default=float) + "\n" for r in self.records)
        self._write(f"{self.stem}.jsonl", text)


def _simulate(cfg: RunConfig, out: _Outputs) -> bool:
    grid = build_grid(cfg.d, cfg.n)
    u0 = _u0(grid)
    rows = []
    for idx in range(cfg.M):
        path = sample_path(cfg.spec, cfg.T, cfg.steps, cfg.seed, idx)
        try:
            tr = integrate(u0, path, cfg.spec, cfg.solver)
        except SimulationError as err:
            out.emit(
                "failure", path_index=idx, step=err.step, error=type(err).__name__, message=str(err),
                history=[float(x) for x in err.history],
            )
            return False
        for k in range(len(tr.times)):
            rec = {
                "path_index": idx, "k": k, "t": float(tr.times[k]), "l2": float(tr.l2[k]),
                "energy": float(tr.energy[k]), "newton_iters": int(tr.newton_iters[k]),
                "residual": float(tr.residual[k]), "jump": bool(tr.jump[k]),
            }
            out.emit("state", **rec)
            rows.append([idx, rec["t"], rec["l2"], rec["energy"], rec["newton_iters"], int(rec["jump"])])
        if idx == 0:
            buf = io.BytesIO()
            tr.dump_states(buf)
            out.write_bytes(f"{out.stem}-path0.gfn", buf.getvalue())
    out.write_csv(("path_index", "t", "l2", "energy", "newton_iters", "jump"), rows)
    return True


def _check_assumptions(cfg: RunConfig, out: _Outputs) -> bool:
    grid = build_grid(cfg.d, cfg.n)
    recs = assumption_suite(cfg.spec, grid, cfg.options["checks.trials"], cfg.seed)
    for r in recs:
        out.emit("residual", **r)
    rng = np.random.default_rng(cfg.seed)
    u, w, v = (random_grid_function(grid, rng, amplitude=1.0) for _ in range(3))
    jumps = [check_hemicontinuity(u, w, v, cfg.spec, delta=dl) for dl in (1e-2, 1e-3)]
    # continuity: shrinking the step shrinks the largest increment
    hemi_ok = jumps[1] < jumps[0] or jumps[0] == 0
    out.emit("hemicontinuity", max_jump=jumps, **{"pass": bool(hemi_ok)})
    by_check: dict = {}
    for r in recs:
        s = by_check.setdefault(r["check"], {"trials": 0, "failures": 0, "worst": -math.inf})
        s["trials"] += 1
        s["failures"] += int(not r["pass"])
        s["worst"] = max(s["worst"], r["residual"] / r["scale"])
    out.write_csv(
        ("check", "trials", "failures", "worst_relative_residual"),
        [(k, s["trials"], s["failures"], s["worst"]) for k, s in sorted(by_check.items())],
    )
    return hemi_ok and all(r["pass"] for r in recs)


def _moments(cfg: RunConfig, out: _Outputs) -> bool:
    u0 = _u0(build_grid(cfg.d, cfg.n))
    rep = estimate_moments(
        cfg.spec, u0, max(cfg.M, 2), cfg.options["moments.p"], cfg.seed, cfg.T, cfg.steps,
        cfg.solver, cfg.workers,
    )
    out.emit("moments", **rep.summary())
    buf = io.StringIO()
    rep.write_csv(buf)
    out._write(f"{out.stem}-summary.csv", buf.getvalue())
    out.write_json(rep.summary())
    return _finite(rep.sup_moment, rep.energy_integral, rep.implied_C)


def _dependence(cfg: RunConfig, out: _Outputs) -> bool:
    grid = build_grid(cfg.d, cfg.n)
    rep = continuous_dependence(
        cfg.spec, _u0(grid), _direction(grid), cfg.options["dependence.deltas"], cfg.M,
        cfg.options["dependence.p"], cfg.seed, cfg.T, cfg.steps, cfg.solver, cfg.workers,
    )
    out.emit("dependence", **rep.summary())
    out.write_csv(
        ("delta", "numerator", "numerator_stderr", "initial_gap", "ratio", "final_ratio", "p0_ratio"),
        zip(rep.deltas, rep.numerators, rep.numerator_stderr, rep.initial_gaps, rep.ratios, rep.final_ratios,
            rep.p0_ratios),
    )
    out.write_json(rep.summary())
    finite = [r for r, dl in zip(rep.ratios, rep.deltas) if dl > 0]
    return _finite(finite)


def _convergence(cfg: RunConfig, out: _Outputs) -> bool:
    res = [cfg.n]
    for _ in range(cfg.options["convergence.levels"] - 1):
        res.append(2 * res[-1] + 1)

    def u0_fn(*xs):
        out_ = np.ones_like(xs[0])
        for x in xs:
            out_ = out_ * np.sin(np.pi * x)
        return out_

    rows = refinement_convergence(
        cfg.spec, u0_fn, res, cfg.seed if cfg.options["convergence.noise"] else None,
        cfg.T, cfg.steps, cfg.solver,
    )
    for r in rows:
        out.emit("refinement", **r)
    out.write_csv(
        ("n_coarse", "n_fine", "error", "order"),
        [(r["n_coarse"], r["n_fine"], r["error"], r.get("order", float("nan"))) for r in rows],
    )
    errs = [r["error"] for r in rows]
    return all(b < a for a, b in zip(errs[:-1], errs[1:]))


def _uniqueness(cfg: RunConfig, out: _Outputs) -> bool:
    u0 = _u0(build_grid(cfg.d, cfg.n))
    disc = pathwise_uniqueness_check(cfg.spec, u0, cfg.seed, cfg.T, cfg.steps, 0, cfg.solver)
    out.emit("uniqueness", discrepancy=disc, **{"pass": disc == 0.0})
    out.write_csv(("seed", "path_index", "discrepancy"), [(cfg.seed, 0, disc)])
    return disc == 0.0


def _noise_probe(cfg: RunConfig, out: _Outputs) -> bool:
    rows = truncation_bias_probe(cfg.spec, cfg.options["noise_probe.eps"])
    ok = True
    for r in rows:
        agree = abs(r["omitted_variance"] - r["closed_form"]) <= 1e-8 * max(1.0, abs(r["closed_form"]))
        ok &= agree
        out.emit("truncation", **r, **{"pass": bool(agree)})
    dw, n_large = [], 0
    for idx in range(cfg.M):
        path = sample_path(cfg.spec, cfg.T, cfg.steps, cfg.seed, idx)
        dw.append((path.dW**2 / path.dt[:, None]).ravel())
        n_large += len(path.large_jump_nodes)
    dw = np.concatenate(dw)
    out.emit(
        "noise_stats", wiener_variance_ratio=float(dw.mean()), wiener_samples=int(dw.size),
        large_jump_rate=n_large / (cfg.M * cfg.T), expected_rate=cfg.spec.nu.lambda_large,
    )
    out.write_csv(
        ("eps", "omitted_variance", "closed_form", "fraction", "intensity"),
        [(r["eps"], r["omitted_variance"], r["closed_form"], r["fraction"], r["intensity"]) for r in rows],
    )
    return bool(ok)


_RUNNERS = {
    "simulate": _simulate,
    "check-assumptions": _check_assumptions,
    "moments": _moments,
    "dependence": _dependence,
    "convergence": _convergence,
    "uniqueness": _uniqueness,
    "noise-probe": _noise_probe,
}


def run(cfg: RunConfig) -> int:
    """Run the selected experiment; write records, summary tables and a manifest."""
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    out = _Outputs(cfg)
    try:
        ok = _RUNNERS[cfg.experiment](cfg, out)
    except (EnsembleError, SimulationError, ConfigurationError) as err:
        out.emit("failure", error=type(err).__name__, message=str(err))
        ok = False
    out.flush()
    manifest = {
        "spec_hash": out.hash,
        "seed": cfg.seed,
        "experiment": cfg.experiment,
        "status": "pass" if ok else "fail",
        "config": cfg.canonical(),
        "outputs": out.files,
        "versions": {
            "anisolevy": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
        },
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - t0,
    }
    (cfg.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    log.info("%s: %s (%s)", cfg.experiment, manifest["status"], cfg.out_dir)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisolevy", description=__doc__.split("\n\n")[0])
    ap.add_argument("config", nargs="?", help="YAML config file")
    ap.add_argument("--preset", choices=PRESET_NAMES)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--paths", type=int, help="ensemble size M")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--explicit", action="store_true", help="explicit drift (debugging only)")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = parse_overrides(args.set)
    for key, val in (
        ("ensemble.seed", args.seed), ("ensemble.M", args.paths), ("experiment", args.experiment),
        ("out_dir", args.out), ("ensemble.workers", args.workers),
    ):
        if val is not None:
            overrides[key] = val
    if args.explicit:
        overrides["solver.explicit"] = True
    if args.verbose:
        overrides["verbosity"] = args.verbose
    try:
        cfg = parse_config(args.config, overrides, args.preset)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(cfg.verbosity, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
