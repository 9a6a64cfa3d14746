"""Monte Carlo experiments mirroring the well-posedness estimates.

All ensembles are keyed by ``(seed, path_index)``; results are merged in
path-index order, so they do not depend on how the work was scheduled.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .mesh import GridFunction, build_grid, diff_values, from_record, lp_norm, to_record
from .model import ConfigurationError, GammaFamily, HFamily, ModelSpec, heat_spec, quasilinear_scenario  # noqa: F401
from .noise import sample_path
from .stepper import SimulationError, SolverConfig, integrate

log = logging.getLogger(__name__)


class EnsembleError(RuntimeError):
    def __init__(self, message, seed, path_index):
        super().__init__(message)
        self.seed, self.path_index = seed, path_index


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))


def _run(spec, u0, T, n_steps, seed, idx, cfg):
    try:
        return integrate(u0, sample_path(spec, T, n_steps, seed, idx), spec, cfg)
    except SimulationError as err:
        raise EnsembleError(f"path {idx} (seed {seed}) failed: {err}", seed, idx) from err


def _path_stats(args):
    spec, u0, T, n_steps, seed, idx, cfg, p = args
    tr = _run(spec, u0, T, n_steps, seed, idx, cfg)
    dt = np.diff(tr.times)
    uniform = np.isin(tr.times, np.linspace(0.0, T, n_steps + 1))
    return {
        "sup": float(np.max(tr.l2**p)),
        "energy": float(np.sum(dt * tr.energy[1:])),
        "weighted": float(np.sum(dt * tr.l2[1:] ** (spec.p0 - 2.0) * tr.energy[1:])),
        "l2sq": tr.l2[uniform] ** 2,
        "en": tr.energy[uniform],
    }


def _map(fn, jobs, workers: int | None):
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(j) for j in jobs]


@dataclass
class MomentReport:
    M: int
    p: float
    sup_moment: float
    sup_stderr: float
    energy_integral: float
    energy_stderr: float
    weighted_energy: float
    weighted_stderr: float
    rhs_budget: float
    implied_C: float
    unproven_regime: bool
    seed: int
    spec_hash: str
    deterministic: bool
    times: np.ndarray = field(repr=False)
    mean_l2sq: np.ndarray = field(repr=False)
    stderr_l2sq: np.ndarray = field(repr=False)
    mean_energy: np.ndarray = field(repr=False)
    stderr_energy: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        for k in ("times", "mean_l2sq", "stderr_l2sq", "mean_energy", "stderr_energy"):
            d.pop(k)
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)

    CSV_HEADER = ("t", "mean_l2sq", "stderr_l2sq", "mean_energy", "stderr_energy")

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(self.CSV_HEADER)
        for row in zip(self.times, self.mean_l2sq, self.stderr_l2sq, self.mean_energy, self.stderr_energy):
            w.writerow([repr(float(x)) for x in row])


def estimate_moments(
    spec: ModelSpec,
    u0: GridFunction,
    M: int,
    p: float,
    seed: int,
    T: float = 0.2,
    n_steps: int = 40,
    cfg: SolverConfig = SolverConfig(),
    workers: int | None = None,
) -> MomentReport:
    """Monte Carlo estimates of ``E sup_t |u_t|^p`` and the energy integrals."""
    if M < 2:
        raise ValueError("need at least M = 2 paths")
    if p < 2 or p > spec.p0:
        raise ValueError(f"moment exponent must lie in [2, p0 = {spec.p0}], got {p}")
    outside = spec.p0 > 2 and p >= spec.p0
    deterministic = not spec.has_noise
    idx = [0] if deterministic else list(range(M))
    stats = _map(_path_stats, [(spec, u0, T, n_steps, seed, i, cfg, p) for i in idx], workers)

    sup = np.array([s["sup"] for s in stats])
    en = np.array([s["energy"] for s in stats])
    we = np.array([s["weighted"] for s in stats])
    l2sq = np.array([s["l2sq"] for s in stats])
    ens = np.array([s["en"] for s in stats])
    (sm, sse), (em, ese), (wm, wse) = _mean_se(sup), _mean_se(en), _mean_se(we)
    if deterministic:
        sse = ese = wse = 0.0

    budget = lp_norm(u0, 2) ** spec.p0 + T * spec.f ** (spec.p0 / 2.0)
    num = sm + em
    implied = 0.0 if num == 0 else (num / budget if budget > 0 else float("inf"))
    se_t = (lambda a: np.zeros(a.shape[1])) if deterministic or len(stats) < 2 else (
        lambda a: a.std(axis=0, ddof=1) / np.sqrt(len(a))
    )
    return MomentReport(
        M=M, p=p, sup_moment=sm, sup_stderr=sse, energy_integral=em, energy_stderr=ese,
        weighted_energy=wm, weighted_stderr=wse, rhs_budget=budget, implied_C=implied,
        unproven_regime=outside, seed=seed, deterministic=deterministic,
        spec_hash=spec.spec_hash({"grid": list(u0.grid.n_per_axis), "T": T, "steps": n_steps}),
        times=np.linspace(0.0, T, n_steps + 1), mean_l2sq=l2sq.mean(axis=0), stderr_l2sq=se_t(l2sq),
        mean_energy=ens.mean(axis=0), stderr_energy=se_t(ens),
    )


def pathwise_uniqueness_check(
    spec: ModelSpec,
    u0: GridFunction,
    seed: int,
    T: float = 0.2,
    n_steps: int = 40,
    path_index: int = 0,
    cfg: SolverConfig = SolverConfig(),
    other_seed: int | None = None,
    other_index: int | None = None,
) -> float:
    """``sup_t |u_t - ubar_t|_2`` for two runs built from scratch.

    With the defaults both runs see identical inputs and the answer is exactly
    zero; ``other_seed`` / ``other_index`` perturb the second run's noise.
    """
    a = integrate(u0, sample_path(spec, T, n_steps, seed, path_index), spec, cfg)
    spec_b = ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    u0_b = from_record(json.loads(json.dumps(to_record(u0))))
    cfg_b = SolverConfig(**asdict(cfg))
    path_b = sample_path(
        spec_b, T, n_steps,
        seed if other_seed is None else other_seed,
        path_index if other_index is None else other_index,
    )
    b = integrate(u0_b, path_b, spec_b, cfg_b)
    if len(a.times) != len(b.times) or np.any(a.times != b.times):
        # jump-adapted grids differ: compare on the common uniform nodes
        common = np.intersect1d(a.times, b.times)
        sa, sb = a.states[np.isin(a.times, common)], b.states[np.isin(b.times, common)]
    else:
        sa, sb = a.states, b.states
    vol = u0.grid.cell_volume
    diff = (sa - sb).reshape(len(sa), -1)
    return float(np.max(np.sqrt(np.sum(diff * diff, axis=1) * vol)))


@dataclass
class DependenceReport:
    deltas: list
    numerators: list        # E sup_t |u - ubar|^p
    numerator_stderr: list
    energy_gaps: list       # E sum_i int |D_i(u - ubar)|^{p_i} dt
    initial_gaps: list      # |u0 - ubar0|_2 (exact)
    ratios: list            # numerator / |u0 - ubar0|^p
    final_ratios: list      # E |u_T - ubar_T|^p / |u0 - ubar0|^p
    p0_ratios: list      # (numerator + energy gap) / |u0 - ubar0|^p0
    M: int
    p: float
    seed: int

    def summary(self) -> dict:
        return asdict(self)


def _dependence_path(args):
    spec, u0, direction, deltas, T, n_steps, seed, idx, cfg, p = args
    path = sample_path(spec, T, n_steps, seed, idx)
    base = integrate(u0, path, spec, cfg)
    vol = u0.grid.cell_volume
    h = u0.grid.h_per_axis
    dt = np.diff(base.times)
    sups, gaps, finals = [], [], []
    for dlt in deltas:
        if dlt == 0:
            sups.append(0.0)
            gaps.append(0.0)
            finals.append(0.0)
            continue
        other = integrate(u0 + dlt * direction, path, spec, cfg)
        w = base.states - other.states
        l2 = np.sqrt(np.sum(w.reshape(len(w), -1) ** 2, axis=1) * vol)
        sups.append(float(np.max(l2**p)))
        finals.append(float(l2[-1] ** p))
        en = np.array([
            sum(np.sum(np.abs(diff_values(wk, i, h[i])) ** spec.p[i]) * vol for i in range(spec.d))
            for wk in w[1:]
        ])
        gaps.append(float(np.sum(dt * en)))
    return sups, gaps, finals


def continuous_dependence(
    spec: ModelSpec,
    u0: GridFunction,
    direction: GridFunction,
    delta_list: Sequence[float],
    M: int,
    p: float,
    seed: int,
    T: float = 0.2,
    n_steps: int = 40,
    cfg: SolverConfig = SolverConfig(),
    workers: int | None = None,
) -> DependenceReport:
    """Coupled pairs ``u`` (from ``u0``) and ``ubar`` (from ``u0 + delta direction``) under common noise."""
    if not spec.strict:
        raise ConfigurationError("continuous dependence needs the strict zeta bound")
    if any(dl < 0 for dl in delta_list):
        raise ValueError("perturbation sizes must be nonnegative")
    idx = [0] if not spec.has_noise else list(range(M))
    jobs = [(spec, u0, direction, list(delta_list), T, n_steps, seed, i, cfg, p) for i in idx]
    res = _map(_dependence_path, jobs, workers)
    sups = np.array([r[0] for r in res])
    gaps = np.array([r[1] for r in res])
    finals = np.array([r[2] for r in res])
    dnorm = lp_norm(direction, 2)
    nums, ses, ens, inits, ratios, pratios, fratios = [], [], [], [], [], [], []
    for k, dl in enumerate(delta_list):
        m, se = _mean_se(sups[:, k])
        if not spec.has_noise:
            se = 0.0
        e = float(gaps[:, k].mean())
        g0 = dl * dnorm
        nums.append(m), ses.append(se), ens.append(e), inits.append(g0)
        ratios.append(m / g0**p if g0 > 0 else float("nan"))
        fratios.append(float(finals[:, k].mean()) / g0**p if g0 > 0 else float("nan"))
        pratios.append((m + e) / g0**spec.p0 if g0 > 0 else float("nan"))
    return DependenceReport(list(delta_list), nums, ses, ens, inits, ratios, fratios, pratios, M, p, seed)


def restrict(fine: np.ndarray, n_coarse: Sequence[int]) -> np.ndarray:
    """Injection of a fine-grid function onto a nested coarse grid."""
    out = fine
    for axis, nc in enumerate(n_coarse):
        nf = out.shape[axis]
        r = (nf + 1) // (nc + 1)
        if r * (nc + 1) != nf + 1:
            raise ValueError(f"grids with {nc} and {nf} interior points are not nested")
        out = np.take(out, np.arange(1, nc + 1) * r - 1, axis=axis)
    return out


def refinement_convergence(
    spec: ModelSpec,
    u0_fn: Callable[..., np.ndarray],
    resolutions: Sequence[int],
    seed: int | None = None,
    T: float = 0.1,
    n_steps: int = 50,
    cfg: SolverConfig = SolverConfig(),
    path_index: int = 0,
) -> list[dict]:
    """``|| u_h - restrict(u_{h/2}) ||_{L^2(0,T; L^2)}`` for consecutive nested grids.

    ``seed=None`` runs noise-free; otherwise every grid is driven by the same
    path (the noise is a finite set of scalar channels, so no projection is needed).
    """
    res = list(resolutions)
    for a, b in zip(res[:-1], res[1:]):
        if b < a or (b + 1) % (a + 1):
            raise ValueError(f"resolutions {a} -> {b} are not nested (n+1 must divide)")
    if seed is None:
        spec = replace(
            spec, zeta=(0.0,) * spec.d, h=HFamily(kind="zero"), gamma=GammaFamily(kind="zero")
        )
        seed = 0
    path = sample_path(spec, T, n_steps, seed, path_index)
    dt = np.diff(path.times)
    trajs = []
    for n in res:
        g = build_grid(spec.d, n)
        trajs.append(integrate(g.sample(u0_fn), path, spec, cfg))
    rows = []
    for (na, ta), (nb, tb) in zip(zip(res, trajs), zip(res[1:], trajs[1:])):
        ga = ta.grid
        diff = np.array([sa - restrict(sb, ga.n_per_axis) for sa, sb in zip(ta.states, tb.states)])
        per_t = np.sum(diff.reshape(len(diff), -1) ** 2, axis=1) * ga.cell_volume
        err = float(np.sqrt(np.sum(dt * per_t[1:])))
        rows.append({"n_coarse": na, "n_fine": nb, "error": err})
    for a, b in zip(rows[:-1], rows[1:]):
        b["order"] = float(np.log2(a["error"] / b["error"])) if b["error"] > 0 and a["error"] > 0 else float("nan")
    return rows


def heat_oracle_error(
    n: int, n_steps: int, T: float = 0.1, cfg: SolverConfig = SolverConfig(), richardson: bool = False,
) -> float:
    """Max-norm error of the noise-free p = 2 run against ``exp(-pi^2 T) sin(pi x)``.

    ``richardson=True`` combines ``n_steps`` and ``2 n_steps`` runs as
    ``2 u_{dt/2} - u_dt``, cancelling the first-order time error so that the
    spatial error can be seen at modest step counts.
    """
    spec = heat_spec()
    g = build_grid(1, n)
    u0 = g.sample(lambda x: np.sin(np.pi * x))

    def final(steps):
        return integrate(u0, sample_path(spec, T, steps, 0, 0), spec, cfg).final.values

    approx = 2.0 * final(2 * n_steps) - final(n_steps) if richardson else final(n_steps)
    exact = np.exp(-np.pi**2 * T) * np.sin(np.pi * g.coords()[0])
    return float(np.max(np.abs(approx - exact)))


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> list[float]:
    return [float(np.log(a / b) / np.log(ratio)) for a, b in zip(errors[:-1], errors[1:])]
