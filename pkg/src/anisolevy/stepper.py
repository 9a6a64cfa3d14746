"""Drift-implicit Euler-Maruyama on the jump-adapted time grid.

One step from ``u_n`` over ``(t_k, t_{k+1}]``:

1. ``rhs = u_n + sum_j B^j(u_n) dW^j + g(u_n) (sum small marks - dt m_1)``
2. solve ``u - dt A(u) = rhs`` by damped Newton
3. if a large jump sits at ``t_{k+1}``: ``u <- u + g(u) z`` (interlacing)
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import BinaryIO, TextIO

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .mesh import Grid, GridFunction, diff_values, write_binary
from .model import QUASILINEAR, ModelSpec
from .noise import NoisePath
from .operators import apply_A_values, apply_B_values

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    def __init__(self, message: str, history=None, step: int | None = None):
        super().__init__(message)
        self.history = list(history or [])
        self.step = step


class NewtonDivergence(SimulationError):
    pass


class NonFiniteState(SimulationError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_iters: int = 100
    damping: float = 0.5
    regularization_eta: float = 1e-12
    explicit: bool = False       # debug only: explicit drift, no step-size safety
    per_event: bool = False      # apply small jumps one at a time (cross-check mode)

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


def _l2(values: np.ndarray, vol: float) -> float:
    return float(np.sqrt(np.sum(values * values) * vol))


class _System:
    """Residual and Jacobian of ``G(u) = u - dt A(u)`` on one grid."""

    def __init__(self, grid: Grid, spec: ModelSpec, cfg: SolverConfig):
        self.grid, self.spec, self.cfg = grid, spec, cfg
        self.h = grid.h_per_axis
        self.vol = grid.cell_volume
        if spec.d != grid.d:
            raise ValueError(f"model d = {spec.d} but grid d = {grid.d}")
        self.linear = spec.scenario != QUASILINEAR and all(p == 2.0 for p in spec.p)
        self._lin_cache: dict = {}

    def G(self, u: np.ndarray, dt: float) -> np.ndarray:
        return u - dt * apply_A_values(u, self.spec, self.h)

    def _weights(self, u: np.ndarray, i: int) -> np.ndarray:
        p, eta = self.spec.p[i], self.cfg.regularization_eta
        a = diff_values(u, i, self.h[i])
        if p == 2.0:
            return np.ones_like(a)
        return (p - 1.0) * (a * a + eta * eta) ** ((p - 2.0) / 2.0)

    def _reaction_diag(self, u: np.ndarray) -> np.ndarray | None:
        spec = self.spec
        if spec.scenario != QUASILINEAR:
            return None
        eta = self.cfg.regularization_eta
        return (spec.p2 - 1.0) * (u * u + eta * eta) ** ((spec.p2 - 2.0) / 2.0) - spec.f0.derivative(u)

    def solve_jacobian(self, u: np.ndarray, dt: float, r: np.ndarray) -> np.ndarray:
        """Solve ``J(u) x = r`` with ``J = I + dt sum_i D_i^T W_i D_i + dt diag(reaction)``."""
        if self.linear:
            return self._solve_linear(dt, r)
        reac = self._reaction_diag(u)
        if self.grid.d == 1:
            w = self._weights(u, 0) / self.h[0] ** 2
            diag = 1.0 + dt * (w[:-1] + w[1:])
            if reac is not None:
                diag = diag + dt * reac
            off = -dt * w[1:-1]
            ab = np.zeros((3, len(diag)))
            ab[0, 1:] = off
            ab[1] = diag
            ab[2, :-1] = off
            return solve_banded((1, 1), ab, r)
        J = self._sparse_jacobian(u, dt, reac)
        return spla.spsolve(J, r.ravel()).reshape(r.shape)

    def _sparse_jacobian(self, u, dt, reac):
        N = u.size
        J = sp.identity(N, format="csr")
        for i, D in enumerate(self.grid.diff_matrices):
            W = sp.diags(self._weights(u, i).ravel())
            J = J + dt * (D.T @ W @ D)
        if reac is not None:
            J = J + dt * sp.diags(reac.ravel())
        return J.tocsc()

    def _solve_linear(self, dt: float, r: np.ndarray) -> np.ndarray:
        lu = self._lin_cache.get(dt)
        if lu is None:
            if self.grid.d == 1:
                w = 1.0 / self.h[0] ** 2
                n = r.shape[0]
                ab = np.zeros((3, n))
                ab[0, 1:] = -dt * w
                ab[1] = 1.0 + 2.0 * dt * w
                ab[2, :-1] = -dt * w
                lu = ("banded", ab)
            else:
                lu = ("splu", spla.splu(self._sparse_jacobian(np.zeros(r.shape), dt, None)))
            self._lin_cache[dt] = lu
        kind, obj = lu
        if kind == "banded":
            return solve_banded((1, 1), obj, r)
        return obj.solve(r.ravel()).reshape(r.shape)

    def newton(self, rhs: np.ndarray, dt: float, guess: np.ndarray | None = None):
        """Returns ``(u, iterations, residual_norm)``."""
        cfg = self.cfg
        rhs_norm = _l2(rhs, self.vol)
        target = cfg.newton_tol * (1.0 + rhs_norm)
        if dt == 0:
            return rhs.copy(), 0, 0.0
        u = rhs.copy() if guess is None else np.array(guess, dtype=float)
        F = self.G(u, dt) - rhs
        res = _l2(F, self.vol)
        history = [res]
        it = 0
        while res > target:
            if it >= cfg.max_iters:
                raise NewtonDivergence(
                    f"Newton did not converge in {cfg.max_iters} iterations (residual {res:.3e})", history
                )
            it += 1
            delta = self.solve_jacobian(u, dt, -F)
            lam = 1.0
            while True:
                trial = u + lam * delta
                F_trial = self.G(trial, dt) - rhs
                r_trial = _l2(F_trial, self.vol)
                if np.isfinite(r_trial) and (r_trial < res or lam < 1e-12):
                    break
                lam *= cfg.damping
            if not np.isfinite(r_trial):
                raise NonFiniteState("non-finite Newton iterate", history)
            if r_trial >= res and res <= 100 * target:
                # stagnation at roundoff level
                break
            u, F, res = trial, F_trial, r_trial
            history.append(res)
        return u, it, res


def newton_solve(
    rhs: GridFunction, dt: float, spec: ModelSpec, cfg: SolverConfig = SolverConfig(),
    guess: GridFunction | None = None,
) -> GridFunction:
    """Solve ``u - dt A(u) = rhs``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    system = _System(rhs.grid, spec, cfg)
    u, _, _ = system.newton(rhs.values, dt, None if guess is None else guess.values)
    return GridFunction(rhs.grid, u)


def _noise_rhs(u: np.ndarray, k: int, path: NoisePath, spec: ModelSpec, system: _System) -> np.ndarray:
    rhs = u.copy()
    h = system.h
    dW = path.dW[k]
    for j in range(1, spec.J + 1):
        if dW[j - 1] != 0:
            rhs += apply_B_values(u, j, spec, h) * dW[j - 1]
    marks = path.small_jumps(k)
    comp = path.compensator[k]
    if len(marks) or comp != 0:
        gu = spec.gamma.g(u)
        if system.cfg.per_event:
            jumped = u.copy()
            for z in marks:
                jumped = jumped + spec.gamma.g(jumped) * z
            rhs += (jumped - u) - gu * comp
        else:
            rhs += gu * (float(np.sum(marks)) - comp)
    return rhs


def _advance(u: np.ndarray, k: int, path: NoisePath, spec: ModelSpec, system: _System):
    dt = float(path.times[k + 1] - path.times[k])
    rhs = _noise_rhs(u, k, path, spec, system)
    if system.cfg.explicit:
        with np.errstate(all="ignore"):
            new = rhs + dt * apply_A_values(u, spec, system.h)
        it, res = 0, 0.0
    else:
        new, it, res = system.newton(rhs, dt, guess=u)
    z = path.large_marks[k + 1]
    jumped = not np.isnan(z)
    if jumped:
        new = new + spec.gamma.g(new) * z
    if not np.all(np.isfinite(new)):
        raise NonFiniteState(f"non-finite state after step {k}", step=k)
    return new, it, res, jumped


def step(u_n: GridFunction, k: int, path: NoisePath, spec: ModelSpec, cfg: SolverConfig = SolverConfig()) -> GridFunction:
    if not 0 <= k < path.n_intervals:
        raise IndexError(f"step {k} outside path with {path.n_intervals} intervals")
    system = _System(u_n.grid, spec, cfg)
    new, _, _, _ = _advance(u_n.values, k, path, spec, system)
    return GridFunction(u_n.grid, new)


@dataclass(eq=False)
class Trajectory:
    grid: Grid
    times: np.ndarray
    states: np.ndarray                  # (n_nodes, *grid.shape)
    l2: np.ndarray
    energy: np.ndarray                  # sum_i [u]_{i,p_i}^{p_i}
    newton_iters: np.ndarray
    residual: np.ndarray
    jump: np.ndarray
    meta: dict = field(default_factory=dict)

    def state(self, k: int) -> GridFunction:
        return GridFunction(self.grid, self.states[k])

    @property
    def final(self) -> GridFunction:
        return self.state(-1)

    def export_jsonl(self, fh: TextIO, spec_hash: str = ""):
        for k in range(len(self.times)):
            fh.write(json.dumps({
                "spec_hash": spec_hash, "k": k, "t": float(self.times[k]),
                "l2": float(self.l2[k]), "energy": float(self.energy[k]),
                "newton_iters": int(self.newton_iters[k]), "residual": float(self.residual[k]),
                "jump": bool(self.jump[k]),
            }) + "\n")

    def dump_states(self, fh: BinaryIO, every: int = 1):
        for k in range(0, len(self.times), every):
            write_binary(self.state(k), fh)


def _energy(u: np.ndarray, spec: ModelSpec, h, vol) -> float:
    return float(sum(np.sum(np.abs(diff_values(u, i, h[i])) ** spec.p[i]) * vol for i in range(spec.d)))


def integrate(u0: GridFunction, path: NoisePath, spec: ModelSpec, cfg: SolverConfig = SolverConfig()) -> Trajectory:
    system = _System(u0.grid, spec, cfg)
    h, vol = system.h, system.vol
    n = len(path.times)
    states = np.empty((n, *u0.grid.shape))
    l2, energy, res = np.zeros(n), np.zeros(n), np.zeros(n)
    iters = np.zeros(n, dtype=int)
    jump = np.zeros(n, dtype=bool)
    u = np.array(u0.values)
    states[0] = u
    l2[0], energy[0] = _l2(u, vol), _energy(u, spec, h, vol)
    for k in range(n - 1):
        # overflow is reported through NonFiniteState, not warnings
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                u, it, r, jumped = _advance(u, k, path, spec, system)
            except SimulationError as err:
                err.step = k if err.step is None else err.step
                err.history = err.history or [float(x) for x in l2[: k + 1]]
                raise
            states[k + 1] = u
            l2[k + 1], energy[k + 1] = _l2(u, vol), _energy(u, spec, h, vol)
        iters[k + 1], res[k + 1], jump[k + 1] = it, r, jumped
    return Trajectory(
        u0.grid, np.array(path.times), states, l2, energy, iters, res, jump,
        meta={"seed": path.seed, "path_index": path.path_index},
    )


def _strip_large(path: NoisePath) -> NoisePath:
    return replace(path, large_marks=np.full(len(path.times), np.nan))


def integrate_segmented(u0: GridFunction, path: NoisePath, spec: ModelSpec, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """Interlacing by restart: jump-free runs between large jumps, jumps applied by hand."""
    nodes = [int(k) for k in path.large_jump_nodes if k > 0]
    bounds = [0] + nodes + ([path.n_intervals] if not nodes or nodes[-1] != path.n_intervals else [])
    states = [np.array(u0.values)]
    u = u0
    for a, b in zip(bounds[:-1], bounds[1:]):
        seg = _strip_large(path.segment(a, b))
        traj = integrate(u, seg, spec, cfg)
        states.extend(traj.states[1:])
        end = traj.states[-1]
        z = path.large_marks[b]
        if not np.isnan(z):
            end = end + spec.gamma.g(end) * z
            states[-1] = end
        u = GridFunction(u0.grid, end)
    return np.array(states)


def interlacing_crosscheck(u0: GridFunction, path: NoisePath, spec: ModelSpec, cfg: SolverConfig = SolverConfig()) -> dict:
    """Max L^2 discrepancy between inline-jump and segmented-restart integration."""
    inline = integrate(u0, path, spec, cfg).states
    segmented = integrate_segmented(u0, path, spec, cfg)
    vol = u0.grid.cell_volume
    diffs = [_l2(a - b, vol) for a, b in zip(inline, segmented)]
    scale = max(1.0, max(_l2(a, vol) for a in inline))
    return {
        "discrepancy": float(max(diffs)),
        "scale": scale,
        "n_jumps": int(len(path.large_jump_nodes)),
        "pass": bool(max(diffs) <= 1e-12 * scale),
    }
