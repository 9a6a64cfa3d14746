"""Reproducible realizations of the driving noise.

Each path draws from three independent Philox substreams keyed by
``(seed, path_index, channel)``, so paths can be generated in any order or on
any worker and come out bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .model import ModelSpec

WIENER, SMALL, LARGE = 0, 1, 2


def substream(seed: int, path_index: int, channel: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(path_index), int(channel)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class NoisePath:
    """One noise realization on a jump-adapted grid.

    ``dW[k, j]`` is the increment of channel ``j + 1`` over ``(t_k, t_{k+1}]``.
    Small jumps of step ``k`` are ``small_marks[small_offsets[k]:small_offsets[k+1]]``.
    ``large_marks[k]`` is the large-jump mark applied at node ``k`` (NaN if none).
    ``compensator[k] = dt_k * int_{eps<|z|<=1} z nu(dz)`` multiplies ``g(u_k)``.
    """

    times: np.ndarray
    dW: np.ndarray
    small_offsets: np.ndarray
    small_times: np.ndarray
    small_marks: np.ndarray
    compensator: np.ndarray
    large_marks: np.ndarray
    seed: int
    path_index: int

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def large_jump_nodes(self) -> np.ndarray:
        return np.flatnonzero(~np.isnan(self.large_marks))

    @property
    def large_jumps(self) -> list[tuple[float, float]]:
        return [(float(self.times[k]), float(self.large_marks[k])) for k in self.large_jump_nodes]

    def small_jumps(self, k: int) -> np.ndarray:
        return self.small_marks[self.small_offsets[k] : self.small_offsets[k + 1]]

    def segment(self, k0: int, k1: int) -> "NoisePath":
        """Sub-path over nodes ``k0..k1``; the jump at node ``k0`` is dropped."""
        lo, hi = self.small_offsets[k0], self.small_offsets[k1]
        large = self.large_marks[k0 : k1 + 1].copy()
        large[0] = np.nan
        return NoisePath(
            times=self.times[k0 : k1 + 1],
            dW=self.dW[k0:k1],
            small_offsets=self.small_offsets[k0 : k1 + 1] - lo,
            small_times=self.small_times[lo:hi],
            small_marks=self.small_marks[lo:hi],
            compensator=self.compensator[k0:k1],
            large_marks=large,
            seed=self.seed,
            path_index=self.path_index,
        )

    def dump_jsonl(self, fh: TextIO):
        """One JSON record per grid node: increments into the node and jump events."""
        for k, t in enumerate(self.times):
            rec = {"k": k, "t": float(t)}
            if k > 0:
                rec["dW"] = self.dW[k - 1].tolist()
                lo, hi = self.small_offsets[k - 1], self.small_offsets[k]
                rec["small"] = [[float(a), float(b)] for a, b in zip(self.small_times[lo:hi], self.small_marks[lo:hi])]
                rec["compensator"] = float(self.compensator[k - 1])
            m = self.large_marks[k]
            rec["large"] = None if np.isnan(m) else float(m)
            fh.write(json.dumps(rec) + "\n")


def sample_path(spec: ModelSpec, T: float, n_steps: int, seed: int, path_index: int = 0) -> NoisePath:
    if n_steps < 1 or T <= 0:
        raise ValueError("need n_steps >= 1 and T > 0")
    nu = spec.nu
    uniform = np.linspace(0.0, T, n_steps + 1)

    rng_large = substream(seed, path_index, LARGE)
    jumps_on = spec.gamma.kind != "zero" and nu.lambda_large > 0
    n_large = rng_large.poisson(nu.lambda_large * T) if jumps_on else 0
    large_t = np.sort(rng_large.uniform(0.0, T, n_large))
    large_z = nu.sample_large_marks(rng_large, n_large)

    times = np.union1d(uniform, large_t)
    large_marks = np.full(len(times), np.nan)
    if n_large:
        large_marks[np.searchsorted(times, large_t)] = large_z
    dt = np.diff(times)

    rng_w = substream(seed, path_index, WIENER)
    dW = rng_w.standard_normal((len(dt), spec.J)) * np.sqrt(dt)[:, None]

    rng_s = substream(seed, path_index, SMALL)
    small_on = spec.gamma.kind != "zero" and nu.has_small
    if small_on:
        lam = nu.small_intensity()
        counts = rng_s.poisson(lam * dt)
        total = int(counts.sum())
        marks = nu.sample_small_marks(rng_s, total)
        rel = rng_s.random(total)
        step_of = np.repeat(np.arange(len(dt)), counts)
        s_times = times[step_of] + rel * dt[step_of]
        comp = dt * nu.mean_mark()
    else:
        counts = np.zeros(len(dt), dtype=int)
        marks = s_times = np.zeros(0)
        comp = np.zeros(len(dt))
    offsets = np.concatenate([[0], np.cumsum(counts)])

    return NoisePath(
        times=times, dW=dW, small_offsets=offsets, small_times=s_times, small_marks=marks,
        compensator=comp, large_marks=large_marks, seed=int(seed), path_index=int(path_index),
    )


@dataclass(frozen=True)
class CompensatorRule:
    """Compensated small-jump increment over one step of length ``dt``.

    ``increment(g_u, marks) = g_u * (sum(marks) - dt * mean_mark)``, i.e. the
    jumps' effect minus ``dt * int_{eps<|z|<=1} gamma(u, z) nu(dz)``.
    """

    dt: float
    intensity: float
    mean_mark: float

    @property
    def drift(self) -> float:
        return self.dt * self.mean_mark

    def increment(self, g_u: np.ndarray, marks: np.ndarray) -> np.ndarray:
        return g_u * (float(np.sum(marks)) - self.drift)


def small_jump_compensation(spec: ModelSpec, dt: float) -> CompensatorRule:
    nu = spec.nu
    if spec.gamma.kind == "zero" or not nu.has_small:
        return CompensatorRule(dt, 0.0, 0.0)
    # same adaptive quadrature as the assumption checks
    mean = nu.integrate(lambda z: z, lower=nu.eps)
    return CompensatorRule(dt, nu.small_intensity(), mean)


def truncation_bias_probe(spec: ModelSpec, eps_list) -> list[dict]:
    """Variance ``int_{|z|<=eps}|z|^2 nu(dz)`` dropped by each simulation cutoff."""
    nu = spec.nu
    total = nu.moment(2.0)
    rows = []
    for eps in eps_list:
        if not 0 < eps <= 1:
            raise ValueError(f"cutoff must lie in (0, 1], got {eps}")
        kept = nu.integrate(lambda z: z * z, lower=eps) if eps < 1 else 0.0
        omitted = total - kept
        rows.append(
            {
                "eps": float(eps),
                "omitted_variance": omitted,
                "closed_form": nu.omitted_variance(eps),
                "fraction": omitted / total if total > 0 else 0.0,
                "intensity": nu.moment(0.0, eps) if eps < 1 else 0.0,
            }
        )
    return rows
