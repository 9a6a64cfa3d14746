"""Discrete drift, diffusion and jump coefficients plus assumption residuals.

Every ``check_*`` returns a :class:`Residual`. The claimed inequality is
``residual <= TOL * scale`` where ``scale = max(1, |terms|)`` so that sums of
large opposing terms are judged relative to their size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import (
    GridError,
    GridFunction,
    diff_values,
    div_values,
    inner,
    lp_norm,
    seminorm,
)
from .model import QUASILINEAR, ConfigurationError, ModelSpec, local_zeta_bound, strict_zeta_bound

TOL = 1e-9


@dataclass(frozen=True)
class Residual:
    check: str
    residual: float
    scale: float
    terms: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= TOL * self.scale)

    def record(self, trial: int | None = None) -> dict:
        return {
            "check": self.check,
            "trial": trial,
            "residual": self.residual,
            "scale": self.scale,
            "pass": self.passed,
        }


def _residual(check: str, terms: dict, rhs_keys=()) -> Residual:
    """Residual ``sum(lhs terms) - sum(rhs terms)``; keys in ``rhs_keys`` are subtracted."""
    val = sum(-v if k in rhs_keys else v for k, v in terms.items())
    scale = max([1.0] + [abs(v) for v in terms.values()])
    return Residual(check, float(val), float(scale), terms)


# -- drift ------------------------------------------------------------------------

def _phi(a: np.ndarray, p: float) -> np.ndarray:
    return np.abs(a) ** (p - 2.0) * a


def _flux(values: np.ndarray, spec: ModelSpec, h) -> list[np.ndarray]:
    return [_phi(diff_values(values, i, h[i]), spec.p[i]) for i in range(spec.d)]


def apply_A_values(values: np.ndarray, spec: ModelSpec, h) -> np.ndarray:
    out = np.zeros_like(values)
    for i, F in enumerate(_flux(values, spec, h)):
        out += div_values(F, i, h[i])
    if spec.scenario == QUASILINEAR:
        out += spec.f0(values) - _phi(values, spec.p2)
    return out


def pairing_terms(u: GridFunction, v: GridFunction, spec: ModelSpec) -> list[float]:
    """Per-operator pairings ``<A^i(u), v>``.

    Anisotropic: one term per axis. Quasi-linear: ``[p1-Laplacian + f0, -|u|^{p2-2}u]``.
    """
    u._same(v)
    g = u.grid
    h, vol = g.h_per_axis, g.cell_volume
    per_axis = [
        -float(np.sum(_phi(diff_values(u.values, i, h[i]), spec.p[i]) * diff_values(v.values, i, h[i])) * vol)
        for i in range(spec.d)
    ]
    if spec.scenario == QUASILINEAR:
        a1 = sum(per_axis) + float(np.sum(spec.f0(u.values) * v.values) * vol)
        a2 = -float(np.sum(_phi(u.values, spec.p2) * v.values) * vol)
        return [a1, a2]
    return per_axis


def pairing_A(u: GridFunction, v: GridFunction, spec: ModelSpec) -> float:
    """``sum_i <A^i(u), v>`` by face quadrature."""
    return float(sum(pairing_terms(u, v, spec)))


def apply_A_dual(u: GridFunction, spec: ModelSpec) -> GridFunction:
    """Riesz representative of ``sum_i A^i(u)`` in the discrete L^2 pairing."""
    if u.grid.d != spec.d:
        raise GridError(f"grid dimension {u.grid.d} does not match model d = {spec.d}")
    return GridFunction(u.grid, apply_A_values(u.values, spec, u.grid.h_per_axis))


# -- diffusion and jumps -----------------------------------------------------------

def cell_average(face: np.ndarray, axis: int) -> np.ndarray:
    lo = [slice(None)] * face.ndim
    hi = [slice(None)] * face.ndim
    lo[axis], hi[axis] = slice(None, -1), slice(1, None)
    return 0.5 * (face[tuple(lo)] + face[tuple(hi)])


def apply_B_values(values: np.ndarray, j: int, spec: ModelSpec, h) -> np.ndarray:
    out = spec.h(j, values)
    if j <= spec.d:
        axis = j - 1
        z = spec.zeta[axis]
        if z != 0:
            mag = np.abs(diff_values(values, axis, h[axis])) ** (spec.p[axis] / 2.0)
            out = out + z * cell_average(mag, axis)
    return out


def apply_B(u: GridFunction, j: int, spec: ModelSpec) -> GridFunction:
    """Noise coefficient of channel ``j`` (1-based, ``1 <= j <= J``)."""
    if not 1 <= j <= spec.J:
        raise ValueError(f"channel {j} out of range 1..{spec.J}")
    return GridFunction(u.grid, apply_B_values(u.values, j, spec, u.grid.h_per_axis))


def gamma_eval(u: GridFunction, z: float, t: float, spec: ModelSpec) -> GridFunction:
    """Jump coefficient ``gamma_t(u, z)(x) = g(u(x)) z`` (time-homogeneous)."""
    return GridFunction(u.grid, spec.gamma.g(u.values) * float(z))


def _gamma_sq_integral(gu: np.ndarray, vol: float, spec: ModelSpec, power: float = 2.0) -> float:
    """``int_{|z|<=1} |g(u) z|_H^power nu(dz) = |g(u)|_H^power * int |z|^power nu(dz)``."""
    c = spec.constants
    norm = float(np.sqrt(np.sum(gu * gu) * vol))
    moment = c.m2 if power == 2.0 else c.mp0 if power == spec.p0 else spec.nu.integrate(lambda z: abs(z) ** power)
    return norm**power * moment


# -- scalar inequalities -----------------------------------------------------------

def scalar_pl_inequality(a, b, r):
    """``(|a|^r a - |b|^r b)(a - b) - 2^{-r}|a - b|^{r+2}``; claimed nonnegative."""
    a, b, r = np.asarray(a, float), np.asarray(b, float), np.asarray(r, float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    lhs = (np.abs(a) ** r * a - np.abs(b) ** r * b) * (a - b)
    rhs = 2.0 ** (-r) * np.abs(a - b) ** (r + 2.0)
    return lhs - rhs


def scalar_pl_scale(a, b, r):
    a, b, r = np.asarray(a, float), np.asarray(b, float), np.asarray(r, float)
    lhs = np.abs((np.abs(a) ** r * a - np.abs(b) ** r * b) * (a - b))
    rhs = 2.0 ** (-r) * np.abs(a - b) ** (r + 2.0)
    return np.maximum(np.maximum(lhs, rhs), 1.0)


NOISE_CASES = ("local", "strong")


def noise_coefficient(case: str, p0: float) -> float:
    """Weight on ``zeta^2 (|a|^{p/2} - |b|^{p/2})^2``: 1 (local) or 2(p0 - 1) (strong)."""
    if case == "local":
        return 1.0
    if case == "strong":
        return 2.0 * (p0 - 1.0)
    raise ValueError(f"case must be one of {NOISE_CASES}")


def noise_zeta_bound(p: float, p0: float, case: str) -> float:
    return local_zeta_bound(p) if case == "local" else 2.0 * (p - 1.0) / (p**2 * (p0 - 1.0))


def scalar_noise_inequality(a, b, p: float, zeta: float, p0: float, case: str = "local"):
    """Residual of ``(|a|^{p-2}a - |b|^{p-2}b)(a-b) >= c zeta^2 (|a|^{p/2} - |b|^{p/2})^2``.

    ``c = 1`` for ``case="local"`` (holds iff ``zeta^2 <= 4(p-1)/p^2``) and
    ``c = 2(p0-1)`` for ``case="strong"`` (``zeta^2 <= 2(p-1)/(p^2(p0-1))``).
    Returns ``(residual, admissible)``; the residual is evaluated either way.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    c = noise_coefficient(case, p0)
    lhs = (_phi(a, p) - _phi(b, p)) * (a - b)
    rhs = c * zeta**2 * (np.abs(a) ** (p / 2) - np.abs(b) ** (p / 2)) ** 2
    admissible = zeta**2 <= noise_zeta_bound(p, p0, case) * (1 + 1e-15)
    return lhs - rhs, admissible


# -- assumption residuals ----------------------------------------------------------

def _noise_diff_sq(u: GridFunction, v: GridFunction, spec: ModelSpec) -> float:
    h, vol = u.grid.h_per_axis, u.grid.cell_volume
    tot = 0.0
    for j in range(1, spec.J + 1):
        dB = apply_B_values(u.values, j, spec, h) - apply_B_values(v.values, j, spec, h)
        tot += float(np.sum(dB * dB) * vol)
    return tot


def _noise_sq(u: GridFunction, spec: ModelSpec) -> float:
    h, vol = u.grid.h_per_axis, u.grid.cell_volume
    return sum(float(np.sum(apply_B_values(u.values, j, spec, h) ** 2) * vol) for j in range(1, spec.J + 1))


def _gradient_power_sum(u: GridFunction, spec: ModelSpec) -> float:
    return sum(seminorm(u, i, spec.p[i]) ** spec.p[i] for i in range(spec.d))


def _v_norm_powers(u: GridFunction, spec: ModelSpec) -> list[float]:
    """``|u|_{V_i}^{alpha_i}`` for the coercivity term of each operator."""
    if spec.scenario == QUASILINEAR:
        return [_gradient_power_sum(u, spec), lp_norm(u, spec.p2) ** spec.p2]
    return [seminorm(u, i, spec.p[i]) ** spec.p[i] for i in range(spec.d)]


def check_local_monotonicity(u: GridFunction, v: GridFunction, spec: ModelSpec) -> Residual:
    c = spec.constants
    w = u - v
    vol = u.grid.cell_volume
    dg = spec.gamma.g(u.values) - spec.gamma.g(v.values)
    terms = {
        "drift": 2.0 * pairing_A(u, w, spec) - 2.0 * pairing_A(v, w, spec),
        "noise": _noise_diff_sq(u, v, spec),
        "jumps": _gamma_sq_integral(dg, vol, spec),
        "bound": c.C_loc * lp_norm(w, 2) ** 2,
    }
    return _residual("local_monotonicity", terms, rhs_keys=("bound",))


def check_coercivity(u: GridFunction, spec: ModelSpec) -> Residual:
    c = spec.constants
    if c.theta <= 0:
        raise ConfigurationError(f"coercivity margin theta = {c.theta:.6g} <= 0 (inadmissible zeta)")
    vol = u.grid.cell_volume
    terms = {
        "drift": 2.0 * pairing_A(u, u, spec),
        "noise": (spec.p0 - 1.0) * _noise_sq(u, spec),
        "theta": c.theta * sum(_v_norm_powers(u, spec)),
        "jumps": _gamma_sq_integral(spec.gamma.g(u.values), vol, spec),
        "f": spec.f,
        "bound": c.K_c * lp_norm(u, 2) ** 2,
    }
    return _residual("coercivity", terms, rhs_keys=("f", "bound"))


def _sine_modes(grid, count: int) -> list[np.ndarray]:
    X = grid.coords()
    modes = []
    for k in range(1, count + 1):
        m = np.ones(grid.shape)
        for x in X:
            m = m * np.sin(k * np.pi * x)
        modes.append(m)
        if grid.d == 2:
            modes.append(np.sin(k * np.pi * X[0]) * np.sin(np.pi * X[1]))
            modes.append(np.sin(np.pi * X[0]) * np.sin(k * np.pi * X[1]))
    return modes


def _operator_pieces(u: GridFunction, spec: ModelSpec) -> list[np.ndarray]:
    """Riesz representatives of each ``A^i(u)`` separately."""
    h = u.grid.h_per_axis
    divs = [div_values(F, i, h[i]) for i, F in enumerate(_flux(u.values, spec, h))]
    if spec.scenario == QUASILINEAR:
        return [sum(divs) + spec.f0(u.values), -_phi(u.values, spec.p2)]
    return divs


def dual_norms(u: GridFunction, spec: ModelSpec, n_random: int = 4) -> list[float]:
    """Dictionary estimate of ``|A^i(u)|_{V_i^*}``.

    The supremum of ``<A^i(u), v> / |v|_{V_i}`` is taken over ``u``, the Riesz
    representative of ``A^i(u)``, sine modes and a few fixed random vectors.
    For the pure power term ``-|u|^{p2-2}u`` the Hölder dual norm is exact.
    """
    g = u.grid
    rng = np.random.default_rng(12345)
    pieces = _operator_pieces(u, spec)
    base = [u.values] + _sine_modes(g, 8) + [rng.standard_normal(g.shape) for _ in range(n_random)]
    out = []
    for i, rep in enumerate(pieces):
        if spec.scenario == QUASILINEAR and i == 1:
            out.append(lp_norm(u, spec.p2) ** (spec.p2 - 1.0))
            continue
        best = 0.0
        for cand in base + [rep]:
            v = GridFunction(g, cand)
            nv = _v_norm(v, i, spec)
            if nv > 0:
                best = max(best, abs(float(np.sum(rep * cand) * g.cell_volume)) / nv)
        out.append(best)
    return out


def _v_norm(u: GridFunction, i: int, spec: ModelSpec) -> float:
    if spec.scenario == QUASILINEAR:
        if i == 0:
            return _gradient_power_sum(u, spec) ** (1.0 / spec.p[0])
        return lp_norm(u, spec.p2)
    return lp_norm(u, 2) + seminorm(u, i, spec.p[i])


def _alphas(spec: ModelSpec) -> list[float]:
    if spec.scenario == QUASILINEAR:
        return [spec.p[0], spec.p2]
    return list(spec.p)


def check_growth_A(u: GridFunction, spec: ModelSpec) -> list[Residual]:
    c = spec.constants
    hnorm = lp_norm(u, 2)
    out = []
    for i, (dn, a) in enumerate(zip(dual_norms(u, spec), _alphas(spec))):
        terms = {
            "dual": dn ** (a / (a - 1.0)),
            "bound": (spec.f + c.K_growth * _v_norm(u, i, spec) ** a) * (1.0 + hnorm**c.beta),
        }
        out.append(_residual(f"growth_A[{i}]", terms, rhs_keys=("bound",)))
    return out


def check_gamma_integrability(u: GridFunction, spec: ModelSpec, v: GridFunction | None = None) -> list[Residual]:
    """Integrability of gamma plus the three jump-growth conditions.

    Lévy integrals are evaluated by quadrature over the full small-jump region.
    ``v`` defaults to the zero function for the Lipschitz-type condition.
    """
    c = spec.constants
    vol = u.grid.cell_volume
    p0 = spec.p0
    v = u.grid.zeros() if v is None else v
    gu = spec.gamma.g(u.values)
    hn = lp_norm(u, 2)
    dn = lp_norm(u - v, 2)
    nu = spec.nu
    gu_norm = float(np.sqrt(np.sum(gu * gu) * vol))
    dg = gu - spec.gamma.g(v.values)
    dg_norm = float(np.sqrt(np.sum(dg * dg) * vol))
    # direct quadrature over z of the H-norms (not using the cached moments)
    lip = nu.integrate(lambda z: (dg_norm * z) ** 2)
    sq = nu.integrate(lambda z: (gu_norm * z) ** 2)
    pw = nu.integrate(lambda z: abs(gu_norm * z) ** p0)
    return [
        _residual("gamma_lipschitz", {"lhs": lip, "bound": c.K_gamma2 * dn**2}, ("bound",)),
        _residual("gamma_square", {"lhs": sq, "bound": c.K_gamma2 * (1.0 + hn**2)}, ("bound",)),
        _residual("gamma_p0", {"lhs": pw, "bound": c.K_gamma_p0 * (1.0 + hn**p0)}, ("bound",)),
        _residual(
            "gamma_integrability",
            {"lhs": pw, "f": spec.f ** (p0 / 2.0), "bound": c.K_gamma_p0 * hn**p0},
            ("f", "bound"),
        ),
    ]


def check_strong_monotonicity(
    u: GridFunction, v: GridFunction, spec: ModelSpec, theta_prime: float | None = None
) -> Residual:
    if not spec.strict:
        bounds = [round(strict_zeta_bound(p, spec.p0), 6) for p in spec.p]
        raise ConfigurationError(f"strong monotonicity needs zeta^2 <= {bounds}")
    c = spec.constants
    tp = c.theta_prime if theta_prime is None else theta_prime
    w = u - v
    vol = u.grid.cell_volume
    dg = spec.gamma.g(u.values) - spec.gamma.g(v.values)
    terms = {
        "drift": 2.0 * pairing_A(u, w, spec) - 2.0 * pairing_A(v, w, spec),
        "noise": (spec.p0 - 1.0) * _noise_diff_sq(u, v, spec),
        "jumps": _gamma_sq_integral(dg, vol, spec),
        "theta": tp * _gradient_power_sum(w, spec),
        "bound": c.C_strong * lp_norm(w, 2) ** 2,
    }
    return _residual("strong_monotonicity", terms, rhs_keys=("bound",))


def check_hemicontinuity(
    u: GridFunction, w: GridFunction, v: GridFunction, spec: ModelSpec, delta: float = 1e-3
) -> float:
    """Largest ``|Phi(e + delta) - Phi(e)|`` over ``e`` in [-1, 1], ``Phi(e) = <A(u + e w), v>``."""
    eps = np.arange(-1.0, 1.0 + 0.5 * delta, delta)
    phi = np.array([pairing_A(u + float(e) * w, v, spec) for e in eps])
    return float(np.max(np.abs(np.diff(phi))))


def rho_eval(x: GridFunction, spec: ModelSpec) -> float:
    """``L (1 + sum_i |x|_{V_i}^{alpha_i}) (1 + |x|_H^beta)``; the last factor is dropped when beta = 0."""
    c = spec.constants
    vn = sum(_v_norm(x, i, spec) ** a for i, a in enumerate(_alphas(spec)))
    growth = 1.0 + lp_norm(x, 2) ** c.beta if c.beta > 0 else 1.0
    return float(c.L * (1.0 + vn) * growth)


# -- randomized suites -------------------------------------------------------------

SUITE_CHECKS = ("A-2", "A-4", "A-5", "A-6", "A-7")


def random_grid_function(grid, rng: np.random.Generator, amplitude: float | None = None) -> GridFunction:
    """Random test function: white noise, a few sine modes, or a tent, at a log-uniform amplitude."""
    amp = 10.0 ** rng.uniform(-3.0, 1.5) if amplitude is None else amplitude
    kind = rng.integers(3)
    X = grid.coords()
    if kind == 0:
        vals = rng.standard_normal(grid.shape)
    elif kind == 1:
        vals = np.zeros(grid.shape)
        for _ in range(3):
            k = rng.integers(1, 6, size=grid.d)
            term = rng.standard_normal() * np.ones(grid.shape)
            for x, kk in zip(X, k):
                term = term * np.sin(kk * np.pi * x)
            vals += term
    else:
        vals = np.ones(grid.shape)
        for x in X:
            vals = vals * (1.0 - np.abs(2.0 * x - 1.0))
    m = np.max(np.abs(vals))
    return GridFunction(grid, amp * vals / (m if m > 0 else 1.0))


def assumption_suite(spec: ModelSpec, grid, n_trials: int, seed: int, checks=SUITE_CHECKS) -> list[dict]:
    """Residual records for ``n_trials`` random pairs; A-7 only runs under the strict bound."""
    rng = np.random.default_rng(seed)
    records = []
    for trial in range(n_trials):
        u = random_grid_function(grid, rng)
        v = random_grid_function(grid, rng)
        res: list[Residual] = []
        if "A-2" in checks and spec.local_admissible:
            res.append(check_local_monotonicity(u, v, spec))
        if "A-4" in checks:
            res.extend(check_growth_A(u, spec))
        if "A-5" in checks:
            res.extend(check_gamma_integrability(u, spec, v))
        if "A-6" in checks:
            res.append(check_coercivity(u, spec))
        if "A-7" in checks and spec.strict:
            res.append(check_strong_monotonicity(u, v, spec))
        records.extend(r.record(trial) for r in res)
    return records


def search_monotonicity_violation(spec: ModelSpec, grid, n_pairs: int, seed: int) -> dict | None:
    """Look for a pair with a positive local-monotonicity residual.

    Candidates are ``v = r u`` with ``r`` in (0, 2): along such rays the
    gradient noise and the ``h`` noise move together, which is where an
    oversized ``zeta`` shows first. Returns the first violating record.
    """
    rng = np.random.default_rng(seed)
    for trial in range(n_pairs):
        u = random_grid_function(grid, rng, amplitude=10.0 ** rng.uniform(-4.0, 2.0))
        if rng.random() < 0.5:
            u = GridFunction(grid, np.abs(u.values))
        v = GridFunction(grid, rng.uniform(0.0, 2.0) * u.values)
        r = check_local_monotonicity(u, v, spec)
        if r.residual > TOL * r.scale:
            return {**r.record(trial), "amplitude": float(np.max(np.abs(u.values)))}
    return None
