"""Model constants, coefficient families and admissibility rules.

The families are deliberately simple closed forms whose Lipschitz and growth
constants are known exactly, so every constant used by the assumption checks
is computed from configuration and never fitted:

* ``h_j(x) = M 2^{-j} sin(x)``: Lipschitz ``M_j = M 2^{-j}``, square summable.
* ``gamma(u, z)(x) = g(u(x)) z`` with ``g(x) = K x / (1 + |x|/R)`` (saturating)
  or ``g(x) = K x`` (linear); both have Lipschitz constant ``K`` and
  ``|g(x)| <= K |x|``.
* Small jumps: density ``c (1 + s sign z) |z|^{-1-alpha}`` on ``0 < |z| <= 1``.
  Large jumps: total mass ``lambda_L`` on ``|z| > 1`` with ``|z| - 1``
  exponential of rate ``kappa`` and a symmetric sign.
* Quasi-linear reaction ``f0(x) = K x (1 + x^2)^{-1/4}`` (derivative in
  ``(0, K]``).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import integrate


class ConfigurationError(ValueError):
    """A model parameter violates a well-posedness constraint."""


class QuadratureError(RuntimeError):
    pass


ANISOTROPIC = "anisotropic"
QUASILINEAR = "quasilinear"


@dataclass(frozen=True)
class HFamily:
    M: float = 0.5
    kind: str = "sine"

    def __post_init__(self):
        if self.kind not in ("sine", "zero"):
            raise ConfigurationError(f"unknown h family {self.kind!r}")
        if self.M < 0:
            raise ConfigurationError("h amplitude M must be nonnegative")

    def lipschitz(self, j: int) -> float:
        return 0.0 if self.kind == "zero" else self.M * 2.0 ** (-j)

    def __call__(self, j: int, x):
        if self.kind == "zero" or self.M == 0:
            return np.zeros_like(x, dtype=float)
        return self.lipschitz(j) * np.sin(x)

    def tail_sq(self, J: int) -> float:
        """``sum_{j > J} M_j^2``: variance weight dropped by truncating at J channels."""
        return 0.0 if self.kind == "zero" else self.M**2 * 4.0 ** (-J) / 3.0


@dataclass(frozen=True)
class GammaFamily:
    K: float = 0.5
    R: float = 2.0
    kind: str = "saturating"

    def __post_init__(self):
        if self.kind not in ("saturating", "linear", "zero"):
            raise ConfigurationError(f"unknown gamma family {self.kind!r}")
        if self.K < 0 or self.R <= 0:
            raise ConfigurationError("gamma family needs K >= 0 and R > 0")

    @property
    def lipschitz(self) -> float:
        return 0.0 if self.kind == "zero" else self.K

    def g(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return self.K * x
        return self.K * x / (1.0 + np.abs(x) / self.R)


@dataclass(frozen=True)
class F0Family:
    K: float = 0.5
    kind: str = "damped"

    def __post_init__(self):
        if self.kind not in ("damped", "zero"):
            raise ConfigurationError(f"unknown f0 family {self.kind!r}")

    @property
    def lipschitz(self) -> float:
        return 0.0 if self.kind == "zero" else self.K

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        return self.K * x * (1.0 + x * x) ** -0.25

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        return self.K * (1.0 + 0.5 * x * x) * (1.0 + x * x) ** -1.25


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Lévy measure on the mark space Z = R (one-dimensional marks).

    ``alpha`` in (0, 2) and ``c >= 0`` set the small-jump density on
    ``|z| <= 1``; ``eps`` is the simulation cutoff; ``skew`` in [-1, 1]
    tilts mass between positive and negative marks.
    """

    alpha: float = 0.5
    c: float = 0.2
    eps: float = 1e-2
    skew: float = 0.0
    lambda_large: float = 1.0
    large_rate: float = 2.0
    mark_dim: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ConfigurationError(f"noise.alpha must lie in (0, 2), got {self.alpha}")
        if not 0 < self.eps < 1 and self.eps != 1.0:
            raise ConfigurationError(f"noise.eps must lie in (0, 1], got {self.eps}")
        if self.c < 0 or self.lambda_large < 0 or self.large_rate <= 0:
            raise ConfigurationError("noise.c, noise.lambda_large must be >= 0 and large_rate > 0")
        if not -1 <= self.skew <= 1:
            raise ConfigurationError("noise.skew must lie in [-1, 1]")
        if self.mark_dim != 1:
            raise ConfigurationError("only one-dimensional marks are supported")

    @property
    def has_small(self) -> bool:
        return self.c > 0

    def density(self, z):
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        out = self.c * (1.0 + self.skew * np.sign(z)) * np.where(a > 0, a, 1.0) ** (-1.0 - self.alpha)
        return np.where((a > 0) & (a <= 1.0), out, 0.0)

    # closed forms; the quadrature routines below are checked against these
    def moment(self, k: float, lower: float = 0.0) -> float:
        """``int_{lower < |z| <= 1} |z|^k nu(dz)``."""
        if self.c == 0:
            return 0.0
        e = k - self.alpha
        if e == 0:
            return 2 * self.c * -math.log(lower) if lower > 0 else math.inf
        if e < 0 and lower == 0:
            return math.inf
        return 2 * self.c * (1.0 - lower**e) / e

    def small_intensity(self) -> float:
        """``nu({eps < |z| <= 1})``: rate of simulated small jumps."""
        return self.moment(0.0, self.eps)

    def mean_mark(self, lower: float | None = None) -> float:
        """``int_{lower < |z| <= 1} z nu(dz)`` (signed first moment)."""
        lower = self.eps if lower is None else lower
        return self.skew * self.moment(1.0, lower)

    def omitted_variance(self, eps: float) -> float:
        """``int_{|z| <= eps} |z|^2 nu(dz)``."""
        return self.moment(2.0) - self.moment(2.0, eps)

    def integrate(self, fn, lower: float = 0.0) -> float:
        """Adaptive quadrature of ``int_{lower < |z| <= 1} fn(z) nu(dz)``."""
        if self.c == 0:
            return 0.0
        total = 0.0
        for sign in (1.0, -1.0):
            w = self.c * (1.0 + sign * self.skew)
            if w == 0:
                continue
            # substitute z = exp(s) so the power-law weight becomes smooth
            def integrand(s, sign=sign):
                z = math.exp(s)
                return fn(sign * z) * z ** (-self.alpha)

            lo = math.log(lower) if lower > 0 else -745.0
            val, err = integrate.quad(integrand, lo, 0.0, limit=200, epsabs=1e-14, epsrel=1e-11)
            if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
                raise QuadratureError(
                    f"Lévy quadrature did not converge (value {val:g}, error {err:g}); "
                    "density too singular for the requested cutoff"
                )
            total += w * val
        return total

    def sample_small_marks(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Inverse-CDF draws from the density restricted to ``eps < |z| <= 1``."""
        u = rng.random(count)
        a = self.alpha
        mag = (self.eps**-a - u * (self.eps**-a - 1.0)) ** (-1.0 / a)
        sign = np.where(rng.random(count) < 0.5 * (1.0 + self.skew), 1.0, -1.0)
        return sign * mag

    def sample_large_marks(self, rng: np.random.Generator, count: int) -> np.ndarray:
        mag = 1.0 - np.log1p(-rng.random(count)) / self.large_rate
        sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
        return sign * mag


@dataclass(frozen=True)
class ModelConstants:
    """Constants entering the assumption inequalities for one ModelSpec."""

    m2: float            # int_{|z|<=1} z^2 nu(dz)
    mp0: float           # int_{|z|<=1} |z|^p0 nu(dz)
    M: tuple[float, ...]  # Lipschitz constants M_1..M_J
    C_loc: float         # local monotonicity
    K_c: float           # coercivity
    theta: float
    C_strong: float
    theta_prime: float
    K_growth: float
    f_min: float         # smallest admissible bound constant f
    K_gamma2: float      # quadratic jump-growth conditions
    K_gamma_p0: float    # p0-th order jump growth and integrability of gamma
    beta: float
    L: float

    @property
    def K(self) -> float:
        return max(self.K_c, self.K_growth, self.K_gamma2, self.K_gamma_p0)


def local_zeta_bound(p: float) -> float:
    """Largest ``zeta^2`` with ``<A(u)-A(v), u-v> + |zeta(|Du|^{p/2}-|Dv|^{p/2})|^2 <= 0``."""
    return 4.0 * (p - 1.0) / p**2


def strict_zeta_bound(p: float, p0: float) -> float:
    """Strict-case bound ``2(p-1)/(p^2 (p0-1)) ∧ 1/(p0-1)`` on ``zeta^2``."""
    return min(2.0 * (p - 1.0) / (p**2 * (p0 - 1.0)), 1.0 / (p0 - 1.0))


@dataclass(frozen=True)
class ModelSpec:
    scenario: str = ANISOTROPIC
    d: int = 1
    p: tuple[float, ...] = (3.0,)
    p0: float = 4.0
    zeta: tuple[float, ...] = (0.3,)
    J: int = 4
    h: HFamily = field(default_factory=HFamily)
    gamma: GammaFamily = field(default_factory=GammaFamily)
    nu: LevyMeasureSpec = field(default_factory=LevyMeasureSpec)
    f: float = 1.0
    delta: float = 0.1
    p2: float = 3.0
    f0: F0Family = field(default_factory=F0Family)

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "zeta", tuple(float(x) for x in self.zeta))
        if self.scenario not in (ANISOTROPIC, QUASILINEAR):
            raise ConfigurationError(f"unknown scenario {self.scenario!r}")
        if self.d not in (1, 2):
            raise ConfigurationError(f"grid.d must be 1 or 2, got {self.d}")
        if len(self.p) != self.d:
            raise ConfigurationError(f"model.p needs {self.d} entries, got {len(self.p)}")
        if len(self.zeta) != self.d:
            raise ConfigurationError(f"model.zeta needs {self.d} entries, got {len(self.zeta)}")
        if any(pi < 2 for pi in self.p):
            raise ConfigurationError(f"model.p: every exponent must be >= 2, got {self.p}")
        if self.J < self.d:
            raise ConfigurationError(f"model.J must be >= d = {self.d}, got {self.J}")
        if self.f < 0:
            raise ConfigurationError("model.f must be nonnegative")
        if self.delta < 0:
            raise ConfigurationError("model.delta must be nonnegative")
        if self.scenario == ANISOTROPIC and self.p0 < max(self.p):
            raise ConfigurationError(
                f"model.p0 = {self.p0} must be >= max(p) = {max(self.p)}"
            )
        if self.scenario == QUASILINEAR:
            if len(set(self.p)) != 1 or len(set(self.zeta)) != 1:
                raise ConfigurationError("quasi-linear scenario uses one p1 and one zeta for all axes")
            if self.p[0] <= 2 or self.p2 <= 2:
                raise ConfigurationError(f"quasi-linear needs p1, p2 > 2, got {self.p[0]}, {self.p2}")
            if self.p0 < self.beta + 2:
                raise ConfigurationError(
                    f"model.p0 = {self.p0} must be >= beta + 2 = {self.beta + 2:g}"
                )

    # -- derived ---------------------------------------------------------------
    @property
    def beta(self) -> float:
        if self.scenario == QUASILINEAR:
            p1 = self.p[0]
            return 2.0 * p1 / (p1 - 1.0)
        return 0.0

    @property
    def has_noise(self) -> bool:
        grad = any(z != 0 for z in self.zeta)
        hnoise = self.h.kind != "zero" and self.h.M > 0
        jumps = self.gamma.kind != "zero" and self.gamma.K > 0 and (
            self.nu.c > 0 or self.nu.lambda_large > 0
        )
        return grad or hnoise or jumps

    def admissibility(self) -> dict:
        """Per-axis zeta bounds and whether each holds."""
        rows = []
        for i, (pi, zi) in enumerate(zip(self.p, self.zeta)):
            rows.append(
                {
                    "axis": i,
                    "zeta_sq": zi**2,
                    "local_bound": local_zeta_bound(pi),
                    "strict_bound": strict_zeta_bound(pi, self.p0),
                    "local": zi**2 <= local_zeta_bound(pi),
                    "strict": zi**2 <= strict_zeta_bound(pi, self.p0),
                }
            )
        return {"axes": rows, "theta": self._theta()}

    @property
    def strict(self) -> bool:
        return all(r["strict"] for r in self.admissibility()["axes"])

    @property
    def local_admissible(self) -> bool:
        return all(r["local"] for r in self.admissibility()["axes"])

    def _theta(self) -> float:
        if self.scenario == QUASILINEAR:
            return 2.0 - (self.p0 - 1.0) * self.zeta[0] ** 2 - self.delta
        return min(2.0 - 2.0 * (self.p0 - 1.0) * z**2 for z in self.zeta) - self.delta

    def validate(self) -> "ModelSpec":
        """Closed-form admissibility; raises ConfigurationError naming the violated bound."""
        if self.scenario == ANISOTROPIC:
            for r in self.admissibility()["axes"]:
                if not r["strict"]:
                    raise ConfigurationError(
                        f"model.zeta[{r['axis']}]: zeta^2 = {r['zeta_sq']:.6g} exceeds the bound "
                        f"2(p-1)/(p^2(p0-1)) ∧ 1/(p0-1) = {r['strict_bound']:.6g}"
                    )
        else:
            z2 = self.zeta[0] ** 2
            lim = (2.0 - self.delta) / (self.p0 - 1.0)
            if not z2 < lim:
                raise ConfigurationError(
                    f"model.zeta: zeta^2 = {z2:.6g} must be < (2 - delta)/(p0 - 1) = {lim:.6g} "
                    f"(coercivity margin theta = {self._theta():.6g} <= 0)"
                )
            if z2 > local_zeta_bound(self.p[0]):
                raise ConfigurationError(
                    f"model.zeta: zeta^2 = {z2:.6g} exceeds 4(p1-1)/p1^2 = {local_zeta_bound(self.p[0]):.6g}"
                )
        if self._theta() <= 0:
            raise ConfigurationError(f"coercivity margin theta = {self._theta():.6g} must be > 0")
        c = self.constants
        if self.f < c.f_min:
            raise ConfigurationError(f"model.f = {self.f} below required bound constant {c.f_min:.6g}")
        return self

    @cached_property
    def constants(self) -> ModelConstants:
        nu, d, p0 = self.nu, self.d, self.p0
        Kg = self.gamma.lipschitz
        m2 = nu.integrate(lambda z: z * z) if nu.c > 0 else 0.0
        mp0 = nu.integrate(lambda z: abs(z) ** p0) if nu.c > 0 else 0.0
        M = tuple(self.h.lipschitz(j) for j in range(1, self.J + 1))
        grad_M2 = sum(m**2 for m in M[:d])
        rest_M2 = sum(m**2 for m in M[d:])
        gam2 = Kg**2 * m2
        quasi = self.scenario == QUASILINEAR
        Kf = self.f0.lipschitz if quasi else 0.0

        # local monotonicity: Young split |a + b|^2 <= 2|a|^2 + 2|b|^2 on gradient channels
        C_loc = 2.0 * grad_M2 + rest_M2 + gam2 + 2.0 * Kf

        theta = self._theta()
        # coercivity: split chosen so the zeta-term coefficient matches theta exactly
        if quasi:
            z2 = self.zeta[0] ** 2
            extra = (p0 - 1.0) * z2 / self.delta if self.delta > 0 else math.inf
            factors = [1.0 + extra if z2 > 0 else 1.0] * d
        else:
            factors = []
            for z in self.zeta:
                if z == 0:
                    factors.append(1.0)
                else:
                    eta = 1.0 + self.delta / ((p0 - 1.0) * z**2)
                    factors.append(1.0 + 1.0 / eta)
        K_c = (p0 - 1.0) * (sum(fac * m**2 for fac, m in zip(factors, M[:d])) + rest_M2) + gam2 + 2.0 * Kf

        C_strong = (p0 - 1.0) * (2.0 * grad_M2 + rest_M2) + gam2 + 2.0 * Kf
        theta_prime = min(2.0 ** (-(pi - 2.0)) for pi in self.p) / 2.0

        if quasi:
            q = self.p[0] / (self.p[0] - 1.0)
            K_growth = max(1.0, 2.0 ** (q - 1.0))
            f_min = 2.0 ** (q - 1.0) * (Kf / 2.0) ** q
        else:
            K_growth, f_min = 1.0, 0.0

        return ModelConstants(
            m2=m2, mp0=mp0, M=M, C_loc=C_loc, K_c=K_c, theta=theta, C_strong=C_strong,
            theta_prime=theta_prime, K_growth=K_growth, f_min=f_min,
            K_gamma2=gam2, K_gamma_p0=Kg**p0 * mp0, beta=self.beta, L=max(C_loc, 1e-300),
        )

    # -- serialization -----------------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        data = dict(data)
        for key, typ in (("h", HFamily), ("gamma", GammaFamily), ("nu", LevyMeasureSpec), ("f0", F0Family)):
            if key in data and isinstance(data[key], dict):
                data[key] = typ(**data[key])
        for key in ("p", "zeta"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def spec_hash(self, extra: dict | None = None) -> str:
        payload = {"model": self.to_dict(), **(extra or {})}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_zeta(self, zeta) -> "ModelSpec":
        return replace(self, zeta=tuple(zeta))


# -- scenarios -------------------------------------------------------------------

def quasilinear_scenario(
    p1: float = 3.0,
    p2: float = 3.0,
    d: int = 1,
    p0: float = 6.0,
    zeta: float = 0.3,
    delta: float = 0.1,
    **kwargs,
) -> ModelSpec:
    """Quasi-linear example (Case 1: d < p1, r = p1 + 1, s <= p1, t = 2).

    The default reaction ``f0`` is checked against its three growth
    inequalities over a dense scan before the spec is returned.
    """
    if d != 1:
        raise ConfigurationError(f"quasi-linear scenario is built for d = 1, got d = {d}")
    if not p1 > 2:
        raise ConfigurationError(f"p1 = {p1} violates p1 > 2")
    if not d < p1:
        raise ConfigurationError(f"Case 1 requires d < p1, got d = {d}, p1 = {p1}")
    if not p2 > 2:
        raise ConfigurationError(f"p2 = {p2} violates p2 > 2")
    f0 = kwargs.pop("f0", F0Family())
    kwargs.setdefault("f", max(1.0, 2.0 ** (1.0 / (p1 - 1.0)) * (f0.lipschitz / 2.0) ** (p1 / (p1 - 1.0))))
    spec = ModelSpec(
        scenario=QUASILINEAR, d=d, p=(p1,) * d, p0=p0, zeta=(zeta,) * d, p2=p2,
        f0=f0, delta=delta, **kwargs,
    )
    audit_f0(spec)
    return spec.validate()


def audit_f0(spec: ModelSpec, r: float | None = None, s: float = 0.0, t: float = 2.0):
    """Dense-scan check of the three reaction inequalities with ``K = Lip(f0)``."""
    p1 = spec.p[0]
    r = p1 + 1.0 if r is None else r
    K = max(spec.f0.lipschitz, 1e-300)
    x = np.linspace(-50.0, 50.0, 2001)
    X, Y = np.meshgrid(x, x[::10], indexing="ij")
    f0 = spec.f0
    checks = {
        "f0(x) x <= K(1 + |x|^(p1/2+1))": np.max(f0(x) * x - K * (1 + np.abs(x) ** (p1 / 2 + 1))),
        "|f0(x)| <= K(1 + |x|^r)": np.max(np.abs(f0(x)) - K * (1 + np.abs(x) ** r)),
        "(f0(x)-f0(y))(x-y) <= K(1+|y|^s)|x-y|^t": np.max(
            (f0(X) - f0(Y)) * (X - Y) - K * (1 + np.abs(Y) ** s) * np.abs(X - Y) ** t
        ),
    }
    for name, worst in checks.items():
        if worst > 1e-9:
            raise ConfigurationError(f"reaction family violates {name} (worst excess {worst:.3g})")
    return checks


PRESETS = {
    "anisotropic-1d": dict(d=1, p=(3.0,), p0=4.0, zeta=(0.3,)),
    "anisotropic-2d": dict(d=2, p=(2.5, 4.0), p0=6.0, zeta=(0.25, 0.2)),
}


def preset(name: str, **overrides) -> ModelSpec:
    if name == "quasilinear-case1":
        return quasilinear_scenario(**overrides)
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted([*PRESETS, 'quasilinear-case1'])}"
        )
    return ModelSpec(**{**PRESETS[name], **overrides}).validate()


def heat_spec(d: int = 1) -> ModelSpec:
    """Noise-free linear heat equation ``du = Delta u dt``."""
    return ModelSpec(
        d=d, p=(2.0,) * d, p0=2.0, zeta=(0.0,) * d, J=max(d, 1),
        h=HFamily(kind="zero"), gamma=GammaFamily(kind="zero"),
        nu=LevyMeasureSpec(c=0.0, lambda_large=0.0),
    )
