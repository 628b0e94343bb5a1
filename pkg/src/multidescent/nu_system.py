"""Self-consistent scale system behind the asymptotic risk.

At the evaluation point on the imaginary axis the coupled resolvent scales
are purely imaginary with positive imaginary parts b_1..b_{K+1}, so the
system is solved directly in those positive real variables:

    sqrt(lam) b_c   + m2_c b_c b_n + m1_c b_c b_n / (1 + T) = psi_c    (c <= K)
    sqrt(lam) b_n   + sum_c m2_c b_c b_n + T / (1 + T)      = psi_n

with b_n = b_{K+1}, T = b_n * sum_c m1_c b_c, m1_c = mu_{c,1}^2 and
m2_c = mu_{c,2}^2.  The solver is a damped fixed-point iteration on the
positivity-preserving rearrangement b_j = psi_j / (positive bracket), with
geometric continuation in lam from an easy starting value down to the
target so the iterate tracks the analytic branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .activations import Moments

__all__ = [
    "TheorySpec",
    "NuStar",
    "SolverConfig",
    "InvalidSpec",
    "NonPositiveInput",
    "NoConvergence",
    "residual_vector",
    "solve_nu",
    "verify_complex",
]


class InvalidSpec(ValueError):
    """Problem instance violates a hard precondition (e.g. lambda <= 0)."""


class NonPositiveInput(ValueError):
    """A candidate solution vector has a nonpositive entry."""


class NoConvergence(RuntimeError):
    """Fixed-point iteration missed the tolerance within max_iter."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class TheorySpec:
    """Asymptotic problem instance.

    ``psi`` holds the K feature-width ratios N_c/d, ``psi_n`` the sample
    ratio n/d, ``moments`` one Gaussian moment triple per activation.
    ``F0`` only matters when an empirical run is derived from this
    instance; the asymptotic risk does not depend on it.
    """

    psi: tuple[float, ...]
    psi_n: float
    moments: tuple[Moments, ...]
    lam: float
    F1: float = 1.0
    tau: float = 0.0
    F0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(float(p) for p in self.psi))
        object.__setattr__(self, "moments", tuple(self.moments))
        if len(self.psi) == 0:
            raise InvalidSpec("need at least one feature component")
        if len(self.moments) != len(self.psi):
            raise InvalidSpec("psi and moments must have the same length")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise InvalidSpec("lambda must be > 0")
        if any(not (p > 0.0 and math.isfinite(p)) for p in self.psi):
            raise InvalidSpec("all psi entries must be > 0")
        if not (self.psi_n > 0.0 and math.isfinite(self.psi_n)):
            raise InvalidSpec("psi_n must be > 0")
        if self.F1 < 0.0 or self.tau < 0.0:
            raise InvalidSpec("F1 and tau must be >= 0")

    @property
    def K(self) -> int:
        return len(self.psi)

    @property
    def psi_full(self) -> tuple[float, ...]:
        """psi_1..psi_K followed by psi_n."""
        return self.psi + (self.psi_n,)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 100_000
    damping: float = 0.5
    continuation_start: float | None = None  # None -> max(lam, 1.0)
    continuation_factor: float = 0.5

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be > 0")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must be in (0, 1]")
        if not (0.0 < self.continuation_factor < 1.0):
            raise ValueError("continuation_factor must be in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class NuStar:
    """Converged positive imaginary parts b_1..b_{K+1} plus solve diagnostics."""

    b: np.ndarray
    residual: float
    iterations: int
    lambda_path: list[float] = field(default_factory=list)


def _coeffs(spec: TheorySpec) -> tuple[list[float], list[float]]:
    m1 = [m.mu1 * m.mu1 for m in spec.moments]
    m2 = [m.mu2_sq for m in spec.moments]
    return m1, m2


def _residuals(psi, m1, m2, sqrt_lam, b) -> list[float]:
    k = len(psi) - 1
    bn = b[k]
    t = bn * sum(m1[c] * b[c] for c in range(k))
    opt = 1.0 + t
    res = [
        sqrt_lam * b[c] + m2[c] * b[c] * bn + m1[c] * b[c] * bn / opt - psi[c]
        for c in range(k)
    ]
    s2 = sum(m2[c] * b[c] for c in range(k))
    res.append(sqrt_lam * bn + s2 * bn + t / opt - psi[k])
    return res


def residual_vector(spec: TheorySpec, b) -> np.ndarray:
    """Residuals of the positive-variable system at candidate ``b``.

    ``b`` must have K+1 strictly positive entries; the residual is zero at
    the solution.
    """
    b = [float(x) for x in np.asarray(b).ravel()]
    if len(b) != spec.K + 1:
        raise NonPositiveInput(f"expected {spec.K + 1} entries, got {len(b)}")
    if any(x <= 0.0 for x in b):
        raise NonPositiveInput("all entries of b must be > 0")
    m1, m2 = _coeffs(spec)
    return np.array(_residuals(list(spec.psi_full), m1, m2, math.sqrt(spec.lam), b))


def _solve_stage(psi, m1, m2, lam, b, cfg: SolverConfig):
    """Damped fixed-point iteration at a fixed lam; mutates and returns b."""
    k = len(psi) - 1
    sqrt_lam = math.sqrt(lam)
    gamma = cfg.damping
    keep = 1.0 - gamma
    for it in range(1, cfg.max_iter + 1):
        bn = b[k]
        s1 = sum(m1[c] * b[c] for c in range(k))
        s2 = sum(m2[c] * b[c] for c in range(k))
        opt = 1.0 + bn * s1
        for c in range(k):
            b[c] = keep * b[c] + gamma * psi[c] / (sqrt_lam + m2[c] * bn + m1[c] * bn / opt)
        b[k] = keep * bn + gamma * psi[k] / (sqrt_lam + s2 + s1 / opt)
        res = _residuals(psi, m1, m2, sqrt_lam, b)
        rel = max(abs(r) / p for r, p in zip(res, psi))
        if rel <= cfg.tol:
            return b, it, rel
    raise NoConvergence(
        f"residual {rel:.3e} > tol {cfg.tol:.1e} after {cfg.max_iter} iterations at lambda={lam:.3e}",
        residual=rel,
        iterations=cfg.max_iter,
    )


def solve_nu(spec: TheorySpec, cfg: SolverConfig | None = None, b0=None) -> NuStar:
    """Solve the positive-variable system at spec.lam.

    When ``b0`` is given it is tried as a warm start directly at the target
    lambda; on failure the solver falls back to the cold continuation path
    (solve at max(lam, 1), then shrink lambda geometrically, warm-starting
    each stage from the previous one).
    """
    cfg = cfg or SolverConfig()
    psi = list(spec.psi_full)
    m1, m2 = _coeffs(spec)
    target = spec.lam

    if b0 is not None:
        start = [float(x) for x in np.asarray(b0).ravel()]
        if len(start) == len(psi) and all(x > 0.0 for x in start):
            try:
                b, iters, res = _solve_stage(psi, m1, m2, target, list(start), cfg)
                return NuStar(b=np.array(b), residual=res, iterations=iters,
                              lambda_path=[target])
            except NoConvergence:
                pass

    lam0 = cfg.continuation_start if cfg.continuation_start is not None else max(target, 1.0)
    if target >= lam0:
        path = [target]
    else:
        path = [lam0]
        while path[-1] * cfg.continuation_factor > target:
            path.append(path[-1] * cfg.continuation_factor)
        path.append(target)

    b = [p / (math.sqrt(path[0]) + 1.0) for p in psi]
    total = 0
    res = math.inf
    for lam_k in path:
        b, iters, res = _solve_stage(psi, m1, m2, lam_k, b, cfg)
        total += iters
    return NuStar(b=np.array(b), residual=res, iterations=total, lambda_path=path)


def verify_complex(spec: TheorySpec, nu: NuStar) -> float:
    """Max absolute residual of the complex system at nu_j = i b_j.

    Substitutes xi = sqrt(lam) i and the purely imaginary candidates into
    the system exactly as written in complex arithmetic, independently of
    the real-variable rearrangement used by the solver.
    """
    xi = complex(0.0, math.sqrt(spec.lam))
    nu_c = [complex(0.0, float(x)) for x in nu.b]
    k = spec.K
    m1, m2 = _coeffs(spec)
    denom = 1.0 - sum(m1[c] * nu_c[c] for c in range(k)) * nu_c[k]
    worst = 0.0
    for c in range(k):
        lhs = nu_c[c] * (-xi - m2[c] * nu_c[k] - m1[c] * nu_c[k] / denom)
        worst = max(worst, abs(lhs - spec.psi[c]))
    s1 = sum(m1[c] * nu_c[c] for c in range(k))
    s2 = sum(m2[c] * nu_c[c] for c in range(k))
    lhs = nu_c[k] * (-xi - s2 - s1 / denom)
    worst = max(worst, abs(lhs - spec.psi_n))
    return worst
