"""Residual checks for the projection equations, trace and K0 class.

Two independent routes decide idempotency: the coefficient route forms p*p
with the twisted product, the oracle route lets p act on test functions on
the circle, (p xi)(x) = sum_m p_m(x - m theta) xi(x - m theta), and compares
p(p xi) with p xi by plain pointwise evaluation.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import algebra
from . import circlefn as cf
from .algebra import K0Class, TorusElement


class NotPowerRieffelForm(ValueError):
    pass


class NoClassFound(ValueError):
    pass


class AmbiguousClass(ValueError):
    pass


def default_tolerance() -> float:
    return float(os.environ.get("NCTORUS_TOL", "1e-9"))


@dataclass(frozen=True)
class VerifyConfig:
    tol: float = field(default_factory=default_tolerance)
    samples: int = cf.DEFAULT_GRID
    oracle_trials: int = 100
    oracle_probes: int = 100
    oracle_tol: float = 1e-8
    seed: int = 0
    order_tol: float = 1e-12
    k0_max_coeff: int = 20
    k0_tol: float = 1e-6


@dataclass
class VerificationReport:
    residual_selfadjoint: float
    residual_idempotent_in_band: float
    residual_idempotent_overflow: float
    residual_eqK: float
    residual_eq0: float
    residual_oracle: Optional[float]
    trace: float
    k0: Optional[K0Class]
    order: int
    pass_: bool
    tolerance: float
    samples: int
    config: dict

    def to_json(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("pass_")
        out["k0"] = None if self.k0 is None else [self.k0.m, self.k0.n]
        return out


def _grid(funcs, samples: int) -> np.ndarray:
    """Uniform grid plus the breakpoints and midpoints of every function."""
    pts = [np.arange(samples) / samples]
    for f in funcs:
        if not f.is_zero:
            pts.append(f.sample_points(16))
    return np.unique(np.concatenate(pts))


def _sup(f: cf.CircleFunction, x: np.ndarray) -> float:
    if f.is_zero:
        return 0.0
    return float(np.max(np.abs(f(x))))


def check_selfadjoint(p: TorusElement, samples: int = cf.DEFAULT_GRID) -> float:
    """max_k sup_x |p_k(x) - p_{-k}(x + k theta)|."""
    worst = 0.0
    for k in range(-p.M, p.M + 1):
        other = p.coeff(-k).shift(k * p.theta)
        diff = cf.pointwise_add(p.coeff(k), cf.pointwise_scale(other, -1.0))
        worst = max(worst, _sup(diff, _grid([diff], samples)))
    return worst


def check_idempotent(p: TorusElement, samples: int = cf.DEFAULT_GRID) -> tuple[float, float]:
    """(in-band residual |(p^2)_k - p_k| for |k| <= M, overflow |(p^2)_k| for M < |k| <= 2M)."""
    q = algebra.multiply(p, p)
    M = p.M
    in_band = 0.0
    overflow = 0.0
    for k in range(-2 * M, 2 * M + 1):
        if abs(k) <= M:
            diff = cf.pointwise_add(q.coeff(k), cf.pointwise_scale(p.coeff(k), -1.0))
            in_band = max(in_band, _sup(diff, _grid([diff], samples)))
        else:
            qk = q.coeff(k)
            overflow = max(overflow, _sup(qk, _grid([qk], samples)))
    return in_band, overflow


def check_split_conditions(p: TorusElement, samples: int = cf.DEFAULT_GRID) -> tuple[float, float]:
    """Residuals of p_k(x)(p_0(x) + p_0(x + k theta) - 1) for k >= 1 and of the
    k = 0 identity sum_k [p_k(x)^2 + p_k(x - k theta)^2] + p_0(x)(p_0(x) - 1)."""
    theta = p.theta
    p0 = p.coeff(0)
    x = _grid(list(p.coeffs.values()) + [f.shift(k * theta) for k, f in p.coeffs.items()], samples)
    p0x = p0(x)
    eq_k = 0.0
    total = p0x * (p0x - 1.0)
    for k in range(1, p.M + 1):
        pk = p.coeff(k)
        if pk.is_zero:
            continue
        pkx = pk(x)
        eq_k = max(eq_k, float(np.max(np.abs(pkx * (p0x + p0(x + k * theta) - 1.0)))))
        total = total + pkx**2 + pk(x - k * theta) ** 2
    return eq_k, float(np.max(np.abs(total)))


def check_power_rieffel(p: TorusElement, samples: int = cf.DEFAULT_GRID, order_tol: float = 1e-12) -> float:
    M = algebra.order(p, order_tol, samples)
    if M == 0:
        raise NotPowerRieffelForm("element has no nonzero off-diagonal band")
    stray = [k for k in p.coeffs if k not in (0, M, -M) and p.coeffs[k].sup_norm(samples) > order_tol]
    if stray:
        raise NotPowerRieffelForm(f"bands {sorted(stray)} are nonzero; expected only 0 and ±{M}")
    theta = p.theta
    p0, pM = p.coeff(0), p.coeff(M)
    x = _grid([p0, pM, pM.shift(M * theta), pM.shift(-M * theta), p0.shift(M * theta)], samples)
    a = pM(x + M * theta) * pM(x)
    b = pM(x) ** 2 + pM(x - M * theta) ** 2 + p0(x) * (p0(x) - 1.0)
    c = pM(x) * (1.0 - p0(x) - p0(x + M * theta))
    return float(max(np.max(np.abs(a)), np.max(np.abs(b)), np.max(np.abs(c))))


def k0_class(theta: float, tr: float, max_coeff: int = 20, tol: float = 1e-6) -> K0Class:
    """The unique (m, n) with |m|, |n| <= max_coeff and m + n theta = tr within tol."""
    if max_coeff < 1:
        raise ValueError("max_coeff must be at least 1")
    n = np.arange(-max_coeff, max_coeff + 1)
    hits = []
    near = []
    for ni in n:
        for mi in range(-max_coeff, max_coeff + 1):
            v = mi + ni * theta
            if not -tol <= v <= 1.0 + tol:
                continue
            err = abs(v - tr)
            if err < tol:
                hits.append((err, mi, int(ni)))
            elif err < 10 * tol:
                near.append((mi, int(ni)))
    if not hits:
        raise NoClassFound(f"no m + n*theta within {tol:g} of trace {tr!r}")
    if len(hits) > 1 or near:
        cands = [(m, n) for _, m, n in hits] + near
        raise AmbiguousClass(f"several classes fit trace {tr!r}: {cands}")
    _, m, n = hits[0]
    return K0Class(m, n)


# -- oracle ------------------------------------------------------------------


def _test_function(rng: np.random.Generator, trial: int):
    j = trial % 6
    if j < 5:
        freq = j + 1
        phase = rng.uniform(0.0, 2.0 * np.pi)
        return lambda x: np.sin(2.0 * np.pi * freq * x + phase)
    centre = rng.uniform(0.0, 1.0)
    return lambda x: np.exp(np.cos(2.0 * np.pi * (x - centre)) - 1.0)


def _act(p: TorusElement, xi):
    theta = p.theta
    terms = list(p.coeffs.items())

    def eta(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, pm in terms:
            y = x - m * theta
            out += pm(y) * xi(y)
        return out

    return eta


def oracle_idempotency(p: TorusElement, trials: int = 100, probes: int = 100, seed: int = 0) -> float:
    """max |p(p xi) - p xi| over random test functions xi and random probes."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        xi = _test_function(rng, t)
        x = rng.uniform(0.0, 1.0, probes)
        eta = _act(p, xi)
        twice = _act(p, eta)
        worst = max(worst, float(np.max(np.abs(twice(x) - eta(x)))))
    return worst


def verify(p: TorusElement, config: Optional[VerifyConfig] = None) -> VerificationReport:
    config = config or VerifyConfig()
    s = config.samples
    sa = check_selfadjoint(p, s)
    in_band, overflow = check_idempotent(p, s)
    eq_k, eq_0 = check_split_conditions(p, s)
    oracle = None
    if config.oracle_trials > 0:
        oracle = oracle_idempotency(p, config.oracle_trials, config.oracle_probes, config.seed)
    tr = algebra.trace(p)
    try:
        k0 = k0_class(p.theta, tr, config.k0_max_coeff, config.k0_tol)
    except (NoClassFound, AmbiguousClass):
        k0 = None
    residuals = [sa, in_band, overflow, eq_k, eq_0]
    ok = all(math.isfinite(r) and r <= config.tol for r in residuals)
    if oracle is not None:
        ok = ok and oracle <= max(config.oracle_tol, config.tol)
    return VerificationReport(
        residual_selfadjoint=sa,
        residual_idempotent_in_band=in_band,
        residual_idempotent_overflow=overflow,
        residual_eqK=eq_k,
        residual_eq0=eq_0,
        residual_oracle=oracle,
        trace=tr,
        k0=k0,
        order=algebra.order(p, config.order_tol, s),
        pass_=ok,
        tolerance=config.tol,
        samples=s,
        config=asdict(config),
    )
