"""Elements of the irrational rotation algebra as finite sums sum_k U^k a_k(V).

Multiplication follows from VU = e^{2 pi i theta} UV:

    (ab)_k(x) = sum_{m + j = k} a_m(x + j theta) b_j(x)

and the adjoint is (a*)_k(x) = conj(a_{-k}(x + k theta)); all coefficient
functions here are real so conj is the identity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from . import circlefn as cf
from .circlefn import CircleFunction


class ThetaMismatch(ValueError):
    """Operands belong to algebras with different rotation parameters."""


class DegenerateThetaWarning(UserWarning):
    pass


def check_theta(theta: float, max_denominator: int = 64, tol: float = 1e-12) -> None:
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    approx = Fraction(theta).limit_denominator(max_denominator)
    if abs(theta - float(approx)) <= tol:
        warnings.warn(
            f"theta={theta} is within {tol:g} of {approx}; shifts by theta are nearly periodic",
            DegenerateThetaWarning,
            stacklevel=2,
        )


@dataclass(frozen=True)
class K0Class:
    """Label of the K0 class with trace m + n*theta."""

    m: int
    n: int

    def value(self, theta: float) -> float:
        return self.m + self.n * theta

    def __str__(self):
        return f"[{self.m} + {self.n}θ]"


@dataclass(frozen=True)
class TorusElement:
    theta: float
    coeffs: Mapping[int, CircleFunction]
    construction: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        kept = {int(k): f for k, f in sorted(self.coeffs.items()) if not f.is_zero}
        object.__setattr__(self, "coeffs", kept)

    @property
    def M(self) -> int:
        """Order bound: largest |k| with a stored coefficient."""
        return max((abs(k) for k in self.coeffs), default=0)

    def coeff(self, k: int) -> CircleFunction:
        return self.coeffs.get(k, cf.zero())

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return subtract(self, other)

    def __mul__(self, other):
        if isinstance(other, TorusElement):
            return multiply(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)


def _same_theta(a: TorusElement, b: TorusElement) -> float:
    if a.theta != b.theta:
        raise ThetaMismatch(f"theta {a.theta!r} != {b.theta!r}")
    return a.theta


def one(theta: float) -> TorusElement:
    return TorusElement(theta, {0: cf.one()})


def zero(theta: float) -> TorusElement:
    return TorusElement(theta, {})


def monomial(theta: float, k: int, f: CircleFunction) -> TorusElement:
    """The element U^k f(V)."""
    return TorusElement(theta, {k: f})


def add(a: TorusElement, b: TorusElement) -> TorusElement:
    theta = _same_theta(a, b)
    out = dict(a.coeffs)
    for k, f in b.coeffs.items():
        out[k] = cf.pointwise_add(out[k], f) if k in out else f
    return TorusElement(theta, out)


def scale(a: TorusElement, c: float) -> TorusElement:
    return TorusElement(a.theta, {k: cf.pointwise_scale(f, c) for k, f in a.coeffs.items()})


def subtract(a: TorusElement, b: TorusElement) -> TorusElement:
    return add(a, scale(b, -1.0))


def multiply(a: TorusElement, b: TorusElement) -> TorusElement:
    theta = _same_theta(a, b)
    out: dict[int, CircleFunction] = {}
    for m, am in a.coeffs.items():
        for j, bj in b.coeffs.items():
            term = cf.pointwise_mul(am.shift(j * theta), bj)
            k = m + j
            out[k] = cf.pointwise_add(out[k], term) if k in out else term
    return TorusElement(theta, out)


def adjoint(a: TorusElement) -> TorusElement:
    theta = a.theta
    return TorusElement(theta, {-k: f.shift(-k * theta) for k, f in a.coeffs.items()})


def trace(a: TorusElement) -> float:
    f = a.coeffs.get(0)
    return 0.0 if f is None else f.integrate()


def order(a: TorusElement, tol: float = 1e-12, samples: int = cf.DEFAULT_GRID) -> int:
    if tol <= 0.0:
        raise ValueError("order tolerance must be positive")
    nonzero = [abs(k) for k, f in a.coeffs.items() if k != 0 and f.sup_norm(samples) > tol]
    return max(nonzero, default=0)


def max_pointwise_difference(a: TorusElement, b: TorusElement, samples: int = cf.DEFAULT_GRID) -> float:
    """Coefficientwise sup distance on the union of both sample grids."""
    _same_theta(a, b)
    worst = 0.0
    for k in set(a.coeffs) | set(b.coeffs):
        worst = max(worst, cf.pointwise_add(a.coeff(k), cf.pointwise_scale(b.coeff(k), -1.0)).sup_norm(samples))
    return worst


def to_json(a: TorusElement) -> dict:
    return {
        "theta": a.theta,
        "coeffs": {str(k): f.to_json() for k, f in sorted(a.coeffs.items())},
    }


def from_json(obj: Mapping) -> TorusElement:
    theta = float(obj["theta"])
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    return TorusElement(theta, {int(k): cf.from_json(v) for k, v in obj["coeffs"].items()})
