"""Piecewise continuous real functions on the circle R/Z.

Functions are stored as symbolic segment descriptors so that evaluation at an
arbitrary point is exact up to floating point, and shifts never resample.
Pointwise arithmetic builds lazy composites that keep the union of operand
breakpoints, which is what integration and sup-norm sampling rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_GRID = 4096

# ---------------------------------------------------------------------------
# transition profiles


def _linear(u):
    return u


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u)


def _cosine(u):
    return 0.5 * (1.0 - np.cos(np.pi * u))


@dataclass(frozen=True)
class BumpProfile:
    """A continuous map [0, 1] -> [0, 1] with d(0) = 0 and d(1) = 1."""

    kind: str
    evaluator: Callable = field(compare=False, repr=False)

    def __call__(self, u):
        return self.evaluator(u)

    @classmethod
    def custom(cls, fn: Callable) -> "BumpProfile":
        if fn(0.0) != 0.0 or fn(1.0) != 1.0:
            raise ValueError("custom profile must satisfy d(0) = 0 and d(1) = 1 exactly")
        grid = np.linspace(0.0, 1.0, 257)
        vals = np.asarray(fn(grid), dtype=float)
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("custom profile must take values in [0, 1]")
        return cls("custom", fn)


PROFILES = {
    "linear": BumpProfile("linear", _linear),
    "smoothstep": BumpProfile("smoothstep", _smoothstep),
    "cosine": BumpProfile("cosine", _cosine),
}


def get_profile(profile: str | BumpProfile | None) -> BumpProfile:
    if profile is None:
        return PROFILES["smoothstep"]
    if isinstance(profile, BumpProfile):
        return profile
    try:
        return PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}") from None


def _profile_name(profile: BumpProfile) -> str:
    if profile.kind not in PROFILES:
        raise ValueError("custom profiles cannot be serialized")
    return profile.kind


# ---------------------------------------------------------------------------
# segment descriptors


def _wrap01(y: np.ndarray) -> np.ndarray:
    y = np.mod(y, 1.0)
    y[y >= 1.0] = 0.0
    return y


@dataclass(frozen=True)
class Const:
    value: float

    def __call__(self, y):
        return np.full(np.shape(y), self.value, dtype=float)

    def shifted(self, s):
        return self

    def to_json(self):
        return {"kind": "const", "params": {"value": self.value}}


@dataclass(frozen=True)
class Ramp:
    """base + height * shape((x - x0) / eps) on a window starting at x0.

    ``shape`` is "rise" (the profile itself) or "bump" (profile up to the
    midpoint and back down, so both ends sit at ``base``).
    """

    profile: BumpProfile
    x0: float
    eps: float
    base: float = 0.0
    height: float = 1.0
    shape: str = "rise"

    def unit(self, y):
        # position inside [0, eps], robust to wrap around 1
        w = np.mod(np.asarray(y, dtype=float) - self.x0 + 0.5 - 0.5 * self.eps, 1.0)
        w = w - 0.5 + 0.5 * self.eps
        return np.clip(w / self.eps, 0.0, 1.0)

    def transition(self, u):
        if self.shape == "rise":
            return self.profile(u)
        return np.where(u <= 0.5, self.profile(2.0 * u), self.profile(2.0 - 2.0 * u))

    def __call__(self, y):
        u = self.unit(y)
        return self.base + self.height * self.transition(u)

    def shifted(self, s):
        return replace(self, x0=self.x0 - s)

    def complement(self) -> "Ramp":
        return replace(self, base=1.0 - self.base, height=-self.height)

    def start_value(self) -> float:
        return float(self.base + self.height * self.transition(np.float64(0.0)))

    def end_value(self) -> float:
        return float(self.base + self.height * self.transition(np.float64(1.0)))

    def _params(self):
        return {
            "profile": _profile_name(self.profile),
            "x0": self.x0,
            "eps": self.eps,
            "base": self.base,
            "height": self.height,
            "shape": self.shape,
        }

    def to_json(self):
        return {"kind": "ramp", "params": self._params()}


@dataclass(frozen=True)
class SqrtRamp:
    """sqrt(d (1 - d)) for a ramp d; continuous even where d has a kink."""

    ramp: Ramp

    def __call__(self, y):
        d = self.ramp(y)
        return np.sqrt(np.maximum(d * (1.0 - d), 0.0))

    def shifted(self, s):
        return SqrtRamp(self.ramp.shifted(s))

    def to_json(self):
        return {"kind": "sqrt_ramp", "params": self.ramp._params()}


def _segment_from_json(obj: dict):
    kind, params = obj["kind"], obj.get("params", {})
    if kind == "const":
        return Const(float(params["value"]))
    if kind in ("ramp", "sqrt_ramp"):
        ramp = Ramp(
            get_profile(params["profile"]),
            float(params["x0"]),
            float(params["eps"]),
            float(params.get("base", 0.0)),
            float(params.get("height", 1.0)),
            params.get("shape", "rise"),
        )
        return ramp if kind == "ramp" else SqrtRamp(ramp)
    raise ValueError(f"unknown segment kind {kind!r}")


# ---------------------------------------------------------------------------
# quadrature

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _gauss(fn, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    return half * (vals @ _GL_WEIGHTS)


def adaptive_integral(fn, a: float, b: float, tol: float = 1e-11, max_depth: int = 60) -> float:
    """Integrate a smooth vectorized ``fn`` over [a, b] by interval bisection.

    Each panel compares the 10-point Gauss-Legendre rule against the sum over
    its two halves; panels are accepted once the difference is below their
    share of ``tol``.
    """
    if b <= a:
        return 0.0
    total_len = b - a
    lo = np.array([a])
    hi = np.array([b])
    coarse = _gauss(fn, lo, hi)
    result = 0.0
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        left = _gauss(fn, lo, mid)
        right = _gauss(fn, mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        ok = err <= np.maximum(tol * (hi - lo) / total_len, 1e-15)
        result += float(np.sum(fine[ok]))
        if ok.all():
            return result
        bad = ~ok
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    return result + float(np.sum(coarse))


# ---------------------------------------------------------------------------
# functions


class CircleFunction:
    """Base class for real functions on R/Z evaluated at points mod 1."""

    approximate = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._eval(_wrap01(np.atleast_1d(x).astype(float, copy=True)))
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def _eval(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def breakpoints(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return False

    def shift(self, s: float) -> "CircleFunction":
        """Return g with g(x) = f(x + s)."""
        raise NotImplementedError

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return pointwise_add(self, _coerce(other))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return pointwise_scale(self, float(other))
        return pointwise_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return pointwise_scale(self, -1.0)

    def __sub__(self, other):
        return pointwise_add(self, pointwise_scale(_coerce(other), -1.0))

    def __rsub__(self, other):
        return pointwise_add(_coerce(other), pointwise_scale(self, -1.0))

    # analysis -------------------------------------------------------------
    def sample_points(self, samples: int = DEFAULT_GRID) -> np.ndarray:
        """Uniform grid plus every breakpoint and every segment midpoint."""
        bp = self.breakpoints
        edges = np.append(bp, bp[0] + 1.0)
        mids = 0.5 * (edges[:-1] + edges[1:])
        grid = np.arange(samples) / samples
        return np.unique(_wrap01(np.concatenate([grid, bp, mids])))

    def integrate(self, tol: float = 1e-11) -> float:
        if self.is_zero:
            return 0.0
        bp = self.breakpoints
        edges = np.append(bp, 1.0)
        per = tol / max(len(bp), 1)
        return sum(adaptive_integral(self._eval_interior, a, b, per) for a, b in zip(edges[:-1], edges[1:]))

    def _eval_interior(self, y):
        return self._eval(_wrap01(np.array(y, dtype=float)))

    def sup_norm(self, samples: int = DEFAULT_GRID) -> float:
        if self.is_zero:
            return 0.0
        return float(np.max(np.abs(self(self.sample_points(samples)))))

    def to_json(self, grid: int = DEFAULT_GRID) -> dict:
        x = np.arange(grid) / grid
        return {
            "breakpoints": [0.0],
            "segments": [{"kind": "samples", "params": {"grid": grid, "values": self(x).tolist()}}],
            "approximate": True,
        }


def _coerce(value) -> CircleFunction:
    if isinstance(value, CircleFunction):
        return value
    return const(float(value))


class Piecewise(CircleFunction):
    """Segments tiling [0, 1); the function is ``base(x + offset)``.

    Shifts only move ``offset``, so repeated shifts compose exactly.
    """

    def __init__(self, breakpoints: Sequence[float], segments: Sequence, offset: float = 0.0):
        bp = np.asarray(breakpoints, dtype=float)
        if len(bp) != len(segments) or len(bp) == 0:
            raise ValueError("need one segment per breakpoint")
        if bp[0] != 0.0 or np.any(np.diff(bp) <= 0.0) or bp[-1] >= 1.0:
            raise ValueError("breakpoints must start at 0, increase strictly and stay below 1")
        self._bp = bp
        self.segments = tuple(segments)
        self.offset = float(offset)

    def __repr__(self):
        return f"Piecewise(breakpoints={self._bp.tolist()}, segments={list(self.segments)}, offset={self.offset})"

    def _eval(self, y):
        if self.offset != 0.0:
            y = _wrap01(y + self.offset)
        idx = np.searchsorted(self._bp, y, side="right") - 1
        out = np.empty_like(y)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if mask.any():
                out[mask] = seg(y[mask])
        return out

    @property
    def breakpoints(self):
        bp = _wrap01(self._bp - self.offset)
        return np.unique(np.append(bp, 0.0))

    @property
    def is_zero(self):
        return all(isinstance(s, Const) and s.value == 0.0 for s in self.segments)

    @property
    def is_constant(self):
        return len(self.segments) == 1 and isinstance(self.segments[0], Const)

    def shift(self, s):
        if s == 0.0 or self.is_constant:
            return self
        return Piecewise(self._bp, self.segments, self.offset + s)

    def materialize(self) -> "Piecewise":
        """Equivalent function with offset 0 and re-indexed breakpoints."""
        if self.offset == 0.0:
            return self
        off = self.offset
        starts = _wrap01(self._bp - off)
        order = np.argsort(starts, kind="stable")
        starts = starts[order]
        segs = [self.segments[i].shifted(off) for i in order]
        if starts[0] != 0.0:
            # the last segment wraps across 1: split it there
            starts = np.insert(starts, 0, 0.0)
            segs.insert(0, segs[-1])
        keep = np.append(True, np.diff(starts) > 0.0)
        return Piecewise(starts[keep], [s for s, k in zip(segs, keep) if k])

    def complement(self) -> "Piecewise":
        """Exact 1 - f for constant and ramp segments."""
        segs = []
        for s in self.segments:
            if isinstance(s, Const):
                segs.append(Const(1.0 - s.value))
            elif isinstance(s, Ramp):
                segs.append(s.complement())
            else:
                raise ValueError("square-root segments have no exact complement")
        return Piecewise(self._bp, segs, self.offset)

    def to_json(self, grid: int = DEFAULT_GRID) -> dict:
        m = self.materialize()
        return {
            "breakpoints": m._bp.tolist(),
            "segments": [s.to_json() for s in m.segments],
        }


class Sampled(CircleFunction):
    """Periodic linear interpolation of values on a uniform grid."""

    approximate = True

    def __init__(self, values: Sequence[float], offset: float = 0.0):
        self.values = np.asarray(values, dtype=float)
        self.offset = float(offset)

    def _eval(self, y):
        if self.offset != 0.0:
            y = _wrap01(y + self.offset)
        n = len(self.values)
        t = y * n
        i = np.floor(t).astype(int) % n
        frac = t - np.floor(t)
        return (1.0 - frac) * self.values[i] + frac * self.values[(i + 1) % n]

    @property
    def breakpoints(self):
        n = len(self.values)
        return np.unique(_wrap01(np.arange(n) / n - self.offset))

    def shift(self, s):
        return Sampled(self.values, self.offset + s)


class Composite(CircleFunction):
    """Lazy pointwise sum or product of other circle functions."""

    def __init__(self, op: str, operands: Iterable[CircleFunction], factor: float = 1.0):
        self.op = op
        self.operands = tuple(operands)
        self.factor = float(factor)

    @property
    def approximate(self):
        return any(o.approximate for o in self.operands)

    def _eval(self, y):
        vals = [o._eval(y) for o in self.operands]
        if self.op == "add":
            out = np.sum(vals, axis=0)
        else:
            out = np.prod(vals, axis=0)
        return out if self.factor == 1.0 else self.factor * out

    @property
    def breakpoints(self):
        return np.unique(np.concatenate([o.breakpoints for o in self.operands]))

    def shift(self, s):
        return Composite(self.op, [o.shift(s) for o in self.operands], self.factor)


# ---------------------------------------------------------------------------
# constructors and pointwise operations


def const(c: float) -> Piecewise:
    return Piecewise([0.0], [Const(float(c))])


def zero() -> Piecewise:
    return const(0.0)


def one() -> Piecewise:
    return const(1.0)


def _on_interval(seg, x0: float, eps: float, outside: float) -> Piecewise:
    return from_arcs([(x0, eps, seg), (x0 + eps, 1.0 - eps, Const(outside))])


def ramp_up(profile, x0: float, eps: float, outside: float = 0.0) -> Piecewise:
    """profile((x - x0)/eps) on [x0, x0 + eps], ``outside`` elsewhere."""
    return _on_interval(Ramp(get_profile(profile), x0, eps), x0, eps, outside)


def ramp_down(profile, x0: float, eps: float, outside: float = 0.0) -> Piecewise:
    return _on_interval(Ramp(get_profile(profile), x0, eps, 1.0, -1.0), x0, eps, outside)


def sqrt_bump(profile, x0: float, eps: float) -> Piecewise:
    """sqrt(d (1 - d)) for the rising ramp d on [x0, x0 + eps], zero elsewhere."""
    return _on_interval(SqrtRamp(Ramp(get_profile(profile), x0, eps)), x0, eps, 0.0)


def from_arcs(arcs: Sequence[tuple]) -> Piecewise:
    """Build a function from (start, length, segment) arcs that tile the circle.

    Starts may be any reals; they are reduced mod 1.  Arcs of zero length are
    dropped.  Arc lengths must add up to 1 and consecutive arcs must abut.
    """
    arcs = [(s % 1.0, ln, seg) for s, ln, seg in arcs if ln > 0.0]
    arcs.sort(key=lambda a: a[0])
    if not math.isclose(sum(a[1] for a in arcs), 1.0, abs_tol=1e-12):
        raise ValueError("arcs do not tile the circle")
    starts = [a[0] for a in arcs]
    segs = [a[2] for a in arcs]
    if starts[0] != 0.0:
        if starts[0] < 1e-15:
            starts[0] = 0.0
        else:
            starts.insert(0, 0.0)
            segs.insert(0, segs[-1])
    keep = [0] + [i for i in range(1, len(starts)) if starts[i] > starts[i - 1]]
    return Piecewise([starts[i] for i in keep], [segs[i] for i in keep])


def evaluate(f: CircleFunction, x):
    return f(x)


def shift(f: CircleFunction, s: float) -> CircleFunction:
    return f.shift(s)


def pointwise_add(f: CircleFunction, g: CircleFunction) -> CircleFunction:
    if f.is_zero:
        return g
    if g.is_zero:
        return f
    if isinstance(f, Piecewise) and isinstance(g, Piecewise) and f.is_constant and g.is_constant:
        return const(f.segments[0].value + g.segments[0].value)
    terms = []
    for h in (f, g):
        terms.extend(h.operands if isinstance(h, Composite) and h.op == "add" and h.factor == 1.0 else [h])
    return Composite("add", terms)


def pointwise_mul(f: CircleFunction, g: CircleFunction) -> CircleFunction:
    if f.is_zero:
        return f
    if g.is_zero:
        return g
    for a, b in ((f, g), (g, f)):
        if isinstance(a, Piecewise) and a.is_constant:
            return pointwise_scale(b, a.segments[0].value)
    return Composite("mul", [f, g])


def pointwise_scale(f: CircleFunction, c: float) -> CircleFunction:
    if c == 1.0:
        return f
    if c == 0.0 or f.is_zero:
        return zero()
    if isinstance(f, Piecewise) and f.is_constant:
        return const(c * f.segments[0].value)
    if isinstance(f, Composite):
        return Composite(f.op, f.operands, f.factor * c)
    return Composite("mul", [f], c)


def integrate(f: CircleFunction) -> float:
    return f.integrate()


def sup_norm(f: CircleFunction, samples: int = DEFAULT_GRID) -> float:
    return f.sup_norm(samples)


def max_jump(f: CircleFunction, delta: float = 1e-8) -> float:
    """Largest |f(b - delta) - f(b + delta)| over all breakpoints (0 included)."""
    bp = f.breakpoints
    return float(np.max(np.abs(f(bp - delta) - f(bp + delta))))


def from_json(obj: dict) -> CircleFunction:
    segs = obj["segments"]
    if len(segs) == 1 and segs[0]["kind"] == "samples":
        return Sampled(segs[0]["params"]["values"])
    return Piecewise(obj["breakpoints"], [_segment_from_json(s) for s in segs])
