"""Constructive recipes for projections: Power-Rieffel type, glue, cut, bumps.

Every construction is a set of bands.  Band k owns a transition d_k on an
arc [s, s + eps] and forces p_0 = d_k there and p_0 = 1 - d_k(x - k theta)
on the arc shifted by k theta; p_k = sqrt(d_k (1 - d_k)) on the first arc.
p_0 is constant (0 or 1) between the arcs.  A construction is accepted only
if all arcs are disjoint, p_0 stays continuous and every cross term
p_m(x + a theta) p_a(x) with m + a != 0 vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import circlefn as cf
from .algebra import TorusElement, check_theta
from .circlefn import BumpProfile, Const, Ramp, SqrtRamp

_GAP_TOL = 1e-12


class BuilderError(Exception):
    """Base class for construction failures."""

    edit_index: Optional[int] = None


class InfeasibleEpsilon(BuilderError):
    pass


class BandCollision(BuilderError):
    pass


class PlacementError(BuilderError):
    pass


class InvalidBand(BuilderError, ValueError):
    pass


class NoBumpToDeform(BuilderError):
    pass


# ---------------------------------------------------------------------------
# declarative recipe


@dataclass(frozen=True)
class Edit:
    kind: str  # "glue", "cut" or "bump"
    k: int
    eps: float
    profile: str = "smoothstep"
    delta: Optional[float] = None
    boundary: str = "one"

    def __post_init__(self):
        if self.kind not in ("glue", "cut", "bump"):
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if self.kind != "bump" and self.delta is not None:
            raise ValueError("delta is only meaningful for bump edits")
        if self.boundary not in ("zero", "one"):
            raise ValueError("bump boundary must be 'zero' or 'one'")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "k": self.k, "eps": self.eps, "profile": self.profile}
        if self.kind == "bump":
            out["delta"] = self.delta
            out["boundary"] = self.boundary
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Edit":
        return cls(
            kind=obj["kind"],
            k=int(obj["k"]),
            eps=float(obj["eps"]),
            profile=obj.get("profile", "smoothstep"),
            delta=None if obj.get("delta") is None else float(obj["delta"]),
            boundary=obj.get("boundary", "one"),
        )


@dataclass(frozen=True)
class ProjectionSpec:
    theta: float
    M: int
    eps: float
    profile: str = "smoothstep"
    edits: tuple = ()
    complement: bool = False
    homotopy_t: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "base": {"M": self.M, "eps": self.eps, "profile": self.profile},
            "edits": [e.to_json() for e in self.edits],
            "complement": self.complement,
            "homotopy_t": self.homotopy_t,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProjectionSpec":
        base = obj["base"]
        t = obj.get("homotopy_t")
        return cls(
            theta=float(obj["theta"]),
            M=int(base["M"]),
            eps=float(base["eps"]),
            profile=base.get("profile", "smoothstep"),
            edits=tuple(Edit.from_json(e) for e in obj.get("edits", [])),
            complement=bool(obj.get("complement", False)),
            homotopy_t=None if t is None else float(t),
        )


# ---------------------------------------------------------------------------
# feasibility


def _feasibility_violation(theta: float, eps_list: Sequence[float], n_total: int) -> Optional[str]:
    if any(e <= 0.0 for e in eps_list):
        return "all eps must be positive"
    total = math.fsum(eps_list)
    if not total < theta:
        return f"sum(eps) = {total:.10g} >= theta = {theta:.10g}"
    if not total + n_total * theta < 1.0:
        return f"sum(eps) + n*theta = {total + n_total * theta:.10g} >= 1 (n = {n_total})"
    return None


def epsilon_feasible(theta: float, eps_list: Sequence[float], n_total: int) -> bool:
    """True iff sum(eps) < theta and sum(eps) + n_total*theta < 1 (strictly)."""
    return _feasibility_violation(theta, eps_list, n_total) is None


# ---------------------------------------------------------------------------
# construction state


@dataclass(frozen=True)
class Band:
    k: int
    kind: str  # "base", "glue", "cut" or "bump"
    start: float
    eps: float
    ramp: Ramp
    boundary: Optional[str] = None


@dataclass(frozen=True)
class Construction:
    theta: float
    M: int
    bands: tuple
    glue_front: float
    cut_front: float
    extent: int
    complemented: bool = False
    homotopy_t: Optional[float] = None
    profile_kinds: tuple = field(default=())

    @property
    def used(self) -> set:
        return {b.k for b in self.bands}

    @property
    def eps_list(self) -> list:
        return [b.eps for b in self.bands]

    def expected_trace(self) -> float:
        theta = self.theta
        base = (self.M * theta) % 1.0
        tr = base + sum(b.k * theta for b in self.bands if b.kind == "glue")
        tr -= sum(b.k * theta for b in self.bands if b.kind == "cut")
        return 1.0 - tr if self.complemented else tr


def _arcs_overlap(s1: float, l1: float, s2: float, l2: float) -> bool:
    d = (s2 - s1) % 1.0
    return d < l1 - _GAP_TOL or (1.0 - d) < l2 - _GAP_TOL


def _deformed(band: Band, t: Optional[float]) -> Ramp:
    if t is None or band.kind != "bump" or band.boundary != "one":
        return band.ramp
    return replace(band.ramp, height=-t)


def _p0_arcs(c: Construction):
    arcs = []
    for b in c.bands:
        d = _deformed(b, c.homotopy_t)
        shifted = replace(d.complement(), x0=b.start + b.k * c.theta)
        arcs.append((b.start % 1.0, b.eps, d))
        arcs.append(((b.start + b.k * c.theta) % 1.0, b.eps, shifted))
    return arcs


def _check(c: Construction) -> None:
    """Raise PlacementError unless the bands define a split-form projection."""
    arcs = sorted(_p0_arcs(c), key=lambda a: a[0])
    n = len(arcs)
    for i in range(n):
        s, ln, seg = arcs[i]
        s_next, _, seg_next = arcs[(i + 1) % n]
        end = s + ln
        nxt = s_next if i + 1 < n else s_next + 1.0
        if nxt < end - _GAP_TOL:
            raise PlacementError(f"transition arcs [{s:.6g}, {end:.6g}] and [{s_next:.6g}, ...] intersect")
        if abs(seg.end_value() - seg_next.start_value()) > _GAP_TOL:
            raise PlacementError(
                f"p0 would be discontinuous between {end % 1.0:.6g} and {s_next:.6g}: "
                f"{seg.end_value():g} != {seg_next.start_value():g}"
            )
    # supports of the off-diagonal coefficients
    theta = c.theta
    supp = {}
    for b in c.bands:
        supp[b.k] = (b.start % 1.0, b.eps)
        supp[-b.k] = ((b.start + b.k * theta) % 1.0, b.eps)
    for m, (sm, lm) in supp.items():
        for a, (sa, la) in supp.items():
            if m + a == 0:
                continue
            if _arcs_overlap(sa, la, (sm - a * theta) % 1.0, lm):
                raise PlacementError(f"cross term p_{m}(x + {a} theta) p_{a}(x) does not vanish")


def _assemble(c: Construction) -> TorusElement:
    theta = c.theta
    arcs = sorted(_p0_arcs(c), key=lambda a: a[0])
    filled = []
    for i, (s, ln, seg) in enumerate(arcs):
        filled.append((s, ln, seg))
        s_next = arcs[(i + 1) % len(arcs)][0]
        gap = (s_next - (s + ln)) % 1.0
        if gap > 1.0 - _GAP_TOL:
            gap = 0.0
        filled.append((s + ln, gap, Const(seg.end_value())))
    total = sum(a[1] for a in filled)
    # absorb rounding so the arcs tile exactly
    s, ln, seg = filled[-1]
    filled[-1] = (s, ln + (1.0 - total), seg)
    p0 = cf.from_arcs(filled)
    if c.complemented:
        p0 = p0.complement()
    coeffs = {0: p0}
    for b in c.bands:
        d = _deformed(b, c.homotopy_t)
        pk = cf.from_arcs([(b.start, b.eps, SqrtRamp(d)), (b.start + b.eps, 1.0 - b.eps, Const(0.0))])
        coeffs[b.k] = pk
        coeffs[-b.k] = pk.shift(-b.k * theta)
    return TorusElement(theta, coeffs, construction=c)


def _construction_of(p: TorusElement) -> Construction:
    c = p.construction
    if not isinstance(c, Construction):
        raise BuilderError("element carries no construction record; build it with power_rieffel first")
    if c.complemented or c.homotopy_t is not None:
        raise BuilderError("edits must be applied before complement or homotopy")
    return c


def _new_band_checks(c: Construction, k: int, eps: float, extent: int) -> None:
    if not 1 <= k <= c.M - 1:
        raise InvalidBand(f"band index k={k} must lie in 1..{c.M - 1}")
    if k in c.used:
        raise BandCollision(f"band k={k} already carries a nonzero coefficient")
    msg = _feasibility_violation(c.theta, c.eps_list + [eps], extent)
    if msg:
        raise InfeasibleEpsilon(msg)


# ---------------------------------------------------------------------------
# builders


def power_rieffel(theta: float, M: int, eps_M: float, profile: str | BumpProfile = "smoothstep") -> TorusElement:
    """Power-Rieffel type projection of order M with trace frac(M theta)."""
    check_theta(theta)
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    prof = cf.get_profile(profile)
    frac = (M * theta) % 1.0
    if not 0.0 < eps_M < frac:
        raise InfeasibleEpsilon(f"need 0 < eps_M < frac(M*theta) = {frac:.10g}, got eps_M = {eps_M:.10g}")
    if not eps_M + frac < 1.0:
        raise InfeasibleEpsilon(f"eps_M + frac(M*theta) = {eps_M + frac:.10g} >= 1")
    band = Band(M, "base", 0.0, eps_M, Ramp(prof, 0.0, eps_M))
    c = Construction(theta, M, (band,), glue_front=frac + eps_M, cut_front=eps_M, extent=M,
                     profile_kinds=(prof.kind,))
    _check(c)
    return _assemble(c)


def glue(base: TorusElement, k: int, eps_k: float, profile: str | BumpProfile = "smoothstep") -> TorusElement:
    """Append a Power-Rieffel block of band k at the end of the support; trace grows by k theta."""
    c = _construction_of(base)
    _new_band_checks(c, k, eps_k, c.extent + k)
    prof = cf.get_profile(profile)
    start = c.glue_front
    band = Band(k, "glue", start, eps_k, Ramp(prof, start, eps_k))
    new = replace(c, bands=c.bands + (band,), glue_front=start + k * c.theta + eps_k,
                  extent=c.extent + k, profile_kinds=c.profile_kinds + (prof.kind,))
    _check(new)
    return _assemble(new)


def cut(base: TorusElement, k: int, eps_k: float, profile: str | BumpProfile = "smoothstep") -> TorusElement:
    """Remove a plateau of length k theta right after the base ramp; trace drops by k theta."""
    c = _construction_of(base)
    _new_band_checks(c, k, eps_k, c.extent)
    prof = cf.get_profile(profile)
    start = c.cut_front
    band = Band(k, "cut", start, eps_k, Ramp(prof, start, eps_k, 1.0, -1.0))
    new = replace(c, bands=c.bands + (band,), cut_front=start + k * c.theta + eps_k,
                  profile_kinds=c.profile_kinds + (prof.kind,))
    _check(new)
    return _assemble(new)


def _bump_candidates(c: Construction, k: int, eps: float) -> list:
    ends = set()
    for s, ln, _ in _p0_arcs(c):
        ends.update((s, s + ln))
    cands = set()
    for e in ends:
        for d in (e, e - k * c.theta, e - eps, e - k * c.theta - eps):
            cands.add(round(d % 1.0, 15))
    return sorted(cands)


def add_bump(
    base: TorusElement,
    k: int,
    eps_k: float,
    delta_k: Optional[float] = None,
    profile: str | BumpProfile = "smoothstep",
    boundary: str = "one",
) -> TorusElement:
    """Enrich a free band k with a bump in p_0; the trace does not change.

    boundary="one" puts d_k (1 -> lower -> 1) inside a plateau where p_0 = 1,
    its k-theta shift lands where p_0 = 0; boundary="zero" is the mirror.
    Without ``delta_k`` the first feasible slot adjacent to an existing arc
    is chosen.
    """
    c = _construction_of(base)
    _new_band_checks(c, k, eps_k, c.extent)
    prof = cf.get_profile(profile)
    if boundary == "one":
        level, height = 1.0, -1.0
    elif boundary == "zero":
        level, height = 0.0, 1.0
    else:
        raise ValueError("boundary must be 'zero' or 'one'")

    def attempt(delta):
        band = Band(k, "bump", delta, eps_k, Ramp(prof, delta, eps_k, level, height, "bump"), boundary)
        new = replace(c, bands=c.bands + (band,), profile_kinds=c.profile_kinds + (prof.kind,))
        _check(new)
        return new

    if delta_k is not None:
        return _assemble(attempt(float(delta_k)))
    for delta in _bump_candidates(c, k, eps_k):
        try:
            return _assemble(attempt(delta))
        except PlacementError:
            continue
    raise PlacementError(f"no free slot for a bump of width {eps_k:g} in band k={k}")


def complement(p: TorusElement) -> TorusElement:
    """1 - p: p_0 replaced by 1 - p_0, the other coefficients untouched."""
    coeffs = dict(p.coeffs)
    p0 = p.coeff(0)
    if isinstance(p0, cf.Piecewise):
        coeffs[0] = p0.complement()
    else:
        coeffs[0] = cf.pointwise_add(cf.one(), cf.pointwise_scale(p0, -1.0))
    c = p.construction
    if isinstance(c, Construction):
        c = replace(c, complemented=not c.complemented)
    return TorusElement(p.theta, coeffs, construction=c)


def build(spec: ProjectionSpec) -> TorusElement:
    """Base, then edits in order, then homotopy deformation and complement."""
    p = power_rieffel(spec.theta, spec.M, spec.eps, spec.profile)
    for i, edit in enumerate(spec.edits):
        try:
            if edit.kind == "glue":
                p = glue(p, edit.k, edit.eps, edit.profile)
            elif edit.kind == "cut":
                p = cut(p, edit.k, edit.eps, edit.profile)
            else:
                p = add_bump(p, edit.k, edit.eps, edit.delta, edit.profile, edit.boundary)
        except BuilderError as exc:
            err = type(exc)(f"edit {i} ({edit.kind} k={edit.k}): {exc}")
            err.edit_index = i
            raise err from exc
    c = p.construction
    if spec.homotopy_t is not None:
        t = spec.homotopy_t
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"homotopy parameter must lie in [0, 1], got {t}")
        if not any(b.kind == "bump" and b.boundary == "one" for b in c.bands):
            raise NoBumpToDeform("homotopy needs at least one bump edit with boundary 'one'")
        c = replace(c, homotopy_t=float(t))
    if spec.complement:
        c = replace(c, complemented=True)
    return _assemble(c)


def homotopy(spec: ProjectionSpec, t: float) -> TorusElement:
    """Projection with every boundary-one bump d_k replaced by t d_k + (1 - t)."""
    return build(replace(spec, homotopy_t=float(t)))


def homotopy_path(spec: ProjectionSpec, steps: int) -> list:
    if steps < 2:
        raise ValueError("need at least two steps")
    return [(float(t), homotopy(spec, float(t))) for t in np.linspace(0.0, 1.0, steps)]


def default_eps(theta: float, M: int) -> float:
    """Half the largest feasible ramp width for power_rieffel(theta, M, ...)."""
    frac = (M * theta) % 1.0
    return 0.5 * min(frac, 1.0 - frac)
