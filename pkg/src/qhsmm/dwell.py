"""Dwell-time densities with closed-form integrals.

Every density exposes the same small set of vectorised primitives
(``pdf``, ``sf``, ``mass``, ``partial_mean``, ``sf_integral``, ``ppf``)
so that survival functions, lifetimes, bin integrals and inverse-CDF
samples never need numerical quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from .errors import DomainError

NORM_TOL = 1e-10


def _arr(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _out(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


class _Density:
    """Shared behaviour. Subclasses implement ``cdf`` and ``partial_mean``."""

    kind: str = ""

    def sf(self, t):
        """Survival probability P(T >= t)."""
        t_ = _arr(t)
        return _out(1.0 - self.cdf(t_), t)

    def mass(self, lo, hi):
        """Probability of the interval [lo, hi)."""
        lo_, hi_ = _arr(lo), _arr(hi)
        return _out(self.cdf(hi_) - self.cdf(lo_), np.broadcast(lo_, hi_))

    def sf_integral(self, lo, hi):
        """``∫_lo^hi sf(t) dt`` for 0 <= lo <= hi, via t·sf(t) + partial_mean(t)."""
        lo_, hi_ = _arr(lo), _arr(hi)

        def F(t):
            t = np.maximum(t, 0.0)
            return t * (1.0 - self.cdf(t)) + self.partial_mean(t)

        return _out(F(hi_) - F(lo_), np.broadcast(lo_, hi_))

    def mean(self) -> float:
        return float(self.partial_mean(_arr(self.support[1])))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True)
class PiecewiseConstant(_Density):
    """Density ``densities[i]`` on ``[breakpoints[i], breakpoints[i+1])``."""

    breakpoints: tuple[float, ...]
    densities: tuple[float, ...]
    kind: str = field(default="piecewise_constant", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "densities", tuple(float(d) for d in self.densities))

    def params(self) -> dict[str, Any]:
        return {"breakpoints": list(self.breakpoints), "densities": list(self.densities)}

    def violations(self) -> list[tuple[str, str]]:
        bp, d = self.breakpoints, self.densities
        out = []
        if len(bp) != len(d) + 1 or len(d) == 0:
            return [("dwell-shape", "need len(breakpoints) == len(densities) + 1 >= 2")]
        if any(not math.isfinite(b) for b in bp):
            out.append(("dwell-support", "breakpoints must be finite"))
        if bp[0] < 0:
            out.append(("dwell-support", "support must lie in [0, inf)"))
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            out.append(("dwell-breakpoints", "breakpoints must be strictly ascending"))
        if any(x < 0 or not math.isfinite(x) for x in d):
            out.append(("dwell-negative", "densities must be finite and nonnegative"))
        if not out:
            total = sum(x * (b1 - b0) for x, b0, b1 in zip(d, bp, bp[1:]))
            if abs(total - 1.0) > NORM_TOL:
                out.append(("dwell-normalization", f"density integrates to {total!r}, not 1"))
        return out

    @property
    def support(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    def breaks(self) -> tuple[float, ...]:
        return self.breakpoints

    def _tables(self):
        bp = np.array(self.breakpoints)
        d = np.array(self.densities)
        widths = np.diff(bp)
        cm = np.concatenate([[0.0], np.cumsum(d * widths)])
        m1 = np.concatenate([[0.0], np.cumsum(d * (bp[1:] ** 2 - bp[:-1] ** 2) / 2)])
        return bp, d, cm, m1

    def _locate(self, t: np.ndarray):
        bp, d, cm, m1 = self._tables()
        tc = np.clip(t, bp[0], bp[-1])
        i = np.clip(np.searchsorted(bp, tc, side="right") - 1, 0, len(d) - 1)
        return bp, d, cm, m1, tc, i

    def pdf(self, t):
        t_ = _arr(t)
        bp, d, *_ = self._tables()
        i = np.clip(np.searchsorted(bp, t_, side="right") - 1, 0, len(d) - 1)
        inside = (t_ >= bp[0]) & (t_ < bp[-1])
        return _out(np.where(inside, d[i], 0.0), t)

    def cdf(self, t):
        t_ = _arr(t)
        bp, d, cm, _, tc, i = self._locate(t_)
        return cm[i] + d[i] * (tc - bp[i])

    def partial_mean(self, t):
        t_ = _arr(t)
        bp, d, _, m1, tc, i = self._locate(t_)
        return m1[i] + d[i] * (tc**2 - bp[i] ** 2) / 2

    def ppf(self, u):
        u_ = _arr(u)
        bp, d, cm, _ = self._tables()
        live = np.flatnonzero(d > 0)
        # last live piece whose cumulative start is <= u
        j = np.clip(np.searchsorted(cm[live], u_, side="right") - 1, 0, len(live) - 1)
        i = live[j]
        t = bp[i] + (u_ - cm[i]) / d[i]
        return _out(np.clip(t, bp[i], bp[i + 1]), u)


@dataclass(frozen=True, init=False, repr=False)
class Uniform(PiecewiseConstant):
    """Uniform density on [a, b]."""

    a: float = 0.0
    b: float = 1.0

    def __init__(self, a: float, b: float):
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        width = self.b - self.a
        dens = 1.0 / width if width > 0 else math.inf
        object.__setattr__(self, "breakpoints", (self.a, self.b))
        object.__setattr__(self, "densities", (dens,))
        object.__setattr__(self, "kind", "uniform")

    def __repr__(self) -> str:
        return f"Uniform(a={self.a!r}, b={self.b!r})"

    def params(self) -> dict[str, Any]:
        return {"a": self.a, "b": self.b}

    def violations(self) -> list[tuple[str, str]]:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            return [("dwell-support", "uniform bounds must be finite")]
        if not self.a < self.b:
            return [("dwell-breakpoints", "uniform requires a < b")]
        if self.a < 0:
            return [("dwell-support", "support must lie in [0, inf)")]
        return []


@dataclass(frozen=True)
class Exponential(_Density):
    """Exponential density ``exp(-t/scale)/scale``."""

    scale: float
    kind: str = field(default="exponential", init=False, repr=False)

    def params(self) -> dict[str, Any]:
        return {"scale": self.scale}

    def violations(self) -> list[tuple[str, str]]:
        if not (math.isfinite(self.scale) and self.scale > 0):
            return [("dwell-parameter", "exponential scale must be finite and > 0")]
        return []

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, math.inf

    def breaks(self) -> tuple[float, ...]:
        return (0.0,)

    def pdf(self, t):
        t_ = _arr(t)
        return _out(np.where(t_ >= 0, np.exp(-np.maximum(t_, 0) / self.scale) / self.scale, 0.0), t)

    def cdf(self, t):
        t_ = np.maximum(_arr(t), 0.0)
        return -np.expm1(-t_ / self.scale)

    def sf(self, t):
        t_ = np.maximum(_arr(t), 0.0)
        return _out(np.exp(-t_ / self.scale), t)

    def mass(self, lo, hi):
        lo_ = np.maximum(_arr(lo), 0.0)
        hi_ = np.maximum(_arr(hi), lo_)
        return _out(np.exp(-lo_ / self.scale) * -np.expm1(-(hi_ - lo_) / self.scale), np.broadcast(_arr(lo), _arr(hi)))

    def partial_mean(self, t):
        t_ = np.maximum(_arr(t), 0.0)
        s = self.scale
        return s * -np.expm1(-t_ / s) - t_ * np.exp(-t_ / s)

    def sf_integral(self, lo, hi):
        return self.scale * self.mass(lo, hi)

    def mean(self) -> float:
        return self.scale

    def ppf(self, u):
        u_ = _arr(u)
        return _out(-self.scale * np.log1p(-u_), u)


@dataclass(frozen=True)
class Tabulated(_Density):
    """Density sampled at ``k * step``; linear between samples, zero past the last one.

    Linear interpolation makes every integral the trapezoidal rule on the
    samples, and the trapezoidal sum must equal 1.
    """

    step: float
    values: tuple[float, ...]
    kind: str = field(default="tabulated", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def params(self) -> dict[str, Any]:
        return {"step": self.step, "values": list(self.values)}

    def violations(self) -> list[tuple[str, str]]:
        v = self.values
        if not (math.isfinite(self.step) and self.step > 0):
            return [("dwell-parameter", "tabulated step must be finite and > 0")]
        if len(v) < 2:
            return [("dwell-shape", "tabulated density needs at least two samples")]
        if any(x < 0 or not math.isfinite(x) for x in v):
            return [("dwell-negative", "tabulated values must be finite and nonnegative")]
        total = self.step * (sum(v) - (v[0] + v[-1]) / 2)
        if abs(total - 1.0) > NORM_TOL:
            return [("dwell-normalization", f"trapezoidal integral is {total!r}, not 1")]
        return []

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.step * (len(self.values) - 1)

    def breaks(self) -> tuple[float, ...]:
        return tuple(k * self.step for k in range(len(self.values)))

    def _tables(self):
        v = np.array(self.values)
        h = self.step
        slope = np.diff(v) / h
        cell_mass = h * (v[:-1] + v[1:]) / 2
        x0 = np.arange(len(v) - 1) * h
        cell_m1 = x0 * cell_mass + v[:-1] * h**2 / 2 + slope * h**3 / 3
        cm = np.concatenate([[0.0], np.cumsum(cell_mass)])
        m1 = np.concatenate([[0.0], np.cumsum(cell_m1)])
        return v, slope, cm, m1

    def _locate(self, t: np.ndarray):
        v, slope, cm, m1 = self._tables()
        h = self.step
        end = h * (len(v) - 1)
        tc = np.clip(t, 0.0, end)
        i = np.clip(np.floor(tc / h).astype(int), 0, len(v) - 2)
        r = tc - i * h
        return v, slope, cm, m1, i, r

    def pdf(self, t):
        t_ = _arr(t)
        v, slope, _, _, i, r = self._locate(t_)
        inside = (t_ >= 0) & (t_ <= self.support[1])
        return _out(np.where(inside, v[i] + slope[i] * r, 0.0), t)

    def cdf(self, t):
        v, slope, cm, _, i, r = self._locate(_arr(t))
        return cm[i] + v[i] * r + slope[i] * r**2 / 2

    def partial_mean(self, t):
        v, slope, _, m1, i, r = self._locate(_arr(t))
        x0 = i * self.step
        return m1[i] + x0 * (v[i] * r + slope[i] * r**2 / 2) + v[i] * r**2 / 2 + slope[i] * r**3 / 3

    def ppf(self, u):
        u_ = _arr(u)
        v, slope, cm, _ = self._tables()
        i = np.clip(np.searchsorted(cm, u_, side="right") - 1, 0, len(v) - 2)
        q = np.maximum(u_ - cm[i], 0.0)
        disc = np.sqrt(np.maximum(v[i] ** 2 + 2 * slope[i] * q, 0.0))
        denom = v[i] + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(denom > 0, 2 * q / denom, 0.0)
        return _out(np.clip(i * self.step + r, 0.0, self.support[1]), u)


DwellDensity = Union[PiecewiseConstant, Uniform, Exponential, Tabulated]

KINDS = ("uniform", "exponential", "piecewise_constant", "tabulated")


def dwell_from_dict(spec: dict[str, Any]) -> DwellDensity:
    """Build a density from ``{"kind": ..., "params": {...}}``; unknown kinds raise."""
    kind = spec.get("kind")
    p = spec.get("params", {})
    if not isinstance(p, dict):
        raise DomainError("dwell params must be an object")
    try:
        if kind == "uniform":
            return Uniform(p["a"], p["b"])
        if kind == "exponential":
            return Exponential(float(p["scale"]))
        if kind == "piecewise_constant":
            return PiecewiseConstant(tuple(p["breakpoints"]), tuple(p["densities"]))
        if kind == "tabulated":
            return Tabulated(float(p["step"]), tuple(p["values"]))
    except KeyError as exc:
        raise DomainError(f"dwell kind {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise DomainError(f"unknown dwell kind {kind!r}; expected one of {', '.join(KINDS)}")
