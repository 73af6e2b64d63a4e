"""Grid-based carriers for 1-D functions, step functions, and open sets.

Functions are piecewise linear between uniformly spaced nodes and identically
zero outside the sampled window; this keeps fractional energies finite and
makes total-variation bookkeeping exact.  Every object here is an immutable
value: transforms return new objects, so everything is safe to share across
threads and to map over parameter grids.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

__all__ = [
    "GridFunction",
    "StepFunction",
    "IntervalSet",
    "PlateauSpec",
    "make_plateau",
    "epsilon_contraction",
    "snap_to_dyadic_step",
]

_INF = float("inf")


def _frozen_array(data, dtype=float) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridFunction:
    """A real function sampled on a uniform grid, interpolated linearly.

    The function is 0 outside the grid window.  ``support_lo``/``support_hi``
    are the indices of the first and last nonzero sample (-1/-1 for the zero
    function); samples outside that range are exactly 0.
    """

    origin: float
    step: float
    values: np.ndarray
    support_lo: int = -1
    support_hi: int = -1

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"grid step must be positive and finite, got {self.step}")
        if not math.isfinite(self.origin):
            raise ValueError("grid origin must be finite")
        vals = _frozen_array(self.values)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a grid function needs a 1-d array of at least 2 samples")
        object.__setattr__(self, "values", vals)
        nz = np.nonzero(vals)[0]
        if nz.size:
            object.__setattr__(self, "support_lo", int(nz[0]))
            object.__setattr__(self, "support_hi", int(nz[-1]))
        else:
            object.__setattr__(self, "support_lo", -1)
            object.__setattr__(self, "support_hi", -1)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray],
                      lo: float, hi: float, step: float,
                      pad: int = 2) -> "GridFunction":
        """Sample ``fn`` on [lo, hi] extended by ``pad`` zero nodes per side."""
        n = int(round((hi - lo) / step)) + 1
        x = lo + step * np.arange(n)
        vals = np.asarray(fn(x), dtype=float)
        if pad > 0:
            vals = np.concatenate([np.zeros(pad), vals, np.zeros(pad)])
            lo = lo - pad * step
        return cls(lo, step, vals)

    @classmethod
    def zeros(cls, lo: float, hi: float, step: float) -> "GridFunction":
        n = int(round((hi - lo) / step)) + 1
        return cls(lo, step, np.zeros(max(n, 2)))

    # -- basic queries -----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.values.size)

    @property
    def is_zero(self) -> bool:
        return self.support_lo < 0

    def __call__(self, x) -> np.ndarray:
        """Piecewise-linear evaluation; 0 outside the grid window."""
        return np.interp(np.asarray(x, dtype=float), self.x, self.values,
                         left=0.0, right=0.0)

    def support_interval(self):
        """(x_lo, x_hi) of the nonzero samples, or None for the zero function."""
        if self.is_zero:
            return None
        return (self.origin + self.step * self.support_lo,
                self.origin + self.step * self.support_hi)

    def has_compact_support(self) -> bool:
        """True when the interpolant tapers to exact 0 inside the window."""
        return self.is_zero or (self.support_lo > 0
                                and self.support_hi < self.values.size - 1)

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    # -- exact integrals for the piecewise-linear interpolant --------------

    def l2_norm_sq(self) -> float:
        v = self.values
        seg = v[:-1] * v[:-1] + v[:-1] * v[1:] + v[1:] * v[1:]
        return float(self.step * np.sum(seg) / 3.0)

    def integral(self) -> float:
        return float(self.step * (np.sum(self.values)
                                  - 0.5 * (self.values[0] + self.values[-1])))

    def linf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.values))))

    def lipschitz(self) -> float:
        if self.values.size < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.values))) / self.step)

    # -- transforms ---------------------------------------------------------

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.origin, self.step, values)

    def scaled(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    def shifted_by_steps(self, k: int) -> "GridFunction":
        return GridFunction(self.origin + k * self.step, self.step, self.values)

    def padded(self, k: int) -> "GridFunction":
        if k <= 0:
            return self
        vals = np.concatenate([np.zeros(k), self.values, np.zeros(k)])
        return GridFunction(self.origin - k * self.step, self.step, vals)

    def trimmed(self, margin: int = 2) -> "GridFunction":
        """Restrict to the support plus ``margin`` zero nodes per side."""
        if self.is_zero:
            return GridFunction(self.origin, self.step, np.zeros(2))
        lo = max(self.support_lo - margin, 0)
        hi = min(self.support_hi + margin, self.values.size - 1)
        return GridFunction(self.origin + lo * self.step, self.step,
                            self.values[lo:hi + 1])

    def refined(self, factor: int) -> "GridFunction":
        """Resample on a grid with step/factor; exact for the interpolant."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        if factor == 1:
            return self
        n_new = (self.values.size - 1) * factor + 1
        xs = self.origin + (self.step / factor) * np.arange(n_new)
        vals = np.interp(xs, self.x, self.values)
        return GridFunction(self.origin, self.step / factor, vals)

    # -- grid compatibility --------------------------------------------------

    def same_grid(self, other: "GridFunction") -> bool:
        if abs(self.step - other.step) > 1e-12 * self.step:
            return False
        off = (other.origin - self.origin) / self.step
        return abs(off - round(off)) < 1e-6

    def aligned_with(self, other: "GridFunction"):
        """Embed both functions on the smallest common grid window."""
        if not self.same_grid(other):
            raise ValueError("grid mismatch: incompatible step or origin offset")
        off = int(round((other.origin - self.origin) / self.step))
        lo = min(0, off)
        hi = max(self.values.size - 1, off + other.values.size - 1)
        n = hi - lo + 1
        a = np.zeros(n)
        b = np.zeros(n)
        a[-lo:self.values.size - lo] = self.values
        b[off - lo:off - lo + other.values.size] = other.values
        origin = self.origin + lo * self.step
        return (GridFunction(origin, self.step, a),
                GridFunction(origin, self.step, b))

    def _binary(self, other, op) -> "GridFunction":
        a, b = self.aligned_with(other)
        return GridFunction(a.origin, a.step, op(a.values, b.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self._binary(other, np.add)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self._binary(other, np.subtract)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"origin": self.origin, "step": self.step,
                "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "GridFunction":
        return cls(float(d["origin"]), float(d["step"]), d["values"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for xi, vi in zip(self.x, self.values):
            buf.write(f"{xi:.12g},{vi:.12g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        rows = [line.split(",") for line in text.strip().splitlines() if line.strip()]
        xs = np.array([float(r[0]) for r in rows])
        vs = np.array([float(r[1]) for r in rows])
        if xs.size < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(xs)
        step = float(np.median(steps))
        if np.any(np.abs(steps - step) > 1e-9 * max(step, 1.0)):
            raise ValueError("CSV samples are not on a uniform grid")
        return cls(float(xs[0]), step, vs)


def epsilon_contraction(h: GridFunction, eps: float) -> GridFunction:
    """Remove the band |h| <= eps: sign(h) * (|h| - eps)+ at every node."""
    if eps < 0:
        raise ValueError(f"contraction level must be >= 0, got {eps}")
    v = h.values
    return h.with_values(np.sign(v) * np.maximum(np.abs(v) - eps, 0.0))


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous-from-the-left step function: value c_i on (a_{i-1}, a_i].

    Identically zero outside (a_0, a_K].  An empty breakpoint list is the
    zero function.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        bp = _frozen_array(self.breakpoints)
        lv = _frozen_array(self.levels)
        if bp.size != lv.size + 1 and not (bp.size == 0 and lv.size == 0):
            raise ValueError("need K+1 breakpoints for K levels")
        if bp.size and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", lv)

    @property
    def is_zero(self) -> bool:
        return self.levels.size == 0 or not np.any(self.levels)

    def span(self):
        if self.breakpoints.size == 0:
            return None
        return (float(self.breakpoints[0]), float(self.breakpoints[-1]))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.breakpoints.size == 0:
            return np.zeros_like(x)
        idx = np.searchsorted(self.breakpoints, x, side="left")
        inside = (idx >= 1) & (idx <= self.levels.size)
        out = np.zeros_like(x)
        out[inside] = self.levels[idx[inside] - 1]
        return out

    def l2_norm_sq(self) -> float:
        if self.levels.size == 0:
            return 0.0
        widths = np.diff(self.breakpoints)
        return float(np.sum(self.levels ** 2 * widths))

    def total_variation(self) -> float:
        if self.levels.size == 0:
            return 0.0
        jumps = np.concatenate([[self.levels[0]], np.diff(self.levels),
                                [-self.levels[-1]]])
        return float(np.sum(np.abs(jumps)))

    def sample(self, step: float, pad: int = 4) -> GridFunction:
        """Sample on a uniform grid; the jumps become one-cell ramps."""
        if self.breakpoints.size == 0:
            return GridFunction(0.0, step, np.zeros(2))
        a, b = self.span()
        n = int(math.ceil((b - a) / step)) + 1
        x = a + step * np.arange(-pad, n + pad + 1)
        return GridFunction(x[0], step, self(x))

    def to_json_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "levels": self.levels.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "StepFunction":
        return cls(np.asarray(d["breakpoints"], dtype=float),
                   np.asarray(d["levels"], dtype=float))


def snap_to_dyadic_step(f: GridFunction, n: int) -> StepFunction:
    """Left-endpoint dyadic snapping: level f(i/2^n) on (i/2^n, (i+1)/2^n]."""
    if n < 1 or n != int(n):
        raise ValueError("dyadic depth must be a positive integer")
    if f.is_zero:
        return StepFunction(np.array([]), np.array([]))
    lo, hi = f.support_interval()
    scale = 2.0 ** n
    i0 = math.floor(lo * scale)
    i1 = math.ceil(hi * scale)
    if i1 <= i0:
        i1 = i0 + 1
    bps = np.arange(i0, i1 + 1) / scale
    levels = f(bps[:-1])
    return StepFunction(bps, levels)


@dataclass(frozen=True)
class IntervalSet:
    """A finite disjoint union of open intervals, sorted by left endpoint.

    Endpoints may be -inf/inf.  Overlapping inputs are merged; touching open
    intervals are kept separate (they are distinct components).
    """

    intervals: tuple

    def __post_init__(self):
        cleaned = []
        for lo, hi in self.intervals:
            lo = float(lo)
            hi = float(hi)
            if math.isnan(lo) or math.isnan(hi):
                raise ValueError("interval endpoints must not be NaN")
            if lo < hi:
                cleaned.append((lo, hi))
        cleaned.sort()
        merged: list = []
        for lo, hi in cleaned:
            if merged and lo < merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    # -- constructors --------------------------------------------------------

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def of(cls, *pairs) -> "IntervalSet":
        return cls(tuple(pairs))

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls(((-_INF, _INF),))

    # -- queries ---------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __iter__(self) -> Iterator:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def measure(self) -> float:
        """Total length of the finite intervals (inf if any is unbounded)."""
        return float(sum(hi - lo for lo, hi in self.intervals))

    def measure_between(self, x: float, y: float) -> float:
        """Lebesgue measure of the set intersected with (min(x,y), max(x,y))."""
        a, b = (x, y) if x <= y else (y, x)
        total = 0.0
        for lo, hi in self.intervals:
            total += max(0.0, min(hi, b) - max(lo, a))
        return total

    def contains_point(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.intervals)

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for lo, hi in self.intervals:
            out[(x > lo) & (x < hi)] = 1.0
        return out

    # -- set algebra --------------------------------------------------------------

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        pieces = []
        for alo, ahi in self.intervals:
            for blo, bhi in other.intervals:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if lo < hi:
                    pieces.append((lo, hi))
        return IntervalSet(tuple(pieces))

    def intersect_window(self, window) -> "IntervalSet":
        return self.intersect(IntervalSet.of(tuple(window)))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def complement_within(self, window) -> "IntervalSet":
        """Open gaps of the set inside the open window (a, b)."""
        a, b = float(window[0]), float(window[1])
        gaps = []
        cursor = a
        for lo, hi in self.intervals:
            if hi <= a or lo >= b:
                continue
            if lo > cursor:
                gaps.append((cursor, min(lo, b)))
            cursor = max(cursor, hi)
            if cursor >= b:
                break
        if cursor < b:
            gaps.append((cursor, b))
        return IntervalSet(tuple(gaps))

    def max_gap_within(self, window) -> float:
        gaps = self.complement_within(window)
        return max((hi - lo for lo, hi in gaps), default=0.0)

    # -- serialization ---------------------------------------------------------------

    def to_json_list(self) -> list:
        def enc(v):
            if v == _INF:
                return "inf"
            if v == -_INF:
                return "-inf"
            return v
        return [[enc(lo), enc(hi)] for lo, hi in self.intervals]

    @classmethod
    def from_json_list(cls, data) -> "IntervalSet":
        def dec(v):
            if isinstance(v, str):
                return float(v)
            return float(v)
        return cls(tuple((dec(lo), dec(hi)) for lo, hi in data))


_RAMP_PROFILES = {
    "linear": lambda t: t,
    "smooth": lambda t: t * t * (3.0 - 2.0 * t),
    "concave": lambda t: np.sin(0.5 * math.pi * t),
}


@dataclass(frozen=True)
class PlateauSpec:
    """Plateau 1 on [a, b], 0 outside (a - rho, b + rho), monotone ramps."""

    a: float
    b: float
    rho: float
    ramp_profile: str = "linear"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if self.rho <= 0:
            raise ValueError(f"ramp width must be positive, got {self.rho}")
        if self.ramp_profile not in _RAMP_PROFILES:
            raise ValueError(f"unknown ramp profile {self.ramp_profile!r}; "
                             f"choose from {sorted(_RAMP_PROFILES)}")


def make_plateau(spec: PlateauSpec, step: float) -> GridFunction:
    """Sample a plateau function; exact 1 on [a, b], exact 0 off the ramps.

    The left ramp foot sits exactly on a grid node; the right foot is snapped
    to the last node <= b + rho, so the interpolant never spills outside
    (a - rho, b + rho).  Total variation of the result is exactly 2.
    """
    if spec.rho <= 2.0 * step:
        raise ValueError(f"degenerate plateau: rho={spec.rho} needs step < rho/2, "
                         f"got step={step}")
    if spec.b - spec.a < 2.0 * step:
        raise ValueError("plateau top needs at least two grid nodes")
    profile = _RAMP_PROFILES[spec.ramp_profile]
    pad = 4
    left_foot = spec.a - spec.rho
    n_right = int(math.floor((spec.b + spec.rho - left_foot) / step + 1e-12))
    idx = np.arange(-pad, n_right + pad + 1)
    x = left_foot + step * idx
    right_foot = left_foot + step * n_right

    vals = np.zeros_like(x)
    on_top = (x >= spec.a) & (x <= spec.b)
    vals[on_top] = 1.0
    up = (x > left_foot) & (x < spec.a)
    vals[up] = profile((x[up] - left_foot) / (spec.a - left_foot))
    down = (x > spec.b) & (x < right_foot)
    vals[down] = profile((right_foot - x[down]) / (right_foot - spec.b))
    return GridFunction(x[0], step, vals)
