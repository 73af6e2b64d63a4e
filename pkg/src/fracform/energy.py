"""Quadratic forms on the line: the fractional (Gagliardo) double-integral
seminorm, the Fourier-side energy, the classical Dirichlet energy, closed-form
identities for indicators, and divergence detection for indicator-type inputs.

Conventions.  The fractional form is computed WITHOUT any normalizing
prefactor: for exponent alpha in (0, 2),

    E(f) = int int (f(x) - f(y))^2 / |x - y|^(1+alpha) dx dy.

The Fourier-side energy int |fhat|^2 |xi|^alpha dxi equals E(f) up to an
alpha-dependent universal constant; that constant is never assumed, only
measured (see ``EnergyParams.c_of_alpha``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .fourier import discrete_fourier
from .grids import GridFunction, StepFunction
from .quadcells import gagliardo_of_values

__all__ = [
    "DIVERGENT",
    "EnergyParams",
    "EnergyReport",
    "ErasedPreconditionError",
    "gagliardo_energy",
    "indicator_energy_closed_form",
    "fourier_energy",
    "dirichlet_energy",
    "hardy_boundary_identity",
    "check_erased_bound",
    "fourier_gagliardo_ratio",
    "calibrate_c_of_alpha",
]

#: Sentinel value for a quadratic form that fails to converge.
DIVERGENT = float("inf")


@dataclass(frozen=True)
class EnergyParams:
    """Parameters of the fractional form.

    ``alpha`` is the kernel exponent in (0, 2]; at alpha = 2 the Gagliardo
    path is disabled and the classical Dirichlet energy applies.
    ``c_of_alpha`` optionally stores the measured Fourier/Gagliardo ratio.
    ``diagonal_band`` excludes lags below band*step from the quadrature
    (default 0: the singular cell is integrated in closed form).
    ``tail_radius`` is the lag beyond which the increment correlation is
    treated as constant; the quadrature always covers at least the support
    width, so the default is exact.
    """

    alpha: float
    c_of_alpha: float | None = None
    diagonal_band: float = 0.0
    tail_radius: float | None = None
    divergence_ratio: float = 1.15

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.c_of_alpha is not None and self.c_of_alpha <= 0:
            raise ValueError("c_of_alpha must be positive when given")
        if self.diagonal_band < 0:
            raise ValueError("diagonal_band must be >= 0")
        if self.tail_radius is not None and self.tail_radius <= 0:
            raise ValueError("tail_radius must be positive when given")
        if self.divergence_ratio <= 1.0:
            raise ValueError("divergence_ratio must exceed 1")

    @property
    def alpha_star(self) -> float:
        """The dual exponent 2 - alpha (derived, never stored)."""
        return 2.0 - self.alpha


@dataclass(frozen=True)
class EnergyReport:
    """Result of an energy computation, with its refinement history."""

    value: float
    l2_norm_sq: float
    divergent: bool = False
    refinement_trace: tuple = ()

    @property
    def e1_value(self) -> float:
        if self.divergent:
            return DIVERGENT
        return self.value + self.l2_norm_sq

    @property
    def e1_norm(self) -> float:
        if self.divergent:
            return DIVERGENT
        return math.sqrt(self.e1_value)

    def to_json_dict(self) -> dict:
        return {
            "value": "divergent" if self.divergent else self.value,
            "l2": self.l2_norm_sq,
            "e1": "divergent" if self.divergent else self.e1_value,
            "trace": [[int(r), float(v)] for r, v in self.refinement_trace],
        }


class ErasedPreconditionError(ValueError):
    """The pair (f, g) is not an erased-function pair; distinct from any
    divergence of the energies themselves."""


def _require_compact(f: GridFunction):
    if not f.finite():
        raise ValueError("samples must be finite")
    if not f.has_compact_support():
        raise ValueError("function must taper to exact zero inside its window")


def _grid_energy(f: GridFunction, p: EnergyParams) -> float:
    if f.is_zero:
        return 0.0
    g = f.trimmed(margin=1)
    skip = int(math.floor(p.diagonal_band))
    return gagliardo_of_values(g.values, g.step, p.alpha, skip_cells=skip)


def gagliardo_energy(f: Union[GridFunction, StepFunction], p: EnergyParams,
                     *, base_cells: int = 4, refine_levels: int = 10
                     ) -> EnergyReport:
    """The fractional double integral of f (no prefactor).

    Grid functions are piecewise linear, so their energy is evaluated exactly
    in one pass.  Step functions are bridged by sampling at dyadically
    refined steps: the trace of estimates either converges (the reported
    value is the Richardson limit of the trace) or grows geometrically, in
    which case the report is flagged divergent.  The divergence test fires
    when three successive refinements each grow the estimate by at least
    ``p.divergence_ratio``.
    """
    if p.alpha >= 2.0:
        raise ValueError("alpha = 2 has no Gagliardo form; use dirichlet_energy")

    if isinstance(f, GridFunction):
        _require_compact(f)
        value = _grid_energy(f, p)
        return EnergyReport(value=value, l2_norm_sq=f.l2_norm_sq(),
                            refinement_trace=((f.n_nodes, value),))

    if not isinstance(f, StepFunction):
        raise TypeError(f"unsupported function type {type(f).__name__}")
    if f.is_zero:
        return EnergyReport(value=0.0, l2_norm_sq=0.0,
                            refinement_trace=((0, 0.0),))

    a, b = f.span()
    trace = []
    consecutive = 0
    for level in range(refine_levels):
        cells = base_cells * 2 ** level
        step = (b - a) / cells
        sampled = f.sample(step)
        est = _grid_energy(sampled, p)
        trace.append((cells, est))
        if len(trace) >= 2 and trace[-2][1] > 0:
            ratio = est / trace[-2][1]
            consecutive = consecutive + 1 if ratio >= p.divergence_ratio else 0
            if consecutive >= 3:
                return EnergyReport(value=DIVERGENT, l2_norm_sq=f.l2_norm_sq(),
                                    divergent=True,
                                    refinement_trace=tuple(trace))
    value = _richardson(trace)
    return EnergyReport(value=value, l2_norm_sq=f.l2_norm_sq(),
                        refinement_trace=tuple(trace))


def _richardson(trace) -> float:
    """Extrapolate a geometrically converging refinement trace."""
    if len(trace) < 3:
        return trace[-1][1]
    g1 = trace[-2][1] - trace[-3][1]
    g2 = trace[-1][1] - trace[-2][1]
    if g1 != 0.0:
        r = g2 / g1
        if 0.0 < r < 0.97:
            return trace[-1][1] + g2 * r / (1.0 - r)
    return trace[-1][1]


def indicator_energy_closed_form(a: float, b: float, alpha: float) -> float:
    """Fractional energy of the indicator of (a, b): 4/(alpha(1-alpha)) *
    (b-a)^(1-alpha) for alpha in (0,1); DIVERGENT (inf) for alpha >= 1."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if alpha >= 1.0:
        return DIVERGENT
    return 4.0 / (alpha * (1.0 - alpha)) * (b - a) ** (1.0 - alpha)


def dirichlet_energy(f: GridFunction) -> float:
    """(1/2) int f'(x)^2 dx, exact for the piecewise-linear interpolant."""
    _require_compact(f)
    s = np.diff(f.values) / f.step
    return float(0.5 * np.sum(s * s) * f.step)


def fourier_energy(f: GridFunction, p: EnergyParams, xi_max: float,
                   n_freq: int) -> float:
    """int over |xi| <= xi_max of |fhat|^2 |xi|^alpha, plus an analytic bound
    on the tail.  The tail uses |fhat| <= TV(f)/(sqrt(2 pi) |xi|) where that
    integrates, and the second-order bound TV(f')/(sqrt(2 pi) xi^2) otherwise.
    """
    _require_compact(f)
    table = discrete_fourier(f, xi_max, n_freq)
    amp2 = np.abs(table.amplitudes) ** 2
    weight = np.abs(table.frequencies) ** p.alpha
    main = float(np.trapezoid(amp2 * weight, table.frequencies))

    tail = 0.0
    if f.support_lo >= 0:
        tv1 = f.total_variation()
        d2 = np.abs(np.diff(f.values, 2)) / f.step
        tv2 = float(np.sum(d2))
        candidates = []
        if p.alpha < 1.0 and tv1 > 0:
            candidates.append(tv1 ** 2 / math.pi * xi_max ** (p.alpha - 1.0)
                              / (1.0 - p.alpha))
        if tv2 > 0:
            candidates.append(tv2 ** 2 / math.pi * xi_max ** (p.alpha - 3.0)
                              / (3.0 - p.alpha))
        if candidates:
            tail = min(candidates)
    return main + tail


def _gauss_segments(lo: float, hi: float, n_panels: int, n_pts: int = 12):
    nodes, weights = np.polynomial.legendre.leggauss(n_pts)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def hardy_boundary_identity(f: GridFunction, a: float, b: float, alpha: float,
                            *, far_factor: float = 8.0) -> tuple:
    """Both sides of the exterior-kernel identity for f supported in (a, b).

    lhs integrates f(x)^2 against the numerically computed exterior integral
    of the kernel over y outside (a, b) (graded panels plus analytic far
    tails); rhs is the weighted boundary integral
    (1/alpha) int f^2 [(x-a)^(-alpha) + (b-x)^(-alpha)].  The two agree up to
    quadrature error.
    """
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise ValueError("alpha must lie in (0,1) or (1,2)")
    _require_compact(f)
    if f.is_zero:
        return (0.0, 0.0)
    slo, shi = f.support_interval()
    if not (a < slo - f.step * 0.5 and shi + f.step * 0.5 < b):
        raise ValueError("support must lie strictly inside (a, b)")

    xq, wq = _gauss_segments(slo - f.step, shi + f.step,
                             n_panels=max(64, f.support_hi - f.support_lo + 2))
    fx2 = f(xq) ** 2

    # rhs: exact closed-form exterior weight.
    wgt = ((xq - a) ** (-alpha) + (b - xq) ** (-alpha)) / alpha
    rhs = float(np.sum(wq * fx2 * wgt))

    # lhs: numeric y-integration of the kernel over the exterior, with
    # geometrically graded panels toward the boundary and analytic far tails.
    far = far_factor * (b - a)

    def exterior_kernel(x):
        total = np.zeros_like(x)
        for (edge, sign) in ((a, -1.0), (b, +1.0)):
            dist0 = np.abs(x - edge)
            t = np.geomspace(1.0, 1.0 + far / dist0.min(), 48)
            for lo_f, hi_f in zip(t[:-1], t[1:]):
                ylo = dist0 * lo_f
                yhi = dist0 * hi_f
                nodes, weights = np.polynomial.legendre.leggauss(6)
                mid = 0.5 * (ylo + yhi)
                half = 0.5 * (yhi - ylo)
                for nd, wt in zip(nodes, weights):
                    d = mid + half * nd
                    total += wt * half * d ** (-1.0 - alpha)
            total += (dist0 * t[-1]) ** (-alpha) / alpha
        return total

    lhs = float(np.sum(wq * fx2 * exterior_kernel(xq)))
    return (lhs, rhs)


def check_erased_bound(f: GridFunction, g: GridFunction, p: EnergyParams
                       ) -> tuple:
    """E1-norms of an erased pair and their ratio ||f||_E1 / ||g||_E1.

    Raises ErasedPreconditionError when f is not an erased function of g;
    that failure is reported distinctly from any divergence of the energies.
    """
    from .ladder import is_erased_function

    ok, _ = is_erased_function(f, g)
    if not ok:
        raise ErasedPreconditionError("f is not an erased function of g")
    rep_f = gagliardo_energy(f, p)
    rep_g = gagliardo_energy(g, p)
    e1_f = rep_f.e1_norm
    e1_g = rep_g.e1_norm
    if e1_g == 0.0:
        return (e1_f, e1_g, 0.0)
    return (e1_f, e1_g, e1_f / e1_g)


def fourier_gagliardo_ratio(f: GridFunction, p: EnergyParams,
                            xi_max: float = 512.0, n_freq: int = 8192) -> float:
    """Measured ratio fourier_energy/gagliardo_energy; constant in f at fixed
    alpha, available for calibrating EnergyParams.c_of_alpha."""
    gag = gagliardo_energy(f, p).value
    if gag == 0.0:
        raise ValueError("ratio undefined for the zero function")
    return fourier_energy(f, p, xi_max, n_freq) / gag


def calibrate_c_of_alpha(p: EnergyParams, f: GridFunction | None = None
                         ) -> EnergyParams:
    """New params with the measured Fourier/Gagliardo ratio stored.

    The normalization between the two energy routes depends only on alpha;
    it is measured on a reference bump (or the supplied function), never
    assumed."""
    if f is None:
        x = np.arange(-1.0, 1.0 + 1e-12, 1.0 / 256.0)
        vals = np.where(np.abs(x) < 1.0, np.cos(np.pi * x / 2.0) ** 2, 0.0)
        vals[0] = vals[-1] = 0.0
        f = GridFunction(-1.0, 1.0 / 256.0, vals)
    ratio = fourier_gagliardo_ratio(f, p)
    return EnergyParams(alpha=p.alpha, c_of_alpha=ratio,
                        diagonal_band=p.diagonal_band,
                        tail_radius=p.tail_radius,
                        divergence_ratio=p.divergence_ratio)
