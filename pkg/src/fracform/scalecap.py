"""Scale functions built from open sets, fat-Cantor generators, composition
with Lipschitz functions, the distributional pairing, and Riesz capacities by
constrained energy minimization.

Capacity of a set K inside a finite window is the minimum of the E1 form
(fractional energy at the dual exponent plus the L2 norm) over grid functions
pinned to 1 on the nodes of K, with the natural zero condition beyond the
window.  The discrete form uses the same exact per-cell fractional kernel as
the energy module, assembled as a symmetric Toeplitz operator over the hat
basis, and the pinned-node system is solved by conjugate gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import matmul_toeplitz
from scipy.sparse.linalg import LinearOperator, cg

from .grids import GridFunction, IntervalSet
from .quadcells import gagliardo_of_values, hat_energy_row

__all__ = [
    "ScaleFunction",
    "FatCantorSpec",
    "SignedMeasure",
    "CapacityEstimate",
    "Composition",
    "CapacitySolverError",
    "build_fat_cantor",
    "scale_from_open_set",
    "brownian_scale_admissible",
    "compose_scale",
    "pushforward_measure",
    "duality_pairing_check",
    "capacity_estimate",
    "concentration_test",
]


# -- scale functions -----------------------------------------------------------


@dataclass(frozen=True)
class ScaleFunction:
    """s(x) = measure of G between the anchor and x, for an open set G.

    s is 1-Lipschitz and non-decreasing with slope exactly 1 on G and 0 off
    G.  ``density_depth`` records the deepest dyadic level of the bounded
    complement hull at which every cell still meets G (the finite-resolution
    density certificate); ``strictly_increasing`` is the corresponding flag.
    """

    g_set: IntervalSet
    anchor: float = 0.0
    breakpoints: np.ndarray = None
    cumulative: np.ndarray = None
    density_depth: int = -1
    strictly_increasing: bool = False

    def __post_init__(self):
        pts = sorted({self.anchor}
                     | {p for iv in self.g_set for p in iv if math.isfinite(p)})
        bp = np.array(pts, dtype=float)
        cum = np.array([self._signed_measure(x) for x in bp])
        bp.flags.writeable = False
        cum.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "cumulative", cum)

    def _signed_measure(self, x: float) -> float:
        m = self.g_set.measure_between(self.anchor, x)
        return m if x >= self.anchor else -m

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        bp, cum = self.breakpoints, self.cumulative
        idx = np.searchsorted(bp, x, side="right") - 1
        out = np.empty_like(x)
        below = idx < 0
        out[below] = cum[0] - self.g_set.indicator(
            0.5 * (x[below] + bp[0])) * (bp[0] - x[below])
        inside = ~below
        i = idx[inside]
        mid = 0.5 * (x[inside] + bp[i])
        slope = self.g_set.indicator(mid)
        out[inside] = cum[i] + slope * (x[inside] - bp[i])
        return out

    def slope_at(self, x) -> np.ndarray:
        """Exact derivative indicator: 1 on G, 0 elsewhere."""
        return self.g_set.indicator(x)

    def measure_between(self, x: float, y: float) -> float:
        return self.g_set.measure_between(x, y)


def _density_depth(g: IntervalSet, window, max_depth: int = 12) -> int:
    """Deepest dyadic level of the window at which every cell meets G with
    positive measure; -1 when even depth 0 fails."""
    a, b = window
    depth = -1
    for d in range(0, max_depth + 1):
        edges = np.linspace(a, b, 2 ** d + 1)
        if all(g.measure_between(lo, hi) > 0.0
               for lo, hi in zip(edges[:-1], edges[1:])):
            depth = d
        else:
            break
    return depth


def scale_from_open_set(g: IntervalSet, anchor: float = 0.0,
                        density_window=None) -> ScaleFunction:
    """Exact piecewise-linear scale function with slope 1 on G and 0 off G."""
    if density_window is None:
        finite = [p for iv in g for p in iv if math.isfinite(p)]
        density_window = ((min(finite), max(finite)) if len(finite) >= 2
                          else (-1.0, 1.0))
    depth = _density_depth(g, density_window)
    strict = depth >= 6 or g.complement_within(density_window).is_empty
    return ScaleFunction(g, anchor, density_depth=depth,
                         strictly_increasing=strict)


def brownian_scale_admissible(s: ScaleFunction, window=(-1.0, 1.0)):
    """Slope of the scale is 0 or 1 everywhere by construction; reports the
    measure of the flat set {s' = 0} inside the window (positive flat
    measure is the properness proxy for the diffusion endpoint case)."""
    a, b = window
    flat = (b - a) - s.g_set.measure_between(a, b)
    return True, float(flat)


# -- fat-Cantor construction ------------------------------------------------------


@dataclass(frozen=True)
class FatCantorSpec:
    """Open dense-in-(-1,1) union spec: dyadic centers, summable radii.

    The i-th removed interval is centred at the i-th dyadic rational of
    (-1, 1) with radius chosen so the capacity surrogate r^(alpha-1) (or
    1/log(a_log/r) at alpha = 1) of the i-th interval is budget * 2^-i;
    the surrogate sum then stays below ``budget``.
    """

    alpha: float
    budget: float
    a_log: float = 2.0

    def __post_init__(self):
        if not 1.0 <= self.alpha < 2.0:
            raise ValueError(f"fat-Cantor construction needs alpha in [1, 2), "
                             f"got {self.alpha}")
        if self.budget <= 0:
            raise ValueError("surrogate budget must be positive")
        if self.a_log <= 1:
            raise ValueError("a_log must exceed 1")

    def radius(self, i: int) -> float:
        share = self.budget * 2.0 ** (-i)
        if self.alpha > 1.0:
            return share ** (1.0 / (self.alpha - 1.0))
        return self.a_log * math.exp(-1.0 / share)

    def surrogate(self, r: float) -> float:
        if self.alpha > 1.0:
            return r ** (self.alpha - 1.0)
        return 1.0 / math.log(self.a_log / r)


def dyadic_centers(count: int):
    """0, then the odd dyadics of each level: +-1/2, +-1/4, +-3/4, ..."""
    centers = [0.0]
    q = 1
    while len(centers) < count:
        for p in range(1, 2 ** q, 2):
            for c in (p / 2.0 ** q, -p / 2.0 ** q):
                centers.append(c)
                if len(centers) >= count:
                    return centers
        q += 1
    return centers[:count]


def build_fat_cantor(spec: FatCantorSpec, n_intervals: int,
                     radii=None) -> IntervalSet:
    """The open set: everything outside [-1, 1] plus n symmetric islands at
    dyadic centers, radii shrunk to stay inside (-1, 1).

    ``radii`` overrides the spec's geometric rule; a rule whose surrogate
    sum exceeds the budget is rejected with the offending partial sum."""
    if n_intervals < 1:
        raise ValueError("need at least one island")
    if radii is not None and len(radii) != n_intervals:
        raise ValueError("need one radius per island")
    pieces = [(-math.inf, -1.0), (1.0, math.inf)]
    surrogate_sum = 0.0
    for i, c in enumerate(dyadic_centers(n_intervals), start=1):
        r = spec.radius(i) if radii is None else float(radii[i - 1])
        r = min(r, 0.5 * (1.0 - abs(c)))
        surrogate_sum += spec.surrogate(r)
        if surrogate_sum > spec.budget * (1.0 + 1e-9):
            raise ValueError(f"radius rule exceeds the surrogate budget: "
                             f"partial sum {surrogate_sum:.6g} after {i} islands")
        pieces.append((c - r, c + r))
    return IntervalSet(tuple(pieces))


# -- composition and pairing ---------------------------------------------------------


@dataclass(frozen=True)
class Composition:
    """f composed with a scale, with the recorded Lipschitz constant of f."""

    function: GridFunction
    lipschitz: float
    scale: ScaleFunction


def compose_scale(f_lip: GridFunction, s: ScaleFunction, window,
                  step: float | None = None) -> Composition:
    """Sample f(s(x)) on the window; f lives on the range of s.

    The recorded constant makes |f(s(x)) - f(s(y))| <= lip |s(x) - s(y)|
    hold at every node pair."""
    lo, hi = float(window[0]), float(window[1])
    if step is None:
        step = f_lip.step
    supp = f_lip.support_interval()
    if supp is not None:
        s_lo, s_hi = float(s(lo)[0]), float(s(hi)[0])
        if not (s_lo < supp[0] and supp[1] < s_hi):
            raise ValueError("support of f escapes the image of the window")
    n = int(round((hi - lo) / step)) + 1
    x = lo + step * np.arange(n)
    vals = f_lip(s(x))
    vals[0] = 0.0
    vals[-1] = 0.0
    return Composition(GridFunction(lo, step, vals), f_lip.lipschitz(), s)


@dataclass(frozen=True)
class SignedMeasure:
    """Atoms plus piecewise-constant density segments, finite on compacts."""

    atoms: tuple = ()
    density_segments: tuple = ()

    def integrate(self, phi: GridFunction) -> float:
        total = 0.0
        for loc, weight in self.atoms:
            total += weight * float(phi(np.array([loc]))[0])
        for (lo, hi), dens in self.density_segments:
            total += dens * _integral_on(phi, lo, hi)
        return total

    def positive_mass(self) -> float:
        total = sum(w for _, w in self.atoms if w > 0)
        total += sum(d * (hi - lo)
                     for (lo, hi), d in self.density_segments if d > 0)
        return total

    def total_variation_mass(self) -> float:
        total = sum(abs(w) for _, w in self.atoms)
        total += sum(abs(d) * (hi - lo)
                     for (lo, hi), d in self.density_segments)
        return total


def _integral_on(phi: GridFunction, lo: float, hi: float) -> float:
    """Exact integral of the interpolant of phi over [lo, hi]."""
    xs = phi.x
    cuts = xs[(xs > lo) & (xs < hi)]
    pts = np.concatenate([[lo], cuts, [hi]])
    vals = phi(pts)
    return float(np.sum(0.5 * (vals[:-1] + vals[1:]) * np.diff(pts)))


def pushforward_measure(f_comp: GridFunction, s: ScaleFunction
                        ) -> SignedMeasure:
    """Lebesgue-Stieltjes measure of the composed function, as density
    segments (the per-cell slope, merged over equal-slope runs)."""
    v = f_comp.values
    slopes = np.diff(v) / f_comp.step
    x = f_comp.x
    segments = []
    i = 0
    while i < slopes.size:
        j = i
        while j + 1 < slopes.size and slopes[j + 1] == slopes[i]:
            j += 1
        if slopes[i] != 0.0:
            segments.append(((float(x[i]), float(x[j + 1])), float(slopes[i])))
        i = j + 1
    return SignedMeasure(atoms=(), density_segments=tuple(segments))


def duality_pairing_check(f_comp: GridFunction, s: ScaleFunction,
                          phi: GridFunction):
    """Integration-by-parts identity for the composed function.

    lhs = -int (f o s)(x) phi'(x) dx (the distributional pairing); rhs
    integrates phi against the pushforward measure d(f o s).  Exact up to
    roundoff for piecewise-linear data."""
    if not f_comp.same_grid(phi):
        raise ValueError("pairing needs phi on the grid of the composition")
    g, ph = f_comp.aligned_with(phi)
    phi_slopes = np.diff(ph.values) / g.step
    x = g.x
    gv = g.values
    cell_int = 0.5 * (gv[:-1] + gv[1:]) * g.step
    lhs = -float(np.sum(phi_slopes * cell_int))
    rhs = pushforward_measure(f_comp, s).integrate(phi)
    return lhs, rhs


# -- capacity ------------------------------------------------------------------------


class CapacitySolverError(RuntimeError):
    """Conjugate gradient failed to reach the requested residual."""

    def __init__(self, message, residual_trace):
        super().__init__(message)
        self.residual_trace = residual_trace


@dataclass(frozen=True)
class CapacityEstimate:
    """Constrained E1 minimum: value, the equilibrium function, the solver
    residual, and the grid step used."""

    value: float
    equilibrium: GridFunction
    residual: float
    resolution: float
    clamp_violation: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "residual": self.residual,
            "resolution": self.resolution,
            "clamp_violation": self.clamp_violation,
            "equilibrium": self.equilibrium.to_json_dict(),
        }


def _e1_operator(n: int, h: float, alpha_star: float):
    row = hat_energy_row(n, h, alpha_star)

    def matvec(u):
        ku = matmul_toeplitz((row, row), u)
        mu = (2.0 * h / 3.0) * u
        mu[:-1] = mu[:-1] + (h / 6.0) * u[1:]
        mu[1:] = mu[1:] + (h / 6.0) * u[:-1]
        return ku + mu

    return matvec


def capacity_estimate(target: IntervalSet, alpha_star: float, domain,
                      step: float, *, rtol: float = 1e-12,
                      maxiter: int | None = None) -> CapacityEstimate:
    """Riesz capacity of the target inside the domain window.

    Minimizes the E1 form over grid functions equal to 1 on the target nodes
    (equality constraints; the minimizer obeys 0 <= u <= 1 by the discrete
    maximum principle, which is verified and reported)."""
    if not 0.0 < alpha_star <= 1.0:
        raise ValueError(f"capacity exponent must lie in (0, 1], got {alpha_star}")
    lo, hi = float(domain[0]), float(domain[1])
    for a, b in target:
        if a < lo - 1e-12 or b > hi + 1e-12:
            raise ValueError(f"target piece ({a}, {b}) escapes the domain "
                             f"({lo}, {hi})")
    n = int(round((hi - lo) / step)) + 1
    if n < 8:
        raise ValueError("domain too small for the requested step")
    h = (hi - lo) / (n - 1)
    x = lo + h * np.arange(n)

    mask = np.zeros(n, dtype=bool)
    for a, b in target:
        mask |= (x >= a - 1e-9 * h) & (x <= b + 1e-9 * h)
    if not mask.any():
        zero = GridFunction(lo, h, np.zeros(n))
        return CapacityEstimate(0.0, zero, 0.0, h)

    matvec_full = _e1_operator(n, h, alpha_star)
    free = ~mask
    uc = mask.astype(float)
    b_rhs = -matvec_full(uc)[free]
    nf = int(free.sum())

    if nf == 0:
        u = uc
        residual = 0.0
    else:
        def mv(z):
            full = np.zeros(n)
            full[free] = z
            return matvec_full(full)[free]

        op = LinearOperator((nf, nf), matvec=mv)
        z, info = cg(op, b_rhs, rtol=rtol, atol=0.0, maxiter=maxiter or 20 * n)
        residual = float(np.linalg.norm(mv(z) - b_rhs)
                         / max(1.0, np.linalg.norm(b_rhs)))
        if info != 0:
            # Rerun with tracking so the failure report carries the trace.
            history = []
            cg(op, b_rhs, rtol=rtol, atol=0.0, maxiter=maxiter or 20 * n,
               callback=lambda zk: history.append(
                   float(np.linalg.norm(mv(zk) - b_rhs))))
            raise CapacitySolverError(
                f"conjugate gradient stopped with info={info}, "
                f"residual={residual:.3e}", tuple(history))
        u = uc.copy()
        u[free] = z

    clamp_violation = float(max(0.0, -u.min(), u.max() - 1.0))
    u = np.clip(u, 0.0, 1.0)
    padded = np.concatenate([[0.0], u, [0.0]])
    seg = padded[:-1] ** 2 + padded[:-1] * padded[1:] + padded[1:] ** 2
    l2 = float(h * np.sum(seg) / 3.0)
    value = gagliardo_of_values(padded, h, alpha_star) + l2
    eq = GridFunction(lo - h, h, padded)
    return CapacityEstimate(value, eq, residual, h, clamp_violation)


def concentration_test(g: IntervalSet, alpha_star: float, window,
                       step: float, *, domain_factor: float = 4.0):
    """Capacity of G inside the window versus capacity of the window.

    A ratio strictly below 1 certifies, at this resolution, that the window
    carries capacity off G; a ratio near 1 is inconclusive and never read as
    a negative certificate."""
    a, b = float(window[0]), float(window[1])
    half = 0.5 * domain_factor * (b - a)
    mid = 0.5 * (a + b)
    domain = (mid - half, mid + half)
    cap_win = capacity_estimate(IntervalSet.of((a, b)), alpha_star, domain,
                                step)
    cap_g = capacity_estimate(g.intersect_window((a, b)), alpha_star, domain,
                              step)
    ratio = cap_g.value / cap_win.value if cap_win.value > 0 else float("nan")
    return cap_g.value, cap_win.value, ratio
