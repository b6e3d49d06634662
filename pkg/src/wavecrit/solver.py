"""Exact-kernel causal solver for the radial wave equation in three
dimensions with a modulus-modulated critical nonlinearity.

The scheme marches the integral form of the problem on a characteristic
lattice with one shared step h in time and radius:

    u(t, r) = v(t, r) + (Lu)(t, r)

where v is the free evolution of the data written through the classical
two-point formula for r * v, and L accumulates the forcing history

    (Lu)(t, r) = (1/r) * integral over s in (0, t) of
                 integral over rho in (t-s-r, t-s+r) of
                 (rho/2) |u(s, rho)|^p mu(|u(s, rho)|) d rho d s

with u extended evenly in rho, so the inner integrand is odd.  Because the
window endpoints t-s±r land exactly on lattice nodes, the inner integral
is a difference of cumulative trapezoid sums and the odd part of any
window cancels identically; the s = t slice vanishes, so the marching is
explicit level by level.  On the axis the 1/r singularity is replaced by
the analytic limits

    v(t, 0)  = u0(t) + t u0'(t) + t u1(t)
    Lu(t, 0) = integral of (t-s) |u(s, t-s)|^p mu(|u(s, t-s)|) d s.

Blow-up is detected by a cap on the sup norm: marching stops at the first
level whose max exceeds the cap or goes non-finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .exponents import strauss_exponent
from .modulus import ModulusSpec, mu_eval

DEFAULT_CAP = 1e6


@dataclass(frozen=True)
class RadialData:
    """Radial Cauchy data: profiles of |x| with compact support.

    Profiles are callables of the radius; evenness in r is automatic since
    every evaluation goes through |r|.  ``u0_prime`` may be omitted, in
    which case a centered difference is used.  ``amplitude`` scales both
    profiles (the small parameter of the global-existence runs).
    """

    u0: Callable[[float], float]
    u1: Callable[[float], float]
    support_radius: float
    u0_prime: Optional[Callable[[float], float]] = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.support_radius <= 0.0:
            raise ValueError("support radius must be positive")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be non-negative")

    def u0_derivative(self, r: float) -> float:
        if self.u0_prime is not None:
            return self.u0_prime(r)
        h = 1e-6 * max(1.0, self.support_radius)
        return (self.u0(r + h) - self.u0(max(r - h, 0.0) if r < h else r - h)) / (2.0 * h)

    def with_amplitude(self, eps: float) -> "RadialData":
        return replace(self, amplitude=eps)


def default_bump(amplitude: float = 1.0) -> RadialData:
    """C^2 compactly supported test datum (1 - r^2)^3 on |r| <= 1, u1 = 0.

    The cube makes the profile twice continuously differentiable at the
    support edge; a square would not be.
    """

    def u0(r: float) -> float:
        s = 1.0 - r * r
        return s * s * s if abs(r) < 1.0 else 0.0

    def u0p(r: float) -> float:
        s = 1.0 - r * r
        return -6.0 * r * s * s if abs(r) < 1.0 else 0.0

    return RadialData(u0=u0, u1=lambda r: 0.0, support_radius=1.0,
                      u0_prime=u0p, amplitude=amplitude)


def velocity_bump(amplitude: float = 1.0) -> RadialData:
    """Datum with zero displacement and a C^2 velocity bump (for the
    quadrature-bearing branch of the free propagator)."""

    def u1(r: float) -> float:
        s = 1.0 - r * r
        return s * s * s if abs(r) < 1.0 else 0.0

    return RadialData(u0=lambda r: 0.0, u1=u1, support_radius=1.0,
                      u0_prime=lambda r: 0.0, amplitude=amplitude)


@dataclass(frozen=True)
class CharacteristicGrid:
    """Lattice with the same step in t and r.

    ``r_nodes`` must cover the forward light cone of the data support at
    the last stored level: (r_nodes - 1) h >= support + t_levels h.
    """

    h: float
    t_levels: int
    r_nodes: int

    def __post_init__(self):
        if self.h <= 0.0 or self.t_levels < 1 or self.r_nodes < 2:
            raise ValueError("need h > 0, t_levels >= 1, r_nodes >= 2")

    @classmethod
    def cover(cls, h: float, horizon: float, support_radius: float) -> "CharacteristicGrid":
        t_levels = int(round(horizon / h))
        r_nodes = int(math.ceil((support_radius + t_levels * h) / h)) + 2
        return cls(h=h, t_levels=t_levels, r_nodes=r_nodes)

    @property
    def horizon(self) -> float:
        return self.h * self.t_levels

    def covers(self, support_radius: float) -> bool:
        return (self.r_nodes - 1) * self.h >= support_radius + self.horizon - 1e-9


@dataclass
class SolutionRun:
    """A marched field with its provenance.

    ``field`` holds u(t_i, r_j) for the stored levels; when the run blew
    up storage ends at the detection level.  status is one of
    "completed", "blew_up", "failed".
    """

    grid: CharacteristicGrid
    data: RadialData
    spec: Optional[ModulusSpec]
    field: np.ndarray
    status: str
    t_detect: Optional[float] = None
    failure: Optional[str] = None
    manifest: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.grid.h * np.arange(self.field.shape[0])

    @property
    def radii(self) -> np.ndarray:
        return self.grid.h * np.arange(self.grid.r_nodes)

    @property
    def horizon(self) -> float:
        return self.times[-1] if self.field.size else 0.0

    def level_index(self, t: float) -> int:
        i = int(round(t / self.grid.h))
        if abs(t - i * self.grid.h) > 1e-9 * max(1.0, t) or not 0 <= i < self.field.shape[0]:
            raise ValueError(f"time {t} is not a stored level")
        return i


# --------------------------------------------------------------------------
# free propagator

def _u1_prefix_fine(data: RadialData, points: int = 20001):
    """Cumulative integral of (rho/2) u1(rho) on a fine grid over the support."""
    top = data.support_radius
    rho = np.linspace(0.0, top, points)
    vals = 0.5 * rho * data.amplitude * np.asarray([data.u1(x) for x in rho])
    pref = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(rho))])
    return rho, pref


def linear_field(data: RadialData, t: float, r) -> np.ndarray:
    """Free solution at time t on an array of radii (fine-table quadrature).

    Used by the weighted-norm checks, which need off-lattice evaluation;
    the lattice path inside ``march`` shares the same two-point formula but
    integrates u1 with the grid-step trapezoid.
    """
    r_arr = np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    eps = data.amplitude
    rho, pref = _u1_prefix_fine(data)

    def q1(x):
        return np.interp(np.abs(x), rho, pref, right=pref[-1])

    def h0(x):
        ax = np.abs(x)
        return 0.5 * x * eps * np.asarray([data.u0(a) for a in np.atleast_1d(ax)])

    out = np.empty_like(r_arr)
    on_axis = r_arr < 1e-12
    if np.any(on_axis):
        out[on_axis] = (
            eps * data.u0(t)
            + t * eps * data.u0_derivative(t)
            + t * eps * data.u1(t)
        )
    off = ~on_axis
    if np.any(off):
        ro = r_arr[off]
        out[off] = (h0(t + ro) - h0(t - ro) + q1(t + ro) - q1(np.abs(t - ro))) / ro
    return out


def linear_propagator(data: RadialData, t: float, r: float, step: Optional[float] = None) -> float:
    """Free solution at a single point.

    With ``step`` the u1 term uses the lattice trapezoid (matching the
    marched scheme); without it adaptive quadrature is used, which serves
    as the independent route in the tests.
    """
    if t < 0.0:
        raise ValueError("time must be non-negative")
    eps = data.amplitude
    ra = abs(r)
    if ra < 1e-12:
        return eps * (data.u0(t) + t * data.u0_derivative(t) + t * data.u1(t))

    two_point = 0.5 * (
        (t + ra) * eps * data.u0(abs(t + ra)) - (t - ra) * eps * data.u0(abs(t - ra))
    ) / ra

    def h1(x):
        return 0.5 * x * eps * data.u1(abs(x))

    if step is None:
        lo, hi = t - ra, t + ra
        pts = [x for x in (-data.support_radius, 0.0, data.support_radius) if lo < x < hi]
        integral = integrate.quad(h1, lo, hi, points=pts or None, limit=200)[0]
    else:
        m = int(round(ra / step))
        i = int(round(t / step))
        nodes = step * np.arange(i - m, i + m + 1)
        vals = np.asarray([h1(x) for x in nodes])
        integral = float(np.trapezoid(vals, dx=step))
    return two_point + integral / ra


# --------------------------------------------------------------------------
# forcing history

def _forcing(spec: Optional[ModulusSpec], p: float, level: np.ndarray) -> np.ndarray:
    if spec is None:
        return np.zeros_like(level)
    a = np.abs(level)
    return a ** p * mu_eval(spec, a)


def _history_prefix(grid: CharacteristicGrid, g_level: np.ndarray) -> np.ndarray:
    """Cumulative lattice trapezoid of (rho/2) g(rho); constant beyond support."""
    h = grid.h
    hvals = 0.5 * (h * np.arange(grid.r_nodes)) * g_level
    return np.concatenate([[0.0], np.cumsum(0.5 * (hvals[1:] + hvals[:-1]) * h)])


def _duhamel_level(
    grid: CharacteristicGrid,
    prefixes: list,
    g_levels: list,
    i: int,
) -> np.ndarray:
    """Forcing contribution at level i from all strictly earlier levels.

    Returns r * Lu at the off-axis nodes and Lu itself at the axis node.
    """
    h = grid.h
    nr = grid.r_nodes
    j = np.arange(nr)
    acc = np.zeros(nr)
    axis = 0.0
    for k in range(i):
        w = 0.5 * h if k == 0 else h
        m = i - k
        qk = prefixes[k]
        hi = np.minimum(m + j, nr - 1)
        lo = np.minimum(np.abs(m - j), nr - 1)
        acc += w * (qk[hi] - qk[lo])
        if m < nr:
            axis += w * (m * h) * g_levels[k][m]
    out = np.empty(nr)
    out[0] = axis
    out[1:] = acc[1:]
    return out


def duhamel_apply(run: SolutionRun, t_level: int, r: float) -> float:
    """Forcing term Lu at stored level ``t_level`` and lattice radius r.

    Every level strictly below must already be computed (it is, for any
    completed or blown-up run).  r must sit on the lattice.
    """
    grid = run.grid
    if not 0 <= t_level < run.field.shape[0]:
        raise ValueError(f"level {t_level} not stored")
    j = int(round(r / grid.h))
    if abs(r - j * grid.h) > 1e-9 * max(1.0, abs(r)) or not 0 <= j < grid.r_nodes:
        raise ValueError(f"radius {r} is not a lattice node")
    p = strauss_exponent(3)
    g_levels = [_forcing(run.spec, p, run.field[k]) for k in range(t_level)]
    prefixes = [_history_prefix(grid, g) for g in g_levels]
    out = _duhamel_level(grid, prefixes, g_levels, t_level)
    if j == 0:
        return float(out[0])
    return float(out[j] / (j * grid.h))


def _validate_data(data: RadialData, grid: CharacteristicGrid):
    if grid.h * 16 > data.support_radius:
        raise ValueError(
            f"grid step {grid.h:g} does not resolve the support "
            f"{data.support_radius:g} with 16 nodes"
        )
    if not grid.covers(data.support_radius):
        raise ValueError("grid does not cover the forward light cone of the data")
    if abs(data.u0_derivative(0.0)) > 1e-6:
        raise ValueError("radial C^2 data needs u0'(0) = 0")
    probe = data.support_radius * np.array([1.0 + 1e-9, 1.5, 2.0])
    for x in probe:
        if abs(data.u0(x)) > 0.0 or abs(data.u1(x)) > 0.0:
            raise ValueError(f"data do not vanish beyond the support at r={x:g}")


def march(
    data: RadialData,
    spec: Optional[ModulusSpec],
    grid: CharacteristicGrid,
    cap: float = DEFAULT_CAP,
) -> SolutionRun:
    """Causal characteristic marching of the integral equation.

    ``spec=None`` disables the nonlinearity (linear probe mode).  Levels
    are filled in increasing time; the run stops early with status
    "blew_up" at the first level whose max modulus exceeds ``cap`` or is
    not finite.
    """
    _validate_data(data, grid)
    h = grid.h
    nr = grid.r_nodes
    nt = grid.t_levels
    p = strauss_exponent(3)
    eps = data.amplitude
    r = h * np.arange(nr)

    u0v = eps * np.asarray([data.u0(x) for x in r])
    u1v = eps * np.asarray([data.u1(x) for x in r])
    hu1 = 0.5 * r * u1v
    q1 = np.concatenate([[0.0], np.cumsum(0.5 * (hu1[1:] + hu1[:-1]) * h)])

    def u0e(x):
        return eps * np.asarray([data.u0(abs(v)) for v in x])

    field_levels = [u0v]
    g_levels = []
    prefixes = []
    status, t_detect, failure = "completed", None, None

    j = np.arange(nr)
    for i in range(1, nt + 1):
        t = i * h
        g = _forcing(spec, p, field_levels[-1])
        g_levels.append(g)
        prefixes.append(_history_prefix(grid, g))

        # free part on this level
        level = np.empty(nr)
        xp = h * (i + j[1:])
        xm = h * (i - j[1:])
        two_point = 0.5 * (xp * u0e(xp) - xm * u0e(xm)) / r[1:]
        hi = np.minimum(i + j[1:], nr - 1)
        lo = np.minimum(np.abs(i - j[1:]), nr - 1)
        level[1:] = two_point + (q1[hi] - q1[lo]) / r[1:]
        level[0] = eps * (data.u0(t) + t * data.u0_derivative(t) + t * data.u1(t))

        # forcing part from strictly earlier levels
        duh = _duhamel_level(grid, prefixes, g_levels, i)
        level[0] += duh[0]
        level[1:] += duh[1:] / r[1:]

        field_levels.append(level)
        peak = np.max(np.abs(level))
        if not np.isfinite(peak) or peak > cap:
            status = "blew_up"
            t_detect = t
            break

    run = SolutionRun(
        grid=grid,
        data=data,
        spec=spec,
        field=np.asarray(field_levels),
        status=status,
        t_detect=t_detect,
        failure=failure,
    )
    run.manifest = {
        "h": h,
        "t_levels": nt,
        "r_nodes": nr,
        "cap": cap,
        "amplitude": eps,
        "status": status,
        "t_detect": t_detect,
    }
    return run


def detect_blowup(run: SolutionRun) -> Optional[float]:
    """First level time at which the cap was exceeded, if any."""
    return run.t_detect if run.status == "blew_up" else None


@dataclass(frozen=True)
class LifespanRow:
    eps: float
    t_detect: Optional[float]
    status: str


def lifespan_sweep(
    data_template: RadialData,
    spec: ModulusSpec,
    epsilons,
    grid: CharacteristicGrid,
    cap: float = DEFAULT_CAP,
) -> list:
    """One march per amplitude; rows report detection time or completion."""
    rows = []
    for eps in epsilons:
        if eps <= 0.0:
            raise ValueError("amplitudes must be positive")
        try:
            run = march(data_template.with_amplitude(eps), spec, grid, cap=cap)
            rows.append(LifespanRow(float(eps), run.t_detect, run.status))
        except (ValueError, FloatingPointError) as exc:  # aggregate per-run failures
            rows.append(LifespanRow(float(eps), None, f"failed: {exc}"))
    return rows


@dataclass(frozen=True)
class ConvergenceResult:
    order: Optional[float]
    diffs: tuple
    inconclusive: bool


def convergence_study(
    data: RadialData,
    spec: Optional[ModulusSpec],
    h_list,
    t_check: float,
    cap: float = DEFAULT_CAP,
) -> ConvergenceResult:
    """Observed order from successive max-norm differences at a fixed time.

    Requires at least three steps, each half the previous; fields are
    compared on the common (coarsest) radial nodes.
    """
    h_list = list(h_list)
    if len(h_list) < 3:
        raise ValueError("need at least three grid steps")
    for a, b in zip(h_list, h_list[1:]):
        if abs(a / b - 2.0) > 1e-12:
            raise ValueError("each step must be half the previous")
    fields = []
    for h in h_list:
        grid = CharacteristicGrid.cover(h, t_check, data.support_radius)
        run = march(data, spec, grid, cap=cap)
        if run.status != "completed":
            raise ValueError(f"run at h={h} did not complete")
        stride = int(round(h_list[0] / h))
        level = run.field[run.level_index(grid.horizon)]
        fields.append(level[::stride][: int(round((data.support_radius + t_check) / h_list[0])) + 1])
    n_common = min(len(f) for f in fields)
    diffs = tuple(
        float(np.max(np.abs(fields[k][:n_common] - fields[k + 1][:n_common])))
        for k in range(len(fields) - 1)
    )
    if any(d == 0.0 for d in diffs):
        return ConvergenceResult(order=None, diffs=diffs, inconclusive=True)
    if any(d2 >= d1 for d1, d2 in zip(diffs, diffs[1:])):
        return ConvergenceResult(order=None, diffs=diffs, inconclusive=True)
    orders = [math.log2(d1 / d2) for d1, d2 in zip(diffs, diffs[1:])]
    return ConvergenceResult(order=float(np.mean(orders)), diffs=diffs, inconclusive=False)
