"""Transition analytics: closed-form coefficient-ratio evolution, the
predicted transition radius, point-source diagrams, speed sweeps and the
spike-protocol phase diagram.

In the frame of the instantaneous eigenbasis the two-band problem reduces,
for slowly varying parameters, to an effective 2x2 system whose coupling is
the rate of parameter change over twice the squared band splitting.  With
the coefficients frozen at their initial values that system is solvable in
closed form for the ratio ``b = (c_plus - c_minus) / (c_plus + c_minus)``;
`adiabatic_b_exact` is that solution and `adiabatic_b_approx` its
leading-order form in the small quantity ``|v| / (2 |delta_e|^3)``, with
the real part of the splitting dropped so only the damping asymmetry
remains.  A transition is deemed to occur where ``Re(b)`` crosses zero,
which yields the closed-form radius in `predict_nat_radius`.

Everything that simulates (rays, sweeps, grids) delegates to
`natsim.dynamics.evolve`; work items are independent and may be fanned out
to a process pool.  Results are always assembled in deterministic
(angle, cell) order so downstream files do not depend on the worker count.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NoDamping, NoTransition, PoleEncountered
from .model import EP_TOLERANCE, ControlPoint, eigensystem
from .dynamics import DEFAULT_DT, BandCoefficients, evolve
from .paths import path_from_config, standard_path

#: Band-index values within this band around zero are ignored by the
#: sign-flip detector, suppressing integrator noise near the crossing.
DEFAULT_HYSTERESIS = 0.02

#: Minimum number of recorded samples along each point-source ray.
DEFAULT_RAY_SAMPLES = 400


@dataclass(frozen=True)
class AdiabaticFrameInput:
    """Frozen initial data for the closed-form coefficient-ratio evolution.

    ``b0`` is the initial coefficient ratio, ``delta_e0`` half the initial
    band splitting, ``vartheta = -v_q + i*v_g`` the complex parameter
    velocity and ``speed`` its magnitude.
    """

    b0: complex
    delta_e0: complex
    vartheta: complex
    speed: float

    def __post_init__(self) -> None:
        if self.delta_e0 == 0:
            raise InvalidInput("delta_e0 must be nonzero")
        if not (self.speed >= 0 and math.isfinite(self.speed)):
            raise InvalidInput(f"speed must be non-negative and finite, got {self.speed!r}")


@dataclass(frozen=True)
class NatPrediction:
    """Closed-form transition radius and the quantities entering it."""

    radius: float
    xi: float
    n0: complex
    tau_root: float
    t_occur: float


@dataclass(frozen=True)
class RayScan:
    """Band index sampled along one straight ray from the source point."""

    angle: float
    arc_lengths: np.ndarray
    band_index: np.ndarray


@dataclass(frozen=True)
class PointSourceField:
    """Band-index field on rays fanning out of one control point.

    ``front`` holds, per ray angle, the arc length of the first sign flip of
    the band index (NaN when the ray never flips within its arc budget).
    """

    origin: ControlPoint
    speed: float
    rays: tuple[RayScan, ...]
    front: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PhaseDiagram:
    """Final band index over the spike-protocol parameter grid.

    ``band_index_final[i, j]`` corresponds to ``(xm_grid[i], h_grid[j])``.
    ``boundary`` pairs each spike position with the contrast at which the
    predicted transition radius equals the spike height (NaN when the
    bisection cannot bracket a root on the grid's h range).
    """

    xm_grid: np.ndarray
    h_grid: np.ndarray
    band_index_final: np.ndarray
    boundary: tuple[tuple[float, float], ...]
    speed: float
    direction: str


def initial_ratio(initial: str | BandCoefficients) -> complex:
    """Coefficient ratio b for a band label or explicit coefficients."""
    if isinstance(initial, str):
        label = initial.lower()
        if label == "lower":
            return -1.0 + 0.0j
        if label == "upper":
            return 1.0 + 0.0j
        raise InvalidInput(f"initial band label must be 'lower' or 'upper', got {initial!r}")
    s = initial.c_plus + initial.c_minus
    if s == 0:
        raise InvalidInput("coefficient ratio undefined: c_plus + c_minus = 0")
    return (initial.c_plus - initial.c_minus) / s


def adiabatic_b_exact(inp: AdiabaticFrameInput, t: float) -> complex:
    """Closed-form b(t) for the frozen-coefficient adiabatic-frame system."""
    de = inp.delta_e0
    de3 = de**3
    dep = de * 1j * cmath.sqrt(-inp.vartheta**2 - 4.0 * de**6) / (2.0 * de3)
    ratio = dep / de
    x = inp.vartheta / (2.0 * de3)
    tn = cmath.tan(dep * t)
    if not (math.isfinite(tn.real) and math.isfinite(tn.imag)):
        # Pole of the tangent: both terms are dominated by tn; take the limit.
        den = inp.b0 * (1.0 + 1j * x)
        if abs(den) < 1e-12:
            raise PoleEncountered(f"b(t) diverges at t = {t}")
        return (1.0 - 1j * x) / den
    num = inp.b0 * ratio - 1j * (1.0 - 1j * x) * tn
    den = ratio - 1j * inp.b0 * (1.0 + 1j * x) * tn
    if abs(den) < 1e-12:
        raise PoleEncountered(f"b(t) diverges at t = {t}")
    return num / den


def adiabatic_b_approx(inp: AdiabaticFrameInput, t: float) -> complex:
    """Leading-order b(t): damping-driven hyperbolic drift with a small phase.

    Valid when the parameter speed is small against the cubed splitting;
    the direction of the velocity is dropped (only its magnitude enters)
    and the real part of the splitting is neglected.
    """
    y = inp.delta_e0.imag
    if y == 0.0:
        raise NoDamping("Im(delta_e0) = 0: no damping asymmetry, no transition mechanism")
    n0 = cmath.exp(1j * math.atan(inp.speed / (2.0 * abs(inp.delta_e0) ** 3)))
    th = math.tanh(y * t)
    den = 1.0 + inp.b0 * th * n0
    if abs(den) < 1e-12:
        raise PoleEncountered(f"b(t) diverges at t = {t}")
    return (inp.b0 + th / n0) / den


def predict_nat_radius(
    origin: ControlPoint,
    b0: complex,
    speed: float,
    kappa: float = 1.0,
) -> NatPrediction:
    """Predicted arc-length radius at which Re(b) first crosses zero.

    Requires a lossy origin (positive imaginary band splitting) and returns
    the root of the quadratic in tanh arising from the leading-order b(t);
    when no root lies in (0, 1) the drift never reaches the crossing and
    `NoTransition` is raised (this includes the zero-speed limit, where the
    radius diverges).
    """
    if not (speed > 0 and math.isfinite(speed)):
        raise InvalidInput(f"speed must be positive and finite, got {speed!r}")
    a = kappa * complex(-origin.q, origin.g)
    delta_e = cmath.sqrt(1.0 + a * a)
    if delta_e.real < 0 or (delta_e.real == 0 and delta_e.imag < 0):
        delta_e = -delta_e
    y = delta_e.imag
    if y <= 0.0:
        raise NoTransition(f"Im(delta_e) = {y:.3e} at {origin}: not in the lossy regime")

    v = kappa * speed
    xi = 1.0 + abs(b0) ** 2
    n0 = cmath.exp(1j * math.atan(v / (2.0 * abs(delta_e) ** 3)))
    quad = (b0 * n0 * n0).real
    lin = xi
    const = b0.real

    candidates: list[float] = []
    if abs(quad) < 1e-300:
        candidates.append(-const / lin)
    else:
        disc = lin * lin - 4.0 * quad * const
        if disc < 0.0:
            raise NoTransition("no real root: Re(b) never crosses zero")
        sq = math.sqrt(disc)
        candidates.extend(((-lin + sq) / (2.0 * quad), (-lin - sq) / (2.0 * quad)))
    valid = sorted(tau for tau in candidates if 0.0 < tau < 1.0)
    if not valid:
        raise NoTransition(f"no tanh root in (0, 1), candidates {candidates}")
    tau = valid[0]
    t_occur = math.atanh(tau) / y
    return NatPrediction(
        radius=speed * t_occur, xi=xi, n0=n0, tau_root=tau, t_occur=t_occur
    )


def first_sign_flip(
    arc_lengths: np.ndarray,
    band_index: np.ndarray,
    hysteresis: float = DEFAULT_HYSTERESIS,
) -> float:
    """Arc length of the first negative-to-positive flip of the band index.

    The flip must be confirmed: the series has to have dipped below
    ``-hysteresis`` before, and reach ``+hysteresis`` after, the crossing.
    The location is linearly interpolated between the bracketing samples;
    NaN samples (degenerate instants) are skipped.  Returns NaN without a
    confirmed flip.
    """
    armed = False
    prev_arc = prev_val = None
    pending: float | None = None
    for arc, val in zip(arc_lengths, band_index):
        if not math.isfinite(val):
            continue
        if pending is not None:
            if val >= hysteresis:
                return pending
            if val <= -hysteresis:
                pending = None  # relapsed below the band: not a flip
        if pending is None:
            if val <= -hysteresis:
                armed = True
            elif armed and prev_val is not None and prev_val < 0.0 <= val:
                pending = prev_arc + (0.0 - prev_val) / (val - prev_val) * (arc - prev_arc)
                if val >= hysteresis:
                    return pending
        prev_arc, prev_val = arc, val
    return float("nan")


def _scan_ray(payload) -> tuple[float, np.ndarray, np.ndarray]:
    (oq, og, angle, speed, max_arc, initial, kappa, dt, min_samples, ep_tol) = payload
    path = standard_path("ray", speed=speed, origin=(oq, og), angle=angle, max_len=max_arc)
    n_steps = max(1, math.ceil(path.total_time / dt))
    stride = max(1, n_steps // min_samples)
    traj = evolve(
        path,
        initial,
        kappa=kappa,
        dt=dt,
        sample_stride=stride,
        ep_tolerance=ep_tol,
    )
    arcs = np.array([s.t * speed for s in traj.samples])
    bands = np.array([s.band_index for s in traj.samples])
    return angle, arcs, bands


def point_source_diagram(
    origin: ControlPoint,
    initial: str | BandCoefficients,
    speed: float,
    n_rays: int = 360,
    max_arc: float = 2.0,
    *,
    kappa: float = 1.0,
    dt: float = DEFAULT_DT,
    min_samples: int = DEFAULT_RAY_SAMPLES,
    hysteresis: float = DEFAULT_HYSTERESIS,
    workers: int = 1,
    ep_tolerance: float = EP_TOLERANCE,
) -> PointSourceField:
    """Evolve outward along uniformly spaced rays and locate the flip front."""
    if n_rays < 4:
        raise InvalidInput(f"need at least 4 rays, got {n_rays}")
    if not max_arc > 0:
        raise InvalidInput(f"max_arc must be positive, got {max_arc!r}")
    eigensystem(origin, kappa, ep_tolerance)  # EP origin rejected up front
    angles = [2.0 * math.pi * k / n_rays for k in range(n_rays)]
    payloads = [
        (origin.q, origin.g, ang, speed, max_arc, initial, kappa, dt, min_samples, ep_tolerance)
        for ang in angles
    ]
    results = _parallel_map(_scan_ray, payloads, workers)
    rays = tuple(RayScan(angle=a, arc_lengths=arcs, band_index=bands) for a, arcs, bands in results)
    front = tuple((r.angle, first_sign_flip(r.arc_lengths, r.band_index, hysteresis)) for r in rays)
    return PointSourceField(origin=origin, speed=speed, rays=rays, front=front)


def _sweep_one(payload) -> float:
    protocol, speed, initial, kappa, dt, ep_tol = payload
    path = path_from_config(protocol, speed)
    traj = evolve(path, initial, kappa=kappa, dt=dt, sample_stride=None, ep_tolerance=ep_tol)
    return traj.final_band_index


def speed_sweep(
    protocol: dict,
    speeds,
    initial: str | BandCoefficients = "lower",
    *,
    kappa: float = 1.0,
    dt: float = DEFAULT_DT,
    workers: int = 1,
    ep_tolerance: float = EP_TOLERANCE,
) -> list[tuple[float, float]]:
    """Final band index of one protocol traversed at each of the given speeds."""
    speeds = [float(v) for v in speeds]
    if not speeds:
        raise InvalidInput("speeds must be non-empty")
    if any(not (v > 0 and math.isfinite(v)) for v in speeds):
        raise InvalidInput("all speeds must be positive and finite")
    payloads = [(protocol, v, initial, kappa, dt, ep_tolerance) for v in speeds]
    finals = _parallel_map(_sweep_one, payloads, workers)
    return list(zip(speeds, finals))


def _phase_cell(payload) -> float:
    x_m, h, speed, direction, kappa, dt, ep_tol = payload
    path = standard_path("spike", direction, speed, h=h, x_m=x_m)
    traj = evolve(path, "lower", kappa=kappa, dt=dt, sample_stride=None, ep_tolerance=ep_tol)
    return traj.final_band_index


def boundary_contrast(
    x_m: float,
    h_lo: float,
    h_hi: float,
    speed: float,
    *,
    kappa: float = 1.0,
    tol: float = 1e-3,
) -> float:
    """Contrast h at which the predicted radius from (x_m, h) equals h.

    Solved by bisection of ``radius(h) - h`` over [h_lo, h_hi]; NaN when the
    bracket does not straddle a sign change (the spike either always or
    never completes within this range).
    """

    def excess(h: float) -> float:
        try:
            return predict_nat_radius(ControlPoint(x_m, h), -1.0 + 0.0j, speed, kappa).radius - h
        except NoTransition:
            return math.inf

    f_lo, f_hi = excess(h_lo), excess(h_hi)
    if not (f_lo > 0.0 > f_hi or f_lo < 0.0 < f_hi):
        return float("nan")
    lo, hi = h_lo, h_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def protocol_phase_diagram(
    xm_grid,
    h_grid,
    speed: float,
    direction: str = "ccw",
    *,
    kappa: float = 1.0,
    dt: float = DEFAULT_DT,
    workers: int = 1,
    boundary_tol: float = 1e-3,
    ep_tolerance: float = EP_TOLERANCE,
) -> PhaseDiagram:
    """Simulate the spike protocol over an (x_m, h) grid and predict the boundary."""
    xm = np.asarray([float(x) for x in xm_grid])
    hs = np.asarray([float(h) for h in h_grid])
    if xm.size == 0 or hs.size == 0:
        raise InvalidInput("grids must be non-empty")
    if np.any(xm >= 0.0) or np.any(xm < -1.0):
        raise InvalidInput("spike positions must lie in [-1, 0)")
    if np.any(hs <= 0.0):
        raise InvalidInput("contrast values must be positive")

    payloads = [
        (float(x), float(h), speed, direction, kappa, dt, ep_tolerance) for x in xm for h in hs
    ]
    flat = _parallel_map(_phase_cell, payloads, workers)
    grid = np.array(flat).reshape(xm.size, hs.size)
    boundary = tuple(
        (float(x), boundary_contrast(float(x), float(hs[0]), float(hs[-1]), speed, kappa=kappa, tol=boundary_tol))
        for x in xm
    )
    return PhaseDiagram(
        xm_grid=xm,
        h_grid=hs,
        band_index_final=grid,
        boundary=boundary,
        speed=speed,
        direction=direction,
    )


def _parallel_map(fn, payloads, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads, chunksize=max(1, len(payloads) // (4 * workers))))
