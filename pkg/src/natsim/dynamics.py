"""Time evolution along a control path and band-resolved diagnostics.

The Schrodinger equation ``i d/dt psi = H(q(t), g(t)) psi`` is integrated
with the classical fixed-step fourth-order Runge-Kutta scheme.  Steps are
fitted segment by segment (each segment gets ``ceil(duration / dt)`` equal
steps) so no step ever straddles a corner where the velocity jumps; inside
a segment the Hamiltonian is linear in time and the integrator sees a
smooth right-hand side.  Fixed stepping keeps every sweep reproducible
bit for bit.

The gauged Hamiltonian is traceless, so in the lossy region one component
grows like ``exp(+Im(delta_e) * t)`` and the raw norm would overflow on
long paths.  The state is therefore renormalized after every step and the
discarded log factors accumulate in ``log_norm``; every diagnostic recorded
here is invariant under rescaling of the state, which makes this safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EpDegenerate, InvalidInput
from .model import (
    EP_TOLERANCE,
    ControlPoint,
    Eigensystem,
    TwoState,
    eigensystem,
    spin_polarization,
)
from .paths import Path

_NAN = float("nan")
_CNAN = complex(_NAN, _NAN)

#: Default dimensionless step; |H| stays of order unity over the protocol
#: region, so dt * |H| << 1 with plenty of margin.
DEFAULT_DT = 1e-3

#: Default sampling stride, in integrator steps.
DEFAULT_STRIDE = 10


@dataclass(frozen=True)
class BandCoefficients:
    """Expansion coefficients of a state in the instantaneous biorthogonal basis."""

    c_plus: complex
    c_minus: complex


@dataclass(frozen=True)
class TrajectorySample:
    """State and diagnostics at one instant along a trajectory.

    Samples taken within ``ep_tolerance`` of the exceptional point carry NaN
    in the band-resolved fields (coefficients, energy expectation, band
    index); the state itself is always recorded.
    """

    t: float
    point: ControlPoint
    state: TwoState
    coeffs: BandCoefficients
    exp_e: complex
    band_index: float
    spin: float
    e_plus: complex
    e_minus: complex


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[TrajectorySample, ...]
    path: Path
    step_size: float

    @property
    def final(self) -> TrajectorySample:
        return self.samples[-1]

    @property
    def final_band_index(self) -> float:
        return self.samples[-1].band_index


def project(state: TwoState | np.ndarray, eig: Eigensystem) -> BandCoefficients:
    """Extract band coefficients via the left eigenvectors, c_i = <phi_i|state>."""
    vec = state.as_array() if isinstance(state, TwoState) else np.asarray(state)
    return BandCoefficients(
        c_plus=complex(np.vdot(eig.phi_plus, vec)),
        c_minus=complex(np.vdot(eig.phi_minus, vec)),
    )


def band_observables(coeffs: BandCoefficients, eig: Eigensystem) -> tuple[complex, float]:
    """Complex energy expectation and real band index for given coefficients.

    The expectation weights each band energy by |c_i|^2; the band index is
    the real part of twice the expectation over the band splitting, which
    for a traceless Hamiltonian reduces to the population imbalance
    (|c_plus|^2 - |c_minus|^2) / (|c_plus|^2 + |c_minus|^2).  Both are
    invariant under rescaling of the coefficients.
    """
    wp = abs(coeffs.c_plus) ** 2
    wm = abs(coeffs.c_minus) ** 2
    total = wp + wm
    if total == 0.0:
        raise InvalidInput("band observables of zero coefficients are undefined")
    exp_e = (wp * eig.e_plus + wm * eig.e_minus) / total
    band_index = (2.0 * exp_e / (eig.e_plus - eig.e_minus)).real
    return exp_e, band_index


def _resolve_initial(
    initial: str | BandCoefficients,
    eig0: Eigensystem,
    renormalize: bool,
) -> tuple[complex, complex, float]:
    if isinstance(initial, str):
        label = initial.lower()
        if label == "lower":
            vec = eig0.psi_minus
        elif label == "upper":
            vec = eig0.psi_plus
        else:
            raise InvalidInput(f"initial band label must be 'lower' or 'upper', got {initial!r}")
        return complex(vec[0]), complex(vec[1]), 0.0
    if isinstance(initial, BandCoefficients):
        if initial.c_plus == 0 and initial.c_minus == 0:
            raise InvalidInput("initial coefficients must not both be zero")
        vec = initial.c_plus * eig0.psi_plus + initial.c_minus * eig0.psi_minus
        u, v = complex(vec[0]), complex(vec[1])
        if renormalize:
            n = math.sqrt(abs(u) ** 2 + abs(v) ** 2)
            return u / n, v / n, math.log(n)
        return u, v, 0.0
    raise InvalidInput(f"unsupported initial state spec: {initial!r}")


def _diagnose(
    t: float,
    q: float,
    g: float,
    u: complex,
    v: complex,
    log_norm: float,
    kappa: float,
    ep_tolerance: float,
) -> TrajectorySample:
    point = ControlPoint(q, g)
    state = TwoState(u, v, log_norm)
    spin = spin_polarization(state)
    try:
        eig = eigensystem(point, kappa, ep_tolerance)
    except EpDegenerate:
        return TrajectorySample(
            t=t,
            point=point,
            state=state,
            coeffs=BandCoefficients(_CNAN, _CNAN),
            exp_e=_CNAN,
            band_index=_NAN,
            spin=spin,
            e_plus=_CNAN,
            e_minus=_CNAN,
        )
    coeffs = project(state, eig)
    exp_e, band_index = band_observables(coeffs, eig)
    return TrajectorySample(
        t=t,
        point=point,
        state=state,
        coeffs=coeffs,
        exp_e=exp_e,
        band_index=band_index,
        spin=spin,
        e_plus=eig.e_plus,
        e_minus=eig.e_minus,
    )


def evolve(
    path: Path,
    initial: str | BandCoefficients = "lower",
    *,
    kappa: float = 1.0,
    dt: float = DEFAULT_DT,
    sample_stride: int | None = DEFAULT_STRIDE,
    renormalize: bool = True,
    ep_tolerance: float = EP_TOLERANCE,
) -> Trajectory:
    """Integrate the state along a path and record sampled diagnostics.

    ``initial`` is either a band label ('lower'/'upper', resolved in the
    eigenbasis at the path start) or explicit `BandCoefficients`.
    ``sample_stride`` records every Nth step; ``None`` keeps only the first
    and last instants.  The first and last instants are always sampled.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidInput(f"dt must be positive and finite, got {dt!r}")
    if sample_stride is not None and sample_stride < 1:
        raise InvalidInput(f"sample_stride must be >= 1 or None, got {sample_stride!r}")

    start = path.waypoints[0]
    eig0 = eigensystem(start, kappa, ep_tolerance)
    u, v, log_norm = _resolve_initial(initial, eig0, renormalize)

    raw: list[tuple[float, float, float, complex, complex, float]] = [
        (0.0, start.q, start.g, u, v, log_norm)
    ]

    segments = path.segments
    last_seg = len(segments) - 1
    step_index = 0
    for seg_i, seg in enumerate(segments):
        n = max(1, math.ceil(seg.duration / dt))
        h = seg.duration / n
        q0, g0 = seg.start.q, seg.start.g
        vq, vg = seg.velocity.v_q, seg.velocity.v_g
        h11 = kappa * complex(-q0, g0)
        dh = kappa * complex(-vq, vg)
        half = 0.5 * h
        sixth = h / 6.0
        for j in range(n):
            ha = h11 + dh * (j * h)
            hb = ha + dh * half
            hc = ha + dh * h
            k1u = -1j * (ha * u + v)
            k1v = -1j * (u - ha * v)
            u2 = u + half * k1u
            v2 = v + half * k1v
            k2u = -1j * (hb * u2 + v2)
            k2v = -1j * (u2 - hb * v2)
            u3 = u + half * k2u
            v3 = v + half * k2v
            k3u = -1j * (hb * u3 + v3)
            k3v = -1j * (u3 - hb * v3)
            u4 = u + h * k3u
            v4 = v + h * k3v
            k4u = -1j * (hc * u4 + v4)
            k4v = -1j * (u4 - hc * v4)
            u = u + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if renormalize:
                nrm = math.sqrt(
                    u.real * u.real + u.imag * u.imag + v.real * v.real + v.imag * v.imag
                )
                u /= nrm
                v /= nrm
                log_norm += math.log(nrm)
            step_index += 1
            seg_done = j == n - 1
            is_last = seg_i == last_seg and seg_done
            if is_last or (sample_stride is not None and step_index % sample_stride == 0):
                if seg_done:
                    # Land exactly on the waypoint, free of accumulated rounding.
                    end = path.waypoints[seg_i + 1]
                    raw.append((seg.t0 + seg.duration, end.q, end.g, u, v, log_norm))
                else:
                    tl = (j + 1) * h
                    raw.append((seg.t0 + tl, q0 + vq * tl, g0 + vg * tl, u, v, log_norm))

    samples = tuple(
        _diagnose(t, q, g, su, sv, ln, kappa, ep_tolerance) for t, q, g, su, sv, ln in raw
    )
    return Trajectory(samples=samples, path=path, step_size=dt)
