"""Two-band model of a lossy spin-orbit-coupled atom.

The normalized Hamiltonian at a control point ``(q, g)`` is

    H = [[kappa * (-q + i*g), 1],
         [1,                  kappa * (q - i*g)]]

where ``q`` is the quasimomentum parameter, ``g`` the loss contrast between
the two spin states, and ``kappa`` the ratio of recoil energy scale to half
the Raman coupling.  Energies are in units of half the Raman coupling and
time is dimensionless.  Because ``H(q, g, kappa) == H(kappa*q, kappa*g, 1)``
entry by entry, every closed form below is written for ``kappa = 1`` and
general ``kappa`` is handled by rescaling the coordinates first.

Conventions fixed here and relied on everywhere else:

* Branch:  ``delta_e = sqrt(1 + (-q + i*g)**2)`` is the principal square
  root, so ``Re(delta_e) >= 0``; on the branch cut (``Re == 0``) the sign is
  chosen so ``Im(delta_e) >= 0``.  The bands are ``E_pm = +/- delta_e``.
* Phase:   with ``theta = atan(delta_e - q + i*g)`` the right eigenvectors
  are ``psi_plus = [sin(theta), cos(theta)] / N`` and
  ``psi_minus = [-cos(theta), sin(theta)] / N`` (shared Euclidean norm N),
  which makes ``psi_plus == J @ psi_minus`` with ``J = [[0, 1], [-1, 0]]``.
* Left eigenvectors carry the compensating factor N so that
  ``<phi_i|psi_j> = delta_ij`` holds exactly alongside unit-norm right
  eigenvectors; coefficient extraction is then a plain inner product.

The exceptional point sits at ``(q, g) = (0, 1/kappa)`` where
``delta_e = 0``; within ``ep_tolerance`` of it the eigensystem is refused
(`EpDegenerate`) because the biorthogonal normalization blows up.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from .errors import EpDegenerate, InvalidInput

#: Below this |delta_e| the eigensystem is treated as degenerate.
EP_TOLERANCE = 1e-9

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInput(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ControlPoint:
    """A point in the (quasimomentum, loss-contrast) control plane."""

    q: float
    g: float

    def __post_init__(self) -> None:
        _require_finite("control point", self.q, self.g)


@dataclass(frozen=True)
class Hamiltonian2:
    """The 2x2 non-Hermitian Hamiltonian at one control point.

    Entries are in units of half the Raman coupling; the matrix is traceless
    with unit off-diagonal coupling.
    """

    h11: complex
    h12: complex
    h21: complex
    h22: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]])


@dataclass
class TwoState:
    """Two-component spinor state plus the log of discarded norm factors.

    ``log_norm`` accumulates ``ln`` of every factor divided out during
    renormalization, so the raw (unrenormalized) state is recoverable as
    ``exp(log_norm) * (up, down)`` without overflow of the stored amplitudes.
    """

    up: complex
    down: complex
    log_norm: float = 0.0

    def __post_init__(self) -> None:
        if self.up == 0 and self.down == 0:
            raise InvalidInput("state must not be the zero vector")

    def norm(self) -> float:
        return math.sqrt(abs(self.up) ** 2 + abs(self.down) ** 2)

    def normalized(self) -> "TwoState":
        n = self.norm()
        return TwoState(self.up / n, self.down / n, self.log_norm + math.log(n))

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down])


@dataclass(frozen=True)
class Eigensystem:
    """Eigenvalues and biorthonormal eigenvectors at one control point.

    ``psi_plus``/``psi_minus`` have unit Euclidean norm; ``phi_plus``/
    ``phi_minus`` are scaled so that ``vdot(phi_i, psi_j) = delta_ij``.
    """

    delta_e: complex
    e_plus: complex
    e_minus: complex
    theta: complex
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental parameters in SI units.

    ``lambda_raman``: Raman wavelength (m); ``alpha``: beam intersection
    angle (rad); ``omega_r``: Raman coupling as an energy (J);
    ``delta_detune``: two-photon detuning (J); ``gamma_up``/``gamma_down``:
    spin-resolved loss rates expressed as energies (J); ``qx_phys``:
    quasimomentum (1/m); ``mass``: atomic mass (kg).
    """

    lambda_raman: float
    alpha: float
    omega_r: float
    delta_detune: float
    gamma_up: float
    gamma_down: float
    qx_phys: float
    mass: float

    def __post_init__(self) -> None:
        _require_finite(
            "physical params",
            self.lambda_raman,
            self.alpha,
            self.omega_r,
            self.delta_detune,
            self.gamma_up,
            self.gamma_down,
            self.qx_phys,
            self.mass,
        )
        if self.lambda_raman <= 0 or self.omega_r <= 0 or self.mass <= 0:
            raise InvalidInput("lambda_raman, omega_r and mass must be positive")

    @property
    def k_r(self) -> float:
        """Recoil momentum wavenumber (1/m)."""
        return (2.0 * math.pi / self.lambda_raman) * math.sin(self.alpha / 2.0)

    @property
    def recoil_energy(self) -> float:
        """Recoil energy (J)."""
        return (hbar * self.k_r) ** 2 / (2.0 * self.mass)


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless control parameters plus the physical duration of one time unit.

    ``time_scale`` converts normalized time back to seconds:
    ``t_seconds = t_normalized * time_scale``.  The overall gauge shift that
    recenters the bands (real part) and removes the mean loss (imaginary
    part) is pure bookkeeping and does not appear in any observable computed
    here.
    """

    q: float
    g: float
    kappa: float
    time_scale: float

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise InvalidInput("kappa must be positive")


def build_hamiltonian(p: ControlPoint, kappa: float = 1.0) -> Hamiltonian2:
    """Assemble the traceless 2x2 Hamiltonian at a control point."""
    _require_finite("kappa", kappa)
    if kappa <= 0:
        raise InvalidInput("kappa must be positive")
    h11 = kappa * complex(-p.q, p.g)
    return Hamiltonian2(h11=h11, h12=1.0 + 0.0j, h21=1.0 + 0.0j, h22=-h11)


def _branch_sqrt(z: complex) -> complex:
    """Principal square root with the Re >= 0, tie-break Im >= 0 convention."""
    w = cmath.sqrt(z)
    if w.real < 0 or (w.real == 0 and w.imag < 0):
        w = -w
    return w


def eigensystem(
    p: ControlPoint, kappa: float = 1.0, ep_tolerance: float = EP_TOLERANCE
) -> Eigensystem:
    """Solve the two-band eigenproblem with fixed branch and phase conventions.

    Raises `EpDegenerate` when ``|delta_e| <= ep_tolerance``: the two
    eigenvectors coalesce there and no biorthonormal pair exists.
    """
    if kappa != 1.0:
        if kappa <= 0 or not math.isfinite(kappa):
            raise InvalidInput("kappa must be positive and finite")
        p = ControlPoint(kappa * p.q, kappa * p.g)

    a = complex(-p.q, p.g)
    delta_e = _branch_sqrt(1.0 + a * a)
    if abs(delta_e) <= ep_tolerance:
        raise EpDegenerate(
            f"|delta_e| = {abs(delta_e):.3e} at (q={p.q}, g={p.g}): eigenvectors coalesce"
        )

    theta = cmath.atan(delta_e + a)
    s = cmath.sin(theta)
    c = cmath.cos(theta)
    norm = math.sqrt(abs(s) ** 2 + abs(c) ** 2)
    su, cu = s / norm, c / norm
    psi_plus = np.array([su, cu])
    psi_minus = np.array([-cu, su])
    # Left eigenvectors: conjugate entries, scaled by the norm that was
    # divided out of psi so that <phi_i|psi_j> stays exactly delta_ij.
    phi_plus = np.array([s.conjugate() * norm, c.conjugate() * norm])
    phi_minus = np.array([-c.conjugate() * norm, s.conjugate() * norm])
    return Eigensystem(
        delta_e=delta_e,
        e_plus=delta_e,
        e_minus=-delta_e,
        theta=theta,
        psi_plus=psi_plus,
        psi_minus=psi_minus,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
    )


def spin_polarization(state: TwoState | np.ndarray) -> float:
    """Population imbalance (up - down) / (up + down), in [-1, 1].

    Invariant under rescaling of the state by any nonzero complex factor.
    """
    if isinstance(state, TwoState):
        up, down = state.up, state.down
    else:
        up, down = complex(state[0]), complex(state[1])
    wu = up.real * up.real + up.imag * up.imag
    wd = down.real * down.real + down.imag * down.imag
    total = wu + wd
    if total == 0.0:
        raise InvalidInput("spin polarization of the zero state is undefined")
    return (wu - wd) / total


def physical_to_normalized(p: PhysicalParams) -> NormalizedParams:
    """Convert SI experimental parameters to the dimensionless control parameters."""
    e_r = p.recoil_energy
    q = 2.0 * p.qx_phys / p.k_r - p.delta_detune / (2.0 * e_r)
    g = (p.gamma_down - p.gamma_up) / (4.0 * e_r)
    kappa = 2.0 * e_r / p.omega_r
    time_scale = 2.0 * hbar / p.omega_r
    return NormalizedParams(q=q, g=g, kappa=kappa, time_scale=time_scale)
