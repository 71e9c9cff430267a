"""Driving and interaction parameters: Rabi algebra and blockade radii.

Unit conventions, applied everywhere in the package:

* Boundary values (constructor arguments ending in ``_hz``, config files,
  quoted experimental numbers) are ordinary frequencies in Hz, i.e. the
  omega/2pi a lab would report.
* Internal attributes and all formulas are angular frequencies in rad/s.
* The van der Waals coefficient is stored as a positive magnitude in
  J m^6; the interaction is treated as repulsive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import BOHR_RADIUS, HARTREE, HBAR, TWO_PI
from .errors import InvalidParameterError

__all__ = [
    "TwoPhotonDrive",
    "PhysicalParams",
    "angular_from_hz",
    "hz_from_angular",
    "two_photon_rabi",
    "convert_c6_atomic_units",
    "blockade_radius_simple",
    "blockade_radius_collective",
]


def angular_from_hz(f: float) -> float:
    """Convert an ordinary frequency in Hz to rad/s."""
    return TWO_PI * f


def hz_from_angular(omega: float) -> float:
    """Convert an angular frequency in rad/s to Hz."""
    return omega / TWO_PI


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidParameterError(message)


@dataclass(frozen=True)
class TwoPhotonDrive:
    """Parameters of a two-step drive through a far-detuned intermediate level.

    Attributes are angular (rad/s): ``omega1`` and ``omega2`` are the single
    photon Rabi frequencies of the two legs, ``delta`` the detuning from the
    intermediate level. Use :meth:`from_hz` with lab values.
    """

    omega1: float
    omega2: float
    delta: float

    def __post_init__(self) -> None:
        _require(self.omega1 >= 0.0, "omega1 must be non-negative")
        _require(self.omega2 >= 0.0, "omega2 must be non-negative")
        _require(self.delta != 0.0, "intermediate-state detuning must be nonzero")

    @classmethod
    def from_hz(cls, omega1_hz: float, omega2_hz: float, delta_hz: float) -> "TwoPhotonDrive":
        return cls(
            omega1=angular_from_hz(omega1_hz),
            omega2=angular_from_hz(omega2_hz),
            delta=angular_from_hz(delta_hz),
        )


def two_photon_rabi(drive: TwoPhotonDrive) -> float:
    """Effective two-photon Rabi frequency omega1*omega2/(2*delta), in rad/s.

    Valid in the adiabatic-elimination regime delta >> omega1, omega2. The
    sign follows delta; magnitude is what matters downstream.
    """
    return drive.omega1 * drive.omega2 / (2.0 * drive.delta)


def convert_c6_atomic_units(c6_au: float) -> float:
    """Convert a van der Waals coefficient from atomic units to J m^6.

    One atomic unit of C6 is E_h * a_0^6. The sign of the input is dropped:
    the package models the repulsive case and stores magnitudes. Zero is
    rejected because a vanishing C6 makes the blockade radii meaningless
    (non-interacting problems set c6=0 on the Hamiltonian directly).
    """
    if c6_au == 0.0:
        raise InvalidParameterError("C6 must be nonzero")
    return abs(c6_au) * HARTREE * BOHR_RADIUS**6


@dataclass(frozen=True)
class PhysicalParams:
    """Drive and interaction parameters of a blockade problem.

    omega0
        Ground-Rydberg Rabi frequency of a single atom, rad/s.
    c6
        Van der Waals coefficient magnitude, J m^6.
    gamma_dephase
        Phenomenological damping rate of superatom oscillations, 1/s.
    kappa
        Dimensionless prefactor on the blockade radii (packing fudge
        factor; scales both radius formulas linearly). Default 1.
    """

    omega0: float
    c6: float
    gamma_dephase: float = 0.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        _require(self.omega0 > 0.0, "omega0 must be positive")
        _require(self.c6 > 0.0, "c6 must be positive")
        _require(self.gamma_dephase >= 0.0, "gamma_dephase must be non-negative")
        _require(self.kappa > 0.0, "kappa must be positive")

    @classmethod
    def from_hz(
        cls,
        omega0_hz: float,
        c6: float,
        gamma_dephase: float = 0.0,
        kappa: float = 1.0,
    ) -> "PhysicalParams":
        """Build from an ordinary frequency in Hz; c6 already in J m^6."""
        return cls(
            omega0=angular_from_hz(omega0_hz),
            c6=c6,
            gamma_dephase=gamma_dephase,
            kappa=kappa,
        )


def blockade_radius_simple(params: PhysicalParams) -> float:
    """Distance at which the pair interaction equals the single-atom drive.

    r_b = kappa * (C6 / (hbar * omega0))**(1/6). Inside r_b a second
    excitation is shifted out of resonance by more than the linewidth of
    the drive, so a sphere of this radius hosts at most one excitation.
    """
    return params.kappa * (params.c6 / (HBAR * params.omega0)) ** (1.0 / 6.0)


def blockade_radius_collective(
    params: PhysicalParams, local_density: float
) -> tuple[float, float]:
    """Self-consistent blockade radius when the drive is collectively enhanced.

    The sqrt(N) enhancement of the Rabi frequency inside a blockade sphere
    enlarges the effective linewidth, which in turn grows the sphere. With
    N = n * (4pi/3) * r**3 the fixed point of

        C6 / r**6 = hbar * sqrt(N) * omega0

    has the closed form

        r = kappa * (C6 / (hbar*omega0))**(2/15) * (4pi*n/3)**(-1/15)

    Returns ``(radius, n_per)`` where ``n_per`` is the atom count of the
    resulting sphere at the given density. At kappa=1 the pair satisfies
    the fixed-point relation to machine precision; kappa scales the radius
    linearly on top of it.
    """
    _require(local_density > 0.0, "local density must be positive")
    x = params.c6 / (HBAR * params.omega0)
    shell = 4.0 * math.pi / 3.0 * local_density
    radius = params.kappa * x ** (2.0 / 15.0) * shell ** (-1.0 / 15.0)
    n_per = local_density * (4.0 * math.pi / 3.0) * radius**3
    return radius, n_per
