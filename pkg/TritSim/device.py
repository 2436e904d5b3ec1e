"""
device.py

CNFET device model used by the switch-level solver.

The tube diameter follows from the chirality vector (n, m):

    D = a * sqrt(3) / pi * sqrt(n^2 + m^2 + n*m) ~= 0.0783 * sqrt(n^2 + m^2 + n*m)   [nm]

with a = 0.142 nm the carbon-carbon bond length. The threshold voltage is the
half band gap over the electron charge,

    Vth = sqrt(3) / 3 * a * V_pi / (e * D) ~= 0.436 / D   [V]

with V_pi = 3.033 eV the carbon pi-pi bond energy. A tube is metallic when
(n - m) is a multiple of three and cannot be used as a channel.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

CC_BOND_LENGTH_NM = 0.142
PI_BOND_ENERGY_EV = 3.033

DIAMETER_COEFF_NM = 0.0783
THRESHOLD_COEFF_V_NM = 0.436

# The two tubes of the standard cells
HIGH_VTH_CHIRALITY = (10, 0)
LOW_VTH_CHIRALITY = (19, 0)


class DeviceError(ValueError):
    pass


class DeviceKind(str, Enum):
    P = "P"
    N = "N"


@dataclass(frozen=True)
class Chirality:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise DeviceError(f"chirality indices must be non-negative: ({self.n},{self.m})")
        if self.n == 0 and self.m == 0:
            raise DeviceError("chirality (0,0) does not describe a tube")
        if self.n < self.m:
            raise DeviceError(f"chirality must be canonical (n >= m): ({self.n},{self.m})")

    @property
    def diameter(self) -> float:
        return cnt_diameter(self)

    @property
    def metallic(self) -> bool:
        return cnt_is_metallic(self)

    def __str__(self):
        return f"({self.n},{self.m})"


@dataclass(frozen=True)
class DiameterPerturbation:
    sigma_fraction: float
    truncation: float = 3.0

    def __post_init__(self):
        if self.sigma_fraction < 0:
            raise DeviceError(f"sigma fraction must be >= 0, got {self.sigma_fraction}")
        if self.truncation <= 0:
            raise DeviceError(f"truncation must be > 0, got {self.truncation}")


@dataclass(frozen=True)
class CnfetParams:
    """A device as the solver sees it: polarity, tube, diameter and |Vth|."""

    kind: DeviceKind
    chirality: Chirality
    diameter: float
    vth: float

    @classmethod
    def nominal(cls, kind, chirality: Chirality) -> "CnfetParams":
        diameter = cnt_diameter(chirality)
        return cls(DeviceKind(kind), chirality, diameter, cnfet_threshold(diameter))

    def with_diameter(self, diameter: float) -> "CnfetParams":
        return replace(self, diameter=diameter, vth=cnfet_threshold(diameter))


def cnt_diameter(c: Chirality) -> float:
    """Tube diameter in nm."""
    return DIAMETER_COEFF_NM * math.sqrt(c.n ** 2 + c.m ** 2 + c.n * c.m)


def cnt_is_metallic(c: Chirality) -> bool:
    return (c.n - c.m) % 3 == 0


def cnfet_threshold(diameter: float) -> float:
    """Threshold voltage magnitude in V for a tube diameter in nm."""
    if diameter <= 0:
        raise DeviceError(f"diameter must be positive, got {diameter}")
    return THRESHOLD_COEFF_V_NM / diameter


def device_conducts(p: CnfetParams, v_gate: float, v_rail: float) -> bool:
    """
    Switch-level conduction decision.

    Args:
        p: device parameters.
        v_gate: gate voltage.
        v_rail: reference rail of the device's network (GND for N, VDD for P).

    Returns:
        True when the gate overdrive strictly exceeds the threshold.
    """
    if p.kind == DeviceKind.N:
        return v_gate - v_rail > p.vth
    return v_rail - v_gate > p.vth


def perturb_diameter(nominal: float, pert: DiameterPerturbation, random_draw: float) -> float:
    """Scale a nominal diameter by a truncated Gaussian draw."""
    if nominal <= 0:
        raise DeviceError(f"nominal diameter must be positive, got {nominal}")
    draw = max(-pert.truncation, min(pert.truncation, random_draw))
    perturbed = nominal * (1.0 + pert.sigma_fraction * draw)
    if perturbed <= 0:
        raise DeviceError(f"perturbation collapsed diameter {nominal} to {perturbed}")
    return perturbed


def threshold_range(c: Chirality, pert: DiameterPerturbation):
    """(min, max) threshold reachable under the truncated perturbation."""
    low = perturb_diameter(cnt_diameter(c), pert, pert.truncation)
    high = perturb_diameter(cnt_diameter(c), pert, -pert.truncation)
    return cnfet_threshold(low), cnfet_threshold(high)


def zigzag_for_threshold(target_vth: float, max_n: int = 60) -> Chirality:
    """Semiconducting (n,0) tube whose threshold is closest to target_vth."""
    if target_vth <= 0:
        raise DeviceError(f"target threshold must be positive, got {target_vth}")
    candidates = [Chirality(n, 0) for n in range(1, max_n + 1) if n % 3]
    return min(candidates, key=lambda c: abs(cnfet_threshold(cnt_diameter(c)) - target_vth))
