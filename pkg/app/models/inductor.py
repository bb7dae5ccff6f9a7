"""
Inductor Model

This module defines the InductorSpec, the electrical and geometric constants
of the coil whose switching transient generates the synchronisation signal.
All quantities are SI: henry, ohm, meter, volt, tesla, seconds.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

from app.core.errors import PhysicsError, ReasonCode

MU_0 = 4e-7 * math.pi  # magnetic field constant, H/m


@dataclass(frozen=True)
class InductorSpec:
    """
    Electrical/geometric constants of one drive inductor.

    N and l only set the flux scale at the coil; the estimator depends on the
    time constant and on flux ratios alone.
    """

    inductance: float  # L, henry
    resistance: float  # R, ohm
    windings: int = 1000  # N
    length: float = 9e-3  # l, meter
    permeability: float = MU_0  # mu, H/m
    supply_voltage: float = 5.0  # V, volt

    def __post_init__(self) -> None:
        checks = {
            "inductance": self.inductance > 0,
            "resistance": self.resistance > 0,
            "windings": self.windings >= 1,
            "length": self.length > 0,
            "permeability": self.permeability > 0,
            "supply_voltage": self.supply_voltage > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise PhysicsError(
                    f"Inductor {name} must be positive, got {getattr(self, name)!r}",
                    reason=ReasonCode.INVALID_INDUCTOR,
                    context={"field": name},
                )

    @classmethod
    def default(cls) -> "InductorSpec":
        """The 82 mH / 212 Ω coil on a 5 V supply."""
        return cls(inductance=82e-3, resistance=212.0)

    @property
    def tau(self) -> float:
        """Time constant L/R in seconds."""
        return self.inductance / self.resistance

    @property
    def current(self) -> float:
        """Steady-state current V/R in ampere."""
        return self.supply_voltage / self.resistance

    @property
    def b_sat(self) -> float:
        """Steady-state flux density mu·N·I/l in tesla."""
        return self.permeability * self.windings * self.current / self.length

    def scaled_supply(self, factor: float) -> "InductorSpec":
        """Return a copy with the supply voltage multiplied by factor."""
        return InductorSpec(
            inductance=self.inductance,
            resistance=self.resistance,
            windings=self.windings,
            length=self.length,
            permeability=self.permeability,
            supply_voltage=self.supply_voltage * factor,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Serialize using the scenario-file keys."""
        return {
            "L": self.inductance,
            "R": self.resistance,
            "N": self.windings,
            "l": self.length,
            "mu": self.permeability,
            "V": self.supply_voltage,
        }
