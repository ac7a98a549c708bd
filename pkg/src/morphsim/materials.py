"""Material parameters and particle roles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .errors import ConfigError

# Minimum admissible yield threshold: the rest state (unit principal
# stretches) sits at Euclidean norm sqrt(2), so anything below that would
# make undeformed material "yield".
MIN_YIELD = math.sqrt(2.0)


class Role(IntEnum):
    ROBOT = 0
    PASSIVE = 1
    SOIL = 2


@dataclass(frozen=True)
class MaterialParams:
    """Constitutive constants for one particle population.

    ``mu``/``lam`` are the Lamé parameters, ``yield_stress`` is the plastic
    threshold compared against the Euclidean norm of the principal-stretch
    vector (use ``math.inf`` for a purely elastic body), and ``p_mass``/
    ``p_vol`` are the per-particle mass and reference volume.
    """

    mu: float
    lam: float
    yield_stress: float
    p_mass: float = 2.0
    p_vol: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be non-negative, got {self.lam}")
        if not self.yield_stress > 0:
            raise ConfigError(f"yield_stress must be positive, got {self.yield_stress}")
        if math.isfinite(self.yield_stress) and self.yield_stress < MIN_YIELD:
            raise ConfigError(
                f"yield_stress {self.yield_stress} below sqrt(2); the rest state "
                "would already sit outside the yield surface"
            )
        if not self.p_mass > 0 or not self.p_vol > 0:
            raise ConfigError("p_mass and p_vol must be positive")

    @classmethod
    def from_youngs(
        cls,
        youngs_modulus: float,
        poisson_ratio: float,
        yield_stress: float = math.inf,
        p_mass: float = 2.0,
        p_vol: float = 1.0,
    ) -> "MaterialParams":
        """Standard Lamé conversion from (E, nu)."""
        e, nu = youngs_modulus, poisson_ratio
        if not 0 <= nu < 0.5:
            raise ConfigError(f"poisson_ratio must be in [0, 0.5), got {nu}")
        mu = e / (2.0 * (1.0 + nu))
        lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return cls(mu=mu, lam=lam, yield_stress=yield_stress, p_mass=p_mass, p_vol=p_vol)
