"""Numeric constants of the arrival/control model and the integration scheme."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    Defaults for the kinematic and control terms are the conventional values
    of the Spearman-style pitch-control model; disc speed, hold thresholds and
    grid resolution are choices of this package. Everything is overridable.
    """

    reaction_time: float = 0.7  # s
    max_speed: float = 5.0  # m/s
    sigma_arrival: float = 0.45  # s
    lambda_control: float = 4.3  # 1/s
    disc_speed: float = 15.0  # m/s
    dt: float = 0.04  # s
    horizon: float = 10.0  # s
    epsilon_converge: float = 0.01
    marker_exclusion_radius: float = 3.0  # m
    hold_radius: float = 1.0  # m
    hold_speed: float = 2.0  # m/s
    grid_cell: float = 0.5  # m
    fps: float = 30.0  # Hz

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"{f.name} must be strictly positive, got {value}")
        if self.epsilon_converge > 0.1:
            raise ValueError(f"epsilon_converge must be in (0, 0.1], got {self.epsilon_converge}")

    @property
    def max_clamped_speed(self) -> float:
        return 1.5 * self.max_speed


PARAM_NAMES = tuple(f.name for f in fields(ModelParams))
