"""
Inverted pendulum on a cart.

Two forms of the pole dynamics are available:

- ``PlantForm.LITERAL`` has a negative gravity term and (M + m) inside the
  inertia factor, so the upright point is stable at u = 0.
- ``PlantForm.STANDARD`` is the usual cart-pole model, whose upright point
  is unstable.

The cart position and velocity are carried passively; only the pole is
integrated.
"""

from __future__ import annotations

import enum
import math

from attrs import field, frozen, validators

from src.fuzzytune.errors import DegenerateDynamics, NonFiniteState


DENOMINATOR_FLOOR = 1e-12


class PlantForm(enum.Enum):
    LITERAL = "literal"
    STANDARD = "standard"


@frozen
class PlantParams:
    """Physical constants of the cart-pole.

    ``input_sign`` maps the controller command onto the force of the
    dynamics; with the default -1 a positive command rights a pole tilted
    towards positive θ.
    """

    M: float = field(default=1.0, converter=float, validator=validators.gt(0.0))
    m: float = field(default=0.1, converter=float, validator=validators.gt(0.0))
    l: float = field(default=0.5, converter=float, validator=validators.gt(0.0))
    g: float = field(default=9.8, converter=float, validator=validators.gt(0.0))
    b: float = field(default=0.0, converter=float)
    form: PlantForm = field(default=PlantForm.STANDARD, converter=PlantForm)
    input_sign: float = field(default=-1.0, converter=float, validator=validators.in_((-1.0, 1.0)))


@frozen
class PlantState:
    theta: float = 0.0
    theta_dot: float = 0.0
    x: float = 0.0
    x_dot: float = 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.theta, self.theta_dot, self.x, self.x_dot))


# --------------------------------------------------
# Dynamics
# --------------------------------------------------
def _accel(theta: float, theta_dot: float, x_dot: float, u: float, params: PlantParams) -> float:
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    total_mass = params.M + params.m

    if params.form is PlantForm.LITERAL:
        numerator = (
            -u * cos_t
            + params.b * cos_t * x_dot
            - params.m * params.l * theta_dot**2 * sin_t
            - total_mass * params.g * sin_t
        )
        denominator = params.l * (4.0 / (3.0 * total_mass) - params.m * cos_t**2)
    else:
        numerator = params.g * sin_t + cos_t * (
            -u - params.m * params.l * theta_dot**2 * sin_t
        ) / total_mass
        denominator = params.l * (4.0 / 3.0 - params.m * cos_t**2 / total_mass)

    if abs(denominator) < DENOMINATOR_FLOOR:
        raise DegenerateDynamics(
            f"angular acceleration denominator {denominator!r} at theta={theta!r}"
        )
    return numerator / denominator


def angular_accel(state: PlantState, u: float, params: PlantParams) -> float:
    """Pole angular acceleration (rad/s²) for force u in the selected form."""
    return _accel(state.theta, state.theta_dot, state.x_dot, u, params)


def step_rk4(state: PlantState, u: float, dt: float, params: PlantParams) -> PlantState:
    """Advance (θ, θ̇) by one classical RK4 step with u held over the step.

    The cart velocity is held constant and its position advanced by x_dot * dt.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")

    theta, omega, x_dot = state.theta, state.theta_dot, state.x_dot
    half = 0.5 * dt

    k1_theta = omega
    k1_omega = _accel(theta, omega, x_dot, u, params)

    k2_theta = omega + half * k1_omega
    k2_omega = _accel(theta + half * k1_theta, k2_theta, x_dot, u, params)

    k3_theta = omega + half * k2_omega
    k3_omega = _accel(theta + half * k2_theta, k3_theta, x_dot, u, params)

    k4_theta = omega + dt * k3_omega
    k4_omega = _accel(theta + dt * k3_theta, k4_theta, x_dot, u, params)

    sixth = dt / 6.0
    new = PlantState(
        theta=theta + sixth * (k1_theta + 2.0 * k2_theta + 2.0 * k3_theta + k4_theta),
        theta_dot=omega + sixth * (k1_omega + 2.0 * k2_omega + 2.0 * k3_omega + k4_omega),
        x=state.x + dt * x_dot,
        x_dot=x_dot,
    )
    if not new.is_finite():
        raise NonFiniteState(f"non-finite plant state after step: {new!r}")
    return new
