"""Cart-pole physics with the classic Euler-integrated equations of motion."""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from polecart import ContractViolation

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_LENGTH = 0.5
POLEMASS_LENGTH = MASS_POLE * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02

X_LIMIT = 2.4
THETA_LIMIT = 0.2095
MAX_STEPS = 500
RESET_BOUND = 0.05


class Action(enum.IntEnum):
    LEFT = 0
    RIGHT = 1


class CartState(NamedTuple):
    x: float
    v: float
    theta: float
    omega: float


class StepOutcome(NamedTuple):
    next_state: CartState
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


def is_out_of_bounds(state: CartState) -> bool:
    return abs(state.x) > X_LIMIT or abs(state.theta) > THETA_LIMIT


def reset_state(rng: np.random.Generator) -> CartState:
    u = rng.random(4)
    # u lies in [0, 1); map 0 to just inside the lower bound
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return state_from_uniforms(u)


def state_from_uniforms(u) -> CartState:
    """Affine map of four uniforms on (0, 1) onto (-0.05, 0.05)."""
    x, v, theta, omega = (float(-RESET_BOUND + 2.0 * RESET_BOUND * ui) for ui in u)
    return CartState(x, v, theta, omega)


def step(
    state: CartState,
    action: int,
    t: int,
    reward_on_termination: bool = False,
) -> StepOutcome:
    """Advance one Euler step of length TAU.

    ``t`` is the 1-based number of the step being taken; the episode is
    truncated once ``t + 1 > MAX_STEPS``, so at most 500 steps are run.
    """
    if t > MAX_STEPS or is_out_of_bounds(state):
        raise ContractViolation(f"cannot step a terminal state (t={t}, state={state})")
    if action not in (0, 1):
        raise ContractViolation(f"action must be 0 or 1, got {action!r}")

    x, v, theta, omega = state
    force = FORCE_MAG if action == Action.RIGHT else -FORCE_MAG
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    temp = (force + POLEMASS_LENGTH * omega * omega * sin_t) / TOTAL_MASS
    theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
        HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS)
    )
    x_acc = temp - POLEMASS_LENGTH * theta_acc * cos_t / TOTAL_MASS

    nxt = CartState(
        x + TAU * v,
        v + TAU * x_acc,
        theta + TAU * omega,
        omega + TAU * theta_acc,
    )
    terminated = is_out_of_bounds(nxt)
    truncated = t + 1 > MAX_STEPS
    reward = 0.0 if terminated and not reward_on_termination else 1.0
    return StepOutcome(nxt, reward, terminated, truncated)


def observe(state: CartState) -> np.ndarray:
    return np.array([state.x, state.v, state.theta, state.omega], dtype=np.float64)


class CartPoleEnv:
    """Stateful wrapper that tracks the current state and step counter."""

    def __init__(self, rng: np.random.Generator, reward_on_termination: bool = False):
        self.rng = rng
        self.reward_on_termination = reward_on_termination
        self.state: CartState | None = None
        self.t = 0
        self.done = True

    def reset(self) -> np.ndarray:
        self.state = reset_state(self.rng)
        self.t = 0
        self.done = False
        return observe(self.state)

    def step(self, action: int) -> tuple[np.ndarray, float, bool, bool]:
        if self.done or self.state is None:
            raise ContractViolation("episode is over; call reset() first")
        out = step(self.state, action, self.t + 1, self.reward_on_termination)
        self.t += 1
        self.state = out.next_state
        self.done = out.done
        return observe(out.next_state), out.reward, out.terminated, out.truncated
