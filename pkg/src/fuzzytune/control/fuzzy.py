"""
Zero-order Takagi-Sugeno fuzzy controller with three diagonal rules.

The controller takes the error e and its derivative de, scales both into the
normalised universe [-1, 1], fuzzifies each with three triangular terms
(N, Z, P), fires the rules N∧N→c1, Z∧Z→c2, P∧P→c3 with the min operator and
returns the activation-weighted mean of the singletons, scaled by Gu.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from attrs import field, frozen, validators

from src.fuzzytune.errors import InvalidParams


EPS_GAP = 1e-3  # minimum distance between neighbouring modal values
EPS_ACT = 1e-9  # total activation below this yields a zero command

# Slack on the gap test so that repaired triples pass it despite rounding.
_GAP_TOL = 1e-12

N_PARAMS = 9
PARAM_NAMES = ("a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3")
GAIN_NAMES = ("Ge", "Gde", "Gu")


# --------------------------------------------------
# Value types
# --------------------------------------------------
class MembershipGrades(NamedTuple):
    mu_N: float
    mu_Z: float
    mu_P: float


class Activations(NamedTuple):
    alpha_N: float
    alpha_Z: float
    alpha_P: float


def _triple_problem(values: Sequence[float], names: Sequence[str]) -> str | None:
    """Return a description of the first violated triple invariant, or None."""
    for value, name in zip(values, names):
        if not -1.0 <= value <= 1.0:
            return f"{name} = {value!r} outside [-1, 1]"
    for (lo, hi), (lo_name, hi_name) in zip(
        ((values[0], values[1]), (values[1], values[2])),
        ((names[0], names[1]), (names[1], names[2])),
    ):
        if not lo < hi:
            return f"{lo_name} < {hi_name} violated"
        if hi - lo < EPS_GAP - _GAP_TOL:
            return f"{hi_name} - {lo_name} below minimum gap {EPS_GAP}"
    return None


@frozen
class MembershipTriple:
    """Modal values of the N, Z and P triangles of one normalised input."""

    a1: float = field(converter=float)
    a2: float = field(converter=float)
    a3: float = field(converter=float)

    def __attrs_post_init__(self) -> None:
        problem = _triple_problem(self.as_tuple(), ("a1", "a2", "a3"))
        if problem:
            raise InvalidParams(problem)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)


@frozen
class Gains:
    """Input (Ge, Gde) and output (Gu) scaling gains.

    Gu = 0 is accepted: it is the open-loop configuration used to measure the
    uncontrolled fall of the pendulum.
    """

    Ge: float = field(default=1.25, converter=float, validator=validators.gt(0.0))
    Gde: float = field(default=0.25, converter=float, validator=validators.gt(0.0))
    Gu: float = field(default=30.0, converter=float, validator=validators.ge(0.0))


@frozen
class ControllerParams:
    e_mf: MembershipTriple
    de_mf: MembershipTriple
    singletons: tuple[float, float, float] = field(
        converter=lambda c: tuple(float(v) for v in c)
    )
    gains: Gains = field(factory=Gains)

    @singletons.validator
    def _check_singletons(self, attribute, value) -> None:
        if len(value) != 3:
            raise InvalidParams(f"expected 3 singletons, got {len(value)}")
        problem = _triple_problem(value, ("c1", "c2", "c3"))
        if problem:
            raise InvalidParams(problem)


# --------------------------------------------------
# Fuzzification, inference, defuzzification
# --------------------------------------------------
def fuzzify(x: float, triple: MembershipTriple) -> MembershipGrades:
    """Membership grades of x in the N, Z, P triangles defined by triple.

    Inputs outside [-1, 1] are legal; the outer terms are flat beyond a1 and a3.
    """
    a1, a2, a3 = triple.a1, triple.a2, triple.a3

    if x < a1:
        return MembershipGrades(1.0, 0.0, 0.0)
    if x < a2:
        width = a2 - a1
        return MembershipGrades((a2 - x) / width, (x - a1) / width, 0.0)
    if x < a3:
        width = a3 - a2
        return MembershipGrades(0.0, (a3 - x) / width, (x - a2) / width)
    return MembershipGrades(0.0, 0.0, 1.0)


def infer(grades_e: MembershipGrades, grades_de: MembershipGrades) -> Activations:
    """Fire the three diagonal rules (N∧N, Z∧Z, P∧P) with the min operator."""
    return Activations(
        min(grades_e.mu_N, grades_de.mu_N),
        min(grades_e.mu_Z, grades_de.mu_Z),
        min(grades_e.mu_P, grades_de.mu_P),
    )


def defuzzify(activations: Sequence[float], singletons: Sequence[float]) -> float:
    """Center of gravity over singleton consequents.

    Returns 0 when the total activation is below EPS_ACT (no rule covers the
    input, e.g. e fully N while de is fully P).
    """
    total = activations[0] + activations[1] + activations[2]
    if total < EPS_ACT:
        return 0.0
    weighted = (
        activations[0] * singletons[0]
        + activations[1] * singletons[1]
        + activations[2] * singletons[2]
    )
    return weighted / total


def _saturate(x: float) -> float:
    return -1.0 if x < -1.0 else 1.0 if x > 1.0 else x


def control(e: float, de: float, params: ControllerParams) -> float:
    """Controller command in actuator units for error e and derivative de."""
    gains = params.gains
    e_n = _saturate(gains.Ge * e)
    de_n = _saturate(gains.Gde * de)
    activations = infer(fuzzify(e_n, params.e_mf), fuzzify(de_n, params.de_mf))
    return gains.Gu * defuzzify(activations, params.singletons)


def control_surface(
    params: ControllerParams, n: int = 41
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Normalised controller output over an n x n grid of (e_n, de_n).

    Returns:
        (e_grid, de_grid, u_norm) where u_norm[i, j] is the defuzzified output
        for de_grid[i] and e_grid[j].
    """
    axis = np.linspace(-1.0, 1.0, n)
    surface = np.empty((n, n))
    for i, de_n in enumerate(axis):
        grades_de = fuzzify(float(de_n), params.de_mf)
        for j, e_n in enumerate(axis):
            activations = infer(fuzzify(float(e_n), params.e_mf), grades_de)
            surface[i, j] = defuzzify(activations, params.singletons)
    return axis, axis.copy(), surface


# --------------------------------------------------
# Particle <-> controller mapping
# --------------------------------------------------
def _spread(triple: np.ndarray) -> np.ndarray:
    """Push a sorted triple apart until both gaps reach EPS_GAP.

    Pool-adjacent-violators on the gap-shifted values: pairs that are too
    close are moved symmetrically about their midpoint, then the triple is
    shifted back inside [-1, 1] if the spreading pushed it out.
    """
    offsets = EPS_GAP * np.arange(3)
    shifted = triple - offsets

    blocks: list[list[float]] = []  # [mean, count]
    for value in shifted:
        blocks.append([float(value), 1])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            mean_hi, count_hi = blocks.pop()
            mean_lo, count_lo = blocks[-1]
            count = count_lo + count_hi
            blocks[-1] = [(mean_lo * count_lo + mean_hi * count_hi) / count, count]

    pooled = np.concatenate([np.full(count, mean) for mean, count in blocks])
    out = pooled + offsets

    if out[2] > 1.0:
        out -= out[2] - 1.0
    elif out[0] < -1.0:
        out += -1.0 - out[0]
    return np.clip(out, -1.0, 1.0)


def is_valid(vector: Sequence[float]) -> bool:
    values = np.asarray(vector, dtype=float).reshape(N_PARAMS)
    return all(
        _triple_problem(tuple(values[s : s + 3]), PARAM_NAMES[s : s + 3]) is None
        for s in (0, 3, 6)
    )


def repair(raw: Sequence[float]) -> np.ndarray:
    """Map a raw 9-vector onto one that satisfies the ordering constraint.

    Each triple (positions 1-3, 4-6, 7-9) is sorted and, where neighbours sit
    closer than EPS_GAP, spread apart. Vectors that already satisfy the
    constraint come back unchanged.
    """
    vector = np.clip(np.asarray(raw, dtype=float).reshape(N_PARAMS), -1.0, 1.0)
    if is_valid(vector):
        return vector
    out = np.empty(N_PARAMS)
    for start in (0, 3, 6):
        triple = np.sort(vector[start : start + 3])
        if _triple_problem(tuple(triple), PARAM_NAMES[start : start + 3]) is not None:
            triple = _spread(triple)
        out[start : start + 3] = triple
    return out


def decode(vector: Sequence[float], gains: Gains | None = None) -> ControllerParams:
    """Interpret a 9-vector as (a1..a3, b1..b3, c1..c3)."""
    values = [float(v) for v in np.asarray(vector, dtype=float).reshape(N_PARAMS)]
    for start, label in ((0, "e_mf"), (3, "de_mf"), (6, "singletons")):
        problem = _triple_problem(values[start : start + 3], PARAM_NAMES[start : start + 3])
        if problem:
            raise InvalidParams(f"{label}: {problem}")
    return ControllerParams(
        e_mf=MembershipTriple(*values[0:3]),
        de_mf=MembershipTriple(*values[3:6]),
        singletons=values[6:9],
        gains=gains or Gains(),
    )


def encode(params: ControllerParams) -> np.ndarray:
    return np.array(
        [*params.e_mf.as_tuple(), *params.de_mf.as_tuple(), *params.singletons]
    )
