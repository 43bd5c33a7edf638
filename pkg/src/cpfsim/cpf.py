"""Conditional past-future (CPF) correlations: probability tables and
closed forms.

Three successive projective measurements with outcomes x, y, z in {+1, -1}
are separated by decay intervals t and tau. The CPF correlation conditioned
on the intermediate outcome y,

    C_pf(t, tau)|_y = <O_z O_x>_y - <O_z>_y <O_x>_y,

is a minimal operational memory witness: it vanishes identically for
memoryless dynamics, for any measurement scheme, and is assembled here from
the joint conditional table P(z, x | y).

Two independent routes are provided and cross-asserted in the test suite:

* the explicit eight-entry tables (``build_table_*``), which are what the
  experiment estimates from coincidence counts, and
* the reduced closed forms (``cpf_zzz``, ``cpf_xzx``, ``cpf_yzy``), all
  proportional to the two-time memory object G2(t, tau).

Conditioning on y = +1 gives exactly zero for every scheme. Conditioning
outcomes whose probability vanishes raise
:class:`ConditioningImpossibleError` rather than silently returning a
number: the corresponding estimator would have zero counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from .errors import (
    ConditioningImpossibleError,
    InternalConsistencyError,
    ValidationError,
)

_OUTCOMES = (+1, -1)
_CELLS = tuple((z, x) for z in _OUTCOMES for x in _OUTCOMES)
_DENOM_TOL = 1e-12
_ENTRY_TOL = 1e-9  # defensive slack for analytically-in-range entries


class MeasurementScheme(Enum):
    """Directions of the (past, present, future) projective measurements."""

    ZZZ = "zzz"
    XZX = "xzx"
    YZY = "yzy"


@dataclass(frozen=True)
class InitialState:
    """Qubit amplitudes (a, b) on (|up>, |down>); normalized."""

    a: complex
    b: complex

    def __post_init__(self):
        a = complex(self.a)
        b = complex(self.b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"|a|^2 + |b|^2 = {norm!r} must equal 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_population(cls, p: float) -> "InitialState":
        """State sqrt(p)|up> + sqrt(1-p)|down> used throughout the sweeps."""
        if not (0.0 <= p <= 1.0):
            raise ValidationError(f"p must lie in [0, 1], got {p}")
        return cls(a=math.sqrt(p), b=math.sqrt(1.0 - p))


@dataclass(frozen=True)
class ProbabilityTable:
    """The four joint conditionals P(z, x | y) for one scheme and one y."""

    scheme: MeasurementScheme
    y: int
    entries: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if self.y not in _OUTCOMES:
            raise ValidationError(f"y must be +1 or -1, got {self.y}")
        if set(self.entries.keys()) != set(_CELLS):
            raise ValidationError("entries must cover exactly the four (z, x) cells")
        entries = {k: float(v) for k, v in self.entries.items()}
        for cell, p in entries.items():
            if not (-1e-12 <= p <= 1.0 + 1e-12):
                raise ValidationError(f"P(z,x|y) out of range at {cell}: {p}")
        total = sum(entries.values())
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"entries sum to {total!r}, must be 1")
        object.__setattr__(self, "entries", entries)

    def p(self, z: int, x: int) -> float:
        return self.entries[(z, x)]

    def p_z(self, z: int) -> float:
        return sum(self.entries[(z, x)] for x in _OUTCOMES)

    def p_x(self, x: int) -> float:
        return sum(self.entries[(z, x)] for z in _OUTCOMES)


@dataclass(frozen=True)
class CpfResult:
    """A CPF correlation value with its conditioning context."""

    value: float
    y: int
    scheme: MeasurementScheme
    t: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        if abs(self.value) > 1.0 + 1e-12:
            raise ValidationError(
                f"|CPF| = {abs(self.value):g} > 1 is impossible for +-1 outcomes"
            )


def cpf_from_table(
    tbl: ProbabilityTable, t: Optional[float] = None, tau: Optional[float] = None
) -> CpfResult:
    """CPF correlation <O_z O_x>_y - <O_z>_y <O_x>_y from the table entries."""
    mean_zx = sum(z * x * tbl.p(z, x) for z, x in _CELLS)
    mean_z = sum(z * tbl.p_z(z) for z in _OUTCOMES)
    mean_x = sum(x * tbl.p_x(x) for x in _OUTCOMES)
    return CpfResult(
        value=mean_zx - mean_z * mean_x, y=tbl.y, scheme=tbl.scheme, t=t, tau=tau
    )


def _clamp_entry(p: float, where: str) -> float:
    if p < -_ENTRY_TOL or p > 1.0 + _ENTRY_TOL:
        raise InternalConsistencyError(f"{where}: entry {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def build_table_zzz(
    state: InitialState, G_t: complex, G_tau: complex, G_two: complex, y: int
) -> ProbabilityTable:
    """Joint conditional table for the z-z-z scheme.

    For y = +1 the past is pinned to x = +1 and the future entries are
    |G(tau)|^2 and 1 - |G(tau)|^2. For y = -1 all entries share the
    normalization D = (1 - |G(t)|^2)|a|^2 + |b|^2, the probability of
    finding the system decayed at t.
    """
    if y not in _OUTCOMES:
        raise ValidationError(f"y must be +1 or -1, got {y}")
    g_t2 = abs(complex(G_t)) ** 2
    if y == +1:
        g_tau2 = abs(complex(G_tau)) ** 2
        entries = {
            (+1, +1): _clamp_entry(g_tau2, "zzz y=+1"),
            (+1, -1): 0.0,
            (-1, +1): _clamp_entry(1.0 - g_tau2, "zzz y=+1"),
            (-1, -1): 0.0,
        }
        return ProbabilityTable(scheme=MeasurementScheme.ZZZ, y=+1, entries=entries)
    a2 = abs(state.a) ** 2
    b2 = abs(state.b) ** 2
    denom = (1.0 - g_t2) * a2 + b2
    if denom <= _DENOM_TOL:
        raise ConditioningImpossibleError(
            "P(y=-1) ~ 0: system cannot be found decayed (e.g. t = 0 with b = 0)"
        )
    g_two2 = abs(complex(G_two)) ** 2
    entries = {
        (+1, +1): _clamp_entry(g_two2 * a2 / denom, "zzz y=-1"),
        (+1, -1): 0.0,
        (-1, +1): _clamp_entry((1.0 - g_two2 - g_t2) * a2 / denom, "zzz y=-1"),
        (-1, -1): _clamp_entry(b2 / denom, "zzz y=-1"),
    }
    return ProbabilityTable(scheme=MeasurementScheme.ZZZ, y=-1, entries=entries)


def _coherent_table(
    scheme: MeasurementScheme,
    past_weights: dict[int, float],
    G_t: complex,
    G_two: complex,
    y: int,
) -> ProbabilityTable:
    """Shared x-z-x / y-z-y table: P(z,x|y) = w(x) [1 - zx kappa] / 2 for
    y = -1, and z-independent w(x)/2 for y = +1, where w(x) = P(x) and
    kappa = 2 Re G2 / (2 - |G(t)|^2)."""
    if y == +1:
        entries = {
            (z, x): _clamp_entry(past_weights[x] / 2.0, f"{scheme.value} y=+1")
            for z, x in _CELLS
        }
        return ProbabilityTable(scheme=scheme, y=+1, entries=entries)
    g_t2 = abs(complex(G_t)) ** 2
    interference = 2.0 * complex(G_two).real
    if abs(interference) > 2.0 - g_t2 + _ENTRY_TOL:
        raise InternalConsistencyError(
            f"|2 Re G2| = {abs(interference):g} exceeds 2 - |G|^2 = {2.0 - g_t2:g}"
        )
    kappa = interference / (2.0 - g_t2)
    entries = {
        (z, x): _clamp_entry(
            past_weights[x] * (1.0 - z * x * kappa) / 2.0, f"{scheme.value} y=-1"
        )
        for z, x in _CELLS
    }
    return ProbabilityTable(scheme=scheme, y=-1, entries=entries)


def build_table_xzx(
    state: InitialState, G_t: complex, G_two: complex, y: int
) -> ProbabilityTable:
    """Joint conditional table for the x-z-x scheme.

    The past outcome carries weight P(x) = |a + x b|^2 / 2, independent of
    y; only the y = -1 future acquires the interference term in Re G2.
    """
    if y not in _OUTCOMES:
        raise ValidationError(f"y must be +1 or -1, got {y}")
    weights = {x: abs(state.a + x * state.b) ** 2 / 2.0 for x in _OUTCOMES}
    return _coherent_table(MeasurementScheme.XZX, weights, G_t, G_two, y)


def build_table_yzy(
    state: InitialState, G_t: complex, G_two: complex, y: int
) -> ProbabilityTable:
    """Joint conditional table for the y-z-y scheme.

    Identical interference structure to x-z-x with past weights
    P(x) = |a - i x b|^2 / 2 = (1 - 2 x Im(a b*)) / 2.
    """
    if y not in _OUTCOMES:
        raise ValidationError(f"y must be +1 or -1, got {y}")
    weights = {x: abs(state.a - 1j * x * state.b) ** 2 / 2.0 for x in _OUTCOMES}
    return _coherent_table(MeasurementScheme.YZY, weights, G_t, G_two, y)


def cpf_zzz(
    state: InitialState,
    G_t: complex,
    G_two: complex,
    t: Optional[float] = None,
    tau: Optional[float] = None,
) -> CpfResult:
    """Closed-form z-z-z correlation at y = -1; non-negative, quadratic in G2."""
    a2 = abs(state.a) ** 2
    b2 = abs(state.b) ** 2
    g_t2 = abs(complex(G_t)) ** 2
    denom = (1.0 - g_t2) * a2 + b2
    if denom <= _DENOM_TOL:
        raise ConditioningImpossibleError(
            "P(y=-1) ~ 0: system cannot be found decayed (e.g. t = 0 with b = 0)"
        )
    value = (4.0 * a2 * b2 / denom**2) * abs(complex(G_two)) ** 2
    return CpfResult(value=value, y=-1, scheme=MeasurementScheme.ZZZ, t=t, tau=tau)


def cpf_xzx(
    state: InitialState,
    G_t: complex,
    G_two: complex,
    t: Optional[float] = None,
    tau: Optional[float] = None,
) -> CpfResult:
    """Closed-form x-z-x correlation at y = -1; linear in Re G2 with
    opposite sign. The denominator 1 - |G|^2/2 never falls below 1/2."""
    prefactor = 1.0 - (2.0 * (state.a * np.conj(state.b)).real) ** 2
    denom = 1.0 - abs(complex(G_t)) ** 2 / 2.0
    value = -(prefactor / denom) * complex(G_two).real
    return CpfResult(value=value, y=-1, scheme=MeasurementScheme.XZX, t=t, tau=tau)


def cpf_yzy(
    state: InitialState,
    G_t: complex,
    G_two: complex,
    t: Optional[float] = None,
    tau: Optional[float] = None,
) -> CpfResult:
    """Closed-form y-z-y correlation at y = -1: as x-z-x with Im(a b*)."""
    prefactor = 1.0 - (2.0 * (state.a * np.conj(state.b)).imag) ** 2
    denom = 1.0 - abs(complex(G_t)) ** 2 / 2.0
    value = -(prefactor / denom) * complex(G_two).real
    return CpfResult(value=value, y=-1, scheme=MeasurementScheme.YZY, t=t, tau=tau)


def cpf_y_plus(
    scheme: MeasurementScheme,
    t: Optional[float] = None,
    tau: Optional[float] = None,
) -> CpfResult:
    """Conditioning on y = +1 re-prepares the excited product state, so the
    past decouples from the future exactly: the correlation is 0 for every
    scheme and every parameter value."""
    return CpfResult(value=0.0, y=+1, scheme=scheme, t=t, tau=tau)


def cpf_closed_form(
    scheme: MeasurementScheme,
    state: InitialState,
    G_t: complex,
    G_two: complex,
    t: Optional[float] = None,
    tau: Optional[float] = None,
) -> CpfResult:
    """Dispatch to the y = -1 closed form of the given scheme."""
    if scheme is MeasurementScheme.ZZZ:
        return cpf_zzz(state, G_t, G_two, t=t, tau=tau)
    if scheme is MeasurementScheme.XZX:
        return cpf_xzx(state, G_t, G_two, t=t, tau=tau)
    return cpf_yzy(state, G_t, G_two, t=t, tau=tau)


def build_table(
    scheme: MeasurementScheme,
    state: InitialState,
    G_t: complex,
    G_tau: complex,
    G_two: complex,
    y: int,
) -> ProbabilityTable:
    """Dispatch to the table builder of the given scheme."""
    if scheme is MeasurementScheme.ZZZ:
        return build_table_zzz(state, G_t, G_tau, G_two, y)
    if scheme is MeasurementScheme.XZX:
        return build_table_xzx(state, G_t, G_two, y)
    return build_table_yzy(state, G_t, G_two, y)
