"""Wave-vector propagator G(t), the two-time memory object G(t, tau),
density-matrix evolution, decay rates, and backflow probabilities.

G(t) solves the convoluted (Volterra) evolution

    dG/dt = -int_0^t f(t - t') G(t') dt',    G(0) = 1,

driven by the bath correlation f. For a Lorentzian kernel the solution has
the closed form (chi = sqrt(1 - 2 gamma tau_c))

    G(t) = e^{-t/2tau_c} [cosh(t chi / 2 tau_c) + sinh(t chi / 2 tau_c)/chi],

evaluated through trigonometric identities when chi is imaginary and through
the analytic chi -> 0 limit e^{-t/2tau_c}(1 + t/2tau_c) at gamma tau_c = 1/2.

The memory object governing conditional past-future correlations is not
G(t) itself but the double convolution

    G2(t, tau) = int_0^t dt' int_0^tau dtau'
                 f(tau' + t') G(t - t') G(tau - tau'),

with Lorentzian closed form
(2 gamma tau_c / chi^2) e^{-(t+tau)/2tau_c} sinh(t chi/2tau_c) sinh(tau chi/2tau_c).
It vanishes when f approaches a delta function, i.e. exactly in the
Born-Markov regime, even where G(t) decays monotonically.

Numerical quadrature is trapezoidal product integration with a fixed step
(second order); the step is kept common between G, G2 and the probability
tables so the correlation layer operates on aligned grids.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import two_time_trapezoid, volterra_trapezoid
from .bath import BathKernel, LorentzianKernel, eval_kernel_grid
from .cpf import InitialState
from .errors import (
    ConditioningImpossibleError,
    CoarseStepWarning,
    GridMismatchError,
    InternalConsistencyError,
    PropagatorZeroCrossingError,
    ValidationError,
)

_ABS_TOL = 1e-9  # allowed |G| overshoot above 1 (amplitude of a normalized component)
_CHI_SQ_TOL = 1e-10  # |chi|^2 below this uses the analytic chi -> 0 limit


@dataclass(frozen=True)
class PropagatorGrid:
    """G(t) sampled on the uniform grid t_i = i * t_step."""

    t_step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if not (self.t_step > 0):
            raise ValidationError(f"t_step must be > 0, got {self.t_step}")
        if values.ndim != 1 or values.size < 1:
            raise ValidationError("values must be a non-empty 1-D array")
        if values[0] != 1.0:
            raise ValidationError(f"G(0) must be exactly 1, got {values[0]}")
        if np.max(np.abs(values)) > 1.0 + _ABS_TOL:
            raise ValidationError("|G| exceeds 1 beyond tolerance; not a propagator")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.t_step

    @property
    def t_max(self) -> float:
        return (self.values.size - 1) * self.t_step


@dataclass(frozen=True)
class TwoTimeGrid:
    """G2(t, tau) on the product grid (i * t_step, j * tau_step)."""

    t_step: float
    tau_step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if not (self.t_step > 0 and self.tau_step > 0):
            raise ValidationError("steps must be > 0")
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D array")
        if np.any(values[0, :] != 0) or np.any(values[:, 0] != 0):
            raise ValidationError("G2 must vanish exactly on the t = 0 and tau = 0 edges")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def t_times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.t_step

    @property
    def tau_times(self) -> np.ndarray:
        return np.arange(self.values.shape[1]) * self.tau_step


@dataclass(frozen=True)
class RateFunctions:
    """Time-dependent decay rate gamma(t) and frequency shift omega(t),
    defined by gamma(t) + i omega(t) = -(d/dt) ln G(t)."""

    t_step: float
    gamma_t: np.ndarray
    omega_t: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.gamma_t.size) * self.t_step


@dataclass(frozen=True)
class DensityMatrix:
    """Qubit state in the (up, down) basis; validated trace-1 Hermitian PSD."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValidationError("density matrix must be 2x2")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise ValidationError(f"trace must be 1, got {np.trace(m)}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValidationError("density matrix must be Hermitian")
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] < -1e-12 or eigs[-1] > 1.0 + 1e-12:
            raise ValidationError(f"eigenvalues must lie in [0, 1], got {eigs}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def up_up(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def up_down(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def down_up(self) -> complex:
        return complex(self.matrix[1, 0])

    @property
    def down_down(self) -> complex:
        return complex(self.matrix[1, 1])


def _steps_on_grid(t_target: float, h: float, what: str) -> int:
    n = int(round(t_target / h))
    if n < 1:
        raise ValidationError(f"{what} = {t_target:g} shorter than one step h = {h:g}")
    if abs(n * h - t_target) > 1e-9 * max(1.0, abs(t_target)):
        raise GridMismatchError(
            f"{what} = {t_target:g} is not a whole number of steps h = {h:g}"
        )
    return n


def solve_volterra(
    kernel: BathKernel, t_max: float, t_step: float, strict: bool = False
) -> PropagatorGrid:
    """Solve the convoluted propagator equation on [0, t_max].

    Trapezoidal product integration, global error O(t_step^2). For
    Lorentzian kernels a step coarser than tau_c / 4 cannot resolve the
    kernel decay: with ``strict`` this is rejected, otherwise a
    :class:`CoarseStepWarning` is attached to the computation.
    """
    if not (t_step > 0):
        raise ValidationError(f"t_step must be > 0, got {t_step}")
    if t_max < t_step:
        raise ValidationError(f"t_max = {t_max:g} must be >= t_step = {t_step:g}")
    if isinstance(kernel, LorentzianKernel) and t_step > kernel.tau_c / 4:
        msg = (
            f"t_step = {t_step:g} > tau_c/4 = {kernel.tau_c / 4:g}: "
            "step too coarse to resolve the kernel"
        )
        if strict:
            raise ValidationError(msg)
        warnings.warn(msg, CoarseStepWarning, stacklevel=2)
    n = _steps_on_grid(t_max, t_step, "t_max")
    f = eval_kernel_grid(kernel, np.arange(n + 1) * t_step)
    values = volterra_trapezoid(f, t_step)
    return PropagatorGrid(t_step=t_step, values=values)


def lorentzian_G(gamma: float, tau_c: float, t) -> np.ndarray | float:
    """Closed-form propagator for the Lorentzian kernel; real-valued.

    Accepts scalar or array t >= 0 and handles all three chi regimes,
    including the chi = 0 boundary at gamma tau_c = 1/2.
    """
    if not (gamma > 0 and tau_c > 0):
        raise ValidationError("gamma and tau_c must be > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    x = t / (2.0 * tau_c)
    chi_sq = 1.0 - 2.0 * gamma * tau_c
    if abs(chi_sq) < _CHI_SQ_TOL:
        out = np.exp(-x) * (1.0 + x)
    elif chi_sq > 0:
        chi = np.sqrt(chi_sq)
        # e^{-x} [cosh(x chi) + sinh(x chi)/chi] expanded into decaying
        # exponentials: safe from cosh overflow at large t
        out = 0.5 * (
            (1.0 + 1.0 / chi) * np.exp(-x * (1.0 - chi))
            + (1.0 - 1.0 / chi) * np.exp(-x * (1.0 + chi))
        )
    else:
        w = np.sqrt(-chi_sq)
        out = np.exp(-x) * (np.cos(x * w) + np.sin(x * w) / w)
    return out if out.ndim else float(out)


def lorentzian_G_two_time(gamma: float, tau_c: float, t, tau) -> np.ndarray | float:
    """Closed-form two-time memory object for the Lorentzian kernel."""
    if not (gamma > 0 and tau_c > 0):
        raise ValidationError("gamma and tau_c must be > 0")
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(t < 0) or np.any(tau < 0):
        raise ValidationError("t and tau must be >= 0")
    xt = t / (2.0 * tau_c)
    xu = tau / (2.0 * tau_c)
    chi_sq = 1.0 - 2.0 * gamma * tau_c
    if abs(chi_sq) < _CHI_SQ_TOL:
        out = 2.0 * gamma * tau_c * xt * xu * np.exp(-(xt + xu))
    elif chi_sq > 0:
        chi = np.sqrt(chi_sq)
        st = 0.5 * (np.exp(-xt * (1.0 - chi)) - np.exp(-xt * (1.0 + chi)))
        su = 0.5 * (np.exp(-xu * (1.0 - chi)) - np.exp(-xu * (1.0 + chi)))
        out = (2.0 * gamma * tau_c / chi_sq) * st * su
    else:
        w = np.sqrt(-chi_sq)
        # sinh(i w x) = i sin(w x); the two factors of i cancel chi^2 = -w^2
        out = (
            (2.0 * gamma * tau_c / (w * w))
            * np.exp(-(xt + xu))
            * np.sin(xt * w)
            * np.sin(xu * w)
        )
    return out if out.ndim else float(out)


def compute_G_two_time(
    kernel: BathKernel, G: PropagatorGrid, t_max: float, tau_max: float
) -> TwoTimeGrid:
    """Tensor-product trapezoid quadrature of G2 reusing the solved G grid.

    Both axes use G.t_step; the kernel must be evaluable on
    [0, t_max + tau_max]. Error O(t_step^2).
    """
    h = G.t_step
    n = _steps_on_grid(t_max, h, "t_max")
    m = _steps_on_grid(tau_max, h, "tau_max")
    if max(n, m) > G.values.size - 1:
        raise GridMismatchError(
            f"G grid covers {G.t_max:g} but max(t_max, tau_max) = {max(t_max, tau_max):g}"
        )
    f = eval_kernel_grid(kernel, np.arange(n + m + 1) * h)
    values = two_time_trapezoid(f, G.values[: n + 1], G.values[: m + 1], h)
    return TwoTimeGrid(t_step=h, tau_step=h, values=values)


def rho_t(state: InitialState, G_val: complex) -> DensityMatrix:
    """Reduced qubit state after decay for time t with propagator value G."""
    G_val = complex(G_val)
    if abs(G_val) > 1.0 + _ABS_TOL:
        raise ValidationError(f"|G| = {abs(G_val):g} exceeds 1")
    a, b = state.a, state.b
    p_up = abs(a) ** 2 * abs(G_val) ** 2
    coh = a * np.conj(b) * G_val
    return DensityMatrix(
        matrix=np.array([[p_up, coh], [np.conj(coh), 1.0 - p_up]], dtype=complex)
    )


def rates_from_G(G: PropagatorGrid) -> RateFunctions:
    """Decay rate and frequency shift by finite differences of -ln G.

    Central differences in the interior, second-order one-sided stencils at
    the endpoints. Raises :class:`PropagatorZeroCrossingError` at the first
    grid index where G vanishes or (for real-valued grids) changes sign:
    the rates diverge there and everything after it is meaningless.
    """
    v = G.values
    if v.size < 3:
        raise ValidationError("need at least 3 grid points for rate stencils")
    tiny = np.abs(v) <= 1e-12
    if np.any(tiny):
        idx = int(np.argmax(tiny))
        raise PropagatorZeroCrossingError(index=idx, t=idx * G.t_step)
    if np.max(np.abs(v.imag)) <= 1e-12:
        sign_change = v.real[:-1] * v.real[1:] < 0
        if np.any(sign_change):
            idx = int(np.argmax(sign_change)) + 1
            raise PropagatorZeroCrossingError(index=idx, t=idx * G.t_step)
    log_g = np.log(v)
    h = G.t_step
    d = np.empty_like(log_g)
    d[1:-1] = (log_g[2:] - log_g[:-2]) / (2.0 * h)
    d[0] = (-3.0 * log_g[0] + 4.0 * log_g[1] - log_g[2]) / (2.0 * h)
    d[-1] = (3.0 * log_g[-1] - 4.0 * log_g[-2] + log_g[-3]) / (2.0 * h)
    return RateFunctions(t_step=h, gamma_t=-d.real, omega_t=-d.imag)


def backflow_probabilities(G_t: complex, G_two: complex) -> tuple[float, float]:
    """Survival and conditional re-excitation probabilities.

    Returns (P(up, t | up, 0), P(up, t+tau | down, t; up, 0)) =
    (|G(t)|^2, |G2(t, tau)|^2 / (1 - |G(t)|^2)). The second one is the
    operational backflow witness: it vanishes exactly in the Markovian
    limit, whatever G(t) does.
    """
    p_survive = abs(complex(G_t)) ** 2
    if p_survive >= 1.0:
        raise ConditioningImpossibleError(
            "|G(t)| >= 1: the system cannot have been found decayed at t"
        )
    p_reexcite = abs(complex(G_two)) ** 2 / (1.0 - p_survive)
    if p_reexcite > 1.0 + _ABS_TOL:
        raise InternalConsistencyError(
            f"re-excitation probability {p_reexcite:g} > 1 violates the "
            "amplitude normalization bound"
        )
    return p_survive, min(p_reexcite, 1.0)
