"""Environment correlation functions (memory kernels).

The bath enters the dynamics exclusively through its two-time correlation
function f(t); nothing else about the microscopic environment is ever
represented. Two kernel families are supported:

* ``LorentzianKernel``: f(t) = (gamma / 2 tau_c) exp(-|t| / tau_c), the
  exponential correlation of a Lorentzian spectral density. This is the
  canonical instance with closed-form propagators.
* ``TabulatedKernel``: complex samples on an ascending time grid starting
  at 0, evaluated by linear interpolation. Extrapolation is refused: a
  silently extrapolated memory kernel corrupts convolutions invisibly.

Kernels are immutable value types, safe for concurrent reads.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import KernelRangeError, ValidationError


@dataclass(frozen=True)
class LorentzianKernel:
    """Exponential bath correlation with integrated weight gamma / 2."""

    gamma: float
    tau_c: float

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if not (self.tau_c > 0):
            raise ValidationError(f"tau_c must be > 0, got {self.tau_c}")


@dataclass(frozen=True)
class TabulatedKernel:
    """Complex correlation samples on a strictly ascending grid from t = 0."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
            raise ValidationError("times and values must be 1-D arrays of equal length")
        if times.size < 2:
            raise ValidationError("tabulated kernel needs at least 2 samples")
        if times[0] != 0.0:
            raise ValidationError(f"tabulated times must start at 0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("tabulated times must be strictly ascending")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values.view(float)))):
            raise ValidationError("tabulated kernel samples must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])


BathKernel = Union[LorentzianKernel, TabulatedKernel]


def eval_kernel(kernel: BathKernel, t: float) -> complex:
    """Evaluate f(t). Lorentzian accepts any t (via |t|); tabulated kernels
    require 0 <= t <= t_max and interpolate linearly between samples."""
    return complex(eval_kernel_grid(kernel, np.asarray(float(t))))


def eval_kernel_grid(kernel: BathKernel, ts: np.ndarray) -> np.ndarray:
    """Vectorised kernel evaluation; same domain rules as :func:`eval_kernel`."""
    ts = np.asarray(ts, dtype=float)
    if isinstance(kernel, LorentzianKernel):
        out = (kernel.gamma / (2.0 * kernel.tau_c)) * np.exp(-np.abs(ts) / kernel.tau_c)
        return out.astype(complex)
    if isinstance(kernel, TabulatedKernel):
        if np.any(ts < 0):
            raise KernelRangeError("tabulated kernel is only defined for t >= 0")
        if np.any(ts > kernel.t_max):
            raise KernelRangeError(
                f"t = {float(np.max(ts)):g} beyond last sample t_max = {kernel.t_max:g}; "
                "refusing to extrapolate"
            )
        re = np.interp(ts, kernel.times, kernel.values.real)
        im = np.interp(ts, kernel.times, kernel.values.imag)
        return re + 1j * im
    raise ValidationError(f"unknown kernel type {type(kernel).__name__}")


def markovian_limit_kernel(gamma: float, tau_c: float, epsilon: float) -> LorentzianKernel:
    """Shrink the correlation time by ``epsilon`` at fixed integrated weight.

    Returns Lorentzian{gamma, tau_c * epsilon}; as epsilon -> 0 the kernel
    approaches gamma/2 times a delta function and all memory effects vanish.
    """
    if not (epsilon > 0):
        raise ValidationError(f"epsilon must be > 0, got {epsilon}")
    return LorentzianKernel(gamma=gamma, tau_c=tau_c * epsilon)


def load_kernel_csv(path: Union[str, Path], time_scale: float = 1.0) -> TabulatedKernel:
    """Load a tabulated kernel from CSV: time, real part, optional imaginary part.

    A header row is required. ``time_scale`` multiplies the time column,
    e.g. 1/gamma when the file declares times in units of 1/gamma.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{path}: empty kernel file")
    header = rows[0]
    try:
        float(header[0])
    except ValueError:
        pass  # non-numeric first cell: header present, as required
    else:
        raise ValidationError(f"{path}: header row required, found numeric first row")
    times, values = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) not in (2, 3):
            raise ValidationError(f"{path}:{ln}: expected 2 or 3 columns, got {len(row)}")
        try:
            t = float(row[0])
            re = float(row[1])
            im = float(row[2]) if len(row) == 3 else 0.0
        except ValueError as exc:
            raise ValidationError(f"{path}:{ln}: {exc}") from exc
        times.append(t * time_scale)
        values.append(re + 1j * im)
    return TabulatedKernel(times=np.array(times), values=np.array(values))
