"""Sweep orchestration: reproduce the reference datasets as CSV.

Each runner takes a :class:`RunConfig` and an output directory and emits
one or more CSV files (see :mod:`cpfsim.io` for the deterministic dialect).
Equal-times correlation curves carry both computation routes side by side:
``cpf_closed`` from the reduced closed forms and ``cpf_table`` from the
eight-entry probability tables; they must agree to 1e-9 in every row.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .bath import LorentzianKernel
from .config import RunConfig
from .cpf import (
    InitialState,
    MeasurementScheme,
    build_table,
    cpf_closed_form,
    cpf_from_table,
    cpf_y_plus,
)
from .errors import (
    ConditioningImpossibleError,
    PropagatorZeroCrossingError,
    ValidationError,
)
from .experiment import run_noise_study
from .io import write_dataset
from .propagator import (
    PropagatorGrid,
    compute_G_two_time,
    lorentzian_G,
    lorentzian_G_two_time,
    rates_from_G,
    solve_volterra,
)

CURVE_FIELDS = ["scheme", "y", "p", "gamma_tau_c", "t", "tau", "cpf_closed", "cpf_table"]
NOISE_FIELDS = [
    "scheme", "y", "p", "gamma_tau_c", "N", "V", "t",
    "ideal", "degraded_ideal", "mc_mean", "mc_std", "n_replicas", "seed",
]
WITNESS_FIELDS = ["t", "rate_gamma", "g_abs2", "cpf_zzz", "cpf_xzx", "warning"]

# Reference equal-times curves: (scheme, gamma tau_c, excited population p),
# ordered from the strongest positive to the strongest negative correlation.
FIGURE2_COMBOS = (
    (MeasurementScheme.ZZZ, 1.0, 0.8),
    (MeasurementScheme.ZZZ, 0.5, 0.8),
    (MeasurementScheme.XZX, 0.5, 1.0),
    (MeasurementScheme.XZX, 1.0, 1.0),
)

# Default visibility matrix of the coherent-scheme noise blocks; a
# "visibilities" list in the config overrides it.
DEFAULT_VISIBILITIES = (1.0, 0.9, 0.8)


def _appendix_d_blocks(cfg: RunConfig):
    """Noise-study blocks: (scheme, gamma tau_c, p, y, visibility): the
    visibility matrix for x-z-x, the incoherent z-z-z reference, the
    weak-memory case, and the count-starved y = +1 case."""
    visibilities = tuple(
        float(v) for v in cfg.raw.get("visibilities", DEFAULT_VISIBILITIES)
    )
    blocks = [(MeasurementScheme.XZX, 1.0, 1.0, -1, v) for v in visibilities]
    blocks += [
        (MeasurementScheme.ZZZ, 1.0, 0.8, -1, 1.0),
        (MeasurementScheme.ZZZ, 0.1, 0.8, -1, 1.0),
        (MeasurementScheme.XZX, 1.0, 1.0, +1, 1.0),
    ]
    return blocks


def _map_points(fn: Callable, items: Sequence, threads: int) -> list:
    """Apply a pure function over sweep points, preserving grid order."""
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _equal_times_row(
    scheme: MeasurementScheme,
    state: InitialState,
    y: int,
    g_t: complex,
    g2: complex,
    t_report: float,
    p_label: Optional[float],
    ratio_label: Optional[float],
) -> dict:
    if y == +1:
        closed = cpf_y_plus(scheme).value
        table = cpf_from_table(build_table(scheme, state, g_t, g_t, g2, +1)).value
    else:
        closed = cpf_closed_form(scheme, state, g_t, g2).value
        table = cpf_from_table(build_table(scheme, state, g_t, g_t, g2, -1)).value
    return {
        "scheme": scheme.value,
        "y": y,
        "p": p_label,
        "gamma_tau_c": ratio_label,
        "t": t_report,
        "tau": t_report,
        "cpf_closed": closed,
        "cpf_table": table,
    }


def run_figure2(cfg: RunConfig, out_dir: Path, threads: int = 1) -> Path:
    """Equal-times correlation curves for the reference (scheme, bath, state)
    combinations, conditioned on y = -1, over gamma*t in [0, t_max_gamma]."""
    combos = _figure2_combos(cfg)
    gamma_t = np.linspace(0.0, cfg.t_max_gamma, cfg.points)
    rows: list[dict] = []
    for scheme, ratio, p in combos:
        tau_c = 1.0
        gamma = ratio / tau_c
        state = InitialState.from_population(p)
        times = gamma_t / gamma

        def point(t, scheme=scheme, state=state, gamma=gamma, tau_c=tau_c, ratio=ratio, p=p):
            g_t = complex(lorentzian_G(gamma, tau_c, t))
            g2 = complex(lorentzian_G_two_time(gamma, tau_c, t, t))
            return _equal_times_row(scheme, state, cfg.y, g_t, g2, t * gamma, p, ratio)

        rows.extend(_map_points(point, times, threads))
    return write_dataset(out_dir / "figure2.csv", CURVE_FIELDS, rows, cfg.raw)


def _figure2_combos(cfg: RunConfig):
    extra = cfg.raw.get("combos")
    if extra is None:
        return FIGURE2_COMBOS
    combos = []
    for item in extra:
        combos.append(
            (
                MeasurementScheme(str(item["scheme"]).lower()),
                float(item["gamma_tau_c"]),
                float(item["p"]),
            )
        )
    return tuple(combos)


def run_appendix_d(cfg: RunConfig, out_dir: Path, threads: int = 1) -> Path:
    """Noise-study datasets: visibility matrix, the weak-memory case, and
    the y = +1 starvation case, all with Monte Carlo statistics."""
    if cfg.noise is None:
        raise ValidationError("config: noise: block required for appendix-d runs")
    gamma_t = np.linspace(0.0, cfg.t_max_gamma, cfg.points)

    def block(spec):
        scheme, ratio, p, y, visibility = spec
        tau_c = 1.0
        gamma = ratio / tau_c
        state = InitialState.from_population(p)
        noise = dataclasses.replace(cfg.noise, visibility=visibility)
        points = run_noise_study(
            state, scheme, LorentzianKernel(gamma, tau_c), gamma_t / gamma, noise, y=y
        )
        return [
            {
                "scheme": scheme.value,
                "y": y,
                "p": p,
                "gamma_tau_c": ratio,
                "N": noise.total_counts,
                "V": visibility,
                "t": pt.t * gamma,
                "ideal": pt.ideal,
                "degraded_ideal": pt.degraded_ideal,
                "mc_mean": pt.mc_mean,
                "mc_std": pt.mc_std,
                "n_replicas": pt.n_replicas,
                "seed": noise.seed,
            }
            for pt in points
        ]

    rows: list[dict] = []
    for chunk in _map_points(block, _appendix_d_blocks(cfg), threads):
        rows.extend(chunk)
    return write_dataset(out_dir / "appendix_d.csv", NOISE_FIELDS, rows, cfg.raw)


def run_witness_comparison(cfg: RunConfig, out_dir: Path, threads: int = 1) -> Path:
    """The central contrast in one table: per t, the non-operational
    witnesses (decay rate gamma(t), survival |G(t)|^2) next to the
    operational CPF(t, t) of both schemes.

    If G crosses zero inside the grid the rate stencils are undefined
    beyond it; the grid is truncated there and the last emitted row says so
    in the warning column.
    """
    if not cfg.bath.is_analytic:
        raise ValidationError("config: bath: witness comparison needs an analytic bath")
    gamma = cfg.bath.gamma
    tau_c = cfg.bath.tau_c
    n = cfg.points - 1
    h = cfg.t_max_gamma / gamma / n
    times = np.arange(n + 1) * h
    g_vals = np.asarray(lorentzian_G(gamma, tau_c, times), dtype=complex)
    warning = ""
    try:
        rates = rates_from_G(PropagatorGrid(t_step=h, values=g_vals))
        keep = n + 1
    except PropagatorZeroCrossingError as exc:
        keep = max(exc.index, 3)
        rates = rates_from_G(PropagatorGrid(t_step=h, values=g_vals[:keep]))
        warning = f"truncated: G(t) crosses zero near gamma*t = {exc.t * gamma:.6g}"
    state = cfg.state
    rows = []
    for i in range(keep):
        t = times[i]
        g_t = complex(g_vals[i])
        g2 = complex(lorentzian_G_two_time(gamma, tau_c, t, t))
        rows.append(
            {
                "t": cfg.report_time(t),
                "rate_gamma": rates.gamma_t[i],
                "g_abs2": abs(g_t) ** 2,
                "cpf_zzz": cpf_closed_form(MeasurementScheme.ZZZ, state, g_t, g2).value,
                "cpf_xzx": cpf_closed_form(MeasurementScheme.XZX, state, g_t, g2).value,
                "warning": warning if i == keep - 1 else "",
            }
        )
    return write_dataset(out_dir / "witness.csv", WITNESS_FIELDS, rows, cfg.raw)


def run_validation(writer: Callable[[str], None] = print) -> bool:
    """Quick invariant suite behind the ``validate`` subcommand.

    A curated subset of the package's property checks, one pass/fail line
    each; returns True when everything holds. The full acceptance suite
    lives in the test tree.
    """
    from .channel import angles_from_propagator, conditional_table, simulate_sequence

    checks: list[tuple[str, bool]] = []
    tau_c = 1.0

    # Volterra solver against the closed form at the reference step
    worst = 0.0
    for ratio in (0.1, 0.5, 1.0, 2.0):
        gamma = ratio / tau_c
        grid = solve_volterra(LorentzianKernel(gamma, tau_c), 5.0 / gamma, tau_c / 100)
        worst = max(
            worst,
            float(np.max(np.abs(grid.values - lorentzian_G(gamma, tau_c, grid.times)))),
        )
    checks.append((f"volterra vs closed form (max err {worst:.2e} <= 1e-5)", worst <= 1e-5))

    # Two-time quadrature against the closed form
    gamma = 1.0 / tau_c
    grid = solve_volterra(LorentzianKernel(gamma, tau_c), 5.0 * tau_c, tau_c / 100)
    surface = compute_G_two_time(
        LorentzianKernel(gamma, tau_c), grid, 5.0 * tau_c, 5.0 * tau_c
    )
    ref = lorentzian_G_two_time(
        gamma, tau_c, grid.times[:, None], grid.times[None, :]
    )
    err = float(np.max(np.abs(surface.values - ref)))
    checks.append((f"two-time quadrature vs closed form (max err {err:.2e} <= 1e-5)", err <= 1e-5))

    # Channel-map oracle vs closed forms and y = +1 nullity
    ts = np.linspace(0.4 * np.pi, 2.0 * np.pi, 3) * tau_c
    worst = 0.0
    worst_plus = 0.0
    for p in (1.0, 0.8, 0.5):
        state = InitialState.from_population(p)
        for t in ts:
            for tau in ts:
                g_t = complex(lorentzian_G(gamma, tau_c, t))
                g_tau = complex(lorentzian_G(gamma, tau_c, tau))
                g2 = complex(lorentzian_G_two_time(gamma, tau_c, t, tau))
                angles = angles_from_propagator(g_t, g_tau, g2)
                for scheme in MeasurementScheme:
                    joint = simulate_sequence(state, scheme, angles)
                    oracle = cpf_from_table(conditional_table(joint, scheme, -1)).value
                    closed = cpf_closed_form(scheme, state, g_t, g2).value
                    worst = max(worst, abs(oracle - closed))
                    plus = cpf_from_table(conditional_table(joint, scheme, +1)).value
                    worst_plus = max(worst_plus, abs(plus))
    checks.append((f"channel-map oracle vs closed forms (max diff {worst:.2e} <= 1e-9)", worst <= 1e-9))
    checks.append((f"y=+1 correlation nullity (max |CPF| {worst_plus:.2e} <= 1e-12)", worst_plus <= 1e-12))

    # Probability bound on the numerical grids
    viol = float(
        np.max(np.abs(surface.values) ** 2 - (1.0 - np.abs(grid.values[:, None]) ** 2))
    )
    checks.append((f"probability bound |G2|^2 <= 1 - |G|^2 (excess {viol:.2e} <= 1e-9)", viol <= 1e-9))

    ok = True
    for label, passed in checks:
        writer(f"{'PASS' if passed else 'FAIL'}  {label}")
        ok = ok and passed
    return ok


def run_sweep(cfg: RunConfig, out_dir: Path, threads: int = 1) -> Path:
    """Generic sweep over the configured schemes and grid, for analytic or
    tabulated baths. Tabulated baths run through the numerical pipeline
    (Volterra solve plus two-time quadrature) on the same grid."""
    gamma = cfg.bath.gamma
    n = cfg.points - 1
    h = cfg.t_max_gamma / gamma / n
    times = np.arange(n + 1) * h
    ratio_label = cfg.bath.tau_c * gamma if cfg.bath.is_analytic else None
    if cfg.bath.is_analytic:
        tau_c = cfg.bath.tau_c
        g_vals = np.asarray(lorentzian_G(gamma, tau_c, times), dtype=complex)
        g2_surface = None
    else:
        kernel = cfg.bath.make_kernel()
        # integrate on a substep of the output grid no coarser than the
        # default 1/(100 gamma), then subsample back to the output points
        refine = max(1, int(np.ceil(h * 100.0 * gamma)))
        h_int = h / refine
        grid = solve_volterra(kernel, times[-1], h_int)
        g_vals = grid.values[::refine]
        surface = compute_G_two_time(kernel, grid, times[-1], times[-1])
        g2_surface = surface.values[::refine, ::refine]
    pairs = (
        [(i, i) for i in range(n + 1)]
        if cfg.equal_times
        else [(i, j) for i in range(n + 1) for j in range(n + 1)]
    )
    p_label = abs(cfg.state.a) ** 2
    rows = []
    for scheme in cfg.schemes:

        def point(ij, scheme=scheme):
            i, j = ij
            g_t = complex(g_vals[i])
            g_tau = complex(g_vals[j])
            if g2_surface is not None:
                g2 = complex(g2_surface[i, j])
            else:
                g2 = complex(
                    lorentzian_G_two_time(gamma, cfg.bath.tau_c, times[i], times[j])
                )
            try:
                if cfg.y == +1:
                    closed = cpf_y_plus(scheme).value
                    table = cpf_from_table(
                        build_table(scheme, cfg.state, g_t, g_tau, g2, +1)
                    ).value
                else:
                    closed = cpf_closed_form(scheme, cfg.state, g_t, g2).value
                    table = cpf_from_table(
                        build_table(scheme, cfg.state, g_t, g_tau, g2, -1)
                    ).value
            except ConditioningImpossibleError:
                closed = table = float("nan")
            return {
                "scheme": scheme.value,
                "y": cfg.y,
                "p": p_label,
                "gamma_tau_c": ratio_label,
                "t": cfg.report_time(times[i]),
                "tau": cfg.report_time(times[j]),
                "cpf_closed": closed,
                "cpf_table": table,
            }

        rows.extend(_map_points(point, pairs, threads))
    return write_dataset(out_dir / "sweep.csv", CURVE_FIELDS, rows, cfg.raw)
