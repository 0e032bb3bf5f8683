"""Command-line front end: flat-text configs in, deterministic CSV/SVG out.

Configs are plain ``key = value`` lines with dotted section keys
(``bath.m = 3``); ``#`` starts a comment.  Reals are printed with 17
significant digits and no output line carries a timestamp, so a run is
byte-reproducible from its config, seed, and tool version; thread count
never changes the bytes (sweep results are assembled in input order).

Exit codes: 0 success, 1 check failure, 2 config, 3 stability or
decoherence-free request, 4 solver, 5 grid resolution, 6 resource cap.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, _svg
from . import bath as bath_mod
from . import decoherence as deco
from . import dynamics
from . import wick_oracle as wo
from .bath import SpectralBath
from .decoherence import MeasurementSetup, ObjectSpec, PointerSpec, Variant
from .errors import (
    ConfigError,
    DecoherenceFreeError,
    DecometerError,
    RegimeWarning,
    SolverError,
)

_REQUIRED = object()

_SWEEP_VARIABLES = ("tau_ent", "eta", "w_D", "alpha", "m", "t")


# --------------------------------------------------------------------------
# config file handling
# --------------------------------------------------------------------------


def parse_config_text(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; later occurrences of a key win."""
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config(path: str) -> Dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


class RunConfig:
    """Resolved config plus output options; tracks which keys were consumed
    so a typo like ``bath.q`` is reported by name instead of ignored."""

    def __init__(self, raw, out_prefix, formats, threads, seed):
        self.raw = dict(raw)
        self.out_prefix = out_prefix
        self.formats = tuple(formats)
        self.threads = threads
        self.seed = seed
        self._used = set()

    # -- typed accessors ---------------------------------------------------
    def _get(self, key, default):
        self._used.add(key)
        if key in self.raw:
            return self.raw[key]
        if default is _REQUIRED:
            raise ConfigError(f"missing required config key '{key}'")
        return None

    def str_(self, key, default=_REQUIRED) -> Optional[str]:
        val = self._get(key, default)
        return val if val is not None else (None if default is _REQUIRED else default)

    def float_(self, key, default=_REQUIRED) -> Optional[float]:
        val = self._get(key, default)
        if val is None:
            return None if default is _REQUIRED else default
        try:
            return float(val)
        except ValueError as exc:
            raise ConfigError(f"config key '{key}': not a number: {val!r}") from exc

    def int_(self, key, default=_REQUIRED) -> Optional[int]:
        val = self._get(key, default)
        if val is None:
            return None if default is _REQUIRED else default
        try:
            return int(val)
        except ValueError as exc:
            raise ConfigError(f"config key '{key}': not an integer: {val!r}") from exc

    def bool_(self, key, default=False) -> bool:
        val = self._get(key, None)
        if val is None:
            return default
        low = val.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key '{key}': not a boolean: {val!r}")

    def floats_(self, key, default=_REQUIRED) -> Optional[Tuple[float, ...]]:
        val = self._get(key, default)
        if val is None:
            return None if default is _REQUIRED else default
        try:
            return tuple(float(p) for p in val.split(",") if p.strip())
        except ValueError as exc:
            raise ConfigError(f"config key '{key}': not a number list: {val!r}") from exc

    def complexes_(self, key, default=_REQUIRED) -> Optional[Tuple[complex, ...]]:
        val = self._get(key, default)
        if val is None:
            return None if default is _REQUIRED else default
        try:
            return tuple(
                complex(p.replace(" ", "")) for p in val.split(",") if p.strip()
            )
        except ValueError as exc:
            raise ConfigError(f"config key '{key}': not a complex list: {val!r}") from exc

    def finish(self):
        """Reject config keys no handler consumed."""
        extra = sorted(set(self.raw) - self._used)
        if extra:
            raise ConfigError(f"unrecognized config key '{extra[0]}'")


# --------------------------------------------------------------------------
# domain-object builders
# --------------------------------------------------------------------------


def build_bath(cfg: RunConfig) -> SpectralBath:
    return SpectralBath(
        m=cfg.int_("bath.m"),
        gamma_hat=cfg.float_("bath.gamma_hat"),
        w_D=cfg.float_("bath.w_D"),
        beta=cfg.float_("bath.beta"),
    )


def build_pointer(cfg: RunConfig, bath: SpectralBath) -> PointerSpec:
    mass = cfg.float_("pointer.mass", 1.0)
    v2 = cfg.float_("pointer.v2", None)
    d_class = cfg.float_("pointer.delta_class", None)
    if cfg.bool_("pointer.equilibrium"):
        if v2 is None:
            raise ConfigError("pointer.equilibrium requires pointer.v2")
        return deco.equilibrium_pointer(bath, mass=mass, v2=v2, delta_class=d_class)
    delta = cfg.float_("pointer.delta", 1.0)
    lam = cfg.float_("pointer.lam", 4.0 * math.pi * delta)
    if v2 is None:
        v2 = 1.0 / (4.0 * delta**4)  # squeeze ratio exactly 1 for lam = 4 pi delta
    return PointerSpec(delta=delta, lam=lam, mass=mass, v2=v2, delta_class=d_class)


def build_object(cfg: RunConfig, pair: Optional[Tuple[float, float]] = None) -> ObjectSpec:
    evs = cfg.floats_("object.eigenvalues", None)
    if evs is None:
        evs = pair if pair is not None else (-0.5, 0.5)
    n = len(evs)
    rho_flat = cfg.complexes_("object.rho_s", None)
    if rho_flat is None:
        # equal-weight pure superposition of all levels
        rho = np.full((n, n), 1.0 / n, dtype=complex)
    else:
        if len(rho_flat) != n * n:
            raise ConfigError(
                f"config key 'object.rho_s': expected {n * n} entries, got {len(rho_flat)}"
            )
        rho = np.array(rho_flat, dtype=complex).reshape(n, n)
    energies = cfg.floats_("object.energies", None)
    return ObjectSpec(eigenvalues=tuple(evs), rho_s=rho, energies=energies)


def read_pair(cfg: RunConfig, default=None) -> Optional[Tuple[float, float]]:
    s = cfg.float_("pair.s", None)
    sp = cfg.float_("pair.s_prime", None)
    if s is None and sp is None:
        return default
    if s is None or sp is None:
        raise ConfigError("pair.s and pair.s_prime must be given together")
    return (s, sp)


def build_setup(cfg: RunConfig, pair=None) -> MeasurementSetup:
    bath = build_bath(cfg)
    pointer = build_pointer(cfg, bath)
    obj = build_object(cfg, pair)
    variant_name = cfg.str_("setup.variant", "partial_equilibrium")
    try:
        variant = Variant(variant_name)
    except ValueError as exc:
        raise ConfigError(
            f"config key 'setup.variant': unknown variant {variant_name!r}"
        ) from exc
    return MeasurementSetup(
        epsilon=cfg.float_("setup.epsilon"),
        alpha=cfg.int_("setup.alpha"),
        object=obj,
        pointer=pointer,
        bath=bath,
        variant=variant,
        t_s=cfg.float_("setup.t_s", math.inf),
    )


@dataclass(frozen=True)
class SweepAxis:
    variable: str
    scale: str
    values: np.ndarray


def build_sweep(cfg: RunConfig, command: str, allowed: Sequence[str]) -> SweepAxis:
    var = cfg.str_("sweep.variable")
    if var not in _SWEEP_VARIABLES:
        raise ConfigError(
            f"config key 'sweep.variable': unrecognized variable {var!r} "
            f"(expected one of {', '.join(_SWEEP_VARIABLES)})"
        )
    if var not in allowed:
        raise ConfigError(
            f"config key 'sweep.variable': '{var}' is not supported by {command}"
        )
    scale = cfg.str_("sweep.scale", "linear")
    if scale not in ("linear", "log"):
        raise ConfigError("config key 'sweep.scale': expected 'linear' or 'log'")
    start = cfg.float_("sweep.start")
    stop = cfg.float_("sweep.stop")
    count = cfg.int_("sweep.count")
    if count < 2:
        raise ConfigError("config key 'sweep.count': need at least 2 points")
    if not start < stop:
        raise ConfigError("config key 'sweep.start': start must be < stop")
    if scale == "log":
        if start <= 0:
            raise ConfigError("config key 'sweep.start': log scale needs start > 0")
        values = np.geomspace(start, stop, count)
    else:
        values = np.linspace(start, stop, count)
    return SweepAxis(var, scale, values)


# --------------------------------------------------------------------------
# output plumbing
# --------------------------------------------------------------------------


def _g17(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    return f"{f:.17g}"


def _meta_block(cfg: RunConfig, command: str, extra=(), seeded=False) -> List[str]:
    lines = [f"decometer {__version__}", f"command: {command}"]
    for key in sorted(cfg.raw):
        lines.append(f"config: {key} = {cfg.raw[key]}")
    if seeded:
        lines.append(f"seed: {cfg.seed}")
    lines.extend(extra)
    return lines


def write_csv(path, meta, names, rows):
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(_g17(cell) for cell in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _pool_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))  # map preserves input order


def _announce(path):
    print(path)


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------


def cmd_bath_table(cfg: RunConfig) -> int:
    bath = build_bath(cfg)
    axis = build_sweep(cfg, "bath-table", ("t",))
    cfg.finish()

    def one(t):
        h = bath_mod.h_t(bath, float(t))
        return (float(t), h.real, h.imag, bath_mod.gamma_t(bath, float(t)))

    rows = _pool_map(one, axis.values, cfg.threads)
    meta = _meta_block(
        cfg,
        "bath-table",
        extra=[
            f"gamma0 = {_g17(bath_mod.gamma0(bath))}",
            f"b_variance = {_g17(bath_mod.b_variance(bath))}",
            f"t_B = {_g17(bath.t_B)}",
            f"T_B = {_g17(bath.T_B)}",
        ],
    )
    path = write_csv(
        cfg.out_prefix + "_bath_table.csv", meta, ("t", "re_h", "im_h", "gamma_t"), rows
    )
    _announce(path)
    if "svg" in cfg.formats:
        ts = [r[0] for r in rows]
        svg = cfg.out_prefix + "_bath_table.svg"
        _svg.line_plot(
            svg,
            [
                _svg.Curve(ts, [r[1] for r in rows], label="Re h"),
                _svg.Curve(ts, [r[2] for r in rows], label="Im h"),
                _svg.Curve(ts, [r[3] for r in rows], label="gamma"),
            ],
            title="bath correlator",
            xlabel="t",
            ylabel="h(t), gamma(t)",
            xlog=axis.scale == "log",
        )
        _announce(svg)
    return 0


def cmd_dpeak(cfg: RunConfig) -> int:
    pair = read_pair(cfg)
    if pair is None:
        raise ConfigError("dpeak requires pair.s and pair.s_prime")
    s, sp = pair
    setup = build_setup(cfg, pair)
    axis = build_sweep(cfg, "dpeak", ("t",))
    cfg.finish()
    if sp**setup.alpha == s**setup.alpha:
        raise DecoherenceFreeError(
            f"pair ({s:g}, {sp:g}) is decoherence-free for alpha = {setup.alpha}"
        )
    if axis.values[0] < 0:
        raise ConfigError("dpeak sweep times must be >= 0")

    scale = setup.bath.w_D if setup.bath.zero_temperature else 1.0 / setup.bath.beta
    tau_name = "w_D_t" if setup.bath.zero_temperature else "t_over_T_B"

    def one(t):
        return (float(t), float(t) * scale, deco.d_peak(setup, s, sp, float(t)))

    rows = _pool_map(one, axis.values, cfg.threads)
    meta = _meta_block(cfg, "dpeak")
    path = write_csv(cfg.out_prefix + "_dpeak.csv", meta, ("t", tau_name, "d_peak"), rows)
    _announce(path)
    if "svg" in cfg.formats:
        svg = cfg.out_prefix + "_dpeak.svg"
        log = axis.scale == "log"
        _svg.line_plot(
            svg,
            [_svg.Curve([r[1] for r in rows], [r[2] for r in rows], label="D_peak")],
            title="peak decoherence exponent",
            xlabel=tau_name,
            ylabel="D_peak",
            xlog=log,
            ylog=log,
        )
        _announce(svg)
    return 0


def _parse_cases(cfg: RunConfig) -> List[Tuple[int, int, Optional[float]]]:
    """``cases = 1:1, 1:3, 2:3:10`` -> (alpha, m[, w_D override]) triples."""
    raw = cfg.str_("cases")
    cases = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) not in (2, 3):
            raise ConfigError(f"config key 'cases': expected alpha:m[:w_D], got {part!r}")
        try:
            alpha, m = int(bits[0]), int(bits[1])
            wd = float(bits[2]) if len(bits) == 3 else None
        except ValueError as exc:
            raise ConfigError(f"config key 'cases': bad case {part!r}") from exc
        cases.append((alpha, m, wd))
    if not cases:
        raise ConfigError("config key 'cases': no cases given")
    return cases


def _case_tag(alpha, m, wd):
    return f"a{alpha}m{m}" + (f"wd{wd:g}" if wd is not None else "")


def cmd_tdec_sweep(cfg: RunConfig) -> int:
    axis = build_sweep(cfg, "tdec-sweep", ("tau_ent", "eta"))
    cases = _parse_cases(cfg)
    beta = cfg.float_("bath.beta", 1.0)
    w_d_default = cfg.float_("bath.w_D", 5.0)
    fixed_eta = cfg.float_("eta", None)
    fixed_tau = cfg.float_("tau_ent", None)
    if axis.variable == "tau_ent" and fixed_eta is None:
        raise ConfigError("sweeping tau_ent requires the fixed coupling key 'eta'")
    if axis.variable == "eta" and fixed_tau is None:
        raise ConfigError("sweeping eta requires the fixed key 'tau_ent'")
    cfg.finish()

    zero_t = math.isinf(beta)
    delta = 1.0
    pointer = PointerSpec(delta=delta, lam=4.0 * math.pi, mass=1.0, v2=0.25)
    obj = ObjectSpec(eigenvalues=(0.0, 1.0), rho_s=np.full((2, 2), 0.5))

    unit_var: Dict[Tuple[int, float], float] = {}
    for _, m, wd in cases:
        key = (m, wd if wd is not None else w_d_default)
        if key not in unit_var:
            unit_var[key] = bath_mod.b_variance(SpectralBath(key[0], 1.0, key[1], beta))

    def one(job):
        value, (alpha, m, wd) = job
        wd = wd if wd is not None else w_d_default
        tau = value if axis.variable == "tau_ent" else fixed_tau
        eta_v = value if axis.variable == "eta" else fixed_eta
        if zero_t:
            target = (eta_v * wd / delta**alpha) ** 2
            t_ent_abs = tau / wd
            time_unit = 1.0 / wd
        else:
            target = (eta_v / (delta**alpha * beta)) ** 2
            t_ent_abs = tau * beta
            time_unit = beta
        bath = SpectralBath(m, target / unit_var[(m, wd)], wd, beta)
        setup = MeasurementSetup(
            epsilon=delta / t_ent_abs, alpha=alpha, object=obj, pointer=pointer, bath=bath
        )
        try:
            exact = deco.t_dec_exact(setup, 0.0, 1.0)
        except SolverError as exc:
            print(
                f"warning: {_case_tag(alpha, m, wd)} at {axis.variable} = {value:g}: {exc}",
                file=sys.stderr,
            )
            exact = math.nan
        t_int = deco.t_dec_interaction(setup, 0.0, 1.0)
        try:
            if zero_t:
                t_mark = deco.t_dec_zero_t_markov(setup, 0.0, 1.0)
            else:
                t_mark = deco.t_dec_markov(setup, 0.0, 1.0)
        except SolverError:
            t_mark = math.nan
        if math.isnan(exact):
            regime = "failed"
        elif exact <= bath.t_B:
            regime = "interaction"
        elif (zero_t and exact * wd >= 2.0) or (not zero_t and exact >= 2.0 * beta):
            regime = "markov"
        else:
            regime = "crossover"
        return (exact / time_unit, exact, t_int / time_unit, t_mark / time_unit, regime)

    jobs = [(v, case) for v in axis.values for case in cases]
    # asymptotes are tabulated everywhere on purpose; silence their
    # validity-window advisories for the whole (possibly threaded) sweep
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        results = _pool_map(one, jobs, cfg.threads)

    names = [axis.variable]
    for alpha, m, wd in cases:
        tag = _case_tag(alpha, m, wd)
        names += [f"tdec_{tag}", f"tdec_abs_{tag}", f"t_int_{tag}", f"t_markov_{tag}", f"regime_{tag}"]
    rows = []
    k = 0
    for v in axis.values:
        row: List = [float(v)]
        for _ in cases:
            row.extend(results[k])
            k += 1
        rows.append(row)

    if all(math.isnan(r[1]) for r in results):
        raise SolverError("every sweep case failed to locate a decoherence time")

    unit_note = "1/w_D" if zero_t else "thermal time beta"
    extra = [f"time unit: {unit_note}"]
    if axis.variable == "tau_ent":
        extra.append(f"fixed eta = {_g17(fixed_eta)}")
    else:
        extra.append(f"fixed tau_ent = {_g17(fixed_tau)}")
    meta = _meta_block(cfg, "tdec-sweep", extra=extra)
    path = write_csv(cfg.out_prefix + "_tdec_sweep.csv", meta, names, rows)
    _announce(path)

    if "svg" in cfg.formats:
        svg = cfg.out_prefix + "_tdec_sweep.svg"
        curves = []
        xs = [r[0] for r in rows]
        for idx, (alpha, m, wd) in enumerate(cases):
            tag = _case_tag(alpha, m, wd)
            base = 1 + 5 * idx
            color = _svg._PALETTE[idx % len(_svg._PALETTE)]
            curves.append(_svg.Curve(xs, [r[base] for r in rows], label=tag, color=color))
            curves.append(_svg.Curve(xs, [r[base + 2] for r in rows], dashed=True, color=color))
            curves.append(_svg.Curve(xs, [r[base + 3] for r in rows], dashed=True, color=color))
        _svg.line_plot(
            svg,
            curves,
            title="decoherence time (solid: exact, dashed: asymptotes)",
            xlabel=axis.variable,
            ylabel="t_dec",
            xlog=True,
            ylog=True,
        )
        _announce(svg)
    return 0


def _refined_peak(xs: np.ndarray, dens: np.ndarray) -> float:
    k = int(np.argmax(dens))
    if 0 < k < xs.size - 1:
        y0, y1, y2 = dens[k - 1], dens[k], dens[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            return float(xs[k] + 0.5 * (y0 - y2) / denom * (xs[k] - xs[k - 1]))
    return float(xs[k])


def cmd_evolve(cfg: RunConfig) -> int:
    setup = build_setup(cfg)
    times = cfg.floats_("times")
    if not times:
        raise ConfigError("config key 'times': no times given")
    if any(t < 0 for t in times):
        raise ConfigError("config key 'times': times must be >= 0")
    n = cfg.int_("grid.n", 129)
    margin = cfg.float_("grid.margin", 4.0)
    cfg.finish()

    def one(t):
        grid = dynamics.default_x_grid(setup, t, n=n, margin=margin)
        return dynamics.grid_state(setup, t, grid)

    states = _pool_map(one, times, cfg.threads)

    evs = setup.object.eigenvalues
    n_lvl = len(evs)
    summary_rows = []
    for k, (t, state) in enumerate(zip(times, states)):
        rows = []
        xs = state.x_grid
        for i in range(n_lvl):
            for j in range(n_lvl):
                block = state.elements[(i, j)]
                for a in range(xs.size):
                    for b in range(xs.size):
                        rows.append(
                            (xs[a], xs[b], i, j, block[a, b].real, block[a, b].imag)
                        )
        meta = _meta_block(cfg, "evolve", extra=[f"t = {_g17(t)}"])
        path = write_csv(
            f"{cfg.out_prefix}_evolve_t{k}.csv",
            meta,
            ("x", "x_prime", "i", "j", "re", "im"),
            rows,
        )
        _announce(path)

        peaks = [
            _refined_peak(xs, np.diagonal(state.elements[(i, i)]).real)
            for i in range(n_lvl)
        ]
        diag_peak = max(
            float(np.max(np.abs(state.elements[(i, i)]))) for i in range(n_lvl)
        )
        offdiag = 0.0
        for i in range(n_lvl):
            for j in range(n_lvl):
                if i != j:
                    offdiag = max(offdiag, float(np.max(np.abs(state.elements[(i, j)]))))
        row: List = [t]
        row.extend(peaks)
        for i in range(n_lvl):
            for j in range(i + 1, n_lvl):
                row.append(abs(peaks[j] - peaks[i]))
                row.append(setup.epsilon * t * abs(evs[j] - evs[i]))
        row.extend([offdiag, diag_peak, offdiag / diag_peak])
        summary_rows.append(row)

    names = ["t"]
    names += [f"peak_x_{i}" for i in range(n_lvl)]
    for i in range(n_lvl):
        for j in range(i + 1, n_lvl):
            names += [f"sep_{i}{j}", f"expected_sep_{i}{j}"]
    names += ["max_offdiag", "diag_peak", "coherence_ratio"]
    meta = _meta_block(cfg, "evolve")
    path = write_csv(cfg.out_prefix + "_evolve_summary.csv", meta, names, summary_rows)
    _announce(path)
    return 0


def cmd_wigner(cfg: RunConfig) -> int:
    setup = build_setup(cfg)
    t = cfg.float_("time")
    n = cfg.int_("grid.n", 257)
    # default margin 6: a 4-sigma window clips ~6e-5 of Gaussian tail mass,
    # which alone would break the 1e-5 normalization report
    margin = cfg.float_("grid.margin", 6.0)
    cfg.finish()
    if t < 0:
        raise ConfigError("config key 'time': time must be >= 0")

    x_grid = dynamics.default_x_grid(setup, t, n=n, margin=margin)
    wg = dynamics.wigner(setup, t, x_grid=x_grid)
    norm = wg.normalization()
    w_max = float(np.max(wg.w))
    delta_p = 2.0 * math.pi / setup.pointer.lam
    x_units = wg.x_grid / (0.5 * setup.pointer.delta)
    p_units = wg.p_grid / delta_p
    w_scaled = wg.w / w_max

    meta = _meta_block(
        cfg,
        "wigner",
        extra=[
            f"t = {_g17(t)}",
            f"norm_integral = {_g17(norm)}",
            f"w_max = {_g17(w_max)}",
            f"delta_p = {_g17(delta_p)}",
            "x in units of delta/2; p in units of delta_p; W scaled to max 1",
            "x_over_half_delta: " + ",".join(_g17(v) for v in x_units),
            "p_over_delta_p: " + ",".join(_g17(v) for v in p_units),
        ],
    )
    names = ["x_over_half_delta"] + [f"w_{j}" for j in range(p_units.size)]
    rows = [
        [x_units[i]] + [w_scaled[i, j] for j in range(p_units.size)]
        for i in range(x_units.size)
    ]
    path = write_csv(cfg.out_prefix + "_wigner.csv", meta, names, rows)
    _announce(path)
    if "svg" in cfg.formats:
        svg = cfg.out_prefix + "_wigner.svg"
        _svg.heat_map(
            svg,
            x_units,
            p_units,
            w_scaled,
            title=f"Wigner function, t = {t:g}",
            xlabel="x / (delta/2)",
            ylabel="p / delta_p",
        )
        _announce(svg)
    return 0


def _wick_cases(fb, rng):
    """(name, error, tolerance) triples covering every oracle invariant."""
    out = []
    ts = (0.4, 1.3)

    def rel(a, b):
        return abs(a - b) / max(abs(b), 1e-300)

    err = max(abs(wo.exact_h(fb, complex(-t, -fb.beta)) - wo.exact_h(fb, t)) for t in (0.0, 0.9, 2.4))
    out.append(("kms_continuation", err, 1e-12))
    err = max(abs(wo.exact_h(fb, -t) - np.conj(wo.exact_h(fb, t))) for t in ts)
    out.append(("hermiticity", err, 1e-13))
    err = max(rel(wo.npoint_numeric(fb, [t, 0.0]), wo.exact_h(fb, t)) for t in ts)
    out.append(("two_point_trace", err, 1e-6))
    out.append(("odd_moment", abs(wo.npoint_numeric(fb, [0.3, 0.1, -0.4])), 1e-10))
    for npts in (2, 4, 6):
        times = rng.uniform(-1.0, 1.0, size=npts)
        err = rel(wo.npoint_numeric(fb, times), wo.npoint_pairing(fb, times))
        out.append((f"wick_n{npts}", err, 1e-6))

    t_drive = 1.2
    ls = rng.uniform(-0.4, 0.4, size=6)
    ks = rng.uniform(-0.4, 0.4, size=6)
    out.append(
        ("char_unity", abs(wo.char_functional_numeric(fb, ls, ls, t_drive) - 1.0), 1e-12)
    )
    closed = wo.char_functional_closed(fb, ks, ls, t_drive)
    numeric = wo.char_functional_numeric(fb, ks, ls, t_drive)
    out.append(("char_closed_vs_numeric", rel(numeric, closed), 1e-6))
    err = max(
        rel(wo.char_functional_numeric(fb, ks, ls, t_drive, y_alpha=y), numeric)
        for y in (0.5, -1.1)
    )
    out.append(("char_shift_independence", err, 1e-6))

    err = max(
        rel(wo.shifted_mean_b(fb, y, tau), -2.0 * y * wo.gamma_modes(fb, tau))
        for y, tau in ((0.7, 0.0), (0.7, 0.9), (-1.2, 1.7))
    )
    out.append(("shifted_mean", err, 1e-6))
    g0 = wo.gamma0_modes(fb)
    err = max(
        rel(wo.partition_ratio(fb, y), math.exp(y**2 * fb.beta * g0)) for y in (0.6, 1.3)
    )
    out.append(("partition_ratio", err, 1e-6))
    return out


def cmd_wick_check(cfg: RunConfig) -> int:
    freqs = cfg.floats_("wick.freqs", (1.0, 1.9))
    coups = cfg.complexes_("wick.couplings", (0.8 + 0.0j, 0.6 + 0.3j))
    beta = cfg.float_("wick.beta", 2.5)
    cutoff = cfg.int_("wick.cutoff", 12)
    cfg.finish()
    if math.isinf(beta):
        raise ConfigError("wick-check requires a finite beta")
    fb = wo.FiniteBosonBath(
        freqs=tuple(freqs), couplings=tuple(coups), beta=beta, fock_cutoff=cutoff
    )
    rng = np.random.default_rng(cfg.seed)
    cases = _wick_cases(fb, rng)
    rows = [
        (name, err, tol, "pass" if err < tol else "FAIL") for name, err, tol in cases
    ]
    n_pass = sum(1 for r in rows if r[3] == "pass")
    meta = _meta_block(
        cfg,
        "wick-check",
        extra=[
            f"modes = {len(freqs)}, cutoff = {cutoff}, dimension = {fb.dimension}",
            f"result: {n_pass}/{len(rows)} passed",
        ],
        seeded=True,
    )
    path = write_csv(
        cfg.out_prefix + "_wick_check.csv", meta, ("case", "error", "tol", "status"), rows
    )
    _announce(path)
    print(f"wick-check: {n_pass}/{len(rows)} passed")
    return 0 if n_pass == len(rows) else 1


def _si_macroscopic_report() -> List[str]:
    # the one place SI constants enter; everything else is natural units
    from scipy.constants import hbar, k

    t_p, mass, d_class, temp = 1.0, 1e-3, 1e-2, 1.0
    beta = 1.0 / (k * temp)
    lam_th = 2.0 * math.pi * hbar * math.sqrt(beta / mass)
    v2 = mass / t_p**2
    d_th = math.sqrt(k * temp / v2)
    gap1 = math.log10(d_th / lam_th)
    gap2 = math.log10(d_class / d_th)
    span = math.log10(d_class / lam_th)
    return [
        "SI preset: T_P = 1 s, M = 1 g, Delta_class = 1 cm, T = 1 K",
        f"lambda_th = 2 pi hbar sqrt(beta/M) = {lam_th:.6g} m",
        f"Delta_th = sqrt(k_B T / v2) = {d_th:.6g} m  (v2 = M / T_P^2)",
        f"Delta_class = {d_class:.6g} m",
        f"adjacent gaps: {gap1:.2f} and {gap2:.2f} orders of magnitude",
        "hierarchy lambda_th << Delta_th << Delta_class spans "
        f"{span:.2f} orders of magnitude",
    ]


def cmd_validate(cfg: RunConfig) -> int:
    preset = cfg.str_("preset", None)
    lines: List[str] = []
    build_model = True
    if preset is not None:
        if preset != "si_macroscopic":
            raise ConfigError(f"config key 'preset': unknown preset {preset!r}")
        lines.extend(_si_macroscopic_report())
        build_model = any(key.startswith("bath.") for key in cfg.raw)
    if build_model:
        setup = build_setup(cfg)
        cfg.finish()
        report = deco.validate_setup(setup)
        lines.extend(report.lines())
        if not setup.bath.zero_temperature:
            l_th = deco.lambda_th(setup.bath, setup.pointer.mass)
            d_th = deco.delta_th(setup.bath, setup.pointer.v2)
            tail = (
                f" << Delta_class = {setup.pointer.delta_class:.6g}"
                if setup.pointer.delta_class is not None
                else ""
            )
            lines.append(
                f"hierarchy: lambda_th = {l_th:.6g} << Delta_th = {d_th:.6g}{tail}"
            )
    else:
        cfg.finish()
    print("\n".join(lines))
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

_HANDLERS = {
    "bath-table": cmd_bath_table,
    "dpeak": cmd_dpeak,
    "tdec-sweep": cmd_tdec_sweep,
    "evolve": cmd_evolve,
    "wigner": cmd_wigner,
    "wick-check": cmd_wick_check,
    "validate": cmd_validate,
}

_HELP = {
    "bath-table": "tabulate the bath correlator h(t) and friction kernel gamma(t)",
    "dpeak": "peak decoherence exponent D_peak(t) for one eigenvalue pair",
    "tdec-sweep": "decoherence times vs entanglement time or coupling strength",
    "evolve": "object-pointer density-matrix grids and peak geometry vs time",
    "wigner": "pointer Wigner function on a phase-space grid",
    "wick-check": "run the finite-bath oracle invariant suite",
    "validate": "validity diagnostics and scale hierarchy for a setup",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decometer",
        description="decoherence and entanglement time scales of a quantum measurement",
    )
    parser.add_argument("--version", action="version", version=f"decometer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        sp = sub.add_parser(name, help=_HELP[name])
        sp.add_argument("--config", required=True, help="flat key = value config file")
        sp.add_argument("--out", default="decometer", help="output path prefix")
        sp.add_argument("--format", default="csv", help="csv or csv,svg")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    return parser


def _resolve_threads(arg: Optional[int]) -> int:
    if arg is None:
        env = os.environ.get("DECOMETER_THREADS", "1")
        try:
            arg = int(env)
        except ValueError as exc:
            raise ConfigError(f"DECOMETER_THREADS: not an integer: {env!r}") from exc
    if arg < 1:
        raise ConfigError("thread count must be >= 1")
    return arg


def _resolve_formats(arg: str) -> Tuple[str, ...]:
    parts = {p.strip() for p in arg.split(",") if p.strip()}
    bad = parts - {"csv", "svg"}
    if bad:
        raise ConfigError(f"unknown output format '{sorted(bad)[0]}'")
    return tuple(sorted(parts | {"csv"}))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            raw=load_config(args.config),
            out_prefix=args.out,
            formats=_resolve_formats(args.format),
            threads=_resolve_threads(args.threads),
            seed=args.seed,
        )
        return _HANDLERS[args.command](cfg)
    except DecometerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
