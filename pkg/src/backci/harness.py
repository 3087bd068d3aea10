"""Configuration, benchmark schemes, Monte Carlo sweeps, CSV emission.

The sweep engine regenerates channels per (sweep value, trial) from a
deterministic seed tree, runs each requested algorithm, and emits one CSV
row per algorithm.  Rows are sorted before writing, so output bytes do not
depend on worker scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional

import numpy as np

from .beamforming import BeamformerSolution, divergence_floors, \
    mmse_beamformer
from .channel import SystemParams, gen_channel_set
from .detection import detection_stats, kld_threshold
from .numerics import big_f
from .selection import SelectionResult, greedy_select, random_select
from .siso import theta_max_at_min_snr

SWEEP_VARS = ("sigma_s2", "rho", "M", "Q", "zeta_max")
ALGORITHMS = ("consensual", "evolved", "harmful_dli", "canceled_dli",
              "random_sel")
CSV_HEADER = ("sweep_var,value,trial,algorithm,selected_tag,snr_db,"
              "kld_with,kld_without,dep_bound_with,dep_bound_without,"
              "feasible,iterations")
REGION_HEADER = "var,value,gamma_lo,gamma_hi,theta_max"

_INT_VARS = ("M", "Q")


@dataclass
class SweepConfig:
    """One Monte Carlo sweep: which knob moves, over what values, how often."""

    sweep_var: str = "sigma_s2"
    values: List[float] = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    trials: int = 200
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    base: SystemParams = field(default_factory=SystemParams)
    out_path: Optional[str] = None


@dataclass
class SweepRecord:
    """One CSV row: one algorithm on one (value, trial) cell.

    converged is an internal diagnostic for the CLI's exit code; it is not
    part of the CSV schema.
    """

    sweep_var: str
    value: float
    trial: int
    algorithm: str
    selected_tag: int
    snr_db: float
    kld_with: float
    kld_without: float
    dep_bound_with: float
    dep_bound_without: float
    feasible: bool
    iterations: int
    converged: bool = True


# ---------------------------------------------------------------------------
# Flat key=value configuration
# ---------------------------------------------------------------------------

_PARAM_FIELDS = {f.name for f in fields(SystemParams)}
_INT_KEYS = {"K", "M", "N", "Q", "T", "J", "L", "seed", "trials"}
_FLOAT_KEYS = {"alpha", "sigma_s2", "sigma_w2", "xi_max", "zeta_max",
               "kappa", "rho", "chi", "omega", "d_st", "d_sr", "d_tr",
               "h_sr_mag", "h_str_mag"}
_STR_KEYS = {"sweep_var", "out_path", "region_var"}
_LIST_FLOAT_KEYS = {"values", "region_values"}
_LIST_STR_KEYS = {"algorithms"}
_ALL_KEYS = (_INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_FLOAT_KEYS
             | _LIST_STR_KEYS)


def parse_config(text: str) -> dict:
    """Parse flat key = value lines into a typed dict.

    Blank lines and '#' comments are skipped.  Unknown or repeated keys and
    malformed values raise ValueError (fail loud; a typo must not silently
    fall back to a default).
    """
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, "
                             f"got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        if key in cfg:
            raise ValueError(f"line {lineno}: repeated config key {key!r}")
        try:
            if key in _INT_KEYS:
                cfg[key] = int(val)
            elif key in _FLOAT_KEYS:
                cfg[key] = float(val)
            elif key in _LIST_FLOAT_KEYS:
                cfg[key] = [float(t) for t in val.split(",") if t.strip()]
            elif key in _LIST_STR_KEYS:
                cfg[key] = [t.strip() for t in val.split(",") if t.strip()]
            else:
                cfg[key] = val
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: "
                             f"{val!r}") from exc
    return cfg


def params_from_config(cfg: dict) -> SystemParams:
    """SystemParams with any configured fields overriding the defaults."""
    kw = {k: v for k, v in cfg.items() if k in _PARAM_FIELDS}
    return SystemParams(**kw)


def sweep_from_config(cfg: dict) -> SweepConfig:
    """SweepConfig from a parsed dict; validates variable and algorithms."""
    base = params_from_config(cfg)
    sc = SweepConfig(base=base)
    if "sweep_var" in cfg:
        sc.sweep_var = cfg["sweep_var"]
    if "values" in cfg:
        sc.values = list(cfg["values"])
    if "trials" in cfg:
        sc.trials = cfg["trials"]
    if "algorithms" in cfg:
        sc.algorithms = list(cfg["algorithms"])
    if "out_path" in cfg:
        sc.out_path = cfg["out_path"]
    validate_sweep(sc)
    return sc


def validate_sweep(cfg: SweepConfig) -> None:
    if cfg.sweep_var not in SWEEP_VARS:
        raise ValueError(f"sweep_var must be one of {SWEEP_VARS}, "
                         f"got {cfg.sweep_var!r}")
    if not cfg.values:
        raise ValueError("values must be nonempty")
    diffs = [b - a for a, b in zip(cfg.values, cfg.values[1:])]
    if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ValueError("values must be strictly monotone")
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    bad = [a for a in cfg.algorithms if a not in ALGORITHMS]
    if bad or not cfg.algorithms:
        raise ValueError(f"algorithms must be a nonempty subset of "
                         f"{ALGORITHMS}, got {cfg.algorithms}")
    if cfg.sweep_var in _INT_VARS:
        for v in cfg.values:
            if float(v) != int(v):
                raise ValueError(f"{cfg.sweep_var} values must be integers")
    multi_q = (cfg.sweep_var == "Q" and any(int(v) > 1 for v in cfg.values)
               ) or (cfg.sweep_var != "Q" and cfg.base.Q > 1)
    if multi_q:
        bench = [a for a in cfg.algorithms
                 if a in ("harmful_dli", "canceled_dli")]
        if bench:
            raise ValueError(f"benchmark schemes {bench} are "
                             f"single-transmit only; drop them from a "
                             f"multi-antenna-source sweep")


def _with_value(base: SystemParams, var: str, value: float) -> SystemParams:
    if var in _INT_VARS:
        return replace(base, **{var: int(value)})
    return replace(base, **{var: float(value)})


# ---------------------------------------------------------------------------
# Benchmark schemes
# ---------------------------------------------------------------------------

def run_benchmark(chans, params, scheme: str) -> SelectionResult:
    """Closed-form benchmark schemes, greedy over tags.

    harmful_dli keeps the direct link and treats it as interference: per
    tag the receive filter is the MMSE solution and the objective is its
    output SINR; a tag is feasible when the backscatter power through the
    filter still clears the no-DL detection floor.  canceled_dli assumes
    ideal DL cancellation: matched filter on the backscatter channel,
    objective gamma * ||h_str||^2, same floor.
    """
    if scheme not in ("harmful_dli", "canceled_dli"):
        raise ValueError(f"unknown benchmark scheme {scheme!r}")
    gamma = params.gamma
    _d, e_min, _fw, f_without = divergence_floors(params)
    zeros = None
    per_tag = []
    for k in range(params.K):
        h0, h1, hs = chans.tag_channels(k)
        if hs.ndim > 1:
            raise ValueError("benchmark schemes are single-transmit only")
        if zeros is None:
            zeros = np.zeros_like(h0)
        if scheme == "harmful_dli":
            v = mmse_beamformer(h0, hs, params.sigma_s2, params.sigma_w2)
            sig = params.sigma_s2 * abs(np.vdot(v, hs)) ** 2
            intf = params.sigma_s2 * abs(np.vdot(v, h0)) ** 2
            objective = sig / (intf + params.sigma_w2)
            feasible = gamma * abs(np.vdot(v, hs)) ** 2 \
                >= f_without - 1.0 - 1e-12
            stats = detection_stats(v, h0, h1, hs, params.sigma_s2,
                                    params.sigma_w2, params.N)
        else:
            v = hs / np.linalg.norm(hs)
            objective = gamma * float(np.vdot(hs, hs).real)
            stats = detection_stats(v, zeros, hs, hs, params.sigma_s2,
                                    params.sigma_w2, params.N)
            feasible = stats.kld_without >= e_min - 1e-6
        per_tag.append(BeamformerSolution(v=v, snr=float(objective),
                                          feasible=bool(feasible),
                                          iterations=0, stats=stats))
    best_idx = 0
    for k, sol in enumerate(per_tag):
        if not sol.feasible:
            continue
        if best_idx == 0 or sol.snr > per_tag[best_idx - 1].snr:
            best_idx = k + 1
    return SelectionResult(selected_tag=best_idx, per_tag=per_tag,
                           best=per_tag[best_idx - 1] if best_idx else None)


# ---------------------------------------------------------------------------
# Sweep engine
# ---------------------------------------------------------------------------

def _record_from(cfg_var, value, trial, algorithm,
                 res: SelectionResult) -> SweepRecord:
    if res.best is None:
        return SweepRecord(sweep_var=cfg_var, value=value, trial=trial,
                           algorithm=algorithm, selected_tag=0,
                           snr_db=math.nan, kld_with=math.nan,
                           kld_without=math.nan, dep_bound_with=math.nan,
                           dep_bound_without=math.nan, feasible=False,
                           iterations=0)
    best = res.best
    st = best.stats
    return SweepRecord(sweep_var=cfg_var, value=value, trial=trial,
                       algorithm=algorithm, selected_tag=res.selected_tag,
                       snr_db=10.0 * math.log10(best.snr),
                       kld_with=st.kld_with, kld_without=st.kld_without,
                       dep_bound_with=st.dep_bound_with,
                       dep_bound_without=st.dep_bound_without,
                       feasible=True, iterations=best.iterations,
                       converged=best.converged)


def _sweep_cell(args) -> List[SweepRecord]:
    """All requested algorithms on one (value, trial) channel draw."""
    base, var, value, value_idx, trial, algorithms = args
    params = _with_value(base, var, value)
    chans = gen_channel_set(
        params, np.random.SeedSequence((params.seed, value_idx, trial)))
    out = []
    for algorithm in algorithms:
        if algorithm in ("consensual", "evolved"):
            res = greedy_select(chans, params, algorithm)
        elif algorithm == "random_sel":
            rng = np.random.default_rng(
                np.random.SeedSequence((params.seed, value_idx, trial, 1)))
            res = random_select(chans, params, "consensual", rng)
        else:
            res = run_benchmark(chans, params, algorithm)
        out.append(_record_from(var, value, trial, algorithm, res))
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def record_row(r: SweepRecord) -> str:
    return ",".join([r.sweep_var, _fmt(r.value), _fmt(r.trial), r.algorithm,
                     _fmt(r.selected_tag), _fmt(r.snr_db), _fmt(r.kld_with),
                     _fmt(r.kld_without), _fmt(r.dep_bound_with),
                     _fmt(r.dep_bound_without), _fmt(r.feasible),
                     _fmt(r.iterations)])


def write_csv(records: List[SweepRecord], path: str) -> None:
    lines = [CSV_HEADER] + [record_row(r) for r in records]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_sweep(cfg: SweepConfig, workers: int = 1) -> List[SweepRecord]:
    """Run the full sweep; returns sorted records, writes CSV if configured.

    Channels for cell (value_idx, trial) are keyed by (seed, value_idx,
    trial), so records are identical for a fixed config no matter how many
    workers share the grid or in which order cells finish.
    """
    validate_sweep(cfg)
    cells = [(cfg.base, cfg.sweep_var, value, vi, trial,
              tuple(cfg.algorithms))
             for vi, value in enumerate(cfg.values)
             for trial in range(cfg.trials)]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_cell, cells, chunksize=8))
    else:
        chunks = [_sweep_cell(c) for c in cells]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (float(r.value), r.trial, r.algorithm))
    if cfg.out_path:
        write_csv(records, cfg.out_path)
    return records


# ---------------------------------------------------------------------------
# SISO region report
# ---------------------------------------------------------------------------

def ci_region_report(var: str, values, params: SystemParams,
                     h_sr_mag: float = 1.0, h_str_mag: float = 1.0,
                     out_path: Optional[str] = None) -> list:
    """Tabulate the scalar CI region across a grid of zeta_max or rho.

    Only channel magnitudes are configured, so the reported gamma_hi is the
    best case over the relative phase, 2/(|h_sr| |h_str|); gamma_lo and the
    CI angle depend on magnitudes alone.  For var = "rho" the magnitudes
    are unit-distance values scaled by the configured link distances
    (default 3 m each, the midpoint of the drawing range) raised to
    -rho/2 per hop, with the tag attenuation applied to the cascade.

    Returns rows (var, value, gamma_lo, gamma_hi, theta_max) and writes
    them as CSV when out_path is given; theta_max is NaN where no angle is
    constructive.
    """
    if var not in ("zeta_max", "rho"):
        raise ValueError("region variable must be zeta_max or rho")
    if not len(values):
        raise ValueError("values must be nonempty")
    rows = []
    for value in values:
        if var == "zeta_max":
            g_min = kld_threshold(float(value)) / params.N + 1.0
            sr_mag, str_mag = h_sr_mag, h_str_mag
        else:
            g_min = kld_threshold(params.zeta_max) / params.N + 1.0
            d_sr = params.d_sr if params.d_sr is not None else 3.0
            d_st = params.d_st if params.d_st is not None else 3.0
            d_tr = params.d_tr if params.d_tr is not None else 3.0
            sr_mag = h_sr_mag * d_sr ** (-float(value) / 2.0)
            str_mag = (params.alpha * h_str_mag
                       * (d_st * d_tr) ** (-float(value) / 2.0))
        gamma_lo = (big_f(g_min) - 1.0) / str_mag ** 2
        gamma_hi = 2.0 / (sr_mag * str_mag)
        theta = theta_max_at_min_snr(sr_mag, str_mag, g_min)
        rows.append((var, float(value), gamma_lo, gamma_hi,
                     math.nan if theta is None else theta))
    if out_path:
        lines = [REGION_HEADER]
        for v, val, lo, hi, th in rows:
            lines.append(",".join([v, _fmt(val), _fmt(lo), _fmt(hi),
                                   _fmt(th)]))
        with open(out_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return rows
