"""Config-driven experiment presets that emit plot-ready tables.

A config is a flat JSON object.  ``experiment`` picks the preset; every other
key overrides one of the preset's defaults, and unknown keys are rejected.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import operators as ops
from .dynamics import (Channel, codeword_blocks, fidelity_from_blocks, ket_to_dm,
                       photon_loss_channel)
from .gates import (TWO_MODE_MAX_DIM, GateSchedule, prepare_cat_circuit, two_mode_dim,
                    zrot_protocol, zz_protocol)
from .operators import CodeParams
from .qec import qec_cycle, single_cycle_transfer, st_circuit_channel, transfer_prediction
from .readout import PROTOCOLS, ReadoutConfig, perr, scaling_fit
from .states import (MAX_DIM, default_wigner_grid, fock, logical_computational, required_dim,
                     sc_state, wigner)
from .subsystem import build_sdf_basis, gauge_populations

MAX_DIM_ENV = "SCQEC_MAX_DIM"


class ConfigError(ValueError):
    """The config is inconsistent; ``errors`` lists ``{"field", "message"}`` records."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{e['field']}: {e['message']}" for e in self.errors))


def _grid(start, stop, step):
    return [round(v, 10) for v in np.arange(start, stop + step / 2, step)]


PRESETS = {
    "fig3": dict(nbar=5.0, r_grid=_grid(0.4, 1.5, 0.1), kappa_t=0.01, m_list=[0, 5, 10, 15]),
    "figS1": dict(alpha=1.5, r_grid=_grid(0.4, 1.6, 0.2), kappa_t=0.01, m_list=[0, 10, 20, 30]),
    "fig4": dict(alpha_grid=[1.0, 1.4, 1.8, 2.2, 2.6, 3.0], r_grid=[1.3, 1.5, 1.7, 2.0, 2.3]),
    "fig6": dict(r=1.0, alpha_prime_grid=[3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0],
                 protocols=list(PROTOCOLS)),
    "limitation": dict(alpha=2.3, r=1.2, m=50),
    "zrot": dict(alpha=2.0, r=1.0, total_angle=6 * math.pi, n_steps=48, qec_cycles_per_step=1,
                 baseline=True),
    "zzrot": dict(alpha=2.0, r=1.0, total_angle=math.pi, n_steps=16, qec_cycles_per_step=1,
                  theta=1.0, discard=1e-5, baseline=False),
    "wigner": dict(alpha=2.0, r=1.0, state="sc+", points=161),
    "custom": dict(alpha=2.0, r=1.0, initial="sc+", pipeline=[{"loss": 0.01}, {"qec": 5}]),
}
COMMON_KEYS = {"experiment", "truncation", "output"}
PIPELINE_OPS = ("loss", "qec", "sharpen", "trim", "displace")
INITIAL_STATES = ("sc+", "sc-", "zero", "one", "vacuum", "cat")


def list_experiments() -> list[str]:
    return list(PRESETS)


def max_dim_cap(env=None) -> int | None:
    env = os.environ if env is None else env
    raw = env.get(MAX_DIM_ENV)
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError([{"field": MAX_DIM_ENV, "message": f"not an integer: {raw!r}"}]) from None
    if cap < 2:
        raise ConfigError([{"field": MAX_DIM_ENV, "message": "must be >= 2"}])
    return cap


def resolve(config: dict) -> dict:
    """Merge a raw config over its preset, or raise :class:`ConfigError`."""
    errors = []
    name = config.get("experiment")
    if name not in PRESETS:
        raise ConfigError([{"field": "experiment", "message": f"unknown experiment {name!r}; choose from {list(PRESETS)}"}])
    preset = PRESETS[name]
    allowed = COMMON_KEYS | set(preset)
    if "alpha" in preset or "nbar" in preset:
        allowed |= {"alpha", "nbar"}
    if "r_grid" in preset:
        allowed.add("r")
    for key in config:
        if key not in allowed:
            errors.append({"field": key, "message": f"not a parameter of {name}"})
    if "alpha" in config and "nbar" in config:
        errors.append({"field": "alpha/nbar", "message": "give exactly one of alpha and nbar"})
    if errors:
        raise ConfigError(errors)
    out = dict(preset)
    if "alpha" in config:
        out.pop("nbar", None)
    if "nbar" in config:
        out.pop("alpha", None)
    out.update(config)
    if "r" in config and "r_grid" in out and "r_grid" not in config:
        out["r_grid"] = [config["r"]]
        out.pop("r")
    return out


def _code_for(cfg: dict, r: float, alpha: float | None = None) -> CodeParams:
    if alpha is not None:
        return CodeParams(alpha, r)
    if "nbar" in cfg:
        return CodeParams.from_nbar(cfg["nbar"], r)
    return CodeParams(cfg["alpha"], r)


def _codes(cfg: dict) -> list[CodeParams]:
    name = cfg["experiment"]
    if name == "fig4":
        return [CodeParams(a, r) for a in cfg["alpha_grid"] for r in cfg["r_grid"]]
    if name == "fig6":
        return [CodeParams.from_alpha_prime(ap, cfg["r"]) for ap in cfg["alpha_prime_grid"]]
    if "r_grid" in cfg:
        return [_code_for(cfg, r) for r in cfg["r_grid"]]
    return [_code_for(cfg, cfg["r"])]


def _number(cfg, key, errors, positive=False, nonneg=False, integer=False):
    v = cfg.get(key)
    ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    if ok and integer:
        ok = float(v).is_integer()
    if ok and positive:
        ok = v > 0
    if ok and nonneg:
        ok = v >= 0
    if not ok:
        kind = "integer" if integer else "number"
        bound = " > 0" if positive else " >= 0" if nonneg else ""
        errors.append({"field": key, "message": f"expected a {kind}{bound}, got {v!r}"})
    return ok


def validate(config: dict, env=None) -> list[dict]:
    """Consistency checks without running anything; returns the list of problems."""
    try:
        cfg = resolve(config)
        cap = max_dim_cap(env)
    except ConfigError as exc:
        return exc.errors
    errors: list[dict] = []
    name = cfg["experiment"]
    for key in ("alpha", "nbar", "r", "kappa_t", "total_angle", "theta", "discard"):
        if key in cfg:
            _number(cfg, key, errors, positive=key in ("alpha", "nbar"), nonneg=key in ("r", "kappa_t", "discard"))
    for key in ("m", "n_steps", "qec_cycles_per_step", "points"):
        if key in cfg:
            _number(cfg, key, errors, positive=key in ("n_steps", "points"), nonneg=True, integer=True)
    for key in ("r_grid", "alpha_grid", "alpha_prime_grid", "m_list"):
        if key in cfg:
            vals = cfg[key]
            if not isinstance(vals, list) or not vals:
                errors.append({"field": key, "message": "expected a non-empty list"})
                continue
            for i, v in enumerate(vals):
                _number({f"{key}[{i}]": v}, f"{key}[{i}]", errors,
                        positive=key in ("alpha_grid", "alpha_prime_grid"), nonneg=True,
                        integer=key == "m_list")
    if "truncation" in cfg:
        _number(cfg, "truncation", errors, positive=True, integer=True)
    if name == "fig6":
        bad = [p for p in cfg["protocols"] if p not in PROTOCOLS]
        if bad:
            errors.append({"field": "protocols", "message": f"unknown protocols {bad}"})
        if len(cfg["alpha_prime_grid"]) < 5:
            errors.append({"field": "alpha_prime_grid", "message": "slope fits need at least 5 points"})
    if name == "wigner" and cfg["state"] not in INITIAL_STATES:
        errors.append({"field": "state", "message": f"choose from {INITIAL_STATES}"})
    if name == "custom":
        if cfg["initial"] not in INITIAL_STATES:
            errors.append({"field": "initial", "message": f"choose from {INITIAL_STATES}"})
        for i, stage in enumerate(cfg["pipeline"]):
            if not isinstance(stage, dict) or len(stage) != 1 or next(iter(stage)) not in PIPELINE_OPS:
                errors.append({"field": f"pipeline[{i}]", "message": f"expected one of {PIPELINE_OPS} as a single-key object"})
    if errors:
        return errors

    if "nbar" in cfg:
        for r in cfg.get("r_grid", [cfg.get("r")]):
            s2 = math.sinh(r) ** 2
            if s2 > cfg["nbar"]:
                errors.append({"field": "nbar", "message": f"sinh^2({r:g}) = {s2:.2f} > nbar = {cfg['nbar']:g}; no real alpha"})
    if errors:
        return errors
    try:
        codes = _codes(cfg)
    except ValueError as exc:
        return [{"field": "code", "message": str(exc)}]

    if name == "zzrot":
        limit = TWO_MODE_MAX_DIM if cap is None else cap
        for code in codes:
            if "truncation" in cfg:
                n2 = int(cfg["truncation"])
                if n2 * n2 > limit:
                    errors.append({"field": "truncation", "message": f"two-mode dimension {n2}^2 = {n2 * n2} exceeds the cap {limit}"})
            else:
                try:
                    two_mode_dim(code, limit)
                except ValueError as exc:
                    errors.append({"field": "truncation", "message": str(exc)})
                except ops.TruncationError as exc:
                    errors.append({"field": "code", "message": str(exc)})
        return errors

    limit = MAX_DIM if cap is None else cap
    if "truncation" in cfg and cfg["truncation"] > limit:
        errors.append({"field": "truncation", "message": f"{cfg['truncation']} exceeds the cap {limit}"})
    elif "truncation" not in cfg:
        for code in codes:
            try:
                need = required_dim(code, _gauge_levels(cfg, code))
            except ops.TruncationError as exc:
                errors.append({"field": "code", "message": str(exc)})
                continue
            if need > limit:
                errors.append({"field": "truncation", "message": f"alpha={code.alpha:g}, r={code.r:g} needs {need} levels, above the cap {limit}"})
    if name == "zrot":
        kick = cfg["total_angle"] / cfg["n_steps"] / (4 * codes[0].alpha)
        if abs(kick) * codes[0].delta > 0.2:
            errors.append({"field": "n_steps", "message": f"step displacement {kick:.3g} too large; use more steps"})
    return errors


def _gauge_levels(cfg: dict, code: CodeParams) -> int:
    if cfg["experiment"] == "fig4":
        return 2
    if cfg["experiment"] == "limitation":
        return _limitation_levels(code) - 1
    if cfg["experiment"] in ("zrot", "custom"):
        return 3
    return 0


# --- results ---------------------------------------------------------------------


@dataclass
class CurveResult:
    name: str
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def write(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        meta = dict(self.metadata, columns=self.columns, n_rows=len(self.rows))
        with open(out_dir / f"{self.name}.json", "w") as fh:
            json.dump(meta, fh, indent=2, default=_json_default)
        return path

    @classmethod
    def read(cls, path) -> "CurveResult":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [tuple(_parse(v) for v in row) for row in reader]
        meta_path = path.with_suffix(".json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return cls(path.stem, columns, rows, meta)


def _parse(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("True", "False"):
        return text == "True"
    return text


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- experiments -------------------------------------------------------------------


def _fidelity_curve_point(args):
    code, kappa_t, m_list, dim = args
    dim = required_dim(code) if dim is None else dim
    words = [sc_state(code, 1, dim).ket, sc_state(code, -1, dim).ket]
    loss = photon_loss_channel(dim, kappa_t)
    cycle = qec_cycle(dim, code)
    blocks = {k: loss.apply(v) for k, v in codeword_blocks(words).items()}
    out = {}
    for m in range(max(m_list) + 1):
        if m in m_list:
            out[m] = fidelity_from_blocks(blocks, words)
        if m < max(m_list):
            blocks = {k: cycle.apply(v) for k, v in blocks.items()}
    return dim, out


def run_fidelity_curves(cfg: dict, workers: int = 1) -> list[CurveResult]:
    """Entanglement fidelity after photon loss and ``m`` correction cycles, per squeezing."""
    codes = _codes(cfg)
    m_list = sorted(set(int(m) for m in cfg["m_list"]))
    jobs = [(c, cfg["kappa_t"], m_list, cfg.get("truncation")) for c in codes]
    rows, dims = [], []
    for code, (dim, fids) in zip(codes, _map(_fidelity_curve_point, jobs, workers)):
        dims.append(dim)
        for m in m_list:
            rows.append((code.r, code.alpha, code.nbar, m, fids[m]))
    return [CurveResult(cfg["experiment"], ["r", "alpha", "nbar", "m", "fidelity"], rows,
                        {"truncation": dims})]


def _transfer_point(args):
    code, dim = args
    dim = required_dim(code, 2) if dim is None else dim
    return dim, single_cycle_transfer(code, 3, dim=dim)


def run_fig4(cfg: dict, workers: int = 1) -> list[CurveResult]:
    codes = _codes(cfg)
    results = _map(_transfer_point, [(c, cfg.get("truncation")) for c in codes], workers)
    rows = [(c.alpha, c.r, c.alpha_prime, pop, transfer_prediction(c)) for c, (_, pop) in zip(codes, results)]
    return [CurveResult("fig4", ["alpha", "r", "alpha_prime", "population", "prediction"], rows,
                        {"truncation": [d for d, _ in results]})]


def _readout_point(args):
    code, protocol, dim = args
    res = perr(ReadoutConfig(code, protocol), dim)
    return res.p_1_given_0, res.p_0_given_1, res.p_err


def run_fig6(cfg: dict, workers: int = 1) -> list[CurveResult]:
    codes = _codes(cfg)
    jobs = [(c, p, cfg.get("truncation")) for p in cfg["protocols"] for c in codes]
    results = _map(_readout_point, jobs, workers)
    rows = [(p, c.alpha, c.r, c.alpha_prime, *res) for (c, p, _), res in zip(jobs, results)]
    slopes = {}
    for p in cfg["protocols"]:
        pts = [(r[3], r[6]) for r in rows if r[0] == p]
        try:
            slopes[p] = scaling_fit(*zip(*pts))
        except ValueError as exc:
            slopes[p] = f"no fit: {exc}"
    columns = ["protocol", "alpha", "r", "alpha_prime", "p_1_given_0", "p_0_given_1", "p_err"]
    return [CurveResult("fig6", columns, rows, {"slopes": slopes})]


def _limitation_levels(code: CodeParams) -> int:
    return math.ceil(code.alpha_prime**2) + 4


def run_limitation(cfg: dict, workers: int = 1) -> list[CurveResult]:
    """Correction from a cat state and from the vacuum, with their gauge-level profiles."""
    code = _codes(cfg)[0]
    levels = _limitation_levels(code)
    dim = cfg.get("truncation") or required_dim(code, levels - 1)
    basis = build_sdf_basis(code, levels, dim)
    plus = basis.column(1, 0)
    cycle = qec_cycle(dim, code)
    vac = ket_to_dm(fock(dim, 0))
    inputs = {"cat": prepare_cat_circuit(code, dim).apply(vac), "vacuum": vac}
    trace_rows, profile_rows = [], []
    for label, rho in inputs.items():
        start = gauge_populations(rho, basis)
        for k in range(int(cfg["m"]) + 1):
            if k:
                rho = cycle.apply(rho)
            trace_rows.append((label, k, float(np.vdot(plus, rho @ plus).real)))
        final = gauge_populations(rho, basis)
        profile_rows.extend((label, n, float(start[n]), float(final[n])) for n in range(levels))
    meta = {"truncation": dim, "alpha_prime_squared": code.alpha_prime**2}
    return [CurveResult("limitation", ["input", "cycle", "fidelity_to_plus"], trace_rows, meta),
            CurveResult("limitation_profile", ["input", "gauge_level", "population_input", "population_final"],
                        profile_rows, meta)]


TRACE_COLUMNS = ["step", "accumulated_angle", "expect_XL", "gauge_pop_1", "fidelity_to_target"]


def run_zrot(cfg: dict, workers: int = 1) -> list[CurveResult]:
    code = _codes(cfg)[0]
    dim = cfg.get("truncation") or required_dim(code, 3)
    schedule = GateSchedule(cfg["total_angle"], int(cfg["n_steps"]), int(cfg["qec_cycles_per_step"]))
    out = [CurveResult("zrot", TRACE_COLUMNS, zrot_protocol(code, schedule, True, dim).rows, {"truncation": dim})]
    if cfg["baseline"]:
        out.append(CurveResult("zrot_noqec", TRACE_COLUMNS, zrot_protocol(code, schedule, False, dim).rows,
                               {"truncation": dim}))
    return out


def run_zzrot(cfg: dict, workers: int = 1) -> list[CurveResult]:
    code = _codes(cfg)[0]
    cap = max_dim_cap() or TWO_MODE_MAX_DIM
    dim = cfg.get("truncation") or two_mode_dim(code, cap)
    schedule = GateSchedule(cfg["total_angle"], int(cfg["n_steps"]), int(cfg["qec_cycles_per_step"]))
    kw = dict(theta=cfg["theta"], dim=dim, max_dim=cap, discard=cfg["discard"])
    meta = {"truncation": dim, "joint_dimension": dim * dim}
    out = [CurveResult("zzrot", TRACE_COLUMNS, zz_protocol(code, schedule, qec=True, **kw).rows, meta)]
    if cfg["baseline"]:
        out.append(CurveResult("zzrot_noqec", TRACE_COLUMNS, zz_protocol(code, schedule, qec=False, **kw).rows, meta))
    return out


def initial_state(code: CodeParams, label: str, dim: int) -> np.ndarray:
    """Density matrix for one of :data:`INITIAL_STATES`."""
    if label in ("sc+", "sc-"):
        return ket_to_dm(sc_state(code, 1 if label == "sc+" else -1, dim).ket)
    if label in ("zero", "one"):
        return ket_to_dm(logical_computational(code, 0 if label == "zero" else 1, dim))
    vac = ket_to_dm(fock(dim, 0))
    if label == "vacuum":
        return vac
    if label == "cat":
        return prepare_cat_circuit(code, dim).apply(vac)
    raise ValueError(f"unknown state {label!r}")


def run_wigner(cfg: dict, workers: int = 1) -> list[CurveResult]:
    code = _codes(cfg)[0]
    dim = cfg.get("truncation") or required_dim(code)
    grid = default_wigner_grid(code, int(cfg["points"]))
    rho = initial_state(code, cfg["state"], dim)
    w = wigner(rho, grid, grid)
    rows = [(float(x), float(p), float(w[i, j])) for i, p in enumerate(grid) for j, x in enumerate(grid)]
    return [CurveResult("wigner", ["x", "p", "wigner"], rows, {"truncation": dim, "shape": [len(grid), len(grid)]})]


def run_custom(cfg: dict, workers: int = 1) -> list[CurveResult]:
    """Apply a pipeline of channels to a start state, tabulating code-space diagnostics after each stage."""
    code = _codes(cfg)[0]
    dim = cfg.get("truncation") or required_dim(code, 3)
    basis = build_sdf_basis(code, 4, dim)
    plus = basis.column(1, 0)
    par = ops.parity(dim).diagonal().real
    rho = initial_state(code, cfg["initial"], dim)
    rows = []

    def record(i, label):
        g = gauge_populations(rho, basis)
        rows.append((i, label, float(np.vdot(plus, rho @ plus).real), float(np.sum(par * rho.diagonal().real)),
                     float(g[0]), float(np.trace(rho).real)))

    record(0, "initial")
    for i, stage in enumerate(cfg["pipeline"], start=1):
        op, arg = next(iter(stage.items()))
        if op == "loss":
            ch = photon_loss_channel(dim, float(arg))
        elif op == "qec":
            ch = qec_cycle(dim, code).power(int(arg))
        elif op in ("sharpen", "trim"):
            ch = st_circuit_channel(dim, code, op).power(int(arg))
        else:
            amp = complex(*arg) if isinstance(arg, list) else complex(arg)
            ch = Channel.from_kraus([ops.displacement(dim, amp)])
        rho = ch.apply(rho)
        record(i, f"{op}={arg}")
    columns = ["stage", "operation", "fidelity_to_plus", "expect_XL", "code_space_population", "trace"]
    return [CurveResult("custom", columns, rows, {"truncation": dim})]


RUNNERS = {
    "fig3": run_fidelity_curves,
    "figS1": run_fidelity_curves,
    "fig4": run_fig4,
    "fig6": run_fig6,
    "limitation": run_limitation,
    "zrot": run_zrot,
    "zzrot": run_zzrot,
    "wigner": run_wigner,
    "custom": run_custom,
}


def run(config: dict, workers: int = 1) -> list[CurveResult]:
    """Validate and run one experiment; every result carries the resolved config and version."""
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    cfg = resolve(config)
    results = RUNNERS[cfg["experiment"]](cfg, workers)
    for res in results:
        res.metadata = {"version": f"scqec {__version__}", "experiment": cfg["experiment"],
                        "config": cfg, **res.metadata}
    return results
