"""Command-line entry points for verification suites and budget reports.

Every subcommand resolves one :class:`ExperimentConfig` (defaults, then a
JSON config file, then explicit flags), echoes the resolved values into its
JSON output, and writes only deterministic artifacts: reruns with the same
inputs produce byte-identical files.  Exit status is 0 when every checked
inequality holds, 1 when a verification suite found a violation, and 2 for
configuration problems.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from csv import writer as csv_writer
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .bch import check_truncated_generator, phi_report
from .bounds import (
    admissibility_chain,
    bch_time_condition,
    divergence_diagnostics,
    gate_cost_table,
    matched_mpf_spec,
    mpf_time_condition,
    query_count,
    report_from_parts,
    self_consistency,
    step_error_bound,
    truncation_order,
)
from .commutators import (
    factorial_commutator_bound,
    mu_from_alphas,
    mu_window_bound,
    nested_commutator_sum,
    power_commutator_bound,
)
from .hamiltonians import (
    HamiltonianSpec,
    heisenberg_chain,
    load_spec,
    long_range_zz_chain,
)
from .mpf import MAX_J, MPFEvaluator, MPFSpec, build_mpf, solve_coefficients
from .trotter import TrotterEvaluator, build_plan, geometric_grid, loglog_slope

SLOPE_MARGIN = 0.8
NOISE_FLOOR = 1e-11
ENUMERATION_SITE_CAP = 16
N_SWEEP_SIZES = (64, 128, 256, 512, 1024)
EPS_SWEEP = tuple(10.0 ** (-2.0 - 0.5 * i) for i in range(13))

FAMILIES = ("heisenberg", "long-range-zz", "file")


class ConfigError(Exception):
    """Raised for unusable configuration; mapped to exit status 2."""


@dataclass
class ExperimentConfig:
    """Resolved run parameters shared by all subcommands."""

    family: str = "heisenberg"
    n_sites: int = 4
    coupling: float = 1.0
    field: float = 0.8
    exponent: float = 2.0
    ham_file: str | None = None
    p: int = 2
    j_count: int = 2
    k_list: tuple[int, ...] | None = None
    tau_min: float = 0.01
    tau_max: float = 0.3
    tau_points: int = 12
    t: float = 1.0
    eps: float = 1e-3
    norm_mode: str = "exact"
    dense_cap: int = 12
    q_max: int = 5
    out: str = "."
    seed: int = 0
    range_class: str = "finite"
    nu: float | None = None
    d: int = 1

    def echo(self) -> dict:
        doc = asdict(self)
        if doc["k_list"] is not None:
            doc["k_list"] = list(doc["k_list"])
        return doc


def _coerce_k_list(value) -> tuple[int, ...]:
    if isinstance(value, str):
        parts = [piece.strip() for piece in value.split(",") if piece.strip()]
        value = parts
    try:
        ks = tuple(int(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad k_list {value!r}: {exc}") from None
    if not ks:
        raise ConfigError("k_list must not be empty")
    return ks


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.family not in FAMILIES:
        raise ConfigError(f"unknown family {cfg.family!r}; choose from {FAMILIES}")
    if cfg.family == "file" and not cfg.ham_file:
        raise ConfigError("family 'file' needs --ham-file")
    if cfg.n_sites < 2:
        raise ConfigError("need at least two sites")
    if cfg.p < 1:
        raise ConfigError("formula order must be >= 1")
    if cfg.j_count < 1 or cfg.j_count > MAX_J:
        raise ConfigError(f"j_count must sit in [1, {MAX_J}]")
    if not (0.0 < cfg.tau_min < cfg.tau_max):
        raise ConfigError("need 0 < tau_min < tau_max")
    if cfg.tau_points < 4:
        raise ConfigError("need at least four grid points")
    if cfg.t <= 0.0:
        raise ConfigError("evolution time must be positive")
    if cfg.eps <= 0.0:
        raise ConfigError("target accuracy must be positive")
    if cfg.norm_mode not in ("exact", "one-norm"):
        raise ConfigError("norm mode must be 'exact' or 'one-norm'")
    if cfg.dense_cap < 1:
        raise ConfigError("dense cap must be positive")
    if cfg.q_max < 2:
        raise ConfigError("qmax must be >= 2")
    if cfg.range_class not in ("finite", "long"):
        raise ConfigError("range class must be 'finite' or 'long'")
    if cfg.range_class == "long" and cfg.nu is None:
        raise ConfigError("range class 'long' needs --nu")
    if cfg.d < 1:
        raise ConfigError("dimension must be >= 1")


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config-file values, and explicit flags, then validate."""
    cfg = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    if getattr(args, "config", None):
        data = _load_config_file(args.config)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for name, value in data.items():
            if name == "k_list" and value is not None:
                value = _coerce_k_list(value)
            setattr(cfg, name, value)
    for name in known:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name == "k_list":
            value = _coerce_k_list(value)
        setattr(cfg, name, value)
    _validate(cfg)
    return cfg


def build_family(cfg: ExperimentConfig) -> HamiltonianSpec:
    """Construct the configured Hamiltonian and pin n_sites to it."""
    if cfg.family == "heisenberg":
        spec = heisenberg_chain(cfg.n_sites, coupling=cfg.coupling, field=cfg.field)
    elif cfg.family == "long-range-zz":
        spec = long_range_zz_chain(cfg.n_sites, cfg.exponent, base=cfg.coupling)
    else:
        try:
            spec = load_spec(cfg.ham_file)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load Hamiltonian file: {exc}") from None
        cfg.n_sites = spec.n_sites
    return spec


def family_at_size(cfg: ExperimentConfig, n_sites: int) -> HamiltonianSpec:
    if cfg.family == "heisenberg":
        return heisenberg_chain(n_sites, coupling=cfg.coupling, field=cfg.field)
    return long_range_zz_chain(n_sites, cfg.exponent, base=cfg.coupling)


def build_mpf_spec(cfg: ExperimentConfig, base_order: int) -> MPFSpec:
    try:
        if cfg.k_list is not None:
            return solve_coefficients(cfg.k_list, base_order)
        return build_mpf(cfg.j_count, base_order)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- deterministic writers -------------------------------------------------


def _as_jsonable(value):
    if isinstance(value, dict):
        return {key: _as_jsonable(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [_as_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_as_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
    return value


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_as_jsonable(payload), indent=2, sort_keys=True)
    path.write_text(text + "\n")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        sink = csv_writer(handle, lineterminator="\n")
        sink.writerow(header)
        for row in rows:
            sink.writerow(["" if v is None else v for v in row])


def _out_dir(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _require_dense(cfg: ExperimentConfig, purpose: str) -> None:
    if cfg.n_sites > cfg.dense_cap:
        raise ConfigError(
            f"{purpose} needs dense matrices: n_sites = {cfg.n_sites} exceeds "
            f"the dense cap {cfg.dense_cap}"
        )


def _enumeration_mode(cfg: ExperimentConfig) -> str:
    if cfg.norm_mode == "exact" and cfg.n_sites <= cfg.dense_cap:
        return "exact"
    return "one-norm"


# -- verify-order ----------------------------------------------------------


def _slope_entry(taus: np.ndarray, errors: np.ndarray, threshold: float) -> dict:
    entry: dict = {"threshold": threshold}
    if float(np.max(errors)) <= NOISE_FLOOR:
        entry.update(slope=None, points_used=0, status="exact")
        return entry
    try:
        slope, n_used = loglog_slope(taus, errors, floor=NOISE_FLOOR)
    except ValueError as exc:
        entry.update(slope=None, points_used=0, status="fail", note=str(exc))
        return entry
    entry.update(
        slope=slope,
        points_used=n_used,
        status="pass" if slope >= threshold else "fail",
    )
    return entry


def cmd_verify_order(cfg: ExperimentConfig) -> int:
    spec = build_family(cfg)
    _require_dense(cfg, "verify-order")
    out = _out_dir(cfg)
    plan = build_plan(spec.n_groups, cfg.p)
    taus = geometric_grid(cfg.tau_min, cfg.tau_max, cfg.tau_points)

    trotter = TrotterEvaluator(spec, plan, cfg.dense_cap)
    trotter_errors = trotter.error_sweep(taus)
    trotter_entry = _slope_entry(taus, trotter_errors, cfg.p + SLOPE_MARGIN)
    trotter_entry["order"] = cfg.p

    mpf_entries: list[dict] = []
    mpf_columns: list[tuple[str, np.ndarray]] = []
    if cfg.p % 2 == 0:
        if cfg.k_list is not None:
            mpf_specs = [solve_coefficients(cfg.k_list, cfg.p)]
        else:
            mpf_specs = [build_mpf(j, cfg.p) for j in range(1, cfg.j_count + 1)]
        for mspec in mpf_specs:
            evaluator = MPFEvaluator(mspec, plan, spec, cfg.dense_cap)
            errors = evaluator.error_sweep(taus)
            entry = _slope_entry(taus, errors, mspec.m + SLOPE_MARGIN)
            entry.update(
                j_count=mspec.j_count,
                k_values=list(mspec.k_values),
                order=mspec.m,
            )
            mpf_entries.append(entry)
            mpf_columns.append((f"mpf_j{mspec.j_count}", errors))

    passed = trotter_entry["status"] != "fail" and all(
        entry["status"] != "fail" for entry in mpf_entries
    )
    payload = {
        "config": cfg.echo(),
        "grid": {
            "tau_min": cfg.tau_min,
            "tau_max": cfg.tau_max,
            "points": cfg.tau_points,
        },
        "trotter": trotter_entry,
        "mpf": mpf_entries,
        "passed": passed,
    }
    write_json(out / "verify_order.json", payload)

    header = ["tau", f"trotter_p{cfg.p}"] + [name for name, _ in mpf_columns]
    rows = []
    for i, tau in enumerate(taus):
        row = [float(tau), float(trotter_errors[i])]
        row.extend(float(col[i]) for _, col in mpf_columns)
        rows.append(row)
    write_csv(out / "order_sweep.csv", header, rows)
    return 0 if passed else 1


# -- verify-bounds ---------------------------------------------------------


def _row(name: str, lhs, rhs, *, slack: float = 1e-12, note: str = "") -> dict:
    held = lhs <= rhs * (1.0 + slack) + slack
    return {
        "name": name,
        "status": "pass" if held else "fail",
        "lhs": lhs,
        "rhs": rhs,
        "margin": rhs - lhs,
        "note": note,
    }


def _untestable(name: str, note: str) -> dict:
    return {
        "name": name,
        "status": "untestable",
        "lhs": None,
        "rhs": None,
        "margin": None,
        "note": note,
    }


def _alpha_rows(cfg: ExperimentConfig, spec: HamiltonianSpec) -> tuple[list[dict], dict]:
    rows: list[dict] = []
    alphas: dict[int, float] = {}
    mode = _enumeration_mode(cfg)
    for q in range(2, cfg.q_max + 1):
        if cfg.n_sites > ENUMERATION_SITE_CAP:
            rows.append(
                _untestable(
                    f"alpha_factorial[q={q}]",
                    "nested-commutator enumeration beyond the site cap",
                )
            )
            continue
        alpha = nested_commutator_sum(spec, q, mode, cfg.dense_cap)
        alphas[q] = alpha
        factorial = factorial_commutator_bound(
            q, spec.locality, spec.extensiveness, spec.n_sites
        )
        one_norm = power_commutator_bound(q, spec.total_one_norm)
        rows.append(_row(f"alpha_factorial[q={q}]", alpha, factorial, note=mode))
        rows.append(_row(f"alpha_one_norm[q={q}]", alpha, one_norm, note=mode))
    return rows, alphas


def _phi_rows(
    cfg: ExperimentConfig,
    spec: HamiltonianSpec,
    plan,
    alphas: dict[int, float],
) -> list[dict]:
    rows: list[dict] = []
    mode = _enumeration_mode(cfg)
    for q in range(2, cfg.q_max + 1):
        if cfg.n_sites > ENUMERATION_SITE_CAP:
            rows.append(
                _untestable(
                    f"phi_norm[q={q}]", "series coefficients beyond the site cap"
                )
            )
            continue
        report = phi_report(
            plan, spec, q, alpha_q=alphas.get(q), norm_mode=mode, cap=cfg.dense_cap
        )
        if report.norm_exact is not None:
            measured = report.norm_exact
            note = "spectral norm"
        else:
            measured = report.operator.one_norm()
            note = "coefficient one-norm"
        if q <= cfg.p:
            rows.append(_row(f"phi_zero[q={q}]", measured, 1e-10, note=note))
        rows.append(_row(f"phi_norm[q={q}]", measured, report.norm_bound, note=note))
        rows.append(
            _row(
                f"phi_hermiticity[q={q}]",
                report.hermiticity_defect,
                1e-10,
                note="anti-Hermitian part",
            )
        )
        rows.append(
            _row(
                f"phi_locality[q={q}]",
                float(report.locality),
                float(report.locality_bound),
            )
        )
        rows.append(
            _row(
                f"phi_extensiveness[q={q}]",
                report.extensiveness,
                report.extensiveness_bound,
            )
        )
    return rows


def _truncation_rows(
    cfg: ExperimentConfig, spec: HamiltonianSpec, plan
) -> list[dict]:
    p0 = truncation_order(cfg.n_sites, cfg.eps)
    if p0 > cfg.q_max:
        return [
            _untestable(
                "truncation_defect",
                f"p0 = {p0} exceeds the qmax window {cfg.q_max}",
            )
        ]
    if cfg.n_sites > cfg.dense_cap:
        return [
            _untestable("truncation_defect", "dense matrices beyond the cap")
        ]
    boundary = bch_time_condition(
        cfg.n_sites, cfg.eps, plan.stage_factor, spec.locality, spec.extensiveness
    )
    check = check_truncated_generator(
        plan,
        spec,
        cfg.eps,
        p0,
        boundary,
        subdivisions=(1.0, 0.5),
        cap=cfg.dense_cap,
    )
    rows = [
        _row(
            "truncation_defect",
            max(check.defects),
            check.epsilon,
            note=f"p0 = {p0}, tau <= {boundary:.6g}",
        )
    ]
    if check.slope is not None:
        rows.append(
            _row(
                "truncation_slope",
                float(p0) + SLOPE_MARGIN,
                check.slope,
                note=f"{check.slope_points} fit points",
            )
        )
    return rows


def _step_bound_rows(
    cfg: ExperimentConfig, spec: HamiltonianSpec, plan, mpf_spec: MPFSpec
) -> list[dict]:
    p0 = truncation_order(cfg.n_sites, cfg.eps)
    if p0 > cfg.q_max:
        return [
            _untestable(
                "step_error_bound",
                f"p0 = {p0} exceeds the qmax window {cfg.q_max}",
            )
        ]
    if cfg.n_sites > cfg.dense_cap:
        return [
            _untestable("step_error_bound", "dense matrices beyond the cap")
        ]
    mode = _enumeration_mode(cfg)
    alphas = {
        q: nested_commutator_sum(spec, q, mode, cfg.dense_cap)
        for q in range(cfg.p + 1, p0 + 1)
    }
    mu = mu_from_alphas(alphas, cfg.p, mpf_spec.m, p0, source=mode)
    ceiling = mu_window_bound(
        cfg.n_sites, cfg.p, p0, spec.locality, spec.extensiveness
    )
    rows = [_row("mu_ceiling", mu.value, ceiling, note=f"mu source: {mode}")]
    boundary_bch = bch_time_condition(
        cfg.n_sites, cfg.eps, plan.stage_factor, spec.locality, spec.extensiveness
    )
    boundary_mpf = mpf_time_condition(plan.stage_factor, mu.value)
    tau = 0.8 * min(boundary_bch, boundary_mpf)
    bound = step_error_bound(
        tau,
        mpf_spec.norm_c_1,
        mpf_spec.norm_k_1,
        plan.stage_factor,
        mu.value,
        mpf_spec.m,
        cfg.eps,
        boundary_bch,
    )
    evaluator = MPFEvaluator(mpf_spec, plan, spec, cfg.dense_cap)
    measured = evaluator.error(tau)
    rows.append(
        _row(
            "step_error_bound",
            measured,
            bound.value,
            note=f"tau = {tau:.6g}, admissible = {bound.admissible}",
        )
    )
    return rows


def cmd_verify_bounds(cfg: ExperimentConfig) -> int:
    spec = build_family(cfg)
    out = _out_dir(cfg)
    plan = build_plan(spec.n_groups, cfg.p)
    rows: list[dict] = []
    alpha_rows, alphas = _alpha_rows(cfg, spec)
    rows.extend(alpha_rows)
    rows.extend(_phi_rows(cfg, spec, plan, alphas))
    rows.extend(_truncation_rows(cfg, spec, plan))
    if cfg.p % 2 == 0:
        mpf_spec = build_mpf_spec(cfg, cfg.p)
        rows.extend(_step_bound_rows(cfg, spec, plan, mpf_spec))
    else:
        rows.append(
            _untestable("step_error_bound", "extrapolation needs an even base order")
        )

    tally = {"pass": 0, "fail": 0, "untestable": 0}
    for row in rows:
        tally[row["status"]] += 1
    passed = tally["fail"] == 0
    payload = {
        "config": cfg.echo(),
        "rows": rows,
        "summary": tally,
        "passed": passed,
    }
    write_json(out / "verify_bounds.json", payload)
    write_csv(
        out / "verify_bounds.csv",
        ["name", "status", "lhs", "rhs", "margin", "note"],
        [
            [r["name"], r["status"], r["lhs"], r["rhs"], r["margin"], r["note"]]
            for r in rows
        ],
    )
    return 0 if passed else 1


# -- cost ------------------------------------------------------------------


def _fit_line(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    design = np.vstack([xs, np.ones_like(xs)]).T
    sol, *_ = np.linalg.lstsq(design, ys, rcond=None)
    residual = float(np.sqrt(np.mean((design @ sol - ys) ** 2)))
    return float(sol[0]), residual


def _eps_sweep(cfg: ExperimentConfig, spec: HamiltonianSpec) -> dict:
    rows = []
    for eps in EPS_SWEEP:
        try:
            matched = matched_mpf_spec(
                cfg.n_sites, spec.extensiveness, cfg.t, eps, cfg.p
            )
        except ValueError as exc:
            rows.append({"eps": eps, "note": str(exc)})
            continue
        plan = build_plan(spec.n_groups, cfg.p)
        report = report_from_parts(spec, plan, matched, cfg.t, eps)
        rows.append(
            {
                "eps": eps,
                "m": matched.m,
                "j_count": matched.j_count,
                "r1": report.r1,
                "r2": report.r2,
                "r": report.r,
            }
        )
    complete = [row for row in rows if "r" in row]
    fits: dict = {"rows": rows}
    if len(complete) >= 6:
        log_r = np.log([row["r"] for row in complete])
        log_inv = np.log([1.0 / row["eps"] for row in complete])
        power_slope, power_res = _fit_line(log_inv, log_r)
        polylog_slope, polylog_res = _fit_line(np.log(log_inv), log_r)
        half = len(complete) // 2
        early_slope, _ = _fit_line(log_inv[:half], log_r[:half])
        late_slope, _ = _fit_line(log_inv[half:], log_r[half:])
        fits.update(
            power_exponent=power_slope,
            power_residual=power_res,
            polylog_exponent=polylog_slope,
            polylog_residual=polylog_res,
            early_power_slope=early_slope,
            late_power_slope=late_slope,
            # a power law keeps its local slope; a polylog's slope decays
            sub_polynomial=(
                late_slope <= early_slope + 0.02 and power_slope < 0.5
            ),
        )
    return fits


def _n_sweep(cfg: ExperimentConfig, mpf_spec: MPFSpec) -> dict:
    if cfg.family == "file":
        return {"rows": [], "note": "fixed-size Hamiltonian file; no size sweep"}
    rows = []
    for n in N_SWEEP_SIZES:
        fam = family_at_size(cfg, n)
        plan = build_plan(fam.n_groups, cfg.p)
        report = report_from_parts(fam, plan, mpf_spec, cfg.t, cfg.eps)
        rows.append(
            {
                "n": n,
                "g": fam.extensiveness,
                "r1": report.r1,
                "r2": report.r2,
                "r": report.r,
            }
        )
    log_n = np.log([row["n"] for row in rows])
    log_r1 = np.log([row["r1"] for row in rows])
    slope, residual = _fit_line(log_n, log_r1)
    return {
        "rows": rows,
        "r1_slope": slope,
        "r1_slope_residual": residual,
        "r1_slope_expected": (1.0 + 1.0 / mpf_spec.m) / (cfg.p + 1),
        "r1_slope_reference": 1.0 / (cfg.p + 1),
        "r1_dominant": all(row["r1"] >= row["r2"] for row in rows),
    }


def cmd_cost(cfg: ExperimentConfig) -> int:
    if cfg.p % 2 != 0:
        raise ConfigError("cost reports need an even base order")
    spec = build_family(cfg)
    out = _out_dir(cfg)
    plan = build_plan(spec.n_groups, cfg.p)
    mpf_spec = build_mpf_spec(cfg, cfg.p)
    report = report_from_parts(spec, plan, mpf_spec, cfg.t, cfg.eps)
    consistency = self_consistency(report)
    chain = admissibility_chain(report)
    queries = query_count(mpf_spec.norm_c_1, mpf_spec.norm_k_1, report.r)
    table = gate_cost_table(
        cfg.n_sites,
        spec.extensiveness,
        cfg.t,
        cfg.eps,
        cfg.p,
        range_class=cfg.range_class,
        k=spec.locality if cfg.range_class == "long" else None,
        nu=cfg.nu,
        d=cfg.d if cfg.range_class == "long" else None,
    )

    if cfg.n_sites <= ENUMERATION_SITE_CAP and cfg.q_max >= 3:
        diagnostics = asdict(
            divergence_diagnostics(
                spec, range(2, cfg.q_max + 1), mode=_enumeration_mode(cfg)
            )
        )
    else:
        diagnostics = {"note": "nested-commutator window beyond the site cap"}

    eps_sweep = _eps_sweep(cfg, spec)
    n_sweep = _n_sweep(cfg, mpf_spec)

    passed = consistency.holds and chain.holds
    payload = {
        "config": cfg.echo(),
        "report": asdict(report),
        "consistency": asdict(consistency),
        "chain": asdict(chain),
        "query": asdict(queries),
        "gate_table": [asdict(row) for row in table],
        "divergence": diagnostics,
        "eps_sweep": eps_sweep,
        "n_sweep": n_sweep,
        "passed": passed,
    }
    write_json(out / "cost_report.json", payload)

    csv_rows = []
    for row in eps_sweep["rows"]:
        if "r" in row:
            csv_rows.append(
                ["eps", row["eps"], spec.extensiveness, row["m"],
                 row["j_count"], row["r1"], row["r2"], row["r"]]
            )
    for row in n_sweep["rows"]:
        csv_rows.append(
            ["n", row["n"], row["g"], mpf_spec.m, mpf_spec.j_count,
             row["r1"], row["r2"], row["r"]]
        )
    write_csv(
        out / "cost_sweeps.csv",
        ["sweep", "x", "g", "m", "j_count", "r1", "r2", "r"],
        csv_rows,
    )
    return 0 if passed else 1


# -- table1 ----------------------------------------------------------------


def cmd_table1(cfg: ExperimentConfig) -> int:
    spec = build_family(cfg)
    out = _out_dir(cfg)
    rows = gate_cost_table(
        cfg.n_sites,
        spec.extensiveness,
        cfg.t,
        cfg.eps,
        cfg.p,
        range_class=cfg.range_class,
        k=spec.locality if cfg.range_class == "long" else None,
        nu=cfg.nu,
        d=cfg.d if cfg.range_class == "long" else None,
    )
    payload = {
        "config": cfg.echo(),
        "range_class": cfg.range_class,
        "rows": [asdict(row) for row in rows],
    }
    write_json(out / "gate_costs.json", payload)
    write_csv(
        out / "gate_costs.csv",
        ["algorithm", "expression", "value", "polylog_pending"],
        [[r.algorithm, r.expression, r.value, r.polylog_pending] for r in rows],
    )
    return 0


# -- phi -------------------------------------------------------------------


def cmd_phi(cfg: ExperimentConfig) -> int:
    spec = build_family(cfg)
    if cfg.n_sites > ENUMERATION_SITE_CAP:
        raise ConfigError(
            "series coefficients need symbolic enumeration; "
            f"n_sites = {cfg.n_sites} exceeds the site cap {ENUMERATION_SITE_CAP}"
        )
    out = _out_dir(cfg)
    plan = build_plan(spec.n_groups, cfg.p)
    mode = _enumeration_mode(cfg)
    rows = []
    violated = False
    for q in range(2, cfg.q_max + 1):
        report = phi_report(plan, spec, q, norm_mode=mode, cap=cfg.dense_cap)
        if report.norm_exact is not None:
            norm = report.norm_exact
            norm_is_exact = True
        else:
            norm = report.operator.one_norm()
            norm_is_exact = False
        ok = (
            norm <= report.norm_bound * (1.0 + 1e-12) + 1e-12
            and report.hermiticity_defect <= 1e-10
            and report.locality <= report.locality_bound
            and report.extensiveness <= report.extensiveness_bound * (1.0 + 1e-12)
        )
        violated = violated or not ok
        rows.append(
            {
                "q": q,
                "norm": norm,
                "norm_is_exact": norm_is_exact,
                "norm_bound": report.norm_bound,
                "hermiticity_defect": report.hermiticity_defect,
                "locality": report.locality,
                "locality_bound": report.locality_bound,
                "extensiveness": report.extensiveness,
                "extensiveness_bound": report.extensiveness_bound,
                "bounds_hold": ok,
            }
        )
    payload = {"config": cfg.echo(), "rows": rows, "passed": not violated}
    write_json(out / "phi_report.json", payload)
    write_csv(
        out / "phi_norms.csv",
        [
            "q", "norm", "norm_is_exact", "norm_bound", "hermiticity_defect",
            "locality", "locality_bound", "extensiveness",
            "extensiveness_bound", "bounds_hold",
        ],
        [
            [
                r["q"], r["norm"], r["norm_is_exact"], r["norm_bound"],
                r["hermiticity_defect"], r["locality"], r["locality_bound"],
                r["extensiveness"], r["extensiveness_bound"], r["bounds_hold"],
            ]
            for r in rows
        ],
    )
    return 0 if not violated else 1


# -- alpha -----------------------------------------------------------------


def cmd_alpha(cfg: ExperimentConfig) -> int:
    spec = build_family(cfg)
    out = _out_dir(cfg)
    mode = _enumeration_mode(cfg)
    enumerable = cfg.n_sites <= ENUMERATION_SITE_CAP
    rows = []
    violated = False
    for q in range(2, cfg.q_max + 1):
        factorial = factorial_commutator_bound(
            q, spec.locality, spec.extensiveness, spec.n_sites
        )
        one_norm = power_commutator_bound(q, spec.total_one_norm)
        if enumerable:
            alpha = nested_commutator_sum(spec, q, mode, cfg.dense_cap)
            slack = 1e-12
            factorial_holds = alpha <= factorial * (1.0 + slack) + slack
            one_norm_holds = alpha <= one_norm * (1.0 + slack) + slack
            violated = violated or not (factorial_holds and one_norm_holds)
        else:
            alpha = None
            factorial_holds = None
            one_norm_holds = None
        rows.append(
            {
                "q": q,
                "alpha": alpha,
                "mode": mode if enumerable else "untestable",
                "factorial_bound": factorial,
                "factorial_holds": factorial_holds,
                "one_norm_bound": one_norm,
                "one_norm_holds": one_norm_holds,
            }
        )
    payload = {"config": cfg.echo(), "rows": rows, "passed": not violated}
    write_json(out / "alpha_table.json", payload)
    write_csv(
        out / "alpha_table.csv",
        [
            "q", "alpha", "mode", "factorial_bound", "factorial_holds",
            "one_norm_bound", "one_norm_holds",
        ],
        [
            [
                r["q"], r["alpha"], r["mode"], r["factorial_bound"],
                r["factorial_holds"], r["one_norm_bound"], r["one_norm_holds"],
            ]
            for r in rows
        ],
    )
    return 0 if not violated else 1


# -- parser ----------------------------------------------------------------


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    run = shared.add_argument_group("run")
    run.add_argument("--config", help="JSON config file; flags override it")
    run.add_argument("--out", help="output directory (default: current)")
    run.add_argument(
        "--norm-mode",
        choices=["exact", "one-norm"],
        dest="norm_mode",
        help="measure operators by spectral norm or certified one-norm",
    )
    run.add_argument(
        "--dense-cap",
        type=int,
        dest="dense_cap",
        help="largest site count allowed dense matrices",
    )
    run.add_argument(
        "--qmax", type=int, dest="q_max", help="top commutator order checked"
    )
    run.add_argument("--seed", type=int, help="echoed into outputs")
    model = shared.add_argument_group("model")
    model.add_argument("--family", choices=list(FAMILIES))
    model.add_argument("--n-sites", type=int, dest="n_sites")
    model.add_argument("--coupling", type=float)
    model.add_argument("--field", type=float)
    model.add_argument(
        "--exponent", type=float, help="decay power of the long-range family"
    )
    model.add_argument("--ham-file", dest="ham_file", help="JSON Hamiltonian")
    formula = shared.add_argument_group("formula")
    formula.add_argument("--p", type=int, help="base product-formula order")
    formula.add_argument(
        "--J", type=int, dest="j_count", help="extrapolation term count"
    )
    formula.add_argument(
        "--k-list",
        dest="k_list",
        help="comma-separated subdivision counts, overrides --J",
    )
    grid = shared.add_argument_group("grid")
    grid.add_argument("--tau-min", type=float, dest="tau_min")
    grid.add_argument("--tau-max", type=float, dest="tau_max")
    grid.add_argument("--tau-points", type=int, dest="tau_points")
    grid.add_argument("--t", type=float, help="total evolution time")
    grid.add_argument("--eps", type=float, help="target accuracy")
    table = shared.add_argument_group("cost table")
    table.add_argument(
        "--range-class", choices=["finite", "long"], dest="range_class"
    )
    table.add_argument("--nu", type=float, help="long-range decay power")
    table.add_argument("--d", type=int, help="lattice dimension")
    return shared


_COMMANDS = {
    "verify-order": (
        cmd_verify_order,
        "measure convergence slopes against their order thresholds",
    ),
    "verify-bounds": (
        cmd_verify_bounds,
        "check every certified inequality on one Hamiltonian",
    ),
    "cost": (
        cmd_cost,
        "assemble the full step-count and query budget with sweeps",
    ),
    "table1": (
        cmd_table1,
        "emit the gate-cost comparison table",
    ),
    "phi": (
        cmd_phi,
        "tabulate series coefficients with their bounds",
    ),
    "alpha": (
        cmd_alpha,
        "tabulate nested-commutator sums with their bounds",
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpfkit",
        description=(
            "verification suites and cost reports for extrapolated "
            "product-formula simulation"
        ),
    )
    shared = _shared_flags()
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, summary) in _COMMANDS.items():
        subparsers.add_parser(name, parents=[shared], help=summary)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        handler, _ = _COMMANDS[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
