"""Batch command-line front end: rates, correlation, regime, verify, sweep.

Output is CSV (or a JSON mirror of the same rows) with a fixed column order,
shortest round-trip float formatting, "inf" for infinite damping times, LF
line endings and a header row even when there are no data rows.  Reruns with
the same config and seed are byte-identical.

Exit codes: 0 success, 2 config error, 3 verification failure,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import (
    ScenarioConfig,
    SweepSpec,
    dimension_cap,
    load_config,
    parse_config,
    set_config_path,
)
from .errors import ConfigError, ConvergenceError
from .fidelity import C2_ZERO_FLOOR, average_c2, entanglement_c2, input_output_c2
from .model import build_hamiltonian, correlation_fn_discrete, rate_from_correlation
from .operators import Ket
from .oracle import Scenario, resolve_n_max, verify_expansion
from .spectral import (
    classify_regime,
    gaussian_correlation,
    ohmic_correlation_highT,
    ohmic_correlation_lowT,
    ohmic_correlation_quad,
    ohmic_spectrum_moments,
    spectrum_moments,
)
from .suites import SUITE_NAMES, suite_tasks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NUMERIC = 4

RATES_COLUMNS = ("scenario_id", "kind", "c2", "tau2", "method")
CORRELATION_COLUMNS = ("delta_r", "omega2", "normalized")
REGIME_COLUMNS = ("d", "kbar_d", "dk_d", "regime")
VERIFY_COLUMNS = ("scenario", "c2_analytic", "c2_fitted", "rel_err", "pass")


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        v = float(v)  # numpy scalars repr differently
        if math.isinf(v):
            return "inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if v is None:
        return ""
    s = str(v)
    if "," in s or "\n" in s:
        raise ValueError(f"cell value {s!r} would break the CSV contract")
    return s


def rows_to_csv(rows: list[dict], columns) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[dict], columns) -> str:
    def jsonable(v):
        if isinstance(v, float):
            if not math.isfinite(v):
                return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
            return float(v)
        return v

    payload = [{c: jsonable(row.get(c)) for c in columns} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def _tau2(c2: float) -> float:
    return math.inf if c2 < C2_ZERO_FLOOR else c2 ** -0.5


def _correlation_fn(cfg: ScenarioConfig):
    if cfg.bath_kind == "discrete":
        return lambda d: correlation_fn_discrete(cfg.modes, d)
    if cfg.bath_kind == "gaussian":
        return lambda d: gaussian_correlation(cfg.gaussian, d)
    form = {"quad": ohmic_correlation_quad, "highT": ohmic_correlation_highT,
            "lowT": ohmic_correlation_lowT}[cfg.ohmic_form]
    return lambda d: form(cfg.ohmic, d)


def _closed_form_c2(cfg: ScenarioConfig, kind: str) -> float:
    """Variance-form coefficient on the explicitly built discrete model."""
    n_max = resolve_n_max(cfg.modes, cfg.lattice.n_qubits, cfg.n_max, dimension_cap())
    model = build_hamiltonian(cfg.lattice, cfg.modes, n_max)
    rho_env = model.thermal_env_state()
    if kind == "io":
        state = cfg.state()
        if not isinstance(state, Ket):
            raise ConfigError("fidelity_kind", "the io fidelity needs a pure state")
        return input_output_c2(state, model.h_i, rho_env).c2
    if kind == "average":
        return average_c2(cfg.ensemble(), model.h_i, rho_env).c2
    state = cfg.state()
    rho_s = state.projector() if isinstance(state, Ket) else state
    return entanglement_c2(rho_s, model.h_i, rho_env).c2


def _factorized_c2(cfg: ScenarioConfig, kind: str) -> float:
    omega2 = _correlation_fn(cfg)
    if kind == "average":
        return sum(p * rate_from_correlation(cfg.lattice, omega2, psi.projector())
                   for p, psi in cfg.ensemble().members)
    state = cfg.state()
    if kind == "io":
        if not isinstance(state, Ket):
            raise ConfigError("fidelity_kind", "the io fidelity needs a pure state")
        rho_s = state.projector()
    else:
        rho_s = state.projector() if isinstance(state, Ket) else state
    return rate_from_correlation(cfg.lattice, omega2, rho_s)


def cmd_rates(cfg: ScenarioConfig) -> list[dict]:
    rows = []
    for kind in cfg.fidelity_kinds:
        if cfg.bath_kind == "discrete":
            c2 = _closed_form_c2(cfg, kind)
            method = "closed-form"
        else:
            c2 = _factorized_c2(cfg, kind)
            method = "factorized"
        rows.append({"scenario_id": cfg.name, "kind": kind, "c2": c2,
                     "tau2": _tau2(c2), "method": method})
    return rows


def cmd_correlation(cfg: ScenarioConfig, delta_r: list[float]) -> list[dict]:
    fn = _correlation_fn(cfg)
    omega0 = fn(0.0)
    rows = []
    for d in delta_r:
        val = fn(float(d))
        rows.append({"delta_r": float(d), "omega2": val,
                     "normalized": val / omega0 if omega0 != 0.0 else math.nan})
    return rows


def _spectrum_for(cfg: ScenarioConfig):
    if cfg.bath_kind == "gaussian":
        return cfg.gaussian
    if cfg.bath_kind == "discrete":
        return spectrum_moments(cfg.modes)
    return ohmic_spectrum_moments(cfg.ohmic)


def cmd_regime(cfg: ScenarioConfig, d_values: list[float]) -> list[dict]:
    spec = _spectrum_for(cfg)
    rows = []
    for d in d_values:
        rep = classify_regime(float(d), spec)
        rows.append({"d": float(d), "kbar_d": rep.kbar_d, "dk_d": rep.dk_d, "regime": rep.regime})
    return rows


def _run_tasks(tasks, jobs: int) -> list[dict]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda t: t[1](), tasks))
    return [run() for _, run in tasks]


def cmd_verify(cfg: ScenarioConfig | None, suite: str | None, seed: int, jobs: int) -> list[dict]:
    if suite is not None:
        tasks = suite_tasks(suite, seed, dimension_cap())
        return _run_tasks(tasks, jobs)
    if cfg.bath_kind != "discrete":
        raise ConfigError("bath", "verify needs a discrete bath (the oracle evolves explicit modes)")
    state = cfg.state()
    rows = []
    for kind in cfg.fidelity_kinds:
        if kind == "average":
            scen_state = cfg.ensemble()
        elif kind == "io":
            if not isinstance(state, Ket):
                raise ConfigError("fidelity_kind", "the io fidelity needs a pure state")
            scen_state = state
        else:
            scen_state = state.projector() if isinstance(state, Ket) else state
        scenario = Scenario(f"{cfg.name}-{kind}", kind, cfg.lattice, cfg.modes,
                            scen_state, cfg.n_max, dimension_cap())
        rep = verify_expansion(scenario)
        rows.append({"scenario": rep.scenario, "c2_analytic": rep.c2_analytic,
                     "c2_fitted": rep.c2_fitted, "rel_err": rep.rel_err, "pass": bool(rep.passed)})
    return rows


def _sweep_point_config(cfg: ScenarioConfig, spec: SweepSpec, value: float) -> tuple[ScenarioConfig, float | None]:
    """Apply one sweep value; returns the point config and the active spacing."""
    if spec.parameter == "d":
        raw = dict(cfg.raw)
        raw["qubits"] = [{"position": i * value} for i in range(cfg.lattice.n_qubits)]
        return parse_config(raw), value
    if spec.parameter == "temperature":
        path = f"bath.{cfg.bath_kind}.temperature"
    else:
        path = spec.parameter
    point = parse_config(set_config_path(cfg.raw, path, value))
    spacing = None
    if point.lattice.n_qubits >= 2:
        spacing = point.lattice.positions[1] - point.lattice.positions[0]
    return point, spacing


def _sweep_row(cfg: ScenarioConfig, spec: SweepSpec, value: float) -> dict:
    row = {spec.parameter: value, "error": ""}
    for c in spec.columns:
        row[c] = None
    try:
        point, spacing = _sweep_point_config(cfg, spec, value)
        wants_distance = any(c in spec.columns for c in ("omega2", "normalized", "regime", "kbar_d", "dk_d"))
        if wants_distance and spacing is None:
            raise ConfigError("sweep.columns", "distance columns need >= 2 qubits or parameter 'd'")
        if "c2" in spec.columns or "tau2" in spec.columns or "method" in spec.columns:
            rates = cmd_rates(point)[0]
            row["c2"], row["tau2"], row["method"] = rates["c2"], rates["tau2"], rates["method"]
        if "omega2" in spec.columns or "normalized" in spec.columns:
            corr = cmd_correlation(point, [spacing])[0]
            row["omega2"], row["normalized"] = corr["omega2"], corr["normalized"]
        if any(c in spec.columns for c in ("regime", "kbar_d", "dk_d")):
            reg = cmd_regime(point, [spacing])[0]
            row["regime"], row["kbar_d"], row["dk_d"] = reg["regime"], reg["kbar_d"], reg["dk_d"]
    except (ConfigError, ConvergenceError, ValueError) as exc:
        row["error"] = str(exc).replace(",", ";").replace("\n", " ")
    return {k: row[k] for k in (spec.parameter, *spec.columns, "error")}


def cmd_sweep(cfg: ScenarioConfig, jobs: int) -> tuple[list[dict], tuple[str, ...]]:
    if cfg.sweep is None:
        raise ConfigError("sweep", "missing sweep specification")
    spec = cfg.sweep
    if spec.parameter not in ("d", "temperature"):
        set_config_path(cfg.raw, spec.parameter, 0.0)  # validate the path exists up front
    columns = (spec.parameter, *spec.columns, "error")
    tasks = [(f"point-{i}", (lambda v=v: _sweep_row(cfg, spec, v))) for i, v in enumerate(spec.values)]
    return _run_tasks(tasks, jobs), columns


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decolab",
                                     description="Short-time decoherence rates of spatially correlated qubits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON scenario config")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="concurrent tasks for verify/sweep")

    common(sub.add_parser("rates", help="closed-form or factorized damping coefficients"))
    p_corr = sub.add_parser("correlation", help="spatial correlation profile")
    common(p_corr)
    p_corr.add_argument("--delta-r", help="comma-separated separations (overrides config delta_r)")
    p_reg = sub.add_parser("regime", help="independent/collective classification")
    common(p_reg)
    p_reg.add_argument("--d", help="comma-separated qubit spacings (overrides config d)")
    p_ver = sub.add_parser("verify", help="closed forms vs the exact-evolution oracle")
    common(p_ver, config_required=False)
    p_ver.add_argument("--suite", choices=SUITE_NAMES, help="built-in suite to run")
    common(sub.add_parser("sweep", help="parameter sweep with selected output columns"))
    return parser


def _parse_float_list(raw: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(flag, f"expected comma-separated numbers, got {raw!r}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = None
        if args.config:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = parse_config({**cfg.raw, "seed": args.seed})
        seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)

        verify_failed = False
        if args.command == "rates":
            rows, columns = cmd_rates(cfg), RATES_COLUMNS
        elif args.command == "correlation":
            deltas = _parse_float_list(args.delta_r, "--delta-r") if args.delta_r else list(cfg.delta_r)
            if not deltas:
                raise ConfigError("delta_r", "no separations given (config delta_r or --delta-r)")
            rows, columns = cmd_correlation(cfg, deltas), CORRELATION_COLUMNS
        elif args.command == "regime":
            ds = _parse_float_list(args.d, "--d") if args.d else list(cfg.d_values)
            if not ds:
                raise ConfigError("d", "no spacings given (config d or --d)")
            rows, columns = cmd_regime(cfg, ds), REGIME_COLUMNS
        elif args.command == "verify":
            if (args.suite is None) == (cfg is None):
                raise ConfigError("verify", "exactly one of --suite or --config is required")
            rows, columns = cmd_verify(cfg, args.suite, seed, args.jobs), VERIFY_COLUMNS
            verify_failed = any(not r["pass"] for r in rows)
        else:
            rows, columns = cmd_sweep(cfg, args.jobs)

        text = rows_to_csv(rows, columns) if args.format == "csv" else rows_to_json(rows, columns)
        _emit(text, args.out)
        return EXIT_VERIFY if verify_failed else EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # domain validation raised outside the config layer (e.g. a degenerate
        # spectrum handed to the classifier): still the caller's input
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
