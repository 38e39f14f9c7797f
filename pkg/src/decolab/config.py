"""JSON scenario configuration: parsing, validation and object building.

Validation errors always carry the dotted path of the offending field.  The
schema is documented in the README; the short version:

    {
      "name": "demo",
      "qubits": [{"position": 0.0}, {"position": 0.7}],
      "lambda1": 1.0, "lambda2": 0.0,
      "h0_splittings": [1.0, 1.0],
      "bath": {"discrete": {"temperature": 0.0,
                            "modes": [{"k": 0.0, "omega": 1.0, "g": 0.05}]}},
      "state": "ground",
      "fidelity_kind": "entanglement",
      "seed": 0
    }

``bath`` takes exactly one of ``discrete``, ``ohmic`` or ``gaussian``.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .fidelity import Ensemble
from .model import BathMode, BathModeSet, QubitLattice
from .operators import DenseOperator, Ket
from .spectral import GaussianSpectrum, OhmicBath
from .states import PRESET_NAMES, build_preset, computational_ensemble, ket_from_amplitudes

DEFAULT_DIM_CAP = 4096
FIDELITY_KINDS = ("io", "entanglement", "average")
OHMIC_FORMS = ("quad", "highT", "lowT")


def dimension_cap() -> int:
    """Total-dimension guard, overridable through DECOLAB_NMAX_CAP."""
    raw = os.environ.get("DECOLAB_NMAX_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError("DECOLAB_NMAX_CAP", f"not an integer: {raw!r}") from exc
    if cap < 2:
        raise ConfigError("DECOLAB_NMAX_CAP", f"must be >= 2, got {cap}")
    return cap


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(path, message)


def _get_number(obj: dict, key: str, path: str, default=None, required: bool = False) -> float | None:
    if key not in obj:
        _expect(not required, f"{path}.{key}", "missing required field")
        return default
    v = obj[key]
    _expect(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}.{key}",
            f"expected a number, got {v!r}")
    _expect(math.isfinite(float(v)), f"{path}.{key}", "must be finite")
    return float(v)


def _get_int(obj: dict, key: str, path: str, default=None) -> int | None:
    if key not in obj:
        return default
    v = obj[key]
    _expect(isinstance(v, int) and not isinstance(v, bool), f"{path}.{key}",
            f"expected an integer, got {v!r}")
    return v


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario: lattice, bath, state and options."""

    name: str
    lattice: QubitLattice
    bath_kind: str  # discrete | ohmic | gaussian
    modes: BathModeSet | None
    ohmic: OhmicBath | None
    ohmic_form: str
    gaussian: GaussianSpectrum | None
    state_spec: object  # preset name or amplitude list
    fidelity_kinds: tuple[str, ...]
    ensemble_spec: tuple | None
    n_max: int | None
    seed: int
    delta_r: tuple[float, ...]
    d_values: tuple[float, ...]
    sweep: "SweepSpec | None"
    raw: dict = field(repr=False, default_factory=dict)

    def state(self) -> Ket | DenseOperator:
        return _build_state(self.state_spec, self.lattice, "state")

    def ensemble(self) -> Ensemble:
        """The configured ensemble, or one derived from the state."""
        if self.ensemble_spec is not None:
            members = []
            for i, (p, spec) in enumerate(self.ensemble_spec):
                st = _build_state(spec, self.lattice, f"ensemble[{i}].state")
                _expect(isinstance(st, Ket), f"ensemble[{i}].state", "ensemble members must be pure states")
                members.append((p, st))
            try:
                return Ensemble(tuple(members))
            except ValueError as exc:
                raise ConfigError("ensemble", str(exc)) from exc
        st = self.state()
        if isinstance(st, Ket):
            return Ensemble(((1.0, st),))
        if self.state_spec == "maximally_mixed":
            return computational_ensemble(self.lattice.n_qubits)
        raise ConfigError("ensemble", "an explicit ensemble is required for this mixed state")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    columns: tuple[str, ...]


SWEEP_COLUMNS = ("c2", "tau2", "method", "omega2", "normalized", "regime", "kbar_d", "dk_d")


def _build_state(spec, lattice: QubitLattice, path: str):
    if isinstance(spec, str):
        try:
            return build_preset(spec, lattice)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc
    # explicit amplitudes: numbers or [re, im] pairs
    values = []
    for i, entry in enumerate(spec):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            values.append(complex(entry))
        elif isinstance(entry, (list, tuple)) and len(entry) == 2:
            values.append(complex(entry[0], entry[1]))
        else:
            raise ConfigError(f"{path}[{i}]", f"expected a number or [re, im] pair, got {entry!r}")
    try:
        return ket_from_amplitudes(values, lattice.n_qubits)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_lattice(cfg: dict) -> QubitLattice:
    qubits = cfg.get("qubits")
    _expect(isinstance(qubits, list) and qubits, "qubits", "expected a non-empty list")
    positions = []
    for i, q in enumerate(qubits):
        _expect(isinstance(q, dict), f"qubits[{i}]", "expected an object with a 'position'")
        positions.append(_get_number(q, "position", f"qubits[{i}]", required=True))
    lambda1 = _get_number(cfg, "lambda1", "", default=1.0)
    lambda2 = _get_number(cfg, "lambda2", "", default=0.0)
    splits = cfg.get("h0_splittings", [])
    _expect(isinstance(splits, list), "h0_splittings", "expected a list of numbers")
    for i, w in enumerate(splits):
        _expect(isinstance(w, (int, float)) and not isinstance(w, bool),
                f"h0_splittings[{i}]", f"expected a number, got {w!r}")
    try:
        return QubitLattice(tuple(positions), lambda1, lambda2, tuple(float(w) for w in splits))
    except ValueError as exc:
        raise ConfigError("qubits", str(exc)) from exc


def _parse_bath(cfg: dict):
    bath = cfg.get("bath")
    _expect(isinstance(bath, dict), "bath", "expected an object")
    variants = [k for k in ("discrete", "ohmic", "gaussian") if k in bath]
    _expect(len(variants) == 1, "bath", f"exactly one of discrete/ohmic/gaussian required, got {sorted(bath)}")
    kind = variants[0]
    body = bath[kind]
    _expect(isinstance(body, dict), f"bath.{kind}", "expected an object")

    if kind == "discrete":
        temperature = _get_number(body, "temperature", "bath.discrete", default=0.0)
        modes_raw = body.get("modes")
        _expect(isinstance(modes_raw, list) and modes_raw, "bath.discrete.modes", "expected a non-empty list")
        modes = []
        for i, m in enumerate(modes_raw):
            _expect(isinstance(m, dict), f"bath.discrete.modes[{i}]", "expected an object")
            k = _get_number(m, "k", f"bath.discrete.modes[{i}]", required=True)
            omega = _get_number(m, "omega", f"bath.discrete.modes[{i}]", required=True)
            g = _get_number(m, "g", f"bath.discrete.modes[{i}]", required=True)
            modes.append(BathMode(k, omega, g))
        try:
            return kind, BathModeSet(tuple(modes), temperature), None, "quad", None
        except ValueError as exc:
            raise ConfigError("bath.discrete.modes", str(exc)) from exc

    if kind == "ohmic":
        form = body.get("form", "quad")
        _expect(form in OHMIC_FORMS, "bath.ohmic.form", f"expected one of {OHMIC_FORMS}, got {form!r}")
        omega_c = _get_number(body, "omega_c", "bath.ohmic", required=True)
        v = _get_number(body, "v", "bath.ohmic", required=True)
        temperature = _get_number(body, "temperature", "bath.ohmic", default=0.0)
        amplitude = _get_number(body, "amplitude", "bath.ohmic", default=1.0)
        try:
            bathobj = OhmicBath(omega_c, v, temperature, amplitude)
        except ValueError as exc:
            raise ConfigError("bath.ohmic", str(exc)) from exc
        return kind, None, bathobj, form, None

    k_bar = _get_number(body, "k_bar", "bath.gaussian", required=True)
    delta_k = _get_number(body, "delta_k", "bath.gaussian", required=True)
    x = _get_number(body, "x", "bath.gaussian", required=True)
    try:
        spec = GaussianSpectrum(k_bar, delta_k, x)
    except ValueError as exc:
        raise ConfigError("bath.gaussian", str(exc)) from exc
    return kind, None, None, "quad", spec


def _parse_number_list(cfg: dict, key: str) -> tuple[float, ...]:
    raw = cfg.get(key, [])
    _expect(isinstance(raw, list), key, "expected a list of numbers")
    out = []
    for i, v in enumerate(raw):
        _expect(isinstance(v, (int, float)) and not isinstance(v, bool), f"{key}[{i}]",
                f"expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _parse_sweep(cfg: dict) -> SweepSpec | None:
    raw = cfg.get("sweep")
    if raw is None:
        return None
    _expect(isinstance(raw, dict), "sweep", "expected an object")
    parameter = raw.get("parameter")
    _expect(isinstance(parameter, str) and parameter, "sweep.parameter", "expected a parameter path")

    has_values = "values" in raw
    has_range = "range" in raw
    _expect(has_values != has_range, "sweep", "exactly one of 'values' or 'range' required")
    if has_values:
        values = _parse_number_list(raw, "values")
    else:
        rng = raw["range"]
        _expect(isinstance(rng, dict), "sweep.range", "expected an object")
        start = _get_number(rng, "start", "sweep.range", required=True)
        stop = _get_number(rng, "stop", "sweep.range", required=True)
        count = _get_int(rng, "count", "sweep.range")
        _expect(isinstance(count, int) and count >= 1, "sweep.range.count", "expected a positive integer")
        scale = rng.get("scale", "linear")
        _expect(scale in ("linear", "log"), "sweep.range.scale", f"expected linear or log, got {scale!r}")
        if scale == "log":
            _expect(start > 0 and stop > 0, "sweep.range", "log scale requires positive bounds")
            if count == 1:
                values = (start,)
            else:
                ratio = (stop / start) ** (1.0 / (count - 1))
                values = tuple(start * ratio ** i for i in range(count))
        else:
            if count == 1:
                values = (start,)
            else:
                step = (stop - start) / (count - 1)
                values = tuple(start + step * i for i in range(count))
    cols = raw.get("columns", ["c2", "tau2"])
    _expect(isinstance(cols, list) and cols, "sweep.columns", "expected a non-empty list")
    for i, c in enumerate(cols):
        _expect(c in SWEEP_COLUMNS, f"sweep.columns[{i}]", f"expected one of {SWEEP_COLUMNS}, got {c!r}")
    return SweepSpec(parameter, values, tuple(cols))


def parse_config(cfg: dict) -> ScenarioConfig:
    """Validate a raw JSON document into a :class:`ScenarioConfig`."""
    _expect(isinstance(cfg, dict), "", "top-level config must be an object")
    name = cfg.get("name", "scenario")
    _expect(isinstance(name, str) and name, "name", "expected a non-empty string")
    _expect("," not in name and "\n" not in name, "name", "must not contain commas or newlines")

    lattice = _parse_lattice(cfg)
    bath_kind, modes, ohmic, ohmic_form, gaussian = _parse_bath(cfg)

    state_spec = cfg.get("state", "ground")
    if not isinstance(state_spec, str):
        _expect(isinstance(state_spec, list) and state_spec, "state",
                f"expected a preset name {PRESET_NAMES} or an amplitude list")
    elif state_spec not in PRESET_NAMES:
        raise ConfigError("state", f"unknown preset {state_spec!r}; expected one of {PRESET_NAMES}")
    if state_spec == "encoded":
        _expect(lattice.n_qubits % 2 == 0, "state", "the encoded preset needs an even qubit count")

    kinds_raw = cfg.get("fidelity_kind", "entanglement")
    if isinstance(kinds_raw, str):
        kinds_raw = [kinds_raw]
    _expect(isinstance(kinds_raw, list) and kinds_raw, "fidelity_kind", "expected a kind or list of kinds")
    for k in kinds_raw:
        _expect(k in FIDELITY_KINDS, "fidelity_kind", f"expected one of {FIDELITY_KINDS}, got {k!r}")

    ensemble_spec = None
    if "ensemble" in cfg:
        raw_ens = cfg["ensemble"]
        _expect(isinstance(raw_ens, list) and raw_ens, "ensemble", "expected a non-empty list")
        pairs = []
        for i, entry in enumerate(raw_ens):
            _expect(isinstance(entry, dict), f"ensemble[{i}]", "expected an object with 'p' and 'state'")
            p = _get_number(entry, "p", f"ensemble[{i}]", required=True)
            _expect("state" in entry, f"ensemble[{i}].state", "missing required field")
            pairs.append((p, entry["state"]))
        ensemble_spec = tuple(pairs)

    n_max = _get_int(cfg, "n_max", "")
    if n_max is not None:
        _expect(n_max >= 1, "n_max", f"must be >= 1, got {n_max}")
    seed = _get_int(cfg, "seed", "", default=0)

    config = ScenarioConfig(
        name=name,
        lattice=lattice,
        bath_kind=bath_kind,
        modes=modes,
        ohmic=ohmic,
        ohmic_form=ohmic_form,
        gaussian=gaussian,
        state_spec=state_spec if isinstance(state_spec, str) else tuple(map(tuple_or_scalar, state_spec)),
        fidelity_kinds=tuple(kinds_raw),
        ensemble_spec=ensemble_spec,
        n_max=n_max,
        seed=seed,
        delta_r=_parse_number_list(cfg, "delta_r"),
        d_values=_parse_number_list(cfg, "d"),
        sweep=_parse_sweep(cfg),
        raw=copy.deepcopy(cfg),
    )
    # force state construction so bad amplitude lists fail at parse time
    config.state()
    return config


def tuple_or_scalar(entry):
    return tuple(entry) if isinstance(entry, list) else entry


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(raw)


def set_config_path(raw: dict, dotted: str, value: float) -> dict:
    """Return a copy of ``raw`` with the dotted path set to ``value``."""
    out = copy.deepcopy(raw)
    parts = dotted.split(".")
    node = out
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ConfigError(f"sweep.parameter", f"path {dotted!r} not found in the config")
        node = node[p]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError("sweep.parameter", f"path {dotted!r} not found in the config")
    node[parts[-1]] = value
    return out
