"""Parameter sweeps, flat-file configuration and deterministic CSV/JSON output.

Configs are flat `key = value` text; every key has a default so the CLI runs
bare.  Output is byte-deterministic: fixed column order, shortest round-trip
floats, no timestamps.  Every scan row carries the closed-form QFIs, the
general-form QFI recomputed from correlations, and the (beta, gamma) and
radius-polynomial decompositions; rows where the general form drifts from
the matching closed form beyond 1e-10 relative abort the run.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, ConsistencyError, SizeGuardError
from .model import (
    DrivingProfile,
    PhysicalParams,
    coefficients,
    derive_constants,
)
from .oracle import (
    build_displacement,
    build_evolution_closed,
    build_evolution_stepped,
    covariance_reduction_check,
    generator_analytic,
    generator_numeric,
    qfi_fidelity_numeric,
    qfi_variance_numeric,
    quadrature_site_operator,
    sigma_z_site_operator,
    trusted_columns,
)
from .qfi import (
    generator_spec,
    qfi_difference,
    qfi_general,
    qfi_global_closed,
    qfi_partial_closed,
)
from .states import (
    correlations_closed_form,
    correlations_generic,
    correlations_single_branch,
    displaced_fock_amplitudes,
    make_globally_entangled,
    make_partially_entangled,
)

CSV_HEADER = "# sagnac-qfi v1"
ROW_CROSS_CHECK_RTOL = 1e-10

# Key -> (type, default).  Types: float, int, str.
CONFIG_SCHEMA: dict[str, tuple[type, object]] = {
    "physical.mass": (float, 1.0),
    "physical.hbar": (float, 1.0),
    "physical.trap_frequency": (float, 1.0),
    "physical.ring_radius": (float, 1.0),
    "physical.rotation_rate": (float, 0.0),
    "profile.kind": (str, "constant"),
    "profile.omega_p": (float, 0.0),
    "profile.tau": (float, 0.0),
    "state.kind": (str, "global"),
    "state.alpha_re": (float, -1.0),
    "state.alpha_im": (float, 0.0),
    "state.n": (int, 0),
    "state.truncation": (int, 0),
    "n_particles": (int, 100),
    "sweep.variable": (str, "N"),
    "sweep.start": (float, 100.0),
    "sweep.stop": (float, 1000.0),
    "sweep.points": (int, 20),
    "sweep.scale": (str, "log"),
    "oracle.n_max": (int, 2),
    "oracle.inject_fault": (str, "none"),
}

STATE_KINDS = ("partial", "global", "product")
SWEEP_VARIABLES = ("N", "theta_alpha", "abs_alpha", "tau", "radius")


@dataclass(frozen=True)
class ScanConfig:
    values: dict

    def __getitem__(self, key: str):
        return self.values[key]

    def params(self) -> PhysicalParams:
        try:
            return PhysicalParams(
                mass=self["physical.mass"],
                hbar=self["physical.hbar"],
                trap_frequency=self["physical.trap_frequency"],
                ring_radius=self["physical.ring_radius"],
                rotation_rate=self["physical.rotation_rate"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def alpha(self) -> complex:
        return complex(self["state.alpha_re"], self["state.alpha_im"])

    def resolve_tau(self) -> tuple[float, float]:
        """(tau, omega_p) from the profile block; either may be derived from
        the other through omega_p * tau = pi."""
        if self["profile.kind"] != "constant":
            raise ConfigError(
                f"CLI supports profile.kind = constant only, got "
                f"{self['profile.kind']!r} (use the library API for other kinds)"
            )
        tau = self["profile.tau"]
        omega_p = self["profile.omega_p"]
        if tau <= 0.0 and omega_p <= 0.0:
            raise ConfigError("set profile.tau or profile.omega_p (positive)")
        if tau <= 0.0:
            tau = math.pi / omega_p
        elif omega_p <= 0.0:
            omega_p = math.pi / tau
        elif abs(omega_p * tau - math.pi) > 1e-8 * math.pi:
            raise ConfigError(
                f"profile.omega_p * profile.tau = {omega_p * tau!r} must equal pi; "
                f"set one of them to 0 to derive it"
            )
        return tau, omega_p


def _coerce(key: str, raw: str):
    typ, _ = CONFIG_SCHEMA[key]
    try:
        if typ is float:
            return float(raw)
        if typ is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(f"{raw!r} is not an integer")
            return int(value)
        return raw
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {typ.__name__}") from exc


def load_config(path: str | None = None, overrides=()) -> ScanConfig:
    """Defaults, then the optional config file, then --set overrides."""
    values = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in CONFIG_SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw.strip())
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"--set: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    if values["state.kind"] not in STATE_KINDS:
        raise ConfigError(
            f"state.kind must be one of {STATE_KINDS}, got {values['state.kind']!r}"
        )
    if values["sweep.variable"] not in SWEEP_VARIABLES:
        raise ConfigError(
            f"sweep.variable must be one of {SWEEP_VARIABLES}, "
            f"got {values['sweep.variable']!r}"
        )
    if values["state.n"] < 0:
        raise ConfigError(f"state.n must be nonnegative, got {values['state.n']}")
    if values["n_particles"] < 1:
        raise ConfigError(f"n_particles must be positive, got {values['n_particles']}")
    return ScanConfig(values=values)


ROW_FIELDS = (
    "value",
    "f_partial",
    "f_global",
    "f_general",
    "beta",
    "gamma",
    "lambda1",
    "lambda2",
    "lambda3",
    "c1_re",
    "c1_im",
    "c2",
    "t_c",
    "t_s",
    "sagnac_phase",
    "reduced_radius",
)


def _build_state(cfg: ScanConfig, alpha: complex | None = None):
    kind = cfg["state.kind"]
    if alpha is None:
        alpha = cfg.alpha()
    d = cfg["state.truncation"]
    if kind == "partial":
        return make_partially_entangled(alpha, cfg["state.n"], d=d)
    if kind == "global":
        return make_globally_entangled(alpha, d=d)
    return None  # product: closed-form correlations only


def _correlations_for(cfg: ScanConfig, c1: complex, alpha: complex | None = None):
    kind = cfg["state.kind"]
    if kind == "product":
        return correlations_single_branch(cfg["state.n"], c1)
    state = _build_state(cfg, alpha)
    return correlations_generic(state, c1)


def _compute_row(
    value: float,
    cfg: ScanConfig,
    params: PhysicalParams,
    tau: float,
    n_particles: int,
    alpha: complex | None = None,
) -> dict:
    if alpha is None:
        alpha = cfg.alpha()
    constants = derive_constants(params)
    profile = DrivingProfile.constant_for(tau)
    coeffs = coefficients(params, profile, tau)
    corr = _correlations_for(cfg, coeffs.c1, alpha)
    gen = generator_spec(constants, coeffs, n_particles)
    breakdown = qfi_general(corr, gen, constants)
    f_partial = qfi_partial_closed(cfg["state.n"], n_particles, constants, coeffs)
    f_global = qfi_global_closed(alpha, n_particles, constants, coeffs)

    kind = cfg["state.kind"]
    if kind == "partial":
        reference = f_partial
    elif kind == "global":
        reference = f_global
    else:
        reference = 4.0 * breakdown.beta * n_particles
    drift = abs(breakdown.qfi - reference)
    if drift > ROW_CROSS_CHECK_RTOL * max(1.0, abs(reference)):
        raise ConsistencyError(
            f"row value {value!r}: general-form QFI {breakdown.qfi!r} disagrees "
            f"with the {kind} closed form {reference!r}"
        )
    return {
        "value": value,
        "f_partial": f_partial,
        "f_global": f_global,
        "f_general": breakdown.qfi,
        "beta": breakdown.beta,
        "gamma": breakdown.gamma,
        "lambda1": breakdown.lambda1,
        "lambda2": breakdown.lambda2,
        "lambda3": breakdown.lambda3,
        "c1_re": coeffs.c1.real,
        "c1_im": coeffs.c1.imag,
        "c2": coeffs.c2,
        "t_c": constants.t_c,
        "t_s": constants.t_s,
        "sagnac_phase": constants.sagnac_phase,
        "reduced_radius": constants.reduced_radius,
    }


def _sweep_values(cfg: ScanConfig) -> np.ndarray:
    start, stop = cfg["sweep.start"], cfg["sweep.stop"]
    points = cfg["sweep.points"]
    if points < 2:
        raise ConfigError(f"sweep.points must be at least 2, got {points}")
    if start >= stop:
        raise ConfigError(
            f"sweep range [{start}, {stop}] must be nonempty and increasing"
        )
    if cfg["sweep.scale"] == "log":
        if start <= 0:
            raise ConfigError("log scale requires a positive sweep range")
        return np.logspace(math.log10(start), math.log10(stop), points)
    if cfg["sweep.scale"] != "linear":
        raise ConfigError(f"sweep.scale must be linear or log, got {cfg['sweep.scale']!r}")
    return np.linspace(start, stop, points)


def run_scan_n(cfg: ScanConfig) -> dict:
    """Sweep particle number; fit the log-log slope of F_global (or of the
    configured state's general-form QFI for the product kind)."""
    if cfg["sweep.variable"] != "N":
        raise ConfigError("scan-n requires sweep.variable = N")
    params = cfg.params()
    tau, omega_p = cfg.resolve_tau()
    raw = _sweep_values(cfg)
    n_values = np.unique(np.round(raw).astype(int))
    n_values = n_values[n_values >= 1]
    if n_values.size < 2:
        raise ConfigError("sweep over N collapsed to fewer than 2 distinct values")
    rows = [
        _compute_row(float(n), cfg, params, tau, int(n)) for n in n_values
    ]
    column = "f_general" if cfg["state.kind"] == "product" else "f_global"
    logs_n = np.log10([row["value"] for row in rows])
    logs_f = np.log10([row[column] for row in rows])
    slope, intercept = np.polyfit(logs_n, logs_f, 1)
    fitted = slope * logs_n + intercept
    residual = float(np.sqrt(np.mean((logs_f - fitted) ** 2)))
    return {
        "rows": rows,
        "summary": {
            "slope_log10": float(slope),
            "slope_residual_rms": residual,
            "slope_column": column,
            "omega_p": omega_p,
            "tau": tau,
        },
    }


def run_scan_alpha(cfg: ScanConfig) -> dict:
    """Sweep the coherent amplitude's phase (theta_alpha) or magnitude
    (abs_alpha), holding the other polar coordinate at the configured alpha."""
    variable = cfg["sweep.variable"]
    if variable not in ("theta_alpha", "abs_alpha"):
        raise ConfigError("scan-alpha requires sweep.variable = theta_alpha or abs_alpha")
    params = cfg.params()
    tau, omega_p = cfg.resolve_tau()
    n_particles = cfg["n_particles"]
    base = cfg.alpha()
    rows = []
    for value in _sweep_values(cfg):
        if variable == "theta_alpha":
            alpha = abs(base) * np.exp(1j * value)
        else:
            alpha = value * np.exp(1j * np.angle(base))
        rows.append(
            _compute_row(float(value), cfg, params, tau, n_particles, alpha=complex(alpha))
        )
    f_vals = np.array([row["f_global"] for row in rows])
    maxima = [
        rows[i]["value"]
        for i in range(1, len(rows) - 1)
        if f_vals[i] > f_vals[i - 1] and f_vals[i] > f_vals[i + 1]
    ]
    return {
        "rows": rows,
        "summary": {
            "maxima_at": maxima,
            "omega_p": omega_p,
            "tau": tau,
        },
    }


def run_scan_tau(cfg: ScanConfig) -> dict:
    """Sweep tau with omega_p = pi/tau recomputed per row; emit per-N^2 QFIs,
    their difference, maxima and equality locations, and the onset of the
    steady regime of F_partial/N^2."""
    if cfg["sweep.variable"] != "tau":
        raise ConfigError("scan-tau requires sweep.variable = tau")
    params = cfg.params()
    n_particles = cfg["n_particles"]
    t0 = 2.0 * math.pi / params.trap_frequency
    rows = []
    for value in _sweep_values(cfg):
        tau = float(value)
        if tau <= 0:
            raise ConfigError(f"tau sweep values must be positive, got {tau}")
        row = _compute_row(tau, cfg, params, tau, n_particles)
        row["omega_p"] = math.pi / tau
        row["tau_over_t0"] = tau / t0
        row["f_partial_per_n2"] = row["f_partial"] / n_particles**2
        row["f_global_per_n2"] = row["f_global"] / n_particles**2
        row["difference_per_n2"] = row["f_global_per_n2"] - row["f_partial_per_n2"]
        rows.append(row)

    f_global = np.array([row["f_global_per_n2"] for row in rows])
    diff = np.array([row["difference_per_n2"] for row in rows])
    taus = np.array([row["value"] for row in rows])
    maxima = [
        float(taus[i] / t0)
        for i in range(1, len(rows) - 1)
        if f_global[i] > f_global[i - 1] and f_global[i] > f_global[i + 1]
    ]
    equality = [
        float(taus[i] / t0)
        for i in range(1, len(rows) - 1)
        if abs(diff[i]) <= abs(diff[i - 1]) and abs(diff[i]) < abs(diff[i + 1])
        and abs(diff[i]) < 1e-3 * max(1.0, float(np.max(np.abs(diff))))
    ]
    return {
        "rows": rows,
        "summary": {
            "maxima_tau_over_t0": maxima,
            "equality_tau_over_t0": equality,
            "steady_onset_tau_over_t0": _steady_onset(taus, rows, t0),
            "t0": t0,
        },
    }


def _steady_onset(taus: np.ndarray, rows: list, t0: float) -> float | None:
    """First tau (in T0 units) from which F_partial/N^2 varies by less than 1%
    relative over one T0 window."""
    values = np.array([row["f_partial_per_n2"] for row in rows])
    for i in range(len(taus)):
        if taus[i] + t0 > taus[-1] + 1e-12:
            break  # window would run past the sweep; no verdict there
        window = values[(taus >= taus[i]) & (taus <= taus[i] + t0)]
        if window.size < 2:
            continue
        mean = float(np.mean(window))
        if mean > 0 and (np.max(window) - np.min(window)) / mean < 0.01:
            return float(taus[i] / t0)
    return None


# ---------------------------------------------------------------------------
# Oracle verification suite
# ---------------------------------------------------------------------------


def _identity(name: str, error: float, tolerance: float) -> dict:
    return {
        "name": name,
        "error": float(error),
        "tolerance": float(tolerance),
        "passed": bool(error <= tolerance),
    }


def run_oracle_check(cfg: ScanConfig, seed: int = 0) -> dict:
    """Machine-readable report of every oracle identity.

    oracle.inject_fault = c2-sign flips the C2 sign in the analytic generator
    before comparing against the finite-difference generator, demonstrating
    that the suite detects a corrupted coefficient.
    """
    n_max = cfg["oracle.n_max"]
    if not 1 <= n_max <= 3:
        raise SizeGuardError(
            f"oracle.n_max must be between 1 and 3, got {n_max} "
            f"(exact simulation above N = 3 exceeds the desk-scale envelope)"
        )
    fault = cfg["oracle.inject_fault"]
    if fault not in ("none", "c2-sign"):
        raise ConfigError(f"oracle.inject_fault must be none or c2-sign, got {fault!r}")

    params = cfg.params()
    rng = np.random.default_rng(seed)
    t0 = 2.0 * math.pi / params.trap_frequency
    identities: list[dict] = []

    # Displacement matrix vs the associated-Laguerre column formula.
    alpha = complex(rng.normal(0.0, 0.8), rng.normal(0.0, 0.8))
    d = 40
    disp = build_displacement(alpha, d)
    err = 0.0
    for n in (0, 1, 3):
        column = displaced_fock_amplitudes(alpha, n, d)
        k_trust = trusted_columns(d, abs(alpha))
        err = max(err, float(np.max(np.abs(disp[:k_trust, n] - column[:k_trust]))))
    identities.append(_identity("displacement-vs-laguerre", err, 1e-10))

    # Closed evolution vs the time-ordered product, constant and piecewise.
    tau = 0.7 * t0
    for label, profile in (
        ("constant", DrivingProfile.constant_for(tau)),
        (
            "piecewise",
            DrivingProfile.piecewise(
                [(tau / 4.0, 2.0 * math.pi / tau), (3.0 * tau / 4.0, 2.0 * math.pi / (3.0 * tau))]
            ),
        ),
    ):
        worst = 0.0
        for spin in (+1, -1):
            coeffs = coefficients(params, profile, tau)
            d_evo = max(60, int((abs(coeffs.eta(spin)) + 4.0) ** 2) + 40)
            closed = build_evolution_closed(params, profile, tau, spin, d_evo)
            stepped = build_evolution_stepped(params, profile, tau, spin, d_evo, 10_000)
            k_trust = trusted_columns(d_evo, abs(coeffs.eta(spin)))
            worst = max(
                worst, float(np.max(np.abs((closed - stepped)[:, :k_trust])))
            )
        identities.append(_identity(f"evolution-closed-vs-stepped-{label}", worst, 1e-6))

    # Finite-difference generator vs the analytic one, both spins.
    tau = t0 / 2.0
    profile = DrivingProfile.constant_for(tau)
    coeffs = coefficients(params, profile, tau)
    constants = derive_constants(params)
    if fault == "c2-sign":
        coeffs = dataclasses.replace(coeffs, c2=-coeffs.c2)
    worst = 0.0
    for spin in (+1, -1):
        d_gen = max(50, int((abs(coeffs.eta(spin)) + 4.0) ** 2) + 40)
        h_num = generator_numeric(params, profile, tau, spin, d_gen)
        h_ana = generator_analytic(constants, coeffs, spin, d_gen)
        k_trust = trusted_columns(d_gen, abs(coeffs.eta(spin)))
        worst = max(
            worst,
            float(np.max(np.abs((h_num - h_ana)[:k_trust, :k_trust]))),
        )
    identities.append(_identity("generator-numeric-vs-analytic", worst, 1e-6))

    # Dual oracle vs closed forms over the configuration grid.
    var_err = 0.0
    fid_err = 0.0
    for n_particles in range(1, min(n_max, 2) + 1):
        for tau in (t0 / 4.0, t0 / 2.0, t0):
            profile = DrivingProfile.constant_for(tau)
            coeffs = coefficients(params, profile, tau)
            constants = derive_constants(params)
            for kind in ("partial", "global"):
                if kind == "partial":
                    state = make_partially_entangled(
                        0.5 - 0.3j, 1, n_particles=n_particles
                    )
                    closed = qfi_partial_closed(1, n_particles, constants, coeffs)
                else:
                    state = make_globally_entangled(-1.0, n_particles=n_particles)
                    closed = qfi_global_closed(-1.0, n_particles, constants, coeffs)
                scale = max(1.0, abs(closed))
                f_var = qfi_variance_numeric(state, params, profile, tau)
                var_err = max(var_err, abs(f_var - closed) / scale)
                f_fid = qfi_fidelity_numeric(state, params, profile, tau)
                fid_err = max(fid_err, abs(f_fid - closed) / scale)
    identities.append(_identity("qfi-variance-vs-closed", var_err, 1e-5))
    identities.append(_identity("qfi-fidelity-vs-closed", fid_err, 1e-5))

    # Covariance reduction on full vectors up to n_max.
    ok = True
    for n_particles in range(1, n_max + 1):
        state = make_partially_entangled(
            0.4 + 0.2j, 0, d=6, n_particles=n_particles, leakage=1e-6
        )
        tau = t0 / 2.0
        profile = DrivingProfile.constant_for(tau)
        c1 = coefficients(params, profile, tau).c1
        ok = ok and covariance_reduction_check(
            state, quadrature_site_operator(c1, 6), sigma_z_site_operator(6)
        )
    identities.append(_identity("covariance-reduction", 0.0 if ok else 1.0, 0.5))

    return {
        "version": CSV_HEADER.lstrip("# "),
        "seed": seed,
        "n_max": n_max,
        "inject_fault": fault,
        "identities": identities,
        "all_passed": all(item["passed"] for item in identities),
    }


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _echo_lines(cfg: ScanConfig, extra: dict | None = None) -> list[str]:
    params = cfg.params()
    lines = [
        CSV_HEADER,
        f"# mass = {_fmt(params.mass)}",
        f"# hbar = {_fmt(params.hbar)}",
        f"# trap_frequency = {_fmt(params.trap_frequency)}",
        f"# ring_radius = {_fmt(params.ring_radius)}",
        f"# rotation_rate = {_fmt(params.rotation_rate)}",
        f"# profile = {cfg['profile.kind']}",
        f"# state = {cfg['state.kind']} alpha = {_fmt(cfg['state.alpha_re'])}{cfg['state.alpha_im']:+}j n = {cfg['state.n']}",
        "# qfi_unit = time^2 (QCRB: Var(Omega_hat) >= 1 / (F * repetitions))",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"# {key} = {_fmt(value)}")
    return lines


def rows_to_csv(rows: list[dict], cfg: ScanConfig, extra: dict | None = None) -> str:
    out = io.StringIO()
    for line in _echo_lines(cfg, extra):
        out.write(line + "\n")
    if rows:
        fields = [f for f in ROW_FIELDS if f in rows[0]]
        fields += [f for f in rows[0] if f not in ROW_FIELDS]
        out.write(",".join(fields) + "\n")
        for row in rows:
            out.write(",".join(_fmt(row[f]) for f in fields) + "\n")
    return out.getvalue()


def result_to_json(result: dict, cfg: ScanConfig) -> str:
    params = cfg.params()
    payload = {
        "version": CSV_HEADER.lstrip("# "),
        "physical": {
            "mass": params.mass,
            "hbar": params.hbar,
            "trap_frequency": params.trap_frequency,
            "ring_radius": params.ring_radius,
            "rotation_rate": params.rotation_rate,
        },
        "state": {
            "kind": cfg["state.kind"],
            "alpha_re": cfg["state.alpha_re"],
            "alpha_im": cfg["state.alpha_im"],
            "n": cfg["state.n"],
        },
        "qfi_unit": "time^2",
        **result,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
