"""Scenario runner.

Configuration is flat ``key = value`` text with ``#`` comments::

    m1 = exponential 1.0 0.2
    m2 = powerlaw 1.0 0.3 2
    w1 = constant 1
    w2 = constant 1
    k = constant 0.3
    grid = 0 5 0.001
    pipelines = all

Exit codes: 0 ok, 1 usage/parse, 2 invariant violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    STANDARD_MU0,
    TimeGrid,
    constant_mass_control,
    equivalence_residual,
    evolve,
    frame_trajectory,
    noise_baseline,
    propagator,
    single_oscillator_demo,
)
from .errors import ConfigError, DomainError, InvariantViolation, NumericalFailure, TruncationError
from .params import (
    MIN_POSITIVITY_SAMPLES,
    Constant,
    Exponential,
    Harmonic,
    PowerLaw,
    RefMassMode,
    SystemParams,
    Tabulated,
    eval_family,
)
from .quadratic import Pipeline
from .sympl import Direction, GaussianState, check_symplectic, frame_matrices, push_state

log = logging.getLogger("massframe")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_NUMERICAL = 0, 1, 2, 3

FAMILY_ARITY = {
    "constant": (1, 1),
    "exponential": (2, 2),
    "powerlaw": (3, 3),
    "harmonic": (3, 4),
}
REQUIRED = ("m1", "m2", "w1", "w2", "k", "grid")
OPTIONAL = (
    "ref_mass_mode",
    "state",
    "mu",
    "sigma",
    "pipelines",
    "fock",
    "fock_d",
    "fock_h",
    "fock_t1",
    "fock_amplitude",
    "tolerance",
    "output",
)
CSV_COLUMNS = ["t", "mu_x1", "mu_x2", "mu_p1", "mu_p2"] + [
    f"sigma_{a}{b}" for i, a in enumerate(("x1", "x2", "p1", "p2")) for b in ("x1", "x2", "p1", "p2")[i:]
]

# frames whose lab-mapped dynamics must reproduce Direct; the final-frame and MG
# candidates are judged by the oracle instead
EXACT_FRAMES = (Pipeline.TILDE, Pipeline.UNIT_MASS_TILDE)
FINAL_CANDIDATES = (Pipeline.CORRECTED_FINAL, Pipeline.PAPER_FINAL)


@dataclass(frozen=True)
class ScenarioConfig:
    params: SystemParams
    grid: TimeGrid
    state: GaussianState
    pipelines: tuple = tuple(Pipeline)
    fock_enabled: bool = False
    fock_d: int = 30
    fock_h: float = 0.01
    fock_t1: float | None = None
    fock_amplitude: float = 0.5
    tolerance: float = 1e-5
    output: str | None = None
    families: dict = field(default_factory=dict, compare=False)


def _floats(text, key, line):
    try:
        return [float(v) for v in text.split()]
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects numbers, got {text!r}", line=line, key=key) from None


def parse_family(text: str, key: str = "?", line: int | None = None):
    parts = text.split()
    if not parts:
        raise ConfigError(f"line {line}: empty family spec for {key}", line=line, key=key)
    name, args = parts[0].lower(), _floats(" ".join(parts[1:]), key, line)
    if name == "tabulated":
        if len(args) < 10 or len(args) % 2:
            raise ConfigError(f"line {line}: tabulated {key} needs >= 5 (t, value) pairs", line=line, key=key)
        return Tabulated(tuple(zip(args[::2], args[1::2])))
    if name not in FAMILY_ARITY:
        raise ConfigError(f"line {line}: unknown family {name!r} for {key}", line=line, key=key)
    lo, hi = FAMILY_ARITY[name]
    if not lo <= len(args) <= hi:
        raise ConfigError(f"line {line}: {name} takes {lo}-{hi} arguments for {key}", line=line, key=key)
    cls = {"constant": Constant, "exponential": Exponential, "powerlaw": PowerLaw, "harmonic": Harmonic}[name]
    return cls(*args)


def _tokenize(text: str):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in REQUIRED and key not in OPTIONAL:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, key=key)
        entries[key] = (value, lineno)
    return entries


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text; defaults h = 1e-3, unity reference mass, displaced state."""
    entries = _tokenize(text)
    for key in REQUIRED:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}", key=key)

    value, line = entries["grid"]
    g = _floats(value, "grid", line)
    if len(g) not in (2, 3):
        raise ConfigError(f"line {line}: grid expects 't0 t1 [h]'", line=line, key="grid")
    t0, t1 = g[0], g[1]
    h = g[2] if len(g) == 3 else 1e-3
    if not h > 0 or not t1 > t0:
        raise ConfigError(f"line {line}: grid needs t1 > t0 and h > 0", line=line, key="grid")
    try:
        grid = TimeGrid(t0, t1, h)
    except DomainError as exc:
        raise ConfigError(f"line {line}: {exc}", line=line, key="grid") from None

    families = {}
    sample_t = np.linspace(t0, t1, MIN_POSITIVITY_SAMPLES + 1)
    for key in ("m1", "m2", "w1", "w2", "k"):
        value, line = entries[key]
        try:
            fam = parse_family(value, key, line)
            vals = np.asarray(eval_family(fam, sample_t), dtype=float)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {line}: {key}: {exc}", line=line, key=key) from None
        if key in ("m1", "m2") and (np.any(vals <= 0) or not np.all(np.isfinite(vals))):
            raise ConfigError(f"line {line}: mass {key} must be positive on [{t0}, {t1}]", line=line, key=key)
        families[key] = fam

    mode = RefMassMode.UNITY
    if "ref_mass_mode" in entries:
        value, line = entries["ref_mass_mode"]
        try:
            mode = RefMassMode(value.lower())
        except ValueError:
            raise ConfigError(f"line {line}: ref_mass_mode must be unity or geometric_mean", line=line, key="ref_mass_mode") from None
    params = SystemParams(window=(t0, t1), ref_mass_mode=mode, **families)

    preset = "displaced"
    if "state" in entries:
        preset, line = entries["state"]
        if preset not in ("vacuum", "displaced"):
            raise ConfigError(f"line {line}: state must be vacuum or displaced", line=line, key="state")
    mu = np.zeros(4) if preset == "vacuum" else np.array(STANDARD_MU0)
    sigma = 0.5 * np.eye(4)
    if "mu" in entries:
        value, line = entries["mu"]
        mu = np.array(_floats(value, "mu", line))
        if mu.size != 4:
            raise ConfigError(f"line {line}: mu needs 4 numbers", line=line, key="mu")
    if "sigma" in entries:
        value, line = entries["sigma"]
        vals = _floats(value, "sigma", line)
        if len(vals) != 16:
            raise ConfigError(f"line {line}: sigma needs 16 numbers (row-major)", line=line, key="sigma")
        sigma = np.array(vals).reshape(4, 4)
        if not np.allclose(sigma, sigma.T, atol=1e-12):
            raise ConfigError(f"line {line}: sigma must be symmetric", line=line, key="sigma")
    state = GaussianState(mu, sigma)
    if not state.is_physical(1e-9):
        raise ConfigError("initial covariance violates the uncertainty principle", key="sigma")

    pipelines = tuple(Pipeline)
    if "pipelines" in entries:
        value, line = entries["pipelines"]
        names = value.replace(",", " ").split()
        if names != ["all"]:
            try:
                pipelines = tuple(Pipeline(n) for n in names)
            except ValueError:
                raise ConfigError(f"line {line}: unknown pipeline in {value!r}", line=line, key="pipelines") from None

    opts = {}
    if "fock" in entries:
        value, line = entries["fock"]
        if value.lower() not in ("on", "off", "true", "false"):
            raise ConfigError(f"line {line}: fock must be on or off", line=line, key="fock")
        opts["fock_enabled"] = value.lower() in ("on", "true")
    for key, conv in (("fock_d", int), ("fock_h", float), ("fock_t1", float), ("fock_amplitude", float), ("tolerance", float)):
        if key in entries:
            value, line = entries[key]
            try:
                opts[key] = conv(value)
            except ValueError:
                raise ConfigError(f"line {line}: bad value for {key}", line=line, key=key) from None
            if opts[key] <= 0:
                raise ConfigError(f"line {line}: {key} must be positive", line=line, key=key)
    if "output" in entries:
        opts["output"] = entries["output"][0]
    return ScenarioConfig(params, grid, state, pipelines, families=families, **opts)


@dataclass
class Report:
    summary: dict
    exit_code: int = EXIT_OK
    files: list = field(default_factory=list)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def trajectory_csv(traj) -> str:
    iu = np.triu_indices(4)
    rows = [",".join(CSV_COLUMNS)]
    for t, mu, sig in zip(traj.times, traj.mus, traj.sigmas):
        vals = [t, *mu, *sig[iu]]
        rows.append(",".join(f"{v:.17g}" for v in vals))
    return "\n".join(rows) + "\n"


def _trajectory_invariants(traj) -> dict:
    det = np.linalg.det(traj.sigmas)
    nu = traj.symplectic_eigenvalues()
    return {
        "det_sigma_rel_drift": float(np.max(np.abs(det / det[0] - 1))),
        "symplectic_eig_rel_drift": float(np.max(np.abs(nu / nu[0] - 1))),
    }


def _invariants(cfg: ScenarioConfig, pipelines) -> dict:
    out = {}
    for pl in pipelines:
        traj = evolve(pl, cfg.params, _frame_initial(cfg, pl), cfg.grid)
        entry = _trajectory_invariants(traj)
        entry["propagator_symplectic_residual"] = check_symplectic(propagator(pl, cfg.params, cfg.grid))
        entry["frame_map_symplectic_residual"] = float(
            max(check_symplectic(M) for M in frame_matrices(pl, cfg.params, cfg.grid.times[:: max(1, cfg.grid.n // 50)]))
        )
        out[pl.value] = entry
    return out


def _frame_initial(cfg, pl):
    return push_state(cfg.state, frame_matrices(pl, cfg.params, cfg.grid.t0))


def _invariants_ok(inv: dict) -> bool:
    return all(
        v["det_sigma_rel_drift"] <= 1e-7
        and v["symplectic_eig_rel_drift"] <= 1e-7
        and v["propagator_symplectic_residual"] <= 1e-8
        and v["frame_map_symplectic_residual"] <= 1e-12
        for v in inv.values()
    )


def _equivalence(cfg: ScenarioConfig) -> dict:
    lab = evolve(Pipeline.DIRECT, cfg.params, cfg.state, cfg.grid)
    res = {}
    for pl in cfg.pipelines:
        if pl is Pipeline.DIRECT:
            continue
        mean_res, cov_res = equivalence_residual(pl, cfg.params, cfg.state, cfg.grid, lab)
        res[pl.value] = {"mean": mean_res, "cov": cov_res, "pass": bool(max(mean_res, cov_res) <= cfg.tolerance)}
    return res


def _verdict(res: dict) -> dict:
    winners = [pl.value for pl in FINAL_CANDIDATES if pl.value in res and res[pl.value]["pass"]]
    exact_ok = all(res[pl.value]["pass"] for pl in EXACT_FRAMES if pl.value in res)
    return {"final_frame_winners": winners, "exact_frames_ok": exact_ok}


def _mg(cfg: ScenarioConfig) -> dict:
    control = constant_mass_control(cfg.params)
    baseline = noise_baseline(control, cfg.state, cfg.grid)
    discrepancy = equivalence_residual(Pipeline.MACEDO_GUEDES, cfg.params, cfg.state, cfg.grid)[0]
    return {
        "discrepancy": discrepancy,
        "constant_mass_baseline": baseline,
        "ratio": discrepancy / baseline,
        "threshold": 10 * baseline,
        "flagged": bool(discrepancy > 10 * baseline),
    }


def cmd_simulate(cfg: ScenarioConfig, outdir: Path) -> Report:
    files = []
    for pl in cfg.pipelines:
        traj = (
            evolve(pl, cfg.params, cfg.state, cfg.grid)
            if pl is Pipeline.DIRECT
            else frame_trajectory(pl, cfg.params, cfg.state, cfg.grid)
        )
        path = outdir / f"{pl.value}.csv"
        _atomic_write(path, trajectory_csv(traj))
        files.append(str(path))
    report = cmd_verify(cfg)
    report.files = files
    if Pipeline.MACEDO_GUEDES in cfg.pipelines:
        report.summary["macedo_guedes"] = _mg(cfg)
    return report


def cmd_verify(cfg: ScenarioConfig) -> Report:
    res = _equivalence(cfg)
    verdict = _verdict(res)
    inv = _invariants(cfg, cfg.pipelines)
    summary = {"equivalence": res, "verdict": verdict, "invariants": inv}
    ok = verdict["exact_frames_ok"] and _invariants_ok(inv)
    if any(pl in cfg.pipelines for pl in FINAL_CANDIDATES) and not verdict["final_frame_winners"]:
        ok = False
    return Report(summary, EXIT_OK if ok else EXIT_INVARIANT)


def cmd_compare_mg(cfg: ScenarioConfig) -> Report:
    return Report({"macedo_guedes": _mg(cfg)})


def operator_identity_checks(d: int = 60) -> dict:
    """Conjugation identities, shear relation, direction oracle and composition order."""
    from . import fock

    x, p = fock.quadrature(d)
    checks = {}
    for u in (-0.3, -0.2, -0.1, 0.1, 0.2, 0.3):
        U = fock.dilation_unitary(u, d)
        checks[f"dilation_x_u={u:+.1f}"] = fock.conjugation_residual(U, x, np.exp(u) * x)
        checks[f"dilation_p_u={u:+.1f}"] = fock.conjugation_residual(U, p, np.exp(-u) * p)
    c = 0.1
    R = fock.shear_unitary(c, d)
    checks["shear_p"] = fock.conjugation_residual(R, p, p + 2 * c * x)
    checks["shear_x"] = fock.conjugation_residual(R, x, x)

    u = 0.2
    oracle = fock.frame_direction_oracle(u, d)
    vac1 = GaussianState.vacuum(2)
    pushed = push_state(vac1, np.diag([np.exp(u), np.exp(-u)]), Direction.TO_FRAME)
    checks["direction_oracle"] = abs(oracle["var_x"] - pushed.sigma[0, 0])

    # R T_u on vacuum versus the composed frame map (scaling @ shear)
    u, beta = 0.2, 0.3
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1
    psi = fock.shear_unitary(beta / 2, d) @ (fock.dilation_unitary(u, d) @ vac)
    mu_f, cov_f = fock.single_mode_moments(psi, d)
    M = np.array([[np.exp(u), 0.0], [0.0, np.exp(-u)]]) @ np.array([[1.0, 0.0], [beta, 1.0]])
    pushed = push_state(vac1, M, Direction.TO_FRAME)
    checks["composition_order"] = float(np.max(np.abs(cov_f - pushed.sigma)))
    return {"residuals": checks, "direction_rule": oracle["rule"]}


def cmd_fock_check(cfg: ScenarioConfig) -> Report:
    from . import fock

    ident = operator_identity_checks()
    summary = {"operator_identities": ident}
    r = ident["residuals"]
    ok = (
        all(v <= 1e-8 for k, v in r.items() if k.startswith(("dilation", "shear")))
        and r["direction_oracle"] <= 1e-6
        and r["composition_order"] <= 1e-5
        and ident["direction_rule"] == "inverse"
    )
    if cfg.fock_enabled:
        t1 = cfg.fock_t1 if cfg.fock_t1 is not None else min(cfg.grid.t1, cfg.grid.t0 + 3.0)
        g = TimeGrid(cfg.grid.t0, t1, cfg.fock_h)
        mu0 = cfg.fock_amplitude * cfg.state.mu
        psi0 = fock.TwoModeState.coherent(mu0, cfg.fock_d)
        ftraj = fock.two_mode_evolve(Pipeline.DIRECT, cfg.params, psi0, g)
        gtraj = evolve(Pipeline.DIRECT, cfg.params, GaussianState.displaced(mu0), g)
        mean_err = float(np.max(np.abs(ftraj.mus - gtraj.mus)))
        cov_err = float(np.max(np.abs(ftraj.sigmas - gtraj.sigmas)))
        summary["gaussian_vs_fock"] = {"mean": mean_err, "cov": cov_err, "d": cfg.fock_d, "h": cfg.fock_h, "t1": t1}
        ok = ok and max(mean_err, cov_err) <= 1e-4
    return Report(summary, EXIT_OK if ok else EXIT_INVARIANT)


def cmd_single_demo(cfg: ScenarioConfig) -> Report:
    mass = cfg.families["m1"]
    out = {}
    for naive in ("sqrt", "literal"):
        residual, note = single_oscillator_demo(mass, cfg.grid, naive_map=naive)
        out[naive] = {"residual": residual, "note": note}
    return Report({"single_oscillator": out})


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "compare-mg": cmd_compare_mg,
    "fock-check": cmd_fock_check,
    "single-demo": cmd_single_demo,
}


def run_scenario(cfg: ScenarioConfig, command: str = "simulate", output_dir=None) -> Report:
    outdir = Path(output_dir or cfg.output or "results")
    try:
        if command == "simulate":
            report = cmd_simulate(cfg, outdir)
        else:
            report = COMMANDS[command](cfg)
    except InvariantViolation as exc:
        return Report({"error": str(exc)}, EXIT_INVARIANT)
    except (NumericalFailure, TruncationError) as exc:
        return Report({"error": str(exc), "time": exc.time}, EXIT_NUMERICAL)
    report.summary["command"] = command
    report.summary["exit_code"] = report.exit_code
    if command == "simulate":
        path = outdir / "summary.json"
        _atomic_write(path, summary_json(report.summary))
        report.files.append(str(path))
    return report


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="massframe", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", type=Path)
    parser.add_argument("--output-dir", type=Path, default=None)
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--seed", type=int, default=None, help="reserved; all computation is deterministic")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
    except (OSError, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_scenario(cfg, args.command, args.output_dir)
    if not args.quiet:
        sys.stdout.write(summary_json(report.summary))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
