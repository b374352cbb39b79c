"""Command-line front end: ``wavelab <subcommand> [flags] [--config file]``.

Every run writes into one output directory: CSV data (17 significant digits),
``report.json`` with the configuration echo, per-check verdicts, wall-clock
time and the list of files, and one plotting script per CSV.

Exit status: 0 when every check passes, 1 when a check fails, 2 for a bad
configuration (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import experiments
from .files import (load_states, read_pair, read_profile, read_table, save_states, write_pair,
                    write_table)
from .linwave import channel_check, random_free_data
from .nlwave import EvolveOptions, critical_norm_trace, evolve, plateau_state, support_radius
from .radial import (Params, RadialGrid, RadialProfile, StatePair, UnderResolvedError, bump,
                     hdot_norm)
from .selfsim import energy_budget, frame_times, to_selfsim
from .stationary import build_Z, lqp_divergence, verify_asymptotics

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration: flat "key = value" text, one schema per subcommand

def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


SCHEMA = {
    "stationary": dict(p=(float, 7.0), ell=(float, 1.0), r_min=(float, 1e-4), out=(str, "")),
    "evolve": dict(p=(float, 7.0), sign=(int, 1), data=(str, "plateau"), file=(str, ""),
                   variant=(str, "plain"), r0=(_opt_float, None), n=(int, 4097),
                   r_max=(float, 4.0), cfl=(float, 0.9), t_end=(float, 1.2),
                   snap_every=(int, 0), norm_every=(int, 0), amplitude=(float, 1.0),
                   T=(float, 1.0), R=(float, 2.0), width=(float, 0.5), out=(str, "")),
    "channels": dict(r0=(_floats, [0.0, 0.5, 1.0]), samples=(int, 200), seed=(int, 2024),
                     t_max=(float, 5.0), n=(int, 801), support=(float, 2.0), out=(str, "")),
    "selfsim": dict(trace=(str, ""), delta=(float, 0.01), s_max=(_opt_float, None),
                    s_steps=(int, 61), T_plus=(_opt_float, None), n_y=(int, 8193),
                    out=(str, "")),
    "norms": dict(file=(str, ""), trace=(str, ""), mode=(str, "full"), R=(float, 1.0),
                  s=(_opt_float, None), out=(str, "")),
    "verify-all": dict(quick=(_bool, False), seed=(int, 2024), out=(str, "")),
}


def parse_config_text(text: str, subcommand: str) -> dict:
    """Parse ``key = value`` lines ('#' starts a comment); unknown keys are rejected."""
    schema = SCHEMA[subcommand]
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in schema:
            raise ConfigError(f"line {ln}: unknown key {key!r} for {subcommand}")
        if key in out:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        try:
            out[key] = schema[key][0](val)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"line {ln}: bad value for {key}: {e}") from None
    return out


def _render(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def serialize_config(cfg: dict) -> str:
    return "".join(f"{k} = {_render(cfg[k])}\n" for k in sorted(cfg))


def validate(subcommand: str, cfg: dict):
    """Check physical parameters against the module preconditions."""
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)
    if "p" in cfg:
        need(cfg["p"] > (5 if subcommand == "stationary" else 1), "p out of range")
    if subcommand == "stationary":
        need(cfg["ell"] != 0, "ell must be nonzero")
        need(0 < cfg["r_min"] < 1, "r_min must lie in (0, 1)")
    elif subcommand == "evolve":
        need(cfg["sign"] in (1, -1), "sign must be 1 or -1")
        need(cfg["data"] in ("plateau", "bump", "file"), "data must be plateau, bump or file")
        need(cfg["data"] != "file" or Path(cfg["file"]).is_file(), "data=file needs an existing file")
        need(cfg["variant"] in ("plain", "cutoff", "perturbation"), "unknown variant")
        need(cfg["variant"] == "plain" or (cfg["r0"] or 0) > 0, "modified variants need r0 > 0")
        need(cfg["n"] >= 16, "n must be at least 16")
        need(cfg["r_max"] > 0, "r_max must be positive")
        need(0 < cfg["cfl"] <= 1, "cfl must lie in (0, 1]")
        need(cfg["t_end"] != 0, "t_end must be nonzero")
        need(cfg["snap_every"] >= 0 and cfg["norm_every"] >= 0, "negative decimation")
        need(cfg["T"] > 0 and cfg["R"] > 0 and cfg["width"] > 0, "plateau parameters must be positive")
        need(cfg["data"] == "file" or cfg["R"] + cfg["width"] + abs(cfg["t_end"]) < cfg["r_max"],
             "the light cone of the data leaves the grid before t_end")
    elif subcommand == "channels":
        need(len(cfg["r0"]) > 0 and all(r >= 0 for r in cfg["r0"]), "r0 values must be non-negative")
        need(cfg["samples"] >= 1, "samples must be positive")
        need(cfg["t_max"] > 0, "t_max must be positive")
        need(cfg["n"] >= 16 and cfg["support"] > 0, "bad grid")
    elif subcommand == "selfsim":
        need(cfg["delta"] >= 0, "delta must be non-negative")
        need(cfg["s_steps"] >= 3, "s_steps must be at least 3")
        need(cfg["n_y"] >= 16, "n_y must be at least 16")
        need(not cfg["trace"] or Path(cfg["trace"]).is_file(), "trace file not found")
        need(not cfg["trace"] or cfg["delta"] > 0 or cfg["s_max"] is not None,
             "delta = 0 needs an explicit s_max")
        need(cfg["s_max"] is None or cfg["s_max"] > 0, "s_max must be positive")
        need(cfg["s_max"] is None or cfg["delta"] == 0 or cfg["s_max"] < -np.log(cfg["delta"]),
             "s_max must stay below -log(delta)")
    elif subcommand == "norms":
        need(bool(cfg["file"]) != bool(cfg["trace"]), "give exactly one of file or trace")
        need(not cfg["file"] or Path(cfg["file"]).is_file(), "file not found")
        need(not cfg["trace"] or Path(cfg["trace"]).is_file(), "trace not found")
        need(cfg["mode"] in ("full", "lightcone"), "mode must be full or lightcone")
        need(cfg["R"] > 0, "R must be positive")


# ---------------------------------------------------------------------------
# subcommands; each returns (checks, files, extra report fields)

def _check(name, passed, measured, tolerance):
    return dict(name=name, passed=bool(passed), measured=experiments._plain(measured),
                tolerance=tolerance)


def run_stationary(cfg, out: Path):
    Z = build_Z(cfg["ell"], p=cfg["p"], r_min=cfg["r_min"])
    a = verify_asymptotics(Z)
    r, _, _ = Z.base_nodes()
    r = r * Z.lam
    write_table(out / "Z.csv", ["r", "Z", "dZ"], [r, Z.Z(r), Z.dZ(r)])
    _, res = Z.residual()
    masses = lqp_divergence(Z, [m for m in (1.0, 1e-2, 1e-4) if m >= Z.r_min * (1 - 1e-12)])
    ball = float(np.max(Z.picard.ball_norms))
    ell = cfg["ell"]
    checks = [
        _check("picard_ball", ball <= 1, ball, "<= 1"),
        _check("edge_slope", abs(a["edge_slope"] + ell) <= 1e-2 * abs(ell), a["edge_slope"], "-ell +- 1e-2 |ell|"),
        _check("ode_residual", res.max() < 1e-6, float(res.max()), "< 1e-6"),
        _check("phi_monotone", Z.phi_max_increase() <= 1e-11, Z.phi_max_increase(), "relative rise <= 1e-11"),
    ]
    extra = dict(tail_constant=a["tail_constant"], edge_slope=a["edge_slope"], origin_exponent=a["origin_exponent"],
                 origin_exponent_pointwise=a["origin_exponent_pointwise"],
                 decay_slope=a["decay_slope"], contraction_factors=Z.picard.contraction_factors,
                 max_residual=float(res.max()), matching_jump=Z.matching_jump(),
                 lqp_masses=masses, r_min=Z.r_min, R_max=Z.R_max)
    return checks, ["Z.csv"], extra


def _initial_state(cfg) -> StatePair:
    if cfg["data"] == "file":
        st = read_pair(cfg["file"])
        return StatePair(st.u, st.ut, Params(cfg["p"], cfg["sign"]), st.time)
    g = RadialGrid(cfg["r_max"], cfg["n"])
    P = Params(cfg["p"], cfg["sign"])
    if cfg["data"] == "plateau":
        return plateau_state(g, P, T=cfg["T"], R=cfg["R"], width=cfg["width"])
    u = cfg["amplitude"] * bump(g.r / cfg["R"])
    return StatePair(RadialProfile(g, u), RadialProfile.zeros(g), P, 0.0)


def run_evolve(cfg, out: Path):
    init = _initial_state(cfg)
    V = None
    if cfg["variant"] == "perturbation":
        from .nlwave import chi
        Z = build_Z(1.0, p=cfg["p"])
        r = init.grid.r
        V = RadialProfile(init.grid, chi(r, cfg["r0"]) * Z.Z(np.maximum(r, Z.r_min)))
    opts = EvolveOptions(t_end=cfg["t_end"], cfl=cfg["cfl"], variant=cfg["variant"], r0=cfg["r0"],
                         V=V, snap_every=cfg["snap_every"], norm_every=cfg["norm_every"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tr = evolve(init, opts)
    write_table(out / "trace.csv", ["t", "amplitude", "energy", "support", "norm_sp", "norm_spm1"],
                [tr.times, tr.amplitude, tr.energy, tr.support, tr.norm_sp, tr.norm_spm1])
    save_states(out / "states.npz", tr)
    files = ["trace.csv", "states.npz"]
    if cfg["snap_every"]:
        (out / "snapshots").mkdir(exist_ok=True)
        for k, st in enumerate(tr.states):
            name = f"snapshots/state_{k:04d}.csv"
            write_pair(out / name, st)
            files += [name, name[:-4] + ".json"]
    # support of the data as constructed (the C-infinity falloffs underflow to
    # exact zeros before their nominal edge, so the float support is smaller)
    R = {"plateau": cfg["R"] + cfg["width"], "bump": cfg["R"]}.get(cfg["data"]) or support_radius(init)
    # near blow-up the leapfrog precursor (one node per step, faster than light
    # when cfl < 1) is amplified past the support threshold; only steps that
    # resolve the ODE time scale enter the finite-speed check
    ok = tr.dt ** 2 * cfg["p"] * tr.amplitude ** (cfg["p"] - 1) < 0.05
    excess = float(np.max((tr.support - (R + np.abs(tr.times - init.time) + 2 * init.grid.dr))[ok]))
    checks = [_check("finite_speed", excess <= 0, excess,
                     "support <= R + |t| + 2 dr on steps with dt^2 p A^(p-1) < 0.05")]
    if tr.blowup is None:
        E0 = tr.energy[0]
        drift = float(np.max(np.abs(tr.energy - E0)) / (abs(E0) + 1))
        checks.append(_check("energy_conservation", drift <= 1e-6, drift, "<= 1e-6 (|E0| + 1)"))
    return checks, files, dict(blowup=tr.blowup, steps=int(tr.times.size), dt=tr.dt)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WAVE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _channel_row(args):
    data, r0_list, t_grid = args
    return [channel_check(data, r0, t_grid) for r0 in r0_list]


def run_channels(cfg, out: Path):
    rng = np.random.default_rng(cfg["seed"])
    grid = RadialGrid(cfg["support"], cfg["n"])
    t_grid = np.linspace(-cfg["t_max"], cfg["t_max"], 201)
    data = [random_free_data(rng, grid, cfg["support"]) for _ in range(cfg["samples"])]
    jobs = [(d, cfg["r0"], t_grid) for d in data]
    nthreads = _threads()
    if nthreads > 1:
        with ProcessPoolExecutor(nthreads) as ex:
            reports = list(ex.map(_channel_row, jobs))
    else:
        reports = [_channel_row(j) for j in jobs]
    rows = [(k, rep) for k, reps in enumerate(reports) for rep in reps]
    ratios = np.array([rep.ratio for _, rep in rows])
    write_table(out / "channels.csv", ["sample", "r0", "initial", "min_pos", "min_neg", "ratio"],
                [np.array([k for k, _ in rows]), np.array([rep.r0 for _, rep in rows]),
                 np.array([rep.initial_exterior for _, rep in rows]),
                 np.array([rep.min_over_t_pos for _, rep in rows]),
                 np.array([rep.min_over_t_neg for _, rep in rows]), ratios])
    finite = ratios[np.isfinite(ratios)]
    worst = float(finite.min()) if finite.size else float("inf")
    k = int(np.argmin(np.where(np.isfinite(ratios), ratios, np.inf)))
    summary = dict(seed=cfg["seed"], samples=cfg["samples"], worst_ratio=worst,
                   worst_sample=int(rows[k][0]), worst_r0=float(rows[k][1].r0))
    (out / "channels.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    checks = [_check("channel_inequality", worst >= 0.5 - 1e-6, worst, ">= 0.5 - 1e-6")]
    return checks, ["channels.csv", "channels.json"], summary


def run_selfsim(cfg, out: Path):
    delta = cfg["delta"]
    if cfg["trace"]:
        tr = load_states(cfg["trace"])
        T = cfg["T_plus"] or (tr.blowup or {}).get("T_est")
        if not T:
            raise ConfigError("the trace carries no blow-up time; pass T_plus")
        s_max = cfg["s_max"] if cfg["s_max"] is not None else 0.9 * (-np.log(delta))
        s_grid = np.linspace(0.0, s_max, cfg["s_steps"])
        frame = to_selfsim(tr, T, delta, s_grid, n_y=cfg["n_y"])
    else:
        frame = experiments.cone_blowup_frame(delta=delta if delta > 0 else 1e-2,
                                              n_y=cfg["n_y"], n_s=cfg["s_steps"])
        if cfg["s_max"] is not None and cfg["s_max"] < frame.s_grid[-1]:
            keep = frame.s_grid <= cfg["s_max"] + 1e-12
            frame = type(frame)(frame.p, frame.delta, frame.T_plus, frame.s_grid[keep], frame.y,
                                frame.w[keep], frame.ws[keep], frame.wy[keep])
    b = energy_budget(frame)
    write_table(out / "selfsim.csv", ["s", "E_tilde", "D", "cumulative_D", "support"],
                [b["s"], b["E"], b["D"], b["cumulative_D"], b["support"]])
    checks = [_check("monotone", b["monotone"], b["worst_drop"], "drops <= 1e-3 relative"),
              _check("budget", b["budget_rel"] <= 1e-2, b["budget_rel"], "<= 1e-2 relative")]
    return checks, ["selfsim.csv"], dict(delta=frame.delta, T_plus=frame.T_plus)


def run_norms(cfg, out: Path):
    if cfg["file"]:
        header, _ = read_table(cfg["file"])
        if header == ["r", "value"]:
            prof, params, t = read_profile(cfg["file"])
            s = cfg["s"] if cfg["s"] is not None else params.s_p
            res = dict(s=s, norm=hdot_norm(prof, s), time=t)
        else:
            st = read_pair(cfg["file"])
            s = cfg["s"] if cfg["s"] is not None else st.params.s_p
            a = hdot_norm(st.u, s)
            b = hdot_norm(st.ut, s - 1)
            res = dict(s=s, norm_s=a, norm_s_minus_1=b, total=a + b, time=st.time)
        (out / "norms.json").write_text(json.dumps(res, indent=2, sort_keys=True) + "\n")
        return [], ["norms.json"], res
    tr = load_states(cfg["trace"])
    mode = "full" if cfg["mode"] == "full" else ("lightcone", cfg["R"])
    rows, skipped = [], 0
    for st in tr.states:
        # states past the blow-up guard or too rough for the grid get NaN rows
        vals = [np.nan, np.nan, np.nan]
        if np.all(np.isfinite(st.u.values)) and np.all(np.isfinite(st.ut.values)):
            try:
                with np.errstate(over="raise", invalid="raise"):
                    c = critical_norm_trace(tr, mode, times=(st.time,))
                vals = [c["norm_sp"][0], c["norm_spm1"][0], c["total"][0]]
            except (UnderResolvedError, FloatingPointError):
                skipped += 1
        else:
            skipped += 1
        rows.append([st.time] + vals)
    rows = np.array(rows)
    write_table(out / "norms.csv", ["t", "norm_sp", "norm_spm1", "total"], rows.T)
    return [], ["norms.csv"], dict(mode=cfg["mode"], states=len(rows), unresolved_states=skipped)


def run_verify_all(cfg, out: Path):
    results = experiments.run_all(quick=cfg["quick"], seed=cfg["seed"])
    for r in results:
        print(r.line())
    write_table(out / "verify.csv", ["criterion", "passed", "seconds"],
                [np.array([r.name.split(".")[0] for r in results]),
                 np.array([int(r.passed) for r in results]),
                 np.array([r.seconds for r in results])])
    checks = [dict(r.as_dict(), name=r.name) for r in results]
    return checks, ["verify.csv"], {}


RUNNERS = {"stationary": run_stationary, "evolve": run_evolve, "channels": run_channels,
           "selfsim": run_selfsim, "norms": run_norms, "verify-all": run_verify_all}


# ---------------------------------------------------------------------------
# plotting scripts

_PLOT_HEAD = """import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

data = np.genfromtxt("{csv}", delimiter=",", names=True)
fig, ax = plt.subplots()
"""

_PLOT_BODY = {
    "trace.csv": """T = data["t"][-1] + {gap!r}
ok = np.isfinite(data["norm_sp"]) & (T - data["t"] > 0)
ax.loglog(T - data["t"][ok], data["norm_sp"][ok])
ax.set_xlabel("T - t")
ax.set_ylabel("N_sp(u)")
""",
    "selfsim.csv": """ax.plot(data["s"], data["E_tilde"])
ax.set_xlabel("s")
ax.set_ylabel("E_tilde")
""",
}


def emit_plots(run_dir) -> list:
    """Write one standalone matplotlib script per CSV in ``run_dir``; returns their names."""
    run_dir = Path(run_dir)
    csvs = sorted(p for p in run_dir.glob("*.csv"))
    if not csvs:
        warnings.warn(f"no CSV files in {run_dir}; no plot scripts written")
        return []
    T_gap = 0.0
    rep = run_dir / "report.json"
    if rep.is_file():
        blow = json.loads(rep.read_text()).get("blowup") or {}
        T_gap = float(blow.get("T_est", 0.0) or 0.0)
    names = []
    for csv_path in csvs:
        head = _PLOT_HEAD.format(csv=csv_path.name)
        if csv_path.name in _PLOT_BODY:
            body = _PLOT_BODY[csv_path.name]
            if csv_path.name == "trace.csv":
                # distance from the last step to the blow-up estimate, if known
                last = np.genfromtxt(csv_path, delimiter=",", names=True)["t"]
                last = float(np.atleast_1d(last)[-1])
                body = body.format(gap=max(T_gap - last, 0.0) if T_gap else 1e-3)
        else:
            body = """cols = data.dtype.names
for c in cols[1:]:
    ax.plot(data[cols[0]], data[c], label=c)
ax.set_xlabel(cols[0])
ax.legend()
"""
        tail = f'fig.savefig("{csv_path.stem}.png", dpi=120)\n'
        name = f"plot_{csv_path.stem}.py"
        (run_dir / name).write_text(head + body + tail)
        names.append(name)
    return names


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat 'key = value' file; flags override it")
        for key in schema:
            flag = "--" + key.replace("_", "-")
            if name == "verify-all" and key == "quick":
                sp.add_argument(flag, action="store_const", const=True, default=argparse.SUPPRESS)
            else:
                sp.add_argument(flag, dest=key, default=argparse.SUPPRESS)
    return ap


def resolve_config(ns: argparse.Namespace) -> dict:
    sub = ns.subcommand
    schema = SCHEMA[sub]
    cfg = {k: v[1] for k, v in schema.items()}
    if getattr(ns, "config", None):
        try:
            text = Path(ns.config).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        cfg.update(parse_config_text(text, sub))
    for key, (conv, _) in schema.items():
        if hasattr(ns, key):
            try:
                cfg[key] = conv(getattr(ns, key))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad value for --{key.replace('_', '-')}: {e}") from None
    if not cfg["out"]:
        cfg["out"] = f"wavelab-{sub}"
    validate(sub, cfg)
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = resolve_config(ns)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        checks, files, extra = RUNNERS[ns.subcommand](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as e:
        # a precondition that only shows up mid-computation (non-integrable
        # weight, non-finite state, ...): report it as a failed run
        print(f"error: {e}", file=sys.stderr)
        report = dict(subcommand=ns.subcommand, config=experiments._plain(cfg), all_passed=False,
                      error=str(e), seconds=time.perf_counter() - t0)
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return EXIT_FAIL
    (out / "config.txt").write_text(serialize_config(cfg))
    report = dict(subcommand=ns.subcommand, config=experiments._plain(cfg), checks=checks,
                  all_passed=all(c["passed"] for c in checks),
                  seconds=time.perf_counter() - t0,
                  files=sorted(files + ["config.txt", "report.json"]))
    report.update(experiments._plain(extra))
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    plots = emit_plots(out)
    report["files"] = sorted(report["files"] + plots)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    for c in checks:
        if ns.subcommand != "verify-all":
            print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}: {c['measured']}")
    print(f"wrote {out}/ ({len(report['files'])} files)")
    return EXIT_OK if report["all_passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
