"""Reading and writing profiles, tables and evolution snapshots.

Profiles are CSV files with header ``r,value`` (or ``r,u,ut`` for a state pair)
and a JSON sidecar ``<name>.json`` holding p, sign, time and the decay class.
Floats are written with 17 significant digits so that a round trip is exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .nlwave import EvolutionTrace
from .radial import AlgebraicTail, Compact, Params, RadialGrid, RadialProfile, StatePair

__all__ = ["write_table", "read_table", "write_profile", "read_profile", "write_pair",
           "read_pair", "save_states", "load_states"]

FMT = "%.17g"


def write_table(path, header, columns) -> Path:
    """Columns of equal length as CSV with a header row."""
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    if len({c.size for c in cols}) > 1:
        raise ValueError("columns differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FMT % v
    return str(v)


def read_table(path):
    """(header, float array of shape (rows, cols))."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return header, data


def _decay_class(profile: RadialProfile) -> dict:
    t = profile.tail
    if t is None:
        return {"kind": "compact", "support_radius": float(profile.support_radius())}
    return {"kind": "algebraic", "exponent": float(t.exponent), "coefficient": float(t.coefficient)}


def _sidecar(path: Path, params: Params, time: float, decay: dict):
    meta = {"p": params.p, "sign": params.sign, "time": time, "decay_class": decay}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _read_sidecar(path: Path):
    meta = json.loads(Path(path).with_suffix(".json").read_text())
    return Params(float(meta["p"]), int(meta["sign"])), float(meta["time"]), meta["decay_class"]


def _grid_from(r) -> RadialGrid:
    r = np.asarray(r, dtype=float)
    n = r.size
    if n < 2 or r[0] != 0.0:
        raise ValueError("profile files must start at r = 0")
    dr = (r[-1] - r[0]) / (n - 1)
    if not np.allclose(np.diff(r), dr, rtol=1e-9, atol=0):
        raise ValueError("profile files must use a uniform grid")
    return RadialGrid(float(r[-1]), n)


def _tail_from(decay: dict):
    if decay.get("kind") == "algebraic":
        return AlgebraicTail(decay["exponent"], decay["coefficient"])
    return None


def write_profile(path, profile: RadialProfile, params: Params, time: float = 0.0) -> Path:
    path = Path(path)
    write_table(path, ["r", "value"], [profile.r, profile.values])
    _sidecar(path, params, time, _decay_class(profile))
    return path


def read_profile(path):
    """(RadialProfile, Params, time)."""
    header, data = read_table(path)
    if header != ["r", "value"]:
        raise ValueError(f"unexpected header {header}")
    params, time, decay = _read_sidecar(Path(path))
    g = _grid_from(data[:, 0])
    return RadialProfile(g, data[:, 1], _tail_from(decay)), params, time


def write_pair(path, state: StatePair) -> Path:
    path = Path(path)
    write_table(path, ["r", "u", "ut"], [state.u.r, state.u.values, state.ut.values])
    _sidecar(path, state.params, state.time, _decay_class(state.u))
    return path


def read_pair(path) -> StatePair:
    header, data = read_table(path)
    if header != ["r", "u", "ut"]:
        raise ValueError(f"unexpected header {header}")
    params, time, _ = _read_sidecar(Path(path))
    g = _grid_from(data[:, 0])
    return StatePair(RadialProfile(g, data[:, 1]), RadialProfile(g, data[:, 2]), params, time)


def save_states(path, trace: EvolutionTrace) -> Path:
    """All stored snapshots of a trace in one .npz file (plus the blow-up estimate)."""
    path = Path(path)
    st = trace.states
    T = trace.blowup["T_est"] if trace.blowup else np.nan
    np.savez(path, r_max=trace.grid.r_max, n=trace.grid.n, p=trace.params.p,
             sign=trace.params.sign, times=np.array([s.time for s in st]),
             u=np.array([s.u.values for s in st]), ut=np.array([s.ut.values for s in st]),
             T_est=T)
    return path


def load_states(path) -> EvolutionTrace:
    """A trace carrying only the stored snapshots (per-step series are empty)."""
    z = np.load(path)
    g = RadialGrid(float(z["r_max"]), int(z["n"]))
    P = Params(float(z["p"]), int(z["sign"]))
    states = [StatePair(RadialProfile(g, u), RadialProfile(g, ut), P, float(t))
              for t, u, ut in zip(z["times"], z["u"], z["ut"])]
    T = float(z["T_est"])
    empty = np.zeros(0)
    return EvolutionTrace(P, g, np.nan, empty, empty, empty, empty, empty, empty, empty, states,
                          None, None if np.isnan(T) else {"T_est": T})
