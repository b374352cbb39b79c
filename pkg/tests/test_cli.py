import json
import warnings

import numpy as np
import pytest

from wavelab import cli
from wavelab.files import (load_states, read_pair, read_profile, read_table, save_states,
                           write_pair, write_profile)
from wavelab.nlwave import EvolveOptions, evolve
from wavelab.radial import AlgebraicTail, Params, RadialGrid, RadialProfile, StatePair, bump


@pytest.mark.parametrize("sub", sorted(cli.SCHEMA))
def test_config_round_trip_defaults(sub):
    cfg = {k: v[1] for k, v in cli.SCHEMA[sub].items()}
    text = cli.serialize_config(cfg)
    again = cli.parse_config_text(text, sub)
    assert cli.serialize_config(again) == text
    assert cli.parse_config_text(cli.serialize_config(again), sub) == again


def test_config_round_trip_values():
    text = "# sweep\nr0 = 0.0, 0.25,1.5\nsamples = 12\nseed = 99 # trailing\nt_max = 0.1\n"
    cfg = cli.parse_config_text(text, "channels")
    assert cfg == dict(r0=[0.0, 0.25, 1.5], samples=12, seed=99, t_max=0.1)
    assert cli.parse_config_text(cli.serialize_config(cfg), "channels") == cfg


@pytest.mark.parametrize("text", ["bogus = 1", "seed = 1\nseed = 2", "seed", "seed = one"])
def test_config_rejects(text):
    with pytest.raises(cli.ConfigError):
        cli.parse_config_text(text, "channels")


@pytest.mark.parametrize("args", [
    ["stationary", "--p", "4"],
    ["stationary", "--ell", "0"],
    ["evolve", "--cfl", "1.5"],
    ["evolve", "--t-end", "5", "--r-max", "4"],
    ["evolve", "--sign", "3"],
    ["channels", "--samples", "0"],
    ["selfsim", "--delta", "-1"],
    ["norms"],
    ["evolve", "--nonsense", "1"],
])
def test_bad_config_exits_2_without_files(tmp_path, args):
    out = tmp_path / "run"
    assert cli.main(args + ["--out", str(out)]) == 2
    assert not out.exists()


def test_unknown_key_in_config_file(tmp_path):
    cfgfile = tmp_path / "c.txt"
    cfgfile.write_text("samples = 3\ncolour = blue\n")
    out = tmp_path / "run"
    assert cli.main(["channels", "--config", str(cfgfile), "--out", str(out)]) == 2
    assert not out.exists()


def test_channels_deterministic(tmp_path, monkeypatch):
    monkeypatch.delenv("WAVE_LAB_THREADS", raising=False)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["channels", "--samples", "10", "--seed", "1", "--out", str(a)]) == 0
    assert cli.main(["channels", "--samples", "10", "--seed", "1", "--out", str(b)]) == 0
    assert (a / "channels.csv").read_bytes() == (b / "channels.csv").read_bytes()
    header, data = read_table(a / "channels.csv")
    assert header == ["sample", "r0", "initial", "min_pos", "min_neg", "ratio"]
    assert data.shape == (30, 6)
    summary = json.loads((a / "channels.json").read_text())
    assert summary["seed"] == 1
    rep = json.loads((a / "report.json").read_text())
    assert rep["config"]["seed"] == 1 and rep["all_passed"]


def test_channels_threads_match_serial(tmp_path, monkeypatch):
    monkeypatch.delenv("WAVE_LAB_THREADS", raising=False)
    a = tmp_path / "a"
    cli.main(["channels", "--samples", "6", "--seed", "4", "--out", str(a)])
    monkeypatch.setenv("WAVE_LAB_THREADS", "2")
    b = tmp_path / "b"
    cli.main(["channels", "--samples", "6", "--seed", "4", "--out", str(b)])
    assert (a / "channels.csv").read_bytes() == (b / "channels.csv").read_bytes()


def test_config_file_and_flag_override(tmp_path):
    cfgfile = tmp_path / "c.txt"
    cfgfile.write_text("samples = 3\nseed = 5\n")
    out = tmp_path / "run"
    assert cli.main(["channels", "--config", str(cfgfile), "--samples", "2", "--out", str(out)]) == 0
    cfg = cli.parse_config_text((out / "config.txt").read_text(), "channels")
    assert cfg["samples"] == 2 and cfg["seed"] == 5


def test_stationary_edge_slope(tmp_path):
    out = tmp_path / "z"
    code = cli.main(["stationary", "--p", "7", "--ell", "1", "--out", str(out)])
    rep = json.loads((out / "report.json").read_text())
    assert abs(rep["edge_slope"] + 1) <= 1e-2
    assert code == (0 if rep["all_passed"] else 1)
    header, data = read_table(out / "Z.csv")
    assert header == ["r", "Z", "dZ"]
    assert (out / "plot_Z.py").is_file()


def test_evolve_bump_and_plots(tmp_path):
    out = tmp_path / "ev"
    code = cli.main(["evolve", "--data", "bump", "--amplitude", "0.3", "--n", "4097",
                     "--r-max", "3", "--R", "1", "--t-end", "1", "--norm-every", "50",
                     "--snap-every", "800", "--out", str(out)])
    assert code == 0
    header, data = read_table(out / "trace.csv")
    assert header == ["t", "amplitude", "energy", "support", "norm_sp", "norm_spm1"]
    assert np.all(np.diff(data[:, 0]) > 0)
    script = (out / "plot_trace.py").read_text()
    assert "loglog" in script and "norm_sp" in script
    snaps = sorted((out / "snapshots").glob("*.csv"))
    assert snaps
    st = read_pair(snaps[-1])
    assert st.params.p == 7.0


def test_norms_from_file(tmp_path):
    g = RadialGrid(8.0, 4097)
    prof = RadialProfile(g, bump((g.r - 2) / 1.5))
    f = write_profile(tmp_path / "f.csv", prof, Params(7.0))
    out = tmp_path / "n"
    with pytest.warns(UserWarning, match="no CSV"):      # only norms.json is written
        assert cli.main(["norms", "--file", str(f), "--s", "1.0", "--out", str(out)]) == 0
    rep = json.loads((out / "norms.json").read_text())
    assert rep["norm"] > 0


def test_selfsim_builtin_and_plot(tmp_path):
    out = tmp_path / "ss"
    assert cli.main(["selfsim", "--out", str(out)]) == 0
    header, _ = read_table(out / "selfsim.csv")
    assert header == ["s", "E_tilde", "D", "cumulative_D", "support"]
    assert "E_tilde" in (out / "plot_selfsim.py").read_text()


def test_verify_all_quick(tmp_path, capsys):
    out = tmp_path / "v"
    code = cli.main(["verify-all", "--quick", "--out", str(out)])
    rep = json.loads((out / "report.json").read_text())
    names = [c["name"] for c in rep["checks"]]
    assert len(names) == 8 and len(set(names)) == 8
    assert code == (0 if rep["all_passed"] else 1)
    printed = capsys.readouterr().out
    assert printed.count("[PASS]") + printed.count("[FAIL]") == 8


def test_emit_plots_empty_dir_warns(tmp_path):
    with pytest.warns(UserWarning):
        assert cli.emit_plots(tmp_path) == []
    assert not list(tmp_path.iterdir())


def test_emit_plots_generic_csv(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n2,3\n")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert cli.emit_plots(tmp_path) == ["plot_x.py"]
    compile((tmp_path / "plot_x.py").read_text(), "plot_x.py", "exec")


def test_profile_files_round_trip(tmp_path):
    g = RadialGrid(2.0, 129)
    prof = RadialProfile(g, np.sin(g.r) / 3, AlgebraicTail(2.0, 0.1))
    path = write_profile(tmp_path / "p.csv", prof, Params(7.0, -1), time=0.25)
    back, params, t = read_profile(path)
    assert np.array_equal(back.values, prof.values)
    assert back.tail == prof.tail and params == Params(7.0, -1) and t == 0.25
    st = StatePair(prof.with_values(prof.values), prof.with_values(2 * prof.values), Params(7.0), 0.5)
    back = read_pair(write_pair(tmp_path / "s.csv", st))
    assert np.array_equal(back.ut.values, st.ut.values) and back.time == 0.5


def test_state_archive_round_trip(tmp_path):
    g = RadialGrid(3.0, 257)
    u = RadialProfile(g, 0.2 * bump(g.r))
    tr = evolve(StatePair(u, RadialProfile.zeros(g), Params(7.0), 0.0),
                EvolveOptions(t_end=0.5, snap_every=20))
    back = load_states(save_states(tmp_path / "s.npz", tr))
    assert len(back.states) == len(tr.states)
    for a, b in zip(tr.states, back.states):
        assert a.time == b.time and np.array_equal(a.u.values, b.u.values)
