import json
import math
import os

import numpy as np
import pytest

from metriclab import cli
from metriclab import experiments as E
from metriclab.errors import ConfigError

HL1_CUSP = """
experiment = hl1
domain = unit_disc
density = hyperbolic
map = cusp_a50
alpha = 0.5
"""

QH_DISC_SMALL = """
experiment = qh-compare
domain = unit_disc
density = bergman
kernel_degree = 24
kernel_resolution = 0.03
resolution = 0.04
compare_pairs = 3
ring_distances = 0.6 0.4 0.2
"""


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_defaults():
    cfg = E.parse_config_text(HL1_CUSP)
    assert cfg.experiment == "hl1"
    assert cfg.map_name == "cusp_a50"
    assert cfg.alpha == 0.5
    assert cfg.radii[0] == pytest.approx(1 - 2.0 ** -2)
    assert cfg.steps[0] == pytest.approx(2.0 ** -3)
    assert cfg.seed == 1234
    assert cfg.tolerance == 0.1


def test_parse_config_errors():
    with pytest.raises(ConfigError, match="unknown config key"):
        E.parse_config_text(HL1_CUSP + "\nbogus = 1")
    with pytest.raises(ConfigError, match="missing required"):
        E.parse_config_text("experiment = hl1\ndensity = hyperbolic")
    with pytest.raises(ConfigError, match="alpha"):
        E.parse_config_text(HL1_CUSP.replace("alpha = 0.5", "alpha = 1.5"))
    with pytest.raises(ConfigError, match="strictly increasing"):
        E.parse_config_text(HL1_CUSP + "\nradii_k = 3 2 5 6")
    with pytest.raises(ConfigError, match="unknown experiment"):
        E.parse_config_text(HL1_CUSP.replace("hl1", "hl9"))
    with pytest.raises(ConfigError, match="unknown density"):
        E.parse_config_text(HL1_CUSP.replace("hyperbolic", "parabolic"))
    with pytest.raises(ConfigError, match="semi-axes"):
        E.parse_config_text(HL1_CUSP.replace("unit_disc", "ellipse 2"))


def test_config_hash_ignores_out_dir():
    a = E.parse_config_text(HL1_CUSP + "\nout = here")
    b = E.parse_config_text(HL1_CUSP + "\nout = there")
    assert a.config_hash() == b.config_hash()
    c = E.parse_config_text(HL1_CUSP.replace("0.5", "0.7"))
    assert c.config_hash() != a.config_hash()


# ---------------------------------------------------------------------------
# runners


def test_hl1_cusp_passes():
    rep = E.run_theorem1_check(E.parse_config_text(HL1_CUSP))
    assert rep.passed
    names = {c["name"]: c for c in rep.checks}
    assert 0.45 <= names["means_exponent_matches_alpha"]["observed"] <= 0.55
    assert 0.45 <= names["modulus_exponent_matches_alpha"]["observed"] <= 0.55
    assert "means_sup" in rep.curves and "modulus_sup" in rep.curves
    assert rep.curves["means_sup"]["fit"]["r_squared"] > 0.99


def test_hl1_requires_blowup_density():
    cfg = E.parse_config_text(HL1_CUSP.replace("hyperbolic", "constant 1.0"))
    with pytest.raises(ConfigError):
        E.run_theorem1_check(cfg)


def test_hl1_identity_divergent_fails():
    cfg = E.parse_config_text(HL1_CUSP.replace("cusp_a50", "identity"))
    rep = E.run_theorem1_check(cfg)
    assert not rep.passed
    assert "divergent-modulus" in rep.flags


def test_hl2_cusp_consistent():
    cfg = E.parse_config_text(HL1_CUSP.replace("hl1", "hl2") + "\np = 1")
    rep = E.run_theorem23_check(cfg)
    assert rep.passed
    names = {c["name"]: c for c in rep.checks}
    assert names["exponents_mutually_consistent"]["passed"]
    gap = abs(rep.values["implied_alpha_means"] - rep.values["implied_alpha_modulus"])
    assert gap <= 0.1


def test_hl2_alpha1_boundedness():
    cfg = E.parse_config_text("""
experiment = hl2
domain = unit_disc
density = hyperbolic
map = cusp_a100
alpha = 1.0
p = 2
""")
    rep = E.run_theorem23_check(cfg)
    assert rep.passed
    names = {c["name"]: c for c in rep.checks}
    assert names["means_curve_bounded"]["passed"]


def test_hl2_constant_map_zero_curves():
    cfg = E.parse_config_text(HL1_CUSP.replace("hl1", "hl2").replace(
        "cusp_a50", "const_25"))
    rep = E.run_theorem23_check(cfg)
    assert rep.passed
    assert "zero-curves" in rep.flags


def test_hl2_converse_restricted_off_disc():
    cfg = E.parse_config_text("""
experiment = hl2
domain = unit_disc
density = quasihyperbolic
map = cusp_a50
alpha = 0.5
p = 1
resolution = 0.05
steps_k = 3 4 5 6 7 8
circle_samples = 256
""")
    rep = E.run_theorem23_check(cfg)
    assert any("converse direction skipped" in n for n in rep.notes)


def test_yamashita_verbatim_and_report_values():
    cfg = E.parse_config_text("""
experiment = yamashita
domain = unit_disc
density = hyperbolic
map = scale_50
alpha = 1.0
""")
    rep = E.run_yamashita_check(cfg)
    assert rep.passed
    assert rep.values["hyperbolic_derivative_at_0"] == pytest.approx(0.5)
    names = {c["name"] for c in rep.checks}
    assert "hyperbolic_derivative_verbatim" in names


def test_yamashita_identity_out_of_range():
    cfg = E.parse_config_text("""
experiment = yamashita
domain = unit_disc
density = hyperbolic
map = identity
alpha = 1.0
""")
    rep = E.run_yamashita_check(cfg)
    assert not rep.passed
    assert "divergent-modulus" in rep.flags
    # sup growth of 1/(1-|z|^2) puts the implied exponent at the alpha = 0
    # edge, which the report flags as out of range
    assert "alpha-out-of-range" in rep.flags
    assert rep.values["implied_alpha_means"] == pytest.approx(0.0, abs=0.05)


def test_yamashita_needs_hyperbolic_disc():
    cfg = E.parse_config_text("""
experiment = yamashita
domain = unit_disc
density = quasihyperbolic
map = scale_50
""")
    with pytest.raises(ConfigError):
        E.run_yamashita_check(cfg)


def test_qh_compare_disc_bergman_passes():
    rep = E.run_qh_comparability(E.parse_config_text(QH_DISC_SMALL))
    assert rep.passed
    names = {c["name"]: c for c in rep.checks}
    assert names["ratios_within_band"]["lo"] > 1 / 3
    assert names["ratios_within_band"]["hi"] < 3


def test_qh_compare_smoothed_polygon():
    cfg = E.parse_config_text("""
experiment = qh-compare
domain = smoothed_polygon 0.3 1 1 -1 1 -1 -1 1 -1
density = bergman
kernel_degree = 32
kernel_resolution = 0.02
resolution = 0.04
compare_pairs = 3
ring_distances = 0.5 0.4 0.2
""")
    rep = E.run_qh_comparability(cfg)
    assert rep.passed


def test_qh_compare_constant_control_fails():
    cfg = E.parse_config_text("""
experiment = qh-compare
domain = unit_disc
density = constant 1.0
resolution = 0.04
compare_pairs = 2
ring_distances = 0.4 0.2 0.1 0.05
""")
    rep = E.run_qh_comparability(cfg)
    assert not rep.passed


def test_nt_bounds_small_disc():
    cfg = E.parse_config_text("""
experiment = nt-bounds
domain = unit_disc
density = bergman
kernel_degree = 16
kernel_resolution = 0.04
resolution = 0.04
pairs = 8
pair_margin = 0.25
refine_sweeps = 10
""")
    rep = E.run_nt_bound_fit(cfg)
    assert rep.passed
    assert 1.0 <= rep.values["c_star"] <= 10.0
    assert rep.values["excluded_pairs"] == 0
    assert rep.values["upper_margin_min"] >= -1e-12
    assert rep.values["lower_margin_min"] >= -1e-12


def test_nt_bounds_requires_bergman():
    cfg = E.parse_config_text("""
experiment = nt-bounds
domain = unit_disc
density = hyperbolic
""")
    with pytest.raises(ConfigError):
        E.run_nt_bound_fit(cfg)


def test_nt_bound_formula_vacuous_at_equal_points():
    # z = w: both bounds read 0 <= 0 <= 0 for any constant
    q = 0.0
    beta = 0.0
    assert math.sqrt(2) * math.log1p(q / 5.0) <= beta <= math.sqrt(2) * math.log1p(5.0 * q)


# ---------------------------------------------------------------------------
# reports and determinism


def test_emit_report_roundtrip(tmp_path):
    cfg = E.parse_config_text(HL1_CUSP)
    rep = E.run_theorem1_check(cfg)
    paths = E.emit_report(rep, tmp_path)
    assert paths[0].endswith(".json")
    loaded = E.load_report(paths[0])
    assert loaded["passed"] == rep.passed
    assert loaded["checks"] == rep.checks
    for name, curve in rep.curves.items():
        data_path = [p for p in paths if p.endswith(f".{name}.dat")]
        assert len(data_path) == 1
        data = np.loadtxt(data_path[0])
        # 17 significant digits round-trip to the same floats
        assert np.array_equal(data[:, 0], np.asarray(curve["abscissa"]))
        assert np.array_equal(data[:, 1], np.asarray(curve["values"]))


def test_reports_deterministic(tmp_path):
    cfg = E.parse_config_text(HL1_CUSP)
    a = tmp_path / "a"
    b = tmp_path / "b"
    E.emit_report(E.run_theorem1_check(cfg), a)
    E.emit_report(E.run_theorem1_check(cfg), b)
    for name in sorted(os.listdir(a)):
        with open(a / name, "rb") as fa, open(b / name, "rb") as fb:
            assert fa.read() == fb.read(), name


def test_report_self_contained(tmp_path):
    cfg = E.parse_config_text(HL1_CUSP)
    rep = E.run_theorem1_check(cfg)
    paths = E.emit_report(rep, tmp_path)
    data = json.loads(open(paths[0]).read())
    # every verdict is recomputable from stored numbers alone
    for check in data["checks"]:
        if "observed" in check and "target" in check:
            recomputed = abs(check["observed"] - check["target"]) <= check["tolerance"]
            assert recomputed == check["passed"]


# ---------------------------------------------------------------------------
# CLI


def _write_config(tmp_path, text):
    path = tmp_path / "exp.txt"
    path.write_text(text)
    return str(path)


def test_cli_verify_pass_and_fail(tmp_path, capsys):
    cfg = _write_config(tmp_path, HL1_CUSP + f"\nout = {tmp_path}/rep")
    assert cli.main(["verify", "hl1", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "report:" in out

    cfg_bad = _write_config(tmp_path, HL1_CUSP.replace("cusp_a50", "identity")
                            + f"\nout = {tmp_path}/rep")
    assert cli.main(["verify", "hl1", "--config", cfg_bad]) == 1


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert cli.main(["verify", "hl1", "--config", str(tmp_path / "none.txt")]) == 2
    cfg = _write_config(tmp_path, "experiment = hl1\n")
    assert cli.main(["verify", "hl1", "--config", cfg]) == 2


def test_cli_report_command(tmp_path, capsys):
    cfg = _write_config(tmp_path, HL1_CUSP + f"\nout = {tmp_path}/rep")
    cli.main(["verify", "hl1", "--config", cfg])
    capsys.readouterr()
    report = [f for f in os.listdir(tmp_path / "rep") if f.endswith(".json")][0]
    assert cli.main(["report", str(tmp_path / "rep" / report)]) == 0
    assert "[PASS]" in capsys.readouterr().out


def test_cli_distance_density_means_modulus(tmp_path, capsys):
    cfg = _write_config(tmp_path, HL1_CUSP)
    assert cli.main(["distance", "0", "0.5", "--config", cfg,
                     "--out", str(tmp_path / "paths")]) == 0
    out = capsys.readouterr().out
    assert "0.549306" in out
    assert cli.main(["density", "eval", "0.5+0j", "--config", cfg]) == 0
    assert "1.333" in capsys.readouterr().out
    assert cli.main(["means", "--config", cfg]) == 0
    capsys.readouterr()
    assert cli.main(["modulus", "--config", cfg]) == 0


def test_cli_kernel_fit(tmp_path, capsys):
    cfg = _write_config(tmp_path, QH_DISC_SMALL + f"\nout = {tmp_path}/kern")
    assert cli.main(["kernel", "fit", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "orthonormality defect" in out
    files = os.listdir(tmp_path / "kern")
    assert any(f.startswith("kernel_") for f in files)


def test_cli_overrides_change_hash(tmp_path):
    cfg = _write_config(tmp_path, HL1_CUSP + f"\nout = {tmp_path}/r1")
    cli.main(["verify", "hl1", "--config", cfg])
    cli.main(["verify", "hl1", "--config", cfg, "--tolerance", "0.2",
              "--out", str(tmp_path / "r2")])
    r1 = os.listdir(tmp_path / "r1")
    r2 = os.listdir(tmp_path / "r2")
    assert {f.split(".")[0] for f in r1} != {f.split(".")[0] for f in r2}
