import json
import math
import os

import pytest

import lindley


def test_one_step_law():
    d = lindley.density(0.3, 1.0, 1.0, 1)
    assert d.atom == pytest.approx(math.exp(-1.3) / 2, rel=1e-15)
    assert d.pdf(1.3) == pytest.approx(0.5, rel=1e-15)
    assert d.pdf([0.5, 2.0]) == pytest.approx([math.exp(-0.8) / 2, math.exp(-0.7) / 2], rel=1e-15)
    assert d.cdf(3.0) == pytest.approx(1 - math.exp(-1.7) / 2, rel=1e-15)


def test_mass_and_regimes():
    for mu, regime in [(0.3, "PosMuNonNeg"), (-0.3, "PosMuNegSmall"), (-2.0, "PosMuNegLarge")]:
        assert lindley.position_regime(mu, 1.0, 1.0) == regime
        for d in lindley.density_chain(mu, 1.0, 1.0, 10)[1:]:
            assert abs(d.total_mass() - 1) < 1e-8
            assert d.regime == regime


def test_fet():
    p = lindley.fet_pmf(2.0, 1.0, 0.0, 1.0, 2)
    assert p == pytest.approx([1 - math.exp(-1) / 2, math.exp(-1) / 2 - math.exp(-3) / 2], abs=1e-12)
    assert lindley.fet_regime(0.0, 1.0, 1.0, 3.0) == "FetMuZero"
    cum = lindley.fet_cdf(0.3, 1.0, 1.0, 3.0, 200)
    assert cum[-1] >= 0.999
    m = lindley.mean_fet(0.3, 1.0, 1.0, 3.0)
    assert m["tail_ratio"] < 1
    assert m["mean"] > 1


def test_cusum():
    assert lindley.log_mgf(0.0, 1.0, 0.5) == pytest.approx(-math.log(0.75), rel=1e-15)
    loc, scale = lindley.llr_params(0.0, 1.0, 0.5)
    assert scale == 0.5
    pmf = lindley.run_length_pmf(0.0, 1.0, 0.5, 3.0, 0.0, 20)
    assert pmf == lindley.fet_pmf(loc, scale, 0.0, 3.0, 20)


def test_errors():
    with pytest.raises(lindley.DomainError):
        lindley.fet_pmf(0.3, 1.0, 3.0, 3.0, 5)
    with pytest.raises(ValueError):
        lindley.density(0.3, -1.0, 1.0, 2)
    with pytest.raises(lindley.DomainError):
        lindley.log_mgf(0.0, 1.0, 1.0)


def test_simulation_is_reproducible():
    a = lindley.simulate(-0.3, 1.0, 1.0, h=3.0, trajectories=20000, n_max=3, threads=1)
    b = lindley.simulate(-0.3, 1.0, 1.0, h=3.0, trajectories=20000, n_max=3, threads=2)
    assert a == b
    c3 = lindley.density(-0.3, 1.0, 1.0, 3).atom
    se = a["atom_standard_error"][3]
    assert abs(a["atom_frequency"][3] - c3) < 4 * se


def test_cli_json_matches_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema_path = os.environ.get(
        "LINDLEY_SCHEMA",
        os.path.join(os.path.dirname(__file__), "..", "..", "schema", "output_record.schema.json"),
    )
    with open(schema_path) as f:
        schema = json.load(f)
    commands = [
        ["density", "--mu", "0.3", "--x", "1", "--n", "0,2,3", "--format", "json"],
        ["fet", "--mu", "0.3", "--x", "1", "--h", "3", "--nmax", "10", "--cdf", "--mean", "--format", "json"],
        ["compare", "--oracle", "quad", "--mu", "0.3", "--x", "1", "--n", "2", "--format", "json"],
        ["cusum", "--theta", "0.5", "--mean", "--format", "json"],
    ]
    for args in commands:
        code, out, err = lindley.run_cli(args)
        assert code == 0, err
        jsonschema.validate(json.loads(out), schema)


def test_cli_exit_codes():
    assert lindley.run_cli(["density", "--mu", "0.3", "--n", "2", "--grid", "0:0:1"])[0] == 2
    assert lindley.run_cli(["fet", "--mu", "0.3", "--x", "1", "--h", "3", "--nmax", "0"])[0] == 2
    assert lindley.run_cli(["cusum", "--theta", "1.5"])[0] == 2
