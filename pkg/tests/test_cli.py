import json

import pytest

from modelkit.cli import run


@pytest.fixture
def call(tmp_path):
    def _call(command, doc, *extra):
        inp = tmp_path / "in.json"
        out = tmp_path / "out.json"
        inp.write_text(json.dumps(doc))
        code = run([command, "--input", str(inp), "--output", str(out), *extra])
        return code, json.loads(out.read_text()), out
    return _call


NPI = {"family": "arith", "alpha": 1, "beta": 1}


class TestCli:
    def test_decide(self, call):
        code, doc, _ = call("decide", {"U": {"mass": 1}, "V": {"mass": 2}})
        assert code == 0 and doc["result"]["verdict"] == "Nontrivial"
        assert doc["config"]["decider"]["tau"] == 1e-12
        assert doc["citations"] and "timestamp" not in json.dumps(doc)

    def test_decide_other_shape(self, call):
        code, doc, _ = call("decide", {"U": {"zeros": NPI}, "V": {"zeros": NPI}})
        assert code == 2 and doc["result"]["verdict"] == "OutOfScope"

    def test_density_family(self, call):
        code, doc, _ = call("density", {"sequence": {"family": NPI}})
        b = doc["result"]["bracket"]
        assert code == 0 and (b["lower"], b["upper"], b["exact"]) == (1.0, 1.0, True)

    def test_density_csv(self, call):
        code, doc, out = call("density", {"sequence": {"generator": "n_plus_i", "N": 2000}, "check_a": [1.0]})
        assert code == 0
        side = out.with_name("out.windows.csv").read_text().splitlines()
        assert side[0] == "a,W,integral" and len(side) > 3

    def test_probe(self, call):
        sym = [{"spec": {"mass": 1}, "exponent": -1}]
        code, doc, out = call("probe", {"symbol": sym, "config": {"sizes": [4, 8, 12]}})
        assert code == 0 and doc["result"]["verdict"] == "LikelyNontrivial"
        assert out.with_name("out.sigma.csv").exists()

    def test_hilbert(self, call):
        code, doc, _ = call("hilbert", {"function": "poisson", "x": [1.0]})
        assert code == 0 and doc["result"]["values"][0]["value"] == pytest.approx(0.5)

    def test_verify_multiplier_seeded(self, call):
        doc_in = {"U": {"mass": 1}, "V": {"mass": 2},
                  "phi": {"kind": "kernel", "spec": {"mass": 1}, "lam": {"re": 0, "im": 1}}, "n_points": 4}
        code, a, _ = call("verify-multiplier", doc_in, "--seed", "3")
        _, b, _ = call("verify-multiplier", doc_in, "--seed", "3")
        assert code == 0 and a == b and a["result"]["verdict"] == "InModelSpace"

    def test_lemma1(self, call):
        code, doc, _ = call("lemma1", {"theta": {"mass": 1}, "zeros": [{"re": 0, "im": 1}]})
        assert code == 0 and doc["result"]["element"]["norm"] == pytest.approx(1.0)

    def test_lemma1_rejects_finite(self, call):
        code, doc, _ = call("lemma1", {"theta": {"zeros": [{"re": 0, "im": 1}]}})
        assert code == 1 and doc["error"]["error"] == "FiniteBlaschkeTheta"

    @pytest.mark.parametrize("doc", [
        {"U": {"mass": 1, "extra": 0}, "V": {"mass": 2}},
        {"U": {"mass": 1}},
        {"U": {"mass": "one"}, "V": {}},
    ])
    def test_schema_errors(self, call, doc):
        code, out, _ = call("decide", doc)
        assert code == 1 and out["error"]["error"] == "SchemaError"

    def test_domain_error(self, call):
        code, out, _ = call("decide", {"U": {"zeros": [{"re": 0, "im": -1}]}, "V": {}})
        assert code == 1 and out["error"]["error"] == "NonUpperHalfZero"

    def test_deterministic_bytes(self, call):
        _, _, out = call("decide", {"U": {"zeros": NPI, "mass": 1}, "V": {"mass": 9}})
        first = out.read_bytes()
        _, _, out = call("decide", {"U": {"zeros": NPI, "mass": 1}, "V": {"mass": 9}})
        assert out.read_bytes() == first

    def test_schedule_override(self, call, tmp_path):
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"n_terms": 500, "levels": [250, 500]}))
        code, doc, _ = call("decide", {"U": {"mass": 1}, "V": {"mass": 2}}, "--schedule", str(sched))
        assert code == 0 and doc["config"]["schedule"]["n_terms"] == 500
