"""End-to-end exercise of every subcommand through the argument parser."""

import json

import pytest

from milnork.cli import EXIT_FAILURE, EXIT_OK, EXIT_UNKNOWN, main
from milnork.groundfield import FieldTower, FunctionField
from milnork.jsonio import encode_chain, encode_ratfunc
from milnork.kmilnor import coordinate_chain


@pytest.fixture()
def run(tmp_path, capsys):
    def go(command, payload, extra=()):
        path = tmp_path / ("%s.json" % command.replace("-", "_"))
        path.write_text(json.dumps(payload))
        code = main([*extra, command, str(path)])
        out = capsys.readouterr().out
        return code, (json.loads(out) if out else None)

    return go


@pytest.fixture(scope="module")
def enc2():
    tw = FieldTower(7, seed=0)
    ff = FunctionField(tw, 2)
    return tw, ff


def test_symbol_eval(run, enc2):
    tw, ff = enc2
    chain = coordinate_chain(ff, [0, 1], [tw.zero(), tw.zero()])
    payload = {
        "symbol": [encode_ratfunc(ff.var(0)), encode_ratfunc(ff.var(1))],
        "chain": encode_chain(chain),
    }
    code, out = run("symbol-eval", payload, extra=["--vars", "2"])
    assert code == EXIT_OK
    assert out == {"scalar": 1}


def test_symbol_eval_partial_residue(run, enc2):
    tw, ff = enc2
    chain = coordinate_chain(ff, [0], [tw.zero()])
    payload = {
        "symbol": [encode_ratfunc(ff.var(0)), encode_ratfunc(ff.var(1))],
        "chain": encode_chain(chain),
    }
    code, out = run("symbol-eval", payload, extra=["--vars", "2"])
    assert code == EXIT_OK
    assert len(out["terms"]) == 1 and out["terms"][0]["coeff"] == 1


def test_certify_and_unknown(run, enc2):
    tw, ff = enc2
    payload = {"elements": [encode_ratfunc(ff.var(0)), encode_ratfunc(ff.var(1))]}
    code, out = run("certify", payload, extra=["--vars", "2", "--verify"])
    assert code == EXIT_OK and out["result"] == "certified"
    cube = (ff.var(1) + ff.const(1)) ** 3
    payload = {"elements": [encode_ratfunc(ff.var(0)),
                            encode_ratfunc(ff.var(0) ** 2 * cube)]}
    code, out = run("certify", payload, extra=["--vars", "2", "--budget", "30"])
    assert code == EXIT_UNKNOWN and out["result"] == "unknown"


def test_dim(run, enc2):
    tw, ff = enc2
    payload = {"generators": [encode_ratfunc(ff.var(0)),
                              encode_ratfunc(ff.var(1))]}
    code, out = run("dim", payload, extra=["--vars", "2"])
    assert code == EXIT_OK
    assert out == {"lower": 2, "upper": 2}


def test_lattice_build(run, enc2):
    tw, ff = enc2
    payload = {"subfields": [
        [encode_ratfunc(ff.var(0))],
        [encode_ratfunc(ff.var(0)), encode_ratfunc(ff.var(1))],
    ]}
    code, out = run("lattice-build", payload, extra=["--vars", "2"])
    assert code == EXIT_OK
    assert [n["rank"] for n in out["nodes"]] == [1, 2]


def test_lattice_reconstruct(run):
    payload = {
        "p": 7, "ell": 3, "vars": 5,
        "universe": [{"var": i} for i in range(5)],
    }
    code, out = run("lattice-reconstruct", payload)
    assert code == EXIT_OK
    ranks = [n["rank"] for n in out["lattice"]["nodes"]]
    assert ranks.count(1) == 5 and ranks.count(2) == 10 and ranks.count(3) == 10


def test_delta(run, enc2):
    tw, ff = enc2
    payload = {
        "generator": encode_ratfunc(ff.var(0)),
        "valuations": [
            {"var": 0, "center": {"level": 1, "coeffs": [0]}},
            {"var": 1, "center": {"level": 1, "coeffs": [0]}},
            {"var": 0, "center": "inf"},
        ],
    }
    code, out = run("delta", payload, extra=["--vars", "2"])
    assert code == EXIT_OK
    assert len(out["entries"]) == 2


def test_rigidity(run):
    payload = {
        "ell": 5, "ambient_dim": 2,
        "fragments": [{"name": "A", "members": [[1, 0], [0, 1]]}],
        "phi": [[3, 0], [0, 3]],
    }
    code, out = run("rigidity", payload)
    assert code == EXIT_OK and out == {"result": "epsilon", "epsilon": 3}
    payload["phi"] = [[0, 1], [1, 0]]
    code, out = run("rigidity", payload)
    assert code == EXIT_FAILURE and out["result"] == "rejected"


def test_geometry_check_and_lcl(run):
    table = [
        [[], []],
        [["a"], ["a"]], [["b"], ["b"]], [["c"], ["c"]],
        [["a", "b"], ["a", "b", "c"]],
        [["a", "c"], ["a", "b", "c"]],
        [["b", "c"], ["a", "b", "c"]],
        [["a", "b", "c"], ["a", "b", "c"]],
    ]
    geometry = {"points": ["a", "b", "c"], "closure": table}
    code, out = run("geometry-check", {"geometry": geometry})
    assert code == EXIT_OK
    assert all(v["pass"] for v in out["report"].values())
    code, out = run("lcl-eval", {"geometry": geometry, "formula": "(cl x a b)"})
    assert code == EXIT_OK
    assert sorted(t[0] for t in out["tuples"]) == ["a", "b", "c"]


def test_abc_verify(run):
    payload = {
        "group": {"rank": 2, "ell": 3, "relations": []},
        "words": ["x1 x2 x1^-1 x2^-1"],
        "h2": {"n": 2, "ell": 3},
    }
    code, out = run("abc-verify", payload)
    assert code == EXIT_OK
    assert out["kernel_dim"] == 0 and out["h2_dim"] == 3
    assert out["normal_forms"][0]["central"] == [1]


def test_duality_check_cli(run):
    payload = {
        "group": {"rank": 3, "ell": 3, "relations": [[1, 0, 0]]},
        "mult": {"n": 3, "ell": 3, "kernel": [[1, 0, 0]]},
    }
    code, out = run("duality-check", payload)
    assert code == EXIT_OK and out["passed"]
    payload["mult"]["kernel"] = []
    code, out = run("duality-check", payload)
    assert code == EXIT_FAILURE and not out["passed"]


def test_kummer_cli(run):
    payload = {
        "mult_k": {"n": 2, "ell": 3, "kernel": []},
        "mult_l": {"n": 2, "ell": 3, "kernel": []},
        "phi": [[1, 1], [0, 1]],
    }
    code, out = run("kummer", payload)
    assert code == EXIT_OK
    assert out["psi"] == [[1, 0], [1, 1]]


PIPELINE_UNIVERSE = [
    {"var": 0}, {"var": 1}, {"var": 2}, {"var": 3}, {"var": 4},
    {"linear": {"0": 1, "1": 1}},
    {"linear": {"0": 1, "2": 1}},
]


def test_pipeline_cli(run):
    payload = {"p": 7, "ell": 3, "vars": 5, "seed": 4,
               "universe": PIPELINE_UNIVERSE}
    code, out = run("pipeline", payload, extra=["--verify"])
    assert code == EXIT_OK
    assert all(v["pass"] for v in out["axiom_report"].values())
    assert len(out["geometry"]["points"]) == 7
    relations = {tuple(e["pair"]): e["relation"]
                 for e in out["kring_fragment"]["pairs"]}
    assert relations[(0, 1)] == "independent"


def test_pipeline_insufficient_universe(run):
    payload = {"p": 7, "ell": 3, "vars": 5, "universe": [{"var": 0}]}
    code, out = run("pipeline", payload)
    assert code == EXIT_FAILURE
    assert out["error"] == "insufficient-universe"


def test_roundtrip_cli(run):
    payload = {"p": 7, "ell": 3, "vars": 5, "seed": 4,
               "universe": PIPELINE_UNIVERSE,
               "permutation": [1, 0, 2, 3, 4]}
    code, out = run("roundtrip", payload)
    assert code == EXIT_OK
    assert out["lattices_isomorphic"] and out["points_transferred"] == 7


def test_out_flag_writes_canonical_json(tmp_path):
    payload = {"generators": []}
    src = tmp_path / "in.json"
    src.write_text(json.dumps({"generators": []}))
    dst = tmp_path / "out.json"
    code = main(["--vars", "2", "--out", str(dst), "dim", str(src)])
    assert code == EXIT_OK
    text = dst.read_text()
    assert text.endswith("\n") and '"lower":0' in text.replace(" ", "")


def test_roundtrip_identity_permutation(run):
    payload = {"p": 7, "ell": 3, "vars": 5, "seed": 4,
               "universe": PIPELINE_UNIVERSE,
               "permutation": [0, 1, 2, 3, 4]}
    code, out = run("roundtrip", payload)
    assert code == EXIT_OK and out["artifacts_equal"]


def test_pipeline_config_validation():
    from milnork.cli import PipelineConfig

    with pytest.raises(ValueError):
        PipelineConfig({"p": 3, "ell": 3, "vars": 5})
    with pytest.raises(ValueError):
        PipelineConfig({"p": 7, "ell": 3, "vars": 1})
    with pytest.raises(ValueError):
        PipelineConfig({"p": 7, "ell": 3, "vars": 5, "max_rank": 5})
    cfg = PipelineConfig({"p": 7, "ell": 3, "vars": 4})
    with pytest.raises(ValueError):
        cfg.require_vars(5, "the full pipeline")
