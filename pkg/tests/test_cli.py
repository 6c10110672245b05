import json

import numpy as np
import pytest

from degrade_forge import engine, image_io, space
from degrade_forge.cli import main

from conftest import random_image


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# encode / decode
# ---------------------------------------------------------------------------

def test_encode_prints_vector_and_params(capsys):
    code, out, _ = run_cli(capsys, "encode", "--level", "S1", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    vector = [float(x) for x in lines[0].split()]
    assert len(vector) == 33
    doc = json.loads("\n".join(lines[1:]))
    assert doc["level"] == "S1"


def test_encode_decode_roundtrip_through_cli(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "encode", "--level", "S3", "--seed", "11")
    assert code == 0
    vector_line = out.splitlines()[0]
    original = json.loads("\n".join(out.splitlines()[1:]))

    code, out, _ = run_cli(capsys, "decode", *vector_line.split())
    assert code == 0
    decoded = json.loads(out)
    assert decoded["stage1"] == original["stage1"]
    assert decoded["stage2"] == original["stage2"]


def test_decode_wrong_arity_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "decode", "0.5", "0.5")
    assert code == 2
    assert err.startswith("error: usage:")


def test_encode_from_params_json(capsys, tmp_path):
    params = space.sample_params(space.Level.S2, np.random.default_rng(4))
    doc = tmp_path / "p.json"
    doc.write_text(json.dumps(space.params_to_dict(params)))
    code, out, _ = run_cli(capsys, "encode", "--params-json", str(doc))
    assert code == 0
    vector = np.array([float(x) for x in out.splitlines()[0].split()])
    assert np.allclose(vector, space.encode(params), atol=1e-8)


# ---------------------------------------------------------------------------
# counters / schema / metrics
# ---------------------------------------------------------------------------

def test_counters_params_report(capsys):
    code, out, _ = run_cli(capsys, "counters", "params")
    assert code == 0
    assert "expert.params\t1517571" in out
    assert "total.params\t8054005" in out


def test_counters_flops_report(capsys):
    code, out, _ = run_cli(capsys, "counters", "flops", "256", "256")
    assert code == 0
    values = dict(line.split("\t") for line in out.splitlines())
    assert float(values["expert.gmac"]) == pytest.approx(166.0, rel=0.05)
    assert float(values["predictor+weighting.gmac"]) == pytest.approx(18.0, rel=0.15)
    assert float(values["total.gmac"]) == pytest.approx(184.0, rel=0.05)


def test_schema_dump_is_yaml(capsys):
    import yaml
    code, out, _ = run_cli(capsys, "schema")
    assert code == 0
    doc = yaml.safe_load(out)
    assert doc["probabilities"]["level"] == [0.3, 0.3, 0.4]
    assert set(doc["levels"]) == {"S1", "S2", "S3"}


def test_metrics_tsv_output(capsys, tmp_path):
    a = np.full((8, 8, 3), 0.5)
    b = np.full((8, 8, 3), 0.6)
    image_io.write_png(tmp_path / "a.png", a)
    image_io.write_png(tmp_path / "b.png", b)
    code, out, _ = run_cli(capsys, "metrics", str(tmp_path / "a.png"), str(tmp_path / "b.png"))
    assert code == 0
    fields = out.splitlines()[0].split("\t")
    # constants quantize to 128/255 and 153/255 on the PNG boundary
    delta = (153 - 128) / 255
    import math
    assert float(fields[2]) == pytest.approx(10 * math.log10(1 / delta**2), abs=1e-3)
    assert out.splitlines()[-1].startswith("aggregate")


def test_metrics_missing_file(capsys, tmp_path):
    code, _, err = run_cli(capsys, "metrics", str(tmp_path / "no.png"), str(tmp_path / "no.png"))
    assert code == 2
    assert "missing-file" in err


# ---------------------------------------------------------------------------
# predict / sr
# ---------------------------------------------------------------------------

def test_predict_prints_vector_and_interpretation(capsys, tmp_path, fixture_weights_path):
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((24, 24, 3), seed=1))
    code, out, _ = run_cli(capsys, "predict", str(img_path),
                           "--weights", str(fixture_weights_path))
    assert code == 0
    vector = [float(x) for x in out.splitlines()[0].split()]
    assert len(vector) == 33
    doc = json.loads("\n".join(out.splitlines()[1:]))
    assert "stage1" in doc


def test_predict_matches_engine_output(capsys, tmp_path, fixture_weights_path, fixture_bundle):
    img_path = tmp_path / "in.png"
    img = random_image((20, 20, 3), seed=2)
    image_io.write_png(img_path, img)
    code, out, _ = run_cli(capsys, "predict", str(img_path),
                           "--weights", str(fixture_weights_path))
    assert code == 0
    got = np.array([float(x) for x in out.splitlines()[0].split()])
    want = engine.predict_degradation(image_io.read_png(img_path), fixture_bundle.predictor)
    assert np.abs(got - want).max() < 1e-5


def test_predict_with_zero_weights_prints_zero_vector(capsys, tmp_path):
    import numpy as np

    from degrade_forge.engine import expert_topology, predictor_topology
    from degrade_forge.moe import ExpertBank, WeightingNet
    from degrade_forge.weights_io import ModelBundle, save_bundle

    zero = lambda t: {n: np.zeros(s, np.float32) for n, s in t.param_shapes().items()}
    bundle = ModelBundle(
        bank=ExpertBank(experts=[zero(expert_topology()) for _ in range(5)]),
        predictor=zero(predictor_topology()),
        weighting=WeightingNet(w1=np.zeros((64, 33), np.float32),
                               b1=np.zeros(64, np.float32),
                               w2=np.zeros((5, 64), np.float32),
                               b2=np.zeros(5, np.float32)),
    )
    weights = tmp_path / "zero.dasrw"
    save_bundle(weights, bundle)
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=9))
    code, out, _ = run_cli(capsys, "predict", str(img_path), "--weights", str(weights))
    assert code == 0
    vector = [float(x) for x in out.splitlines()[0].split()]
    assert vector == [0.0] * 33


def test_predict_missing_image_exits_2(capsys, fixture_weights_path):
    code, _, err = run_cli(capsys, "predict", "/nonexistent.png",
                           "--weights", str(fixture_weights_path))
    assert code == 2
    assert err.startswith("error: missing-file:")


def test_predict_env_var_supplies_weights(capsys, tmp_path, fixture_weights_path, monkeypatch):
    monkeypatch.setenv("DASR_WEIGHTS", str(fixture_weights_path))
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=3))
    code, out, _ = run_cli(capsys, "predict", str(img_path))
    assert code == 0


def test_predict_without_weights_is_usage_error(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("DASR_WEIGHTS", raising=False)
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=4))
    code, _, err = run_cli(capsys, "predict", str(img_path))
    assert code == 2
    assert "usage" in err


def test_sr_writes_4x_png(capsys, tmp_path, fixture_weights_path):
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=5))
    out_path = tmp_path / "out.png"
    code, out, _ = run_cli(capsys, "sr", str(img_path), "--weights",
                           str(fixture_weights_path), "--out", str(out_path))
    assert code == 0
    sr = image_io.read_png(out_path)
    assert sr.shape == (64, 64, 3)
    assert "v_hat:" in out and "a:" in out


def test_sr_override_changes_expert_weights(capsys, tmp_path, fixture_weights_path):
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=6))

    def run(*extra):
        code, out, _ = run_cli(capsys, "sr", str(img_path), "--weights",
                               str(fixture_weights_path), "--out",
                               str(tmp_path / "o.png"), *extra)
        assert code == 0
        a_line = next(line for line in out.splitlines() if line.startswith("a:"))
        return [float(x) for x in a_line.split()[1:]]

    base = run()
    overridden = run("--override", "v2=1.0")
    assert base != overridden


def test_sr_override_bounds_are_usage_errors(capsys, tmp_path, fixture_weights_path):
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=7))
    for bad in ("v34=0.5", "v0=0.1", "x3=0.1", "v2=1.5"):
        code, _, err = run_cli(capsys, "sr", str(img_path), "--weights",
                               str(fixture_weights_path), "--override", bad)
        assert code == 2
        assert "usage" in err


# ---------------------------------------------------------------------------
# synthesize / fixture weights
# ---------------------------------------------------------------------------

def test_synthesize_command_writes_manifest(capsys, tmp_path):
    hr = tmp_path / "hr"
    hr.mkdir()
    for i in range(2):
        image_io.write_png(hr / f"{i}.png", random_image((160, 160, 3), seed=i))
    code, out, _ = run_cli(capsys, "synthesize", "--hr-dir", str(hr),
                           "--out-dir", str(tmp_path / "out"), "--seed", "2")
    assert code == 0
    assert "records: 6" in out
    assert (tmp_path / "out" / "manifest.jsonl").is_file()


def test_make_fixture_weights_roundtrips(capsys, tmp_path):
    path = tmp_path / "w.dasrw"
    code, out, _ = run_cli(capsys, "make-fixture-weights", str(path),
                           "--seed", "1", "--experts", "2")
    assert code == 0
    from degrade_forge.weights_io import load_bundle
    assert load_bundle(path).bank.n == 2


def test_corrupt_weights_are_reported(capsys, tmp_path, fixture_weights_path):
    img_path = tmp_path / "in.png"
    image_io.write_png(img_path, random_image((16, 16, 3), seed=8))
    corrupt = tmp_path / "corrupt.dasrw"
    raw = bytearray(fixture_weights_path.read_bytes())
    raw[100] ^= 0xFF
    corrupt.write_bytes(bytes(raw))
    code, _, err = run_cli(capsys, "predict", str(img_path), "--weights", str(corrupt))
    assert code == 1
    assert "CorruptWeights" in err
