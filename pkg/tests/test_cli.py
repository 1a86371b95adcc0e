import json
import math
import multiprocessing

import numpy as np
import pytest

from pnormlab import cli
from pnormlab import experiments as ex
from pnormlab.channels import RandomUnitaryChannel
from pnormlab.ensembles import SeededRng
from pnormlab.entropy import EstimatorConfig
from pnormlab.linalg import BipartiteDims, partial_trace, projector
from pnormlab.channels import StinespringChannel
from pnormlab.records import ExperimentRecord, append_record, read_records

VIOLATION_KEYS = {"p", "dim_a", "dim_b", "dim_s", "hmin_hat_n", "hmin_hat_nbar",
                  "h_product_phi", "gap", "bound_check", "seed"}


def run(tmp_path, *args):
    return cli.main(["--records", str(tmp_path / "runs.jsonl"), *args])


def test_spectrum_command_and_csv(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "s.csv", tmp_path / "s.svg"
    assert run(tmp_path, "spectrum", "--seed", "3", "--out", str(csv_path), "--svg", str(svg_path)) == 0
    assert "lambda_max" in capsys.readouterr().out
    assert csv_path.read_text().splitlines()[0] == "index,eigenvalue"
    lam = ex.read_spectrum_csv(csv_path)
    assert lam.size == 576 and np.all(np.diff(lam) >= 0)
    assert abs(lam.sum() - 1) < 1e-6
    assert lam[-1] >= 1 / 3 - 1e-9
    svg = svg_path.read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 576
    (rec,) = read_records(tmp_path / "runs.jsonl")
    assert rec.command == "spectrum" and rec.master_seed == 3
    assert rec.outputs["reference_top"] == pytest.approx(1 / 3)
    assert rec.outputs["reference_flat"] == pytest.approx(1 / 864)


def test_csv_round_trip_precision(tmp_path):
    vals = np.sort(SeededRng(1).generator().dirichlet(np.ones(50)))
    ex.write_spectrum_csv(tmp_path / "x.csv", vals)
    back = ex.read_spectrum_csv(tmp_path / "x.csv")
    assert np.array_equal(back, vals)


def test_spectrum_of_constant_channel_pair(tmp_path):
    # |S| = 1: the output is rho (x) conj(rho) with rho = Tr_B |v><v|, so the
    # spectrum is the outer product of rho's eigenvalues with themselves
    rec = ex.run_spectrum(2, 2, 4, 5, tmp_path / "c.csv")
    v = StinespringChannel.sample(SeededRng(5, 0), BipartiteDims(2, 2), 1).isometry[:, 0]
    mu = np.linalg.eigvalsh(partial_trace(projector(v), BipartiteDims(2, 2), "A"))
    want = np.sort(np.outer(mu, mu).ravel())
    assert np.allclose(ex.read_spectrum_csv(tmp_path / "c.csv"), want, atol=1e-12)
    assert rec.outputs["dim_s"] == 1


def test_spectrum_unitary_embedding_is_pure(tmp_path):
    rec = ex.run_spectrum(24, 24, 1, 0, tmp_path / "p.csv")
    assert rec.outputs["lambda_max"] == pytest.approx(1, abs=1e-10)
    assert rec.outputs["h1"] == pytest.approx(0, abs=1e-8)


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--dim-r", "5", "--out", str(tmp_path / "x.csv")) == 2
    assert run(tmp_path, "spectrum", "--dim-a", "128", "--dim-b", "2", "--dim-r", "2",
               "--out", str(tmp_path / "x.csv")) == 3
    assert run(tmp_path, "bounds", "--p", "1") == 2
    assert run(tmp_path, "violation", "--p", "0.5") == 2
    assert run(tmp_path, "ru-violation", "--d", "64", "--n", "100000") == 3
    assert run(tmp_path, "purity", "--dim-a", "1", "--dim-b", "2", "--dim-s", "1") == 2
    with pytest.raises(SystemExit) as err:
        run(tmp_path, "bounds", "--p", "zero")
    assert err.value.code == 2
    assert not (tmp_path / "runs.jsonl").exists()


def test_violation_command(tmp_path):
    out = tmp_path / "v.json"
    assert run(tmp_path, "violation", "--dim-a", "6", "--dim-b", "6", "--dim-s", "12",
               "--samples", "200", "--restarts", "2", "--max-iters", "30", "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert set(data) == VIOLATION_KEYS
    assert data["h_product_phi"] <= data["bound_check"] + 1e-8
    assert data["gap"] == pytest.approx(data["hmin_hat_n"] + data["hmin_hat_nbar"] - data["h_product_phi"])


def test_violation_infinite_order_and_full_dimension(tmp_path):
    report, rec = ex.run_violation(math.inf, 6, 6, 12, 1, 100, 2, 20, tmp_path / "v.json")
    assert json.loads((tmp_path / "v.json").read_text())["p"] == "inf"
    assert report.h_product_phi <= math.log(3) + 1e-8
    report, _ = ex.run_violation(2, 3, 3, 9, 1, 50, 1, 10)
    assert report.h_product_phi == pytest.approx(0, abs=1e-8)
    assert report.gap >= 0 and report.consistent


def test_ru_report_closed_forms():
    paulis = np.array([np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
    rep = ex.ru_report(RandomUnitaryChannel(paulis), 4, EstimatorConfig(16, 2, 10), 0)
    assert abs(rep.epsilon_hat) < 1e-9
    assert rep.phi_overlap == pytest.approx(0.25)
    assert rep.conditional_upper_bound == pytest.approx(0.5**1.5)
    assert not rep.violation
    single = RandomUnitaryChannel.sample(SeededRng(0), 5, 1)
    assert ex.ru_report(single, 4, EstimatorConfig(8, 1, 5), 0).phi_overlap == pytest.approx(1)


def test_ru_violation_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(tmp_path, "ru-violation", "--d", "8", "--n", "64", "--samples", "32",
               "--restarts", "2", "--max-iters", "20", "--out", str(out)) == 0
    text = capsys.readouterr().out
    assert "lower-bound estimate" in text and "conditional upper bound" in text
    data = json.loads(out.read_text())
    assert data["phi_overlap"] >= 1 / 64 - 1e-9
    assert data["epsilon_label"] == "lower-bound estimate"


def test_purity_command(tmp_path):
    assert run(tmp_path, "purity", "--dim-a", "2", "--dim-b", "2", "--dim-s", "4",
               "--mc-samples", "50", "--out", str(tmp_path / "p.json")) == 0
    data = json.loads((tmp_path / "p.json").read_text())
    assert data["exact"] == pytest.approx(1, abs=1e-12) and data["mc_mean"] == pytest.approx(1, abs=1e-9)
    assert data["difference_in_stderr"] is None
    rec = ex.run_purity(3, 3, 4, 10_000, 2)
    assert abs(rec.outputs["difference_in_stderr"]) <= 3


def test_bounds_command(tmp_path, capsys):
    assert run(tmp_path, "bounds") == 0
    assert "bound vacuous at this scale" in capsys.readouterr().out
    rec = read_records(tmp_path / "runs.jsonl")[-1]
    assert rec.outputs["dim_s"] == 0 and rec.outputs["beta"] == 3.0
    assert rec.outputs["failure_prob_bound"] > 1


@pytest.mark.parametrize("args", [
    ["spectrum", "--dim-a", "6", "--dim-b", "6", "--dim-r", "3", "--seed", "9"],
    ["violation", "--dim-a", "4", "--dim-b", "4", "--dim-s", "8", "--samples", "50",
     "--restarts", "2", "--max-iters", "20", "--p", "inf"],
    ["ru-violation", "--d", "4", "--n", "16", "--samples", "8", "--restarts", "1", "--max-iters", "5"],
    ["purity", "--mc-samples", "100", "--seed", "18446744073709551615"],
    ["bounds", "--p", "3", "--dim-a", "64", "--dim-b", "128"],
])
def test_replay_reproduces_outputs(tmp_path, monkeypatch, capsys, args):
    monkeypatch.chdir(tmp_path)
    assert run(tmp_path, *args) == 0
    assert run(tmp_path, "replay") == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["identical"] is True
    assert len(read_records(tmp_path / "runs.jsonl")) == 1


def test_replay_detects_tampering(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run(tmp_path, "bounds", "--dim-a", "16", "--dim-b", "16") == 0
    rec = read_records(tmp_path / "runs.jsonl")[0]
    rec.outputs["beta"] = 2.0
    (tmp_path / "runs.jsonl").write_text(rec.to_json() + "\n")
    assert run(tmp_path, "replay") == 1


def test_record_fields(tmp_path):
    rec = ex.run_bounds(2, 16, 16)
    back = ExperimentRecord.from_json(rec.to_json())
    assert back == rec
    assert back.generator.endswith("PCG64/SeedSequence") and back.version
    assert "T" in back.timestamp and back.duration_s >= 0


def _append_many(path, worker):
    for i in range(50):
        append_record(path, ExperimentRecord("bounds", {"i": i}, worker, {}, {"x": "y" * 2000}, 0.0))


def test_concurrent_appends_stay_line_atomic(tmp_path):
    path = tmp_path / "shared.jsonl"
    procs = [multiprocessing.Process(target=_append_many, args=(path, w)) for w in range(4)]
    for p in procs:
        p.start()
    for p in procs:
        p.join()
    recs = read_records(path)
    assert len(recs) == 200
    assert sorted(r.master_seed for r in recs) == sorted(list(range(4)) * 50)
