"""Command-line interface: file formats, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from nmd.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, main, read_signal


def read_csv(path):
    """Header-tolerant numeric CSV reader used by all CLI tests."""
    with open(path) as f:
        header = f.readline().strip().split(",")
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data[:, None] if data.size == len(header) == 1 \
            else data.reshape(1, -1)
    return header, data


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def decomposed(workdir):
    """One synth + decompose round trip shared by the assertions below."""
    sig = workdir / "sig.csv"
    out = workdir / "run"
    rc = main(["synth", "custom", "--fs", "20", "--duration", "50",
               "--freq", "2", "--am-depth", "0.2", "--am-freq", "0.05",
               "--fm-depth", "0.1", "--fm-freq", "0.1",
               "--noise", "white:0.3", "--seed", "11",
               "-o", str(sig)])
    assert rc == EXIT_OK
    rc = main(["decompose", str(sig), "--kind", "wft", "--seed", "5",
               "-o", str(out)])
    assert rc == EXIT_OK
    return sig, out


class TestSynth:
    def test_writes_time_and_value_columns(self, workdir):
        path = workdir / "tone.csv"
        rc = main(["synth", "puretone", "--fs", "50", "--duration", "10",
                   "--freq", "3", "-o", str(path)])
        assert rc == EXIT_OK
        header, data = read_csv(path)
        assert header == ["t", "x"]
        assert data.shape == (500, 2)
        t = data[:, 0]
        assert np.allclose(np.diff(t), 0.02)
        assert np.allclose(data[:, 1], np.cos(2 * np.pi * 3 * t), atol=1e-6)

    def test_truth_file(self, workdir):
        path = workdir / "ex2.csv"
        truth = workdir / "ex2_truth.csv"
        rc = main(["synth", "example2", "-o", str(path),
                   "--truth", str(truth)])
        assert rc == EXIT_OK
        header, data = read_csv(truth)
        assert header[:2] == ["t", "noise"]
        assert "mode_0" in header and "mode_1" in header
        _, sig = read_csv(path)
        total = data[:, 1] + data[:, header.index("mode_0")] \
            + data[:, header.index("mode_1")]
        assert np.allclose(total, sig[:, 1], atol=1e-6)

    def test_same_seed_reproduces_bytes(self, workdir):
        a = workdir / "a.csv"
        b = workdir / "b.csv"
        for p in (a, b):
            main(["synth", "example1", "--seed", "3", "-o", str(p)])
        assert a.read_bytes() == b.read_bytes()


class TestDecompose:
    def test_output_files_exist(self, decomposed):
        _, out = decomposed
        for name in ("summary.json", "residual.csv", "trend.csv",
                     "mode_0.csv", "harmonics_0.json"):
            assert (out / name).exists()

    def test_summary_contents(self, decomposed):
        _, out = decomposed
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seed"] == 5
        assert summary["n_modes"] == len(summary["harmonic_sets"]) == 1
        assert summary["harmonic_sets"][0][0] == 1.0
        assert summary["failure"] is None
        assert summary["config"]["kind"] == "wft"
        assert summary["noise_tests"][-1]["is_noise"] is True

    def test_harmonics_json_schema(self, decomposed):
        _, out = decomposed
        entries = json.loads((out / "harmonics_0.json").read_text())
        assert entries[0]["h"] == 1.0
        assert entries[0]["a_h"] == 1.0
        for e in entries:
            assert set(e) == {"h", "a_h", "varphi_h", "rho",
                              "significance", "f0_used", "method"}

    def test_mode_columns_and_bookkeeping(self, decomposed):
        sig, out = decomposed
        header, mode = read_csv(out / "mode_0.csv")
        assert header == ["t", "x", "A", "phi", "nu"]
        _, resid = read_csv(out / "residual.csv")
        _, trend = read_csv(out / "trend.csv")
        _, raw = read_csv(sig)
        total = mode[:, 1] + resid[:, 1] + trend[:, 1]
        # written with 9 significant digits, so round trip is ~1e-7
        assert np.max(np.abs(total - raw[:, 1])) < 1e-5

    def test_thread_count_does_not_change_bytes(self, decomposed, workdir):
        sig, out = decomposed
        out1 = workdir / "run_t1"
        out2 = workdir / "run_t2"
        for threads, o in (("1", out1), ("2", out2)):
            rc = main(["decompose", str(sig), "--kind", "wft", "--seed",
                       "5", "--threads", threads, "-o", str(o)])
            assert rc == EXIT_OK
        for name in ("summary.json", "mode_0.csv", "residual.csv",
                     "trend.csv", "harmonics_0.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        # and both agree with the default-thread reference run
        assert (out / "mode_0.csv").read_bytes() \
            == (out1 / "mode_0.csv").read_bytes()


class TestTfr:
    def test_matrix_layout(self, workdir, decomposed):
        sig, _ = decomposed
        out = workdir / "tfr.csv"
        rc = main(["tfr", str(sig), "--kind", "wft", "-o", str(out)])
        assert rc == EXIT_OK
        with open(out) as f:
            header = f.readline().strip().split(",")
            row = f.readline().strip().split(",")
        assert header[0] == "freq"
        assert len(row) == len(header)
        n = sum(1 for _ in open(out)) - 1
        assert n > 10
        # peak row should sit near the 2 Hz carrier
        _, data = read_csv(out)
        freqs = data[:, 0]
        peak = freqs[np.argmax(data[:, 1:].max(axis=1))]
        assert abs(peak - 2.0) < 0.3


class TestReport:
    def test_prints_summary(self, decomposed, capsys):
        _, out = decomposed
        rc = main(["report", str(out)])
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        assert "modes: 1" in text
        assert "harmonics" in text
        assert "seed: 5" in text

    def test_missing_rundir(self, workdir):
        assert main(["report", str(workdir / "absent")]) == EXIT_INPUT


class TestErrors:
    def test_unreadable_input(self, workdir):
        assert main(["decompose", str(workdir / "nope.csv"),
                     "--fs", "10"]) == EXIT_INPUT

    def test_missing_fs_for_single_column(self, workdir):
        p = workdir / "one.csv"
        p.write_text("x\n1\n2\n3\n4\n5\n6\n7\n8\n")
        assert main(["decompose", str(p), "-o",
                     str(workdir / "e1")]) == EXIT_INPUT

    def test_bad_band_is_config_error(self, workdir, decomposed):
        sig, _ = decomposed
        assert main(["decompose", str(sig), "--band", "5:1",
                     "-o", str(workdir / "e2")]) == EXIT_CONFIG

    def test_non_uniform_time_grid(self, workdir):
        p = workdir / "jitter.csv"
        p.write_text("t,x\n0,1\n0.1,2\n0.3,3\n0.4,4\n")
        with pytest.raises(Exception):
            read_signal(str(p), None)


class TestReadSignal:
    def test_two_column_with_header(self, workdir):
        p = workdir / "two.csv"
        t = np.arange(50) / 10.0
        with open(p, "w") as f:
            f.write("t,x\n")
            for a, b in zip(t, np.sin(t)):
                f.write(f"{a},{b}\n")
        sig = read_signal(str(p), None)
        assert sig.fs == pytest.approx(10.0)
        assert sig.n == 50

    def test_fs_mismatch_rejected(self, workdir):
        p = workdir / "two2.csv"
        t = np.arange(50) / 10.0
        with open(p, "w") as f:
            f.write("t,x\n")
            for a, b in zip(t, np.sin(t)):
                f.write(f"{a},{b}\n")
        from nmd.cli import InputError
        with pytest.raises(InputError):
            read_signal(str(p), 25.0)
