"""End-to-end checks of the command-line harness through its main() entry."""

import io
from contextlib import redirect_stdout

import numpy as np
import pytest

from rbmtomo.cli import EVAL_HEADER, PRUNE_HEADER, RECORD_HEADER, main
from rbmtomo.data import MeasurementDataset, load_dataset, save_dataset
from rbmtomo.manifest import read_manifest
from rbmtomo.rbm import load_checkpoint

FAST_CONFIG = """\
epoch_budget = 2500
check_every = 100
threshold = 0.002
learning_rate = 1.0
n_samples = 20000
n_chains = 50
burn_in = 200
keep_every = 2
finetune_epoch_budget = 400
finetune_check_every = 50
"""

NH_SWEEP_CONFIG = """\
qubit_sizes = 3
field_ratios = 0.0
hidden_start = 1
hidden_step = 1
hidden_max = 2
repeats = 1
pool_size = 1000
""" + FAST_CONFIG

M_SWEEP_CONFIG = """\
qubit_sizes = 3
field_ratios = 0.0
sample_start = 50
sample_step = 50
sample_max = 200
alpha_ratio = 0.5
repeats = 1
epoch_budget = 24000
check_every = 3000
threshold = 0.002
learning_rate = 1.0
n_samples = 100000
n_chains = 50
burn_in = 200
keep_every = 2
"""


def run_cli(argv):
    """Invoke the harness in-process, returning (exit code, stdout text)."""
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main([str(a) for a in argv])
    return code, buffer.getvalue()


@pytest.fixture(scope="module")
def ferro_run(tmp_path_factory):
    """A gen-data + train chain at N=3, h/J=0 shared by the report tests."""
    base = tmp_path_factory.mktemp("cli")
    config = base / "fast.cfg"
    config.write_text(FAST_CONFIG)
    data_dir, train_dir = base / "data", base / "train"
    code, gen_stdout = run_cli([
        "gen-data", "--n-qubits", 3, "--shots", 1000, "--field-ratio", 0,
        "--seed", 3, "--config", config, "--out-dir", data_dir,
    ])
    assert code == 0
    code, train_stdout = run_cli([
        "train", "--data", data_dir / "dataset.txt", "--hidden", 2,
        "--field-ratio", 0, "--seed", 3, "--config", config,
        "--out-dir", train_dir,
    ])
    assert code == 0
    return {
        "config": config,
        "data_dir": data_dir,
        "dataset": data_dir / "dataset.txt",
        "train_dir": train_dir,
        "checkpoint": train_dir / "checkpoint.txt",
        "gen_stdout": gen_stdout,
        "train_stdout": train_stdout,
    }


class TestGenData:
    def test_writes_dataset_energies_and_manifest(self, ferro_run):
        ds = load_dataset(ferro_run["dataset"])
        assert ds.n_qubits == 3
        assert ds.n_shots == 1000

        header, row = (
            (ferro_run["data_dir"] / "energies.csv").read_text().splitlines()
        )
        assert header == "N,J,h,energy"
        fields = row.split(",")
        assert fields[:3] == ["3", "1", "0"]
        assert float(fields[3]) == pytest.approx(-2.0, abs=1e-12)

        manifest = read_manifest(ferro_run["data_dir"] / "manifest.txt")
        assert manifest["command"] == "gen-data"
        assert set(manifest["outputs"]) == {"dataset.txt", "energies.csv"}
        assert ("shots", "1000") in manifest["args"].items()

        assert "wrote 1000 shots at N=3" in ferro_run["gen_stdout"]
        assert "exact ground energy: -2.0000000000" in ferro_run["gen_stdout"]

    def test_invalid_size_exits_two(self, tmp_path):
        code, _ = run_cli([
            "gen-data", "--n-qubits", 0, "--shots", 10, "--out-dir", tmp_path,
        ])
        assert code == 2


class TestTrain:
    def test_converges_and_saves_checkpoint(self, ferro_run):
        assert "converged after" in ferro_run["train_stdout"]

        params, mask = load_checkpoint(ferro_run["checkpoint"])
        assert (params.n_visible, params.n_hidden) == (3, 2)
        assert mask is None

        lines = (ferro_run["train_dir"] / "evals.csv").read_text().splitlines()
        assert lines[0] == EVAL_HEADER
        assert len(lines) >= 2
        assert lines[-1].split(",")[-2] == "true"  # last check met the criterion

        manifest = read_manifest(ferro_run["train_dir"] / "manifest.txt")
        assert set(manifest["outputs"]) == {"checkpoint.txt", "evals.csv"}

    def test_budget_exhaustion_exits_three(self, tmp_path, ferro_run):
        config = tmp_path / "hopeless.cfg"
        config.write_text(
            "epoch_budget = 100\ncheck_every = 100\nthreshold = 1e-9\n"
            "learning_rate = 1.0\nn_samples = 2000\nn_chains = 20\n"
            "burn_in = 50\nkeep_every = 2\n"
        )
        code, stdout = run_cli([
            "train", "--data", ferro_run["dataset"], "--hidden", 1,
            "--field-ratio", 0, "--seed", 3, "--config", config,
            "--out-dir", tmp_path,
        ])
        assert code == 3
        assert "did not converge" in stdout
        # the partial outputs and the manifest survive the failure
        assert (tmp_path / "checkpoint.txt").exists()
        assert (tmp_path / "evals.csv").exists()
        assert (tmp_path / "manifest.txt").exists()

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_run_exits_four(self, tmp_path):
        shots = np.zeros((200, 3), dtype=np.uint8)
        save_dataset(MeasurementDataset(3, shots, 0), tmp_path / "flat.txt")
        config = tmp_path / "diverge.cfg"
        config.write_text(
            "epoch_budget = 5\ncheck_every = 5\nbatch_size = 5\n"
            "learning_rate = 1e307\nmomentum = 0.99\nn_samples = 2000\n"
        )
        code, _ = run_cli([
            "train", "--data", tmp_path / "flat.txt", "--hidden", 1,
            "--field-ratio", 0, "--seed", 3, "--config", config,
            "--out-dir", tmp_path,
        ])
        assert code == 4

    def test_missing_data_file_exits_four(self, tmp_path, ferro_run):
        code, _ = run_cli([
            "train", "--data", tmp_path / "absent.txt", "--hidden", 1,
            "--config", ferro_run["config"], "--out-dir", tmp_path,
        ])
        assert code == 4
        manifest = read_manifest(tmp_path / "manifest.txt")
        assert manifest["outputs"] == {}

    def test_missing_required_argument_exits_two(self, tmp_path):
        code, _ = run_cli(["train", "--hidden", 2, "--out-dir", tmp_path])
        assert code == 2


class TestEstimate:
    def test_reports_criterion_on_checkpoint(self, tmp_path, ferro_run):
        code, stdout = run_cli([
            "estimate", "--checkpoint", ferro_run["checkpoint"],
            "--field-ratio", 0, "--seed", 3,
            "--config", ferro_run["config"], "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "converged: True" in stdout
        lines = (tmp_path / "evals.csv").read_text().splitlines()
        assert lines[0] == EVAL_HEADER
        assert len(lines) == 2

    def test_exits_zero_even_when_criterion_fails(self, tmp_path, ferro_run):
        # the model was trained at h/J = 0, so judging it against the
        # h/J = 1 target energy must fail the criterion -- but estimate
        # is a report, not a gate, and still exits cleanly
        code, stdout = run_cli([
            "estimate", "--checkpoint", ferro_run["checkpoint"],
            "--field-ratio", 1.0, "--seed", 3,
            "--config", ferro_run["config"], "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "converged: False" in stdout


class TestPrune:
    def test_reports_iterations_and_masked_checkpoint(self, tmp_path, ferro_run):
        code, stdout = run_cli([
            "prune", "--checkpoint", ferro_run["checkpoint"],
            "--data", ferro_run["dataset"], "--field-ratio", 0, "--seed", 3,
            "--config", ferro_run["config"], "--out-dir", tmp_path,
        ])
        assert code == 0
        assert stdout.startswith("kept ")

        lines = (tmp_path / "prune.csv").read_text().splitlines()
        assert lines[0] == PRUNE_HEADER
        assert len(lines) >= 2

        params, mask = load_checkpoint(tmp_path / "pruned_checkpoint.txt")
        assert (params.n_visible, params.n_hidden) == (3, 2)
        assert mask is not None
        assert set(np.unique(mask)) <= {0, 1}
        assert np.all(params.weights[mask == 0] == 0.0)
        assert (tmp_path / "prune_history.png").exists()


class TestSpectrum:
    def test_reports_sorted_magnitudes(self, tmp_path, ferro_run):
        code, stdout = run_cli([
            "spectrum", "--checkpoint", ferro_run["checkpoint"],
            "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "% of total magnitude" in stdout
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "rank,magnitude"
        mags = [float(line.split(",")[1]) for line in lines[1:]]
        assert len(mags) == 6
        assert mags == sorted(mags, reverse=True)
        assert (tmp_path / "weight_spectrum.png").exists()

    def test_no_figures_skips_png(self, tmp_path, ferro_run):
        code, _ = run_cli([
            "spectrum", "--checkpoint", ferro_run["checkpoint"],
            "--out-dir", tmp_path, "--no-figures",
        ])
        assert code == 0
        assert not (tmp_path / "weight_spectrum.png").exists()
        manifest = read_manifest(tmp_path / "manifest.txt")
        assert set(manifest["outputs"]) == {"spectrum.csv"}


class TestSymmetry:
    def test_reports_bias_ratios_and_flip_deviation(self, tmp_path, ferro_run):
        code, stdout = run_cli([
            "symmetry", "--checkpoint", ferro_run["checkpoint"],
            "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "max |p(v) - p(v-bar)|" in stdout
        rows = (tmp_path / "symmetry.csv").read_text().splitlines()[1:]
        kinds = [row.split(",")[0] for row in rows]
        assert kinds.count("alpha") == 3
        assert kinds.count("beta") == 2
        assert kinds.count("z2_deviation") == 1
        assert (tmp_path / "bias_ratios.png").exists()


class TestSweepNh:
    def test_finds_minimal_hidden_units(self, tmp_path):
        config = tmp_path / "nh.cfg"
        config.write_text(NH_SWEEP_CONFIG)
        code, stdout = run_cli([
            "sweep-nh", "--config", config, "--seed", 11, "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "minimal hidden units: 1" in stdout

        minima = (tmp_path / "nh_minima.csv").read_text().splitlines()
        assert minima == ["N,h_over_J,minimal_N_hidden", "3,0,1"]
        records = (tmp_path / "nh_records.csv").read_text().splitlines()
        assert records[0] == RECORD_HEADER
        assert (tmp_path / "nh_evals.csv").exists()
        assert (tmp_path / "model_N3_r0.txt").exists()
        assert (tmp_path / "minimal_hidden_units.png").exists()
        # a single system size cannot support a scaling fit
        assert not (tmp_path / "nh_fit.csv").exists()

    def test_exhausted_grid_exits_three(self, tmp_path):
        config = tmp_path / "nh.cfg"
        config.write_text(
            "qubit_sizes = 3\nfield_ratios = 0.0\nhidden_start = 1\n"
            "hidden_max = 1\nrepeats = 1\npool_size = 200\n"
            "epoch_budget = 100\ncheck_every = 100\nthreshold = 1e-9\n"
            "n_samples = 2000\nn_chains = 20\nburn_in = 50\nkeep_every = 2\n"
        )
        code, stdout = run_cli([
            "sweep-nh", "--config", config, "--seed", 11, "--out-dir", tmp_path,
        ])
        assert code == 3
        assert "grid exhausted" in stdout
        minima = (tmp_path / "nh_minima.csv").read_text().splitlines()
        assert minima[1] == "3,0,nan"
        assert list(tmp_path.glob("model_*")) == []


class TestSweepM:
    def test_finds_minimal_sample_size(self, tmp_path):
        config = tmp_path / "m.cfg"
        config.write_text(M_SWEEP_CONFIG)
        code, stdout = run_cli([
            "sweep-m", "--config", config, "--seed", 13, "--out-dir", tmp_path,
        ])
        assert code == 0
        assert "minimal training samples: 50" in stdout
        minima = (tmp_path / "m_minima.csv").read_text().splitlines()
        assert minima == ["N,h_over_J,minimal_M", "3,0,50"]
        assert (tmp_path / "m_records.csv").exists()
        assert (tmp_path / "sample_complexity.png").exists()


class TestFit:
    def test_half_slope_line(self, tmp_path):
        table = tmp_path / "minima.csv"
        table.write_text("N,h_over_J,minimal_N_hidden\n6,1,3\n8,1,4\n10,1,nan\n")
        code, stdout = run_cli(["fit", "--input", table, "--out-dir", tmp_path])
        assert code == 0
        assert "slope +0.5000" in stdout

        header, row = (tmp_path / "fit.csv").read_text().splitlines()
        assert header == "h_over_J,slope,intercept,residual_norm"
        _, slope, intercept, _ = row.split(",")
        assert float(slope) == pytest.approx(0.5, abs=1e-12)
        assert float(intercept) == pytest.approx(0.0, abs=1e-12)
        assert (tmp_path / "scaling_fit.png").exists()

    def test_single_point_rejected(self, tmp_path):
        table = tmp_path / "minima.csv"
        table.write_text("N,h_over_J,minimal_N_hidden\n6,1,3\n")
        code, _ = run_cli(["fit", "--input", table, "--out-dir", tmp_path])
        assert code == 2


class TestManifestReruns:
    def test_gen_data_regenerates_byte_identical(self, tmp_path, ferro_run):
        code, _ = run_cli([
            "gen-data", "--from-manifest", ferro_run["data_dir"] / "manifest.txt",
            "--out-dir", tmp_path,
        ])
        assert code == 0
        for name in ("dataset.txt", "energies.csv"):
            assert (tmp_path / name).read_bytes() == (
                ferro_run["data_dir"] / name
            ).read_bytes()
        first = read_manifest(ferro_run["data_dir"] / "manifest.txt")
        second = read_manifest(tmp_path / "manifest.txt")
        assert first["outputs"] == second["outputs"]

    def test_estimate_regenerates_byte_identical(self, tmp_path, ferro_run):
        first, second = tmp_path / "a", tmp_path / "b"
        code, _ = run_cli([
            "estimate", "--checkpoint", ferro_run["checkpoint"],
            "--field-ratio", 0, "--seed", 5,
            "--config", ferro_run["config"], "--out-dir", first,
        ])
        assert code == 0
        code, _ = run_cli([
            "estimate", "--from-manifest", first / "manifest.txt",
            "--out-dir", second,
        ])
        assert code == 0
        assert (first / "evals.csv").read_bytes() == (second / "evals.csv").read_bytes()

    def test_explicit_flag_overrides_manifest(self, tmp_path, ferro_run):
        code, _ = run_cli([
            "gen-data", "--from-manifest", ferro_run["data_dir"] / "manifest.txt",
            "--shots", 120, "--out-dir", tmp_path,
        ])
        assert code == 0
        assert load_dataset(tmp_path / "dataset.txt").n_shots == 120
        manifest = read_manifest(tmp_path / "manifest.txt")
        assert manifest["args"]["shots"] == "120"

    def test_seed_flag_overrides_config_file(self, tmp_path):
        config = tmp_path / "seeded.cfg"
        config.write_text("seed = 1\n")
        code, _ = run_cli([
            "gen-data", "--n-qubits", 3, "--shots", 10, "--seed", 7,
            "--config", config, "--out-dir", tmp_path,
        ])
        assert code == 0
        manifest = read_manifest(tmp_path / "manifest.txt")
        assert manifest["seed"] == "7"
        assert manifest["config"]["seed"] == "7"


class TestConfigErrors:
    def test_unknown_config_key_exits_two(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("bogus = 1\n")
        code, _ = run_cli([
            "gen-data", "--n-qubits", 3, "--shots", 10,
            "--config", config, "--out-dir", tmp_path,
        ])
        assert code == 2
