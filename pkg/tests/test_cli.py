"""End-to-end tests of the command-line interface."""

import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sparsepc.cli import main
from sparsepc.model_problems import manufacture_signal, write_external_samples
from sparsepc.poly_basis import BasisSpec
from sparsepc.sampler import Strategy, sample

SPEC24 = {"family": "legendre", "dimension": 2, "degree": 4}


def write_config(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def read_manifest(out_dir):
    with open(out_dir / "manifest.json") as fh:
        return json.load(fh)


class TestSampleExport:
    def test_writes_samples_and_manifest(self, tmp_path):
        cfg = write_config(
            tmp_path, "cfg.json", {"spec": SPEC24, "strategy": "standard", "n": 16}
        )
        out = tmp_path / "out"
        assert main(["sample-export", str(cfg), "--out-dir", str(out)]) == 0
        manifest = read_manifest(out)
        assert manifest["command"] == "sample-export"
        assert manifest["outputs"] == ["samples.csv"]
        assert manifest["summary"] == {"n": 16, "strategy": "standard"}
        assert manifest["version"]
        assert (out / "samples.csv").exists()

    def test_manifest_records_config_hash(self, tmp_path):
        cfg = write_config(
            tmp_path, "cfg.json", {"spec": SPEC24, "strategy": "standard", "n": 4}
        )
        out = tmp_path / "out"
        main(["sample-export", str(cfg), "--out-dir", str(out)])
        digest = hashlib.sha256(cfg.read_bytes()).hexdigest()
        assert read_manifest(out)["config_sha256"] == digest

    def test_seed_from_config_and_override(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"spec": SPEC24, "strategy": "standard", "n": 8, "seed": 7},
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["sample-export", str(cfg), "--out-dir", str(out1)])
        main(["sample-export", str(cfg), "--out-dir", str(out2), "--seed", "99"])
        assert read_manifest(out1)["seed"] == 7
        assert read_manifest(out2)["seed"] == 99
        assert (out1 / "samples.csv").read_bytes() != (out2 / "samples.csv").read_bytes()

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"spec": SPEC24, "strategy": "asymptotic", "n": 12, "seed": 3},
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["sample-export", str(cfg), "--out-dir", str(out1)])
        main(["sample-export", str(cfg), "--out-dir", str(out2)])
        for name in ("samples.csv", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_chain_metadata_for_coherence_optimal(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": SPEC24,
                "strategy": "coherence_optimal",
                "n": 8,
                "mcmc": {"burn_in": 100, "thinning": 5},
            },
        )
        out = tmp_path / "out"
        assert main(["sample-export", str(cfg), "--out-dir", str(out)]) == 0
        summary = read_manifest(out)["summary"]
        assert 0.0 < summary["acceptance_rate"] <= 1.0
        assert summary["chain_steps"] >= 100 + 8 * 5

    def test_module_entry_point(self, tmp_path):
        cfg = write_config(
            tmp_path, "cfg.json", {"spec": SPEC24, "strategy": "standard", "n": 4}
        )
        out = tmp_path / "out"
        proc = subprocess.run(
            [sys.executable, "-m", "sparsepc", "sample-export", str(cfg),
             "--out-dir", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert (out / "samples.csv").exists()


class TestCoherenceCommand:
    def test_table_artifact(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "specs": [{"family": "legendre", "dimension": 1, "degree": 2}],
                "strategies": ["standard", "asymptotic"],
                "n_draws": 1500,
            },
        )
        out = tmp_path / "out"
        assert main(["coherence", str(cfg), "--out-dir", str(out)]) == 0
        lines = (out / "coherence.csv").read_text().splitlines()
        assert len(lines) == 1 + 2
        assert read_manifest(out)["summary"] == {"rows": 2}


class TestPhaseDiagramCommand:
    def test_one_csv_per_strategy(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": SPEC24,
                "strategies": ["standard", "asymptotic"],
                "n_steps": 2,
                "s_steps": 2,
                "replications": 2,
                "seed": 1,
            },
        )
        out = tmp_path / "out"
        assert main(["phase-diagram", str(cfg), "--out-dir", str(out)]) == 0
        manifest = read_manifest(out)
        assert manifest["outputs"] == ["phase_asymptotic.csv", "phase_standard.csv"]
        assert manifest["summary"]["basis_size"] == 15
        assert manifest["summary"]["replications"] == 2
        for name in manifest["outputs"]:
            assert (out / name).exists()


class TestCrossvalCurveCommand:
    def test_manufactured_qoi(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": SPEC24,
                "strategy": "standard",
                "n": 12,
                "qoi": "manufactured",
                "sparsity": 2,
                "signal_seed": 5,
                "seed": 2,
            },
        )
        out = tmp_path / "out"
        assert main(["crossval-curve", str(cfg), "--out-dir", str(out)]) == 0
        lines = (out / "crossval_curve.csv").read_text().splitlines()
        assert len(lines) == 1 + 121
        summary = read_manifest(out)["summary"]
        assert summary["delta_star"] == math.sqrt(2.0) * summary["chosen_delta0"]

    def test_curve_from_sample_file(self, tmp_path):
        spec = BasisSpec("legendre", 2, 4)
        signal = manufacture_signal(spec, 2, seed=5)
        batch = sample(spec, Strategy.STANDARD, 14, seed=8)
        pool_file = tmp_path / "pool.csv"
        write_external_samples(pool_file, batch.points, signal.evaluate(batch.points))
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"spec": SPEC24, "strategy": "standard", "sample_file": str(pool_file)},
        )
        out = tmp_path / "out"
        assert main(["crossval-curve", str(cfg), "--out-dir", str(out)]) == 0
        assert (out / "crossval_curve.csv").exists()

    def test_sample_file_dimension_mismatch(self, tmp_path):
        pool_file = tmp_path / "pool.csv"
        write_external_samples(pool_file, np.zeros((6, 3)), np.zeros(6))
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"spec": SPEC24, "sample_file": str(pool_file)},
        )
        with pytest.raises(ValueError, match="dimension"):
            main(["crossval-curve", str(cfg), "--out-dir", str(tmp_path / "out")])

    def test_unknown_qoi_rejected(self, tmp_path):
        cfg = write_config(
            tmp_path, "cfg.json", {"spec": SPEC24, "n": 12, "qoi": "mystery"}
        )
        with pytest.raises(ValueError, match="unknown qoi"):
            main(["crossval-curve", str(cfg), "--out-dir", str(tmp_path / "out")])


@pytest.fixture()
def pool_file(tmp_path):
    spec = BasisSpec("legendre", 2, 4)
    signal = manufacture_signal(spec, 2, seed=5)
    batch = sample(spec, Strategy.STANDARD, 200, seed=8)
    path = tmp_path / "pool.csv"
    write_external_samples(path, batch.points, signal.evaluate(batch.points))
    return path


class TestRecoverExternalCommand:
    def test_round_trip(self, tmp_path, pool_file):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": SPEC24,
                "sample_file": str(pool_file),
                "strategy": "standard",
                "family": "legendre",
                "n_list": [30],
                "replications": 2,
                "resamples": 50,
                "seed": 4,
            },
        )
        out = tmp_path / "out"
        assert main(["recover-external", str(cfg), "--out-dir", str(out)]) == 0
        manifest = read_manifest(out)
        assert manifest["summary"] == {"failures": 0, "pool_rows": 200}
        lines = (out / "external_recovery.csv").read_text().splitlines()
        assert len(lines) == 1 + 1

    def test_failed_replications_exit_nonzero(self, tmp_path, pool_file):
        # odd N makes every cross-validation replication fail
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": SPEC24,
                "sample_file": str(pool_file),
                "strategy": "standard",
                "n_list": [31],
                "replications": 2,
                "resamples": 50,
            },
        )
        out = tmp_path / "out"
        assert main(["recover-external", str(cfg), "--out-dir", str(out)]) == 1
        assert read_manifest(out)["summary"]["failures"] == 2


class TestSurfaceReactionCommand:
    def test_smoke_run(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "spec": {"family": "hermite", "dimension": 2, "degree": 6},
                "quadrature_levels": [16, 24],
                "n_list": [20],
                "strategies": ["standard"],
                "replications": 2,
                "resamples": 50,
                "solver": {"max_matvec": 1500},
                "seed": 0,
            },
        )
        out = tmp_path / "out"
        assert main(["surface-reaction", str(cfg), "--out-dir", str(out)]) == 0
        manifest = read_manifest(out)
        assert manifest["summary"]["failures"] == 0
        assert manifest["summary"]["reference_n_1d"] == 24
        assert (out / "surface_reaction.csv").exists()
        ref_lines = (out / "reference_coefficients.csv").read_text().splitlines()
        assert len(ref_lines) == 1 + 28  # C(8, 2) basis terms


class TestParser:
    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit):
            main(["made-up-command", "cfg.json"])

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            main([])
