import json
from pathlib import Path

import pytest

from resamplerec.cli import main
from resamplerec.config import MultiplierGrid, RunConfig, config_from_dict, load_config


def tiny_config(tmp_path: Path, **extra) -> Path:
    doc = {
        "seed": 5,
        "out": str(tmp_path / "out"),
        "learner": {"kind": "decision_tree", "max_depth": 3, "min_leaf": 2},
        "methods": ["ros", "rus"],
        "multipliers": {"min": 1.5, "max": 2.5, "step": 0.5},
        "k": 4,
        "k_prime": 2,
        "count": 6,
        "mixture": {"dim_range": [3, 4], "size_range": [60, 90],
                    "minor_fraction_range": [0.15, 0.3]},
        "presets": {"a1": "rs1-dtree", "a2": "rs2-dtree"},
    }
    doc.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def read_tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


class TestConfig:
    def test_defaults_are_paper_constants(self):
        cfg = RunConfig()
        assert cfg.k == 20 and cfg.k_prime == 10
        assert cfg.alpha == 0.05 and cfg.epsilon == 0.75
        assert len(cfg.multiplier_values()) == 36
        assert cfg.methods == ("ros", "rus", "smote1", "smote3", "smote5", "smote7")

    def test_paper_scale_count_supported(self):
        cfg = config_from_dict({"count": 1000})
        assert cfg.count == 1000

    def test_overrides_beat_file(self, tmp_path):
        path = tiny_config(tmp_path)
        cfg = load_config(path, {"seed": 99, "workers": 3})
        assert cfg.seed == 99 and cfg.workers == 3

    def test_mixture_seed_follows_master(self, tmp_path):
        path = tiny_config(tmp_path)
        cfg = load_config(path, {"seed": 42})
        assert cfg.mixture.seed == 42

    def test_invalid_grid_rejected(self):
        with pytest.raises(ValueError):
            MultiplierGrid(min=0.5, max=2.0, step=0.25)

    def test_preset_resolution(self, tmp_path):
        cfg = load_config(tiny_config(tmp_path))
        assert cfg.preset_for("a1") == "rs1-dtree"
        cfg2 = config_from_dict({"learner": "knn"})
        assert cfg2.preset_for("a2") == "rs2-knn"


class TestPipelineCommands:
    def test_full_pipeline(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "out"
        for command in ("gen", "grid", "meta", "train", "assess", "report"):
            assert main([command, "--config", str(cfg_path)]) == 0, command
        captured = capsys.readouterr()
        assert "cache hits" in captured.out
        assert "mean RA" in captured.out
        assert (out / "datasets" / "manifest.json").exists()
        assert (out / "meta.csv").exists()
        assert (out / "models" / "a1.json").exists()
        assert (out / "models" / "a2.json").exists()
        assert (out / "report" / "summary.json").exists()

        # recommend on one of the generated datasets
        data = next((out / "datasets").glob("synth-*.csv"))
        assert main(["recommend", "--config", str(cfg_path),
                     "--model", str(out / "models" / "a1.json"),
                     "--data", str(data)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        method, multiplier = lines[0].split(",")
        assert method in ("none", "ros", "rus")
        float(multiplier)
        detail = json.loads(lines[1])
        assert "p_hat" in detail["details"]

    def test_gen_deterministic(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "out"
        assert main(["gen", "--config", str(cfg_path)]) == 0
        first = read_tree(out)
        assert main(["gen", "--config", str(cfg_path)]) == 0
        assert read_tree(out) == first

    def test_grid_second_run_fully_cached(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["gen", "--config", str(cfg_path)]) == 0
        assert main(["grid", "--config", str(cfg_path)]) == 0
        capsys.readouterr()
        assert main(["grid", "--config", str(cfg_path)]) == 0
        assert "(100.0% cache hits)" in capsys.readouterr().out

    def test_cache_mismatch_refused(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["gen", "--config", str(cfg_path)]) == 0
        assert main(["grid", "--config", str(cfg_path)]) == 0
        data = next((tmp_path / "out" / "datasets").glob("synth-*.csv"))
        data.write_text(data.read_text() + "\n")
        capsys.readouterr()
        assert main(["grid", "--config", str(cfg_path)]) == 1
        err = capsys.readouterr().err.strip()
        assert err.count("\n") == 0  # single line
        assert err.startswith("error E_CACHE_MISMATCH:")

    def test_missing_artifact_error(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["assess", "--config", str(cfg_path)]) == 1
        err = capsys.readouterr().err.strip()
        assert err.startswith("error E_MISSING_INPUT:")

    def test_recommend_missing_model(self, tmp_path, capsys):
        cfg_path = tiny_config(tmp_path)
        assert main(["recommend", "--config", str(cfg_path),
                     "--model", str(tmp_path / "nope.json"),
                     "--data", str(tmp_path / "nope.csv")]) == 1
        assert capsys.readouterr().err.startswith("error E_MISSING_INPUT:")

    def test_count_override(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        assert main(["gen", "--config", str(cfg_path), "--count", "3"]) == 0
        manifest = json.loads((tmp_path / "out" / "datasets" / "manifest.json").read_text())
        assert len(manifest["datasets"]) == 3

    def test_csv_dir_source(self, tmp_path):
        from resamplerec.config import load_config
        from resamplerec.data import MixtureConfig, generate_mixture, write_csv
        from resamplerec.pipeline import load_bank

        csv_dir = tmp_path / "external"
        for i in range(2):
            s = generate_mixture(MixtureConfig(dim_range=(3, 3), size_range=(40, 60),
                                               minor_fraction_range=(0.2, 0.3), seed=9), i)
            write_csv(s, csv_dir / f"{s.id}.csv")
        cfg_path = tiny_config(tmp_path, csv_dir=str(csv_dir))
        bank = load_bank(load_config(cfg_path))
        assert [s.id for s in bank] == ["synth-9-0", "synth-9-1"]
