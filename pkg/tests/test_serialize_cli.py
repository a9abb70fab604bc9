from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from spectral_rec import Q
from spectral_rec.cli import main
from spectral_rec.engine import (
    CurveConfig,
    config_hash,
    load_config,
    run_compute,
    run_verify,
    write_outputs,
)
from spectral_rec.serialize import (
    correlators_document,
    dumps_canonical,
    free_energies_document,
    load_correlators,
    load_free_energies,
)

AIRY_TOML = """
[curve]
name = "airy"
x = "z^2"
y = "z"
mode = "exact"

[compute]
g_max = 2
n_max = 2
wkb_order = 4
seed = 7
"""

CURVE_B_TOML = """
[curve]
name = "curve-b"
x = "1/(1 - z^2)"
y = "z/(1 - z^2)"
mode = "exact"

[compute]
g_max = 1
n_max = 2
wkb_order = 3
seed = 3
"""


@pytest.fixture()
def airy_cfg(tmp_path):
    path = tmp_path / "airy.toml"
    path.write_text(AIRY_TOML)
    return load_config(path)


class TestConfig:
    def test_load(self, airy_cfg):
        assert airy_cfg.name == "airy"
        assert airy_cfg.g_max == 2 and airy_cfg.n_max == 2
        assert airy_cfg.level_max() == 4
        assert airy_cfg.effective_series_order() == 4 * 2 + 2 * 2 + 8

    def test_hash_stability(self, airy_cfg):
        assert config_hash(airy_cfg) == config_hash(airy_cfg)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[curve]\nname='x'\n")
        from spectral_rec.errors import MalformedInputError

        with pytest.raises(MalformedInputError):
            load_config(path)


class TestJson:
    def test_w11_entry_schema(self, airy_cfg):
        result = run_compute(airy_cfg)
        doc = correlators_document(result.correlators, result.meta())
        entry = next(c for c in doc["correlators"] if (c["g"], c["n"]) == (1, 1))
        assert entry == {
            "g": 1,
            "n": 1,
            "terms": [{"slots": [{"point": "0", "order": 4}], "coeff": "-1/16"}],
        }

    def test_round_trip(self, airy_cfg):
        result = run_compute(airy_cfg)
        wdoc = json.loads(dumps_canonical(correlators_document(result.correlators, result.meta())))
        fdoc = json.loads(dumps_canonical(free_energies_document(result.free_energies, result.meta())))
        table = load_correlators(wdoc, result.curve)
        ftable = load_free_energies(fdoc, result.curve)
        assert table.entries.keys() == result.correlators.entries.keys()
        for gn in table.entries:
            assert table.w(*gn).terms == result.correlators.w(*gn).terms
            assert ftable.f(*gn).terms == result.free_energies.f(*gn).terms

    def test_wkb_term_entry(self, airy_cfg, tmp_path):
        result = run_compute(airy_cfg)
        paths = write_outputs(result, tmp_path / "out")
        doc = json.loads(Path(paths["wkb"]).read_bytes())
        first = doc["terms"][0]
        assert first["m"] == 2
        assert first["poles"] == [{"point": "0", "order": 3}]
        assert first["rational"] == "(5/48)/(z^3)"
        assert doc["potential"] == "-x"
        assert doc["verified_through"] == 4

    def test_empty_tensor_serializes_with_empty_terms(self):
        from spectral_rec.recursion import Correlator
        from spectral_rec.serialize import correlator_to_obj

        assert correlator_to_obj(Correlator(1, 1, {})) == {"g": 1, "n": 1, "terms": []}

    def test_infinity_serialization(self, tmp_path):
        path = tmp_path / "b.toml"
        path.write_text(CURVE_B_TOML)
        result = run_compute(load_config(path))
        doc = correlators_document(result.correlators, result.meta())
        entry = next(c for c in doc["correlators"] if (c["g"], c["n"]) == (1, 1))
        points = {s["point"] for t in entry["terms"] for s in t["slots"]}
        assert points == {"0", "inf"}


class TestCli:
    def run(self, *args, env=None):
        cmd = [sys.executable, "-m", "spectral_rec.cli", *args]
        full_env = dict(os.environ)
        if env:
            full_env.update(env)
        return subprocess.run(cmd, capture_output=True, text=True, env=full_env)

    def test_compute_and_verify(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        out = tmp_path / "out"
        r = self.run("compute", str(cfg), "--out", str(out))
        assert r.returncode == 0, r.stderr
        assert (out / "w.json").exists() and (out / "wkb.json").exists()
        r2 = self.run("verify", str(cfg), "--suite", "all")
        assert r2.returncode == 0, r2.stdout + r2.stderr
        assert "verification: pass" in r2.stdout

    def test_byte_identical_outputs(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        r1 = self.run("compute", str(cfg), "--out", str(tmp_path / "o1"))
        r2 = self.run(
            "compute", str(cfg), "--out", str(tmp_path / "o2"),
            env={"SPECTRAL_REC_THREADS": "8"},
        )
        assert r1.returncode == 0 and r2.returncode == 0
        for name in ("w.json", "f.json", "wkb.json"):
            b1 = (tmp_path / "o1" / name).read_bytes()
            b2 = (tmp_path / "o2" / name).read_bytes()
            assert b1 == b2

    def test_wkb_suite_uses_cache(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        out = tmp_path / "out"
        assert self.run("compute", str(cfg), "--out", str(out)).returncode == 0
        r = self.run("verify", str(cfg), "--suite", "wkb", "--out", str(out))
        assert r.returncode == 0
        assert "reusing cached tables" in r.stdout

    def test_wkb_suite_rejects_stale_cache(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        out = tmp_path / "out"
        assert self.run("compute", str(cfg), "--out", str(out)).returncode == 0
        # corrupt the hash
        doc = json.loads((out / "w.json").read_bytes())
        doc["meta"]["config_hash"] = "0" * 16
        (out / "w.json").write_text(json.dumps(doc))
        r = self.run("verify", str(cfg), "--suite", "wkb", "--out", str(out))
        assert r.returncode == 0
        assert "reusing cached tables" not in r.stdout

    def test_invalid_curve_exit_code(self, tmp_path):
        cfg = tmp_path / "bad.toml"
        cfg.write_text(
            """
[curve]
name = "irr"
x = "z + 2/z"
y = "z - 2/z"
"""
        )
        r = self.run("compute", str(cfg), "--out", str(tmp_path / "o"))
        assert r.returncode == 2
        assert "irrational" in r.stderr

    def test_syntax_error_exit_code(self, tmp_path):
        cfg = tmp_path / "syn.toml"
        cfg.write_text('[curve]\nname = "s"\nx = "1/(1-z^2"\ny = "z"\n')
        r = self.run("compute", str(cfg), "--out", str(tmp_path / "o"))
        assert r.returncode == 2
        assert "offset 8" in r.stderr

    def test_corrupted_table_file_fails_verification(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        out = tmp_path / "out"
        assert self.run("compute", str(cfg), "--out", str(out)).returncode == 0
        # corrupt one coefficient but keep the hash valid, so the cached
        # tables are loaded and the invariants must catch the damage
        doc = json.loads((out / "w.json").read_bytes())
        entry = next(c for c in doc["correlators"] if (c["g"], c["n"]) == (1, 1))
        entry["terms"][0]["coeff"] = "-1/17"
        (out / "w.json").write_text(json.dumps(doc))
        r = self.run("verify", str(cfg), "--suite", "wkb", "--out", str(out))
        assert r.returncode == 1
        assert "FAIL" in r.stdout

    def test_h_model_flag(self, tmp_path):
        cfg = tmp_path / "hm.toml"
        cfg.write_text(
            """
[curve]
name = "h-model"
x = "z^2"
y = "z"

[compute]
g_max = 1
n_max = 1
wkb_order = 2
"""
        )
        out = tmp_path / "out"
        r = self.run("compute", str(cfg), "--out", str(out), "--h-model")
        assert r.returncode == 0
        doc = json.loads((out / "w.json").read_bytes())
        entry = next(c for c in doc["correlators"] if (c["g"], c["n"]) == (1, 1))
        assert entry["terms"][0]["coeff"] == "-1/8"

    def test_threads_env_validation(self, tmp_path):
        cfg = tmp_path / "airy.toml"
        cfg.write_text(AIRY_TOML)
        r = self.run(
            "compute", str(cfg), "--out", str(tmp_path / "o"),
            env={"SPECTRAL_REC_THREADS": "zebra"},
        )
        assert r.returncode == 2
