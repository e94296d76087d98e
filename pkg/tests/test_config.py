from __future__ import annotations

from pathlib import Path

import pytest

from spectral_partitions.config import (
    Profile,
    apply_env_overrides,
    load_profile,
    load_seed,
    with_overrides,
)


PROFILE_FILE = Path(__file__).resolve().parents[1] / "profiles" / "tolerances.yaml"


def _write(tmp_path: Path, text: str) -> Path:
    target = tmp_path / "profile.yaml"
    target.write_text(text, encoding="utf-8")
    return target


def test_default_profile_matches_the_built_in_values():
    assert load_profile(PROFILE_FILE) == Profile()


def test_relaxed_profile():
    profile = load_profile(PROFILE_FILE, name="relaxed")
    assert profile.tolerances.eq_tol == 1e-9
    assert profile.caps.vertex_cap == 10
    assert profile.solver.multistarts == 24


def test_missing_default_file_falls_back_to_built_in_values(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SPL_PROFILE_PATH", raising=False)
    assert load_profile() == Profile()


def test_profile_path_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SPL_PROFILE_PATH", str(PROFILE_FILE))
    monkeypatch.chdir(tmp_path)
    assert load_profile(name="relaxed").caps.subset_cap == 16


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("- 1\n- 2\n", "YAML mapping"),
        ("other: {}\n", "profiles"),
        ("profiles:\n  default:\n    current: v2\n    versions:\n      v1: {}\n", "versions.v2"),
        ("profiles:\n  default:\n    versions:\n      v1:\n        tolerances: {}\n", "tolerances.eq_tol"),
    ],
)
def test_invalid_profile_files(tmp_path, text, message):
    with pytest.raises(ValueError, match=message):
        load_profile(_write(tmp_path, text))


def test_non_positive_values_are_rejected(tmp_path):
    text = PROFILE_FILE.read_text(encoding="utf-8").replace("multistarts: 16", "multistarts: 0", 1)
    with pytest.raises(ValueError, match="multistarts must be > 0"):
        load_profile(_write(tmp_path, text))


def test_unknown_profile_name():
    with pytest.raises(ValueError, match="profiles.strict"):
        load_profile(PROFILE_FILE, name="strict")


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SPL_MULTISTARTS", "4")
    monkeypatch.setenv("SPL_VERTEX_CAP", "9")
    profile = apply_env_overrides(Profile())
    assert profile.solver.multistarts == 4
    assert profile.caps.vertex_cap == 9
    assert profile.caps.subset_cap == 20
    monkeypatch.setenv("SPL_SUBSET_CAP", "0")
    with pytest.raises(ValueError, match="SPL_SUBSET_CAP must be > 0"):
        apply_env_overrides(Profile())


def test_seed_from_environment(monkeypatch):
    monkeypatch.delenv("SPL_SEED", raising=False)
    assert load_seed() == 0
    monkeypatch.setenv("SPL_SEED", "0x10")
    assert load_seed() == 16
    monkeypatch.setenv("SPL_SEED", str(1 << 64))
    with pytest.raises(ValueError):
        load_seed()


def test_flag_overrides():
    profile = with_overrides(Profile(), eq_tol=1e-6, subset_cap=5)
    assert profile.tolerances.eq_tol == 1e-6
    assert profile.tolerances.zero_tol == Profile().tolerances.zero_tol
    assert profile.caps.subset_cap == 5
    with pytest.raises(ValueError, match="gap_tol must be > 0"):
        with_overrides(Profile(), gap_tol=-1.0)
