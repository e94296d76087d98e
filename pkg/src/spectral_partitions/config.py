from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml


DEFAULT_PROFILE_PATH = Path("profiles/tolerances.yaml")
DEFAULT_SUITE_COUNT = 20


@dataclass(frozen=True)
class Tolerances:
    eq_tol: float = 1e-10
    zero_tol: float = 1e-9
    gap_tol: float = 1e-8
    hess_tol: float = 1e-6
    fd_rel_tol: float = 1e-5


@dataclass(frozen=True)
class Caps:
    vertex_cap: int = 12
    subset_cap: int = 20


@dataclass(frozen=True)
class SolverSettings:
    newton_max_iter: int = 100
    multistarts: int = 16
    hessian_step: float = 1e-4


@dataclass(frozen=True)
class Profile:
    tolerances: Tolerances = field(default_factory=Tolerances)
    caps: Caps = field(default_factory=Caps)
    solver: SolverSettings = field(default_factory=SolverSettings)


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    count: int
    profile: Profile
    jitter: float | None = None
    out: Path | None = None
    dot: Path | None = None


def _env_int(name: str, default: int) -> int:
    raw = (os.getenv(name) or "").strip()
    if not raw:
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError(f"{name} must be > 0")
    return value


def _env_float(name: str, default: float) -> float:
    raw = (os.getenv(name) or "").strip()
    if not raw:
        return default
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{name} must be > 0")
    return value


def load_seed(default: int = 0) -> int:
    raw = (os.getenv("SPL_SEED") or "").strip()
    if not raw:
        return default
    value = int(raw, 0)
    if value < 0 or value >= 1 << 64:
        raise ValueError("SPL_SEED must be a 64-bit unsigned integer")
    return value


def _positive(section: str, key: str, value: object, kind: type) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"Profile file invalid {section}.{key}")
    converted = kind(value)
    if not converted > 0:
        raise ValueError(f"Profile file {section}.{key} must be > 0")
    return converted


def load_profile(path: Path | None = None, name: str = "default") -> Profile:
    """Read a versioned profile; without an explicit path a missing default file means built-in values."""
    if path is None:
        env_path = (os.getenv("SPL_PROFILE_PATH") or "").strip()
        if env_path:
            path = Path(env_path)
        elif DEFAULT_PROFILE_PATH.exists():
            path = DEFAULT_PROFILE_PATH
        else:
            return Profile()

    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("Profile file must be a YAML mapping")
    profiles_root = data.get("profiles")
    if not isinstance(profiles_root, dict):
        raise ValueError("Profile file missing top-level 'profiles' mapping")
    section_obj = profiles_root.get(name)
    if not isinstance(section_obj, dict):
        raise ValueError(f"Profile file missing profiles.{name}")

    current = section_obj.get("current", "v1")
    versions = section_obj.get("versions")
    if not isinstance(versions, dict):
        raise ValueError(f"Profile file missing profiles.{name}.versions")
    if current not in versions:
        raise ValueError(f"Profile file missing profiles.{name}.versions.{current}")
    version = versions[current]
    if not isinstance(version, dict):
        raise ValueError(f"Profile file invalid profiles.{name}.versions.{current}")

    prefix = f"profiles.{name}.versions.{current}"

    def _section(key: str) -> dict:
        obj = version.get(key)
        if not isinstance(obj, dict):
            raise ValueError(f"Profile file missing {prefix}.{key}")
        return obj

    def _get(section: str, key: str, kind: type) -> float | int:
        obj = _section(section)
        if key not in obj:
            raise ValueError(f"Profile file missing {prefix}.{section}.{key}")
        return _positive(f"{prefix}.{section}", key, obj[key], kind)

    return Profile(
        tolerances=Tolerances(
            eq_tol=_get("tolerances", "eq_tol", float),
            zero_tol=_get("tolerances", "zero_tol", float),
            gap_tol=_get("tolerances", "gap_tol", float),
            hess_tol=_get("tolerances", "hess_tol", float),
            fd_rel_tol=_get("tolerances", "fd_rel_tol", float),
        ),
        caps=Caps(
            vertex_cap=_get("caps", "vertex_cap", int),
            subset_cap=_get("caps", "subset_cap", int),
        ),
        solver=SolverSettings(
            newton_max_iter=_get("solver", "newton_max_iter", int),
            multistarts=_get("solver", "multistarts", int),
            hessian_step=_get("solver", "hessian_step", float),
        ),
    )


def apply_env_overrides(profile: Profile) -> Profile:
    return Profile(
        tolerances=profile.tolerances,
        caps=Caps(
            vertex_cap=_env_int("SPL_VERTEX_CAP", profile.caps.vertex_cap),
            subset_cap=_env_int("SPL_SUBSET_CAP", profile.caps.subset_cap),
        ),
        solver=replace(
            profile.solver,
            newton_max_iter=_env_int("SPL_NEWTON_MAX_ITER", profile.solver.newton_max_iter),
            multistarts=_env_int("SPL_MULTISTARTS", profile.solver.multistarts),
        ),
    )


def with_overrides(
    profile: Profile,
    *,
    eq_tol: float | None = None,
    zero_tol: float | None = None,
    gap_tol: float | None = None,
    hess_tol: float | None = None,
    vertex_cap: int | None = None,
    subset_cap: int | None = None,
) -> Profile:
    tolerance_flags = {"eq_tol": eq_tol, "zero_tol": zero_tol, "gap_tol": gap_tol, "hess_tol": hess_tol}
    updates = {k: v for k, v in tolerance_flags.items() if v is not None}
    caps = {k: v for k, v in {"vertex_cap": vertex_cap, "subset_cap": subset_cap}.items() if v is not None}
    for key, value in {**updates, **caps}.items():
        if not value > 0:
            raise ValueError(f"{key} must be > 0")
    return Profile(
        tolerances=replace(profile.tolerances, **updates),
        caps=replace(profile.caps, **caps),
        solver=profile.solver,
    )
