"""Scenario configuration: JSON documents with robot/controller/profile/sim/output blocks.

A config is kept as a plain nested dict until ``resolve`` turns it into the
simulator's dataclasses.  Every field has a default, unknown keys are
rejected, and errors name the offending dotted key.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .control import ControllerConfig, ReferenceProfile, Segment, builtin_profiles
from .errors import ParameterError
from .model import RobotParams
from .sim import SimConfig

OUTPUT_DEFAULTS = {
    "dir": "jumpwheel_out",
    "trajectory_csv": True,
    "metrics_json": True,
    "diagnostics_json": True,
}
SEGMENT_KEYS = ("t_start", "t_end", "kind", "value", "start_value")


@dataclass(frozen=True)
class ScenarioConfig:
    robot: RobotParams
    controller: ControllerConfig
    profile: ReferenceProfile
    sim: SimConfig
    output: dict
    profile_name: str | None = None


def _profile_to_dict(profile: ReferenceProfile) -> list[dict]:
    segs = []
    for s in profile.segments:
        segs.append(
            {
                "t_start": s.t_start,
                "t_end": s.t_end if math.isfinite(s.t_end) else None,
                "kind": s.kind,
                "value": s.value,
                "start_value": s.start_value,
            }
        )
    return segs


def default_config(scenario: str = "vertical") -> dict:
    """Fully populated config dict for a built-in scenario."""
    profiles = builtin_profiles()
    if scenario not in profiles:
        raise ParameterError("scenario", f"unknown scenario {scenario!r}; choose from {sorted(profiles)}")
    robot = asdict(RobotParams())
    robot["I_o"] = None  # thin hoop, m_o * R**2
    return {
        "robot": robot,
        "controller": asdict(ControllerConfig()),
        "profile": {"name": scenario, "segments": _profile_to_dict(profiles[scenario])},
        "sim": asdict(SimConfig()),
        "output": dict(OUTPUT_DEFAULTS),
    }


def _merge(base: dict, update: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        path = f"{prefix}{key}"
        if key not in out:
            raise ParameterError(path, "unknown key")
        if isinstance(out[key], dict) and key != "profile":
            if not isinstance(value, dict):
                raise ParameterError(path, "expected an object")
            out[key] = _merge(out[key], value, path + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _normalize_profile(block) -> dict:
    if not isinstance(block, dict):
        raise ParameterError("profile", "expected an object")
    unknown = set(block) - {"name", "segments"}
    if unknown:
        raise ParameterError(f"profile.{sorted(unknown)[0]}", "unknown key")
    name = block.get("name")
    if "segments" in block:
        return {"name": name, "segments": block["segments"]}
    if name is None:
        raise ParameterError("profile", "needs a 'name' or 'segments'")
    profiles = builtin_profiles()
    if name not in profiles:
        raise ParameterError("profile.name", f"unknown profile {name!r}")
    return {"name": name, "segments": _profile_to_dict(profiles[name])}


def merge_config(base: dict, update: dict) -> dict:
    """Overlay ``update`` onto ``base``; an update's profile block replaces the base one."""
    merged = _merge(base, update)
    if "profile" in update:
        merged["profile"] = _normalize_profile(update["profile"])
    return merged


def load_config(path: str | Path, scenario: str = "vertical") -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParameterError("config", "top level must be an object")
    return merge_config(default_config(scenario), doc)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_path(config: dict, key: str, value) -> dict:
    """Return a copy of ``config`` with the dotted ``key`` set to ``value``.

    List elements are addressed by index, e.g. ``profile.segments.2.value``.
    """
    out = copy.deepcopy(config)
    parts = key.split(".")
    node = out
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        here = ".".join(parts[: i + 1])
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ParameterError(here, "no such list element") from None
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if part not in node:
                raise ParameterError(here, "unknown key")
            if last:
                node[part] = value
            else:
                node = node[part]
        else:
            raise ParameterError(here, "cannot index into a scalar")
    if parts[0] == "profile" and parts[1:2] == ["name"]:
        out["profile"] = _normalize_profile({"name": value})
    return out


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """Apply ``KEY=VALUE`` strings; values are parsed as JSON when possible."""
    for item in overrides:
        if "=" not in item:
            raise ParameterError(item, "override must look like KEY=VALUE")
        key, text = item.split("=", 1)
        config = set_path(config, key.strip(), _parse_value(text))
    return config


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterError(key, f"expected a number, got {value!r}")
    return float(value)


def _build(cls, block: dict, prefix: str, nullable=()):
    kwargs = {}
    for f in fields(cls):
        value = block[f.name]
        key = f"{prefix}.{f.name}"
        if value is None and f.name in nullable:
            kwargs[f.name] = None
        elif f.type in ("bool",):
            if not isinstance(value, bool):
                raise ParameterError(key, f"expected true/false, got {value!r}")
            kwargs[f.name] = value
        elif f.type in ("int",):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ParameterError(key, f"expected an integer, got {value!r}")
            kwargs[f.name] = value
        else:
            kwargs[f.name] = _number(value, key)
    try:
        return cls(**kwargs)
    except ParameterError as exc:
        raise ParameterError(f"{prefix}.{exc.key}", str(exc).split(": ", 1)[1]) from None


def _build_profile(block: dict) -> ReferenceProfile:
    segs = block["segments"]
    if not isinstance(segs, list):
        raise ParameterError("profile.segments", "expected a list")
    out = []
    for i, seg in enumerate(segs):
        key = f"profile.segments.{i}"
        if not isinstance(seg, dict):
            raise ParameterError(key, "expected an object")
        unknown = set(seg) - set(SEGMENT_KEYS)
        if unknown:
            raise ParameterError(f"{key}.{sorted(unknown)[0]}", "unknown key")
        for req in ("t_start", "kind", "value"):
            if req not in seg:
                raise ParameterError(f"{key}.{req}", "missing")
        t_end = seg.get("t_end")
        out.append(
            Segment(
                _number(seg["t_start"], f"{key}.t_start"),
                math.inf if t_end is None else _number(t_end, f"{key}.t_end"),
                str(seg["kind"]),
                _number(seg["value"], f"{key}.value"),
                _number(seg.get("start_value", 0.0), f"{key}.start_value"),
            )
        )
    return ReferenceProfile(out)


def resolve(config: dict) -> ScenarioConfig:
    """Validate a config dict and build the simulator objects."""
    config = merge_config(default_config(), config)
    output = config["output"]
    if not isinstance(output["dir"], str):
        raise ParameterError("output.dir", "expected a path string")
    for flag in ("trajectory_csv", "metrics_json", "diagnostics_json"):
        if not isinstance(output[flag], bool):
            raise ParameterError(f"output.{flag}", "expected true/false")
    return ScenarioConfig(
        robot=_build(RobotParams, config["robot"], "robot", nullable=("I_o",)),
        controller=_build(ControllerConfig, config["controller"], "controller"),
        profile=_build_profile(config["profile"]),
        sim=_build(SimConfig, config["sim"], "sim"),
        output=dict(output),
        profile_name=config["profile"].get("name"),
    )


def effective_config(scenario: ScenarioConfig) -> dict:
    """Config dict that resolves back to ``scenario``."""
    return {
        "robot": asdict(scenario.robot),
        "controller": asdict(scenario.controller),
        "profile": {"name": scenario.profile_name, "segments": _profile_to_dict(scenario.profile)},
        "sim": asdict(scenario.sim),
        "output": dict(scenario.output),
    }
