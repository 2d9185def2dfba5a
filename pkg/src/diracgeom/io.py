"""Config files, run manifests and output writers.

Configs are INI-style key-value files (configparser). Every output file carries the
hash of the run manifest: CSV files as a leading comment line, JSON files as a
"manifest_hash" key, snapshots as an array entry.
"""
import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def tool_version():
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0+local"


def load_config(path):
    """Parse a key-value config file into {section: {key: raw string}}."""
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str          # keys are case sensitive (N, L, R0)
    try:
        cp.read(path)
    except configparser.Error as ex:
        raise ConfigError(f"cannot parse {path}: {ex}") from ex
    return {s: dict(cp.items(s)) for s in cp.sections()}


def parse_value(text):
    """Best-effort typed value: bool, int, float, comma list, else string."""
    t = text.strip()
    low = t.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", ""):
        return None
    if "," in t:
        return [parse_value(p) for p in t.split(",") if p.strip()]
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def typed_section(cfg, name, allowed=None):
    sec = {k: parse_value(v) for k, v in cfg.get(name, {}).items()}
    if allowed is not None:
        bad = sorted(set(sec) - set(allowed))
        if bad:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(bad)}")
    return sec


@dataclass
class RunManifest:
    command: str
    config_path: str = None
    config: dict = field(default_factory=dict)
    seed: int = 0
    tool_version: str = field(default_factory=tool_version)
    tolerances: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    status: str = "ok"
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def hash(self):
        """sha256 over everything that determines the outputs (not paths, status or wall time)."""
        core = {"command": self.command, "config": self.config, "seed": self.seed,
                "tool_version": self.tool_version, "tolerances": self.tolerances}
        return hashlib.sha256(json.dumps(core, sort_keys=True, default=str).encode()).hexdigest()[:16]

    def to_dict(self):
        return {"command": self.command, "config_path": self.config_path, "config": self.config,
                "seed": self.seed, "tool_version": self.tool_version, "tolerances": self.tolerances,
                "outputs": sorted(self.outputs), "status": self.status, "manifest_hash": self.hash(),
                "wall_time": self.wall_time, **self.extra}


class OutputDir:
    """Writes files into one directory and records them on the manifest."""

    def __init__(self, path, manifest: RunManifest):
        self.path = path
        self.manifest = manifest
        os.makedirs(path, exist_ok=True)

    def _register(self, name):
        if name not in self.manifest.outputs:
            self.manifest.outputs.append(name)
        return os.path.join(self.path, name)

    def csv(self, name, header, rows):
        p = self._register(name)
        with open(p, "w", newline="") as fh:
            fh.write(f"# manifest_hash={self.manifest.hash()}\n")
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(v) for v in r) + "\n")
        return p

    def csv_text(self, name, text):
        p = self._register(name)
        with open(p, "w", newline="") as fh:
            fh.write(f"# manifest_hash={self.manifest.hash()}\n")
            fh.write(text)
        return p

    def json(self, name, obj):
        p = self._register(name)
        data = dict(obj)
        data["manifest_hash"] = self.manifest.hash()
        with open(p, "w") as fh:
            json.dump(_clean(data), fh, sort_keys=True, indent=1)
            fh.write("\n")
        return p

    def snapshot(self, name, **arrays):
        p = self._register(name)
        np.savez(p, manifest_hash=np.array(self.manifest.hash()), **arrays)
        return p

    def write_manifest(self):
        p = os.path.join(self.path, "manifest.json")
        with open(p, "w") as fh:
            json.dump(_clean(self.manifest.to_dict()), fh, sort_keys=True, indent=1)
            fh.write("\n")
        return p


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    if isinstance(o, (np.floating,)):
        o = float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, float) and not np.isfinite(o):
        return str(o)
    return o


def read_manifest_hash(path):
    """Hash recorded in an output file (CSV comment, JSON key or npz entry)."""
    if path.endswith(".npz"):
        with np.load(path) as z:
            return str(z["manifest_hash"])
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh).get("manifest_hash")
    with open(path) as fh:
        first = fh.readline().strip()
    if first.startswith("# manifest_hash="):
        return first.split("=", 1)[1]
    return None
