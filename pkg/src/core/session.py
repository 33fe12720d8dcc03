"""
shearForge Run Session
======================
Configuration loading, input hashing and artifact writing for one CLI run.

Responsibilities:
- Layer configuration: config/defaults.json, optional user JSON (deep merge),
  environment overrides, explicit flags
- Read JSON inputs with located diagnostics
- Hash inputs (sha256) for the run manifest
- Write certificates deterministically (sorted keys)
"""

import copy
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger("shearForge.session")

REPO_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG = REPO_ROOT / "config" / "defaults.json"

# Environment overrides: variable -> (config path, type)
ENV_OVERRIDES = {
    "SHEARFORGE_PRECISION_BITS": (("arithmetic", "precision_bits"), int),
    "SHEARFORGE_SEED": (("seed",), int),
}


def deep_merge(base: Dict, override: Dict) -> Dict:
    """Recursive dict merge; values from `override` win, `base` is not modified."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_path(config: Dict, path, value) -> None:
    node = config
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value


def read_json(path: str) -> Any:
    """
    Load a JSON file.

    Raises:
        FileNotFoundError: missing file
        json.JSONDecodeError: malformed JSON (carries line and column)
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Input not found: {p}")
    with open(p, "r") as f:
        return json.load(f)


def load_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict] = None,
    environ: Optional[Dict[str, str]] = None,
    defaults_path: Optional[str] = None,
) -> Dict:
    """
    Build the run configuration.

    Args:
        config_path: Optional user JSON deep-merged over the defaults
        overrides: Explicit settings (CLI flags), highest precedence
        environ: Environment mapping (defaults to os.environ)
        defaults_path: Alternative defaults file

    Returns:
        Plain configuration dict

    Raises:
        ValueError: unparsable environment override or precision below 64 bits
    """
    config = read_json(defaults_path or str(DEFAULT_CONFIG))
    if config_path:
        config = deep_merge(config, read_json(config_path))
        logger.info("Config merged from %s", config_path)

    environ = os.environ if environ is None else environ
    for var, (path, kind) in ENV_OVERRIDES.items():
        raw = environ.get(var)
        if raw is None or raw == "":
            continue
        try:
            _set_path(config, path, kind(raw))
        except ValueError:
            raise ValueError(f"{var}: expected {kind.__name__}, got '{raw}'")
        logger.debug("Environment override %s=%s", var, raw)

    if overrides:
        config = deep_merge(config, overrides)

    arithmetic = config.get("arithmetic", {})
    if arithmetic.get("mode", "float") == "float" and int(arithmetic.get("precision_bits", 128)) < 64:
        raise ValueError(f"arithmetic.precision_bits must be >= 64 in float mode, "
                         f"got {arithmetic.get('precision_bits')}")
    return config


def compute_file_hash(path: str) -> str:
    """SHA-256 hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


class RunSession:
    """
    Bookkeeping for one CLI invocation.

    Collects input hashes and written artifacts into a manifest stored next
    to the outputs. The manifest carries no timestamps so identical runs
    produce identical files.
    """

    def __init__(self, out_path: str, config: Dict):
        """
        Args:
            out_path: Main output file; sibling artifacts share its stem
            config: Resolved configuration dict
        """
        self.out_path = Path(out_path)
        self.config = config
        self.inputs: List[Dict] = []
        self.artifacts: List[str] = []

    # ------------------------------------------------------------------
    # Inputs
    # ------------------------------------------------------------------

    def load_input(self, path: str) -> Any:
        data = read_json(path)
        digest = compute_file_hash(path)
        self.inputs.append({"path": str(Path(path).name), "sha256": digest})
        logger.info("Loaded %s  sha256=%s", path, digest[:12])
        return data

    # ------------------------------------------------------------------
    # Artifacts
    # ------------------------------------------------------------------

    def sibling(self, suffix: str) -> Path:
        """Path next to the main output, e.g. suffix '.report.json'."""
        name = self.out_path.name
        stem = name[:-len(".json")] if name.endswith(".json") else name
        return self.out_path.with_name(stem + suffix)

    def write_json(self, data: Any, path: Optional[Path] = None) -> Path:
        target = Path(path) if path is not None else self.out_path
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w") as f:
            f.write(to_json(data))
            f.write("\n")
        self.artifacts.append(target.name)
        logger.info("Wrote %s", target)
        return target

    def register(self, path: Path) -> None:
        self.artifacts.append(Path(path).name)

    def manifest(self, subcommand: str, exit_code: int) -> Dict:
        return {
            "subcommand": subcommand,
            "inputs": self.inputs,
            "artifacts": sorted(self.artifacts),
            "seed": self.config.get("seed", 0),
            "arithmetic": self.config.get("arithmetic", {}),
            "exit_code": exit_code,
        }

    def save_manifest(self, subcommand: str, exit_code: int) -> Path:
        return self.write_json(self.manifest(subcommand, exit_code), self.sibling(".manifest.json"))
