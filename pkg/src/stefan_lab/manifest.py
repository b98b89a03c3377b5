"""Run manifests: config echo, versions, timings and checksummed outputs."""

import hashlib
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .barriers import DEFAULTS
from .errors import InputError

MANIFEST_NAME = "manifest.json"


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def versions():
    import scipy
    import sklearn
    import numba
    return {"stefan_lab": __version__, "python": sys.version.split()[0],
            "numpy": np.__version__, "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__, "numba": numba.__version__,
            "platform": platform.platform()}


@dataclass
class RunManifest:
    """Record of one command invocation; ``outputs`` maps relative paths to sha256."""

    command: str
    config: dict = field(default_factory=dict)
    version: dict = field(default_factory=versions)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = None
    flags: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    # admissible rate parameters used by moduli and envelopes
    constants: dict = field(default_factory=lambda: dict(DEFAULTS))

    def add_output(self, path, root):
        rel = os.path.relpath(path, root)
        self.outputs[rel] = sha256(path)

    def to_dict(self):
        return _jsonable(asdict(self))

    def write(self, path):
        """Write to ``path``, or to ``path/manifest.json`` when ``path`` is a directory."""
        if os.path.isdir(path):
            path = os.path.join(path, MANIFEST_NAME)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
        return path

    @classmethod
    def read(cls, root):
        path = os.path.join(root, MANIFEST_NAME) if os.path.isdir(root) else root
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read manifest {path}: {exc}") from exc
        return cls(**data)

    def verify(self, root):
        """Outputs (relative to ``root``) that are missing or whose checksum changed."""
        bad = []
        for rel, digest in self.outputs.items():
            p = os.path.join(root, rel)
            if not os.path.exists(p) or sha256(p) != digest:
                bad.append(rel)
        return bad


def thread_limit(default=None):
    """Worker cap from ``STEFAN_LAB_THREADS`` (at least 1)."""
    raw = os.environ.get("STEFAN_LAB_THREADS")
    if raw is None:
        return default or os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"STEFAN_LAB_THREADS must be an integer, got {raw!r}") from exc
