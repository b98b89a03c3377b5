"""Solver configuration: flat ``key = value`` files with a fixed key table."""

from dataclasses import dataclass, fields, replace

from ..errors import ConfigError

MODES = ("radial", "cartesian1d", "cartesian2d")
BOUNDARY_KINDS = ("fixed", "scaled", "additive", "constant")
INIT_KINDS = ("stationary", "p2_shifted", "zero", "constant")
GRID_KINDS = ("uniform", "graded")
WARM_STARTS = ("active_set", "none")

# (config key, attribute, type, default); REQUIRED marks mandatory keys
REQUIRED = object()
KEY_TABLE = (
    ("mode", "mode", str, REQUIRED),
    ("n", "n", int, REQUIRED),
    ("h", "h", float, REQUIRED),
    ("dt", "dt", float, REQUIRED),
    ("L", "L", float, 1.0),
    ("omega", "omega", float, 1.8),
    ("tol", "tol", float, 1e-12),
    ("max_sweeps", "max_sweeps", int, 100000),
    ("boundary.kind", "boundary_kind", str, "scaled"),
    ("boundary.kappa", "boundary_kappa", float, 1.0),
    ("boundary.mu1", "boundary_mu1", float, 0.5),
    ("boundary.mu2", "boundary_mu2", float, 0.5),
    ("boundary.value", "boundary_value", float, 0.0),
    ("init.kind", "init_kind", str, "stationary"),
    ("init.radius", "init_radius", float, 0.5),
    ("init.shift", "init_shift", float, 0.05),
    ("init.value", "init_value", float, 0.0),
    ("init.noise", "init_noise", float, 0.0),
    ("snapshot_stride", "snapshot_stride", int, 10),
    ("max_time", "max_time", float, 10.0),
    ("max_steps", "max_steps", int, 1000000),
    ("seed", "seed", int, 0),
    ("grid.kind", "grid_kind", str, "uniform"),
    ("grid.r_min", "grid_r_min", float, 1e-9),
    ("grid.ratio", "grid_ratio", float, 1.01),
    ("time.adaptive", "time_adaptive", bool, False),
    ("time.target_change", "time_target_change", float, 0.02),
    ("time.dt_min", "time_dt_min", float, 1e-16),
    ("time.dt_max", "time_dt_max", float, 0.01),
    ("warm_start", "warm_start", str, "active_set"),
    ("threshold_factor", "threshold_factor", float, 1e-3),
    ("anchor", "anchor", tuple, ()),
)
KEY_TO_ATTR = {k: a for k, a, _, _ in KEY_TABLE}


@dataclass(frozen=True)
class SolverConfig:
    """Validated solver settings; see the README key table."""

    mode: str
    n: int
    h: float
    dt: float
    L: float = 1.0
    omega: float = 1.8
    tol: float = 1e-12
    max_sweeps: int = 100000
    boundary_kind: str = "scaled"
    boundary_kappa: float = 1.0
    boundary_mu1: float = 0.5
    boundary_mu2: float = 0.5
    boundary_value: float = 0.0
    init_kind: str = "stationary"
    init_radius: float = 0.5
    init_shift: float = 0.05
    init_value: float = 0.0
    init_noise: float = 0.0
    snapshot_stride: int = 10
    max_time: float = 10.0
    max_steps: int = 1000000
    seed: int = 0
    grid_kind: str = "uniform"
    grid_r_min: float = 1e-9
    grid_ratio: float = 1.01
    time_adaptive: bool = False
    time_target_change: float = 0.02
    time_dt_min: float = 1e-16
    time_dt_max: float = 0.01
    warm_start: str = "active_set"
    threshold_factor: float = 1e-3
    anchor: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(float(a) for a in self.anchor))
        validate(self)

    def with_updates(self, **changes):
        return replace(self, **changes)

    @property
    def space_dim(self):
        return {"radial": 1, "cartesian1d": 1, "cartesian2d": 2}[self.mode]


def _fail(msg, line=None, path=None):
    raise ConfigError(msg, line=line, path=path)


def validate(cfg, lines=None, path=None):
    lines = lines or {}

    def err(key, msg):
        _fail(f"{key}: {msg}", lines.get(key), path)

    if cfg.mode not in MODES:
        err("mode", f"must be one of {MODES}")
    if cfg.mode == "cartesian1d" and cfg.n != 1:
        err("n", "cartesian1d requires n = 1")
    if cfg.mode == "cartesian2d" and cfg.n != 2:
        err("n", "cartesian2d requires n = 2")
    if cfg.n < 1:
        err("n", "must be >= 1")
    for key, attr in (("h", "h"), ("dt", "dt"), ("L", "L"), ("tol", "tol"),
                      ("max_time", "max_time")):
        if not getattr(cfg, attr) > 0:
            err(key, "must be > 0")
    if not 1.0 < cfg.omega < 2.0:
        err("omega", "must lie in (1, 2)")
    if cfg.h >= cfg.L:
        err("h", "must be smaller than L")
    for key, attr in (("max_sweeps", "max_sweeps"), ("snapshot_stride", "snapshot_stride"),
                      ("max_steps", "max_steps")):
        if getattr(cfg, attr) < 1:
            err(key, "must be >= 1")
    if cfg.boundary_kind not in BOUNDARY_KINDS:
        err("boundary.kind", f"must be one of {BOUNDARY_KINDS}")
    if cfg.init_kind not in INIT_KINDS:
        err("init.kind", f"must be one of {INIT_KINDS}")
    if cfg.grid_kind not in GRID_KINDS:
        err("grid.kind", f"must be one of {GRID_KINDS}")
    if cfg.grid_kind == "graded":
        if cfg.mode != "radial":
            err("grid.kind", "graded grids are radial only")
        if not 0 < cfg.grid_r_min < cfg.h:
            err("grid.r_min", "must lie in (0, h)")
        if not 1.0 < cfg.grid_ratio < 1.5:
            err("grid.ratio", "must lie in (1, 1.5)")
    if cfg.warm_start not in WARM_STARTS:
        err("warm_start", f"must be one of {WARM_STARTS}")
    if cfg.mode == "cartesian2d" and (cfg.boundary_mu1 < 0 or cfg.boundary_mu2 < 0
                                      or abs(cfg.boundary_mu1 + cfg.boundary_mu2 - 1) > 1e-12):
        err("boundary.mu1", "mu1, mu2 must be nonnegative with mu1 + mu2 = 1")
    if cfg.init_kind == "stationary":
        if cfg.mode == "cartesian2d":
            err("init.kind", "stationary profiles are available in radial and cartesian1d modes")
        if not 0 <= cfg.init_radius < cfg.L:
            err("init.radius", "must lie in [0, L)")
    if cfg.init_noise < 0:
        err("init.noise", "must be >= 0")
    if not 0 < cfg.time_target_change < 1:
        err("time.target_change", "must lie in (0, 1)")
    if not 0 < cfg.time_dt_min <= cfg.time_dt_max:
        err("time.dt_min", "need 0 < dt_min <= dt_max")
    if not cfg.threshold_factor > 0:
        err("threshold_factor", "must be > 0")
    if cfg.anchor and len(cfg.anchor) != cfg.space_dim:
        err("anchor", f"needs {cfg.space_dim} coordinate(s)")
    if cfg.mode == "radial" and any(cfg.anchor):
        err("anchor", "radial runs are anchored at the origin")


def _parse_value(key, typ, raw, line, path):
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is tuple:
            return tuple(float(p) for p in raw.split(",") if p.strip())
        return raw
    except ValueError:
        _fail(f"{key}: cannot parse {raw!r} as {typ.__name__}", line, path)


def parse_config(text, path=None):
    """Parse config text; unknown or repeated keys are errors."""
    table = {k: (a, t, d) for k, a, t, d in KEY_TABLE}
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            _fail(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in table:
            _fail(f"unknown key {key!r}", lineno, path)
        if key in values:
            _fail(f"duplicate key {key!r}", lineno, path)
        attr, typ, _ = table[key]
        values[attr] = _parse_value(key, typ, val, lineno, path)
        lines[key] = lineno
    for key, (attr, _, default) in table.items():
        if default is REQUIRED and attr not in values:
            _fail(f"missing required key {key!r}", None, path)
    defaults = {a: d for _, a, _, d in KEY_TABLE if d is not REQUIRED}
    merged = {**defaults, **values}
    # bypass __post_init__ so validation can report line numbers
    cfg = object.__new__(SolverConfig)
    for f in fields(SolverConfig):
        object.__setattr__(cfg, f.name, merged[f.name])
    validate(cfg, lines, path)
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from exc
    return parse_config(text, str(path))


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return ",".join(format(v, ".17g") for v in value)
    return str(value)


def config_to_text(cfg):
    """Canonical text: every key, in table order."""
    return "".join(f"{key} = {_format(getattr(cfg, attr))}\n" for key, attr, _, _ in KEY_TABLE)


def config_to_dict(cfg):
    return {key: getattr(cfg, attr) for key, attr, _, _ in KEY_TABLE}


def save_config(cfg, path):
    with open(path, "w") as fh:
        fh.write(config_to_text(cfg))
