"""Run configuration: a plain ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Every key must be known; values
are parsed and range-checked by :func:`load_config` before any computation.
"""

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError, ParameterError
from .linops import GAUSSIAN_DTYPES, SRM_BASES
from .phantom import PhantomSpec, PsfSpec
from .solver import V3_STRATEGIES, SolverConfig


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text):
    return float(text.strip())


def _int(text):
    return int(text.strip())


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _box(text):
    parts = tuple(int(t) for t in text.split(","))
    if len(parts) != 4:
        raise ValueError("expected top,left,height,width")
    return parts


def _choice(*options):
    def parse(text):
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {options}, got {value!r}")
        return value
    return parse


def _optional_int(text):
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


def _optional_box(text):
    return None if text.strip().lower() in ("", "auto", "none") else _box(text)


@dataclass(frozen=True)
class RunConfig:
    # phantom
    rows: int = 128
    cols: int = 128
    amplitude_shape: float = 1.0
    # psf; blur = none replaces H by the identity
    blur: str = "psf"
    center_frequency: float = 3.5e6
    sampling_frequency_axial: float = 20e6
    fractional_bandwidth: float = 0.6
    lateral_sigma: float = 1.0
    kernel_rows: int = None
    kernel_cols: int = None
    # measurement
    matrix: str = "srm"
    srm_base: str = "wht"
    gaussian_dtype: str = "float64"
    cs_ratio: float = 0.4
    snr_db: float = 40.0
    # reconstruction
    wavelet: str = "db4"
    levels: int = 3
    alpha: float = 0.2
    mu: float = 1e-3
    beta: float = 0.03
    p: float = 1.0
    tol: float = 5e-4
    max_iters: int = 1000
    v3_strategy: str = "auto"
    newton_max_inner: int = 50
    newton_inner_tol: float = 1e-8
    track_objective: bool = True
    # evaluation and display
    dynamic_range_db: float = 40.0
    cnr_region1: tuple = None
    cnr_region2: tuple = None
    # sweep
    ratios: tuple = (0.2, 0.4, 0.6, 0.8)
    ps: tuple = (1.0,)
    workers: int = 1
    # prox-curve
    prox_k: float = 1.0
    prox_ps: tuple = (1.0, 1.25, 1.5, 1.75, 2.0)
    prox_xmin: float = -5.0
    prox_xmax: float = 5.0
    prox_points: int = 201
    # run
    seed: int = 0
    out: str = "."

    def phantom_spec(self):
        return PhantomSpec(self.rows, self.cols, amplitude_shape=self.amplitude_shape,
                           seed=self.seed)

    def psf_spec(self):
        return PsfSpec(self.center_frequency, self.sampling_frequency_axial,
                       self.fractional_bandwidth, self.lateral_sigma,
                       self.kernel_rows, self.kernel_cols)

    def solver_config(self):
        return SolverConfig(beta=self.beta, tol=self.tol, max_iters=self.max_iters,
                            v3_strategy=self.v3_strategy,
                            newton_inner_tol=self.newton_inner_tol,
                            newton_max_inner=self.newton_max_inner,
                            track_objective=self.track_objective)

    @property
    def n(self):
        return self.rows * self.cols

    def measurements(self, cs_ratio=None):
        return round((self.cs_ratio if cs_ratio is None else cs_ratio) * self.n)


PARSERS = {
    "rows": _int, "cols": _int, "amplitude_shape": _float,
    "blur": _choice("psf", "none"),
    "center_frequency": _float, "sampling_frequency_axial": _float,
    "fractional_bandwidth": _float, "lateral_sigma": _float,
    "kernel_rows": _optional_int, "kernel_cols": _optional_int,
    "matrix": _choice("srm", "gaussian", "identity"),
    "srm_base": _choice(*SRM_BASES),
    "gaussian_dtype": _choice(*GAUSSIAN_DTYPES),
    "cs_ratio": _float, "snr_db": _float,
    "wavelet": _choice("db4", "haar", "identity"), "levels": _int,
    "alpha": _float, "mu": _float, "beta": _float, "p": _float,
    "tol": _float, "max_iters": _int,
    "v3_strategy": _choice(*V3_STRATEGIES),
    "newton_max_inner": _int, "newton_inner_tol": _float,
    "track_objective": _bool,
    "dynamic_range_db": _float,
    "cnr_region1": _optional_box, "cnr_region2": _optional_box,
    "ratios": _floats, "ps": _floats, "workers": _int,
    "prox_k": _float, "prox_ps": _floats, "prox_xmin": _float,
    "prox_xmax": _float, "prox_points": _int,
    "seed": _int, "out": str.strip,
}

assert set(PARSERS) == {f.name for f in fields(RunConfig)}


def parse_text(text):
    """Parse ``key = value`` lines into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return values


def validate(cfg):
    """Range-check every field; raises :class:`ConfigError`."""
    try:
        cfg.phantom_spec()
        cfg.psf_spec()
        cfg.solver_config()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    checks = [
        (0.0 < cfg.cs_ratio <= 1.0, "cs_ratio must lie in (0, 1]"),
        (cfg.snr_db > 0 or math.isinf(cfg.snr_db), "snr_db must be positive or inf"),
        (cfg.alpha >= 0.0, "alpha must be >= 0"),
        (cfg.mu > 0.0, "mu must be > 0"),
        (1.0 <= cfg.p <= 2.0, "p must lie in [1, 2]"),
        (cfg.levels >= 1, "levels must be >= 1"),
        (cfg.dynamic_range_db > 0, "dynamic_range_db must be > 0"),
        (len(cfg.ratios) > 0 and all(0.0 < r <= 1.0 for r in cfg.ratios),
         "ratios must be a nonempty list in (0, 1]"),
        (len(cfg.ps) > 0 and all(1.0 <= q <= 2.0 for q in cfg.ps),
         "ps must be a nonempty list in [1, 2]"),
        (cfg.workers >= 1, "workers must be >= 1"),
        (cfg.prox_k >= 0.0, "prox_k must be >= 0"),
        (all(1.0 <= q <= 2.0 for q in cfg.prox_ps), "prox_ps must lie in [1, 2]"),
        (cfg.prox_points >= 2 and cfg.prox_xmax > cfg.prox_xmin, "bad prox grid"),
        (0 <= cfg.seed < 2 ** 64, "seed must be an unsigned 64-bit integer"),
        ((cfg.cnr_region1 is None) == (cfg.cnr_region2 is None),
         "give both CNR regions or neither"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    if cfg.matrix == "identity" and cfg.cs_ratio != 1.0:
        raise ConfigError("matrix = identity requires cs_ratio = 1")
    if cfg.matrix == "srm" and cfg.srm_base == "wht" and cfg.n & (cfg.n - 1):
        raise ConfigError("srm_base = wht needs rows*cols to be a power of two")
    side = 2 ** cfg.levels
    if cfg.wavelet != "identity" and (cfg.rows % side or cfg.cols % side):
        raise ConfigError(f"rows and cols must be divisible by 2^levels = {side}")
    return cfg


def load_config(path=None, **overrides):
    """Defaults, then the file at ``path``, then non-None ``overrides``."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values = parse_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return validate(replace(RunConfig(), **values))


def dump_config(cfg):
    """Render ``cfg`` back to ``key = value`` text (round-trips through parse_text)."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            text = "auto"
        elif isinstance(value, tuple):
            text = ",".join(repr(v) for v in value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
