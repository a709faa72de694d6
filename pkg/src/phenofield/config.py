"""Simulation configuration: parsing, serialization, and the assumption gate.

The configuration grammar is a flat UTF-8 ``key = value`` file.  ``#`` starts
a comment that runs to the end of the line, dotted keys address sub-records
(``ic_f.a = 2.5``), numbers accept decimal and scientific notation, and
point-valued keys take a comma-separated pair (``ic_phi.disk_center =
0.5,0.5``).  Unknown keys are rejected; solver controls and the output policy
have defaults, everything else is required.

``validate_assumptions`` renders the structural requirements on the model
functions as numerical checks on dense sample grids (1001 points per axis,
tolerance 1e-6) and must come back clean before a simulation starts.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .functions import ModelFunctions
from .phenotype import build_grid, fitness_oscillation


class ConfigError(ValueError):
    """Configuration file problem; carries the line number when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class IcPhi:
    disk_center: tuple[float, float] = (0.5, 0.5)
    disk_radius_sq: float = 0.01


@dataclass(frozen=True)
class IcF:
    a: float = 2.5
    y_bar0: float = 1.75


@dataclass(frozen=True)
class OutputPolicy:
    snapshot_stride: int = 0
    probe_a: tuple[float, float] = (0.5, 0.5)
    probe_b: tuple[float, float] = (0.65, 0.65)
    probe_c: tuple[float, float] = (0.8, 0.8)
    dir: str = "out"


@dataclass(frozen=True)
class SimulationConfig:
    """All model parameters, discretization controls, and output policy."""

    eps: float
    d_sigma: float
    b: float
    sigma_b: float
    m_mob: float
    alpha: float
    theta: float
    nx: int
    n_y: int
    y_min: float
    y_max: float
    dt: float
    t_end: float
    ic_phi: IcPhi = field(default_factory=IcPhi)
    ic_f: IcF = field(default_factory=IcF)
    newton_tol: float = 1e-10
    newton_max_iter: int = 20
    linear_tol: float = 1e-12
    linear_max_iter: int = 2000
    tumour_threshold: float = -0.9
    output: OutputPolicy = field(default_factory=OutputPolicy)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def default_config() -> SimulationConfig:
    """The reference configuration of the simulated scenarios."""
    return SimulationConfig(
        eps=1e-2,
        d_sigma=1e2,
        b=1e4,
        sigma_b=1.0,
        m_mob=1e-2,
        alpha=5e2,
        theta=0.5,
        nx=120,
        n_y=17,
        y_min=0.0,
        y_max=2.0,
        dt=1e-3,
        t_end=5.4,
    )


# key -> (kind, required); kinds: float, int, pair, str
_KEY_TABLE = {
    "eps": ("float", True),
    "d_sigma": ("float", True),
    "b": ("float", True),
    "sigma_b": ("float", True),
    "m_mob": ("float", True),
    "alpha": ("float", True),
    "theta": ("float", True),
    "nx": ("int", True),
    "n_y": ("int", True),
    "y_min": ("float", True),
    "y_max": ("float", True),
    "dt": ("float", True),
    "t_end": ("float", True),
    "ic_phi.disk_center": ("pair", True),
    "ic_phi.disk_radius_sq": ("float", True),
    "ic_f.a": ("float", True),
    "ic_f.y_bar0": ("float", True),
    "newton_tol": ("float", False),
    "newton_max_iter": ("int", False),
    "linear_tol": ("float", False),
    "linear_max_iter": ("int", False),
    "tumour_threshold": ("float", False),
    "output.snapshot_stride": ("int", False),
    "output.probe_a": ("pair", False),
    "output.probe_b": ("pair", False),
    "output.probe_c": ("pair", False),
    "output.dir": ("str", False),
}


def _parse_number(text: str, key: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"value for {key} is not a number: {text!r}", line=line) from None


def _parse_int(text: str, key: str, line: int) -> int:
    value = _parse_number(text, key, line)
    if value != int(value):
        raise ConfigError(f"value for {key} must be an integer, got {text!r}", line=line)
    return int(value)


def _parse_pair(text: str, key: str, line: int) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"value for {key} must be a pair 'x,y', got {text!r}", line=line)
    return (_parse_number(parts[0], key, line), _parse_number(parts[1], key, line))


def parse_config(text: str) -> SimulationConfig:
    """Parse a configuration document into a validated SimulationConfig.

    Every supplied key is consumed exactly once; unknown and duplicate keys
    are rejected, missing required keys are reported by name, and domain
    violations name the invariant that failed.
    """
    seen: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            column = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", line=lineno, column=column)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        value = value_part.strip()
        if not key:
            raise ConfigError("empty key before '='", line=lineno, column=1)
        if not value:
            raise ConfigError(f"empty value for key {key!r}", line=lineno,
                              column=line.index("=") + 2)
        if key not in _KEY_TABLE:
            raise ConfigError(f"unknown key: {key}", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key: {key}", line=lineno)
        kind = _KEY_TABLE[key][0]
        if kind == "float":
            seen[key] = _parse_number(value, key, lineno)
        elif kind == "int":
            seen[key] = _parse_int(value, key, lineno)
        elif kind == "pair":
            seen[key] = _parse_pair(value, key, lineno)
        else:
            seen[key] = value

    for key, (_, required) in _KEY_TABLE.items():
        if required and key not in seen:
            raise ConfigError(f"missing required key: {key}")

    cfg = SimulationConfig(
        eps=seen["eps"],
        d_sigma=seen["d_sigma"],
        b=seen["b"],
        sigma_b=seen["sigma_b"],
        m_mob=seen["m_mob"],
        alpha=seen["alpha"],
        theta=seen["theta"],
        nx=seen["nx"],
        n_y=seen["n_y"],
        y_min=seen["y_min"],
        y_max=seen["y_max"],
        dt=seen["dt"],
        t_end=seen["t_end"],
        ic_phi=IcPhi(disk_center=seen["ic_phi.disk_center"],
                     disk_radius_sq=seen["ic_phi.disk_radius_sq"]),
        ic_f=IcF(a=seen["ic_f.a"], y_bar0=seen["ic_f.y_bar0"]),
    )
    optional = {}
    for key in ("newton_tol", "newton_max_iter", "linear_tol", "linear_max_iter",
                "tumour_threshold"):
        if key in seen:
            optional[key] = seen[key]
    out_fields = {}
    for key, attr in (("output.snapshot_stride", "snapshot_stride"),
                      ("output.probe_a", "probe_a"), ("output.probe_b", "probe_b"),
                      ("output.probe_c", "probe_c"), ("output.dir", "dir")):
        if key in seen:
            out_fields[attr] = seen[key]
    if out_fields:
        optional["output"] = replace(OutputPolicy(), **out_fields)
    if optional:
        cfg = replace(cfg, **optional)

    check_domains(cfg)
    return cfg


def check_domains(cfg: SimulationConfig) -> None:
    """Raise ConfigError naming the first violated parameter invariant."""
    def require(ok: bool, name: str, constraint: str, value):
        if not ok:
            raise ConfigError(f"value out of domain for {name}: requires {constraint} (got {value!r})")

    require(0.0 < cfg.eps < 1.0, "eps", "0 < eps < 1", cfg.eps)
    require(cfg.d_sigma > 0, "d_sigma", "d_sigma > 0", cfg.d_sigma)
    require(cfg.b >= 0, "b", "b >= 0", cfg.b)
    require(cfg.sigma_b >= 0, "sigma_b", "sigma_b >= 0", cfg.sigma_b)
    require(cfg.m_mob > 0, "m_mob", "m_mob > 0", cfg.m_mob)
    require(cfg.alpha >= 0, "alpha", "alpha >= 0", cfg.alpha)
    require(cfg.theta >= 0, "theta", "theta >= 0", cfg.theta)
    require(cfg.nx >= 1, "nx", "nx >= 1", cfg.nx)
    require(cfg.n_y >= 1, "n_y", "n_y >= 1", cfg.n_y)
    require(cfg.y_min < cfg.y_max, "y_min/y_max", "y_min < y_max", (cfg.y_min, cfg.y_max))
    require(cfg.dt > 0, "dt", "dt > 0", cfg.dt)
    require(cfg.t_end >= 0, "t_end", "t_end >= 0", cfg.t_end)
    require(cfg.ic_phi.disk_radius_sq >= 0, "ic_phi.disk_radius_sq",
            "disk_radius_sq >= 0", cfg.ic_phi.disk_radius_sq)
    require(cfg.ic_f.a > 0, "ic_f.a", "a > 0", cfg.ic_f.a)
    require(cfg.y_min <= cfg.ic_f.y_bar0 <= cfg.y_max, "ic_f.y_bar0",
            "y_min <= y_bar0 <= y_max", cfg.ic_f.y_bar0)
    require(cfg.newton_tol > 0, "newton_tol", "newton_tol > 0", cfg.newton_tol)
    require(cfg.newton_max_iter >= 1, "newton_max_iter", "newton_max_iter >= 1",
            cfg.newton_max_iter)
    require(cfg.linear_tol > 0, "linear_tol", "linear_tol > 0", cfg.linear_tol)
    require(cfg.linear_max_iter >= 1, "linear_max_iter", "linear_max_iter >= 1",
            cfg.linear_max_iter)
    require(cfg.output.snapshot_stride >= 0, "output.snapshot_stride",
            "snapshot_stride >= 0", cfg.output.snapshot_stride)


def config_to_text(cfg: SimulationConfig) -> str:
    """Serialize a configuration to the key = value grammar (round-trips)."""
    lines = [
        "# model parameters",
        f"eps = {cfg.eps!r}",
        f"d_sigma = {cfg.d_sigma!r}",
        f"b = {cfg.b!r}",
        f"sigma_b = {cfg.sigma_b!r}",
        f"m_mob = {cfg.m_mob!r}",
        f"alpha = {cfg.alpha!r}",
        f"theta = {cfg.theta!r}",
        "",
        "# discretization",
        f"nx = {cfg.nx}",
        f"n_y = {cfg.n_y}",
        f"y_min = {cfg.y_min!r}",
        f"y_max = {cfg.y_max!r}",
        f"dt = {cfg.dt!r}",
        f"t_end = {cfg.t_end!r}",
        "",
        "# initial data",
        f"ic_phi.disk_center = {cfg.ic_phi.disk_center[0]!r},{cfg.ic_phi.disk_center[1]!r}",
        f"ic_phi.disk_radius_sq = {cfg.ic_phi.disk_radius_sq!r}",
        f"ic_f.a = {cfg.ic_f.a!r}",
        f"ic_f.y_bar0 = {cfg.ic_f.y_bar0!r}",
        "",
        "# solver controls",
        f"newton_tol = {cfg.newton_tol!r}",
        f"newton_max_iter = {cfg.newton_max_iter}",
        f"linear_tol = {cfg.linear_tol!r}",
        f"linear_max_iter = {cfg.linear_max_iter}",
        "",
        "# observables and output",
        f"tumour_threshold = {cfg.tumour_threshold!r}",
        f"output.snapshot_stride = {cfg.output.snapshot_stride}",
        f"output.probe_a = {cfg.output.probe_a[0]!r},{cfg.output.probe_a[1]!r}",
        f"output.probe_b = {cfg.output.probe_b[0]!r},{cfg.output.probe_b[1]!r}",
        f"output.probe_c = {cfg.output.probe_c[0]!r},{cfg.output.probe_c[1]!r}",
        f"output.dir = {cfg.output.dir}",
    ]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return "\n".join(lines)


_SAMPLES = 1001
_TOL = 1e-6


def validate_assumptions(cfg: SimulationConfig, fns: ModelFunctions) -> ValidationReport:
    """Check the structural assumptions on the model functions by sampling.

    Pure: identical inputs give identical reports.  A failing report is fatal
    before simulation start.
    """
    checks = []
    y = np.linspace(cfg.y_min, cfg.y_max, _SAMPLES)
    phi_unit = np.linspace(-1.0, 1.0, _SAMPLES)
    phi_wide = np.linspace(-3.0, 3.0, _SAMPLES)

    # A1: mobility is constant here, so Lipschitz continuity is automatic;
    # the two-sided positive bound reduces to m_mob itself.
    ok = np.isfinite(cfg.m_mob) and cfg.m_mob > 0
    checks.append(ValidationCheck(
        "A1 mobility bounds", bool(ok),
        f"constant mobility m = {cfg.m_mob:g}; requires 0 < m < inf"))

    # A2: convex/expansive splitting of the double well: F_c' nondecreasing
    # (convexity) and F_e' affine (quadratic perturbation), both sampled.
    fc = np.asarray(fns.potential_convex_deriv(phi_wide), dtype=float)
    fe = np.asarray(fns.potential_expansive_deriv(phi_wide), dtype=float)
    scale = max(np.abs(fc).max(), 1.0)
    convex_ok = bool(np.all(np.diff(fc) >= -_TOL * scale))
    second = np.diff(fe, 2)
    quad_ok = bool(np.all(np.abs(second) <= _TOL * max(np.abs(fe).max(), 1.0)))
    checks.append(ValidationCheck(
        "A2 potential splitting", convex_ok and quad_ok,
        f"convex part monotone derivative: {convex_ok}; expansive part quadratic: {quad_ok}"))

    # A3: kernel nonnegative with unit destination integral per source, plus
    # theta >= 0.  Composite Simpson on the sample grid; narrow kernels need
    # its fourth-order accuracy to sit inside the 1e-6 gate.
    raw = np.asarray(fns.kernel(y[None, :], y[:, None]), dtype=float)
    nonneg_ok = bool(np.all(raw >= 0))
    hq = (cfg.y_max - cfg.y_min) / (_SAMPLES - 1)
    wq = np.ones(_SAMPLES)
    wq[1:-1:2] = 4.0
    wq[2:-1:2] = 2.0
    wq *= hq / 3.0
    col_integrals = wq @ raw
    norm_err = float(np.abs(col_integrals - 1.0).max())
    norm_ok = norm_err <= _TOL
    theta_ok = cfg.theta >= 0
    checks.append(ValidationCheck(
        "A3 kernel normalization", nonneg_ok and norm_ok and theta_ok,
        f"min value {raw.min():.3e}, max |integral - 1| = {norm_err:.3e} "
        f"(tol {_TOL:g}), theta = {cfg.theta:g}"))

    # A4: rate functions nonnegative and bounded on the trait interval.
    rate_min = np.inf
    rate_max = -np.inf
    finite = True
    for fn in (fns.p_rate, fns.q_rate, fns.k_rate, fns.w_mob):
        vals = np.asarray(fn(y), dtype=float)
        finite = finite and bool(np.all(np.isfinite(vals)))
        rate_min = min(rate_min, float(vals.min()))
        rate_max = max(rate_max, float(vals.max()))
    checks.append(ValidationCheck(
        "A4 rate functions", finite and rate_min >= -_TOL,
        f"range [{rate_min:.3e}, {rate_max:.3e}] over the trait interval"))

    # A5: fitness bounded on the trait interval.
    r = np.asarray(fns.fitness(y), dtype=float)
    checks.append(ValidationCheck(
        "A5 fitness bounded", bool(np.all(np.isfinite(r))),
        f"range [{r.min():.6g}, {r.max():.6g}]"))

    # A6: truncation nonnegative, bounded by one, with the pinned endpoint
    # values at the pure phases.
    h_unit = np.asarray(fns.truncation(phi_unit), dtype=float)
    h_wide = np.asarray(fns.truncation(phi_wide), dtype=float)
    h_m1 = float(np.asarray(fns.truncation(np.array([-1.0])), dtype=float)[0])
    h_p1 = float(np.asarray(fns.truncation(np.array([1.0])), dtype=float)[0])
    range_ok = bool(np.all(h_unit >= -_TOL) and np.all(h_unit <= 1.0 + _TOL))
    wide_ok = bool(np.all(h_wide >= -_TOL) and np.all(np.isfinite(h_wide)))
    ends_ok = abs(h_m1) <= _TOL and abs(h_p1 - 1.0) <= _TOL
    checks.append(ValidationCheck(
        "A6 truncation function", range_ok and wide_ok and ends_ok,
        f"h(-1) = {h_m1:g}, h(1) = {h_p1:g}, range on [-1,1] is "
        f"[{h_unit.min():.3e}, {h_unit.max():.3e}]"))

    # A7: constant-in-time supply level.
    checks.append(ValidationCheck(
        "A7 boundary supply", bool(np.isfinite(cfg.sigma_b)) and cfg.sigma_b >= 0,
        f"constant sigma_b = {cfg.sigma_b:g}"))

    # stepping bound for the explicit trait update; uses the sharp fitness
    # oscillation, since the mean fitness is a convex combination of grid
    # values (the crude 2*sup|R| form rejects the reference parameter set).
    grid = build_grid(cfg.y_min, cfg.y_max, cfg.n_y)
    h_max = float(max(h_unit.max(), h_wide.max()))
    bound = cfg.dt * cfg.alpha * h_max * (cfg.theta + fitness_oscillation(fns, grid))
    checks.append(ValidationCheck(
        "explicit trait-update bound", bound < 1.0,
        f"dt*alpha*h_max*(theta + fitness spread) = {bound:.6g}; requires < 1"))

    return ValidationReport(checks=tuple(checks))
