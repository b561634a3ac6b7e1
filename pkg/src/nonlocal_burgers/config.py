"""Experiment configuration: YAML files, dotted overrides and object builders."""

from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigParse, NonlocalBurgersError
from .field import (
    Grid1D,
    InitialProfile,
    ProfileKind,
    custom_profile,
    grid_with_spacing,
    make_grid,
    sample_initial,
)
from .kernels import KernelSpec, discretize_kernel, load_tabulated, make_kernel
from .nonlocal_operator import NonlocalOp
from .references import RiemannData
from .solver import SolverConfig

SHIPPED = ("default", "rates", "verify", "eps_limit", "cross_validate")


class ExperimentKind(str, enum.Enum):
    RUN = "run"
    RATES = "rates"
    VERIFY = "verify"
    EPS_LIMIT = "eps-limit"
    CROSS_VALIDATE = "cross-validate"


def shipped_config(name: str = "default") -> dict:
    if name not in SHIPPED:
        raise ConfigParse(f"no shipped config {name!r}; choose from {SHIPPED}")
    text = resources.files("nonlocal_burgers").joinpath(f"configs/{name}.yaml").read_text()
    return yaml.safe_load(text)


def load_config_file(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigParse(f"config {path} must be a mapping at top level")
    return data


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key.sub=value`` strings; values are parsed as YAML scalars."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigParse(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigParse(f"override {key}: cannot parse {raw!r}") from exc
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigParse(f"override {key}: {part} is not a section")
        node[parts[-1]] = value
    return data


def _float(section: str, d: dict, key: str, default=None) -> float:
    val = d.get(key, default)
    if val is None:
        raise ConfigParse(f"{section}.{key} is required")
    if isinstance(val, str) and val.strip().lower() in {"inf", "infinity"}:
        return math.inf
    try:
        return float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"{section}.{key}: expected a number, got {val!r}") from exc


@dataclass
class ExperimentConfig:
    kind: ExperimentKind
    kernel: dict
    riemann: RiemannData
    initial: dict
    grid: dict
    solver: SolverConfig
    out_dir: str = "out"
    sections: dict = field(default_factory=dict)

    # ---- builders -------------------------------------------------------

    def build_kernel(self) -> KernelSpec:
        k = dict(self.kernel)
        family = k.pop("family", "exponential")
        try:
            if family == "tabulated":
                return load_tabulated(k["path"])
            return make_kernel(family, **k)
        except KeyError as exc:
            raise ConfigParse(f"kernel: missing parameter {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"kernel: {exc}") from exc

    def domain_margin(self, kernel: KernelSpec | None = None) -> float:
        kernel = kernel or self.build_kernel()
        diffusivity = max(1.0, self.solver.epsilon + 0.5 * kernel.second_moment)
        return 20.0 + 10.0 * math.sqrt(diffusivity * self.solver.t_end)

    def build_grid(self, kernel: KernelSpec | None = None) -> Grid1D:
        g = self.grid
        r = self.riemann
        if "left" in g and "right" in g:
            left, right = _float("grid", g, "left"), _float("grid", g, "right")
        else:
            m = self.domain_margin(kernel)
            left = min(r.u_minus * self.solver.t_end, 0.0) - m
            right = max(r.u_plus * self.solver.t_end, 0.0) + m
        try:
            if "n" in g:
                return make_grid(left, right, int(g["n"]))
            return grid_with_spacing(left, right, _float("grid", g, "h", 0.05))
        except NonlocalBurgersError as exc:
            raise ConfigParse(f"grid: {exc}") from exc

    def build_profile(self) -> InitialProfile:
        d = dict(self.initial)
        kind = d.get("kind", "tanh")
        try:
            if kind == "custom":
                data = np.loadtxt(d["path"], comments="#", ndmin=2)
                return custom_profile(self.riemann, data[:, 0], data[:, 1])
            return InitialProfile(ProfileKind(kind), self.riemann,
                                  width=_float("initial", d, "width", 1.0),
                                  shift=_float("initial", d, "shift", 0.0))
        except (KeyError, ValueError) as exc:
            if isinstance(exc, NonlocalBurgersError):
                raise
            raise ConfigParse(f"initial: {exc}") from exc

    def build(self):
        """Return ``(kernel, grid, operator, initial_state)``."""
        kernel = self.build_kernel()
        grid = self.build_grid(kernel)
        op = NonlocalOp(discretize_kernel(kernel, grid.h, self.solver.kernel_tol), grid)
        state0 = sample_initial(grid, self.build_profile())
        return kernel, grid, op, state0

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name) or {})

    # ---- serialisation --------------------------------------------------

    def to_dict(self) -> dict:
        s = self.solver
        out = {
            "kind": self.kind.value,
            "kernel": dict(self.kernel),
            "riemann": {"u_minus": self.riemann.u_minus, "u_plus": self.riemann.u_plus},
            "initial": dict(self.initial),
            "grid": dict(self.grid),
            "solver": {
                "epsilon": s.epsilon,
                "cfl": s.cfl,
                "kernel_tol": s.kernel_tol,
                "t_end": s.t_end,
                "snapshot_times": list(s.snapshot_times),
                "integrator": s.integrator.value,
            },
            "output": {"dir": self.out_dir},
        }
        out.update(copy.deepcopy(self.sections))
        return out


_KNOWN = {"kind", "kernel", "riemann", "initial", "grid", "solver", "output"}


def parse_config(data: dict, kind: str | None = None) -> ExperimentConfig:
    """Validate a raw mapping; every failure is a ``ConfigParse`` naming the field."""
    if not isinstance(data, dict):
        raise ConfigParse("config must be a mapping")
    kind_raw = kind or data.get("kind", "run")
    try:
        exp_kind = ExperimentKind(kind_raw)
    except ValueError as exc:
        raise ConfigParse(f"kind: unknown experiment kind {kind_raw!r}") from exc

    rd = data.get("riemann") or {}
    try:
        riemann = RiemannData(_float("riemann", rd, "u_minus"), _float("riemann", rd, "u_plus"))
    except NonlocalBurgersError as exc:
        if isinstance(exc, ConfigParse):
            raise
        raise ConfigParse(f"riemann.u_minus/u_plus: {exc}") from exc

    sd = data.get("solver") or {}
    try:
        solver = SolverConfig(
            epsilon=_float("solver", sd, "epsilon", 0.0),
            cfl=_float("solver", sd, "cfl", 0.4),
            kernel_tol=_float("solver", sd, "kernel_tol", 1e-12),
            t_end=_float("solver", sd, "t_end", 100.0),
            snapshot_times=tuple(float(t) for t in sd.get("snapshot_times", (1.0, 10.0, 100.0))),
            integrator=sd.get("integrator", "ssprk3"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigParse):
            raise
        raise ConfigParse(f"solver: {exc}") from exc

    for name in ("kernel", "initial", "grid"):
        if not isinstance(data.get(name, {}), dict):
            raise ConfigParse(f"{name} must be a mapping")
    out = (data.get("output") or {}).get("dir", "out")
    sections = {k: copy.deepcopy(v) for k, v in data.items() if k not in _KNOWN}
    cfg = ExperimentConfig(
        exp_kind,
        dict(data.get("kernel") or {"family": "exponential", "rate": 1.0}),
        riemann,
        dict(data.get("initial") or {"kind": "tanh", "width": 1.0}),
        dict(data.get("grid") or {"h": 0.05}),
        solver,
        str(out),
        sections,
    )
    cfg.build_kernel()
    cfg.build_profile()
    return cfg
