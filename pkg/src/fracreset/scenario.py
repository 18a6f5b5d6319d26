"""Declarative scenario files (YAML) and their translation into loop models.

A scenario names a plant, an optional linear controller, exactly one
reset element, and the analyses to run. Unknown keys are rejected so a
typo in ``alpha`` or ``b`` cannot silently fall back to a default.
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .errors import SchemaViolation
from .fode import MemoryMode
from .models import (
    ELEMENT_KINDS,
    ResetElement,
    ResetRule,
    StateSpaceModel,
    assemble_closed_loop,
    common_order,
    tf_to_ss,
    to_order,
)
from .simreset import SimulationConfig, Sinusoid

ANALYSES = ("simulate", "metrics", "df", "stability")


@dataclass
class SystemSpec:
    """Transfer function (``num``/``den``) or state space (``A``/``B``/``C``)."""

    num: list = None
    den: list = None
    A: list = None
    B: list = None
    C: list = None
    alpha: float = 1.0

    @property
    def is_tf(self):
        return self.den is not None

    def model(self):
        if self.is_tf:
            return tf_to_ss(self.num, self.den, self.alpha)
        return StateSpaceModel(self.A, self.B, self.C, self.alpha)


@dataclass
class ElementSpec:
    kind: str
    K: float = 1.0
    b: float = 0.0
    alpha: float = 1.0
    reset_enabled: bool = True

    def element(self):
        return ResetElement(self.kind, self.K, self.b, self.alpha)


@dataclass
class SimulationSpec:
    step: float = 1e-3
    horizon: float = 30.0
    reference: object = 1.0
    memory_mode: str = "offset"
    tolerance: float = 1e-9

    def config(self):
        ref = self.reference
        if isinstance(ref, dict):
            ref = Sinusoid(float(ref["amplitude"]), float(ref["omega"]))
        return SimulationConfig(self.step, self.horizon, ref,
                                MemoryMode(self.memory_mode), self.tolerance)


@dataclass
class DFSpec:
    omegas: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    amplitude: float = 1.0
    numerical: bool = False


@dataclass
class StabilitySpec:
    beta_range: list = field(default_factory=lambda: [-5.0, 5.0])
    P_R: float = 1.0
    sample_betas: list = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    plant: SystemSpec
    reset_element: ElementSpec
    analyses: list
    linear_controller: SystemSpec = None
    simulation: SimulationSpec = field(default_factory=SimulationSpec)
    df: DFSpec = field(default_factory=DFSpec)
    stability: StabilitySpec = field(default_factory=StabilitySpec)

    def to_dict(self):
        def strip(d):
            return {k: v for k, v in d.items() if v is not None}
        out = {"name": self.name, "plant": strip(asdict(self.plant))}
        if self.linear_controller is not None:
            out["linear_controller"] = strip(asdict(self.linear_controller))
        out["reset_element"] = asdict(self.reset_element)
        out["simulation"] = asdict(self.simulation)
        out["df"] = asdict(self.df)
        out["stability"] = asdict(self.stability)
        out["analyses"] = list(self.analyses)
        return out

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def system(self):
        """Assemble the closed loop described by this scenario."""
        return build_system(self)


def _section(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise SchemaViolation(f"{where} must be a mapping")
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise SchemaViolation(f"unknown key(s) in {where}: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise SchemaViolation(f"{where}: {exc}") from exc


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaViolation(f"{where} must be a number, got {x!r}")
    return float(x)


def _order(x, where):
    a = _number(x, where)
    if not 0.0 < a <= 1.0:
        raise SchemaViolation(f"{where} = {a} outside (0, 1]")
    return a


def _check_system(spec, where):
    tf = spec.num is not None or spec.den is not None
    ss = any(v is not None for v in (spec.A, spec.B, spec.C))
    if tf == ss:
        raise SchemaViolation(f"{where} needs either num/den or A/B/C")
    if tf and (spec.num is None or spec.den is None):
        raise SchemaViolation(f"{where} needs both num and den")
    if ss and any(v is None for v in (spec.A, spec.B, spec.C)):
        raise SchemaViolation(f"{where} needs A, B and C")
    spec.alpha = _order(spec.alpha, f"{where}.alpha")


def parse_scenario(data):
    """Validate a mapping and return a :class:`Scenario`."""
    if not isinstance(data, dict):
        raise SchemaViolation("scenario must be a mapping")
    allowed = {f.name for f in fields(Scenario)}
    unknown = set(data) - allowed
    if unknown:
        raise SchemaViolation(f"unknown top-level key(s): {sorted(unknown)}")
    for key in ("name", "plant", "reset_element", "analyses"):
        if key not in data:
            raise SchemaViolation(f"missing required key {key!r}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise SchemaViolation("name must be a non-empty string")

    plant = _section(SystemSpec, data["plant"], "plant")
    _check_system(plant, "plant")
    ctrl = None
    if data.get("linear_controller") is not None:
        ctrl = _section(SystemSpec, data["linear_controller"], "linear_controller")
        _check_system(ctrl, "linear_controller")

    el = _section(ElementSpec, data["reset_element"], "reset_element")
    if not isinstance(el.kind, str) or el.kind.upper() not in ELEMENT_KINDS:
        raise SchemaViolation(f"reset_element.kind must be one of {ELEMENT_KINDS}")
    el.kind = el.kind.upper()
    el.alpha = _order(el.alpha, "reset_element.alpha")
    el.K = _number(el.K, "reset_element.K")
    el.b = _number(el.b, "reset_element.b")
    if el.K == 0:
        raise SchemaViolation("reset_element.K must be nonzero")
    if not isinstance(el.reset_enabled, bool):
        raise SchemaViolation("reset_element.reset_enabled must be a boolean")

    sim = _section(SimulationSpec, data.get("simulation"), "simulation")
    sim.step = _number(sim.step, "simulation.step")
    sim.horizon = _number(sim.horizon, "simulation.horizon")
    sim.tolerance = _number(sim.tolerance, "simulation.tolerance")
    if not 0 < sim.step < sim.horizon:
        raise SchemaViolation("simulation needs 0 < step < horizon")
    if sim.memory_mode not in {m.value for m in MemoryMode}:
        raise SchemaViolation(f"simulation.memory_mode must be one of "
                              f"{[m.value for m in MemoryMode]}")
    if isinstance(sim.reference, dict):
        if set(sim.reference) != {"amplitude", "omega"}:
            raise SchemaViolation("simulation.reference sinusoid needs exactly amplitude, omega")
    else:
        sim.reference = _number(sim.reference, "simulation.reference")

    df = _section(DFSpec, data.get("df"), "df")
    if not df.omegas or any(_number(w, "df.omegas") <= 0 for w in df.omegas):
        raise SchemaViolation("df.omegas must be a non-empty list of positive numbers")

    stab = _section(StabilitySpec, data.get("stability"), "stability")
    if len(stab.beta_range) != 2 or stab.beta_range[0] >= stab.beta_range[1]:
        raise SchemaViolation("stability.beta_range must be [lo, hi] with lo < hi")
    if _number(stab.P_R, "stability.P_R") <= 0:
        raise SchemaViolation("stability.P_R must be positive")

    analyses = data["analyses"]
    if not isinstance(analyses, list) or not analyses:
        raise SchemaViolation("analyses must be a non-empty list")
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise SchemaViolation(f"unknown analyses {bad}; choose from {ANALYSES}")

    return Scenario(name, plant, el, list(analyses), ctrl, sim, df, stab)


def load_scenario(path):
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaViolation(f"{path}: not valid YAML: {exc}") from exc
    return parse_scenario(data)


def _fold_controller(plant, ctrl):
    """Multiply a non-strictly-proper controller into a transfer-function plant."""
    if not plant.is_tf or not ctrl.is_tf:
        raise SchemaViolation("improper controllers can only be folded into transfer-function plants")
    num = np.polymul(ctrl.num, plant.num)
    den = np.polymul(ctrl.den, plant.den)
    return tf_to_ss(num, den, plant.alpha)


def build_system(scn):
    el = scn.reset_element.element()
    plant = scn.plant.model() if scn.linear_controller is None else None
    ctrl = None
    if scn.linear_controller is not None:
        c = scn.linear_controller
        strictly_proper = c.is_tf and len(np.trim_zeros(np.atleast_1d(c.num), "f")) < \
            len(np.trim_zeros(np.atleast_1d(c.den), "f"))
        if c.is_tf and not strictly_proper:
            plant = _fold_controller(scn.plant, c)
        else:
            plant = scn.plant.model()
            ctrl = c.model()
    orders = [plant.alpha, el.alpha] + ([ctrl.alpha] if ctrl is not None else [])
    alpha = common_order(*orders)
    plant = to_order(plant, alpha)
    if ctrl is not None:
        ctrl = to_order(ctrl, alpha)
    rmodel = to_order(el.model(), alpha)
    # an element refined to a finer common order resets all of its states
    rule = ResetRule(n_reset=rmodel.n) if el.resets else ResetRule(n_reset=0, n_keep=rmodel.n)
    sys = assemble_closed_loop(plant, ctrl, rmodel, rule)
    if not (scn.reset_element.reset_enabled and el.resets):
        sys = sys.without_reset()
    return sys
