# Thinging Machine static-model structures
# Machines nest through parent ids, stages are the five generic actions, arcs join (machine, stage) endpoints

from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StageKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    RECEIVE = "receive"
    TRANSFER = "transfer"


class Direction(str, Enum):
    IN = "in"
    OUT = "out"


class MachineRole(str, Enum):
    ACTOR_REGION = "actor-region"
    SUBJECT = "subject"
    USECASE = "usecase-machine"
    CLASS = "class-machine"
    ATTRIBUTE = "attribute-machine"
    GENERIC = "generic"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


# Canonical stage order, also the order of stage lines in printed TM files
STAGE_REFS = ["create", "process", "release", "receive", "transfer.in", "transfer.out"]
STORAGE = "storage"


class Stage(BaseModel):
    """One generic action of a machine"""

    model_config = ConfigDict(frozen=True)

    kind: StageKind
    direction: Optional[Direction] = None
    decreate: bool = False

    @model_validator(mode="after")
    def _check_kind_flags(self) -> "Stage":
        if (self.kind is StageKind.TRANSFER) != (self.direction is not None):
            raise ValueError("direction is required for transfer stages and forbidden otherwise")
        if self.decreate and self.kind is not StageKind.CREATE:
            raise ValueError("decreate is only allowed on create stages")
        return self

    @property
    def ref(self) -> str:
        if self.direction is not None:
            return f"{self.kind.value}.{self.direction.value}"
        return self.kind.value

    @classmethod
    def from_ref(cls, ref: str, decreate: bool = False) -> "Stage":
        kind, _, direction = ref.lower().partition(".")
        return cls(kind=StageKind(kind), direction=Direction(direction) if direction else None, decreate=decreate)

    def sort_key(self) -> Tuple[int, bool]:
        return STAGE_REFS.index(self.ref), self.decreate


class Machine(BaseModel):
    """A thimac: a thing that is at the same time a machine"""

    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    role: MachineRole = MachineRole.GENERIC
    parent: Optional[str] = None
    stages: Tuple[Stage, ...] = ()
    # number of declared storage nodes; more than one is reported, not rejected
    storage: int = Field(0, ge=0)

    @field_validator("stages")
    @classmethod
    def _sort_stages(cls, stages: Tuple[Stage, ...]) -> Tuple[Stage, ...]:
        return tuple(sorted(stages, key=Stage.sort_key))

    def stage(self, ref: str) -> Optional[Stage]:
        for stage in self.stages:
            if stage.ref == ref:
                return stage
        return None

    def has_element(self, ref: str) -> bool:
        if ref == STORAGE:
            return self.storage > 0
        return self.stage(ref) is not None

    def element_refs(self) -> List[str]:
        refs = list(dict.fromkeys(stage.ref for stage in self.stages))
        if self.storage:
            refs.append(STORAGE)
        return refs


class Endpoint(BaseModel):
    """A (machine id, stage ref) pair; the stage ref may be 'storage'"""

    model_config = ConfigDict(frozen=True)

    machine: str
    stage: str

    def __str__(self) -> str:
        return f"{self.machine}.{self.stage}"

    def sort_key(self) -> Tuple[str, int]:
        order = STAGE_REFS.index(self.stage) if self.stage in STAGE_REFS else len(STAGE_REFS)
        return self.machine, order

    @classmethod
    def of(cls, machine: str, stage: str) -> "Endpoint":
        return cls(machine=machine, stage=stage)


class FlowArc(BaseModel):
    """Solid arrow: a thing moves between stages"""

    model_config = ConfigDict(frozen=True)

    source: Endpoint
    target: Endpoint
    label: Optional[str] = None

    def sort_key(self) -> Tuple[Any, ...]:
        return self.source.sort_key(), self.target.sort_key(), self.label or ""

    def describe(self) -> str:
        return f"flow {self.source} -> {self.target}"


class TriggerArc(BaseModel):
    """Dashed arrow: starts a new flow, nothing moves along it"""

    model_config = ConfigDict(frozen=True)

    source: Endpoint
    target: Endpoint
    condition: Optional[str] = None

    def sort_key(self) -> Tuple[Any, ...]:
        return self.source.sort_key(), self.target.sort_key(), self.condition or ""

    def describe(self) -> str:
        return f"trigger {self.source} -> {self.target}"


class StaticModel(BaseModel):
    """The singular, time-free TM diagram"""

    model_config = ConfigDict(frozen=True)

    machines: Dict[str, Machine] = Field(default_factory=dict)
    flows: Tuple[FlowArc, ...] = ()
    triggers: Tuple[TriggerArc, ...] = ()
    declared_methods: Tuple[str, ...] = ()

    @field_validator("machines", mode="before")
    @classmethod
    def _index_machines(cls, machines: Any) -> Any:
        if isinstance(machines, (list, tuple)):
            return {machine.id: machine for machine in machines}
        return machines

    @field_validator("machines")
    @classmethod
    def _sort_machines(cls, machines: Dict[str, Machine]) -> Dict[str, Machine]:
        return dict(sorted(machines.items()))

    @field_validator("flows")
    @classmethod
    def _sort_flows(cls, flows: Tuple[FlowArc, ...]) -> Tuple[FlowArc, ...]:
        return tuple(sorted(flows, key=FlowArc.sort_key))

    @field_validator("triggers")
    @classmethod
    def _sort_triggers(cls, triggers: Tuple[TriggerArc, ...]) -> Tuple[TriggerArc, ...]:
        return tuple(sorted(triggers, key=TriggerArc.sort_key))

    def replace(self, **changes: Any) -> "StaticModel":
        """Copy with changed fields, re-running normalisation"""
        fields = {
            "machines": self.machines,
            "flows": self.flows,
            "triggers": self.triggers,
            "declared_methods": self.declared_methods,
        }
        fields.update(changes)
        return StaticModel(**fields)

    def roots(self) -> List[Machine]:
        return [m for m in self.machines.values() if m.parent is None or m.parent not in self.machines]

    def children(self, machine_id: Optional[str]) -> List[Machine]:
        return [m for m in self.machines.values() if m.parent == machine_id]

    def ancestors(self, machine_id: str) -> Iterator[str]:
        """Walk parent links upwards; stops on a cycle"""
        seen = {machine_id}
        current = self.machines.get(machine_id)
        while current is not None and current.parent is not None:
            if current.parent in seen:
                return
            seen.add(current.parent)
            yield current.parent
            current = self.machines.get(current.parent)

    def name_path(self, machine_id: str) -> str:
        """Names from the root down to the machine, independent of how ids were chosen"""
        machine = self.machines.get(machine_id)
        if machine is None:
            return machine_id
        names = [machine.name]
        for ancestor in self.ancestors(machine_id):
            parent = self.machines.get(ancestor)
            if parent is None:
                break
            names.append(parent.name)
        return "/".join(reversed(names))

    def machines_named(self, name: str) -> List[Machine]:
        return [m for m in self.machines.values() if m.name == name]

    def arcs(self) -> Iterator[Tuple[str, Any]]:
        for flow in self.flows:
            yield "flow", flow
        for trigger in self.triggers:
            yield "trigger", trigger


def child_id(parent_id: Optional[str], name: str) -> str:
    """Machine ids are containment paths: System/Invoice/ID"""
    return f"{parent_id}/{name}" if parent_id else name


class Finding(BaseModel):
    model_config = ConfigDict(frozen=True)

    severity: Severity
    code: str
    location: str
    message: str = ""

    def to_line(self) -> str:
        return f"{self.severity.value} {self.code} {self.location}: {self.message}"


class ValidationReport(BaseModel):
    """Coded findings, sorted by location then code"""

    model_config = ConfigDict(frozen=True)

    findings: Tuple[Finding, ...] = ()

    @field_validator("findings")
    @classmethod
    def _sort_findings(cls, findings: Tuple[Finding, ...]) -> Tuple[Finding, ...]:
        return tuple(sorted(findings, key=lambda f: (f.location, f.code, f.message)))

    @property
    def errors(self) -> List[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    @property
    def warnings(self) -> List[Finding]:
        return [f for f in self.findings if f.severity is Severity.WARNING]

    @property
    def has_errors(self) -> bool:
        return bool(self.errors)

    def codes(self) -> List[str]:
        return [f.code for f in self.findings]

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(findings=self.findings + other.findings)

    def to_text(self) -> str:
        return "".join(f"{finding.to_line()}\n" for finding in self.findings)

