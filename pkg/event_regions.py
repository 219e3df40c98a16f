# Events as regions of the static model, and the checks that keep regions meaningful
# Regions point into the static model; the static model never points back at events

import re
from enum import Enum
from typing import Any, Iterable, List, Optional, Set, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from tm_model import STORAGE, Endpoint, Finding, Severity, StaticModel, ValidationReport
from tm_validator import UNDECLARED_REF

REGION_EMPTY = "REGION_EMPTY"
REGION_DISCONNECTED = "REGION_DISCONNECTED"
UNCOVERED_ELEMENT = "UNCOVERED_ELEMENT"

Node = Tuple[str, ...]


def natural_key(event_id: str) -> Tuple[Any, ...]:
    """E2 sorts before E10"""
    parts = re.split(r"(\d+)", event_id)
    return tuple(int(part) if index % 2 else part for index, part in enumerate(parts))


class MemberKind(str, Enum):
    MACHINE = "machine"
    ELEMENT = "element"
    ARC = "arc"


class RegionMember(BaseModel):
    """A machine, one of its stages (or its storage), or a flow/trigger of the static model"""

    model_config = ConfigDict(frozen=True)

    kind: MemberKind
    machine: str
    stage: Optional[str] = None
    target: Optional[Endpoint] = None
    # "flow" or "trigger" for arc members
    arc: Optional[str] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "RegionMember":
        if (self.kind is MemberKind.MACHINE) != (self.stage is None):
            raise ValueError("only machine members come without a stage")
        if (self.kind is MemberKind.ARC) != (self.target is not None and self.arc in ("flow", "trigger")):
            raise ValueError("arc members need a target and an arc kind")
        return self

    @classmethod
    def of_machine(cls, machine: str) -> "RegionMember":
        return cls(kind=MemberKind.MACHINE, machine=machine)

    @classmethod
    def of_element(cls, machine: str, stage: str) -> "RegionMember":
        return cls(kind=MemberKind.ELEMENT, machine=machine, stage=stage)

    @classmethod
    def of_arc(cls, source: Endpoint, target: Endpoint, arc: str = "flow") -> "RegionMember":
        return cls(kind=MemberKind.ARC, machine=source.machine, stage=source.stage, target=target, arc=arc)

    @property
    def source(self) -> Optional[Endpoint]:
        return Endpoint.of(self.machine, self.stage) if self.stage is not None else None

    def node(self) -> Node:
        if self.kind is MemberKind.MACHINE:
            return ("machine", self.machine)
        if self.kind is MemberKind.ELEMENT:
            return ("element", self.machine, self.stage)
        return ("arc", self.arc, str(self.source), str(self.target))

    def text(self) -> str:
        if self.kind is MemberKind.MACHINE:
            return self.machine
        if self.kind is MemberKind.ELEMENT:
            return str(self.source)
        return f"{self.source} -> {self.target}"

    def sort_key(self) -> Tuple[Any, ...]:
        return self.machine, self.stage or "", str(self.target or ""), self.arc or ""


class EventDef(BaseModel):
    """One event: an id, a description and the region of the static model it occupies"""

    model_config = ConfigDict(frozen=True)

    id: str
    description: str = ""
    region: Tuple[RegionMember, ...] = ()

    @field_validator("region")
    @classmethod
    def _sort_region(cls, region: Tuple[RegionMember, ...]) -> Tuple[RegionMember, ...]:
        return tuple(sorted(dict.fromkeys(region), key=RegionMember.sort_key))

    def sort_key(self) -> Tuple[Any, ...]:
        return natural_key(self.id)


class RegionValidator:
    """Reports empty, disconnected and unresolved regions plus static elements no region covers"""

    def validate(self, model: StaticModel, events: Iterable[EventDef]) -> ValidationReport:
        events = sorted(events, key=EventDef.sort_key)
        findings: List[Finding] = []
        for event in events:
            findings.extend(self.check_region(model, event))
        findings.extend(self.check_coverage(model, events))
        return ValidationReport(findings=tuple(findings))

    def check_region(self, model: StaticModel, event: EventDef) -> List[Finding]:
        if not event.region:
            return [
                Finding(severity=Severity.ERROR, code=REGION_EMPTY, location=event.id, message="region has no members")
            ]
        unresolved = [member for member in event.region if not member_resolves(model, member)]
        if unresolved:
            return [
                Finding(
                    severity=Severity.ERROR,
                    code=UNDECLARED_REF,
                    location=event.id,
                    message=f"'{member.text()}' is not part of the static model",
                )
                for member in unresolved
            ]
        components = nx.number_connected_components(region_graph(model, event.region))
        if components > 1:
            return [
                Finding(
                    severity=Severity.ERROR,
                    code=REGION_DISCONNECTED,
                    location=event.id,
                    message=f"region splits into {components} components",
                )
            ]
        return []

    def check_coverage(self, model: StaticModel, events: List[EventDef]) -> List[Finding]:
        covered_machines: Set[str] = set()
        covered_elements: Set[Tuple[str, str]] = set()
        for event in events:
            for member in event.region:
                if member.kind is MemberKind.MACHINE:
                    covered_machines.add(member.machine)
                elif member.kind is MemberKind.ELEMENT:
                    covered_elements.add((member.machine, member.stage))

        findings = []
        for machine in model.machines.values():
            own = machine.id in covered_machines
            refs = machine.element_refs()
            if not own and not any((machine.id, ref) in covered_elements for ref in refs):
                findings.append(self._uncovered(machine.id, "machine"))
            if own:
                continue
            for ref in refs:
                if (machine.id, ref) not in covered_elements:
                    findings.append(self._uncovered(f"{machine.id}.{ref}", "storage" if ref == STORAGE else "stage"))
        return findings

    def _uncovered(self, location: str, what: str) -> Finding:
        return Finding(
            severity=Severity.WARNING, code=UNCOVERED_ELEMENT, location=location, message=f"{what} is in no event region"
        )


def member_resolves(model: StaticModel, member: RegionMember) -> bool:
    machine = model.machines.get(member.machine)
    if machine is None:
        return False
    if member.kind is MemberKind.MACHINE:
        return True
    if not machine.has_element(member.stage):
        return False
    if member.kind is MemberKind.ELEMENT:
        return True
    arcs = model.flows if member.arc == "flow" else model.triggers
    return any(arc.source == member.source and arc.target == member.target for arc in arcs)


def region_graph(model: StaticModel, region: Iterable[RegionMember]) -> nx.Graph:
    """Undirected graph over the members: stage-machine, machine-parent, static arcs and member arcs"""
    members = list(region)
    graph = nx.Graph()
    graph.add_nodes_from(member.node() for member in members)
    machines = {m.machine for m in members if m.kind is MemberKind.MACHINE}
    elements = {(m.machine, m.stage) for m in members if m.kind is MemberKind.ELEMENT}

    def attach(endpoint: Endpoint) -> List[Node]:
        nodes = []
        if (endpoint.machine, endpoint.stage) in elements:
            nodes.append(("element", endpoint.machine, endpoint.stage))
        if endpoint.machine in machines:
            nodes.append(("machine", endpoint.machine))
        return nodes

    for machine_id, stage in elements:
        if machine_id in machines:
            graph.add_edge(("element", machine_id, stage), ("machine", machine_id))
    for machine_id in machines:
        parent = model.machines[machine_id].parent if machine_id in model.machines else None
        if parent in machines:
            graph.add_edge(("machine", machine_id), ("machine", parent))
    for _, arc in model.arcs():
        for left in attach(arc.source):
            for right in attach(arc.target):
                if left != right:
                    graph.add_edge(left, right)
    for member in members:
        if member.kind is MemberKind.ARC:
            for endpoint in (member.source, member.target):
                for node in attach(endpoint):
                    graph.add_edge(member.node(), node)
    return graph


_default_validator = RegionValidator()


def validate_regions(model: StaticModel, events: Iterable[EventDef]) -> ValidationReport:
    return _default_validator.validate(model, events)
