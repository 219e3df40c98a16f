# Behavior level: events linked by successor edges, class methods as event paths, seeded traces
# Graph construction is pure; simulate keeps no state between calls

import random
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, field_validator

from event_regions import EventDef, natural_key
from tm_errors import DuplicateEventId, EmptyStartSet, ParseError, PathBroken, UnknownEvent
from tm_model import Finding, Severity, ValidationReport

PATH_BROKEN = "PATH_BROKEN"
UNREACHABLE_EVENT = "UNREACHABLE_EVENT"
TRACE_HEADER = "# seed="


class EdgeKind(str, Enum):
    SEQUENCE = "sequence"
    TRIGGER = "trigger"


class BehaviorEdge(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str
    target: str
    kind: EdgeKind = EdgeKind.SEQUENCE

    def sort_key(self) -> Tuple[Any, ...]:
        return natural_key(self.source), natural_key(self.target), self.kind.value


class BehaviorGraph(BaseModel):
    """Events, their permitted successions and the method bindings"""

    model_config = ConfigDict(frozen=True)

    events: Dict[str, EventDef] = Field(default_factory=dict)
    edges: Tuple[BehaviorEdge, ...] = ()
    methods: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)

    @field_validator("events", mode="before")
    @classmethod
    def _index_events(cls, events: Any) -> Any:
        if isinstance(events, (list, tuple)):
            return {event.id: event for event in events}
        return events

    @field_validator("events")
    @classmethod
    def _sort_events(cls, events: Dict[str, EventDef]) -> Dict[str, EventDef]:
        return dict(sorted(events.items(), key=lambda item: natural_key(item[0])))

    @field_validator("edges")
    @classmethod
    def _sort_edges(cls, edges: Tuple[BehaviorEdge, ...]) -> Tuple[BehaviorEdge, ...]:
        return tuple(sorted(dict.fromkeys(edges), key=BehaviorEdge.sort_key))

    def event_ids(self) -> List[str]:
        return list(self.events)

    def has_edge(self, source: str, target: str) -> bool:
        return any(edge.source == source and edge.target == target for edge in self.edges)

    def edge_pairs(self) -> Set[Tuple[str, str]]:
        return {(edge.source, edge.target) for edge in self.edges}

    def successors(self, event_id: str) -> List[str]:
        targets = {edge.target for edge in self.edges if edge.source == event_id}
        return sorted(targets, key=natural_key)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.events)
        for edge in self.edges:
            graph.add_edge(edge.source, edge.target, kind=edge.kind.value)
        return graph


class Trace(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    steps: Tuple[str, ...] = ()


EdgeSpec = Union[BehaviorEdge, Tuple[str, str], Tuple[str, str, str]]


def as_edge(item: EdgeSpec) -> BehaviorEdge:
    if isinstance(item, BehaviorEdge):
        return item
    if len(item) == 3:
        return BehaviorEdge(source=item[0], target=item[1], kind=EdgeKind(item[2]))
    return BehaviorEdge(source=item[0], target=item[1])


def build_behavior(
    events: Iterable[EventDef],
    edges: Iterable[EdgeSpec] = (),
    methods: Optional[Mapping[str, Sequence[str]]] = None,
    strict: bool = True,
) -> BehaviorGraph:
    """Assemble the graph; with strict=True every method path must follow existing edges"""
    indexed: Dict[str, EventDef] = {}
    for event in events:
        if event.id in indexed:
            raise DuplicateEventId(event.id)
        indexed[event.id] = event

    resolved = [as_edge(item) for item in edges]
    for edge in resolved:
        for event_id in (edge.source, edge.target):
            if event_id not in indexed:
                raise UnknownEvent(event_id, f"edge {edge.source} -> {edge.target}")

    paths: Dict[str, Tuple[str, ...]] = {}
    for name, path in (methods or {}).items():
        if not path:
            raise ValueError(f"method {name} has an empty event path")
        for event_id in path:
            if event_id not in indexed:
                raise UnknownEvent(event_id, f"method {name}")
        paths[name] = tuple(path)

    graph = BehaviorGraph(events=indexed, edges=tuple(resolved), methods=paths)
    if strict:
        breaks = method_path_breaks(graph)
        if breaks:
            raise PathBroken(breaks)
    return graph


def method_path_breaks(graph: BehaviorGraph) -> List[Tuple[str, str, str]]:
    pairs = graph.edge_pairs()
    breaks = []
    for name in sorted(graph.methods):
        path = graph.methods[name]
        for source, target in zip(path, path[1:]):
            if (source, target) not in pairs:
                breaks.append((name, source, target))
    return breaks


def check_method_paths(graph: BehaviorGraph) -> ValidationReport:
    findings = [
        Finding(severity=Severity.ERROR, code=PATH_BROKEN, location=name, message=f"no edge {source} -> {target}")
        for name, source, target in method_path_breaks(graph)
    ]
    return ValidationReport(findings=tuple(findings))


def reachable_events(graph: BehaviorGraph, start: Iterable[str]) -> List[str]:
    """Start events and everything reachable from them, in natural order"""
    digraph = graph.to_networkx()
    reached: Set[str] = set()
    for event_id in start:
        if event_id not in graph.events:
            raise UnknownEvent(event_id, "start set")
        reached.add(event_id)
        reached |= nx.descendants(digraph, event_id)
    return sorted(reached, key=natural_key)


def default_start(graph: BehaviorGraph) -> List[str]:
    """Events without predecessors; every event when the graph has none"""
    targets = {edge.target for edge in graph.edges}
    roots = [event_id for event_id in graph.events if event_id not in targets]
    return roots or graph.event_ids()


def simulate(graph: BehaviorGraph, start: Iterable[str], seed: int, max_steps: int) -> Trace:
    """Seeded walk: uniform choice of the start event, then of each successor, for at most max_steps moves"""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    candidates = sorted(set(start), key=natural_key)
    if not candidates:
        raise EmptyStartSet()
    for event_id in candidates:
        if event_id not in graph.events:
            raise UnknownEvent(event_id, "start set")

    rng = random.Random(seed)
    current = rng.choice(candidates)
    steps = [current]
    for _ in range(max_steps):
        successors = graph.successors(current)
        if not successors:
            break
        current = rng.choice(successors)
        steps.append(current)
    return Trace(seed=seed, steps=tuple(steps))


def recognize_methods(graph: BehaviorGraph, trace: Trace) -> List[Tuple[str, int]]:
    """Every contiguous occurrence of a method path, as (method, start index)"""
    steps = trace.steps
    found = []
    for name, path in graph.methods.items():
        width = len(path)
        for index in range(len(steps) - width + 1):
            if steps[index : index + width] == path:
                found.append((name, index))
    return sorted(found, key=lambda item: (item[1], item[0]))


def format_trace(trace: Trace) -> str:
    return f"{TRACE_HEADER}{trace.seed}\n" + "".join(f"{step}\n" for step in trace.steps)


def parse_trace(text: str, source: Optional[str] = None) -> Trace:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(TRACE_HEADER):
        raise ParseError(f"trace must start with '{TRACE_HEADER}<n>'", 1, 1, source)
    try:
        seed = int(lines[0][len(TRACE_HEADER) :].strip())
    except ValueError:
        raise ParseError("seed is not an integer", 1, len(TRACE_HEADER) + 1, source)
    steps = []
    for number, line in enumerate(lines[1:], start=2):
        value = line.strip()
        if not value:
            continue
        if " " in value or value.startswith("#"):
            raise ParseError(f"expected one event id per line, found '{value}'", number, 1, source)
        steps.append(value)
    return Trace(seed=seed, steps=tuple(steps))


def format_occurrences(occurrences: Iterable[Tuple[str, int]]) -> str:
    return "".join(f"{name} {index}\n" for name, index in occurrences)


def check_reachability(graph: BehaviorGraph, start: Optional[Iterable[str]] = None) -> ValidationReport:
    """Warnings for events no walk from the start set can reach"""
    start = list(start) if start is not None else default_start(graph)
    reached = set(reachable_events(graph, start)) if start else set()
    findings = [
        Finding(
            severity=Severity.WARNING,
            code=UNREACHABLE_EVENT,
            location=event_id,
            message="not reachable from " + ", ".join(sorted(start, key=natural_key)),
        )
        for event_id in graph.events
        if event_id not in reached
    ]
    return ValidationReport(findings=tuple(findings))
