# DOT diagrams for the three levels: static TM model, event regions, behavior graph
# Emission walks sorted collections only, so the same inputs always give byte-identical text

from itertools import count
from typing import Iterable, List, Literal, Optional, Set

import graphviz
from pydantic import BaseModel, ConfigDict

from behavior_model import BehaviorGraph, EdgeKind
from event_regions import EventDef, MemberKind
from tm_errors import MissingInput
from tm_model import STORAGE, Machine, StaticModel

VIEWS = ("static", "events", "behavior")


class RenderView(BaseModel):
    model_config = ConfigDict(frozen=True)

    view: Literal["static", "events", "behavior"] = "static"
    show_storage: bool = True
    condition_labels: bool = True


# no ":" in node ids, graphviz reads it as a port separator in edges
def stage_node(machine_id: str, ref: str, scope: str = "") -> str:
    node = f"{machine_id}.{ref}"
    return f"{scope}@{node}" if scope else node


def dot_text(text: str) -> str:
    """Free text as a literal DOT string: backslashes doubled, newlines as \\n, never an HTML label"""
    return graphviz.nohtml(text.replace("\\", "\\\\").replace("\n", "\\n"))


class DotGenerator:
    """Builds graphviz digraphs for one static model and its optional events and behavior graph"""

    def __init__(self, model: StaticModel, options: RenderView):
        self.model = model
        self.options = options
        self._clusters = count()

    def cluster_name(self) -> str:
        return f"cluster_{next(self._clusters)}"

    def stage_label(self, machine: Machine, ref: str) -> str:
        stage = machine.stage(ref)
        if stage is not None and stage.decreate:
            return f"{ref} (decreate)"
        return ref

    def element_refs(self, machine: Machine) -> List[str]:
        refs = machine.element_refs()
        if not self.options.show_storage:
            refs = [ref for ref in refs if ref != STORAGE]
        return refs

    def add_element(self, graph: graphviz.Digraph, machine: Machine, ref: str, scope: str = "") -> None:
        label = self.stage_label(machine, ref)
        if scope:
            label = f"{machine.name}.{label}"
        if ref == STORAGE:
            graph.node(stage_node(machine.id, ref, scope), label=label, shape="cylinder")
        else:
            graph.node(stage_node(machine.id, ref, scope), label=label)

    def add_machine(self, parent: graphviz.Digraph, machine: Machine) -> None:
        with parent.subgraph(name=self.cluster_name()) as cluster:
            cluster.attr(label=machine.name, tooltip=machine.role.value)
            for ref in self.element_refs(machine):
                self.add_element(cluster, machine, ref)
            for child in sorted(self.model.children(machine.id), key=lambda m: m.name):
                self.add_machine(cluster, child)

    def add_arcs(self, graph: graphviz.Digraph, visible: Optional[Set[str]] = None, scope: str = "") -> None:
        """Flows solid, triggers dashed; arcs with an endpoint outside `visible` are skipped"""

        def shown(endpoint) -> bool:
            node = stage_node(endpoint.machine, endpoint.stage)
            if visible is not None:
                return node in visible
            if not self.declared(node):
                return False
            return endpoint.stage != STORAGE or self.options.show_storage

        for kind, arc in self.model.arcs():
            if not (shown(arc.source) and shown(arc.target)):
                continue
            source = stage_node(arc.source.machine, arc.source.stage, scope)
            target = stage_node(arc.target.machine, arc.target.stage, scope)
            if kind == "flow":
                if arc.label is not None:
                    graph.edge(source, target, label=dot_text(arc.label))
                else:
                    graph.edge(source, target)
            elif arc.condition is not None and self.options.condition_labels:
                graph.edge(source, target, style="dashed", label=dot_text(arc.condition))
            else:
                graph.edge(source, target, style="dashed")

    def generate_static(self) -> graphviz.Digraph:
        graph = graphviz.Digraph("tm_static", graph_attr={"rankdir": "LR"})
        for root in sorted(self.model.roots(), key=lambda m: m.name):
            self.add_machine(graph, root)
        self.add_arcs(graph)
        return graph

    def generate_events(self, events: Iterable[EventDef]) -> graphviz.Digraph:
        graph = graphviz.Digraph("tm_events", graph_attr={"rankdir": "LR"})
        for event in sorted(events, key=EventDef.sort_key):
            with graph.subgraph(name=self.cluster_name()) as cluster:
                cluster.attr(label=event.id, tooltip=dot_text(event.description), style="filled", fillcolor="lightgrey")
                self.add_region(cluster, event)
        return graph

    def add_region(self, cluster: graphviz.Digraph, event: EventDef) -> None:
        """Copies of the member elements, scoped by event id, and the static arcs among them"""
        scope = event.id
        elements: Set[str] = set()
        machines: List[str] = []
        for member in event.region:
            if member.kind is MemberKind.MACHINE:
                machines.append(member.machine)
                continue
            endpoints = [member.source] if member.kind is MemberKind.ELEMENT else [member.source, member.target]
            for endpoint in endpoints:
                elements.add(stage_node(endpoint.machine, endpoint.stage))

        for machine_id in machines:
            machine = self.model.machines.get(machine_id)
            label = machine.name if machine else machine_id
            cluster.node(f"{scope}@{machine_id}", label=label, shape="box")
        shown = sorted(
            node
            for node in elements
            if self.declared(node) and (self.options.show_storage or not node.endswith(f".{STORAGE}"))
        )
        for node in shown:
            machine_id, _, ref = node.partition(".")
            self.add_element(cluster, self.model.machines[machine_id], ref, scope)
        self.add_arcs(cluster, visible=set(shown), scope=scope)
        for node in shown:
            machine_id = node.partition(".")[0]
            if machine_id in machines:
                cluster.edge(f"{scope}@{node}", f"{scope}@{machine_id}", style="dotted", arrowhead="none")

    def declared(self, node: str) -> bool:
        machine_id, _, ref = node.partition(".")
        machine = self.model.machines.get(machine_id)
        return machine is not None and machine.has_element(ref)

    def generate_behavior(self, behavior: BehaviorGraph) -> graphviz.Digraph:
        graph = graphviz.Digraph("tm_behavior", graph_attr={"rankdir": "LR"})
        for event in behavior.events.values():
            graph.node(event.id, label=event.id, tooltip=dot_text(event.description))
        for edge in behavior.edges:
            if edge.kind is EdgeKind.TRIGGER:
                graph.edge(edge.source, edge.target, style="dashed")
            else:
                graph.edge(edge.source, edge.target)
        return graph


def emit_dot(
    model: StaticModel,
    events: Optional[Iterable[EventDef]] = None,
    behavior: Optional[BehaviorGraph] = None,
    view: Optional[RenderView] = None,
) -> str:
    """DOT text for the chosen view; the events view falls back to the behavior graph's events"""
    view = view or RenderView()
    generator = DotGenerator(model, view)
    if view.view == "static":
        return generator.generate_static().source
    if view.view == "events":
        if events is None and behavior is not None:
            events = list(behavior.events.values())
        if events is None:
            raise MissingInput("events", "event definitions")
        return generator.generate_events(events).source
    if behavior is None:
        raise MissingInput("behavior", "a behavior graph")
    return generator.generate_behavior(behavior).source
