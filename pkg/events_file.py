# Events files: event regions, behavior edges and method paths over a parsed static model
#
#   event E1 "operator requests an invoice" = { Operator.create, Operator.create -> Operator.release }
#   edge E1 -> E2 trigger
#   method Createinvoice = E1 -> E2

from typing import Dict, List, Optional, Tuple

from behavior_model import BehaviorEdge, BehaviorGraph, EdgeKind, build_behavior
from dsl_lexer import Token, TokenStream, quote
from event_regions import EventDef, RegionMember
from tm_errors import DuplicateEventId, DuplicateName, ParseError, UnknownReference
from tm_format import resolve_endpoint, resolve_machine
from tm_model import StaticModel

HEADER = "# events model"
EDGE_KINDS = [kind.value for kind in EdgeKind]


class EventsParser:
    """Parses an events file and resolves every reference against the static model"""

    def __init__(self, text: str, model: StaticModel):
        self.stream = TokenStream(text)
        self.model = model
        self.events: Dict[str, EventDef] = {}
        self.edges: List[Tuple[Token, Token, EdgeKind]] = []
        self.methods: Dict[str, List[Token]] = {}

    def parse(self) -> Tuple[List[EventDef], BehaviorGraph]:
        stream = self.stream
        stream.skip_separators()
        while not stream.at("eof"):
            if stream.accept("word", "event"):
                self.parse_event()
            elif stream.accept("word", "edge"):
                self.parse_edge()
            elif stream.accept("word", "method"):
                self.parse_method()
            else:
                raise stream.error(f"unexpected {stream.peek().value!r}; expected event, edge or method")
            stream.skip_separators()
        return self.resolve()

    def expect_event_id(self) -> Token:
        token = self.stream.expect("word", what="event id")
        if "/" in token.value or "." in token.value:
            raise self.stream.error(f"event id must be a simple name, found '{token.value}'", token)
        return token

    def parse_event(self) -> None:
        stream = self.stream
        id_token = self.expect_event_id()
        if id_token.value in self.events:
            raise DuplicateEventId(id_token.value, id_token.line, id_token.column)
        description_token = stream.accept("string")
        stream.expect("punct", "=")
        stream.expect("punct", "{")
        members: List[RegionMember] = []
        self.skip_newlines()
        while not stream.accept("punct", "}"):
            members.append(self.parse_member())
            self.skip_newlines()
            if stream.accept("punct", ","):
                self.skip_newlines()
            elif not stream.at("punct", "}"):
                raise stream.error(f"expected ',' or '}}', found {stream.peek().value!r}")
        self.events[id_token.value] = EventDef(
            id=id_token.value,
            description=description_token.value if description_token else "",
            region=tuple(members),
        )

    def skip_newlines(self) -> None:
        while self.stream.accept("newline"):
            pass

    def parse_member(self) -> RegionMember:
        stream = self.stream
        first = stream.expect("word", what="machine, stage or arc")
        if stream.accept("arrow"):
            second = stream.expect("word", what="<machine>.<stage>")
            return self.resolve_arc(first, second)
        if "." in first.value:
            endpoint = resolve_endpoint(self.model.machines, first.value, first)
            return RegionMember.of_element(endpoint.machine, endpoint.stage)
        return RegionMember.of_machine(resolve_machine(self.model.machines, first.value, first))

    def resolve_arc(self, first: Token, second: Token) -> RegionMember:
        source = resolve_endpoint(self.model.machines, first.value, first)
        target = resolve_endpoint(self.model.machines, second.value, second)
        if any(flow.source == source and flow.target == target for flow in self.model.flows):
            return RegionMember.of_arc(source, target, "flow")
        if any(trigger.source == source and trigger.target == target for trigger in self.model.triggers):
            return RegionMember.of_arc(source, target, "trigger")
        raise UnknownReference(f"{source} -> {target}", first.line, first.column)

    def parse_edge(self) -> None:
        stream = self.stream
        source = self.expect_event_id()
        stream.expect("arrow")
        target = self.expect_event_id()
        kind = EdgeKind.SEQUENCE
        if stream.at("word") and stream.peek().value in EDGE_KINDS:
            kind = EdgeKind(stream.advance().value)
        self.edges.append((source, target, kind))

    def parse_method(self) -> None:
        stream = self.stream
        name = stream.expect("word", what="method name")
        if name.value in self.methods:
            raise DuplicateName(name.value, name.line, name.column)
        stream.expect("punct", "=")
        path = [self.expect_event_id()]
        while stream.accept("arrow"):
            path.append(self.expect_event_id())
        self.methods[name.value] = path

    def check_declared(self, token: Token) -> str:
        if token.value not in self.events:
            raise UnknownReference(token.value, token.line, token.column)
        return token.value

    def resolve(self) -> Tuple[List[EventDef], BehaviorGraph]:
        edges = [
            BehaviorEdge(source=self.check_declared(source), target=self.check_declared(target), kind=kind)
            for source, target, kind in self.edges
        ]
        methods = {name: [self.check_declared(token) for token in path] for name, path in self.methods.items()}
        events = sorted(self.events.values(), key=EventDef.sort_key)
        # broken method paths are reported by check_method_paths, not raised here
        graph = build_behavior(events, edges, methods, strict=False)
        return events, graph


def parse_events(text: str, model: StaticModel, source: Optional[str] = None) -> Tuple[List[EventDef], BehaviorGraph]:
    """Events in natural id order and the behavior graph they form"""
    try:
        return EventsParser(text, model).parse()
    except ParseError as exc:
        if source:
            exc.with_source(source)
        raise


def print_events(graph: BehaviorGraph) -> str:
    lines = [HEADER]
    for event in graph.events.values():
        members = ", ".join(member.text() for member in event.region)
        body = f"{{ {members} }}" if members else "{ }"
        lines.append(f"event {event.id} {quote(event.description)} = {body}")
    for edge in graph.edges:
        suffix = f" {edge.kind.value}" if edge.kind is EdgeKind.TRIGGER else ""
        lines.append(f"edge {edge.source} -> {edge.target}{suffix}")
    for name in sorted(graph.methods):
        lines.append(f"method {name} = " + " -> ".join(graph.methods[name]))
    return "\n".join(lines) + "\n"
