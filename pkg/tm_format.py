# Textual form of TM static models: parse_tm / print_tm
# print_tm is canonical (sorted machines, sorted arcs, name paths in arcs) so parse_tm(print_tm(m)) == m

from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from dsl_lexer import Token, TokenStream, quote
from tm_errors import AmbiguousReference, DuplicateName, ParseError, UnknownReference
from tm_model import (
    STAGE_REFS,
    STORAGE,
    Endpoint,
    FlowArc,
    Machine,
    MachineRole,
    Stage,
    StaticModel,
    TriggerArc,
    child_id,
)

HEADER = "# thinging machine model"
ROLES = [role.value for role in MachineRole]


def resolve_machine(model_machines: Dict[str, Machine], name: str, token: Optional[Token] = None) -> str:
    """Full id, or a simple name that is unique in the model"""
    line, column = (token.line, token.column) if token else (0, 0)
    if name in model_machines:
        return name
    if "/" not in name:
        candidates = sorted(mid for mid, m in model_machines.items() if m.name == name)
        if len(candidates) == 1:
            return candidates[0]
        if candidates:
            raise AmbiguousReference(name, candidates, line, column)
    raise UnknownReference(name, line, column)


def resolve_stage(machine: Machine, stage: str, token: Optional[Token] = None) -> str:
    line, column = (token.line, token.column) if token else (0, 0)
    ref = stage.lower()
    if ref == "transfer":
        ports = [s.ref for s in machine.stages if s.ref.startswith("transfer.")]
        ports = list(dict.fromkeys(ports))
        if len(ports) == 1:
            return ports[0]
        raise UnknownReference(f"{machine.id}.transfer", line, column)
    if ref not in STAGE_REFS and ref != STORAGE:
        raise ParseError(f"unknown stage '{stage}'", line, column)
    if not machine.has_element(ref):
        raise UnknownReference(f"{machine.id}.{ref}", line, column)
    return ref


def resolve_endpoint(machines: Dict[str, Machine], text: str, token: Optional[Token] = None) -> Endpoint:
    machine_part, dot, stage_part = text.partition(".")
    if not dot or not stage_part:
        line, column = (token.line, token.column) if token else (0, 0)
        raise ParseError(f"expected <machine>.<stage>, found '{text}'", line, column)
    machine_id = resolve_machine(machines, machine_part, token)
    return Endpoint.of(machine_id, resolve_stage(machines[machine_id], stage_part, token))


class TMParser:
    """Recursive-descent parser for the TM file format"""

    def __init__(self, text: str):
        self.stream = TokenStream(text)
        self.machines: Dict[str, Machine] = {}
        self.pending_flows: List[Tuple[Token, Token, Optional[str]]] = []
        self.pending_triggers: List[Tuple[Token, Token, Optional[str]]] = []
        self.methods: List[str] = []

    def parse(self) -> StaticModel:
        stream = self.stream
        stream.skip_separators()
        while not stream.at("eof"):
            token = stream.peek()
            if stream.at_keyword("machine"):
                self.parse_machine(None)
            elif stream.at_keyword("flow"):
                stream.advance()
                self.pending_flows.append(self.parse_arc("label"))
            elif stream.at_keyword("trigger"):
                stream.advance()
                self.pending_triggers.append(self.parse_arc("when"))
            elif stream.at_keyword("method"):
                stream.advance()
                self.methods.append(self.expect_name("method name").value)
            else:
                raise stream.error(f"unexpected {token.value!r}; expected machine, flow, trigger or method")
            stream.skip_separators()
        return self.resolve()

    def expect_name(self, what: str) -> Token:
        token = self.stream.expect("word", what=what)
        if "/" in token.value or "." in token.value:
            raise self.stream.error(f"{what} must be a simple name, found '{token.value}'", token)
        return token

    def parse_machine(self, parent: Optional[str]) -> None:
        stream = self.stream
        stream.expect("word", "machine")
        name_token = self.expect_name("machine name")
        role = MachineRole.GENERIC
        if stream.accept("word", "role"):
            role_token = stream.expect("word", what="role")
            if role_token.value not in ROLES:
                raise stream.error(f"unknown role '{role_token.value}'", role_token)
            role = MachineRole(role_token.value)
        machine_id = child_id(parent, name_token.value)
        if machine_id in self.machines:
            raise DuplicateName(machine_id, name_token.line, name_token.column)
        # reserve the id so nested machines see their parent
        self.machines[machine_id] = Machine(id=machine_id, name=name_token.value, role=role, parent=parent)
        stages: List[Stage] = []
        storage = 0
        stream.expect("punct", "{")
        stream.skip_separators()
        while not stream.accept("punct", "}"):
            if stream.at("eof"):
                raise stream.error(f"unterminated machine '{machine_id}'")
            if stream.accept("word", "stage"):
                stages.append(self.parse_stage())
            elif stream.accept("word", "storage"):
                storage += 1
            elif stream.at_keyword("machine"):
                self.parse_machine(machine_id)
            else:
                raise stream.error(f"unexpected {stream.peek().value!r} in machine body")
            stream.skip_separators()
        self.machines[machine_id] = Machine(
            id=machine_id, name=name_token.value, role=role, parent=parent, stages=tuple(stages), storage=storage
        )

    def parse_stage(self) -> Stage:
        token = self.stream.expect("word", what="stage kind")
        decreate = self.stream.accept("word", "decreate") is not None
        try:
            return Stage.from_ref(token.value, decreate=decreate)
        except (ValueError, ValidationError) as exc:
            raise self.stream.error(f"invalid stage '{token.value}': {first_line(exc)}", token)

    def parse_arc(self, option: str) -> Tuple[Token, Token, Optional[str]]:
        stream = self.stream
        source = stream.expect("word", what="<machine>.<stage>")
        stream.expect("arrow")
        target = stream.expect("word", what="<machine>.<stage>")
        text = None
        if stream.accept("word", option):
            text = stream.expect("string", what=f"quoted {option} text").value
        return source, target, text

    def resolve(self) -> StaticModel:
        flows = [
            FlowArc(
                source=resolve_endpoint(self.machines, src.value, src),
                target=resolve_endpoint(self.machines, dst.value, dst),
                label=label,
            )
            for src, dst, label in self.pending_flows
        ]
        triggers = [
            TriggerArc(
                source=resolve_endpoint(self.machines, src.value, src),
                target=resolve_endpoint(self.machines, dst.value, dst),
                condition=condition,
            )
            for src, dst, condition in self.pending_triggers
        ]
        return StaticModel(
            machines=self.machines, flows=tuple(flows), triggers=tuple(triggers), declared_methods=tuple(self.methods)
        )


def first_line(exc: Exception) -> str:
    return str(exc).strip().splitlines()[-1].strip()


def parse_tm(text: str, source: Optional[str] = None) -> StaticModel:
    """Parse TM text; ParseError/UnknownReference carry line and column"""
    try:
        return TMParser(text).parse()
    except ParseError as exc:
        if source:
            exc.with_source(source)
        raise


def print_tm(model: StaticModel) -> str:
    lines = [HEADER]

    def emit_machine(machine: Machine, depth: int) -> None:
        pad = "  " * depth
        body: List[str] = []
        for stage in machine.stages:
            body.append(f"{pad}  stage {stage.ref}" + (" decreate" if stage.decreate else ""))
        body.extend(f"{pad}  storage" for _ in range(machine.storage))
        children = sorted(model.children(machine.id), key=lambda m: m.name)
        header = f"{pad}machine {machine.name} role {machine.role.value} {{"
        if not body and not children:
            lines.append(header + " }")
            return
        lines.append(header)
        lines.extend(body)
        for child in children:
            emit_machine(child, depth + 1)
        lines.append(f"{pad}}}")

    for root in sorted(model.roots(), key=lambda m: m.name):
        emit_machine(root, 0)

    def endpoint_text(endpoint: Endpoint) -> str:
        return f"{model.name_path(endpoint.machine)}.{endpoint.stage}"

    flows = sorted(model.flows, key=lambda f: (endpoint_key(model, f.source), endpoint_key(model, f.target), f.label or ""))
    for flow in flows:
        suffix = f" label {quote(flow.label)}" if flow.label is not None else ""
        lines.append(f"flow {endpoint_text(flow.source)} -> {endpoint_text(flow.target)}{suffix}")
    triggers = sorted(
        model.triggers, key=lambda t: (endpoint_key(model, t.source), endpoint_key(model, t.target), t.condition or "")
    )
    for trigger in triggers:
        suffix = f" when {quote(trigger.condition)}" if trigger.condition is not None else ""
        lines.append(f"trigger {endpoint_text(trigger.source)} -> {endpoint_text(trigger.target)}{suffix}")
    lines.extend(f"method {name}" for name in model.declared_methods)
    return "\n".join(lines) + "\n"


def endpoint_key(model: StaticModel, endpoint: Endpoint) -> Tuple[str, int]:
    order = STAGE_REFS.index(endpoint.stage) if endpoint.stage in STAGE_REFS else len(STAGE_REFS)
    return model.name_path(endpoint.machine), order
