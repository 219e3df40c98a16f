# TMUML rules: use-case model -> TM skeleton, class model -> TM fragments, merge into one static model
# Every rule is deterministic, so identical inputs always print to identical TM text

import re
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from tm_errors import DuplicateName, NameCollision, ParseError, UnknownBinding
from tm_model import (
    STORAGE,
    Endpoint,
    FlowArc,
    Machine,
    MachineRole,
    Stage,
    StageKind,
    StaticModel,
    TriggerArc,
    child_id,
)
from uml_parser import NAME, ClassModel, UmlClass, UseCaseModel, iter_statements

LIFECYCLE_MACHINE = "Lifecycle"
DEFAULT_EXTEND_CONDITION = "extension"
DECREATE_PREFIX = "delete"
CREATE_PREFIX = "create"

BINDING_PATTERNS = {
    "bind": re.compile(rf"^bind\s+(?P<cls>{NAME})\s+->\s+(?P<target>{NAME})$"),
    "alias": re.compile(rf"^alias\s+(?P<cls>{NAME})\.(?P<attr>{NAME})\s+->\s+(?P<target>{NAME})$"),
    "op": re.compile(rf"^op\s+(?P<op>{NAME})\s+->\s+(?P<target>{NAME})$"),
    "assign": re.compile(rf"^assign\s+(?P<usecase>{NAME})\s+->\s+(?P<cls>{NAME})\.(?P<attr>{NAME})$"),
    "@decreate": re.compile(rf"^@decreate\s+(?P<op>{NAME})$"),
}


class BindingMap(BaseModel):
    """Where class machines land in the skeleton, plus operation and attribute renames"""

    model_config = ConfigDict(frozen=True)

    class_to_subject: Dict[str, str] = Field(default_factory=dict)
    operation_bindings: Dict[str, str] = Field(default_factory=dict)
    # "Class.attribute" -> machine name used in the merged model
    attribute_aliases: Dict[str, str] = Field(default_factory=dict)
    # (use case, "Class.attribute"): processing the use case creates the attribute value
    assignments: Tuple[Tuple[str, str], ...] = ()
    decreate_operations: Tuple[str, ...] = ()

    @field_validator("assignments")
    @classmethod
    def _sort_assignments(cls, assignments: Tuple[Tuple[str, str], ...]) -> Tuple[Tuple[str, str], ...]:
        return tuple(sorted(set(assignments)))


def parse_bindings(text: str, source: Optional[str] = None) -> BindingMap:
    binds: Dict[str, str] = {}
    operations: Dict[str, str] = {}
    aliases: Dict[str, str] = {}
    assignments: List[Tuple[str, str]] = []
    decreate: List[str] = []
    try:
        for number, indent, statement in iter_statements(text):
            keyword = statement.split(None, 1)[0]
            pattern = BINDING_PATTERNS.get(keyword)
            if pattern is None:
                raise ParseError(f"unrecognized statement '{keyword}'", number, indent + 1)
            match = pattern.match(statement)
            if match is None:
                raise ParseError(f"malformed {keyword} statement", number, indent + 1)
            if keyword == "bind":
                key, table = match.group("cls"), binds
            elif keyword == "alias":
                key, table = f"{match.group('cls')}.{match.group('attr')}", aliases
            elif keyword == "op":
                key, table = match.group("op"), operations
            elif keyword == "assign":
                assignments.append((match.group("usecase"), f"{match.group('cls')}.{match.group('attr')}"))
                continue
            else:
                if match.group("op") not in decreate:
                    decreate.append(match.group("op"))
                continue
            if key in table:
                raise DuplicateName(key, number, indent + 1)
            table[key] = match.group("target")
    except ParseError as exc:
        if source:
            exc.with_source(source)
        raise
    return BindingMap(
        class_to_subject=binds,
        operation_bindings=operations,
        attribute_aliases=aliases,
        assignments=tuple(assignments),
        decreate_operations=tuple(decreate),
    )


def serialize_bindings(bind: BindingMap) -> str:
    lines = ["# binding map"]
    lines.extend(f"bind {name} -> {target}" for name, target in sorted(bind.class_to_subject.items()))
    lines.extend(f"alias {name} -> {target}" for name, target in sorted(bind.attribute_aliases.items()))
    lines.extend(f"op {name} -> {target}" for name, target in sorted(bind.operation_bindings.items()))
    lines.extend(f"assign {usecase} -> {target}" for usecase, target in bind.assignments)
    lines.extend(f"@decreate {name}" for name in bind.decreate_operations)
    return "\n".join(lines) + "\n"


def capitalised(name: str) -> str:
    return name[:1].upper() + name[1:]


def attribute_machine_names(attributes: Iterable[str]) -> Dict[str, str]:
    """Attribute -> machine name: capitalised, unless that is the name of another attribute"""
    names = set(attributes)
    renamed = {}
    for name in names:
        upper = capitalised(name)
        renamed[name] = name if upper != name and upper in names else upper
    return renamed


def lifecycle_machine_name(taken: Iterable[str]) -> str:
    taken = set(taken)
    name = LIFECYCLE_MACHINE
    while name in taken:
        name += "_"
    return name


def attribute_machine_id(fragments: StaticModel, class_id: str, attribute: str) -> Optional[str]:
    """The attribute machine an alias or assignment names, by attribute name or by machine name"""
    children = {m.name: m.id for m in fragments.children(class_id) if m.role is MachineRole.ATTRIBUTE}
    return children.get(attribute) or children.get(capitalised(attribute))


def lifecycle_machine_id(fragments: StaticModel, class_id: str) -> Optional[str]:
    for machine in fragments.children(class_id):
        if machine.role is MachineRole.GENERIC and any(stage.decreate for stage in machine.stages):
            return machine.id
    return None


def stages(*refs: str) -> Tuple[Stage, ...]:
    return tuple(Stage.from_ref(ref) for ref in refs)


def flow(source: Tuple[str, str], target: Tuple[str, str], label: Optional[str] = None) -> FlowArc:
    return FlowArc(source=Endpoint.of(*source), target=Endpoint.of(*target), label=label)


def trigger(source: Tuple[str, str], target: Tuple[str, str], condition: Optional[str] = None) -> TriggerArc:
    return TriggerArc(source=Endpoint.of(*source), target=Endpoint.of(*target), condition=condition)


def nesting(generalizations: Iterable[Tuple[str, str]]) -> Dict[str, str]:
    """specific -> general it is nested in (alphabetically first when there are several)"""
    generals: Dict[str, List[str]] = defaultdict(list)
    for specific, general in generalizations:
        generals[specific].append(general)
    return {specific: min(names) for specific, names in generals.items()}


class TMUMLTransformer:
    """Applies the use-case rules, the class rules and the merge step"""

    def __init__(
        self,
        decreate_prefix: str = DECREATE_PREFIX,
        create_prefix: str = CREATE_PREFIX,
        extend_condition: str = DEFAULT_EXTEND_CONDITION,
    ):
        self.decreate_prefix = decreate_prefix
        self.create_prefix = create_prefix
        self.extend_condition = extend_condition

    # Use-case model -> internal-structure skeleton

    def transform_usecase(self, uc: UseCaseModel) -> StaticModel:
        subject = uc.subject
        actor_parent = nesting(uc.actor_generalizations)
        usecase_parent = nesting(uc.usecase_generalizations)

        def actor_id(name: str) -> str:
            parent = actor_parent.get(name)
            return child_id(actor_id(parent) if parent else None, name)

        def usecase_id(name: str) -> str:
            parent = usecase_parent.get(name)
            return child_id(usecase_id(parent) if parent else subject, name)

        associated = sorted({actor for actor, _ in uc.associations})
        machines: List[Machine] = [
            Machine(
                id=subject,
                name=subject,
                role=MachineRole.SUBJECT,
                stages=stages("transfer.in", "receive", "process") if associated else (),
            )
        ]
        for actor in uc.actors:
            parent = actor_parent.get(actor)
            machines.append(
                Machine(
                    id=actor_id(actor),
                    name=actor,
                    role=MachineRole.ACTOR_REGION,
                    parent=actor_id(parent) if parent else None,
                    stages=stages("create", "release", "transfer.out") if actor in associated else (),
                )
            )
        for usecase in uc.usecases:
            parent = usecase_parent.get(usecase)
            machines.append(
                Machine(
                    id=usecase_id(usecase),
                    name=usecase,
                    role=MachineRole.USECASE,
                    parent=usecase_id(parent) if parent else subject,
                    stages=stages("create", "process"),
                )
            )

        flows: List[FlowArc] = [flow((usecase_id(u), "create"), (usecase_id(u), "process")) for u in uc.usecases]
        # one interaction chain per associated actor, then the subject's receiving side
        for actor in associated:
            aid = actor_id(actor)
            flows.append(flow((aid, "create"), (aid, "release")))
            flows.append(flow((aid, "release"), (aid, "transfer.out")))
            flows.append(flow((aid, "transfer.out"), (subject, "transfer.in")))
        if associated:
            flows.append(flow((subject, "transfer.in"), (subject, "receive")))
            flows.append(flow((subject, "receive"), (subject, "process")))

        triggers: List[TriggerArc] = [
            trigger((subject, "process"), (usecase_id(usecase), "create")) for _, usecase in uc.associations
        ]
        triggers.extend(
            trigger((usecase_id(base), "process"), (usecase_id(included), "create")) for base, included in uc.includes
        )
        triggers.extend(
            trigger((usecase_id(base), "process"), (usecase_id(extension), "create"), condition or self.extend_condition)
            for extension, base, condition in uc.extends
        )
        return StaticModel(machines=machines, flows=tuple(flows), triggers=tuple(triggers))

    # Class model -> TM fragments

    def decreate_operations(self, operations, explicit: Iterable[str]) -> List[str]:
        explicit = set(explicit)
        marked = [op.name for op in operations if op.decreate or op.name in explicit]
        if marked:
            return marked
        return [op.name for op in operations if op.name.lower().startswith(self.decreate_prefix)]

    def transform_class(self, cm: ClassModel, decreate_operations: Iterable[str] = ()) -> StaticModel:
        explicit = tuple(decreate_operations)
        machines: Dict[str, Machine] = {}
        flows: List[FlowArc] = []
        methods: List[str] = []

        for uml_class in cm.classes:
            class_id = uml_class.name
            machines[class_id] = Machine(id=class_id, name=uml_class.name, role=MachineRole.CLASS, stages=stages("create"))
            names = attribute_machine_names(attribute.name for attribute in uml_class.attributes)
            for attribute in uml_class.attributes:
                name = names[attribute.name]
                attribute_id = child_id(class_id, name)
                machines[attribute_id] = Machine(
                    id=attribute_id,
                    name=name,
                    role=MachineRole.ATTRIBUTE,
                    parent=class_id,
                    stages=stages("create", "release"),
                    storage=1,
                )
                # store the created value, retrieve it for release
                flows.append(flow((attribute_id, "create"), (attribute_id, STORAGE)))
                flows.append(flow((attribute_id, STORAGE), (attribute_id, "release")))
            if self.decreate_operations(uml_class.operations, explicit):
                name = lifecycle_machine_name(names.values())
                machines[child_id(class_id, name)] = Machine(
                    id=child_id(class_id, name),
                    name=name,
                    role=MachineRole.GENERIC,
                    parent=class_id,
                    stages=(Stage(kind=StageKind.CREATE, decreate=True),),
                )
            methods.extend(op.name for op in uml_class.operations)
        return StaticModel(machines=machines, flows=tuple(flows), declared_methods=tuple(methods))

    # Merge into the singular static model

    def resolve_target(self, skeleton: StaticModel, name: str) -> str:
        subjects = {m.id for m in skeleton.machines.values() if m.role is MachineRole.SUBJECT}
        candidates = [
            m.id
            for m in skeleton.machines.values()
            if m.name == name and (m.id in subjects or subjects.intersection(skeleton.ancestors(m.id)))
        ]
        if not candidates:
            raise UnknownBinding(name, "no subject-internal machine with that name")
        if len(candidates) > 1:
            raise UnknownBinding(name, f"several machines match: {', '.join(sorted(candidates))}")
        return candidates[0]

    def usecase_machines(self, skeleton: StaticModel, name: str) -> List[str]:
        return [m.id for m in skeleton.machines_named(name) if m.role is MachineRole.USECASE]

    def merge(
        self,
        skeleton: StaticModel,
        fragments: StaticModel,
        bind: BindingMap,
        classes: Optional[ClassModel] = None,
    ) -> StaticModel:
        roots = {m.name: m for m in fragments.roots()}
        for class_name in sorted(bind.class_to_subject):
            if class_name not in roots:
                raise UnknownBinding(class_name, "class not present in the class model")
        aliases_by_id: Dict[str, str] = {}
        for alias, target in sorted(bind.attribute_aliases.items()):
            class_name, _, attribute = alias.partition(".")
            machine_id = attribute_machine_id(fragments, roots[class_name].id, attribute) if class_name in roots else None
            if machine_id is None:
                raise UnknownBinding(alias, "no such attribute machine")
            aliases_by_id[machine_id] = target
        for operation, target in sorted(bind.operation_bindings.items()):
            if operation not in fragments.declared_methods:
                raise UnknownBinding(operation, "operation not declared by any class")
            if not self.usecase_machines(skeleton, target):
                raise UnknownBinding(target, "no use-case machine with that name")
        assigned: List[Tuple[str, str]] = []
        for usecase, target in bind.assignments:
            sources = self.usecase_machines(skeleton, usecase)
            if len(sources) != 1:
                raise UnknownBinding(usecase, "assignment needs exactly one use-case machine with that name")
            class_name, _, attribute = target.partition(".")
            machine_id = attribute_machine_id(fragments, roots[class_name].id, attribute) if class_name in roots else None
            if machine_id is None:
                raise UnknownBinding(target, "no such attribute machine")
            assigned.append((sources[0], machine_id))

        machines = dict(skeleton.machines)
        new_ids: Dict[str, str] = {}

        def place(machine: Machine, parent_id: str) -> None:
            name = aliases_by_id.get(machine.id, machine.name)
            new_id = child_id(parent_id, name)
            if new_id in machines:
                raise NameCollision(new_id)
            new_ids[machine.id] = new_id
            machines[new_id] = machine.model_copy(update={"id": new_id, "name": name, "parent": parent_id})
            for child in sorted(fragments.children(machine.id), key=lambda m: m.id):
                place(child, new_id)

        for name in sorted(roots):
            if name not in bind.class_to_subject:
                raise UnknownBinding(name, "class machine has no binding")
            place(roots[name], self.resolve_target(skeleton, bind.class_to_subject[name]))

        def moved(endpoint: Endpoint) -> Endpoint:
            return Endpoint.of(new_ids.get(endpoint.machine, endpoint.machine), endpoint.stage)

        flows = skeleton.flows + tuple(
            FlowArc(source=moved(f.source), target=moved(f.target), label=f.label) for f in fragments.flows
        )
        links = [trigger((source, "process"), (new_ids[target], "create")) for source, target in assigned]
        if classes is not None:
            for uml_class in classes.classes:
                if uml_class.name in roots:
                    links.extend(self.operation_links(skeleton, fragments, bind, uml_class, roots[uml_class.name].id, new_ids))
        triggers = (
            skeleton.triggers
            + tuple(TriggerArc(source=moved(t.source), target=moved(t.target), condition=t.condition) for t in fragments.triggers)
            + tuple(links)
        )
        methods = skeleton.declared_methods + tuple(
            bind.operation_bindings.get(name, name) for name in fragments.declared_methods
        )
        return StaticModel(machines=machines, flows=flows, triggers=triggers, declared_methods=methods)

    def operation_links(
        self,
        skeleton: StaticModel,
        fragments: StaticModel,
        bind: BindingMap,
        uml_class: UmlClass,
        class_id: str,
        new_ids: Dict[str, str],
    ) -> List[TriggerArc]:
        """The bound use case's processing creates the object, or decreates it for a decreate operation"""
        decreate = set(self.decreate_operations(uml_class.operations, bind.decreate_operations))
        lifecycle = lifecycle_machine_id(fragments, class_id)
        links = []
        for operation in uml_class.operations:
            sources = self.usecase_machines(skeleton, bind.operation_bindings.get(operation.name, operation.name))
            if len(sources) != 1:
                continue
            if operation.name in decreate:
                if lifecycle is not None:
                    links.append(trigger((sources[0], "process"), (new_ids[lifecycle], "create")))
            elif operation.name.lower().startswith(self.create_prefix):
                links.append(trigger((sources[0], "process"), (new_ids[class_id], "create")))
        return links


_default_transformer = TMUMLTransformer()


def transform_usecase(uc: UseCaseModel) -> StaticModel:
    return _default_transformer.transform_usecase(uc)


def transform_class(cm: ClassModel, decreate_operations: Iterable[str] = ()) -> StaticModel:
    return _default_transformer.transform_class(cm, decreate_operations)


def merge_models(
    skeleton: StaticModel, fragments: StaticModel, bind: BindingMap, classes: Optional[ClassModel] = None
) -> StaticModel:
    """Re-parent every class machine under its bound subject-internal machine; with the class model,
    also link each creating or decreating operation to the use case it is bound to"""
    return _default_transformer.merge(skeleton, fragments, bind, classes)


def build_static_model(uc: UseCaseModel, cm: ClassModel, bind: BindingMap) -> StaticModel:
    """The whole transformation: skeleton + fragments + merge"""
    skeleton = transform_usecase(uc)
    fragments = transform_class(cm, bind.decreate_operations)
    return merge_models(skeleton, fragments, bind, cm)
