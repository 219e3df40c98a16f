# Hypothesis strategies producing random models for the property tests

import string
from typing import Dict, List

from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

from behavior_model import BehaviorGraph, EdgeKind, build_behavior
from event_regions import EventDef, RegionMember
from tm_model import STAGE_REFS, Endpoint, FlowArc, Machine, MachineRole, Stage, StaticModel, TriggerArc, child_id
from tmuml_transformer import BindingMap
from uml_parser import Attribute, ClassModel, Operation, UmlClass, UseCaseModel

# capitalised, so never one of the lowercase keywords of the formats
names = st.from_regex(r"[A-Z][a-z]{1,6}", fullmatch=True)
class_names = st.from_regex(r"K[a-z]{1,6}", fullmatch=True)
model_names = names.filter(lambda name: not name.startswith("K"))
attribute_names = st.from_regex(r"[a-zA-Z][a-zA-Z0-9]{0,6}", fullmatch=True)
operation_names = st.from_regex(r"[a-zA-Z][a-zA-Z0-9]{0,8}", fullmatch=True)
parameters = st.from_regex(r"[a-z]{1,4}: [A-Z][a-z]{0,4}", fullmatch=True)
conditions = st.from_regex(r"[a-z]{1,8}( [a-z]{1,8})?", fullmatch=True)
free_text = st.text(alphabet=string.ascii_letters + string.digits + " .,'\"\\-_\t<>", max_size=16)
event_ids = st.from_regex(r"E[1-9][0-9]?|E_[A-Z]", fullmatch=True)


@composite
def tm_models(draw: DrawFn, max_machines: int = 6) -> StaticModel:
    """Printable models: containment-path ids, arcs only between declared elements"""
    machines: Dict[str, Machine] = {}
    for _ in range(draw(st.integers(0, max_machines))):
        name = draw(names)
        parent = draw(st.sampled_from([None, *machines])) if machines else None
        machine_id = child_id(parent, name)
        if machine_id in machines:
            continue
        refs = draw(st.lists(st.sampled_from(STAGE_REFS), unique=True))
        decreate = draw(st.booleans())
        machines[machine_id] = Machine(
            id=machine_id,
            name=name,
            role=draw(st.sampled_from(list(MachineRole))),
            parent=parent,
            stages=tuple(Stage.from_ref(ref, decreate=decreate and ref == "create") for ref in refs),
            storage=draw(st.integers(0, 2)),
        )

    endpoints = [Endpoint.of(m.id, ref) for m in machines.values() for ref in m.element_refs()]
    flows: List[FlowArc] = []
    triggers: List[TriggerArc] = []
    if endpoints:
        pairs = st.tuples(st.sampled_from(endpoints), st.sampled_from(endpoints))
        for source, target in draw(st.lists(pairs, max_size=6)):
            flows.append(FlowArc(source=source, target=target, label=draw(st.none() | free_text)))
        for source, target in draw(st.lists(pairs, max_size=4)):
            triggers.append(TriggerArc(source=source, target=target, condition=draw(st.none() | free_text)))
    methods = draw(st.lists(names, max_size=3))
    return StaticModel(machines=machines, flows=tuple(flows), triggers=tuple(triggers), declared_methods=tuple(methods))


@composite
def usecase_models(draw: DrawFn) -> UseCaseModel:
    """Valid use-case models: distinct names, declared relation ends, acyclic generalizations"""
    pool = draw(st.lists(model_names, min_size=1, max_size=9, unique=True))
    subject, rest = pool[0], pool[1:]
    split = draw(st.integers(0, len(rest)))
    actors, usecases = rest[:split], rest[split:]

    def relation_pairs(left: List[str], right: List[str], distinct: bool, max_size: int = 5):
        if not left or not right:
            return []
        pairs = draw(st.lists(st.tuples(st.sampled_from(left), st.sampled_from(right)), max_size=max_size))
        return [(a, b) for a, b in pairs if not distinct or a != b]

    def ordered_pairs(items: List[str]):
        # later element generalizes to an earlier one, so no cycle can form
        return [(a, b) for a, b in relation_pairs(items, items, True, 3) if items.index(a) > items.index(b)]

    extends = [(x, b, draw(st.none() | conditions)) for x, b in relation_pairs(usecases, usecases, True, 3)]
    return UseCaseModel(
        subject=subject,
        actors=tuple(actors),
        usecases=tuple(usecases),
        associations=tuple(relation_pairs(actors, usecases, False)),
        includes=tuple(relation_pairs(usecases, usecases, True, 3)),
        extends=tuple(extends),
        actor_generalizations=tuple(ordered_pairs(actors)),
        usecase_generalizations=tuple(ordered_pairs(usecases)),
    )


@composite
def class_models(draw: DrawFn) -> ClassModel:
    classes = []
    for name in draw(st.lists(class_names, max_size=3, unique=True)):
        attributes = [
            Attribute(name=attribute, type=draw(st.sampled_from(["String", "Boolean", "int", "Date"])))
            for attribute in draw(st.lists(attribute_names, max_size=3, unique=True))
        ]
        operations = [
            Operation(
                name=operation,
                parameters=tuple(draw(st.lists(parameters, max_size=2))),
                decreate=draw(st.booleans()),
            )
            for operation in draw(st.lists(operation_names, max_size=3, unique=True))
        ]
        classes.append(UmlClass(name=name, attributes=tuple(attributes), operations=tuple(operations)))
    return ClassModel(classes=tuple(classes))


def subject_bindings(uc: UseCaseModel, cm: ClassModel) -> BindingMap:
    return BindingMap(class_to_subject={c.name: uc.subject for c in cm.classes})


def region_pool(model: StaticModel) -> List[RegionMember]:
    """Every machine, element and arc an events file can name"""
    pool = [RegionMember.of_machine(machine_id) for machine_id in model.machines]
    for machine in model.machines.values():
        pool.extend(RegionMember.of_element(machine.id, ref) for ref in machine.element_refs())
    flow_ends = {(f.source, f.target) for f in model.flows}
    pool.extend(RegionMember.of_arc(f.source, f.target, "flow") for f in model.flows)
    # an arc written in a file is read back as a flow whenever a flow has the same ends
    pool.extend(
        RegionMember.of_arc(t.source, t.target, "trigger") for t in model.triggers if (t.source, t.target) not in flow_ends
    )
    return pool


@composite
def behavior_graphs(draw: DrawFn, model: StaticModel) -> BehaviorGraph:
    ids = draw(st.lists(event_ids, min_size=1, max_size=6, unique=True))
    pool = region_pool(model)
    members = st.lists(st.sampled_from(pool), max_size=4) if pool else st.just([])
    events = [EventDef(id=event_id, description=draw(free_text), region=tuple(draw(members))) for event_id in ids]
    edges = draw(
        st.lists(st.tuples(st.sampled_from(ids), st.sampled_from(ids), st.sampled_from([k.value for k in EdgeKind])), max_size=8)
    )
    methods = draw(st.dictionaries(names, st.lists(st.sampled_from(ids), min_size=1, max_size=4), max_size=3))
    return build_behavior(events, edges, methods, strict=False)
