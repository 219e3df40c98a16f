from collections import deque
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from event_regions import (
    REGION_DISCONNECTED,
    REGION_EMPTY,
    UNCOVERED_ELEMENT,
    EventDef,
    MemberKind,
    RegionMember,
    natural_key,
    validate_regions,
)
from events_file import HEADER, parse_events, print_events
from strategies import behavior_graphs, region_pool, tm_models
from tm_errors import DuplicateEventId, DuplicateName, ParseError, UnknownReference
from tm_model import Endpoint
from tm_validator import UNDECLARED_REF


def test_invoice_events_in_natural_order(invoice_events):
    events, graph = invoice_events
    expected = ["E", *(f"E{n}" for n in range(1, 20)), "E_C", "E_M", "E_O"]
    assert [event.id for event in events] == expected
    assert graph.event_ids() == expected


def test_natural_key():
    assert sorted(["E10", "E2", "E1"], key=natural_key) == ["E1", "E2", "E10"]


def test_invoice_regions_have_no_errors(invoice_golden, invoice_events):
    events, _ = invoice_events
    report = validate_regions(invoice_golden, events)
    assert report.errors == []


def test_single_member_region(invoice_events):
    events, _ = invoice_events
    session = next(event for event in events if event.id == "E_O")
    assert session.region == (RegionMember.of_machine("Operator"),)


def test_arc_members_resolve_to_flows_and_triggers(invoice_events):
    events, _ = invoice_events
    by_id = {event.id: event for event in events}
    arcs = {m.arc: m.text() for m in by_id["E6"].region if m.kind is MemberKind.ARC}
    assert arcs == {
        "flow": "System/Invoice/ID.create -> System/Invoice/ID.storage",
        "trigger": "System/Inputinvoiceid.process -> System/Invoice/ID.create",
    }
    (handoff,) = [m for m in by_id["E16"].region if m.kind is MemberKind.ARC]
    assert handoff.arc == "trigger"


def test_creation_regions_reach_into_the_class(invoice_events):
    events, _ = invoice_events
    by_id = {event.id: event for event in events}
    assert {m.text() for m in by_id["E2"].region} == {
        "System/Createinvoice.process",
        "System/Createinvoice.process -> System/Invoice.create",
        "System/Invoice.create",
    }
    assert "System/Deleteinvoice.process -> System/Invoice/Lifecycle.create" in {m.text() for m in by_id["E4"].region}


def test_uncovered_elements_are_warnings(invoice_golden, invoice_events):
    events, _ = invoice_events
    report = validate_regions(invoice_golden, events)
    uncovered = {f.location for f in report.warnings if f.code == UNCOVERED_ELEMENT}
    assert {
        "System/Inputinvoiceid",
        "System/Inputinvoiceid.create",
        "System/Inputinvoiceid.process",
    } <= uncovered
    # machine members cover their own elements
    assert not any(location.startswith("System/Invoice/ID") for location in uncovered)


def test_empty_region(invoice_golden):
    events, _ = parse_events("event X = { }\n", invoice_golden)
    report = validate_regions(invoice_golden, events)
    assert [f.code for f in report.errors] == [REGION_EMPTY]


def test_disconnected_region(invoice_golden):
    events, _ = parse_events("event X = { Operator.create, Customer.create }\n", invoice_golden)
    (finding,) = validate_regions(invoice_golden, events).errors
    assert finding.code == REGION_DISCONNECTED
    assert finding.location == "X"
    assert "2 components" in finding.message


def test_static_arcs_connect_region_members(invoice_golden):
    events, _ = parse_events("event X = { Operator.transfer.out, System.transfer.in }\n", invoice_golden)
    assert validate_regions(invoice_golden, events).errors == []


def test_unresolved_member_is_reported(invoice_golden):
    event = EventDef(id="X", region=(RegionMember.of_machine("Ghost"),))
    assert [f.code for f in validate_regions(invoice_golden, [event]).errors] == [UNDECLARED_REF]


def test_undeclared_machine_in_events_file(invoice_golden):
    with pytest.raises(UnknownReference) as info:
        parse_events("event X = { System,\n  Ghost }\n", invoice_golden, "x.events")
    assert info.value.name == "Ghost"
    assert (info.value.line, info.value.column) == (2, 3)


def test_arc_member_must_exist(invoice_golden):
    with pytest.raises(UnknownReference) as info:
        parse_events("event X = { Operator.create -> Customer.create }\n", invoice_golden)
    assert info.value.name == "Operator.create -> Customer.create"


def test_duplicate_event_id(invoice_golden):
    with pytest.raises(DuplicateEventId) as info:
        parse_events("event E1 = { System }\nevent E1 = { Operator }\n", invoice_golden)
    assert info.value.line == 2


def test_duplicate_method(invoice_golden):
    with pytest.raises(DuplicateName):
        parse_events("event A = { System }\nmethod M = A\nmethod M = A\n", invoice_golden)


def test_edges_and_methods_name_declared_events(invoice_golden):
    with pytest.raises(UnknownReference):
        parse_events("event A = { System }\nedge A -> B\n", invoice_golden)
    with pytest.raises(UnknownReference):
        parse_events("event A = { System }\nmethod M = A -> B\n", invoice_golden)


@pytest.mark.parametrize(
    "text",
    [
        "event A { System }\n",
        "event A = { System Operator }\n",
        "event A.b = { System }\n",
        "edge A\n",
        "region A\n",
    ],
)
def test_malformed_events_file(invoice_golden, text):
    with pytest.raises(ParseError):
        parse_events(text, invoice_golden)


def test_invoice_events_print_and_parse_back(invoice_golden, invoice_events):
    _, graph = invoice_events
    printed = print_events(graph)
    assert printed.startswith(HEADER + "\n")
    _, reparsed = parse_events(printed, invoice_golden)
    assert reparsed == graph
    assert print_events(reparsed) == printed


def test_static_model_does_not_know_about_events():
    source = (Path(__file__).parent / "tm_model.py").read_text(encoding="utf-8")
    assert "event_regions" not in source
    assert "behavior_model" not in source


def connected_by_search(model, region) -> bool:
    """Pairwise adjacency, breadth-first search from the first member"""
    members = list(dict.fromkeys(region))

    def touches(member, endpoint: Endpoint) -> bool:
        if member.kind is MemberKind.MACHINE:
            return member.machine == endpoint.machine
        if member.kind is MemberKind.ELEMENT:
            return member.source == endpoint
        return False

    def adjacent(a, b) -> bool:
        for x, y in ((a, b), (b, a)):
            if x.kind is MemberKind.ELEMENT and y.kind is MemberKind.MACHINE and x.machine == y.machine:
                return True
            if x.kind is MemberKind.MACHINE and y.kind is MemberKind.MACHINE:
                if model.machines[x.machine].parent == y.machine:
                    return True
            if x.kind is MemberKind.ARC and (touches(y, x.source) or touches(y, x.target)):
                return True
            for _, arc in model.arcs():
                if touches(x, arc.source) and touches(y, arc.target):
                    return True
        return False

    seen = {0}
    queue = deque([0])
    while queue:
        current = queue.popleft()
        for index, other in enumerate(members):
            if index not in seen and adjacent(members[current], other):
                seen.add(index)
                queue.append(index)
    return len(seen) == len(members)


@given(st.data())
def test_connectivity_matches_a_search_oracle(data):
    model = data.draw(tm_models())
    pool = region_pool(model)
    if not pool:
        return
    region = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=5))
    event = EventDef(id="E1", region=tuple(region))
    report = validate_regions(model, [event])
    disconnected = REGION_DISCONNECTED in [f.code for f in report.errors]
    assert disconnected is not connected_by_search(model, event.region)


@given(st.data())
def test_events_round_trip(data):
    model = data.draw(tm_models())
    graph = data.draw(behavior_graphs(model))
    _, reparsed = parse_events(print_events(graph), model)
    assert reparsed == graph


def test_stage_names_are_case_insensitive_in_regions(invoice_golden):
    events, _ = parse_events('event E1 "req create" = { Operator.Release, System.Receive }\n', invoice_golden)
    (event,) = events
    assert event.description == "req create"
    assert [member.text() for member in event.region] == ["Operator.release", "System.receive"]
