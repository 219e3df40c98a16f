import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dot_generator import RenderView, emit_dot, stage_node
from strategies import behavior_graphs, tm_models
from tm_errors import MissingInput
from tm_format import parse_tm
from tm_model import StaticModel

STRING = re.compile(r'"(?:[^"\\]|\\.)*"')
TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|->|--|[{}\[\];=,]|[^\s{}\[\];=,"]+')
KEYWORDS = {"graph", "node", "edge", "subgraph", "digraph", "strict"}


def node_name(token: str) -> str:
    if token.startswith('"'):
        return token[1:-1].replace('\\"', '"')
    return token


def check_dot(text: str) -> None:
    """Closed strings, no HTML labels, balanced braces, and no edge to a node that was not declared before it"""
    depth = 0
    declared = set()
    for line in text.splitlines():
        outside = STRING.sub("", line)
        assert '"' not in outside, f"unterminated string in {line!r}"
        assert not re.search(r"=\s*<", outside), f"HTML label in {line!r}"
        tokens = TOKEN.findall(line)
        depth += tokens.count("{") - tokens.count("}")
        assert depth >= 0, line
        if len(tokens) >= 3 and tokens[1] == "->":
            for endpoint in (tokens[0], tokens[2]):
                assert node_name(endpoint) in declared, f"undeclared {endpoint} in {line!r}"
        elif tokens and tokens[0] not in KEYWORDS and tokens[0] not in "{}" and (len(tokens) == 1 or tokens[1] == "["):
            declared.add(node_name(tokens[0]))
    assert depth == 0


def clusters(text: str) -> int:
    return len(re.findall(r"subgraph cluster_\d+ \{", text))


def test_empty_model():
    text = emit_dot(StaticModel())
    check_dot(text)
    assert text.startswith("digraph tm_static {")
    assert clusters(text) == 0


def test_static_view_of_the_golden_model(invoice_golden):
    text = emit_dot(invoice_golden)
    check_dot(text)
    assert clusters(text) == len(invoice_golden.machines) == 16
    assert text.count("style=dashed") == len(invoice_golden.triggers) == 14
    assert "shape=cylinder" in text
    assert "create (decreate)" in text
    assert 'label="invoice created"' in text


def test_static_view_is_deterministic(invoice_golden):
    assert emit_dot(invoice_golden) == emit_dot(invoice_golden)


def test_hiding_storage(invoice_golden):
    text = emit_dot(invoice_golden, view=RenderView(show_storage=False))
    check_dot(text)
    assert "cylinder" not in text
    assert ".storage" not in text


def test_hiding_conditions(invoice_golden):
    text = emit_dot(invoice_golden, view=RenderView(condition_labels=False))
    assert "invoice created" not in text
    assert text.count("style=dashed") == 14


def test_events_view(invoice_golden, invoice_events):
    events, _ = invoice_events
    text = emit_dot(invoice_golden, events=events, view=RenderView(view="events"))
    check_dot(text)
    assert clusters(text) == 23
    assert '"E@System"' in text
    assert stage_node("System/Invoice", "create", "E2") in text
    assert "style=dotted" in text


def test_events_view_falls_back_to_the_behavior_events(invoice_golden, invoice_events):
    events, graph = invoice_events
    view = RenderView(view="events")
    assert emit_dot(invoice_golden, behavior=graph, view=view) == emit_dot(invoice_golden, events=events, view=view)


def test_behavior_view(invoice_golden, invoice_events):
    _, graph = invoice_events
    text = emit_dot(invoice_golden, behavior=graph, view=RenderView(view="behavior"))
    check_dot(text)
    assert text.startswith("digraph tm_behavior {")
    assert text.count("style=dashed") == 4
    assert text.count("->") == len(graph.edges)


@pytest.mark.parametrize("view", ["events", "behavior"])
def test_missing_inputs(invoice_golden, view):
    with pytest.raises(MissingInput) as info:
        emit_dot(invoice_golden, view=RenderView(view=view))
    assert info.value.view == view


def test_unknown_view_is_rejected():
    with pytest.raises(ValueError):
        RenderView(view="sequence")


def test_scoped_node_ids_avoid_port_syntax():
    assert stage_node("System/Invoice/ID", "storage", "E6") == "E6@System/Invoice/ID.storage"
    assert ":" not in stage_node("A", "transfer.in", "E_O")


def test_labels_are_escaped():
    model = parse_tm(
        "machine A { stage create stage release stage process }\n"
        'flow A.create -> A.release label "ends in a\\\\"\n'
        'trigger A.release -> A.process when "<b>x</b>"\n'
    )
    text = emit_dot(model)
    check_dot(text)
    assert 'label="ends in a\\\\"' in text
    assert 'label="<b>x</b>"' in text


@given(tm_models())
def test_static_view_of_any_model_is_valid_dot(model):
    check_dot(emit_dot(model))


@given(st.data())
def test_event_and_behavior_views_of_any_model_are_valid_dot(data):
    model = data.draw(tm_models())
    graph = data.draw(behavior_graphs(model))
    check_dot(emit_dot(model, behavior=graph, view=RenderView(view="events")))
    check_dot(emit_dot(model, behavior=graph, view=RenderView(view="behavior")))
