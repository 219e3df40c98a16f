import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import tm_models
from tm_errors import AmbiguousReference, DuplicateName, ParseError, UnknownReference
from tm_format import HEADER, parse_tm, print_tm
from tm_model import MachineRole

TWO_MACHINES = """
machine Operator role actor-region {
  stage create; stage release; stage transfer.out
}
machine System role subject {
  stage transfer.in
  stage receive
}
flow Operator.transfer -> System.transfer.in
flow System.Transfer.In -> System.receive label "request"
"""


def test_parse_resolves_simple_names_and_bare_transfer():
    model = parse_tm(TWO_MACHINES)
    assert set(model.machines) == {"Operator", "System"}
    assert model.machines["System"].role is MachineRole.SUBJECT
    assert [str(f.source) for f in model.flows] == ["Operator.transfer.out", "System.transfer.in"]
    assert model.flows[1].label == "request"


def test_nested_machines_get_path_ids():
    model = parse_tm("machine System { machine Invoice { machine ID { stage create } } }\n")
    assert set(model.machines) == {"System", "System/Invoice", "System/Invoice/ID"}
    assert model.machines["System/Invoice/ID"].parent == "System/Invoice"


def test_golden_round_trips(invoice_golden):
    printed = print_tm(invoice_golden)
    assert printed.startswith(HEADER + "\n")
    assert parse_tm(printed) == invoice_golden
    assert print_tm(parse_tm(printed)) == printed


def test_printing_is_canonical():
    model = parse_tm(TWO_MACHINES)
    shuffled = parse_tm(
        'machine System role subject { stage receive; stage transfer.in }\n'
        'machine Operator role actor-region { stage transfer.out; stage release; stage create }\n'
        'flow System.transfer.in -> System.receive label "request"\n'
        "flow Operator.transfer.out -> System.transfer.in\n"
    )
    assert print_tm(shuffled) == print_tm(model)


def test_empty_machine_prints_on_one_line():
    assert "machine Idle role generic { }" in print_tm(parse_tm("machine Idle {}"))


def test_unknown_stage_reference_carries_position():
    with pytest.raises(UnknownReference) as info:
        parse_tm("machine A { stage create }\n\nflow A.create -> A.release\n", "a.tm")
    assert info.value.name == "A.release"
    assert (info.value.line, info.value.column) == (3, 18)
    assert str(info.value).startswith("a.tm:3:18:")


def test_unknown_machine_reference():
    with pytest.raises(UnknownReference) as info:
        parse_tm("machine A { stage create }\ntrigger A.create -> Ghost.create\n")
    assert info.value.name == "Ghost"


def test_ambiguous_simple_name():
    text = "machine A { machine X { stage create } }\nmachine B { machine X { stage create } }\nflow X.create -> X.create\n"
    with pytest.raises(AmbiguousReference) as info:
        parse_tm(text)
    assert info.value.candidates == ["A/X", "B/X"]


def test_bare_transfer_needs_a_single_port():
    with pytest.raises(UnknownReference):
        parse_tm("machine A { stage transfer.in; stage transfer.out }\nflow A.transfer -> A.transfer.out\n")


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("machine A { stage jump }", 1, 19),
        ("machine A {\n  stage process decreate\n}", 2, 9),
        ("machine A role boss { }", 1, 16),
        ("machine A {\n  stage create\n", 3, 1),
        ("flow A.create => B.create", 1, 16),
        ("machine A/B { }", 1, 9),
        ('flow A.create -> A.release label "open', 1, 34),
    ],
)
def test_parse_errors_point_at_the_problem(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_tm(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_sibling_names_must_differ():
    with pytest.raises(DuplicateName):
        parse_tm("machine A { machine B { } machine B { } }")


def test_repeated_storage_is_counted():
    assert parse_tm("machine A { storage; storage }").machines["A"].storage == 2


def test_strings_keep_escapes():
    model = parse_tm('machine A { stage create; stage release }\nflow A.create -> A.release label "say \\"hi\\"\\n"\n')
    assert model.flows[0].label == 'say "hi"\n'
    assert parse_tm(print_tm(model)) == model


@given(tm_models())
def test_parse_print_round_trip(model):
    assert parse_tm(print_tm(model)) == model


@given(st.text(max_size=80))
def test_arbitrary_text_fails_only_with_parse_errors(text):
    try:
        parse_tm(text)
    except ParseError:
        pass

