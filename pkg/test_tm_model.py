import pytest
from pydantic import ValidationError

from tm_model import (
    Endpoint,
    Finding,
    FlowArc,
    Machine,
    MachineRole,
    Severity,
    Stage,
    StageKind,
    StaticModel,
    ValidationReport,
    child_id,
)


def test_transfer_stage_needs_direction():
    with pytest.raises(ValidationError):
        Stage(kind=StageKind.TRANSFER)
    assert Stage.from_ref("transfer.in").ref == "transfer.in"


def test_direction_only_on_transfer():
    with pytest.raises(ValidationError):
        Stage.from_ref("create.in")


def test_decreate_only_on_create():
    assert Stage.from_ref("create", decreate=True).decreate
    with pytest.raises(ValidationError):
        Stage.from_ref("process", decreate=True)


def test_stage_refs_are_case_insensitive():
    assert Stage.from_ref("Transfer.OUT").ref == "transfer.out"


def test_machine_stages_are_kept_in_canonical_order():
    machine = Machine(id="A", name="A", stages=(Stage.from_ref("transfer.out"), Stage.from_ref("create")))
    assert [stage.ref for stage in machine.stages] == ["create", "transfer.out"]
    assert machine.element_refs() == ["create", "transfer.out"]


def test_storage_is_an_element_only_when_declared():
    assert not Machine(id="A", name="A").has_element("storage")
    assert Machine(id="A", name="A", storage=1).element_refs() == ["storage"]


def test_model_equality_ignores_declaration_order():
    a = Machine(id="A", name="A", stages=(Stage.from_ref("create"), Stage.from_ref("release")))
    b = Machine(id="B", name="B")
    first = FlowArc(source=Endpoint.of("A", "create"), target=Endpoint.of("A", "release"))
    second = FlowArc(source=Endpoint.of("A", "release"), target=Endpoint.of("A", "create"))
    assert StaticModel(machines=[a, b], flows=(first, second)) == StaticModel(machines=[b, a], flows=(second, first))


def test_name_path_and_ancestors():
    model = StaticModel(
        machines=[
            Machine(id="S", name="System", role=MachineRole.SUBJECT),
            Machine(id="i", name="Invoice", parent="S"),
            Machine(id="x", name="ID", parent="i"),
        ]
    )
    assert model.name_path("x") == "System/Invoice/ID"
    assert list(model.ancestors("x")) == ["i", "S"]
    assert [m.id for m in model.roots()] == ["S"]
    assert [m.id for m in model.children("S")] == ["i"]


def test_ancestors_stop_on_a_containment_cycle():
    model = StaticModel(machines=[Machine(id="A", name="A", parent="B"), Machine(id="B", name="B", parent="A")])
    assert list(model.ancestors("A")) == ["B"]


def test_replace_renormalises():
    model = StaticModel(machines=[Machine(id="A", name="A")])
    grown = model.replace(machines=[*model.machines.values(), Machine(id="0", name="Zero")])
    assert list(grown.machines) == ["0", "A"]


def test_child_id():
    assert child_id(None, "System") == "System"
    assert child_id("System/Invoice", "ID") == "System/Invoice/ID"


def test_report_sorts_and_splits_by_severity():
    report = ValidationReport(
        findings=(
            Finding(severity=Severity.WARNING, code="UNCOVERED_ELEMENT", location="b", message="m"),
            Finding(severity=Severity.ERROR, code="FLOW_ADJ", location="a", message="m"),
        )
    )
    assert report.codes() == ["FLOW_ADJ", "UNCOVERED_ELEMENT"]
    assert report.has_errors
    assert len(report.warnings) == 1
    assert report.to_text() == "error FLOW_ADJ a: m\nwarning UNCOVERED_ELEMENT b: m\n"
    assert not ValidationReport().has_errors
