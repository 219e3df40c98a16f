# Name-based structural comparison of two TM static models
# Machines are matched by their name path, so independently written files compare equal to tool output

from collections import Counter
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from tm_errors import AmbiguousName
from tm_model import Endpoint, Machine, StaticModel

DIFF_KINDS = [
    "MissingMachine",
    "ExtraMachine",
    "StageMismatch",
    "RoleMismatch",
    "MissingFlow",
    "ExtraFlow",
    "MissingTrigger",
    "ExtraTrigger",
    "MissingMethod",
    "ExtraMethod",
]


class DiffEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    subject: str
    detail: str = ""

    def to_line(self) -> str:
        return f"{self.kind} {self.subject}" + (f" ({self.detail})" if self.detail else "")


ArcKey = Tuple[str, str, str, str, Optional[str]]


class StructuralComparator:
    """Compares an expected model against an actual one"""

    def index_machines(self, model: StaticModel) -> Dict[str, Machine]:
        index: Dict[str, Machine] = {}
        for machine in model.machines.values():
            path = model.name_path(machine.id)
            if path in index:
                raise AmbiguousName(path)
            index[path] = machine
        return index

    def arc_key(self, model: StaticModel, source: Endpoint, target: Endpoint, text: Optional[str]) -> ArcKey:
        return model.name_path(source.machine), source.stage, model.name_path(target.machine), target.stage, text

    def compare(self, expected: StaticModel, actual: StaticModel) -> List[DiffEntry]:
        entries: List[DiffEntry] = []
        left = self.index_machines(expected)
        right = self.index_machines(actual)

        for path in sorted(left.keys() - right.keys()):
            entries.append(DiffEntry(kind="MissingMachine", subject=path))
        for path in sorted(right.keys() - left.keys()):
            entries.append(DiffEntry(kind="ExtraMachine", subject=path))
        for path in sorted(left.keys() & right.keys()):
            want, got = left[path], right[path]
            if stage_signature(want) != stage_signature(got):
                entries.append(
                    DiffEntry(
                        kind="StageMismatch",
                        subject=path,
                        detail=f"expected {format_signature(want)}, found {format_signature(got)}",
                    )
                )
            if want.role != got.role:
                entries.append(
                    DiffEntry(kind="RoleMismatch", subject=path, detail=f"expected {want.role.value}, found {got.role.value}")
                )

        flows_left = Counter(self.arc_key(expected, f.source, f.target, f.label) for f in expected.flows)
        flows_right = Counter(self.arc_key(actual, f.source, f.target, f.label) for f in actual.flows)
        entries.extend(multiset_entries(flows_left, flows_right, "Flow", "label"))

        triggers_left = Counter(self.arc_key(expected, t.source, t.target, t.condition) for t in expected.triggers)
        triggers_right = Counter(self.arc_key(actual, t.source, t.target, t.condition) for t in actual.triggers)
        entries.extend(multiset_entries(triggers_left, triggers_right, "Trigger", "when"))

        methods_left, methods_right = Counter(expected.declared_methods), Counter(actual.declared_methods)
        for name in sorted(methods_left - methods_right):
            entries.extend(DiffEntry(kind="MissingMethod", subject=name) for _ in range((methods_left - methods_right)[name]))
        for name in sorted(methods_right - methods_left):
            entries.extend(DiffEntry(kind="ExtraMethod", subject=name) for _ in range((methods_right - methods_left)[name]))

        return sorted(entries, key=lambda e: (DIFF_KINDS.index(e.kind), e.subject, e.detail))


def stage_signature(machine: Machine) -> Tuple[Tuple[Tuple[str, bool], ...], int]:
    return tuple((stage.ref, stage.decreate) for stage in machine.stages), machine.storage


def format_signature(machine: Machine) -> str:
    parts = [stage.ref + (" decreate" if stage.decreate else "") for stage in machine.stages]
    parts.extend("storage" for _ in range(machine.storage))
    return "[" + ", ".join(parts) + "]"


def arc_text(key: ArcKey, keyword: str) -> str:
    source, source_stage, target, target_stage, text = key
    suffix = f' {keyword} "{text}"' if text is not None else ""
    return f"{source}.{source_stage} -> {target}.{target_stage}{suffix}"


def multiset_entries(left: Counter, right: Counter, noun: str, keyword: str) -> List[DiffEntry]:
    entries = []
    missing, extra = left - right, right - left
    for key in sorted(missing, key=sort_arc_key):
        entries.extend(DiffEntry(kind=f"Missing{noun}", subject=arc_text(key, keyword)) for _ in range(missing[key]))
    for key in sorted(extra, key=sort_arc_key):
        entries.extend(DiffEntry(kind=f"Extra{noun}", subject=arc_text(key, keyword)) for _ in range(extra[key]))
    return entries


def sort_arc_key(key: ArcKey) -> Tuple[str, str, str, str, str]:
    return key[0], key[1], key[2], key[3], key[4] or ""


def structural_diff(expected: StaticModel, actual: StaticModel) -> List[DiffEntry]:
    """Discrepancies keyed by names; empty iff the models are equal up to id renaming"""
    return StructuralComparator().compare(expected, actual)
