# Well-formedness checks for TM static models
# Every problem becomes a coded finding; nothing here raises for a malformed model

from collections import Counter
from typing import List

from tm_model import STORAGE, Finding, Severity, StaticModel, ValidationReport

FLOW_ADJ = "FLOW_ADJ"
DUP_STAGE = "DUP_STAGE"
DUP_STORAGE = "DUP_STORAGE"
TRIGGER_TARGET = "TRIGGER_TARGET"
UNDECLARED_REF = "UNDECLARED_REF"
CONTAINMENT_CYCLE = "CONTAINMENT_CYCLE"


class StaticModelValidator:
    """Checks adjacency, uniqueness, storage, trigger, reference and containment rules"""

    def __init__(self):
        # Solid arcs inside one machine
        self.intra_machine_pairs = {
            ("transfer.in", "receive"),
            ("receive", "process"),
            ("receive", "release"),
            ("create", "process"),
            ("create", "release"),
            ("process", "release"),
            ("release", "transfer.out"),
        }
        # Solid arcs between two machines
        self.inter_machine_pairs = {("transfer.out", "transfer.in")}
        self.store_sources = {"create", "process", "receive", "release"}
        self.retrieve_targets = {"process", "release"}
        self.trigger_targets = {"create", "process"}

    def validate(self, model: StaticModel) -> ValidationReport:
        findings: List[Finding] = []
        findings.extend(self._check_stage_uniqueness(model))
        findings.extend(self._check_storage(model))
        findings.extend(self._check_containment(model))
        findings.extend(self._check_flows(model))
        findings.extend(self._check_triggers(model))
        return ValidationReport(findings=tuple(findings))

    def _error(self, code: str, location: str, message: str) -> Finding:
        return Finding(severity=Severity.ERROR, code=code, location=location, message=message)

    def _check_stage_uniqueness(self, model: StaticModel) -> List[Finding]:
        findings = []
        for machine in model.machines.values():
            counts = Counter(stage.ref for stage in machine.stages)
            for ref, count in sorted(counts.items()):
                if count > 1:
                    findings.append(self._error(DUP_STAGE, machine.id, f"stage {ref} declared {count} times"))
        return findings

    def _check_storage(self, model: StaticModel) -> List[Finding]:
        return [
            self._error(DUP_STORAGE, machine.id, f"{machine.storage} storage nodes, at most one allowed")
            for machine in model.machines.values()
            if machine.storage > 1
        ]

    def _check_containment(self, model: StaticModel) -> List[Finding]:
        findings = []
        for machine in model.machines.values():
            if machine.parent is None:
                continue
            if machine.parent not in model.machines:
                findings.append(self._error(UNDECLARED_REF, machine.id, f"parent '{machine.parent}' is not declared"))
                continue
            # walk up until a root, a dangling parent, or back to this machine
            seen = {machine.id}
            current = model.machines.get(machine.parent)
            while current is not None:
                if current.id in seen:
                    if current.id == machine.id:
                        findings.append(self._error(CONTAINMENT_CYCLE, machine.id, "machine is its own ancestor"))
                    break
                seen.add(current.id)
                current = model.machines.get(current.parent) if current.parent else None
        return findings

    def _undeclared(self, model: StaticModel, location: str, endpoints) -> List[Finding]:
        findings = []
        for endpoint in endpoints:
            machine = model.machines.get(endpoint.machine)
            if machine is None:
                findings.append(self._error(UNDECLARED_REF, location, f"machine '{endpoint.machine}' is not declared"))
            elif not machine.has_element(endpoint.stage):
                findings.append(self._error(UNDECLARED_REF, location, f"'{endpoint}' is not declared"))
        return findings

    def _check_flows(self, model: StaticModel) -> List[Finding]:
        findings = []
        for flow in model.flows:
            location = flow.describe()
            missing = self._undeclared(model, location, (flow.source, flow.target))
            if missing:
                findings.extend(missing)
                continue
            if not self.flow_allowed(flow.source.machine, flow.source.stage, flow.target.machine, flow.target.stage):
                findings.append(
                    self._error(FLOW_ADJ, location, f"{flow.source.stage} -> {flow.target.stage} is not a legal succession")
                )
        return findings

    def flow_allowed(self, source_machine: str, source_stage: str, target_machine: str, target_stage: str) -> bool:
        """Adjacency table for solid arcs"""
        same_machine = source_machine == target_machine
        if STORAGE in (source_stage, target_stage):
            if not same_machine or source_stage == target_stage:
                return False
            if target_stage == STORAGE:
                return source_stage in self.store_sources
            return target_stage in self.retrieve_targets
        pair = (source_stage, target_stage)
        if same_machine:
            return pair in self.intra_machine_pairs
        return pair in self.inter_machine_pairs

    def _check_triggers(self, model: StaticModel) -> List[Finding]:
        findings = []
        for trigger in model.triggers:
            location = trigger.describe()
            missing = self._undeclared(model, location, (trigger.source, trigger.target))
            if missing:
                findings.extend(missing)
                continue
            if trigger.target.stage not in self.trigger_targets:
                findings.append(
                    self._error(TRIGGER_TARGET, location, f"triggers may only start create or process, not {trigger.target.stage}")
                )
        return findings


_default_validator = StaticModelValidator()


def validate_static(model: StaticModel) -> ValidationReport:
    """Every rule violation in the model; an empty report means well-formed"""
    return _default_validator.validate(model)
