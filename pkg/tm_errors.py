# Exceptions shared by the TMUML toolchain
# Input problems derive from ParseError (CLI exit 2), semantic problems from TmumlError (exit 1)

from typing import List, Optional, Sequence, Tuple


class TmumlError(Exception):
    """Base error of the toolchain"""


class ParseError(TmumlError):
    """Input text that cannot be turned into a model"""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.describe())

    def describe(self) -> str:
        prefix = self.source or "<input>"
        if self.line:
            return f"{prefix}:{self.line}:{self.column}: {self.message}"
        return f"{prefix}: {self.message}"

    def with_source(self, source: str) -> "ParseError":
        self.source = source
        self.args = (self.describe(),)
        return self


class UnknownReference(ParseError):
    def __init__(self, name: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        self.name = name
        super().__init__(f"unknown reference '{name}'", line, column, source)


class AmbiguousReference(ParseError):
    def __init__(self, name: str, candidates: Sequence[str], line: int = 0, column: int = 0):
        self.name = name
        self.candidates = list(candidates)
        super().__init__(f"ambiguous reference '{name}' (candidates: {', '.join(self.candidates)})", line, column)


class UndeclaredName(ParseError):
    def __init__(self, name: str, line: int = 0, column: int = 0):
        self.name = name
        super().__init__(f"undeclared name '{name}'", line, column)


class DuplicateName(ParseError):
    def __init__(self, name: str, line: int = 0, column: int = 0):
        self.name = name
        super().__init__(f"duplicate name '{name}'", line, column)


class CyclicGeneralization(ParseError):
    def __init__(self, names: Sequence[str], line: int = 0, column: int = 0):
        self.names = list(names)
        super().__init__(f"cyclic generalization: {' -> '.join(self.names)}", line, column)


class DuplicateEventId(ParseError):
    def __init__(self, event_id: str, line: int = 0, column: int = 0):
        self.event_id = event_id
        super().__init__(f"duplicate event id '{event_id}'", line, column)


class AmbiguousName(TmumlError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"sibling machines share the name path '{path}'")


class UnknownBinding(TmumlError):
    def __init__(self, name: str, reason: str):
        self.name = name
        super().__init__(f"unknown binding '{name}': {reason}")


class NameCollision(TmumlError):
    def __init__(self, machine_id: str):
        self.machine_id = machine_id
        super().__init__(f"merged machine '{machine_id}' collides with an existing sibling")


class UnknownEvent(TmumlError):
    def __init__(self, event_id: str, where: str = ""):
        self.event_id = event_id
        suffix = f" (in {where})" if where else ""
        super().__init__(f"unknown event '{event_id}'{suffix}")


class PathBroken(TmumlError):
    """Aggregated method-path breaks found while building a behavior graph"""

    def __init__(self, breaks: List[Tuple[str, str, str]]):
        self.breaks = list(breaks)
        details = "; ".join(f"{method}: {src} -> {dst}" for method, src, dst in self.breaks)
        super().__init__(f"method paths not backed by edges: {details}")


class EmptyStartSet(TmumlError):
    def __init__(self):
        super().__init__("simulation needs at least one start event")


class MissingInput(TmumlError):
    def __init__(self, view: str, component: str):
        self.view = view
        self.component = component
        super().__init__(f"view '{view}' needs {component}")


class ConfigError(TmumlError):
    """Invalid command line or pipeline configuration"""
