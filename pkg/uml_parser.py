# Text readers and writers for the UML subset: use-case models and class models
# One statement per line; multiplicities, visibility markers and return types are read and dropped

import re
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, field_validator

from tm_errors import CyclicGeneralization, DuplicateName, ParseError, UndeclaredName

NAME = r"[A-Za-z_][A-Za-z0-9_]*"
MULTIPLICITY = r"(?:\d+\.\.(?:\d+|\*)|\d+|\*|\[[^\]]*\])"
TYPE = r"[A-Za-z_][\w.]*(?:<[^>]*>)?"
VISIBILITY = r"(?:[+\-~]\s*)?"

USECASE_PATTERNS = {
    "subject": re.compile(rf"^subject\s+(?P<name>{NAME})$"),
    "actor": re.compile(rf"^actor\s+(?P<name>{NAME})$"),
    "usecase": re.compile(rf"^usecase\s+(?P<name>{NAME})$"),
    "assoc": re.compile(
        rf"^assoc\s+(?P<actor>{NAME})(?:\s+{MULTIPLICITY})?\s+--\s+(?:{MULTIPLICITY}\s+)?(?P<usecase>{NAME})(?:\s+{MULTIPLICITY})?$"
    ),
    "include": re.compile(rf"^include\s+(?P<base>{NAME})\s+includes\s+(?P<included>{NAME})$"),
    "extend": re.compile(rf"^extend\s+(?P<extension>{NAME})\s+extends\s+(?P<base>{NAME})(?:\s*\[(?P<condition>[^\]]*)\])?$"),
    "actorgen": re.compile(rf"^actorgen\s+(?P<specific>{NAME})\s+->\s+(?P<general>{NAME})$"),
    "ucgen": re.compile(rf"^ucgen\s+(?P<specific>{NAME})\s+->\s+(?P<general>{NAME})$"),
}

CLASS_PATTERNS = {
    "class": re.compile(rf"^class\s+(?P<name>{NAME})$"),
    "attr": re.compile(rf"^attr\s+{VISIBILITY}(?P<name>{NAME})\s*:\s*(?P<type>{TYPE})(?:\s*{MULTIPLICITY})?$"),
    "op": re.compile(
        rf"^op\s+{VISIBILITY}(?P<name>{NAME})\s*\((?P<params>[^)]*)\)(?:\s*:\s*{TYPE})?(?P<marker>\s+@decreate)?$"
    ),
}


def _sorted_names(values: Tuple[str, ...]) -> Tuple[str, ...]:
    return tuple(sorted(values))


def _sorted_relations(values: Tuple[Tuple, ...]) -> Tuple[Tuple, ...]:
    return tuple(sorted(values, key=lambda relation: tuple(part or "" for part in relation)))


class UseCaseModel(BaseModel):
    """Actors, use cases and their relations around one subject"""

    model_config = ConfigDict(frozen=True)

    subject: str
    actors: Tuple[str, ...] = ()
    usecases: Tuple[str, ...] = ()
    associations: Tuple[Tuple[str, str], ...] = ()
    includes: Tuple[Tuple[str, str], ...] = ()
    extends: Tuple[Tuple[str, str, Optional[str]], ...] = ()
    actor_generalizations: Tuple[Tuple[str, str], ...] = ()
    usecase_generalizations: Tuple[Tuple[str, str], ...] = ()

    @field_validator("actors", "usecases")
    @classmethod
    def _sort_names(cls, values: Tuple[str, ...]) -> Tuple[str, ...]:
        return _sorted_names(values)

    @field_validator("associations", "includes", "extends", "actor_generalizations", "usecase_generalizations")
    @classmethod
    def _sort_relations(cls, values: Tuple[Tuple, ...]) -> Tuple[Tuple, ...]:
        return _sorted_relations(values)


class Attribute(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    type: str


class Operation(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    parameters: Tuple[str, ...] = ()
    # explicit @decreate marker; False leaves the decision to the name heuristic
    decreate: bool = False


class UmlClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    attributes: Tuple[Attribute, ...] = ()
    operations: Tuple[Operation, ...] = ()

    @field_validator("attributes", "operations")
    @classmethod
    def _sort_members(cls, members: Tuple) -> Tuple:
        return tuple(sorted(members, key=lambda member: member.name))


class ClassModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    classes: Tuple[UmlClass, ...] = ()

    @field_validator("classes")
    @classmethod
    def _sort_classes(cls, classes: Tuple[UmlClass, ...]) -> Tuple[UmlClass, ...]:
        return tuple(sorted(classes, key=lambda c: c.name))


def strip_comment(line: str) -> str:
    """Drop a '#' comment unless it sits inside a [condition]"""
    depth = 0
    for index, char in enumerate(line):
        if char == "[":
            depth += 1
        elif char == "]" and depth:
            depth -= 1
        elif char == "#" and depth == 0:
            return line[:index]
    return line


def iter_statements(text: str):
    """(line number, indent column, statement) for every non-blank line"""
    for number, raw in enumerate(text.split("\n"), start=1):
        line = strip_comment(raw).rstrip()
        statement = line.strip()
        if statement:
            yield number, len(line) - len(line.lstrip()), statement


def normalize_parameter(parameter: str) -> str:
    parameter = re.sub(r"\s*:\s*", ": ", parameter.strip())
    return re.sub(r"\s+", " ", parameter)


class UseCaseParser:
    """Reads the use-case format and checks its relations"""

    def __init__(self, text: str):
        self.text = text
        # name -> (line, column) of its declaration
        self.declared: Dict[str, Tuple[int, int]] = {}
        self.kinds: Dict[str, str] = {}
        self.subject: Optional[str] = None
        self.lists: Dict[str, List] = {key: [] for key in USECASE_PATTERNS if key != "subject"}

    def parse(self) -> UseCaseModel:
        relations: List[Tuple[str, re.Match, int, int]] = []
        for number, indent, statement in iter_statements(self.text):
            keyword = statement.split(None, 1)[0]
            pattern = USECASE_PATTERNS.get(keyword)
            if pattern is None:
                raise ParseError(f"unrecognized statement '{keyword}'", number, indent + 1)
            match = pattern.match(statement)
            if match is None:
                raise ParseError(f"malformed {keyword} statement", number, indent + 1)
            if keyword in ("subject", "actor", "usecase"):
                self.declare(keyword, match, number, indent)
            else:
                relations.append((keyword, match, number, indent))
        if self.subject is None:
            raise ParseError("missing subject declaration", 1, 1)
        for keyword, match, number, indent in relations:
            self.add_relation(keyword, match, number, indent)
        return UseCaseModel(
            subject=self.subject,
            actors=tuple(self.lists["actor"]),
            usecases=tuple(self.lists["usecase"]),
            associations=tuple(self.lists["assoc"]),
            includes=tuple(self.lists["include"]),
            extends=tuple(self.lists["extend"]),
            actor_generalizations=tuple(self.lists["actorgen"]),
            usecase_generalizations=tuple(self.lists["ucgen"]),
        )

    def declare(self, keyword: str, match: re.Match, number: int, indent: int) -> None:
        name = match.group("name")
        column = indent + match.start("name") + 1
        if name in self.declared:
            raise DuplicateName(name, number, column)
        if keyword == "subject":
            if self.subject is not None:
                raise ParseError("subject declared twice", number, indent + 1)
            self.subject = name
        else:
            self.lists[keyword].append(name)
        self.declared[name] = (number, column)
        self.kinds[name] = keyword

    def require(self, match: re.Match, group: str, kind: str, number: int, indent: int) -> str:
        name = match.group(group)
        if self.kinds.get(name) != kind:
            raise UndeclaredName(name, number, indent + match.start(group) + 1)
        return name

    def add_relation(self, keyword: str, match: re.Match, number: int, indent: int) -> None:
        if keyword == "assoc":
            actor = self.require(match, "actor", "actor", number, indent)
            usecase = self.require(match, "usecase", "usecase", number, indent)
            self.lists["assoc"].append((actor, usecase))
        elif keyword == "include":
            base = self.require(match, "base", "usecase", number, indent)
            included = self.require(match, "included", "usecase", number, indent)
            if base == included:
                raise ParseError(f"use case '{base}' cannot include itself", number, indent + 1)
            self.lists["include"].append((base, included))
        elif keyword == "extend":
            extension = self.require(match, "extension", "usecase", number, indent)
            base = self.require(match, "base", "usecase", number, indent)
            if base == extension:
                raise ParseError(f"use case '{base}' cannot extend itself", number, indent + 1)
            condition = (match.group("condition") or "").strip() or None
            self.lists["extend"].append((extension, base, condition))
        else:
            kind = "actor" if keyword == "actorgen" else "usecase"
            specific = self.require(match, "specific", kind, number, indent)
            general = self.require(match, "general", kind, number, indent)
            self.check_acyclic(keyword, specific, general, number, indent)
            self.lists[keyword].append((specific, general))

    def check_acyclic(self, keyword: str, specific: str, general: str, number: int, indent: int) -> None:
        graph = nx.DiGraph(self.lists[keyword])
        graph.add_nodes_from([specific, general])
        if specific == general:
            raise CyclicGeneralization([specific, general], number, indent + 1)
        if nx.has_path(graph, general, specific):
            cycle = nx.shortest_path(graph, general, specific) + [general]
            raise CyclicGeneralization(cycle, number, indent + 1)


class ClassParser:
    """Reads 'class' blocks with indented attr/op lines"""

    def __init__(self, text: str):
        self.text = text

    def parse(self) -> ClassModel:
        classes: List[UmlClass] = []
        current: Optional[Dict] = None
        seen_classes: Dict[str, int] = {}
        for number, indent, statement in iter_statements(self.text):
            keyword = statement.split(None, 1)[0]
            pattern = CLASS_PATTERNS.get(keyword)
            if pattern is None:
                raise ParseError(f"unrecognized statement '{keyword}'", number, indent + 1)
            match = pattern.match(statement)
            if match is None:
                raise ParseError(f"malformed {keyword} statement", number, indent + 1)
            column = indent + match.start("name") + 1
            name = match.group("name")
            if keyword == "class":
                if indent:
                    raise ParseError("class declarations must not be indented", number, indent + 1)
                if name in seen_classes:
                    raise DuplicateName(name, number, column)
                seen_classes[name] = number
                if current is not None:
                    classes.append(self.finish(current))
                current = {"name": name, "attributes": {}, "operations": {}}
                continue
            if current is None or not indent:
                raise ParseError(f"{keyword} outside of a class block", number, indent + 1)
            members = current["attributes"] if keyword == "attr" else current["operations"]
            if name in members:
                raise DuplicateName(name, number, column)
            if keyword == "attr":
                members[name] = Attribute(name=name, type=match.group("type"))
            else:
                parameters = tuple(
                    normalize_parameter(p) for p in match.group("params").split(",") if p.strip()
                )
                members[name] = Operation(name=name, parameters=parameters, decreate=bool(match.group("marker")))
        if current is not None:
            classes.append(self.finish(current))
        return ClassModel(classes=tuple(classes))

    def finish(self, current: Dict) -> UmlClass:
        return UmlClass(
            name=current["name"],
            attributes=tuple(current["attributes"].values()),
            operations=tuple(current["operations"].values()),
        )


def parse_usecase(text: str, source: Optional[str] = None) -> UseCaseModel:
    try:
        return UseCaseParser(text).parse()
    except ParseError as exc:
        if source:
            exc.with_source(source)
        raise


def parse_class(text: str, source: Optional[str] = None) -> ClassModel:
    try:
        return ClassParser(text).parse()
    except ParseError as exc:
        if source:
            exc.with_source(source)
        raise


def serialize_usecase(model: UseCaseModel) -> str:
    lines = ["# use case model", f"subject {model.subject}"]
    lines.extend(f"actor {name}" for name in model.actors)
    lines.extend(f"usecase {name}" for name in model.usecases)
    lines.extend(f"assoc {actor} -- {usecase}" for actor, usecase in model.associations)
    lines.extend(f"include {base} includes {included}" for base, included in model.includes)
    for extension, base, condition in model.extends:
        lines.append(f"extend {extension} extends {base}" + (f" [{condition}]" if condition else ""))
    lines.extend(f"actorgen {specific} -> {general}" for specific, general in model.actor_generalizations)
    lines.extend(f"ucgen {specific} -> {general}" for specific, general in model.usecase_generalizations)
    return "\n".join(lines) + "\n"


def serialize_class(model: ClassModel) -> str:
    lines = ["# class model"]
    for uml_class in model.classes:
        lines.append(f"class {uml_class.name}")
        lines.extend(f"  attr {attribute.name} : {attribute.type}" for attribute in uml_class.attributes)
        for operation in uml_class.operations:
            marker = " @decreate" if operation.decreate else ""
            lines.append(f"  op {operation.name}({', '.join(operation.parameters)}){marker}")
    return "\n".join(lines) + "\n"


def serialize_uml(model: Union[UseCaseModel, ClassModel]) -> str:
    """Canonical text: declarations and relations sorted"""
    if isinstance(model, UseCaseModel):
        return serialize_usecase(model)
    return serialize_class(model)
