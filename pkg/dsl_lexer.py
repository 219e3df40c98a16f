# Tokenizer shared by the brace-structured input formats (TM models, event files)
# Positions are 1-based so error messages can point at file:line:column

import re
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from tm_errors import ParseError

TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>[ \t\r\f\v]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<arrow>->)
  | (?P<word>[A-Za-z_](?:[A-Za-z0-9_]|-(?=[A-Za-z0-9_]))*(?:[./][A-Za-z_](?:[A-Za-z0-9_]|-(?=[A-Za-z0-9_]))*)*)
  | (?P<number>\d+)
  | (?P<punct>[{}();,=\[\]])
    """,
    re.VERBOSE,
)

ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    value: str
    line: int
    column: int


def unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: ESCAPES.get(m.group(1), m.group(1)), body)


def quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = TOKEN_PATTERN.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        column = pos - line_start + 1
        if kind == "newline":
            tokens.append(Token(kind="newline", value="\n", line=line, column=column))
            line += 1
            line_start = match.end()
        elif kind == "string":
            tokens.append(Token(kind="string", value=unescape(match.group()[1:-1]), line=line, column=column))
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind=kind, value=match.group(), line=line, column=column))
        pos = match.end()
    tokens.append(Token(kind="eof", value="", line=line, column=pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over tokens with the usual peek/accept/expect helpers"""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        token = self.peek()
        return token.kind == kind and (value is None or token.value == value)

    def at_keyword(self, keyword: str) -> bool:
        return self.at("word", keyword)

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: Optional[str] = None, what: Optional[str] = None) -> Token:
        token = self.peek()
        if not self.at(kind, value):
            wanted = what or (repr(value) if value else kind)
            found = "end of input" if token.kind == "eof" else repr(token.value)
            raise ParseError(f"expected {wanted}, found {found}", token.line, token.column)
        return self.advance()

    def skip_separators(self) -> None:
        while self.at("newline") or self.at("punct", ";"):
            self.advance()

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.peek()
        return ParseError(message, token.line, token.column)
