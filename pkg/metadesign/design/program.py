"""
Validated program representation: token parsing, control flow blocks and
the canonical text and JSON forms.
"""
import logging
import re
from dataclasses import dataclass

from metadesign.design.space import (
    COMPONENTS_BY_NAME,
    COUNT_PERCENTS,
    FORK_OFFSETS,
    GrammarError,
    build_vocabulary,
    get_grammar,
    snap_to_grid,
)
from metadesign.models.enums import (
    EVENT_BY_NAME,
    EVENT_NAMES,
    POINTER_BY_NAME,
    POINTER_NAMES,
    ComponentCategory,
    ConditionKind,
    Phase,
    PointerKind,
    TokenKind,
)

log = logging.getLogger(__name__)


class ProgramParseError(ValueError):
    """Token sequence rejected; position is the index of the offending token."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (token {position})")


class ProgramSyntaxError(ValueError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


@dataclass(frozen=True)
class Pointer:
    kind: PointerKind
    offset: int = None

    def to_text(self):
        if self.kind is PointerKind.FORK:
            return f"fork({self.offset})"
        return POINTER_NAMES[self.kind]


@dataclass(frozen=True)
class Condition:
    kind: ConditionKind
    fraction: float = None
    event: object = None

    @property
    def percent(self):
        return int(round(self.fraction * 100))

    def to_text(self):
        if self.kind is ConditionKind.ONCE:
            return "once"
        if self.kind is ConditionKind.COUNT:
            return f"count({self.percent}%FE)"
        return f"event({EVENT_NAMES[self.event]})"


ONCE = Condition(ConditionKind.ONCE)


@dataclass(frozen=True)
class Snippet:
    component: object
    params: tuple
    pointer: Pointer
    condition: Condition

    def to_text(self):
        head = self.component.name
        if self.params:
            head += "(" + ", ".join(f"{v:g}" for v in self.params) + ")"
        return f"{head} | {self.pointer.to_text()} | {self.condition.to_text()}"

    def as_dict(self):
        pointer = {"kind": POINTER_NAMES[self.pointer.kind]}
        if self.pointer.kind is PointerKind.FORK:
            pointer["offset"] = self.pointer.offset
        condition = {"kind": self.condition.kind.name.lower()}
        if self.condition.kind is ConditionKind.COUNT:
            condition["percent"] = self.condition.percent
        elif self.condition.kind is ConditionKind.EVENT:
            condition["event"] = EVENT_NAMES[self.condition.event]
        return {
            "component": self.component.name,
            "params": list(self.params),
            "pointer": pointer,
            "condition": condition,
        }


@dataclass(frozen=True)
class Block:
    """
    A loop over snippets start..end (inclusive). The top level block has no
    condition; its body holds snippet indices and nested blocks.
    """
    start: int
    end: int
    condition: Condition
    body: tuple

    def walk(self):
        yield self
        for item in self.body:
            if isinstance(item, Block):
                yield from item.walk()


@dataclass(frozen=True)
class Program:
    snippets: tuple
    source_tokens: tuple

    def __len__(self):
        return len(self.snippets)

    def __str__(self):
        return to_text(self)

    @property
    def tokens(self):
        return self.source_tokens

    def categories(self):
        return {s.component.category for s in self.snippets}

    def as_dict(self):
        return {
            "text": to_text(self),
            "tokens": list(self.source_tokens),
            "snippets": [s.as_dict() for s in self.snippets],
        }


def parse_tokens(tokens):
    """
    Parse a token sequence (optionally starting with begin, always ending
    with end) into a Program. Event conditions are accepted.
    """
    grammar = get_grammar(allow_events=True)
    vocab = grammar.vocab
    tokens = tuple(int(t) for t in tokens)
    if tokens and tokens[0] == vocab.begin:
        tokens = tokens[1:]

    state = grammar.initial()
    snippets = []
    current = None
    for position, token in enumerate(tokens):
        if state.phase is Phase.DONE:
            raise ProgramParseError("tokens after end", position)
        try:
            next_state = grammar.advance(state, token)
        except GrammarError as e:
            raise ProgramParseError(str(e), position)

        phase = state.phase
        tok = vocab[token]
        if phase is Phase.EXPECT_COMPONENT and tok.kind is TokenKind.COMPONENT:
            current = {"component": tok.value, "params": [], "offset": None}
        elif phase is Phase.EXPECT_PARAM:
            current["params"].append(tok.value)
        elif phase is Phase.EXPECT_POINTER:
            current["pointer"] = tok.value
        elif phase is Phase.EXPECT_FORK_OFFSET:
            current["offset"] = tok.value
        elif phase is Phase.EXPECT_CONDITION:
            snippets.append(Snippet(
                component=current["component"],
                params=tuple(current["params"]),
                pointer=Pointer(current["pointer"], current["offset"]),
                condition=_condition_from_token(tok),
            ))
            current = None
        state = next_state

    if state.phase is not Phase.DONE:
        raise ProgramParseError("missing end", len(tokens))
    return Program(snippets=tuple(snippets), source_tokens=tokens)


def _condition_from_token(token):
    if token.name == "once":
        return ONCE
    if isinstance(token.value, float):
        return Condition(ConditionKind.COUNT, fraction=token.value)
    return Condition(ConditionKind.EVENT, event=token.value)


def program_to_tokens(snippets):
    """
    Encode snippets into tokens (ending with end, without begin).
    """
    vocab = build_vocabulary()
    tokens = []
    for s in snippets:
        tokens.append(vocab.component_index(s.component.name))
        for kind, value in zip(s.component.param_kinds, s.params):
            tokens.append(vocab.value_token(kind, value))
        tokens.append(vocab.pointer_token(s.pointer.kind))
        if s.pointer.kind is PointerKind.FORK:
            tokens.append(vocab.offset_token(s.pointer.offset))
        if s.condition.kind is ConditionKind.ONCE:
            tokens.append(vocab.index("once"))
        elif s.condition.kind is ConditionKind.COUNT:
            tokens.append(vocab.count_token(s.condition.percent))
        else:
            tokens.append(vocab.index(EVENT_NAMES[s.condition.event]))
    tokens.append(vocab.end)
    return tuple(tokens)


def control_flow(program):
    """
    Build the block tree. fork(k) at snippet i loops over i..i+k, iterate
    loops over i alone; an inner fork is clamped to its outer block.
    """
    snippets = program.snippets

    def build(start, end):
        body = []
        i = start
        while i <= end:
            s = snippets[i]
            if s.pointer.kind is PointerKind.FORK:
                stop = min(i + s.pointer.offset, end)
                body.append(Block(i, stop, s.condition, (i,) + build(i + 1, stop)))
                i = stop + 1
            elif s.pointer.kind is PointerKind.ITERATE:
                body.append(Block(i, i, s.condition, (i,)))
                i += 1
            else:
                body.append(i)
                i += 1
        return tuple(body)

    last = len(snippets) - 1
    return Block(0, last, None, build(0, last))


def validate(program):
    """
    Warnings for semantically odd programs. Never raises.
    """
    warnings = []
    categories = program.categories()
    if ComponentCategory.SEARCH not in categories:
        warnings.append("no search component")
    if ComponentCategory.SELECT not in categories:
        warnings.append("no select component")
    for block in control_flow(program).walk():
        if block.condition is None:
            continue
        s = program.snippets[block.start]
        if s.pointer.kind is PointerKind.FORK and block.end - block.start < s.pointer.offset:
            warnings.append(
                f"fork offset clamped at snippet {block.start}: {s.pointer.offset} -> {block.end - block.start}"
            )
    return warnings


def to_text(program):
    return "; ".join(s.to_text() for s in program.snippets)


def as_json(program):
    return program.as_dict()


def from_json(data):
    """
    Rebuild a Program from its JSON form (the `snippets` list drives it).
    """
    text = "; ".join(_snippet_text_from_dict(s) for s in data["snippets"])
    return from_text(text)


def _snippet_text_from_dict(s):
    head = s["component"]
    if s.get("params"):
        head += "(" + ", ".join(f"{float(v):g}" for v in s["params"]) + ")"
    pointer = s["pointer"]
    ptr = f"fork({pointer['offset']})" if pointer["kind"] == "fork" else pointer["kind"]
    cond = s["condition"]
    if cond["kind"] == "count":
        cond_text = f"count({cond['percent']}%FE)"
    elif cond["kind"] == "event":
        cond_text = f"event({cond['event']})"
    else:
        cond_text = "once"
    return f"{head} | {ptr} | {cond_text}"


_LEXEME_RE = re.compile(
    r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<punct>[;|(),%])"
)


class _Scanner:

    def __init__(self, text):
        self.text = text
        self.lexemes = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _LEXEME_RE.match(text, pos)
            if not m:
                raise self.error(f"unexpected character {text[pos]!r}", pos)
            self.lexemes.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def location(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, column

    def error(self, message, pos):
        return ProgramSyntaxError(message, *self.location(pos))

    def at_end(self):
        return self.i >= len(self.lexemes)

    def position(self):
        if self.at_end():
            return len(self.text)
        return self.lexemes[self.i][2]

    def peek(self, value=None):
        if self.at_end():
            return False
        return value is None or self.lexemes[self.i][1] == value

    def take(self, kind, value=None, what=None):
        if self.at_end():
            raise self.error(f"expected {what or value or kind}, found end of input", len(self.text))
        lex_kind, lex, pos = self.lexemes[self.i]
        if lex_kind != kind or (value is not None and lex != value):
            raise self.error(f"expected {what or value or kind}, found {lex!r}", pos)
        self.i += 1
        return lex, pos


def from_text(text):
    """
    Parse the canonical text form `name(v) | ptr | cond; ...` into a Program.
    """
    scanner = _Scanner(text)
    if scanner.at_end():
        raise scanner.error("empty program", 0)

    snippets = []
    starts = []
    while True:
        starts.append(scanner.position())
        snippets.append(_read_snippet(scanner))
        if scanner.at_end():
            break
        scanner.take("punct", ";")

    tokens = program_to_tokens(snippets)
    try:
        return parse_tokens(tokens)
    except ProgramParseError as e:
        index = _snippet_at(snippets, e.position)
        raise scanner.error(str(e).split(" (token")[0], starts[min(index, len(starts) - 1)])


def _snippet_at(snippets, position):
    # Which snippet owns the token at `position`
    consumed = 0
    for i, s in enumerate(snippets):
        consumed += 3 + s.component.arity + (1 if s.pointer.kind is PointerKind.FORK else 0)
        if position < consumed:
            return i
    return len(snippets)


def _read_snippet(scanner):
    name, pos = scanner.take("name", what="component name")
    component = COMPONENTS_BY_NAME.get(name)
    if component is None:
        raise scanner.error(f"unknown component {name!r}", pos)

    values = []
    if scanner.peek("("):
        scanner.take("punct", "(")
        while True:
            lex, vpos = scanner.take("number", what="hyperparameter value")
            values.append((float(lex), vpos))
            if scanner.peek(","):
                scanner.take("punct", ",")
                continue
            scanner.take("punct", ")")
            break
    if len(values) != component.arity:
        raise scanner.error(f"{name} takes {component.arity} hyperparameter(s), got {len(values)}", pos)
    params = []
    for kind, (value, vpos) in zip(component.param_kinds, values):
        snapped = snap_to_grid(value, kind)
        if snapped is None:
            raise scanner.error(f"value {value:g} is not on the {kind.name.lower().replace('_', '-')}", vpos)
        params.append(snapped)

    scanner.take("punct", "|")
    pointer = _read_pointer(scanner)
    scanner.take("punct", "|")
    condition = _read_condition(scanner)
    return Snippet(component, tuple(params), pointer, condition)


def _read_pointer(scanner):
    name, pos = scanner.take("name", what="pointer")
    kind = POINTER_BY_NAME.get(name)
    if kind is None:
        raise scanner.error(f"unknown pointer {name!r}", pos)
    if kind is not PointerKind.FORK:
        return Pointer(kind)
    scanner.take("punct", "(")
    lex, opos = scanner.take("number", what="fork offset")
    if not lex.isdigit() or int(lex) not in FORK_OFFSETS:
        raise scanner.error(f"fork offset must be one of {FORK_OFFSETS}, got {lex}", opos)
    scanner.take("punct", ")")
    return Pointer(kind, int(lex))


def _read_condition(scanner):
    name, pos = scanner.take("name", what="condition")
    if name == "once":
        return ONCE
    if name == "count":
        scanner.take("punct", "(")
        lex, cpos = scanner.take("number", what="count percentage")
        value = float(lex)
        if value not in COUNT_PERCENTS:
            raise scanner.error(f"count must be one of {COUNT_PERCENTS} percent, got {lex}", cpos)
        scanner.take("punct", "%")
        scanner.take("name", "FE")
        scanner.take("punct", ")")
        return Condition(ConditionKind.COUNT, fraction=int(value) / 100)
    if name == "event":
        scanner.take("punct", "(")
        event_name, epos = scanner.take("name", what="event name")
        if event_name not in EVENT_BY_NAME:
            raise scanner.error(f"unknown event {event_name!r}", epos)
        scanner.take("punct", ")")
        return Condition(ConditionKind.EVENT, event=EVENT_BY_NAME[event_name])
    raise scanner.error(f"unknown condition {name!r}", pos)
