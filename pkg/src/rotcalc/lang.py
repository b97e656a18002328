"""Group words, map files and environments.

Word grammar (loosest binding first)::

    word  := term ("*" term)*
    term  := atom ("^" int)*
    atom  := name | "z" | "z^" int | "R(" rational ")" | "[" word "," word "]" | "(" word ")"

``*`` is composition (``f * g`` applies ``g`` first), ``^-1`` is the inverse,
``[a, b]`` is ``a^-1 * b^-1 * a * b``, ``z`` is the unit translation by ``l``
and ``R(q)`` the translation by ``q * l``.
"""

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from gmpy2 import mpq

from .arith import format_rat, parse_rat
from .errors import (
    InvalidMap,
    IoError,
    ParseError,
    RationalFormatError,
    RotcalcError,
    UnboundName,
    WordSyntaxError,
)
from .groups import GroupDescriptor, parse_group, validate_membership
from .plmap import PLLift, commutator, compose, invert, normalize, power

RESERVED = frozenset({"z", "R"})


@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class Inv:
    arg: object


@dataclass(frozen=True)
class Pow:
    arg: object
    exponent: int


@dataclass(frozen=True)
class Comp:
    left: object
    right: object


@dataclass(frozen=True)
class Comm:
    left: object
    right: object


@dataclass(frozen=True)
class Rot:
    amount: mpq


@dataclass(frozen=True)
class Trans:
    count: int


_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_INT_RE = re.compile(r"\d+")


def _tokenize(text):
    """Tokens as ``(kind, text, column)`` with 1-based columns."""
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha():
            m = _IDENT_RE.match(text, i)
            tokens.append(("ident", m.group(), i + 1))
        elif ch.isdigit():
            m = _INT_RE.match(text, i)
            tokens.append(("int", m.group(), i + 1))
        elif ch in "*^[](),-/":
            tokens.append((ch, ch, i + 1))
            i += 1
            continue
        else:
            raise WordSyntaxError(f"unexpected character {ch!r}", i + 1)
        i = m.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            found = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise WordSyntaxError(f"expected {kind!r}, found {found}", tok[2])
        self.i += 1
        return tok

    def word(self):
        node = self.term()
        while self.peek()[0] == "*":
            self.take()
            node = Comp(node, self.term())
        return node

    def signed_int(self):
        neg = self.peek()[0] == "-"
        if neg:
            self.take()
        value = int(self.take("int")[1])
        return -value if neg else value

    def term(self):
        node = self.atom()
        while self.peek()[0] == "^":
            self.take()
            n = self.signed_int()
            node = Inv(node) if n == -1 else Pow(node, n)
        return node

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "ident":
            self.take()
            if text == "z":
                if self.peek()[0] == "^":
                    self.take()
                    return Trans(self.signed_int())
                return Trans(1)
            if text == "R":
                self.take("(")
                num = self.signed_int()
                den = 1
                if self.peek()[0] == "/":
                    self.take()
                    den = int(self.take("int")[1])
                    if den == 0:
                        raise WordSyntaxError("zero denominator", self.tokens[self.i - 1][2])
                self.take(")")
                return Rot(mpq(num, den))
            return Gen(text)
        if kind == "[":
            self.take()
            left = self.word()
            self.take(",")
            right = self.word()
            self.take("]")
            return Comm(left, right)
        if kind == "(":
            self.take()
            node = self.word()
            self.take(")")
            return node
        found = "end of input" if kind == "eof" else repr(text)
        raise WordSyntaxError(f"unexpected {found}", pos)


def parse_word(text):
    """Parse a word; raises :class:`WordSyntaxError` with a 1-based offset."""
    p = _Parser(text)
    node = p.word()
    kind, text_, pos = p.peek()
    if kind != "eof":
        raise WordSyntaxError(f"unexpected {text_!r}", pos)
    return node


def format_word(e):
    """Canonical text; ``parse_word(format_word(e)) == e`` for words built with ``Inv`` for ``^-1``."""
    if isinstance(e, Gen):
        return e.name
    if isinstance(e, Trans):
        return "z" if e.count == 1 else f"z^{e.count}"
    if isinstance(e, Rot):
        return f"R({format_rat(e.amount)})"
    if isinstance(e, Comm):
        return f"[{format_word(e.left)}, {format_word(e.right)}]"
    if isinstance(e, Comp):
        right = format_word(e.right)
        if isinstance(e.right, Comp):
            right = f"({right})"
        return f"{format_word(e.left)} * {right}"
    if isinstance(e, (Inv, Pow)):
        base = format_word(e.arg)
        if isinstance(e.arg, (Comp, Trans)):
            base = f"({base})"
        n = -1 if isinstance(e, Inv) else e.exponent
        return f"{base}^{n}"
    raise TypeError(f"not a word: {e!r}")


@dataclass
class MapEnvironment:
    group: GroupDescriptor = None
    bindings: dict = field(default_factory=dict)

    @property
    def l(self):
        if self.group is not None:
            return self.group.l
        for F in self.bindings.values():
            return F.l
        return mpq(1)


def eval_word(e, env=None):
    env = env if env is not None else MapEnvironment()
    l = env.l
    if isinstance(e, Gen):
        try:
            return env.bindings[e.name]
        except KeyError:
            raise UnboundName(e.name) from None
    if isinstance(e, Trans):
        return PLLift.translation(e.count * l, l)
    if isinstance(e, Rot):
        return PLLift.translation(e.amount * l, l)
    if isinstance(e, Inv):
        return invert(eval_word(e.arg, env))
    if isinstance(e, Pow):
        return power(eval_word(e.arg, env), e.exponent)
    if isinstance(e, Comp):
        return compose(eval_word(e.left, env), eval_word(e.right, env))
    if isinstance(e, Comm):
        return commutator(eval_word(e.left, env), eval_word(e.right, env))
    raise TypeError(f"not a word: {e!r}")


# -- map files ----------------------------------------------------------------


def map_to_obj(F):
    return {
        "l": format_rat(F.l),
        "offset": 0,
        "pieces": [{"x": format_rat(x), "v": format_rat(v), "slope": format_rat(s)}
                   for x, v, s in zip(F.xs, F.vs, F.ss)],
    }


def serialize_map(F):
    """Canonical compact JSON text (offset 0)."""
    return json.dumps(map_to_obj(F), separators=(",", ":"))


def map_from_obj(obj):
    try:
        l = parse_rat(obj["l"])
        offset = obj.get("offset", 0)
        if not isinstance(offset, int) or isinstance(offset, bool):
            raise ParseError(f"offset must be an integer, got {offset!r}")
        raw = [(parse_rat(p["x"]), parse_rat(p["v"]) + offset * l, parse_rat(p["slope"]))
               for p in obj["pieces"]]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed map object: {exc}") from exc
    except RationalFormatError as exc:
        raise ParseError(str(exc)) from exc
    if l <= 0:
        raise ParseError(f"circumference must be positive, got {l}")
    try:
        return normalize(raw, l)
    except InvalidMap:
        raise
    except RotcalcError as exc:
        raise InvalidMap(str(exc)) from exc


def parse_map(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return map_from_obj(obj)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror}") from exc


def load_map_file(path):
    return parse_map(_read(path))


def save_map_file(F, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize_map(F) + "\n")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror}") from exc


def load_environment(path, unchecked=False):
    """Read ``{"group": "...", "maps": {name: map}}``; members are validated unless ``unchecked``."""
    try:
        obj = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return environment_from_obj(obj, unchecked)


def environment_from_obj(obj, unchecked=False):
    if not isinstance(obj, dict) or "maps" not in obj:
        raise ParseError("environment needs a 'maps' object")
    group = parse_group(obj["group"]) if obj.get("group") else None
    env = MapEnvironment(group)
    for name, mobj in obj["maps"].items():
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name) or name in RESERVED:
            raise ParseError(f"invalid or reserved map name {name!r}")
        F = map_from_obj(mobj)
        if group is not None and not unchecked:
            report = validate_membership(F, group)
            if not report.ok:
                failed = ", ".join(k for k, v in report.checks.items() if not v)
                raise InvalidMap(f"map {name!r} is not in {group}: {failed}")
        env.bindings[name] = F
    if group is not None and any(F.l != group.l for F in env.bindings.values()):
        raise InvalidMap("all maps must share the group's circumference")
    return env


def example39_path():
    return resources.files("rotcalc") / "data" / "example39.json"


def example39():
    """The bundled two-piece map with slopes 2/3 and 4/3 and ``F(0) = 2/3``."""
    return parse_map(example39_path().read_text(encoding="utf-8"))
