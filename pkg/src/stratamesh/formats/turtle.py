"""Turtle subset: tokenizer, parser, and canonical serializer.

Supported syntax: ``@prefix`` directives, absolute ``<IRI>`` refs, prefixed
names, the ``a`` keyword, plain / language-tagged / typed literals, ``;``
and ``,`` separators, ``#`` comments, arbitrary whitespace, and ``_:``
blank node labels. Everything else is rejected. The subset is closed under
the serializer below.

Canonical output: used prefixes sorted by name, statements grouped per
subject with subjects sorted, ``rdf:type`` first then predicates sorted by
IRI, objects sorted within each predicate group.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from ..errors import ParseError
from .iris import META_NS, OWL_NS, RDFS_NS, RDF_TYPE, XSD_NS

IRI_BODY_RE = re.compile(r'^[A-Za-z][A-Za-z0-9+.-]*:[^\x00-\x20<>"{}|^`\\]*$')
PNAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")
PN_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$|^$")

WELL_KNOWN_PREFIXES = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": RDFS_NS,
    "owl": OWL_NS,
    "xsd": XSD_NS,
    "meta": META_NS,
}


@dataclass(frozen=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlankNode:
    label: str


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: Optional[str] = None  # absolute IRI; None means xsd:string
    language: Optional[str] = None


Term = Union[Iri, BlankNode, Literal]
Triple = tuple[Term, Iri, Term]


@dataclass(frozen=True)
class TurtleDocument:
    prefixes: dict[str, str] = field(default_factory=dict)
    triples: tuple[Triple, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "triples", _canonical_triples(self.triples))


def _term_sort_key(term: Term) -> tuple:
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype or "", term.language or "")


def _triple_sort_key(triple: Triple) -> tuple:
    s, p, o = triple
    # rdf:type sorts before every other predicate of the same subject
    pred = (0, "") if p.value == RDF_TYPE else (1, p.value)
    return (_term_sort_key(s), pred, _term_sort_key(o))


def _canonical_triples(triples: Iterable[Triple]) -> tuple[Triple, ...]:
    return tuple(sorted(set(triples), key=_triple_sort_key))


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "\\": "\\", "'": "'"}


class _Scanner:
    def __init__(self, text: str, location: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.location = location

    def error(self, message: str) -> ParseError:
        return ParseError(f"line {self.line}: {message}", self.location)

    def _skip_ws(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            elif ch == "\n":
                self.line += 1
                self.pos += 1
            elif ch.isspace():
                self.pos += 1
            else:
                return

    def next_token(self) -> tuple[str, object]:
        """Return (kind, value); kinds: iri, pname, string, langtag,
        caretcaret, a, dot, semi, comma, prefix, blank, eof.
        """
        self._skip_ws()
        if self.pos >= len(self.text):
            return ("eof", None)
        text, pos = self.text, self.pos
        ch = text[pos]
        if ch == "<":
            end = text.find(">", pos + 1)
            newline = text.find("\n", pos + 1)
            if end < 0 or (0 <= newline < end):
                raise self.error("unterminated IRI")
            body = text[pos + 1:end]
            if not IRI_BODY_RE.match(body):
                raise self.error(f"malformed IRI <{body}>")
            self.pos = end + 1
            return ("iri", body)
        if ch == '"':
            return ("string", self._scan_string())
        if ch == "@":
            word = self._scan_word(pos + 1)
            if word == "prefix":
                return ("prefix", None)
            if word == "base":
                raise self.error("unknown directive @base (not part of the subset)")
            if re.fullmatch(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*", word):
                return ("langtag", word)
            raise self.error(f"unknown directive @{word}")
        if text.startswith("^^", pos):
            self.pos += 2
            return ("caretcaret", None)
        if ch in ".;,":
            self.pos += 1
            return ({".": "dot", ";": "semi", ",": "comma"}[ch], None)
        if text.startswith("_:", pos):
            word = self._scan_word(pos + 2)
            if not word:
                raise self.error("blank node label expected after _:")
            return ("blank", word)
        # prefixed name or bare keyword
        match = re.match(r"[A-Za-z0-9_][A-Za-z0-9_.:-]*", text[pos:])
        if not match:
            raise self.error(f"unexpected character {ch!r}")
        word = match.group(0)
        while word.endswith("."):  # trailing dot terminates the statement
            word = word[:-1]
        self.pos = pos + len(word)
        if word == "a":
            return ("a", None)
        if ":" in word:
            prefix, _, local = word.partition(":")
            return ("pname", (prefix, local))
        raise self.error(f"unexpected token {word!r}")

    def _scan_word(self, start: int) -> str:
        match = re.match(r"[A-Za-z0-9_-]*", self.text[start:])
        word = match.group(0) if match else ""
        self.pos = start + len(word)
        return word

    def _scan_string(self) -> str:
        text = self.text
        pos = self.pos + 1
        out: list[str] = []
        while pos < len(text):
            ch = text[pos]
            if ch == '"':
                self.pos = pos + 1
                return "".join(out)
            if ch == "\n":
                raise self.error("literal without closing quote")
            if ch == "\\":
                if pos + 1 >= len(text):
                    break
                esc = text[pos + 1]
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    pos += 2
                    continue
                if esc == "u" or esc == "U":
                    width = 4 if esc == "u" else 8
                    hexpart = text[pos + 2:pos + 2 + width]
                    if len(hexpart) < width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                        raise self.error(f"bad \\{esc} escape")
                    out.append(chr(int(hexpart, 16)))
                    pos += 2 + width
                    continue
                raise self.error(f"unknown escape \\{esc}")
            out.append(ch)
            pos += 1
        raise self.error("literal without closing quote")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def parse_turtle(data: bytes | str, location: str = "") -> TurtleDocument:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    scanner = _Scanner(text, location)
    prefixes: dict[str, str] = {}
    triples: list[Triple] = []

    def resolve(prefix: str, local: str) -> str:
        if prefix not in prefixes:
            raise scanner.error(f"undeclared prefix {prefix!r}")
        if not PN_LOCAL_RE.match(local):
            raise scanner.error(f"bad local name {local!r}")
        return prefixes[prefix] + local

    def term_from(kind: str, value: object, *, as_predicate: bool = False) -> Term:
        if kind == "iri":
            return Iri(str(value))
        if kind == "pname":
            prefix, local = value  # type: ignore[misc]
            return Iri(resolve(prefix, local))
        if kind == "a":
            return Iri(RDF_TYPE)
        if kind == "blank":
            if as_predicate:
                raise scanner.error("blank node cannot be a predicate")
            return BlankNode(str(value))
        if kind == "string":
            lexical = str(value)
            mark = scanner.pos
            nk, nv = scanner.next_token()
            if nk == "langtag":
                return Literal(lexical, language=str(nv))
            if nk == "caretcaret":
                dk, dv = scanner.next_token()
                if dk == "iri":
                    return Literal(lexical, datatype=str(dv))
                if dk == "pname":
                    prefix, local = dv  # type: ignore[misc]
                    return Literal(lexical, datatype=resolve(prefix, local))
                raise scanner.error("datatype IRI expected after ^^")
            scanner.pos = mark
            return Literal(lexical)
        raise scanner.error(f"unexpected {kind} token")

    while True:
        kind, value = scanner.next_token()
        if kind == "eof":
            break
        if kind == "prefix":
            pk, pv = scanner.next_token()
            if pk != "pname" or pv[1] != "":  # type: ignore[index]
                raise scanner.error("@prefix expects `name:`")
            name = pv[0]  # type: ignore[index]
            if name and not PNAME_RE.match(name):
                raise scanner.error(f"bad prefix name {name!r}")
            ik, iv = scanner.next_token()
            if ik != "iri":
                raise scanner.error("@prefix expects an IRI")
            dk, _ = scanner.next_token()
            if dk != "dot":
                raise scanner.error("@prefix must end with `.`")
            prefixes[name] = str(iv)
            continue
        if kind in ("string", "langtag", "caretcaret", "dot", "semi", "comma"):
            raise scanner.error(f"statement cannot start with {kind}")
        subject = term_from(kind, value)
        if isinstance(subject, Literal):
            raise scanner.error("literal cannot be a subject")
        predicates_seen = 0
        while True:  # predicate-object lists separated by ';'
            pk, pv = scanner.next_token()
            if pk == "semi":
                continue
            if pk == "dot":
                if not predicates_seen:
                    raise scanner.error("statement needs at least one predicate-object pair")
                break
            predicates_seen += 1
            predicate = term_from(pk, pv, as_predicate=True)
            if not isinstance(predicate, Iri):
                raise scanner.error("predicate must be an IRI")
            while True:  # objects separated by ','
                ok, ov = scanner.next_token()
                obj = term_from(ok, ov)
                triples.append((subject, predicate, obj))
                nk, _ = scanner.next_token()
                if nk == "comma":
                    continue
                if nk == "semi":
                    break
                if nk == "dot":
                    break
                raise scanner.error("expected `,`, `;` or `.` after object")
            if nk == "dot":
                break

    return TurtleDocument(prefixes=prefixes, triples=tuple(triples))


# ---------------------------------------------------------------------------
# Canonical serializer
# ---------------------------------------------------------------------------


def _escape(lexical: str) -> str:
    out = []
    for ch in lexical:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _choose_prefixes(triples: Iterable[Triple]) -> dict[str, str]:
    """Deterministically assign prefix names to every ``#`` namespace used."""
    namespaces: set[str] = set()

    def note(iri: str) -> None:
        cut = iri.rfind("#")
        if cut > 0:
            namespaces.add(iri[:cut + 1])

    for s, p, o in triples:
        if isinstance(s, Iri):
            note(s.value)
        if p.value != RDF_TYPE:  # rdf:type renders as `a`
            note(p.value)
        if isinstance(o, Iri):
            note(o.value)
        elif isinstance(o, Literal) and o.datatype:
            note(o.datatype)

    chosen: dict[str, str] = {}
    reverse_known = {ns: name for name, ns in WELL_KNOWN_PREFIXES.items()}
    rest = []
    for ns in sorted(namespaces):
        if ns in reverse_known:
            chosen[reverse_known[ns]] = ns
        else:
            rest.append(ns)
    for i, ns in enumerate(rest):
        if ns.startswith("mesh://") and ns.endswith("/vocab#"):
            name = "vocab" if "vocab" not in chosen else f"vocab{len([p for p in chosen if p.startswith('vocab')]) + 1}"
        else:
            name = f"ns{i + 1}"
        chosen[name] = ns
    return chosen


def _render_iri(iri: str, by_ns: dict[str, str]) -> str:
    cut = iri.rfind("#")
    if cut > 0:
        ns, local = iri[:cut + 1], iri[cut + 1:]
        prefix = by_ns.get(ns)
        if prefix is not None and PN_LOCAL_RE.match(local) and not local.endswith("."):
            return f"{prefix}:{local}"
    return f"<{iri}>"


def _render_term(term: Term, by_ns: dict[str, str]) -> str:
    if isinstance(term, Iri):
        return _render_iri(term.value, by_ns)
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    rendered = f'"{_escape(term.lexical)}"'
    if term.language:
        return f"{rendered}@{term.language}"
    if term.datatype and term.datatype != XSD_NS + "string":
        return f"{rendered}^^{_render_iri(term.datatype, by_ns)}"
    return rendered


def serialize_turtle(doc: TurtleDocument) -> bytes:
    """Render the canonical byte form; prefix declarations are derived
    from the triples actually present, so the output is a pure function
    of the triple set.
    """
    triples = doc.triples
    prefixes = _choose_prefixes(triples)
    by_ns = {ns: name for name, ns in prefixes.items()}
    lines = [f"@prefix {name}: <{ns}> ." for name, ns in sorted(prefixes.items())]

    by_subject: dict[tuple, list[Triple]] = {}
    for triple in triples:
        by_subject.setdefault(_term_sort_key(triple[0]), []).append(triple)

    for _, group in sorted(by_subject.items()):
        subject = group[0][0]
        if lines:
            lines.append("")
        parts: list[str] = []
        by_pred: dict[tuple, list[Term]] = {}
        for _, p, o in group:
            key = (0, "") if p.value == RDF_TYPE else (1, p.value)
            by_pred.setdefault(key, []).append(o)
        for (flag, pred_iri), objects in sorted(by_pred.items()):
            rendered_pred = "a" if flag == 0 else _render_iri(pred_iri, by_ns)
            rendered_objs = ", ".join(
                _render_term(o, by_ns) for o in sorted(objects, key=_term_sort_key)
            )
            parts.append(f"{rendered_pred} {rendered_objs}")
        lines.append(f"{_render_term(subject, by_ns)} " + " ;\n    ".join(parts) + " .")

    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
