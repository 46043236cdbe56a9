"""Line-oriented N-Triples ingestion for SKOS vocabularies.

Recognized predicates are the full-IRI SKOS terms for prefLabel,
altLabel, definition, broader, narrower and inScheme.  Everything else
is silently ignored, since real SKOS exports carry many extra triples.
Topic ids are the full subject IRIs (or blank-node labels), kept opaque.
"""

from __future__ import annotations

import re

from ..errors import MalformedTriple, MissingPrefLabel
from .model import Kind, KosGraph, KosScheme, TopicNode, assemble_graph

SKOS = "http://www.w3.org/2004/02/skos/core#"

PREF_LABEL = SKOS + "prefLabel"
ALT_LABEL = SKOS + "altLabel"
DEFINITION = SKOS + "definition"
BROADER = SKOS + "broader"
NARROWER = SKOS + "narrower"
IN_SCHEME = SKOS + "inScheme"

RECOGNIZED = {PREF_LABEL, ALT_LABEL, DEFINITION, BROADER, NARROWER, IN_SCHEME}

DEFAULT_SCHEME_ID = "urn:topikos:scheme:default"

_IRI_RE = re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")
_BLANK_RE = re.compile(r"_:[A-Za-z0-9][A-Za-z0-9._-]*")
_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def parse_skos_ntriples(text: str) -> KosGraph:
    """Parse N-Triples text into a validated topic graph.

    Raises MalformedTriple (with line number), DanglingReference,
    CycleDetected or MissingPrefLabel.
    """
    pref: dict[str, str] = {}
    alts: dict[str, list[str]] = {}
    defs: dict[str, str] = {}
    broader: dict[str, list[str]] = {}
    narrower: dict[str, list[str]] = {}
    declared: list[str] = []  # subjects of recognized triples, in order
    scheme_ids: set[str] = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        subject, predicate, obj = _parse_triple(line, line_no)
        if predicate not in RECOGNIZED:
            continue
        if subject not in broader:
            declared.append(subject)
            broader[subject] = []
            narrower[subject] = []
            alts[subject] = []
        if predicate == PREF_LABEL:
            value = _require_literal(obj, line_no, "prefLabel")
            if subject in pref:
                alts[subject].append(value)  # extra prefLabels (e.g. languages) demoted
            else:
                pref[subject] = value
        elif predicate == ALT_LABEL:
            alts[subject].append(_require_literal(obj, line_no, "altLabel"))
        elif predicate == DEFINITION:
            defs.setdefault(subject, _require_literal(obj, line_no, "definition"))
        elif predicate == BROADER:
            target = _require_iri(obj, line_no, "broader")
            if target not in broader[subject]:
                broader[subject].append(target)
        elif predicate == NARROWER:
            target = _require_iri(obj, line_no, "narrower")
            if target not in narrower[subject]:
                narrower[subject].append(target)
        elif predicate == IN_SCHEME:
            scheme_ids.add(_require_iri(obj, line_no, "inScheme"))

    for subject in declared:
        if subject not in pref:
            raise MissingPrefLabel(subject)

    scheme_id = sorted(scheme_ids)[0] if scheme_ids else DEFAULT_SCHEME_ID
    scheme = KosScheme(id=scheme_id, name=scheme_id, kind=Kind.MULTI_FIELD)
    nodes = {
        subject: TopicNode(
            id=subject,
            scheme_id=scheme_id,
            pref_label=pref[subject],
            alt_labels=alts[subject],
            definition=defs.get(subject, ""),
            broader=broader[subject],
            narrower=narrower[subject],
        )
        for subject in declared
    }
    return assemble_graph(scheme, nodes)


def _parse_triple(line: str, line_no: int) -> tuple[str, str, "_Term"]:
    pos = 0
    subject, pos = _read_term(line, pos, line_no, allow_literal=False)
    predicate, pos = _read_term(line, pos, line_no, allow_literal=False)
    obj, pos = _read_term(line, pos, line_no, allow_literal=True)
    rest = line[pos:].strip()
    if rest != ".":
        raise MalformedTriple(line_no, "expected terminating '.'")
    return subject.value, predicate.value, obj


class _Term:
    __slots__ = ("value", "is_literal")

    def __init__(self, value: str, is_literal: bool):
        self.value = value
        self.is_literal = is_literal


def _read_term(line: str, pos: int, line_no: int, allow_literal: bool) -> tuple[_Term, int]:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    if pos >= len(line):
        raise MalformedTriple(line_no, "unexpected end of line")
    ch = line[pos]
    if ch == "<":
        m = _IRI_RE.match(line, pos)
        if not m:
            raise MalformedTriple(line_no, "malformed IRI")
        return _Term(m.group(1), False), m.end()
    if ch == "_":
        m = _BLANK_RE.match(line, pos)
        if not m:
            raise MalformedTriple(line_no, "malformed blank node")
        return _Term(m.group(0), False), m.end()
    if ch == '"':
        if not allow_literal:
            raise MalformedTriple(line_no, "literal not allowed here")
        value, pos = _read_literal(line, pos, line_no)
        # Skip an optional language tag or datatype suffix.
        if pos < len(line) and line[pos] == "@":
            m = re.match(r"@[A-Za-z0-9-]+", line[pos:])
            if not m:
                raise MalformedTriple(line_no, "malformed language tag")
            pos += m.end()
        elif line.startswith("^^", pos):
            m = _IRI_RE.match(line, pos + 2)
            if not m:
                raise MalformedTriple(line_no, "malformed datatype IRI")
            pos = m.end()
        return _Term(value, True), pos
    raise MalformedTriple(line_no, f"unexpected character {ch!r}")


def _read_literal(line: str, pos: int, line_no: int) -> tuple[str, int]:
    assert line[pos] == '"'
    pos += 1
    out: list[str] = []
    while pos < len(line):
        ch = line[pos]
        if ch == '"':
            return "".join(out), pos + 1
        if ch == "\\":
            pos += 1
            if pos >= len(line):
                break
            esc = line[pos]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                pos += 1
            elif esc == "u":
                out.append(_read_unicode(line, pos + 1, 4, line_no))
                pos += 5
            elif esc == "U":
                out.append(_read_unicode(line, pos + 1, 8, line_no))
                pos += 9
            else:
                raise MalformedTriple(line_no, f"bad escape \\{esc}")
        else:
            out.append(ch)
            pos += 1
    raise MalformedTriple(line_no, "unterminated literal")


def _read_unicode(line: str, pos: int, width: int, line_no: int) -> str:
    hexdigits = line[pos : pos + width]
    if len(hexdigits) != width:
        raise MalformedTriple(line_no, "truncated unicode escape")
    try:
        return chr(int(hexdigits, 16))
    except ValueError:
        raise MalformedTriple(line_no, f"bad unicode escape {hexdigits!r}") from None


def _require_literal(term: _Term, line_no: int, what: str) -> str:
    if not term.is_literal:
        raise MalformedTriple(line_no, f"{what} object must be a literal")
    return term.value


def _require_iri(term: _Term, line_no: int, what: str) -> str:
    if term.is_literal:
        raise MalformedTriple(line_no, f"{what} object must be an IRI")
    return term.value
