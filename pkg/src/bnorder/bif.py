"""Parser for a practical subset of the BIF network-definition format.

Covers discrete variables and full conditional probability tables:

    network <name> { }
    variable <name> { type discrete [ k ] { s1, ..., sk }; }
    probability ( X ) { table p1, ..., pk; }
    probability ( X | P1, ..., Pm ) { (v1, ..., vm) p1, ..., pk; ... }

Whitespace is free-form and // comments run to end of line. Anything the
subset does not cover is a hard parse error with a line/column diagnostic,
never silently skipped.
"""

import numpy as np

from .model import DiscreteBn, Variable

__all__ = ["BifParseError", "parse_bif"]

PROB_TOLERANCE = 1e-6

_PUNCT = set("{}()[]|,;")


class BifParseError(ValueError):
    """Input rejected, with the offending line and column in the message."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == "/" and text[i + 1 : i + 2] == "/":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _PUNCT:
            tokens.append((ch, line, col))
            col += 1
            i += 1
        else:
            start = i
            startcol = col
            while i < n and text[i] not in " \t\r\n" and text[i] not in _PUNCT and not (
                text[i] == "/" and text[i + 1 : i + 2] == "/"
            ):
                i += 1
                col += 1
            tokens.append((text[start:i], line, startcol))
    return tokens


class _TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return None

    def next(self, expect=None):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else ("", 1, 1)
            raise BifParseError("unexpected end of input", last[1], last[2])
        self.i += 1
        if expect is not None and tok[0] != expect:
            raise BifParseError(f"expected {expect!r}, found {tok[0]!r}", tok[1], tok[2])
        return tok

    def error(self, message):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else ("", 1, 1)
            raise BifParseError(message, last[1], last[2])
        raise BifParseError(message, tok[1], tok[2])


def _read_number(ts):
    tok = ts.next()
    try:
        return float(tok[0]), tok
    except ValueError:
        raise BifParseError(f"expected a number, found {tok[0]!r}", tok[1], tok[2])


def _read_name(ts, what):
    tok = ts.next()
    if tok[0] in _PUNCT or not tok[0]:
        raise BifParseError(f"expected {what}, found {tok[0]!r}", tok[1], tok[2])
    return tok[0], tok


def _read_name_list(ts, what, closer):
    names = []
    while True:
        name, _ = _read_name(ts, what)
        names.append(name)
        tok = ts.next()
        if tok[0] == closer:
            return names
        if tok[0] != ",":
            raise BifParseError(
                f"expected ',' or {closer!r}, found {tok[0]!r}", tok[1], tok[2]
            )


def _read_row(ts, terminator=";"):
    values = []
    while True:
        value, tok = _read_number(ts)
        if not np.isfinite(value) or value < 0:
            raise BifParseError(f"probability {tok[0]!r} out of range", tok[1], tok[2])
        values.append(value)
        tok = ts.next()
        if tok[0] == terminator:
            return values
        if tok[0] != ",":
            raise BifParseError(
                f"expected ',' or {terminator!r}, found {tok[0]!r}", tok[1], tok[2]
            )


def _normalize(row, tok):
    total = sum(row)
    if abs(total - 1.0) > PROB_TOLERANCE:
        raise BifParseError(
            f"probabilities sum to {total!r}, outside tolerance", tok[1], tok[2]
        )
    return [v / total for v in row]


def parse_bif(text):
    """Parse BIF text into a DiscreteBn, declaration order preserved."""
    ts = _TokenStream(_tokenize(text))

    word, tok = _read_name(ts, "'network'")
    if word != "network":
        raise BifParseError("input must start with a network block", tok[1], tok[2])
    _read_name(ts, "network name")
    ts.next("{")
    ts.next("}")

    variables = []
    states = {}
    parents = {}
    tables = {}

    while ts.peek() is not None:
        word, tok = _read_name(ts, "'variable' or 'probability'")
        if word == "variable":
            name, ntok = _read_name(ts, "variable name")
            if name in states:
                raise BifParseError(f"duplicate variable {name!r}", ntok[1], ntok[2])
            ts.next("{")
            kind, ktok = _read_name(ts, "'type'")
            if kind != "type":
                raise BifParseError("expected 'type'", ktok[1], ktok[2])
            disc, dtok = _read_name(ts, "'discrete'")
            if disc != "discrete":
                raise BifParseError(
                    "only discrete variables are supported", dtok[1], dtok[2]
                )
            ts.next("[")
            count, ctok = _read_number(ts)
            if count != int(count) or count < 1:
                raise BifParseError("state count must be a positive integer",
                                    ctok[1], ctok[2])
            ts.next("]")
            ts.next("{")
            labels = _read_name_list(ts, "state label", "}")
            if len(labels) != int(count):
                raise BifParseError(
                    f"declared {int(count)} states but listed {len(labels)}",
                    ctok[1], ctok[2],
                )
            if len(set(labels)) != len(labels):
                raise BifParseError("duplicate state label", ctok[1], ctok[2])
            ts.next(";")
            ts.next("}")
            variables.append(name)
            states[name] = tuple(labels)
        elif word == "probability":
            ts.next("(")
            child, ctok = _read_name(ts, "variable name")
            if child not in states:
                raise BifParseError(f"undeclared variable {child!r}", ctok[1], ctok[2])
            if child in tables:
                raise BifParseError(
                    f"duplicate probability block for {child!r}", ctok[1], ctok[2]
                )
            tok = ts.next()
            if tok[0] == "|":
                pars = _read_name_list(ts, "parent name", ")")
            elif tok[0] == ")":
                pars = []
            else:
                raise BifParseError(
                    f"expected '|' or ')', found {tok[0]!r}", tok[1], tok[2]
                )
            for p in pars:
                if p not in states:
                    raise BifParseError(f"undeclared parent {p!r}", ctok[1], ctok[2])
            if child in pars or len(set(pars)) != len(pars):
                raise BifParseError("malformed parent list", ctok[1], ctok[2])

            r = len(states[child])
            configs = 1
            for p in pars:
                configs *= len(states[p])
            table = np.full((configs, r), -1.0)

            ts.next("{")
            if not pars:
                word, wtok = _read_name(ts, "'table'")
                if word != "table":
                    raise BifParseError("expected 'table'", wtok[1], wtok[2])
                row = _read_row(ts)
                if len(row) != r:
                    raise BifParseError(
                        f"expected {r} probabilities, found {len(row)}",
                        wtok[1], wtok[2],
                    )
                table[0] = _normalize(row, wtok)
                ts.next("}")
            else:
                while True:
                    tok = ts.peek()
                    if tok is not None and tok[0] == "}":
                        ts.next()
                        break
                    otok = ts.next("(")
                    labels = _read_name_list(ts, "parent state", ")")
                    if len(labels) != len(pars):
                        raise BifParseError(
                            f"expected {len(pars)} parent states, found {len(labels)}",
                            otok[1], otok[2],
                        )
                    idx = 0
                    for p, lab in zip(pars, labels):
                        try:
                            k = states[p].index(lab)
                        except ValueError:
                            raise BifParseError(
                                f"{lab!r} is not a state of {p!r}", otok[1], otok[2]
                            )
                        idx = idx * len(states[p]) + k
                    if table[idx, 0] >= 0:
                        raise BifParseError(
                            f"duplicate row for parent states {tuple(labels)}",
                            otok[1], otok[2],
                        )
                    row = _read_row(ts)
                    if len(row) != r:
                        raise BifParseError(
                            f"expected {r} probabilities, found {len(row)}",
                            otok[1], otok[2],
                        )
                    table[idx] = _normalize(row, otok)
                missing = int((table[:, 0] < 0).sum())
                if missing:
                    raise BifParseError(
                        f"{missing} parent configurations lack a row for {child!r}",
                        ctok[1], ctok[2],
                    )
            parents[child] = tuple(pars)
            tables[child] = table
        else:
            raise BifParseError(
                f"expected 'variable' or 'probability', found {word!r}",
                tok[1], tok[2],
            )

    for name in variables:
        if name not in tables:
            raise BifParseError(f"variable {name!r} has no probability block", 1, 1)

    return DiscreteBn(
        variables=tuple(Variable(name, states[name]) for name in variables),
        parents=parents,
        cpts=tables,
    )
