"""UAI MARKOV text format, restricted to unary and pairwise factors.

Tables are read as additive potentials in the linear domain (not the
probability convention); callers ingesting genuinely probabilistic files
can log-transform after parsing.  `#` starts a comment on read; the writer
never emits one.  The writer is canonical: byte-identical output for equal
models.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from .model import PairwiseMRF


class UaiParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    toks = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            toks.append((tok, lineno))
    return toks


class _Reader:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def last_line(self) -> int:
        return self.toks[-1][1] if self.toks else 1

    def next(self, what: str) -> Tuple[str, int]:
        if self.pos >= len(self.toks):
            raise UaiParseError(self.last_line, f"unexpected end of input, expected {what}")
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def next_int(self, what: str) -> Tuple[int, int]:
        tok, line = self.next(what)
        try:
            return int(tok), line
        except ValueError:
            raise UaiParseError(line, f"expected {what}, got {tok!r}") from None

    def next_float(self, what: str) -> Tuple[float, int]:
        tok, line = self.next(what)
        try:
            return float(tok), line
        except ValueError:
            raise UaiParseError(line, f"expected {what}, got {tok!r}") from None

    def done(self) -> bool:
        return self.pos >= len(self.toks)


def parse_uai(text: str) -> PairwiseMRF:
    """Parse a MARKOV file into a pairwise model.

    Unary factors become unary vectors; pairwise factors become edge
    tables, canonically oriented; repeated scopes over the same pair or
    node are summed.  Factors of arity > 2 are rejected.
    """
    r = _Reader(text)
    header, line = r.next("MARKOV header")
    if header.upper() != "MARKOV":
        raise UaiParseError(line, f"expected MARKOV header, got {header!r}")
    n, line = r.next_int("variable count")
    if n < 0:
        raise UaiParseError(line, "negative variable count")
    cards = []
    for v in range(n):
        k, line = r.next_int(f"cardinality of variable {v}")
        if k < 1:
            raise UaiParseError(line, f"variable {v} has cardinality {k}")
        cards.append(k)
    nf, _ = r.next_int("factor count")
    scopes: List[Tuple[int, ...]] = []
    for f in range(nf):
        arity, line = r.next_int(f"arity of factor {f}")
        if arity not in (1, 2):
            raise UaiParseError(line, f"factor {f} has unsupported arity {arity}; only unary and pairwise supported")
        scope = []
        for _ in range(arity):
            v, line = r.next_int(f"scope variable of factor {f}")
            if not 0 <= v < n:
                raise UaiParseError(line, f"factor {f} references variable {v}, out of range")
            scope.append(v)
        if arity == 2 and scope[0] == scope[1]:
            raise UaiParseError(line, f"factor {f} repeats variable {scope[0]} in its scope")
        scopes.append(tuple(scope))

    unaries: Dict[int, np.ndarray] = {}
    edge_tables: Dict[Tuple[int, int], np.ndarray] = {}
    edge_order: List[Tuple[int, int]] = []
    for f, scope in enumerate(scopes):
        expected = int(np.prod([cards[v] for v in scope]))
        count, line = r.next_int(f"entry count of factor {f}")
        if count != expected:
            raise UaiParseError(line, f"factor {f} declares {count} entries, scope implies {expected}")
        vals = np.empty(count)
        for e in range(count):
            vals[e], line = r.next_float(f"entry {e} of factor {f}")
        if not np.all(np.isfinite(vals)):
            raise UaiParseError(line, f"factor {f} has non-finite entries")
        if len(scope) == 1:
            (i,) = scope
            unaries[i] = unaries.get(i, np.zeros(cards[i])) + vals
        else:
            i, j = scope
            t = vals.reshape(cards[i], cards[j])
            if i > j:
                i, j, t = j, i, t.T
            if (i, j) in edge_tables:
                edge_tables[(i, j)] = edge_tables[(i, j)] + t
            else:
                edge_tables[(i, j)] = t
                edge_order.append((i, j))
    if not r.done():
        tok, line = r.next("end of input")
        raise UaiParseError(line, f"trailing content {tok!r}")
    return PairwiseMRF(
        tuple(cards),
        tuple(edge_order),
        tuple(edge_tables[e] for e in edge_order),
        unaries or None,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_uai(mrf: PairwiseMRF) -> str:
    """Canonical serialization: unary factors in node order first, then
    pairwise factors in edge-list order; 17-significant-digit floats."""
    lines = ["MARKOV", str(mrf.num_nodes), " ".join(str(k) for k in mrf.cardinalities)]
    unary_nodes = sorted(mrf.unaries) if mrf.unaries else []
    lines.append(str(len(unary_nodes) + len(mrf.edges)))
    for i in unary_nodes:
        lines.append(f"1 {i}")
    for i, j in mrf.edges:
        lines.append(f"2 {i} {j}")
    for i in unary_nodes:
        u = mrf.unaries[i]
        lines.append("")
        lines.append(str(len(u)))
        lines.append(" ".join(_fmt(x) for x in u))
    for t in mrf.tables:
        lines.append("")
        lines.append(str(t.size))
        for row in t:
            lines.append(" ".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"
