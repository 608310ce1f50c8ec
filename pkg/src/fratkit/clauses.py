"""Literals, clauses, the active clause map and the DIMACS reader.

Literals are plain nonzero ints (DIMACS convention) and clauses are tuples
of them. Clause identity for matching purposes is multiset equality, which
we implement by comparing sorted literal tuples.
"""

from __future__ import annotations

import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

Clause = tuple  # tuple[int, ...]

MAX_MAGNITUDE = (1 << 62) - 1


class FormatError(ValueError):
    """Raised for malformed input files (DIMACS, FRAT, DPR, LRAT)."""


def clause_key(clause: Iterable[int]) -> Clause:
    """Sorted literal tuple; duplicates preserved. Equal keys <=> multiset-equal."""
    return tuple(sorted(clause))


def clause_multiset_eq(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff ``a`` and ``b`` hold the same literals with the same multiplicities."""
    if len(a) != len(b):
        return False
    return Counter(a) == Counter(b)


def is_tautology(clause: Iterable[int]) -> bool:
    seen = set(clause)
    return any(-lit in seen for lit in seen)


def format_clause(clause: Iterable[int]) -> str:
    return " ".join(map(str, clause))


class ActiveSetError(KeyError):
    """Double insert or missing remove on an :class:`ActiveSet`."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "active set error"


@dataclass
class Entry:
    clause: Clause
    marked: bool = False


class ActiveSet:
    """Map clause id -> (clause, marked).

    Inserting an id that is present, or removing one that is absent, raises
    :class:`ActiveSetError`. The high-water mark of ``len(self)`` is tracked
    for the streaming-memory report.
    """

    def __init__(self) -> None:
        self._entries: dict[int, Entry] = {}
        self.high_water = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, cid: int) -> bool:
        return cid in self._entries

    def __getitem__(self, cid: int) -> Entry:
        return self._entries[cid]

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def insert(self, cid: int, clause: Sequence[int], marked: bool = False) -> Entry:
        if cid in self._entries:
            raise ActiveSetError(f"clause {cid} inserted twice")
        entry = Entry(tuple(clause), marked)
        self._entries[cid] = entry
        if len(self._entries) > self.high_water:
            self.high_water = len(self._entries)
        return entry

    def remove(self, cid: int) -> Entry:
        try:
            return self._entries.pop(cid)
        except KeyError:
            raise ActiveSetError(f"clause {cid} removed but not active") from None

    def snapshot(self) -> dict[int, tuple[Clause, bool]]:
        return {cid: (e.clause, e.marked) for cid, e in self._entries.items()}


@dataclass
class InputFormula:
    """Clauses of a DIMACS file; clause ``clauses[j-1]`` has LRAT id ``j``."""

    clauses: list[Clause] = field(default_factory=list)
    num_vars: int = 0
    num_clauses: int = 0

    def __len__(self) -> int:
        return len(self.clauses)

    @property
    def max_var(self) -> int:
        top = self.num_vars
        for clause in self.clauses:
            for lit in clause:
                top = max(top, abs(lit))
        return top


def _read_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return fh.read()
    if hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()


def parse_dimacs(source: bytes | str | BinaryIO) -> InputFormula:
    """Read a DIMACS CNF file (path, bytes or binary stream).

    >>> f = parse_dimacs(b"p cnf 2 2\\n1 -2 0\\n2 0\\n")
    >>> f.clauses
    [(1, -2), (2,)]
    """
    data = _read_bytes(source)
    header: tuple[int, int] | None = None
    clauses: list[Clause] = []
    current: list[int] = []
    for lineno, raw in enumerate(io.BytesIO(data), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(b"c"):
            continue
        if line.startswith(b"p"):
            if header is not None:
                raise FormatError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != b"cnf":
                raise FormatError(f"line {lineno}: malformed header {line!r}")
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed header {line!r}") from None
            if nv < 0 or nc < 0:
                raise FormatError(f"line {lineno}: negative header count")
            header = (nv, nc)
            continue
        if header is None:
            raise FormatError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormatError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > MAX_MAGNITUDE:
                raise FormatError(f"line {lineno}: literal {lit} out of range")
            else:
                current.append(lit)
    if header is None:
        raise FormatError("missing 'p cnf' header")
    if current:
        raise FormatError("unterminated final clause")
    if header[1] != len(clauses):
        log.warning("header declares %d clauses, found %d", header[1], len(clauses))
    return InputFormula(clauses, header[0], header[1])


def write_dimacs(formula: InputFormula | Sequence[Sequence[int]], num_vars: int | None = None) -> bytes:
    if isinstance(formula, InputFormula):
        clauses = formula.clauses
        nv = formula.num_vars if num_vars is None else num_vars
    else:
        clauses = [tuple(c) for c in formula]
        nv = num_vars
        if nv is None:
            nv = max((abs(l) for c in clauses for l in c), default=0)
    lines = [f"p cnf {nv} {len(clauses)}"]
    lines += [f"{format_clause(c)} 0".lstrip() for c in clauses]
    return ("\n".join(lines) + "\n").encode()
