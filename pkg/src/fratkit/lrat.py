"""Standalone checker for text LRAT and LPR proofs.

Deliberately naive and independent of :mod:`fratkit.checker`: the clause
database is a plain dict, and every hint is replayed literally. Positive
hints must be unit (or falsified) in order; a negative hint ``-d`` opens the
RAT/PR group for candidate ``d``. LPR witnesses follow the FRAT convention
of repeating the pivot: ``C[0] ... C[n] w[0] ... w[m]`` with ``w[0] = C[0]``.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .clauses import InputFormula, parse_dimacs
from .frat import split_pr_witness

PARSE_ERROR = "parse-error"
ID_ORDER = "id-order"
DEAD_ID = "dead-id"
NON_UNIT = "non-unit-hint"
INCOMPLETE = "incomplete-propagation"
UNCOVERED = "uncovered-candidate"
BAD_CANDIDATE = "bad-candidate"
BAD_WITNESS = "bad-witness"
DELETE_EMPTY = "delete-empty-clause"
MISSING_EMPTY = "missing-empty-clause"


@dataclass
class Verdict:
    verified: bool
    line: int | None = None
    reason: str = ""
    detail: str = ""
    step: int | None = None

    def __bool__(self) -> bool:
        return self.verified

    def __str__(self) -> str:
        if self.verified:
            return "VERIFIED"
        where = "eof" if self.line is None else str(self.line)
        return f"REJECTED {where} {self.reason}"


class _Reject(Exception):
    def __init__(self, reason: str, detail: str = "", line: int | None = None):
        super().__init__(detail)
        self.reason = reason
        self.detail = detail
        self.line = line


@dataclass
class LratLine:
    line: int
    id: int
    clause: tuple = ()
    witness: tuple | None = None
    hint: tuple = ()
    deleted: tuple | None = None

    @property
    def is_delete(self) -> bool:
        return self.deleted is not None


_TOK = re.compile(r"\S+")


def _tokens(text: str) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(io.StringIO(text), start=1):
        s = line.lstrip()
        if s.startswith("c"):
            continue
        for m in _TOK.finditer(line):
            yield lineno, m.group()


def parse_lrat(text: str) -> Iterator[LratLine]:
    """Parse LRAT/LPR text into :class:`LratLine` records (lazily)."""
    toks = _tokens(text)

    def num(lineno_tok):
        lineno, tok = lineno_tok
        try:
            return int(tok)
        except ValueError:
            raise _Reject(PARSE_ERROR, f"bad token {tok!r}", lineno) from None

    def until_zero(start_line):
        out = []
        for lt in toks:
            v = num(lt)
            if v == 0:
                return out
            out.append(v)
        raise _Reject(PARSE_ERROR, "unterminated step", start_line)

    for lineno, tok in toks:
        try:
            cid = int(tok)
        except ValueError:
            raise _Reject(PARSE_ERROR, f"bad step id {tok!r}", lineno) from None
        if cid <= 0:
            raise _Reject(PARSE_ERROR, "step id must be positive", lineno)
        nxt = next(toks, None)
        if nxt is None:
            raise _Reject(PARSE_ERROR, "truncated step", lineno)
        if nxt[1] == "d":
            yield LratLine(lineno, cid, deleted=tuple(until_zero(lineno)))
            continue
        first = num(nxt)
        lits = [] if first == 0 else [first] + until_zero(lineno)
        hint = until_zero(lineno)
        clause, witness = split_pr_witness(lits)
        yield LratLine(lineno, cid, clause, witness, tuple(hint))


class _Replay:
    def __init__(self, db: dict[int, tuple]):
        self.db = db
        self.val: dict[int, bool] = {}

    def set(self, lit):
        """Make ``lit`` true; returns False if it already is false."""
        v = self.val.get(lit)
        if v is False:
            return False
        self.val[lit] = True
        self.val[-lit] = False
        return True

    def fire(self, cid) -> bool:
        """Apply hint clause ``cid``; True on conflict, False on a new unit."""
        if cid not in self.db:
            raise _Reject(DEAD_ID, f"hint cites inactive clause {cid}")
        free = []
        for lit in self.db[cid]:
            v = self.val.get(lit)
            if v is True:
                raise _Reject(NON_UNIT, f"hint clause {cid} is satisfied")
            if v is None and lit not in free:
                free.append(lit)
        if not free:
            return True
        if len(free) > 1:
            raise _Reject(NON_UNIT, f"hint clause {cid} is not unit")
        self.set(free[0])
        return False


def _check_add(db: dict[int, tuple], step: LratLine) -> None:
    clause = step.clause
    hint = step.hint
    rp = _Replay(db)
    for lit in clause:
        if not rp.set(-lit):
            return  # tautology
    i = 0
    while i < len(hint) and hint[i] > 0:
        if rp.fire(hint[i]):
            return
        i += 1
    if not clause:
        raise _Reject(INCOMPLETE, "hints end without a conflict")
    witness = step.witness if step.witness is not None else (clause[0],)
    wset = set(witness)
    if any(-l in wset for l in wset):
        raise _Reject(BAD_WITNESS, "inconsistent witness")

    groups: dict[int, list[int]] = {}
    order = []
    while i < len(hint):
        cid = -hint[i]
        if cid in groups:
            raise _Reject(BAD_CANDIDATE, f"candidate {cid} listed twice")
        i += 1
        body = []
        while i < len(hint) and hint[i] > 0:
            body.append(hint[i])
            i += 1
        groups[cid] = body
        order.append(cid)

    required = []
    for cid, lits in db.items():
        if any(l in wset for l in lits):
            continue
        if any(-l in wset for l in lits):
            required.append(cid)
    for cid in order:
        if cid not in db:
            raise _Reject(DEAD_ID, f"candidate {cid} is not active")
        if cid not in required:
            raise _Reject(BAD_CANDIDATE, f"clause {cid} is not a candidate")
    for cid in required:
        if cid not in groups:
            if not groups:
                raise _Reject(INCOMPLETE, "hints end without a conflict")
            raise _Reject(UNCOVERED, f"candidate {cid} has no hint group")

    base = dict(rp.val)
    for cid in order:
        rp.val = dict(base)
        done = False
        for lit in db[cid]:
            if -lit in wset:
                continue
            if not rp.set(-lit):
                done = True
                break
        for h in groups[cid]:
            if done:
                break
            done = rp.fire(h)
        if not done:
            raise _Reject(INCOMPLETE, f"candidate {cid} group ends without a conflict")


def check_lrat(formula: InputFormula, proof) -> Verdict:
    """Check an LRAT/LPR proof of ``formula``.

    ``proof`` is the proof text (str or bytes), a text stream, or a path-like.
    """
    if hasattr(proof, "read"):
        text = proof.read()
    elif isinstance(proof, (bytes, bytearray)):
        text = bytes(proof).decode()
    elif hasattr(proof, "__fspath__"):
        with open(proof) as fh:
            text = fh.read()
    else:
        text = proof
    if isinstance(text, bytes):
        text = text.decode()

    db: dict[int, tuple] = {i: tuple(c) for i, c in enumerate(formula.clauses, start=1)}
    last = len(formula.clauses)
    line = step_id = None
    try:
        for step in parse_lrat(text):
            line, step_id = step.line, step.id
            if step.is_delete:
                for cid in step.deleted:
                    if cid not in db:
                        raise _Reject(DEAD_ID, f"deletion of inactive clause {cid}")
                    if not db[cid]:
                        raise _Reject(DELETE_EMPTY, f"deletion of empty clause {cid}")
                    del db[cid]
                continue
            if step.id <= last:
                raise _Reject(ID_ORDER, f"id {step.id} not above {last}")
            _check_add(db, step)
            db[step.id] = step.clause
            last = step.id
            if not step.clause:
                return Verdict(True, step.line, step=step.id)
    except _Reject as rej:
        if rej.line is not None:
            return Verdict(False, rej.line, rej.reason, rej.detail)
        return Verdict(False, line, rej.reason, rej.detail, step_id)
    return Verdict(False, None, MISSING_EMPTY, "proof ends without the empty clause")


def check_lrat_files(dimacs_path, proof_path) -> Verdict:
    formula = parse_dimacs(dimacs_path)
    with open(proof_path) as fh:
        return check_lrat(formula, fh)
