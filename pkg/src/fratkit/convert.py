"""Converters around the elaborator.

* :func:`strip_frat` drops every ``l`` hint, producing a FRAT0 proof.
* :func:`transcode` rewrites a FRAT proof in text or binary form.
* :func:`dpr_to_frat` lifts a DRAT/DPR proof to FRAT by numbering clauses.
* :func:`from_pr` does the same but replaces PR additions by RAT/RUP steps
  over one fresh variable, so elaboration yields plain LRAT.
"""

from __future__ import annotations

import io
import re
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import BinaryIO, Iterable, Iterator, Sequence

from . import frat
from .checker import CheckFailure, ClauseDB
from .clauses import MAX_MAGNITUDE, FormatError, InputFormula, clause_key
from .frat import FratWriter, Step, split_pr_witness
from .varint import decode_signed


class ConversionError(Exception):
    pass


@dataclass
class Summary:
    steps: int = 0
    origs: int = 0
    adds: int = 0
    deletes: int = 0
    finals: int = 0
    hints_removed: int = 0
    pr_translated: int = 0
    witnesses: int = 0
    bytes_written: int = 0

    def lines(self) -> list[str]:
        return [f"{k}: {v}" for k, v in asdict(self).items()]


def _open_in(source):
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(bytes(source)), True
    if hasattr(source, "read"):
        return source, False
    return open(source, "rb"), True


def _open_out(dest):
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "wb"), True


def _target_binary(target, source_binary: bool) -> bool:
    if target in (None, "auto", "same"):
        return source_binary
    if target in ("binary", True):
        return True
    if target in ("text", False):
        return False
    raise ValueError(f"unknown target format {target!r}")


def _frat_is_binary(fh, mode) -> bool:
    if mode == "binary":
        return True
    if mode == "text":
        return False
    pos = fh.tell()
    head = fh.read(4096)
    fh.seek(pos)
    return frat.sniff_binary(head)


def strip_frat(src, dest, mode="auto", target=None) -> Summary:
    """Copy a FRAT proof with every hint removed."""
    summary = Summary()
    fin, own_in = _open_in(src)
    fout, own_out = _open_out(dest)
    try:
        binary_in = _frat_is_binary(fin, mode)
        w = FratWriter(fout, _target_binary(target, binary_in))
        for step in frat.iter_steps(fin, binary_in):
            summary.steps += 1
            if step.hint is not None:
                summary.hints_removed += 1
                step = step.without_hint()
            w.write(step)
        summary.bytes_written = w.bytes_written
    finally:
        if own_in:
            fin.close()
        if own_out:
            fout.close()
    return summary


def transcode(src, dest, target: str, mode="auto") -> int:
    """Rewrite a FRAT proof as ``target`` (``"text"`` or ``"binary"``); returns bytes written."""
    fin, own_in = _open_in(src)
    fout, own_out = _open_out(dest)
    try:
        binary_in = _frat_is_binary(fin, mode)
        w = FratWriter(fout, _target_binary(target, binary_in))
        for step in frat.iter_steps(fin, binary_in):
            w.write(step)
        return w.bytes_written
    finally:
        if own_in:
            fin.close()
        if own_out:
            fout.close()


# --- DPR / DRAT input --------------------------------------------------------

_DPR_TOKEN = re.compile(rb"-?[0-9]+|d|\S+")


def _iter_dpr_text(fh) -> Iterator[tuple[str, tuple]]:
    kind = None
    lits: list[int] = []
    for lineno, line in enumerate(fh, start=1):
        s = line.strip()
        if not s or s.startswith(b"c"):
            continue
        for tok in _DPR_TOKEN.findall(s):
            if tok == b"d":
                if kind is not None or lits:
                    raise FormatError(f"line {lineno}: 'd' inside a step")
                kind = "d"
                continue
            try:
                v = int(tok)
            except ValueError:
                raise FormatError(f"line {lineno}: bad token {tok!r}") from None
            if v == 0:
                yield kind or "a", tuple(lits)
                kind = None
                lits = []
            else:
                if abs(v) > MAX_MAGNITUDE:
                    raise FormatError(f"line {lineno}: literal out of range")
                lits.append(v)
    if kind is not None or lits:
        raise FormatError("unterminated final step")


def _iter_dpr_binary(fh) -> Iterator[tuple[str, tuple]]:
    data = fh.read()
    pos = 0
    n = len(data)
    while pos < n:
        tag = data[pos]
        pos += 1
        if tag not in (0x61, 0x64):
            raise FormatError(f"byte {pos - 1}: unknown binary step 0x{tag:02x}")
        lits = []
        while True:
            if pos >= n:
                raise FormatError("truncated binary step")
            if data[pos] == 0:
                pos += 1
                break
            v, pos = decode_signed(data, pos)
            lits.append(v)
        yield ("a" if tag == 0x61 else "d"), tuple(lits)


def iter_dpr(source, mode="auto") -> Iterator[tuple[str, tuple]]:
    """Yield ``("a", literals)`` / ``("d", literals)`` from a DRAT or DPR proof."""
    fh, owned = _open_in(source)
    try:
        binary = _frat_is_binary(fh, mode)
        yield from (_iter_dpr_binary(fh) if binary else _iter_dpr_text(fh))
    finally:
        if owned:
            fh.close()


# --- DPR to FRAT -----------------------------------------------------------------

class _LiveSet:
    """Clauses alive in the DPR proof, with lookup by literal multiset."""

    def __init__(self):
        self.clauses: dict[int, tuple] = {}
        self.index: defaultdict[tuple, list[int]] = defaultdict(list)
        self.occurs: defaultdict[int, set[int]] = defaultdict(set)

    def add(self, cid: int, clause: tuple) -> None:
        self.clauses[cid] = clause
        self.index[clause_key(clause)].append(cid)
        for lit in clause:
            self.occurs[lit].add(cid)

    def remove(self, cid: int) -> tuple:
        clause = self.clauses.pop(cid)
        ids = self.index[clause_key(clause)]
        ids.remove(cid)
        for lit in clause:
            self.occurs[lit].discard(cid)
        return clause

    def lookup(self, clause: Sequence[int]) -> int | None:
        """Most recently added live clause equal to ``clause`` up to permutation."""
        ids = self.index.get(clause_key(clause))
        return ids[-1] if ids else None


class _Emitter:
    def __init__(self, out: FratWriter, formula: InputFormula, summary: Summary,
                 validate: bool = False):
        self.out = out
        self.live = _LiveSet()
        self.summary = summary
        self.db = ClauseDB() if validate else None
        self.next_id = 1
        for clause in formula.clauses:
            cid = self.next_id
            self.next_id += 1
            self.out.write(frat.orig(cid, clause))
            self.live.add(cid, tuple(clause))
            if self.db is not None:
                self.db.add(cid, clause)
            summary.origs += 1

    def add(self, clause, witness=None, check: bool = False) -> int:
        cid = self.next_id
        self.next_id += 1
        clause = tuple(clause)
        if check and self.db is not None:
            try:
                self.db.prove_pr(clause)
            except CheckFailure as exc:
                raise ConversionError(
                    f"generated step {cid} ({' '.join(map(str, clause))}) fails its check: {exc}"
                ) from None
        self.out.write(frat.add(cid, clause, witness=witness))
        self.live.add(cid, clause)
        if self.db is not None:
            self.db.add(cid, clause)
        self.summary.adds += 1
        if witness:
            self.summary.witnesses += 1
        return cid

    def delete(self, cid: int) -> None:
        clause = self.live.remove(cid)
        self.out.write(frat.delete(cid, clause))
        if self.db is not None:
            self.db.remove(cid)
        self.summary.deletes += 1

    def delete_matching(self, clause: Sequence[int]) -> None:
        cid = self.live.lookup(clause)
        if cid is None:
            raise ConversionError(f"deleted clause ({' '.join(map(str, clause))}) is not active")
        self.delete(cid)

    def finalize(self) -> None:
        live = self.live.clauses
        order = list(live)
        order.reverse()
        empties = [cid for cid in order if not live[cid]]
        for cid in order:
            if live[cid]:
                self.out.write(frat.final(cid, live[cid]))
                self.summary.finals += 1
        for cid in empties:
            self.out.write(frat.final(cid, ()))
            self.summary.finals += 1


def dpr_to_frat(formula: InputFormula, dpr, dest, mode="auto", binary: bool = False) -> Summary:
    """Convert a DRAT/DPR proof into an unannotated FRAT proof."""
    summary = Summary()
    fout, own = _open_out(dest)
    try:
        w = FratWriter(fout, binary)
        em = _Emitter(w, formula, summary)
        for kind, lits in iter_dpr(dpr, mode):
            summary.steps += 1
            if kind == "a":
                clause, witness = split_pr_witness(lits)
                em.add(clause, witness)
            else:
                em.delete_matching(lits)
        em.finalize()
        summary.bytes_written = w.bytes_written
    finally:
        if own:
            fout.close()
    return summary


def _translate_pr(em: _Emitter, clause: tuple, witness: tuple, x: int) -> None:
    """Add ``clause`` (PR with ``witness``) as a sequence of RAT/RUP steps over fresh ``x``.

    With ``x`` standing for "clause is falsified", every clause touched by
    the witness is weakened by ``x``, the witness literals are asserted under
    ``x``, the touched clauses are restored, ``clause`` follows by unit
    propagation, and every clause mentioning ``x`` is deleted again.
    """
    live = em.live
    wset = set(witness)
    touched: set[int] = set()
    for lit in wset:
        touched.update(live.occurs.get(-lit, ()))
    touched_ids = sorted(touched)
    reduced = {}
    for cid in touched_ids:
        body = live.clauses[cid]
        if not any(lit in wset for lit in body):
            reduced[cid] = tuple(lit for lit in body if -lit not in wset)

    scaffold = [em.add((x,) + clause, check=True)]
    defs = [em.add((-x, -lit), check=True) for lit in clause]
    for cid in touched_ids:
        if cid in reduced:
            scaffold.append(em.add((-x,) + reduced[cid], check=True))
    originals = []
    for cid in touched_ids:
        body = live.clauses[cid]
        scaffold.append(em.add((x,) + body, check=True))
        originals.append(body)
        em.delete(cid)
    for cid in defs:
        em.delete(cid)
    for lit in witness:
        scaffold.append(em.add((lit, -x), check=True))
    for body in originals:
        em.add(body, check=True)
    em.add(clause, check=True)
    for cid in scaffold:
        em.delete(cid)


def from_pr(formula: InputFormula, dpr, dest, mode="auto", binary: bool = False) -> Summary:
    """Convert a DPR proof into a PR-free FRAT proof.

    Every generated step is checked as it is emitted, so an unsound PR step
    in the input surfaces here as :class:`ConversionError`.
    """
    summary = Summary()
    fout, own = _open_out(dest)
    try:
        w = FratWriter(fout, binary)
        em = _Emitter(w, formula, summary, validate=True)
        top = formula.max_var
        for kind, lits in iter_dpr(dpr, mode):
            summary.steps += 1
            for lit in lits:
                if abs(lit) > top:
                    top = abs(lit)
            if kind == "d":
                em.delete_matching(lits)
                continue
            clause, witness = split_pr_witness(lits)
            if witness is not None:
                witness = tuple(dict.fromkeys(witness))
            if witness is None or len(witness) == 1:
                em.add(clause)
                continue
            if any(-lit in witness for lit in witness):
                raise ConversionError(f"inconsistent witness in step {summary.steps}")
            top += 1
            _translate_pr(em, clause, witness, top)
            summary.pr_translated += 1
        em.finalize()
        summary.bytes_written = w.bytes_written
    finally:
        if own:
            fout.close()
    return summary
