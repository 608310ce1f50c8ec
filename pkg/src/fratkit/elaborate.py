"""Two-pass FRAT to LRAT/LPR elaboration.

Pass 1 walks the proof backwards, rebuilding the solver's active set from
the ``f`` and ``d`` steps. Only clauses reachable from the finalized empty
clause are kept; every kept addition gets a checked (or derived) hint, and
each clause's deletion is re-emitted right after its last use. The result,
in reverse proof order, goes to a temporary binary FRAT stream.

Pass 2 reads that stream backwards (i.e. in proof order), maps FRAT ids to
LRAT ids (input clauses by position, additions by a running counter) and
writes the final text proof, stopping at the empty clause.
"""

from __future__ import annotations

import io
import logging
import os
import tempfile
from collections import Counter, defaultdict, deque
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, TextIO

from . import frat
from .checker import CheckFailure, ClauseDB
from .clauses import (ActiveSet, ActiveSetError, InputFormula, clause_key,
                      clause_multiset_eq, format_clause, parse_dimacs)
from .frat import ADD, DEL, FINAL, ORIG, RELOC, FratWriter, Step

log = logging.getLogger(__name__)

TEMP_SUFFIX = ".revcert.tmp"
TMPDIR_ENV = "FRATKIT_TMPDIR"


class ElaborationError(Exception):
    pass


@dataclass
class Report:
    steps_read: int = 0
    adds_read: int = 0
    adds_unannotated: int = 0
    adds_kept: int = 0
    hints_derived: int = 0
    hints_checked: int = 0
    hints_repaired: int = 0
    origs_kept: int = 0
    deletions_deferred: int = 0
    relocations: int = 0
    comments: int = 0
    high_water: int = 0
    temp_bytes: int = 0
    lrat_adds: int = 0
    lrat_deletion_lines: int = 0
    origs_deleted: int = 0
    witnesses: int = 0
    dialect: str = "LRAT"

    def lines(self) -> list[str]:
        return [f"{k}: {v}" for k, v in asdict(self).items()]


def _ids(hint: Iterable[int]) -> list[int]:
    return list(dict.fromkeys(abs(h) for h in hint))


def elaborate_pass1(cert: Iterable[Step], out: FratWriter, report: Report | None = None,
                    echo_comments: bool = False, kept_origs: Counter | None = None) -> Report:
    """Backward elaboration. ``cert`` must yield the proof's steps last-first.

    ``kept_origs``, when given, collects the literal keys of the input
    clauses the output still needs (see :func:`renumber_pass2`).
    """
    report = report or Report()
    F = ActiveSet()
    db = ClauseDB()
    have_bottom = False

    def take(step: Step):
        try:
            entry = F.remove(step.id)
        except ActiveSetError:
            raise ElaborationError(
                f"step {step.kind} {step.id}: clause is neither finalized nor deleted later") from None
        db.remove(step.id)
        if not clause_multiset_eq(entry.clause, step.clause):
            raise ElaborationError(
                f"step {step.kind} {step.id}: literals {list(step.clause)} do not match "
                f"{list(entry.clause)}")
        return entry

    def put(step: Step, marked: bool):
        try:
            F.insert(step.id, step.clause, marked)
        except ActiveSetError:
            raise ElaborationError(f"step {step.kind} {step.id}: clause id already active") from None
        db.add(step.id, step.clause)

    for step in cert:
        report.steps_read += 1
        kind = step.kind
        if kind == FINAL:
            if not step.clause:
                have_bottom = True
            put(step, marked=not step.clause)
        elif kind == DEL:
            put(step, marked=False)
        elif kind == ADD:
            report.adds_read += 1
            if step.hint is None:
                report.adds_unannotated += 1
            entry = take(step)
            if not entry.marked:
                continue
            try:
                if step.hint is None:
                    steps = db.prove_pr(step.clause, step.witness)
                    report.hints_derived += 1
                else:
                    steps = db.check_hint(step.clause, step.witness, step.hint)
                    report.hints_checked += 1
                    if steps != list(step.hint):
                        report.hints_repaired += 1
            except CheckFailure as exc:
                raise ElaborationError(f"step a {step.id}: {exc}") from None
            for j in _ids(steps):
                dep = F[j]
                if not dep.marked:
                    dep.marked = True
                    out.write(frat.delete(j, dep.clause))
                    report.deletions_deferred += 1
            out.write(frat.add(step.id, step.clause, steps, step.witness))
            report.adds_kept += 1
        elif kind == ORIG:
            entry = take(step)
            if entry.marked:
                out.write(step)
                report.origs_kept += 1
                if kept_origs is not None:
                    kept_origs[clause_key(step.clause)] += 1
        elif kind == RELOC:
            moved = [(s, t) for s, t in step.pairs if t in F]
            entries = []
            for s, t in moved:
                entries.append(F.remove(t))
                db.remove(t)
            kept = []
            for (s, t), entry in zip(moved, entries):
                if s in F:
                    raise ElaborationError(f"relocation {s} -> {t}: clause {s} is already active")
                F.insert(s, entry.clause, entry.marked)
                db.add(s, entry.clause)
                if entry.marked:
                    kept.append((s, t))
            if kept:
                out.write(frat.reloc(kept))
                report.relocations += 1
        elif kind == frat.COMMENT:
            report.comments += 1
            if echo_comments:
                log.info("c %s", step.text)
        # t steps carry statistics only.

    report.high_water = max(report.high_water, F.high_water)
    if len(F):
        ids = sorted(F)[:10]
        raise ElaborationError(f"clauses finalized or deleted but never introduced: {ids}")
    if not have_bottom:
        raise ElaborationError("no finalized empty clause")
    return report


def format_lrat_add(cid: int, clause, witness, hint) -> str:
    lits = tuple(clause) + (tuple(witness) if witness else ())
    body = format_clause(lits)
    hints = format_clause(hint)
    return f"{cid} {body + ' ' if body else ''}0 {hints + ' ' if hints else ''}0\n"


def _unneeded_inputs(index, kept: Counter, bound: Counter) -> list[int]:
    """Unclaimed input positions that no later Orig step will claim."""
    out = []
    for key, q in index.items():
        skip = max(0, kept.get(key, 0) - bound.get(key, 0))
        out.extend(list(q)[skip:])
    return sorted(out)


def renumber_pass2(formula: InputFormula, revcert: Iterable[Step], out: TextIO,
                   report: Report | None = None, kept_origs: Counter | None = None) -> Report:
    """Forward renumbering. ``revcert`` must yield pass-1 output in proof order.

    LRAT treats every input clause as active, so input clauses the proof no
    longer uses are deleted before the first addition; otherwise they could
    become unexpected RAT candidates. Which ones are unused comes from
    ``kept_origs`` as filled by pass 1; without it nothing is pruned.
    """
    report = report or Report()
    index: defaultdict[tuple, deque] = defaultdict(deque)
    for pos, clause in enumerate(formula.clauses, start=1):
        index[clause_key(clause)].append(pos)
    M: dict[int, int] = {}
    k = len(formula)
    dels: list[int] = []
    pruned = False
    bound: Counter = Counter()

    def prune():
        if kept_origs is None:
            return
        unused = _unneeded_inputs(index, kept_origs, bound)
        if unused:
            out.write(f"{k} d {format_clause(unused)} 0\n")
            report.lrat_deletion_lines += 1
            report.origs_deleted = len(unused)
            dead = set(unused)
            for key in list(index):
                index[key] = deque(p for p in index[key] if p not in dead)

    def flush():
        if dels:
            out.write(f"{k} d {format_clause(dels)} 0\n")
            report.lrat_deletion_lines += 1
            dels.clear()

    for step in revcert:
        kind = step.kind
        if kind == ORIG:
            q = index.get(clause_key(step.clause))
            if not q:
                raise ElaborationError(
                    f"original clause {step.id} ({format_clause(step.clause)}) not found in input")
            if step.id in M:
                raise ElaborationError(f"clause id {step.id} bound twice")
            M[step.id] = q.popleft()
            bound[clause_key(step.clause)] += 1
        elif kind == ADD:
            if not pruned:
                prune()
                pruned = True
            flush()
            k += 1
            if step.id in M:
                raise ElaborationError(f"clause id {step.id} bound twice")
            try:
                hint = [M[h] if h > 0 else -M[-h] for h in step.hint or ()]
            except KeyError as exc:
                raise ElaborationError(f"step a {step.id}: hint cites unknown clause {exc}") from None
            M[step.id] = k
            out.write(format_lrat_add(k, step.clause, step.witness, hint))
            report.lrat_adds += 1
            if step.witness:
                report.witnesses += 1
                report.dialect = "LPR"
            if not step.clause:
                return report
        elif kind == DEL:
            try:
                dels.append(M.pop(step.id))
            except KeyError:
                raise ElaborationError(f"deletion of unknown clause {step.id}") from None
        elif kind == RELOC:
            vals = [(t, M.pop(s)) for s, t in step.pairs if s in M]
            for t, v in vals:
                M[t] = v
    raise ElaborationError("no proof of the empty clause found")


def _temp_stream(out_path: Path) -> tuple[BinaryIO, Path]:
    tmpdir = os.environ.get(TMPDIR_ENV)
    if tmpdir:
        fd, name = tempfile.mkstemp(suffix=TEMP_SUFFIX, dir=tmpdir)
        return os.fdopen(fd, "w+b"), Path(name)
    path = out_path.with_name(out_path.name + TEMP_SUFFIX)
    return open(path, "w+b"), path


def elaborate(frat_path, dimacs_path, out_path, temp_mode: str = "disk",
              mode: str = "auto", echo_comments: bool = False) -> Report:
    """Elaborate a FRAT proof into LRAT (or LPR when PR steps survive).

    ``temp_mode`` is ``"disk"`` (temporary file next to the output, removed
    on success and kept on failure) or ``"memory"``.
    """
    if temp_mode not in ("disk", "memory"):
        raise ValueError(f"temp_mode must be 'disk' or 'memory', not {temp_mode!r}")
    out_path = Path(out_path)
    formula = parse_dimacs(dimacs_path)
    report = Report()
    if temp_mode == "memory":
        tmp: BinaryIO = io.BytesIO()
        tmp_path = None
    else:
        tmp, tmp_path = _temp_stream(out_path)
    ok = False
    try:
        writer = FratWriter(tmp, binary=True)
        kept: Counter = Counter()
        elaborate_pass1(frat.iter_steps_backward(frat_path, mode), writer, report, echo_comments, kept)
        if tmp_path is not None:
            report.temp_bytes = writer.bytes_written
        tmp.flush()
        tmp.seek(0)
        with open(out_path, "w", newline="\n") as out:
            renumber_pass2(formula, frat.iter_steps_backward(tmp, "binary"), out, report, kept)
        ok = True
    finally:
        tmp.close()
        if tmp_path is not None:
            if ok:
                tmp_path.unlink(missing_ok=True)
            else:
                log.warning("temporary file kept at %s", tmp_path)
    return report


def elaborate_bytes(frat_data: bytes, formula: InputFormula, mode: str = "auto") -> tuple[str, Report]:
    """In-memory convenience wrapper: returns ``(lrat_text, report)``."""
    report = Report()
    tmp = io.BytesIO()
    kept: Counter = Counter()
    elaborate_pass1(frat.iter_steps_backward(frat_data, mode), FratWriter(tmp, binary=True), report,
                    kept_origs=kept)
    tmp.seek(0)
    out = io.StringIO()
    renumber_pass2(formula, frat.iter_steps_backward(tmp, "binary"), out, report, kept)
    return out.getvalue(), report


def iter_revcert(data: bytes) -> Iterator[Step]:
    """Pass-1 output in the order it was written (reverse proof order)."""
    return frat.iter_steps(data, "binary")
