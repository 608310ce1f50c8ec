"""Unit propagation with hint recording, and AT / RAT / PR redundancy checks.

:class:`ClauseDB` keeps the clauses of the current formula with two watched
literals per clause. A propagation run records the reason of every implied
literal; on conflict the reasons are walked backwards from the conflict so
only clauses on the path to it end up in the hint, in firing order.

Hints use LRAT conventions. Positive ids fire in order, each unit (or
empty) under the assignment built so far. A negative id ``-d`` opens the
group for candidate clause ``d`` of a RAT/PR step: the negation of ``d``
reduced by the witness is assumed, and the positive ids that follow must
run into a conflict.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class CheckFailure(Exception):
    """A redundancy check failed; ``candidate`` names the first uncertifiable clause."""

    def __init__(self, message: str, candidate: int | None = None):
        super().__init__(message)
        self.candidate = candidate


class _Clause:
    __slots__ = ("cid", "lits", "alive")

    def __init__(self, cid: int, lits: list[int]):
        self.cid = cid
        self.lits = lits
        self.alive = True


@dataclass
class PropagationOutcome:
    conflict: bool
    used: list[int] = field(default_factory=list)

    @property
    def saturated(self) -> bool:
        return not self.conflict


class _State:
    """An assignment: literal -> reason (``None`` for assumptions)."""

    __slots__ = ("value", "reason", "pos", "trail", "qhead")

    def __init__(self) -> None:
        self.value: dict[int, bool] = {}
        self.reason: dict[int, int | None] = {}
        self.pos: dict[int, int] = {}
        self.trail: list[int] = []
        self.qhead = 0

    def assign(self, lit: int, reason: int | None) -> None:
        self.value[lit] = True
        self.value[-lit] = False
        var = abs(lit)
        self.reason[var] = reason
        self.pos[var] = len(self.trail)
        self.trail.append(lit)

    def undo(self, size: int) -> None:
        trail = self.trail
        value = self.value
        while len(trail) > size:
            lit = trail.pop()
            del value[lit]
            del value[-lit]
            var = abs(lit)
            del self.reason[var]
            del self.pos[var]
        if self.qhead > size:
            self.qhead = size


class ClauseDB:
    """Clause store with watch lists and occurrence lists."""

    def __init__(self, clauses: Mapping[int, Sequence[int]] | None = None) -> None:
        self.clauses: dict[int, _Clause] = {}
        self.watches: defaultdict[int, list[_Clause]] = defaultdict(list)
        self.units: dict[int, _Clause] = {}
        self.empties: set[int] = set()
        self.occurs: defaultdict[int, set[int]] = defaultdict(set)
        if clauses:
            for cid, lits in clauses.items():
                self.add(cid, lits)

    def __contains__(self, cid: int) -> bool:
        return cid in self.clauses

    def __len__(self) -> int:
        return len(self.clauses)

    def literals(self, cid: int) -> list[int]:
        return self.clauses[cid].lits

    def add(self, cid: int, lits: Iterable[int]) -> None:
        if cid in self.clauses:
            raise KeyError(f"clause {cid} already present")
        lits = list(dict.fromkeys(lits))
        c = _Clause(cid, lits)
        self.clauses[cid] = c
        for lit in lits:
            self.occurs[lit].add(cid)
        if not lits:
            self.empties.add(cid)
        elif len(lits) == 1:
            self.units[cid] = c
        else:
            self.watches[lits[0]].append(c)
            self.watches[lits[1]].append(c)

    def remove(self, cid: int) -> None:
        c = self.clauses.pop(cid)
        c.alive = False
        for lit in c.lits:
            s = self.occurs.get(lit)
            if s is not None:
                s.discard(cid)
                if not s:
                    del self.occurs[lit]
        self.units.pop(cid, None)
        self.empties.discard(cid)

    def rename(self, old: int, new: int) -> None:
        lits = self.clauses[old].lits
        self.remove(old)
        self.add(new, lits)

    # --- propagation -----------------------------------------------------

    def _propagate(self, st: _State) -> int | None:
        """Run 2WL propagation from ``st.qhead``; returns a conflict clause id."""
        value = st.value
        watches = self.watches
        trail = st.trail
        while st.qhead < len(trail):
            falsified = -trail[st.qhead]
            st.qhead += 1
            ws = watches.get(falsified)
            if not ws:
                continue
            n = len(ws)
            i = j = 0
            while i < n:
                c = ws[i]
                i += 1
                if not c.alive:
                    continue
                lits = c.lits
                if lits[0] == falsified:
                    lits[0], lits[1] = lits[1], falsified
                first = lits[0]
                if value.get(first) is True:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    if value.get(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], falsified
                        watches[lits[1]].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if value.get(first) is False:
                        while i < n:
                            ws[j] = ws[i]
                            i += 1
                            j += 1
                        del ws[j:]
                        return c.cid
                    st.assign(first, c.cid)
            del ws[j:]
        return None

    def _start(self, st: _State, assumptions: Iterable[int]):
        """Assume literals, then fire units and empties. Returns a conflict or None.

        The conflict is ``("clause", cid)`` or ``("lit", lit)`` when an
        assumption contradicts an earlier one.
        """
        for lit in assumptions:
            v = st.value.get(lit)
            if v is False:
                return ("lit", lit)
            if v is None:
                st.assign(lit, None)
        for cid in sorted(self.empties):
            return ("clause", cid)
        for c in self.units.values():
            lit = c.lits[0]
            v = st.value.get(lit)
            if v is False:
                return ("clause", c.cid)
            if v is None:
                st.assign(lit, c.cid)
        return None

    def _analyze(self, st: _State, conflict) -> list[tuple[int, int]]:
        """Reason clauses needed for ``conflict`` as ``(trail_pos, cid)``, in trail order.

        The conflict clause itself, if any, is not included.
        """
        kind, what = conflict
        seen: set[int] = set()
        if kind == "clause":
            for lit in self.clauses[what].lits:
                seen.add(abs(lit))
        else:
            seen.add(abs(what))
        used = []
        reason = st.reason
        lits_of = self.clauses
        for pos in range(len(st.trail) - 1, -1, -1):
            var = abs(st.trail[pos])
            if var not in seen:
                continue
            r = reason[var]
            if r is None:
                continue
            used.append((pos, r))
            for lit in lits_of[r].lits:
                seen.add(abs(lit))
        used.reverse()
        return used

    def _trace(self, st: _State, conflict) -> list[int]:
        hint = [cid for _, cid in self._analyze(st, conflict)]
        if conflict[0] == "clause":
            hint.append(conflict[1])
        return hint

    def propagate(self, assumptions: Iterable[int]) -> PropagationOutcome:
        """Exhaustive unit propagation from ``assumptions``.

        On conflict ``used`` is the trimmed, replayable hint ending with the
        conflict clause.
        """
        st = _State()
        conflict = self._start(st, assumptions)
        if conflict is None:
            cid = self._propagate(st)
            if cid is not None:
                conflict = ("clause", cid)
        if conflict is None:
            return PropagationOutcome(False, [])
        return PropagationOutcome(True, self._trace(st, conflict))

    def prove_rup(self, clause: Sequence[int]) -> list[int] | None:
        """Hint certifying that ``clause`` is AT, or ``None``."""
        out = self.propagate([-lit for lit in clause])
        return out.used if out.conflict else None

    def prove_pr(self, clause: Sequence[int], witness: Sequence[int] | None = None) -> list[int]:
        """Hint certifying ``clause`` as AT, RAT (pivot ``clause[0]``) or PR under ``witness``.

        Raises :class:`CheckFailure` when no certificate exists.
        """
        st = _State()
        conflict = self._start(st, [-lit for lit in clause])
        if conflict is None:
            cid = self._propagate(st)
            if cid is not None:
                conflict = ("clause", cid)
        if conflict is not None:
            return self._trace(st, conflict)
        if not clause:
            raise CheckFailure("empty clause is not implied by unit propagation")

        w = tuple(witness) if witness else (clause[0],)
        wset = set(w)
        if any(-lit in wset for lit in wset):
            raise CheckFailure("witness is inconsistent")
        if clause[0] not in wset:
            raise CheckFailure("witness does not contain the pivot")

        base = len(st.trail)
        prefix: dict[int, int] = {}
        groups: list[list[int]] = []
        for cid in self.candidates(w):
            reduced = [lit for lit in self.clauses[cid].lits if -lit not in wset]
            conflict = None
            for lit in reduced:
                v = st.value.get(lit)
                if v is True:
                    conflict = ("lit", lit)
                    break
                if v is None:
                    st.assign(-lit, None)
            if conflict is None:
                hit = self._propagate(st)
                if hit is not None:
                    conflict = ("clause", hit)
            if conflict is None:
                st.undo(base)
                kind = "PR" if witness and len(w) > 1 else "RAT"
                raise CheckFailure(f"{kind} check fails on candidate clause {cid}", candidate=cid)
            group = [-cid]
            for pos, r in self._analyze(st, conflict):
                if pos < base:
                    prefix[pos] = r
                else:
                    group.append(r)
            if conflict[0] == "clause":
                group.append(conflict[1])
            groups.append(group)
            st.undo(base)

        hint = [prefix[p] for p in sorted(prefix)]
        for group in groups:
            hint.extend(group)
        return hint

    def candidates(self, witness: Sequence[int]) -> list[int]:
        """Clauses touched by ``witness`` (contain a falsified literal) but not satisfied by it."""
        wset = set(witness)
        found: set[int] = set()
        for lit in wset:
            found.update(self.occurs.get(-lit, ()))
        out = []
        for cid in sorted(found):
            if not any(lit in wset for lit in self.clauses[cid].lits):
                out.append(cid)
        return out

    # --- hint validation ---------------------------------------------------

    def _fire(self, st: _State, cid: int) -> str:
        """Use clause ``cid`` as a hint: ``"unit"``, ``"conflict"`` or ``"bad"``."""
        free = None
        value = st.value
        for lit in self.clauses[cid].lits:
            v = value.get(lit)
            if v is True:
                return "bad"
            if v is None:
                if free is not None:
                    return "bad"
                free = lit
        if free is None:
            return "conflict"
        st.assign(free, cid)
        return "unit"

    def replay(self, clause: Sequence[int], witness: Sequence[int] | None,
               hint: Sequence[int]) -> int | None:
        """Check ``hint`` under strict LRAT discipline.

        Returns the length of the prefix of ``hint`` that suffices, or
        ``None`` when the hint is invalid.
        """
        if any(abs(h) not in self.clauses for h in hint):
            return None
        st = _State()
        for lit in clause:
            v = st.value.get(-lit)
            if v is False:
                return 0
            if v is None:
                st.assign(-lit, None)
        i = 0
        n = len(hint)
        while i < n and hint[i] > 0:
            r = self._fire(st, hint[i])
            i += 1
            if r == "conflict":
                return i
            if r == "bad":
                return None
        if not clause:
            return None

        w = tuple(witness) if witness else (clause[0],)
        wset = set(w)
        if clause[0] not in wset or any(-lit in wset for lit in wset):
            return None
        pending = set(self.candidates(w))
        base = len(st.trail)
        while i < n:
            cid = -hint[i]
            i += 1
            if cid <= 0 or cid not in pending:
                return None
            pending.discard(cid)
            done = False
            for lit in self.clauses[cid].lits:
                if -lit in wset:
                    continue
                v = st.value.get(lit)
                if v is True:
                    done = True
                    break
                if v is None:
                    st.assign(-lit, None)
            while i < n and hint[i] > 0:
                if not done:
                    r = self._fire(st, hint[i])
                    if r == "conflict":
                        done = True
                    elif r == "bad":
                        return None
                i += 1
            st.undo(base)
            if not done:
                return None
        return n if not pending else None

    def _salvage(self, clause: Sequence[int], hint: Sequence[int]) -> list[int] | None:
        """Fire the listed clauses in whatever order makes them unit."""
        st = _State()
        for lit in clause:
            v = st.value.get(-lit)
            if v is False:
                return []
            if v is None:
                st.assign(-lit, None)
        todo = list(dict.fromkeys(hint))
        progress = True
        while progress and todo:
            progress = False
            rest = []
            for cid in todo:
                r = self._fire(st, cid)
                if r == "conflict":
                    return self._trace(st, ("clause", cid))
                if r == "unit":
                    progress = True
                else:
                    rest.append(cid)
            todo = rest
        return None

    def check_hint(self, clause: Sequence[int], witness: Sequence[int] | None,
                   hint: Sequence[int]) -> list[int]:
        """Validate a solver-provided hint, reorder it, or fall back to :meth:`prove_pr`."""
        hint = list(hint)
        known = all(h != 0 and abs(h) in self.clauses for h in hint)
        if known and hint:
            k = self.replay(clause, witness, hint)
            if k is not None:
                return hint[:k]
            if all(h > 0 for h in hint):
                fixed = self._salvage(clause, hint)
                if fixed is not None:
                    return fixed
        return self.prove_pr(clause, witness)


def propagate(active: Mapping[int, Sequence[int]], assumptions: Iterable[int]) -> PropagationOutcome:
    """One-shot propagation over a ``{id: clause}`` mapping."""
    return ClauseDB(active).propagate(assumptions)


def prove_rup(active: Mapping[int, Sequence[int]], clause: Sequence[int]) -> list[int] | None:
    return ClauseDB(active).prove_rup(clause)


def prove_pr(active: Mapping[int, Sequence[int]], clause: Sequence[int],
             witness: Sequence[int] | None = None) -> list[int]:
    return ClauseDB(active).prove_pr(clause, witness)


def check_hint(active: Mapping[int, Sequence[int]], clause: Sequence[int],
               witness: Sequence[int] | None, hint: Sequence[int]) -> list[int]:
    return ClauseDB(active).check_hint(clause, witness, hint)
