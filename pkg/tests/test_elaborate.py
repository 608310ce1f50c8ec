import io
import random

import pytest

from fratkit import frat
from fratkit.clauses import InputFormula, parse_dimacs
from fratkit.elaborate import (ElaborationError, Report, TEMP_SUFFIX, elaborate, elaborate_bytes,
                               elaborate_pass1, iter_revcert, renumber_pass2)
from fratkit.frat import FratWriter, add, delete, final, orig, parse_steps
from fratkit.lrat import check_lrat, parse_lrat

import proofgen

EXAMPLE_LRAT_LINES = [
    "9 -3 -4 0 5 1 8 0",
    "9 d 5 0",
    "10 -4 0 9 3 2 8 0",
    "10 d 8 3 9 0",
    "11 d 2 6 0",
    "12 d 4 0",
    "13 1 0 12 11 1 0",
    "13 d 1 11 0",
    "14 0 13 12 10 7 0",
]


def lrat_lines(text):
    return text.strip().split("\n")


def pass1(data: bytes) -> tuple[list, Report]:
    buf = io.BytesIO()
    rep = elaborate_pass1(frat.iter_steps_backward(data), FratWriter(buf, binary=True))
    return list(iter_revcert(buf.getvalue())), rep


@pytest.fixture
def example_frat(data):
    return (data / "example.frat").read_bytes()


def test_example_frat_end_to_end(example_frat, example):
    text, rep = elaborate_bytes(example_frat, example)
    lines = lrat_lines(text)
    for line in EXAMPLE_LRAT_LINES:
        assert line in lines
    adds = [l for l in lines if " d " not in l]
    assert [l.split(" 0 ")[0] for l in adds] == ["9 -3 -4", "10 -4", "11 3", "12 -2", "13 1", "14"]
    assert check_lrat(example, text)
    assert rep.lrat_adds == 6 and rep.hints_derived == 2 and rep.dialect == "LRAT"


def test_revcert_invariants(example_frat):
    rev, _ = pass1(example_frat)
    fwd = rev[::-1]
    assert not any(s.kind == "f" for s in fwd)
    assert all(s.hint is not None for s in fwd if s.kind == "a")
    assert sorted(s.id for s in fwd if s.kind == "a") == [9, 10, 11, 12, 13, 14]
    # every introduced clause is used by a later hint (or is the empty clause)
    used = set()
    for s in reversed(fwd):
        if s.kind in "oa":
            assert s.id in used or (s.kind == "a" and not s.clause)
        if s.kind == "a":
            used.update(abs(h) for h in s.hint)


def test_deferred_deletion_precedes_use_in_revcert(example_frat):
    rev, _ = pass1(example_frat)
    kinds = [(s.kind, s.id) for s in rev]
    assert kinds.index(("d", 5)) < kinds.index(("a", 9))


def test_no_empty_clause():
    with pytest.raises(ElaborationError, match="no finalized empty clause"):
        pass1(b"o 1 1 2 0\nf 1 1 2 0\n")


def test_literal_mismatch():
    with pytest.raises(ElaborationError, match="do not match"):
        pass1(b"o 1 1 0\no 2 -1 0\no 3 5 0\na 4 0 l 1 2 0\nf 1 1 0\nf 2 -1 0\nf 3 5 6 0\nf 4 0\n")


def test_unfinalized_clause():
    with pytest.raises(ElaborationError, match="neither finalized nor deleted"):
        pass1(b"o 1 1 0\no 2 -1 0\no 3 5 0\na 4 0 l 1 2 0\nf 1 1 0\nf 2 -1 0\nf 4 0\n")


def test_leftover_clause():
    with pytest.raises(ElaborationError, match="never introduced"):
        pass1(b"o 1 1 0\no 2 -1 0\na 3 0 l 1 2 0\nf 1 1 0\nf 2 -1 0\nf 7 4 0\nf 3 0\n")


def test_unprovable_lemma_names_step():
    with pytest.raises(ElaborationError, match="step a 3"):
        pass1(b"o 1 1 2 0\no 2 -1 0\na 3 0\nf 1 1 2 0\nf 2 -1 0\nf 3 0\n")


def test_irrelevant_additions_are_trimmed():
    rng = random.Random(4)
    steps = [orig(1, (1,)), orig(2, (-1, 2)), orig(3, (-2,))]
    live = {}
    cid = 4
    for _ in range(1000):
        parent = rng.choice([1, 2, 3] + list(live)[-5:])
        base = live.get(parent) or steps[parent - 1].clause
        clause = base + (100 + cid,)
        steps.append(add(cid, clause, (parent,)))
        live[cid] = clause
        cid += 1
    steps.append(add(cid, (), (1, 2, 3)))
    steps += [final(j, c) for j, c in live.items()]
    steps += [final(j, steps[j - 1].clause) for j in (1, 2, 3)] + [final(cid, ())]
    data = frat.write_steps(steps, binary=True)
    rev, rep = pass1(data)
    assert [s.id for s in rev if s.kind == "a"] == [cid]
    assert rep.adds_read == 1001 and rep.adds_kept == 1
    formula = InputFormula([(1,), (-1, 2), (-2,)], 2, 3)
    text, _ = elaborate_bytes(data, formula)
    assert text == "4 0 1 2 3 0\n"


def test_renumber_single_clause():
    formula = InputFormula([(5,)], 5, 1)
    rev = [orig(7, (5,)), add(9, (), (7,))]
    out = io.StringIO()
    renumber_pass2(formula, rev, out)
    assert out.getvalue() == "2 0 1 0\n"


def test_renumber_stops_at_empty_clause():
    formula = InputFormula([(5,)], 5, 1)
    rev = [orig(7, (5,)), add(9, (), (7,)), add(10, (3,), (7,)), delete(7, (5,))]
    out = io.StringIO()
    renumber_pass2(formula, rev, out)
    assert out.getvalue() == "2 0 1 0\n"


def test_renumber_merges_deletions():
    formula = InputFormula([(1,), (-1, 2), (-2, 3), (-3,)], 3, 4)
    rev = [orig(1, (1,)), orig(2, (-1, 2)), add(5, (2,), (1, 2)), delete(1, (1,)), delete(2, (-1, 2)),
           orig(3, (-2, 3)), orig(4, (-3,)), add(6, (), (5, 3, 4))]
    out = io.StringIO()
    rep = renumber_pass2(formula, rev, out)
    assert out.getvalue() == "5 2 0 1 2 0\n5 d 1 2 0\n6 0 5 3 4 0\n"
    assert rep.lrat_deletion_lines == 1


def test_renumber_duplicate_input_clauses():
    formula = InputFormula([(1,), (1,), (-1,)], 1, 3)
    rev = [orig(2, (1,)), orig(1, (1,)), orig(3, (-1,)), add(4, (), (2, 3))]
    out = io.StringIO()
    renumber_pass2(formula, rev, out)
    assert out.getvalue() == "4 0 1 3 0\n"


def test_renumber_unknown_original():
    with pytest.raises(ElaborationError, match="not found in input"):
        renumber_pass2(InputFormula([(1,)], 1, 1), [orig(1, (2,))], io.StringIO())


def test_relocation_is_followed():
    text = b"o 1 1 2 0\no 2 -2 0\no 3 -1 0\na 4 1 0 l 1 2 0\nr 4 9 0\na 10 0 l 9 3 0\n" \
           b"f 1 1 2 0\nf 2 -2 0\nf 3 -1 0\nf 9 1 0\nf 10 0\n"
    formula = InputFormula([(1, 2), (-2,), (-1,)], 2, 3)
    lrat, rep = elaborate_bytes(text, formula)
    assert lrat == "4 1 0 1 2 0\n4 d 2 1 0\n5 0 4 3 0\n"
    assert rep.relocations == 1
    assert check_lrat(formula, lrat)


def test_relocation_collision():
    text = b"o 1 1 0\no 2 -1 0\no 3 5 0\na 4 0 l 1 2 0\nr 3 9 0\n" \
           b"f 1 1 0\nf 2 -1 0\nf 3 7 0\nf 9 5 0\nf 4 0\n"
    with pytest.raises(ElaborationError, match="already active"):
        pass1(text)


def test_comments_and_todo_are_dropped(example, example_frat):
    noisy = b"c start.\n" + example_frat.replace(b"a 11", b"t 11 0\nc tricky 0 a 1.\na 11") + b"c end.\n"
    a, rep = elaborate_bytes(noisy, example)
    b, _ = elaborate_bytes(example_frat, example)
    assert a == b and rep.comments == 3


def test_disk_and_memory_agree(tmp_path, data):
    out1, out2 = tmp_path / "a.lrat", tmp_path / "b.lrat"
    r1 = elaborate(data / "example.frat", data / "example.cnf", out1)
    r2 = elaborate(data / "example.frat", data / "example.cnf", out2, temp_mode="memory")
    assert out1.read_bytes() == out2.read_bytes()
    assert r1.temp_bytes > 0 and r2.temp_bytes == 0
    assert not list(tmp_path.glob("*" + TEMP_SUFFIX))


def test_binary_input(tmp_path, data, example_frat):
    steps = parse_steps(example_frat)
    p = tmp_path / "example_frat.bin.frat"
    p.write_bytes(frat.write_steps(steps, binary=True))
    elaborate(p, data / "example.cnf", tmp_path / "a.lrat")
    elaborate(data / "example.frat", data / "example.cnf", tmp_path / "b.lrat")
    assert (tmp_path / "a.lrat").read_bytes() == (tmp_path / "b.lrat").read_bytes()


def test_temp_file_kept_on_failure(tmp_path, data):
    bad = tmp_path / "bad.frat"
    bad.write_bytes(b"o 1 1 2 -3 0\nf 1 1 2 -3 0\n")
    with pytest.raises(ElaborationError):
        elaborate(bad, data / "example.cnf", tmp_path / "x.lrat")
    assert (tmp_path / ("x.lrat" + TEMP_SUFFIX)).exists()


def test_temp_dir_override(tmp_path, data, monkeypatch):
    spool = tmp_path / "spool"
    spool.mkdir()
    monkeypatch.setenv("FRATKIT_TMPDIR", str(spool))
    bad = tmp_path / "bad.frat"
    bad.write_bytes(b"o 1 1 2 -3 0\nf 1 1 2 -3 0\n")
    with pytest.raises(ElaborationError):
        elaborate(bad, data / "example.cnf", tmp_path / "x.lrat")
    assert len(list(spool.iterdir())) == 1
    elaborate(data / "example.frat", data / "example.cnf", tmp_path / "y.lrat")
    assert len(list(spool.iterdir())) == 1


def test_deterministic(example_frat, example):
    assert elaborate_bytes(example_frat, example)[0] == elaborate_bytes(example_frat, example)[0]


def max_forward_active(steps) -> int:
    live, top = 0, 0
    for s in steps:
        if s.kind in "oa":
            live += 1
        elif s.kind == "d":
            live -= 1
        top = max(top, live)
    return top


@pytest.mark.parametrize("case", range(6))
def test_corpus_verifies_and_respects_active_bound(case):
    ref = proofgen.pigeonhole_corpus()[case]
    for binary in (False, True):
        text, rep = elaborate_bytes(ref.frat_bytes(binary), ref.formula)
        assert check_lrat(ref.formula, text)
        assert rep.high_water <= max_forward_active(ref.steps)
        ids = [l.id for l in parse_lrat(text) if not l.is_delete]
        n = len(ref.formula)
        assert ids == list(range(n + 1, n + 1 + len(ids)))


def test_unused_inputs_are_deleted_before_first_addition():
    from collections import Counter
    formula = InputFormula([(1,), (-1,), (-1, 2), (1, 3)], 3, 4)
    rev = [orig(1, (1,)), orig(2, (-1,)), add(5, (), (1, 2))]
    out = io.StringIO()
    rep = renumber_pass2(formula, rev, out, kept_origs=Counter({(1,): 1, (-1,): 1}))
    assert out.getvalue() == "4 d 3 4 0\n5 0 1 2 0\n"
    assert rep.origs_deleted == 2
    out = io.StringIO()
    renumber_pass2(formula, rev, out)
    assert out.getvalue() == "5 0 1 2 0\n"


def test_unused_inputs_with_pass1_counts():
    from collections import Counter
    formula = InputFormula([(1,), (1,), (-1,), (2,)], 2, 4)
    kept = Counter({(-1,): 1, (1,): 2})
    rev = [orig(3, (-1,)), orig(1, (1,)), add(5, (), (1, 3)),
           orig(2, (1,))]
    out = io.StringIO()
    renumber_pass2(formula, rev, out, kept_origs=kept)
    assert out.getvalue() == "4 d 4 0\n5 0 1 3 0\n"


def test_unused_inputs_are_not_rat_candidates():
    # (-1 7) is deleted before the RAT step on -1 and never used; left
    # active in the LRAT output it would be an uncoverable candidate.
    formula = InputFormula([(1, 2), (-2,), (-1, 4), (-1, 5), (-5, -4), (1, 7)], 7, 6)
    data = b"".join(frat.write_step(s) for s in [
        *[orig(j, c) for j, c in enumerate(formula.clauses, start=1)],
        delete(6, (1, 7)),
        add(7, (-1,)),
        add(8, (), (1, 2, 7)),
        *[final(j, c) for j, c in enumerate(formula.clauses[:5], start=1)],
        final(7, (-1,)), final(8, ()),
    ])
    text, rep = elaborate_bytes(data, formula)
    assert rep.origs_deleted == 1 and text.startswith("6 d 6 0\n")
    assert check_lrat(formula, text)
