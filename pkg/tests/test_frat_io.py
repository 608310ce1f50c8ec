import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from fratkit import frat
from fratkit.clauses import FormatError
from fratkit.frat import (Step, add, comment, delete, final, iter_steps, iter_steps_backward,
                          orig, parse_steps, reloc, split_pr_witness, write_step, write_steps)

STEP9_BYTES = bytes.fromhex("61 09 07 09 00 6C 0A 02 10 00")


def test_step9_encoding():
    step = add(9, (-3, -4), hint=(5, 1, 8))
    assert write_step(step, binary=True) == STEP9_BYTES
    assert parse_steps(STEP9_BYTES, "binary") == [step]
    assert parse_steps(STEP9_BYTES) == [step]


def test_text_encoding():
    assert write_step(add(9, (-3, -4), (5, 1, 8))) == b"a 9 -3 -4 0 l 5 1 8 0\n"
    assert write_step(final(14, ())) == b"f 14 0\n"
    assert write_step(reloc([(3, 7), (4, 8)])) == b"r 3 7 4 8 0\n"
    assert write_step(comment("hello world")) == b"c hello world.\n"


def test_example_frat_parse(data):
    steps = parse_steps((data / "example.frat").read_bytes())
    assert [s.kind for s in steps[:8]] == ["o"] * 8
    a11 = steps[10]
    assert a11.kind == "a" and a11.id == 11 and a11.clause == (3,) and a11.hint is None
    assert steps[8].hint == (5, 1, 8)
    assert steps[-1] == final(14, ())


def test_split_pr_witness():
    assert split_pr_witness((1, 2, 3)) == ((1, 2, 3), None)
    assert split_pr_witness((1, 2, 1, -3)) == ((1, 2), (1, -3))
    assert split_pr_witness((1, 1)) == ((1,), (1,))
    assert split_pr_witness(()) == ((), None)


def test_witness_roundtrip():
    step = add(5, (1, 2), witness=(1, -3))
    for binary in (False, True):
        assert parse_steps(write_step(step, binary), "binary" if binary else "text") == [step]
    assert write_step(step) == b"a 5 1 2 1 -3 0\n"


def test_text_tokens_can_share_lines_and_span_them():
    text = b"o 1 1 2 0 o 2\n-1 0 a 3 2 0\nl 1 2 0 f 3 2 0\n"
    steps = parse_steps(text, "text")
    assert steps == [orig(1, (1, 2)), orig(2, (-1,)), add(3, (2,), (1, 2)), final(3, (2,))]
    assert list(iter_steps_backward(text, "text")) == steps[::-1]


def test_comment_stops_at_first_dot():
    text = b"c x 1 0 a.a 3 2 0\n"
    assert parse_steps(text, "text") == [comment("x 1 0 a"), add(3, (2,))]


def test_binary_comment_keeps_anything_but_nul():
    step = comment("a.b\n0 f 3")
    raw = write_step(step, binary=True)
    assert parse_steps(raw, "binary") == [step]
    with pytest.raises(ValueError):
        write_step(step, binary=False)


@pytest.mark.parametrize("text", [
    b"a 3 1 2\n",          # missing terminator
    b"l 1 2 0\n",          # hint without addition
    b"x 1 0\n",            # unknown letter
    b"a 3 1 q 0\n",        # bad token
    b"c never ends\n",     # unterminated comment
    b"o 0 1 0\n",          # ids are positive
    b"r 1 2 3 0\n",        # odd relocation list
])
def test_text_errors(text):
    with pytest.raises(FormatError):
        parse_steps(text, "text")
    with pytest.raises(FormatError):
        list(iter_steps_backward(text, "text"))


@pytest.mark.parametrize("raw", [
    b"a\x09\x07",           # truncated
    b"z\x01\x00",           # unknown letter
    b"a\x09\x01\x00",       # literal payload 1
])
def test_binary_errors(raw):
    with pytest.raises(FormatError):
        parse_steps(raw, "binary")


def test_todo_step_is_parsed():
    steps = parse_steps(b"t 12 0\n", "text")
    assert steps[0].kind == "t" and steps[0].todo_id == 12


def test_sniffing():
    assert frat.sniff_binary(STEP9_BYTES)
    assert not frat.sniff_binary(b"o 1 1 2 0\n")
    assert not frat.sniff_binary(b"")


def test_stream_and_path_sources(tmp_path):
    steps = [orig(1, (1,)), add(2, (), (1,)), final(2, ())]
    p = tmp_path / "p.frat"
    p.write_bytes(write_steps(steps, binary=True))
    assert list(iter_steps(p)) == steps
    assert list(iter_steps(str(p))) == steps
    with open(p, "rb") as fh:
        assert list(iter_steps_backward(fh)) == steps[::-1]


def test_writer_counts():
    buf = io.BytesIO()
    w = frat.FratWriter(buf, binary=True)
    w.write(add(9, (-3, -4), (5, 1, 8)))
    assert w.bytes_written == 10 and w.steps_written == 1 and buf.getvalue() == STEP9_BYTES


# --- random streams -------------------------------------------------------------

COMMENT_ALPHABET = "0123456789 -acdfloprt\t,;:%$#"


def random_steps(rng: random.Random, n: int, binary: bool) -> list[Step]:
    out = []
    for _ in range(n):
        k = rng.choice("oadfrlc")
        mags = {rng.randint(1, 1 << rng.choice((3, 10, 40))) for _ in range(rng.randint(0, 5))}
        lits = tuple(rng.choice([-1, 1]) * m for m in mags)
        cid = rng.randint(1, 1 << rng.choice((4, 20, 50)))
        if k == "o":
            out.append(orig(cid, lits))
        elif k == "a":
            hint = None
            if rng.random() < 0.5:
                hint = tuple(rng.choice([-1, 1, 1]) * rng.randint(1, 500) for _ in range(rng.randint(0, 6)))
            witness = None
            if lits and rng.random() < 0.2:
                witness = (lits[0],) + tuple(rng.randint(1, 9) for _ in range(rng.randint(0, 2)))
            out.append(add(cid, lits, hint, witness))
        elif k == "d":
            out.append(delete(cid, lits))
        elif k == "f":
            out.append(final(cid, lits))
        elif k == "r":
            out.append(reloc([(rng.randint(1, 99), rng.randint(1, 99)) for _ in range(rng.randint(1, 3))]))
        else:
            alphabet = COMMENT_ALPHABET + ("\n.\x7fé" if binary else "")
            out.append(comment("".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))))
    return out


def test_backward_is_reverse_of_forward_random():
    rng = random.Random(11)
    for trial in range(150):
        binary = trial % 2 == 1
        steps = random_steps(rng, rng.randint(0, 40), binary)
        raw = write_steps(steps, binary)
        mode = "binary" if binary else "text"
        fwd = list(iter_steps(raw, mode))
        assert fwd == steps
        assert list(iter_steps_backward(raw, mode)) == fwd[::-1]


def test_backward_across_block_boundaries(tmp_path, monkeypatch):
    monkeypatch.setattr(frat, "BLOCK_SIZE", 7, raising=False)
    rng = random.Random(5)
    for binary in (False, True):
        steps = random_steps(rng, 200, binary)
        p = tmp_path / "big.frat"
        p.write_bytes(write_steps(steps, binary))
        mode = "binary" if binary else "text"
        assert list(iter_steps_backward(p, mode)) == steps[::-1]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-(1 << 61), max_value=1 << 61).filter(bool), max_size=8,
                unique_by=abs),
       st.lists(st.integers(min_value=-(1 << 40), max_value=1 << 40).filter(bool), max_size=8),
       st.integers(min_value=1, max_value=1 << 61))
def test_add_roundtrip_property(lits, hint, cid):
    step = add(cid, tuple(lits), tuple(hint))
    for binary in (False, True):
        raw = write_step(step, binary)
        assert parse_steps(raw, "binary" if binary else "text") == [step]
