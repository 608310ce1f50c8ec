"""Reading and writing FRAT proofs, text and binary, forward and backward.

A FRAT file is a sequence of segments: a letter, zero or more nonzero
numbers, then a terminating zero. An ``a`` segment may be followed by an
``l`` segment carrying its hint; readers fold the two into one :class:`Step`.
Text comments run from ``c`` to the first ``.`` on the same line; binary
comments are ``c`` followed by a NUL-terminated string.

Backward reading works because segment ends are locally recognisable: every
zero byte in a binary file terminates a segment, and in text mode comments
never span lines, so any block of whole lines tokenizes the same way it
would inside a forward scan.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, replace
from typing import BinaryIO, Iterable, Iterator, Sequence

from .clauses import MAX_MAGNITUDE, FormatError, format_clause
from .varint import decode_signed, decode_unsigned, encode_signed, encode_unsigned

ORIG = "o"
ADD = "a"
DEL = "d"
FINAL = "f"
RELOC = "r"
COMMENT = "c"
TODO = "t"
HINT = "l"

CLAUSE_KINDS = frozenset("oadf")
SEGMENT_LETTERS = frozenset("oadfrctl")

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class Step:
    """One FRAT step.

    ``id`` is the clause id for o/a/d/f steps and the todo id for t steps.
    ``hint`` is ``None`` when an a step carries no ``l`` segment; an empty
    tuple means an explicit empty hint. ``pairs`` holds (source, target)
    relocation pairs.
    """

    kind: str
    id: int = 0
    clause: tuple = ()
    witness: tuple | None = None
    hint: tuple | None = None
    pairs: tuple = ()
    text: str = ""

    @property
    def todo_id(self) -> int:
        return self.id

    def without_hint(self) -> "Step":
        return replace(self, hint=None) if self.hint is not None else self


def orig(cid, clause) -> Step:
    return Step(ORIG, cid, tuple(clause))


def add(cid, clause, hint=None, witness=None) -> Step:
    return Step(ADD, cid, tuple(clause),
                None if witness is None else tuple(witness),
                None if hint is None else tuple(hint))


def delete(cid, clause) -> Step:
    return Step(DEL, cid, tuple(clause))


def final(cid, clause) -> Step:
    return Step(FINAL, cid, tuple(clause))


def reloc(pairs) -> Step:
    return Step(RELOC, pairs=tuple((int(s), int(t)) for s, t in pairs))


def comment(text: str) -> Step:
    return Step(COMMENT, text=text)


def split_pr_witness(raw: Sequence[int]) -> tuple[tuple, tuple | None]:
    """Split an a-segment literal payload into ``(clause, witness)``.

    A witness is present iff the first literal recurs; the witness starts at
    that second occurrence.

    >>> split_pr_witness([1, 2, 1, -3])
    ((1, 2), (1, -3))
    >>> split_pr_witness([-3, -4])
    ((-3, -4), None)
    """
    raw = tuple(raw)
    if not raw:
        return raw, None
    pivot = raw[0]
    try:
        at = raw.index(pivot, 1)
    except ValueError:
        return raw, None
    return raw[:at], raw[at:]


def _check_magnitude(values: Iterable[int]) -> None:
    for v in values:
        if abs(v) > MAX_MAGNITUDE:
            raise FormatError(f"number {v} exceeds 2^62-1")


def _build(letter: str, nums: list[int] | None, text: str | None, where: str) -> Step:
    """Turn one raw segment (other than ``l``) into a Step."""
    if letter == COMMENT:
        return Step(COMMENT, text=text or "")
    if letter not in SEGMENT_LETTERS:
        raise FormatError(f"{where}: unknown segment {letter!r}")
    assert nums is not None
    _check_magnitude(nums)
    if letter in CLAUSE_KINDS:
        if not nums:
            raise FormatError(f"{where}: '{letter}' segment without clause id")
        cid = nums[0]
        if cid <= 0:
            raise FormatError(f"{where}: invalid clause id {cid}")
        lits = nums[1:]
        if letter == ADD:
            clause, witness = split_pr_witness(lits)
            return Step(ADD, cid, clause, witness)
        return Step(letter, cid, tuple(lits))
    if letter == RELOC:
        if len(nums) % 2:
            raise FormatError(f"{where}: relocation with odd id count")
        if any(n <= 0 for n in nums):
            raise FormatError(f"{where}: invalid relocation id")
        return Step(RELOC, pairs=tuple(zip(nums[0::2], nums[1::2])))
    if letter == TODO:
        if len(nums) != 1 or nums[0] <= 0:
            raise FormatError(f"{where}: 't' segment needs exactly one positive id")
        return Step(TODO, nums[0])
    raise FormatError(f"{where}: unknown segment {letter!r}")


# Raw segments are (letter, numbers, comment_text) triples.

_TOKEN = re.compile(rb"c([^.\n]*)\.|(-?[0-9]+)|([a-z])|(\S)")


def _tokens(block: bytes) -> list:
    """Tokenize a block of whole text lines into ints, letters and comments."""
    out = []
    append = out.append
    for m in _TOKEN.finditer(block):
        num = m.group(2)
        if num is not None:
            append(int(num))
            continue
        letter = m.group(3)
        if letter is not None:
            if letter == b"c":
                raise FormatError("comment not terminated by '.' on its line")
            append(letter.decode())
            continue
        body = m.group(1)
        if body is not None:
            text = body.decode("utf-8", "replace")
            if text.startswith(" "):
                text = text[1:]
            append(_Comment(text))
            continue
        raise FormatError(f"unexpected character {m.group(4)!r}")
    return out


class _Comment(str):
    pass


def _text_segments_forward(blocks: Iterable[bytes]) -> Iterator[tuple]:
    letter = None
    nums: list[int] = []
    for block in blocks:
        for tok in _tokens(block):
            if isinstance(tok, _Comment):
                if letter is not None:
                    raise FormatError(f"comment inside '{letter}' segment")
                yield COMMENT, None, str(tok)
            elif isinstance(tok, str):
                if letter is not None:
                    raise FormatError(f"segment '{letter}' not terminated before '{tok}'")
                letter = tok
                nums = []
            elif tok == 0:
                if letter is None:
                    raise FormatError("stray 0 outside a segment")
                yield letter, nums, None
                letter = None
            else:
                if letter is None:
                    raise FormatError(f"number {tok} outside a segment")
                nums.append(tok)
    if letter is not None:
        raise FormatError(f"truncated '{letter}' segment at end of file")


def _text_segments_backward(blocks: Iterable[bytes]) -> Iterator[tuple]:
    # Reading right to left: a 0 opens a segment, a letter closes it.
    nums: list[int] | None = None
    for block in blocks:
        for tok in reversed(_tokens(block)):
            if isinstance(tok, _Comment):
                if nums is not None:
                    raise FormatError("comment inside a segment")
                yield COMMENT, None, str(tok)
            elif isinstance(tok, str):
                if nums is None:
                    raise FormatError(f"segment '{tok}' not terminated by 0")
                nums.reverse()
                yield tok, nums, None
                nums = None
            elif tok == 0:
                if nums is not None:
                    raise FormatError("zero inside a segment")
                nums = []
            else:
                if nums is None:
                    raise FormatError(f"number {tok} after the last segment terminator")
                nums.append(tok)
    if nums is not None:
        raise FormatError("segment without a leading letter at start of file")


def _binary_segment(seg: bytes) -> tuple:
    if not seg:
        raise FormatError("empty binary segment")
    letter = chr(seg[0])
    if letter == COMMENT:
        return COMMENT, None, seg[1:].decode("utf-8", "replace")
    if letter not in SEGMENT_LETTERS:
        raise FormatError(f"unknown segment byte 0x{seg[0]:02x}")
    nums: list[int] = []
    pos = 1
    end = len(seg)
    if letter in CLAUSE_KINDS:
        # Clause id is unsigned, literals are signed.
        v, pos = decode_unsigned(seg, pos)
        nums.append(v)
        while pos < end:
            v, pos = decode_signed(seg, pos)
            nums.append(v)
    elif letter == HINT:
        while pos < end:
            v, pos = decode_signed(seg, pos)
            nums.append(v)
    else:
        while pos < end:
            v, pos = decode_unsigned(seg, pos)
            nums.append(v)
    return letter, nums, None


def _binary_segments_forward(blocks: Iterable[bytes]) -> Iterator[tuple]:
    carry = b""
    for block in blocks:
        parts = (carry + block).split(b"\0")
        carry = parts.pop()
        for seg in parts:
            yield _binary_segment(seg)
    if carry:
        raise FormatError("truncated binary segment at end of file")


def _binary_segments_backward(blocks: Iterable[bytes]) -> Iterator[tuple]:
    # blocks arrive last-first; carry holds the unterminated tail of the
    # previously seen (later) block's leftmost segment.
    carry = None
    for block in blocks:
        data = block + (carry or b"")
        parts = data.split(b"\0")
        if carry is None:
            if parts[-1]:
                raise FormatError("binary file does not end with a segment terminator")
            parts.pop()
        else:
            # data ended where the later block started; the final part has
            # no terminator in this block, it was merged from carry already.
            pass
        carry = parts[0]
        for seg in reversed(parts[1:]):
            yield _binary_segment(seg)
    if carry:
        yield _binary_segment(carry)


def _fold_hints_forward(segments: Iterable[tuple]) -> Iterator[Step]:
    pending = None
    for n, (letter, nums, text) in enumerate(segments):
        if letter == HINT:
            if pending is None:
                raise FormatError(f"segment {n}: 'l' hint without a preceding 'a' step")
            _check_magnitude(nums)
            yield replace(pending, hint=tuple(nums))
            pending = None
            continue
        if pending is not None:
            yield pending
            pending = None
        step = _build(letter, nums, text, f"segment {n}")
        if step.kind == ADD:
            pending = step
        else:
            yield step
    if pending is not None:
        yield pending


def _fold_hints_backward(segments: Iterable[tuple]) -> Iterator[Step]:
    hint = None
    for n, (letter, nums, text) in enumerate(segments):
        if letter == HINT:
            if hint is not None:
                raise FormatError(f"segment -{n}: two consecutive 'l' segments")
            _check_magnitude(nums)
            hint = tuple(nums)
            continue
        step = _build(letter, nums, text, f"segment -{n}")
        if hint is not None:
            if step.kind != ADD:
                raise FormatError(f"segment -{n}: 'l' hint not preceded by an 'a' step")
            step = replace(step, hint=hint)
            hint = None
        yield step
    if hint is not None:
        raise FormatError("'l' hint at start of file")


# --- sources -------------------------------------------------------------

def sniff_binary(head: bytes) -> bool:
    """Binary iff the leading bytes contain something no text FRAT holds."""
    for b in head:
        if b == 0 or b >= 0x80 or (b < 0x20 and b not in b"\t\n\r\f\v"):
            return True
    return False


def _open(source) -> tuple[BinaryIO, bool]:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return io.BytesIO(bytes(source)), True
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb"), True
    return source, False


def _resolve_mode(fh: BinaryIO, mode) -> bool:
    if mode in ("binary", True):
        return True
    if mode in ("text", False):
        return False
    pos = fh.tell()
    head = fh.read(4096)
    fh.seek(pos)
    return sniff_binary(head)


def _forward_blocks(fh: BinaryIO, binary: bool) -> Iterator[bytes]:
    if binary:
        while True:
            block = fh.read(BLOCK_SIZE)
            if not block:
                return
            yield block
    else:
        while True:
            lines = fh.readlines(BLOCK_SIZE)
            if not lines:
                return
            yield b"".join(lines)


def _reverse_blocks(fh: BinaryIO, cut_at_newline: bool) -> Iterator[bytes]:
    """Yield the file contents in blocks from the end towards the start.

    With ``cut_at_newline`` every yielded block consists of whole lines.
    """
    fh.seek(0, io.SEEK_END)
    pos = fh.tell()
    carry = b""
    while pos > 0:
        start = max(0, pos - BLOCK_SIZE)
        fh.seek(start)
        chunk = fh.read(pos - start) + carry
        pos = start
        if not cut_at_newline or start == 0:
            carry = b""
            yield chunk
            continue
        nl = chunk.find(b"\n")
        if nl < 0:
            carry = chunk
            continue
        carry = chunk[: nl + 1]
        yield chunk[nl + 1:]
    if carry:
        yield carry


def iter_steps(source, mode="auto") -> Iterator[Step]:
    """Iterate the steps of a FRAT proof in file order.

    ``source`` is a path, bytes, or a binary stream; ``mode`` is
    ``"text"``, ``"binary"`` or ``"auto"``.
    """
    fh, owned = _open(source)
    try:
        binary = _resolve_mode(fh, mode)
        blocks = _forward_blocks(fh, binary)
        segs = _binary_segments_forward(blocks) if binary else _text_segments_forward(blocks)
        yield from _fold_hints_forward(segs)
    finally:
        if owned:
            fh.close()


def iter_steps_backward(source, mode="auto") -> Iterator[Step]:
    """Iterate the steps of a FRAT proof from the last to the first.

    The source must be seekable. The result is the reverse of
    :func:`iter_steps` on the same input.
    """
    fh, owned = _open(source)
    try:
        binary = _resolve_mode(fh, mode)
        blocks = _reverse_blocks(fh, cut_at_newline=not binary)
        segs = _binary_segments_backward(blocks) if binary else _text_segments_backward(blocks)
        yield from _fold_hints_backward(segs)
    finally:
        if owned:
            fh.close()


def parse_steps(data: bytes, mode="auto") -> list[Step]:
    return list(iter_steps(data, mode))


# --- writing -------------------------------------------------------------

def _payload(step: Step) -> tuple:
    if step.witness is not None:
        return step.clause + step.witness
    return step.clause


def write_step(step: Step, binary: bool = False) -> bytes:
    """Serialize one step (including its ``l`` segment, if any)."""
    kind = step.kind
    if binary:
        out = bytearray(kind.encode())
        if kind in CLAUSE_KINDS:
            out += encode_unsigned(step.id)
            for lit in _payload(step):
                out += encode_signed(lit)
        elif kind == RELOC:
            for s, t in step.pairs:
                out += encode_unsigned(s)
                out += encode_unsigned(t)
        elif kind == TODO:
            out += encode_unsigned(step.id)
        elif kind == COMMENT:
            data = step.text.encode()
            if b"\0" in data:
                raise ValueError("binary comment may not contain NUL")
            out += data
        else:
            raise ValueError(f"cannot write step kind {kind!r}")
        out.append(0)
        if kind == ADD and step.hint is not None:
            out += b"l"
            for h in step.hint:
                out += encode_signed(h)
            out.append(0)
        return bytes(out)

    if kind in CLAUSE_KINDS:
        body = format_clause(_payload(step))
        line = f"{kind} {step.id} {body} 0" if body else f"{kind} {step.id} 0"
        if kind == ADD and step.hint is not None:
            hint = format_clause(step.hint)
            line += f" l {hint} 0" if hint else " l 0"
    elif kind == RELOC:
        flat = " ".join(f"{s} {t}" for s, t in step.pairs)
        line = f"r {flat} 0" if flat else "r 0"
    elif kind == TODO:
        line = f"t {step.id} 0"
    elif kind == COMMENT:
        if "." in step.text or "\n" in step.text:
            raise ValueError("text comment may not contain '.' or a newline")
        line = f"c {step.text}."
    else:
        raise ValueError(f"cannot write step kind {kind!r}")
    return (line + "\n").encode()


def write_steps(steps: Iterable[Step], binary: bool = False) -> bytes:
    return b"".join(write_step(s, binary) for s in steps)


class FratWriter:
    """Append steps to a binary stream, counting bytes written."""

    def __init__(self, fh: BinaryIO, binary: bool = False):
        self.fh = fh
        self.binary = binary
        self.bytes_written = 0
        self.steps_written = 0

    def write(self, step: Step) -> None:
        data = write_step(step, self.binary)
        self.fh.write(data)
        self.bytes_written += len(data)
        self.steps_written += 1
