"""Comment extraction: lexing source text into classified, normalized comments.

The extractor is a character-level state machine that tracks string literals
(so quoted comment markers are not treated as comments), line comments, and
block comments, recording exact spans.  Spans use 1-based inclusive line
numbers and 0-based byte offsets into the UTF-8 encoding of each line; the
end column is exclusive.

Known limitations, by design: string tracking covers single-character quote
delimiters with backslash escapes only, and string state resets at end of
line.  Raw strings, heredocs, and multi-line (triple-quoted) strings are not
modeled, so a comment marker inside one of those may be extracted as a
comment.
"""

import hashlib
from dataclasses import dataclass, replace
from enum import Enum

from .languages import LanguageProfile


class CommentKind(str, Enum):
    INLINE = "INLINE"
    MULTI_LINE = "MULTI_LINE"
    BLOCK = "BLOCK"
    DOC_BLOCK = "DOC_BLOCK"


@dataclass(frozen=True)
class SourceComment:
    file_path: str
    line_start: int  # 1-based, inclusive
    line_end: int  # 1-based, inclusive
    col_start: int  # 0-based byte offset within line_start
    col_end: int  # 0-based byte offset within line_end, exclusive
    kind: CommentKind
    raw_text: str
    normalized_text: str
    content_hash: int
    # True when only whitespace precedes the comment on its starting line.
    full_line: bool = True
    # True for comments produced by a line marker (// or #), as opposed to
    # block delimiters.  Drives grouping and normalization.
    line_based: bool = False


def content_hash(file_path: str, normalized_text: str) -> int:
    """Stable 64-bit hash of (file_path, normalized_text).

    blake2b keeps it deterministic across runs and platforms, unlike hash().
    Signed so the value fits a SQLite INTEGER column as-is.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(file_path.encode("utf-8"))
    h.update(b"\x00")
    h.update(normalized_text.encode("utf-8"))
    return int.from_bytes(h.digest(), "little", signed=True)


def _byte_len(s: str) -> int:
    return len(s) if s.isascii() else len(s.encode("utf-8"))


class _Lexer:
    """One pass over the decoded file text, collecting raw comment spans."""

    def __init__(self, text: str, profile: LanguageProfile, file_path: str):
        self.text = text
        self.profile = profile
        self.file_path = file_path
        self.pos = 0
        self.line = 1
        self.col = 0  # byte offset within the current line
        self.out: list[SourceComment] = []
        # Sorted longest-first so /// wins over //.
        self.line_starts: list[tuple[str, bool]] = sorted(
            [(m, True) for m in profile.doc_line_markers]
            + [(m, False) for m in profile.line_markers],
            key=lambda t: -len(t[0]),
        )

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "\n":
                self.line += 1
                self.col = 0
            else:
                self.col += _byte_len(ch)

    def _startswith(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def _only_ws_before(self) -> bool:
        i = self.pos - 1
        while i >= 0 and self.text[i] != "\n":
            if not self.text[i].isspace():
                return False
            i -= 1
        return True

    def run(self) -> list[SourceComment]:
        text = self.text
        n = len(text)
        while self.pos < n:
            marker = self._match_line_marker()
            if marker is not None:
                self._lex_line_comment(*marker)
                continue
            block = self._match_block_open()
            if block is not None:
                self._lex_block_comment(*block)
                continue
            ch = text[self.pos]
            if ch in self.profile.string_delims:
                self._lex_string(ch)
                continue
            self._advance()
        return self.out

    def _match_line_marker(self) -> tuple[str, bool] | None:
        for marker, is_doc in self.line_starts:
            if self._startswith(marker):
                return marker, is_doc
        return None

    def _match_block_open(self) -> tuple[str, str] | None:
        for open_d, close_d in self.profile.block_delims:
            if self._startswith(open_d):
                return open_d, close_d
        return None

    def _emit(self, start: tuple[int, int, int], kind: CommentKind,
              full_line: bool, line_based: bool) -> None:
        spos, sline, scol = start
        raw = self.text[spos:self.pos]
        self.out.append(SourceComment(
            file_path=self.file_path,
            line_start=sline,
            line_end=self.line,
            col_start=scol,
            col_end=self.col,
            kind=kind,
            raw_text=raw,
            normalized_text="",  # filled in by extract_comments
            content_hash=0,
            full_line=full_line,
            line_based=line_based,
        ))

    def _lex_line_comment(self, marker: str, is_doc: bool) -> None:
        start = (self.pos, self.line, self.col)
        full_line = self._only_ws_before()
        while self.pos < len(self.text) and self.text[self.pos] != "\n":
            self._advance()
        kind = CommentKind.DOC_BLOCK if is_doc else CommentKind.INLINE
        self._emit(start, kind, full_line, line_based=True)

    def _lex_block_comment(self, open_d: str, close_d: str) -> None:
        start = (self.pos, self.line, self.col)
        full_line = self._only_ws_before()
        prefix = self.profile.doc_block_prefix
        self._advance(len(open_d))
        end = self.text.find(close_d, self.pos)
        if end < 0:
            # Unterminated: extend to end of file, always plain BLOCK.
            while self.pos < len(self.text):
                self._advance()
            self._emit(start, CommentKind.BLOCK, full_line, line_based=False)
            return
        while self.pos < end:
            self._advance()
        self._advance(len(close_d))
        raw = self.text[start[0]:self.pos]
        is_doc = (bool(prefix) and raw.startswith(prefix)
                  and len(raw) >= len(prefix) + len(close_d))
        kind = CommentKind.DOC_BLOCK if is_doc else CommentKind.BLOCK
        self._emit(start, kind, full_line, line_based=False)

    def _lex_string(self, quote: str) -> None:
        self._advance()  # opening quote
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "\\" and self.pos + 1 < len(text) and text[self.pos + 1] != "\n":
                self._advance(2)
                continue
            if ch == quote:
                self._advance()
                return
            if ch == "\n":
                # Unterminated on this line; plain strings do not span lines.
                return
            self._advance()


def extract_comments(file_text: str | bytes, profile: LanguageProfile,
                     file_path: str) -> list[SourceComment]:
    """Lex file_text into ungrouped comments in document order.

    Bytes input is decoded as UTF-8 with replacement; all spans refer to the
    decoded text.  Comment markers inside string literals are ignored.
    Unterminated block comments run to end of file with kind BLOCK.
    """
    if isinstance(file_text, bytes):
        file_text = file_text.decode("utf-8", errors="replace")
    comments = _Lexer(file_text, profile, file_path).run()
    return [_finish(c, profile) for c in comments]


def _finish(c: SourceComment, profile: LanguageProfile) -> SourceComment:
    normalized = normalize_text(c.raw_text, c.kind, profile)
    return replace(c, normalized_text=normalized,
                   content_hash=content_hash(c.file_path, normalized))


def group_line_comments(comments: list[SourceComment],
                        profile: LanguageProfile) -> list[SourceComment]:
    """Merge runs of line comments from one file, in document order.

    Maximal runs of >= 2 full-line INLINE comments on consecutive lines merge
    into one MULTI_LINE comment; runs of >= 2 full-line doc-line comments
    merge into one DOC_BLOCK.  Everything else passes through unchanged.
    Merged raw_text joins the member raw texts with newlines (the indentation
    between members is not retained).
    """
    out: list[SourceComment] = []
    run: list[SourceComment] = []

    def mergeable(c: SourceComment) -> bool:
        return (c.line_based and c.full_line
                and c.kind in (CommentKind.INLINE, CommentKind.DOC_BLOCK))

    def flush() -> None:
        if not run:
            return
        if len(run) == 1:
            out.append(run[0])
        else:
            first, last = run[0], run[-1]
            kind = (CommentKind.MULTI_LINE if first.kind is CommentKind.INLINE
                    else CommentKind.DOC_BLOCK)
            raw = "\n".join(c.raw_text for c in run)
            normalized = normalize_text(raw, kind, profile)
            out.append(SourceComment(
                file_path=first.file_path,
                line_start=first.line_start,
                line_end=last.line_end,
                col_start=first.col_start,
                col_end=last.col_end,
                kind=kind,
                raw_text=raw,
                normalized_text=normalized,
                content_hash=content_hash(first.file_path, normalized),
                full_line=True,
                line_based=True,
            ))
        run.clear()

    for c in comments:
        if mergeable(c):
            if run and (c.kind is run[-1].kind
                        and c.line_start == run[-1].line_end + 1):
                run.append(c)
                continue
            flush()
            run.append(c)
        else:
            flush()
            out.append(c)
    flush()
    return out


def normalize_text(raw_text: str, kind: CommentKind,
                   profile: LanguageProfile) -> str:
    """Strip delimiters, markers, and '*' gutters; trim; keep inner newlines.

    Applied to a fixpoint so the result is idempotent: normalizing an already
    normalized text changes nothing.
    """
    text = raw_text
    while True:
        cleaned = _normalize_once(text, kind, profile)
        if cleaned == text:
            return cleaned
        text = cleaned


def _normalize_once(text: str, kind: CommentKind,
                    profile: LanguageProfile) -> str:
    block_kind = kind in (CommentKind.BLOCK, CommentKind.DOC_BLOCK)
    if block_kind:
        for open_d, close_d in profile.block_delims:
            if text.startswith(open_d):
                text = text[len(open_d):]
            if text.endswith(close_d):
                text = text[:-len(close_d)]
    line_markers = tuple(sorted(
        profile.doc_line_markers + profile.line_markers, key=len, reverse=True))

    lines = []
    for line in text.split("\n"):
        line = line.strip()
        stripped = False
        for marker in line_markers:
            if line.startswith(marker):
                line = line[len(marker):]
                stripped = True
                break
        if block_kind and not stripped and line.startswith("*"):
            line = line.lstrip("*")
        if line.startswith(" "):
            line = line[1:]
        lines.append(line.rstrip())
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines).strip()


def extract_file_comments(file_text: str | bytes, profile: LanguageProfile,
                          file_path: str) -> list[SourceComment]:
    """Full pipeline: extract, then group line-comment runs."""
    return group_line_comments(
        extract_comments(file_text, profile, file_path), profile)
