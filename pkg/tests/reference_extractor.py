"""Brute-force reference comment extractor used as the test oracle.

Implemented independently of debtviz.extractor: processes the file line by
line with an explicit state record, computing byte columns from encoded line
prefixes.  Deliberately unoptimized; correctness over speed.
"""

from dataclasses import dataclass


@dataclass
class RefComment:
    line_start: int
    col_start: int
    line_end: int
    col_end: int
    kind: str  # INLINE | BLOCK | DOC_BLOCK (ungrouped, so never MULTI_LINE)
    raw_text: str
    full_line: bool
    line_based: bool


def _bytecol(line: str, char_index: int) -> int:
    return len(line[:char_index].encode("utf-8"))


def _classify_block(raw: str, close_d: str, prefix: str) -> str:
    if prefix and raw.startswith(prefix) and len(raw) >= len(prefix) + len(close_d):
        return "DOC_BLOCK"
    return "BLOCK"


def reference_extract(text: str, profile) -> list[RefComment]:
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    lines = text.split("\n")
    out: list[RefComment] = []

    line_markers = sorted(
        [(m, "DOC_BLOCK") for m in profile.doc_line_markers]
        + [(m, "INLINE") for m in profile.line_markers],
        key=lambda t: len(t[0]),
        reverse=True,
    )
    block_pairs = list(profile.block_delims)
    quotes = set(profile.string_delims)
    prefix = profile.doc_block_prefix

    in_block = False
    block_close = ""
    block_start = (0, 0)  # (line index, char index)
    block_parts: list[str] = []

    for li, line in enumerate(lines):
        i = 0
        in_string = False
        quote = ""

        if in_block:
            j = line.find(block_close)
            if j < 0:
                block_parts.append(line)
                continue
            block_parts.append(line[:j + len(block_close)])
            raw = "\n".join(block_parts)
            sline, schar = block_start
            out.append(RefComment(
                line_start=sline + 1,
                col_start=_bytecol(lines[sline], schar),
                line_end=li + 1,
                col_end=_bytecol(line, j + len(block_close)),
                kind=_classify_block(raw, block_close, prefix),
                raw_text=raw,
                full_line=lines[sline][:schar].strip() == "",
                line_based=False,
            ))
            in_block = False
            block_parts = []
            i = j + len(block_close)

        while i < len(line):
            if in_string:
                ch = line[i]
                if ch == "\\":
                    i += 2
                    continue
                if ch == quote:
                    in_string = False
                i += 1
                continue
            matched_marker = None
            for marker, kind in line_markers:
                if line.startswith(marker, i):
                    matched_marker = kind
                    break
            if matched_marker is not None:
                out.append(RefComment(
                    line_start=li + 1,
                    col_start=_bytecol(line, i),
                    line_end=li + 1,
                    col_end=_bytecol(line, len(line)),
                    kind=matched_marker,
                    raw_text=line[i:],
                    full_line=line[:i].strip() == "",
                    line_based=True,
                ))
                i = len(line)
                break
            matched_block = None
            for open_d, close_d in block_pairs:
                if line.startswith(open_d, i):
                    matched_block = (open_d, close_d)
                    break
            if matched_block is not None:
                open_d, close_d = matched_block
                j = line.find(close_d, i + len(open_d))
                if j >= 0:
                    raw = line[i:j + len(close_d)]
                    out.append(RefComment(
                        line_start=li + 1,
                        col_start=_bytecol(line, i),
                        line_end=li + 1,
                        col_end=_bytecol(line, j + len(close_d)),
                        kind=_classify_block(raw, close_d, prefix),
                        raw_text=raw,
                        full_line=line[:i].strip() == "",
                        line_based=False,
                    ))
                    i = j + len(close_d)
                    continue
                in_block = True
                block_close = close_d
                block_start = (li, i)
                block_parts = [line[i:]]
                i = len(line)
                break
            ch = line[i]
            if ch in quotes:
                in_string = True
                quote = ch
            i += 1

    if in_block:
        # Unterminated block: runs to end of file, forced BLOCK kind.
        sline, schar = block_start
        out.append(RefComment(
            line_start=sline + 1,
            col_start=_bytecol(lines[sline], schar),
            line_end=len(lines),
            col_end=_bytecol(lines[-1], len(lines[-1])),
            kind="BLOCK",
            raw_text="\n".join(block_parts),
            full_line=lines[sline][:schar].strip() == "",
            line_based=False,
        ))
    return out
