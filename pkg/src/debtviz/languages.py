"""Language profiles: the static lexing rules used by the comment extractor.

A profile describes where comments start and end for one language and which
string quoting rules suppress false comment starts.  The registry maps file
extensions to profiles; add a row to PROFILES to support a new language.
"""

from dataclasses import dataclass, field

from .errors import UnsupportedLanguage


@dataclass(frozen=True)
class LanguageProfile:
    name: str
    # Plain line-comment markers, e.g. "//" or "#".
    line_markers: tuple[str, ...] = ()
    # Doc line-comment markers ("///", "//!").  Matched before line_markers.
    doc_line_markers: tuple[str, ...] = ()
    # (open, close) pairs for block comments.
    block_delims: tuple[tuple[str, str], ...] = ()
    # Prefix that upgrades a block comment to a doc block, e.g. "/**".
    doc_block_prefix: str = ""
    # Quote characters that open a string literal.  Escapes use backslash.
    string_delims: tuple[str, ...] = ('"', "'")
    # File extensions served by this profile (with leading dot).
    extensions: tuple[str, ...] = ()


C_FAMILY = LanguageProfile(
    name="c-family",
    line_markers=("//",),
    block_delims=(("/*", "*/"),),
    doc_block_prefix="/**",
    string_delims=('"', "'"),
    extensions=(".c", ".h", ".cpp", ".cc", ".hpp", ".java", ".cs", ".go"),
)

JS_FAMILY = LanguageProfile(
    name="js-family",
    line_markers=("//",),
    block_delims=(("/*", "*/"),),
    doc_block_prefix="/**",
    string_delims=('"', "'", "`"),
    extensions=(".js", ".jsx", ".ts", ".tsx"),
)

HASH_SCRIPTS = LanguageProfile(
    name="hash-scripts",
    line_markers=("#",),
    string_delims=('"', "'"),
    extensions=(".py", ".rb", ".sh", ".pl", ".yaml", ".yml", ".tcl"),
)

RUST = LanguageProfile(
    name="rust",
    line_markers=("//",),
    doc_line_markers=("///", "//!"),
    block_delims=(("/*", "*/"),),
    doc_block_prefix="/**",
    string_delims=('"',),
    extensions=(".rs",),
)

PROFILES: tuple[LanguageProfile, ...] = (C_FAMILY, JS_FAMILY, HASH_SCRIPTS, RUST)

_BY_EXTENSION: dict[str, LanguageProfile] = {
    ext: profile for profile in PROFILES for ext in profile.extensions
}


def supported_extensions() -> frozenset[str]:
    return frozenset(_BY_EXTENSION)


def profile_for_path(path: str) -> LanguageProfile:
    """Look up the profile for a file path by its extension.

    Raises UnsupportedLanguage when no profile claims the extension.
    """
    dot = path.rfind(".")
    ext = path[dot:].lower() if dot >= 0 else ""
    try:
        return _BY_EXTENSION[ext]
    except KeyError:
        raise UnsupportedLanguage(f"no language profile for {path!r}") from None


def has_profile(path: str) -> bool:
    dot = path.rfind(".")
    ext = path[dot:].lower() if dot >= 0 else ""
    return ext in _BY_EXTENSION
