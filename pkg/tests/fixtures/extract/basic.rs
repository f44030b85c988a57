//! Inner doc line.

/// Outer doc line one.
/// Outer doc line two.
pub fn f() -> i32 {
    // plain comment
    let s = "string with // inside";
    1 /* tail block */
}

/** Block doc. */
pub struct S;
