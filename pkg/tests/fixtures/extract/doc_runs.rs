/// run a first
/// run a second

/// lonely doc
pub fn a() {}

//// four slashes edge
pub fn b() {}

let x = 1; /// doc after code stays alone
