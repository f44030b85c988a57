fn main() {
    let a = "https://rust // not comment";
    let b = "escaped \" quote // still inside";
    // real one
}
