//! The 13-session example dataset used throughout the tests and docs.

use crate::store::TransactionDb;

pub const TABLE1: [&[&str]; 13] = [
    &["b", "h", "e", "p", "v", "d", "g"],
    &["m", "h", "n", "d", "b", "e"],
    &["l", "f", "o", "h", "e", "c", "p"],
    &["a", "w", "e", "k", "h", "j"],
    &["d", "b", "e", "h", "n"],
    &["a", "r", "n", "u", "i", "b", "s"],
    &["b", "g", "h", "d", "e", "p"],
    &["a", "i", "b"],
    &["f", "e", "i", "c", "h", "p"],
    &["h", "a", "e", "b", "r", "t"],
    &["r", "e", "h", "b", "a"],
    &["z", "i", "a", "n", "r", "b"],
    &["b", "d", "h", "p", "e"],
];

pub fn table1() -> TransactionDb {
    TransactionDb::from_keyed(&TABLE1)
}
