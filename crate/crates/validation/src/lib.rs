//! Holds the `acceptance` test target; the suite itself is in `tests/acceptance.rs`.
