//! Holds the `acceptance` test target, which runs after every `dslab` target
//! in a workspace test run. See `tests/acceptance.rs`.
