//! Acceptance harness for the workspace.
//!
//! The package holds no library code; `cargo test -p fqre-reproduction --test acceptance` runs
//! every criterion of `fqre::reproduce` and prints a pass/fail line for each. It lives in its
//! own package so that its verdict is reported after every other suite has run.
