//! Holds the `acceptance` test target; run it with
//! `cargo test -p tavis-validation --test acceptance`.
