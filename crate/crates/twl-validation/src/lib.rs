//! Holds the `acceptance` test target; run it with
//! `cargo test -p twl-validation --test acceptance`.
