//! Holds the `acceptance` test target; run it with `cargo test -p endo-dga-validation --test acceptance`.
