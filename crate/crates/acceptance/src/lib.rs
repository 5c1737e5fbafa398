//! Holds the `acceptance` test target, which runs the end-to-end criteria
//! against the `dzt-otfs` library and CLI and prints one line per criterion.
