//! Holds the `acceptance` test target, which runs every criterion at its
//! stated tolerance against the shipped experiment configs.
