//! Support-size testing of distributions over bitstrings with bit-query access.

pub mod bitdist;
pub mod oracle;
pub mod witness;
pub mod fishing;
pub mod testers;
pub mod adversary;
pub mod probbounds;
