//! Command-line entry points. (Placeholder during bring-up.)
