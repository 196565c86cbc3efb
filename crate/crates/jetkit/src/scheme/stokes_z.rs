//! (Placeholder during bring-up.)
