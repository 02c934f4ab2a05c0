//! C ABI surface for the admd library. Placeholder.
