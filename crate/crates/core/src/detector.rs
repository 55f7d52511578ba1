//! Iterative OAMP/VAMP receiver.
