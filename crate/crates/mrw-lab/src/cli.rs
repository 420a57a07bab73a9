//! Experiment runner (in progress).
