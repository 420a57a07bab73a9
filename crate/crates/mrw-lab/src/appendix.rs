//! Appendix identity checks (in progress).
