//! Verification instruments: Korn constants, trace audits, and weak
//! convergence demonstrations.

pub mod korn;
pub mod oscillation;
pub mod traces;

pub use korn::{
    gradient_ratio, gradient_ratio_sup, isomorphism_constant, korn_ratios, korn_ratios_with, korn_sides,
    Estimate, KornRatios, RITZ_TOL,
};
pub use oscillation::{
    decay_exponent, div_curl_demo, doubling_schedule, oscillation_demo, OscillationRecord, Profile,
    ScalarSamples, TestFunction,
};
pub use traces::{
    interface_join_h1, interface_join_hdiv, trace_audit_h1, trace_audit_hdiv, HalfCell, HalfSymField,
    HalfVecField, TraceReport, UnwrappedVecField,
};
