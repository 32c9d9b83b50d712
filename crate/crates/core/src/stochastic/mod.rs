//! Finite probability spaces with `K`-valued probabilities, random variables
//! with exact cyclotomic values, and elementary orthogonal stochastic
//! measures built from independent signs.

mod orthogonal;
mod variable;

pub use orthogonal::{
    invert_weighted, isometry_identity_check, kernel_integrals, stochastic_fubini, verify_m_conditions,
    verify_m_conditions_with, weighted_integral_identity, weighted_measure, ConditionReport, IdentityCheck, MReport,
    OrthStochMeasure, Weighted,
};
pub use variable::{Factor, FiniteProbSpace, RandomVariable};
