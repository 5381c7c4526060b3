//! Special functions used by the potential formulas.

pub mod gamma;
pub mod hypergeometric;

pub use gamma::{digamma, gamma, is_nonpositive_integer, ln_gamma, pochhammer, rgamma, unit_sphere_area};
pub use hypergeometric::{
    hyp2f1, hyp2f1_a_derivative_at_zero, hyp2f1_at_one, hyp2f1_closed, hyp2f1_deriv, hyp2f1_zw,
    hyp3f2, Hyp2F1Input,
};
