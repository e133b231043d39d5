//! Special functions needed by the closed-form distributions.

pub mod bessel;
pub mod gamma;
pub mod incgamma;
pub mod meijer;
pub mod mellin;

pub use bessel::{bessel_i_neg_half, bessel_k0, bessel_k1, ln_bessel_k0, ln_bessel_k1, log_exp_bessel};
pub use gamma::{gamma, ln_gamma, ln_gamma_complex};
pub use incgamma::{erfc, gamma_p, gamma_q, normal_cdf};
pub use meijer::{evaluate, ln_meijer_g, meijer_g, Evaluation, MeijerGSpec, Method, Shape};
pub use mellin::{mellin_barnes_detail, mellin_barnes_oracle, MellinBarnes};
