//! Closed-form scalar functions of a discrete prior: Gaussian helpers, the
//! response functions `D`, `F`, `G`, the Rayleigh functions and their
//! sparse (`eps -> 0`) limits.

pub mod limits;
pub mod normal;
pub mod response;

pub use limits::{f0, g0, overlap_rec0, overlap_sym0, rayleigh_rec0, rayleigh_sym0, s0, t0};
pub use normal::{
    b_small, cap_b, cap_k, positive_part_mean, std_normal_cdf, std_normal_pdf, std_normal_sf,
};
pub use response::{
    dee, eff, eff_eps_closed, evaluate, gee, rayleigh_rec, rayleigh_sym, ResponseEval,
};
