//! Real algebraic links from products f = p_{a,k} q of mixed polynomials.
//!
//! Pipeline: braid word -> Fourier parametrization -> semiholomorphic family
//! g_a -> rescaled mixed polynomial p_{a,k} -> product with a holomorphic q ->
//! radial Newton boundary and a strong non-degeneracy certificate -> sampled
//! link.

pub mod braid;
pub mod braidfamily;
pub mod coeff;
pub mod roots;
pub mod tolerances;
pub mod trigcurve;
pub mod mixedpoly;
pub mod newton;
pub mod nondeg;
pub mod realize;
