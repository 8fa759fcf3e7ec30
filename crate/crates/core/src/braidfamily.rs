//! The semiholomorphic family g_a(u, t) = prod (u - a(F_C + iG_C)) over all
//! strands, its constant-term map psi0, critical values v_j(t), and the
//! argument-derivative profiles that bound the admissible v-order n'.
//!
//! g_a is expanded symbolically. For a component with s_C strands and
//! h = F_C + iG_C, the power sums of its strand roots are
//! p_m(t) = s_C * sum_{s_C | L} [h^m]_L e^{i L t / s_C}, and Newton's identities
//! turn them into the component's elementary symmetric functions.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{fmt_q, Coeff, Mode, Q};
use crate::roots::{self, RootError};
use crate::tolerances;
use crate::trigcurve::{StrandParametrization, TrigPolynomial};

#[derive(Clone, Debug, PartialEq)]
pub struct SemiholoFamily {
    pub s: usize,
    /// coeffs[j] is the coefficient of u^j; coeffs[s] is the constant 1.
    pub coeffs: Vec<TrigPolynomial>,
    pub a: Q,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("family must have degree at least 1")]
    Empty,
    #[error("family is not monic in u")]
    NotMonic,
    #[error("critical values need s >= 2")]
    NoCriticalValues,
    #[error("critical point root finder failed at t = {t}: {source}")]
    Roots { t: f64, source: RootError },
    #[error("critical root residual {residual:e} at t = {t} exceeds tolerance")]
    Residual { t: f64, residual: f64 },
    #[error("critical value branches collide near t = {t}")]
    BranchCollision { t: f64 },
    #[error("profile is invalid: branch {branch} vanishes at t = {zeros:?}")]
    InvalidProfile { branch: usize, zeros: Vec<f64> },
    #[error("grid size {0} below the minimum")]
    GridTooSmall(usize),
}

fn poly_mul(a: &[TrigPolynomial], b: &[TrigPolynomial]) -> Vec<TrigPolynomial> {
    let mut out = vec![TrigPolynomial::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Coefficients (low to high in u) of prod_j (u - h((t + 2 pi j)/s_c)).
fn component_factor(h: &TrigPolynomial, s_c: usize) -> Vec<TrigPolynomial> {
    let sc = s_c as i64;
    let mut power = TrigPolynomial::constant(Coeff::one());
    let mut p = Vec::with_capacity(s_c + 1);
    p.push(TrigPolynomial::zero());
    for _ in 1..=s_c {
        power = power.mul(h);
        p.push(TrigPolynomial::from_terms(
            power
                .coeffs
                .iter()
                .filter(|(l, _)| *l % sc == 0)
                .map(|(l, c)| (l / sc, c.scale_q(&Q::from_integer(sc.into())))),
        ));
    }
    // k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
    let mut e = vec![TrigPolynomial::constant(Coeff::one())];
    for k in 1..=s_c {
        let mut acc = TrigPolynomial::zero();
        for i in 1..=k {
            let term = e[k - i].mul(&p[i]);
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.add(&term.scale(&Coeff::from_int(-1))) };
        }
        e.push(acc.scale(&Coeff::real(Q::new(1.into(), (k as i64).into()))));
    }
    // prod (u - r_j) = sum_k (-1)^k e_k u^{s_c - k}
    (0..=s_c)
        .map(|j| {
            let k = s_c - j;
            if k.is_multiple_of(2) {
                e[k].clone()
            } else {
                e[k].scale(&Coeff::from_int(-1))
            }
        })
        .collect()
}

pub fn build_ga(sp: &StrandParametrization, a: &Q) -> Result<SemiholoFamily, FamilyError> {
    if sp.components.is_empty() {
        return Err(FamilyError::Empty);
    }
    let float = sp.mode() == Mode::Float;
    let mut g = vec![TrigPolynomial::constant(Coeff::one())];
    for c in &sp.components {
        g = poly_mul(&g, &component_factor(&c.h(), c.s_c));
    }
    let s = g.len() - 1;
    if float {
        // round-off leaves tiny coefficients where exact arithmetic cancels
        let scale = g.iter().flat_map(|p| p.coeffs.values().map(Coeff::norm)).fold(0.0, f64::max);
        for p in g.iter_mut() {
            p.coeffs.retain(|_, c| c.norm() > tolerances::FLOAT_PRUNE * scale);
        }
    }
    // scale roots by a: coefficient of u^j picks up a^{s-j}
    let mut apow = Q::from_integer(1.into());
    for j in (0..=s).rev() {
        g[j] = g[j].scale(&Coeff::real(apow.clone()));
        apow = &apow * a;
    }
    Ok(SemiholoFamily { s, coeffs: g, a: a.clone() })
}

/// psi0 = (-1)^s times the constant coefficient, i.e. a^s prod (F + iG).
pub fn psi0(fam: &SemiholoFamily) -> TrigPolynomial {
    if fam.s.is_multiple_of(2) {
        fam.coeffs[0].clone()
    } else {
        fam.coeffs[0].scale(&Coeff::from_int(-1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    /// Root of dg/du.
    pub c: Complex64,
    /// Critical value g(c, t).
    pub v: Complex64,
    /// dg/dt at (c, t); equals v'(t) by the envelope identity.
    pub gt: Complex64,
}

impl SemiholoFamily {
    pub fn from_coefficients(coeffs: Vec<TrigPolynomial>, a: Q) -> Result<Self, FamilyError> {
        let s = coeffs.len().checked_sub(1).filter(|&s| s >= 1).ok_or(FamilyError::Empty)?;
        if coeffs[s] != TrigPolynomial::constant(Coeff::one()) {
            return Err(FamilyError::NotMonic);
        }
        Ok(SemiholoFamily { s, coeffs, a })
    }

    pub fn mode(&self) -> Mode {
        if self.coeffs.iter().all(|c| c.mode() == Mode::Exact) {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    pub fn coeff_values(&self, t: f64) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.eval(t)).collect()
    }

    pub fn eval(&self, u: Complex64, t: f64) -> Complex64 {
        roots::horner(&self.coeff_values(t), u).0
    }

    pub fn derivative_t(&self) -> Vec<TrigPolynomial> {
        self.coeffs.iter().map(TrigPolynomial::derivative).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s,
            "a": fmt_q(&self.a),
            "mode": self.mode(),
            "coefficients": self.coeffs.iter().map(TrigPolynomial::to_json).collect::<Vec<_>>(),
        })
    }
}

fn critical_points_from(
    vals: &[Complex64],
    dvals: &[Complex64],
    t: f64,
) -> Result<Vec<CriticalPoint>, FamilyError> {
    let s = vals.len() - 1;
    let du: Vec<Complex64> = (1..=s).map(|j| vals[j] * j as f64).collect();
    let cs = roots::roots(&du).map_err(|source| FamilyError::Roots { t, source })?;
    cs.into_iter()
        .map(|c| {
            let (g, dg) = roots::horner(vals, c);
            let bound = 1e-10 * (1.0 + c.norm()).powi(s as i32 - 1)
                * du.iter().map(|x| x.norm()).fold(1.0, f64::max);
            if dg.norm() > bound {
                return Err(FamilyError::Residual { t, residual: dg.norm() });
            }
            Ok(CriticalPoint { c, v: g, gt: roots::horner(dvals, c).0 })
        })
        .collect()
}

pub fn critical_values_at(fam: &SemiholoFamily, t: f64) -> Result<Vec<CriticalPoint>, FamilyError> {
    if fam.s < 2 {
        return Err(FamilyError::NoCriticalValues);
    }
    let dt = fam.derivative_t();
    let dvals: Vec<Complex64> = dt.iter().map(|c| c.eval(t)).collect();
    critical_points_from(&fam.coeff_values(t), &dvals, t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    /// 0 is psi0; j >= 1 are critical values.
    pub index: usize,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    #[serde(skip)]
    pub d: Vec<f64>,
    pub min_d: f64,
    pub max_d: f64,
    /// Minimum of |value| over the grid, and where it occurs.
    pub floor: f64,
    pub floor_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Validity {
    Valid,
    Invalid { branch: usize, zeros: Vec<f64>, floor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub grid_size: usize,
    pub ranges: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArgDerivativeProfile {
    pub grid_size: usize,
    #[serde(skip)]
    pub grid: Vec<f64>,
    pub branches: Vec<Branch>,
    pub validity: Validity,
    pub refinements: Vec<Refinement>,
}

impl ArgDerivativeProfile {
    pub fn is_valid(&self) -> bool {
        self.validity == Validity::Valid
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "branch", "re_v", "im_v", "D"])?;
        for b in &self.branches {
            for (k, &t) in self.grid.iter().enumerate() {
                out.write_record(&[
                    format!("{t:.12}"),
                    b.index.to_string(),
                    format!("{:.15e}", b.values[k].re),
                    format!("{:.15e}", b.values[k].im),
                    format!("{:.15e}", b.d[k]),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn make_branch(index: usize, grid: &[f64], values: Vec<Complex64>, d: Vec<f64>) -> Branch {
    let (mut floor, mut floor_t) = (f64::INFINITY, 0.0);
    for (k, v) in values.iter().enumerate() {
        if v.norm() < floor {
            floor = v.norm();
            floor_t = grid[k];
        }
    }
    Branch {
        index,
        min_d: d.iter().copied().fold(f64::INFINITY, f64::min),
        max_d: d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        values,
        d,
        floor,
        floor_t,
    }
}

/// Golden-section minimization of `f` on [lo, hi].
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Zeros of a branch: grid local minima of |value| refined by golden section,
/// kept when the refined modulus is below the floor tolerance.
fn locate_zeros(grid: &[f64], mags: &[f64], modulus: impl Fn(f64) -> f64 + Sync, tol: f64) -> Vec<f64> {
    let n = grid.len();
    let h = 2.0 * PI / n as f64;
    let mut zeros: Vec<f64> = (0..n)
        .into_par_iter()
        .filter(|&k| mags[k] <= mags[(k + n - 1) % n] && mags[k] <= mags[(k + 1) % n])
        .filter_map(|k| {
            let (t, m) = golden_min(&modulus, grid[k] - h, grid[k] + h);
            (m <= tol).then(|| t.rem_euclid(2.0 * PI))
        })
        .collect();
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|a, b| (*a - *b).abs() < h);
    zeros
}

fn profile_at(fam: &SemiholoFamily, n: usize) -> Result<ArgDerivativeProfile, FamilyError> {
    let grid: Vec<f64> = (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect();
    let p0 = psi0(fam);
    let dp0 = p0.derivative();
    let vals: Vec<Complex64> = grid.par_iter().map(|&t| p0.eval(t)).collect();
    let d0: Vec<f64> = grid
        .par_iter()
        .zip(&vals)
        .map(|(&t, v)| (dp0.eval(t) / v).im)
        .collect();
    let b0 = make_branch(0, &grid, vals, d0);
    let scale0 = b0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol0 = tolerances::MAGNITUDE_FLOOR * scale0;
    if b0.floor <= tol0 {
        let mags: Vec<f64> = b0.values.iter().map(|v| v.norm()).collect();
        let zeros = locate_zeros(&grid, &mags, |t| p0.eval(t).norm(), tol0);
        let floor = b0.floor;
        return Ok(ArgDerivativeProfile {
            grid_size: n,
            grid,
            branches: vec![b0],
            validity: Validity::Invalid { branch: 0, zeros, floor },
            refinements: vec![],
        });
    }
    let mut branches = vec![b0];
    let mut validity = Validity::Valid;
    if fam.s >= 2 {
        let dt = fam.derivative_t();
        let columns: Vec<Vec<CriticalPoint>> = grid
            .par_iter()
            .map(|&t| {
                let vals = fam.coeff_values(t);
                let dvals: Vec<Complex64> = dt.iter().map(|c| c.eval(t)).collect();
                critical_points_from(&vals, &dvals, t)
            })
            .collect::<Result<_, _>>()?;
        let nb = fam.s - 1;
        let mut tracked: Vec<Vec<CriticalPoint>> = Vec::with_capacity(n);
        for (k, col) in columns.into_iter().enumerate() {
            let scale = col.iter().map(|p| p.v.norm()).fold(0.0, f64::max);
            for i in 0..nb {
                for j in i + 1..nb {
                    if (col[i].v - col[j].v).norm() <= tolerances::BRANCH_COLLISION * scale {
                        return Err(FamilyError::BranchCollision { t: grid[k] });
                    }
                }
            }
            let next = match tracked.last() {
                None => col,
                Some(prev) => {
                    let cost: Vec<Vec<f64>> = prev
                        .iter()
                        .map(|a| col.iter().map(|b| (a.v - b.v).norm()).collect())
                        .collect();
                    roots::min_cost_matching(&cost).into_iter().map(|j| col[j].clone()).collect()
                }
            };
            tracked.push(next);
        }
        for j in 0..nb {
            let values: Vec<Complex64> = tracked.iter().map(|c| c[j].v).collect();
            let d: Vec<f64> = tracked.iter().map(|c| (c[j].gt / c[j].v).im).collect();
            branches.push(make_branch(j + 1, &grid, values, d));
        }
        let scale = branches[1..]
            .iter()
            .flat_map(|b| b.values.iter().map(|v| v.norm()))
            .fold(0.0, f64::max);
        let tol = tolerances::MAGNITUDE_FLOOR * scale;
        if let Some(b) = branches[1..].iter().find(|b| b.floor <= tol) {
            let mags: Vec<f64> = (0..n)
                .map(|k| branches[1..].iter().map(|b| b.values[k].norm()).fold(f64::INFINITY, f64::min))
                .collect();
            let modulus = |t: f64| {
                critical_values_at(fam, t)
                    .map(|cs| cs.iter().map(|p| p.v.norm()).fold(f64::INFINITY, f64::min))
                    .unwrap_or(0.0)
            };
            let zeros = locate_zeros(&grid, &mags, modulus, tol);
            validity = Validity::Invalid { branch: b.index, zeros, floor: b.floor };
        }
    }
    Ok(ArgDerivativeProfile { grid_size: n, grid, branches, validity, refinements: vec![] })
}

pub fn arg_profile(fam: &SemiholoFamily, grid_size: usize) -> Result<ArgDerivativeProfile, FamilyError> {
    if grid_size < 1024 {
        return Err(FamilyError::GridTooSmall(grid_size));
    }
    let ranges = |p: &ArgDerivativeProfile| p.branches.iter().map(|b| (b.min_d, b.max_d)).collect::<Vec<_>>();
    let mut n = grid_size;
    let mut collided = false;
    let mut current = loop {
        match profile_at(fam, n) {
            Ok(p) => break p,
            Err(FamilyError::BranchCollision { .. }) if !collided => {
                collided = true;
                n *= 2;
            }
            Err(e) => return Err(e),
        }
    };
    let mut history = vec![Refinement { grid_size: n, ranges: ranges(&current) }];
    if current.is_valid() {
        for _ in 0..tolerances::PROFILE_MAX_REFINEMENTS {
            let finer = profile_at(fam, n * 2)?;
            let (old, new) = (ranges(&current), ranges(&finer));
            history.push(Refinement { grid_size: n * 2, ranges: new.clone() });
            let stable = old.iter().zip(&new).all(|(a, b)| {
                let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1.0);
                rel(a.0, b.0) <= tolerances::PROFILE_STABLE_REL && rel(a.1, b.1) <= tolerances::PROFILE_STABLE_REL
            });
            current = finer;
            n *= 2;
            if stable || !current.is_valid() {
                break;
            }
        }
    }
    current.refinements = history;
    Ok(current)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleBound {
    pub n_prime: u32,
    /// Per-branch ñ_j, branch 0 first.
    pub per_branch: Vec<u32>,
    pub margin: f64,
}

/// Smallest positive integer n with n > max(-D) + margin.
pub fn n_tilde(max_neg_d: f64, margin: f64) -> u32 {
    let x = max_neg_d + margin;
    if x < 1.0 {
        1
    } else {
        x.floor() as u32 + 1
    }
}

pub fn min_admissible_nm(profile: &ArgDerivativeProfile) -> Result<AdmissibleBound, FamilyError> {
    min_admissible_nm_with(profile, tolerances::CERT_MARGIN)
}

pub fn min_admissible_nm_with(profile: &ArgDerivativeProfile, margin: f64) -> Result<AdmissibleBound, FamilyError> {
    if let Validity::Invalid { branch, zeros, .. } = &profile.validity {
        return Err(FamilyError::InvalidProfile { branch: *branch, zeros: zeros.clone() });
    }
    let per_branch: Vec<u32> = profile.branches.iter().map(|b| n_tilde(-b.min_d, margin)).collect();
    Ok(AdmissibleBound { n_prime: per_branch.iter().copied().max().unwrap_or(1), per_branch, margin })
}

/// Family built directly from the coefficients displayed for the figure-eight
/// weak realization: u^3 + (3/4)a^2(e^{2it} - e^{-2it})u
/// - (1/8)a^3(4e^{2it} + 4e^{-2it} + e^{4it} - e^{-4it}).
pub fn figure_eight_family(a: &Q) -> SemiholoFamily {
    use crate::coeff::q;
    let a2 = Coeff::real(a * a);
    let a3 = Coeff::real(a * a * a);
    let u1 = TrigPolynomial::from_terms([(2, Coeff::real(q(3, 4))), (-2, Coeff::real(q(-3, 4)))]).scale(&a2);
    let u0 = TrigPolynomial::from_terms([
        (2, Coeff::real(q(-1, 2))),
        (-2, Coeff::real(q(-1, 2))),
        (4, Coeff::real(q(-1, 8))),
        (-4, Coeff::real(q(1, 8))),
    ])
    .scale(&a3);
    SemiholoFamily {
        s: 3,
        coeffs: vec![u0, u1, TrigPolynomial::zero(), TrigPolynomial::constant(Coeff::one())],
        a: a.clone(),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::coeff::q;
    use crate::trigcurve::ComponentCurve;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};

    pub fn five_two_sq() -> StrandParametrization {
        StrandParametrization {
            components: vec![ComponentCurve {
                s_c: 3,
                f: TrigPolynomial::cos(4, q(1, 1)).add(&TrigPolynomial::sin(10, q(3, 4))),
                g: TrigPolynomial::sin(8, q(-1, 1)).add(&TrigPolynomial::cos(2, q(-1, 2))),
            }],
        }
    }

    fn single_strand(f: TrigPolynomial, g: TrigPolynomial) -> StrandParametrization {
        StrandParametrization { components: vec![ComponentCurve { s_c: 1, f, g }] }
    }

    fn cx(re: i64, im: i64, d: i64) -> Coeff {
        Coeff::rational(q(re, d), q(im, d))
    }

    #[test]
    fn one_strand_constant() {
        let sp = single_strand(TrigPolynomial::constant(Coeff::from_int(2)), TrigPolynomial::zero());
        let fam = build_ga(&sp, &q(1, 1)).unwrap();
        assert_eq!(fam.coeffs[0], TrigPolynomial::constant(Coeff::from_int(-2)));
        assert_eq!(fam.coeffs[1], TrigPolynomial::constant(Coeff::one()));
        assert_eq!(psi0(&fam), TrigPolynomial::constant(Coeff::from_int(2)));
    }

    /// Brute-force oracle: multiply out the strand roots numerically.
    fn numeric_coeffs(sp: &StrandParametrization, a: f64, t: f64) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in sp.points(t) {
            let mut next = vec![Complex64::zero(); c.len() + 1];
            for (k, x) in c.iter().enumerate() {
                next[k + 1] += x;
                next[k] -= x * r * a;
            }
            c = next;
        }
        c
    }

    #[test]
    fn exact_expansion_matches_numeric_product() {
        let sp = five_two_sq();
        let fam = build_ga(&sp, &q(1, 2)).unwrap();
        assert_eq!(fam.mode(), Mode::Exact);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..32 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let want = numeric_coeffs(&sp, 0.5, t);
            for (j, w) in want.iter().enumerate() {
                assert!((fam.coeffs[j].eval(t) - w).norm() < 1e-12, "u^{j} at t={t}");
            }
        }
    }

    #[test]
    fn stated_five_two_square_coefficients() {
        // a = 1 isolates the per-power-of-a coefficients
        let fam = build_ga(&five_two_sq(), &q(1, 1)).unwrap();
        let u1 = &fam.coeffs[1];
        assert_eq!(u1.get(0), cx(-15, 0, 64));
        assert_eq!(u1.get(6), cx(0, -9, 16));
        assert_eq!(u1.get(-6), cx(0, -9, 16));
        assert_eq!(u1.get(2), cx(0, 9, 16));
        let u0 = &fam.coeffs[0];
        assert_eq!(u0.get(10), cx(0, -27, 512));
        assert_eq!(u0.get(-10), cx(0, 27, 512));
        let support: Vec<i64> = psi0(&fam).support();
        assert_eq!(support, vec![-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10]);
    }

    /// The sign pattern that reproduces the displayed g_a of the 5_2 square.
    pub fn five_two_sq_display_signs() -> StrandParametrization {
        StrandParametrization {
            components: vec![ComponentCurve {
                s_c: 3,
                f: TrigPolynomial::cos(4, q(1, 1)).add(&TrigPolynomial::sin(10, q(-3, 4))),
                g: TrigPolynomial::sin(8, q(1, 1)).add(&TrigPolynomial::cos(2, q(1, 2))),
            }],
        }
    }

    #[test]
    fn display_sign_pattern_reproduces_every_displayed_coefficient() {
        let fam = build_ga(&five_two_sq_display_signs(), &q(1, 1)).unwrap();
        let u1 = TrigPolynomial::from_terms([
            (0, cx(-15, 0, 64)),
            (-2, cx(0, 9, 16)),
            (2, cx(0, -21, 16)),
            (-4, cx(15, 0, 32)),
            (4, cx(-15, 0, 32)),
            (-6, cx(0, -9, 16)),
            (6, cx(0, -9, 16)),
        ]);
        let u0 = TrigPolynomial::from_terms([
            (-2, cx(0, 53, 128)),
            (2, cx(0, 47, 128)),
            (-4, cx(-85, 0, 128)),
            (4, cx(-43, 0, 128)),
            (-6, cx(0, 51, 256)),
            (0, cx(-3, 0, 8)),
            (6, cx(0, -93, 256)),
            (-8, cx(43, 0, 128)),
            (8, cx(11, 0, 128)),
            (-10, cx(0, -27, 512)),
            (10, cx(0, 27, 512)),
        ]);
        assert_eq!(fam.coeffs[1], u1);
        assert_eq!(fam.coeffs[0], u0);
        assert!(fam.coeffs[2].is_zero());
    }

    #[test]
    fn figure_eight_parametrization_u_coefficient() {
        let sp = StrandParametrization {
            components: vec![ComponentCurve {
                s_c: 3,
                f: TrigPolynomial::cos(2, q(1, 1)),
                g: TrigPolynomial::sin(4, q(-1, 1)),
            }],
        };
        let fam = build_ga(&sp, &q(1, 1)).unwrap();
        let want = TrigPolynomial::from_terms([(2, cx(3, 0, 4)), (-2, cx(-3, 0, 4))]);
        assert_eq!(fam.coeffs[1], want);
        assert_eq!(psi0(&fam).support(), vec![-4, -2, 2, 4]);
    }

    #[test]
    fn figure_eight_psi0_support() {
        let fam = figure_eight_family(&q(1, 2));
        assert_eq!(psi0(&fam).support(), vec![-4, -2, 2, 4]);
        // zero exactly where cos 2t = 0
        for k in 0..4 {
            let t = PI / 4.0 + k as f64 * PI / 2.0;
            assert!(psi0(&fam).eval(t).norm() < 1e-15);
        }
    }

    #[test]
    fn psi0_consistency() {
        let fam = build_ga(&five_two_sq(), &q(1, 2)).unwrap();
        let p = psi0(&fam);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..64 {
            let t = rng.gen_range(0.0..2.0 * PI);
            assert!((p.eval(t) + fam.coeffs[0].eval(t)).norm() < 1e-12);
        }
    }

    fn constant_family(roots_: &[i64]) -> SemiholoFamily {
        let sp = StrandParametrization {
            components: roots_
                .iter()
                .map(|&r| ComponentCurve {
                    s_c: 1,
                    f: TrigPolynomial::constant(Coeff::from_int(r)),
                    g: TrigPolynomial::zero(),
                })
                .collect(),
        };
        build_ga(&sp, &q(1, 1)).unwrap()
    }

    #[test]
    fn critical_values_examples() {
        // u^3 - 3u from coefficients
        let fam = SemiholoFamily::from_coefficients(
            vec![
                TrigPolynomial::zero(),
                TrigPolynomial::constant(Coeff::from_int(-3)),
                TrigPolynomial::zero(),
                TrigPolynomial::constant(Coeff::one()),
            ],
            q(1, 1),
        )
        .unwrap();
        let mut cv = critical_values_at(&fam, 0.7).unwrap();
        cv.sort_by(|a, b| a.c.re.total_cmp(&b.c.re));
        assert!((cv[0].c - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((cv[0].v - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((cv[1].v - Complex64::new(-2.0, 0.0)).norm() < 1e-12);

        let fam = constant_family(&[1, 2, 3]);
        let mut cv = critical_values_at(&fam, 0.0).unwrap();
        cv.sort_by(|a, b| a.c.re.total_cmp(&b.c.re));
        let g = |x: f64| (x - 1.0) * (x - 2.0) * (x - 3.0);
        let r = [(6.0 - 3f64.sqrt()) / 3.0, (6.0 + 3f64.sqrt()) / 3.0];
        for (p, &x) in cv.iter().zip(&r) {
            assert!((p.c.re - x).abs() < 1e-12);
            assert!((p.v.re - g(x)).abs() < 1e-12);
            let dg = 3.0 * p.c * p.c - 12.0 * p.c + 11.0;
            assert!(dg.norm() < 1e-10);
        }
    }

    #[test]
    fn figure_eight_critical_values_at_zero_bracketed() {
        // at t = 0 the family is u^3 - a^3, so g' = 3u^2 has the double root 0
        let fam = figure_eight_family(&q(1, 1));
        let vals = fam.coeff_values(0.0);
        assert!(vals[1].norm() < 1e-15);
        let cv = critical_values_at(&fam, 0.0).unwrap();
        // bracket: on a fine real grid the minimum of |g'| sits at u = 0
        let best = (-1000..=1000)
            .map(|i| i as f64 / 1000.0)
            .min_by(|x, y| (3.0 * x * x).total_cmp(&(3.0 * y * y)))
            .unwrap();
        for p in cv {
            assert!((p.c.re - best).abs() < 1e-6 && p.c.im.abs() < 1e-6);
            assert!((p.v - fam.eval(Complex64::new(best, 0.0), 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn rotation_profile() {
        let sp = single_strand(TrigPolynomial::cos(2, q(1, 1)), TrigPolynomial::sin(2, q(1, 1)));
        let fam = build_ga(&sp, &q(1, 1)).unwrap();
        let prof = arg_profile(&fam, 1024).unwrap();
        assert!(prof.is_valid());
        assert!(prof.branches[0].d.iter().all(|d| (d - 2.0).abs() < 1e-12));
        assert_eq!(min_admissible_nm(&prof).unwrap().n_prime, 1);
    }

    #[test]
    fn n_tilde_arithmetic() {
        assert_eq!(n_tilde(13.2, 0.2), 14);
        assert_eq!(n_tilde(13.2, 1e-3), 14);
        assert_eq!(n_tilde(-2.0, 1e-3), 1);
        assert_eq!(n_tilde(6.0, 0.0), 7);
    }

    #[test]
    fn figure_eight_profile_is_invalid() {
        let prof = arg_profile(&figure_eight_family(&q(1, 2)), 4096).unwrap();
        match &prof.validity {
            Validity::Invalid { branch, zeros, .. } => {
                assert_eq!(*branch, 0);
                assert_eq!(zeros.len(), 4);
                for (z, k) in zeros.iter().zip(0..) {
                    assert!((z - (PI / 4.0 + k as f64 * PI / 2.0)).abs() < 1e-6);
                }
            }
            Validity::Valid => panic!("expected invalid"),
        }
        assert!(min_admissible_nm(&prof).is_err());
    }

    #[test]
    fn five_two_square_profile_bound() {
        let fam = build_ga(&five_two_sq(), &q(1, 2)).unwrap();
        let prof = arg_profile(&fam, 4096).unwrap();
        assert!(prof.is_valid());
        let bound = min_admissible_nm(&prof).unwrap();
        assert!(bound.n_prime <= 14, "{bound:?}");
    }

    #[test]
    fn a_invariance() {
        let p1 = arg_profile(&build_ga(&five_two_sq(), &q(1, 2)).unwrap(), 1024).unwrap();
        let p2 = arg_profile(&build_ga(&five_two_sq(), &q(1, 4)).unwrap(), 1024).unwrap();
        for (b1, b2) in p1.branches.iter().zip(&p2.branches) {
            assert!((b1.min_d - b2.min_d).abs() < 1e-9);
            assert!((b1.max_d - b2.max_d).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_identity() {
        let fam = build_ga(&five_two_sq(), &q(1, 2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..20 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let mid = critical_values_at(&fam, t).unwrap();
            let plus = roots::track(
                &mid.iter().map(|p| p.v).collect::<Vec<_>>(),
                &critical_values_at(&fam, t + h).unwrap().iter().map(|p| p.v).collect::<Vec<_>>(),
            );
            let minus = roots::track(
                &mid.iter().map(|p| p.v).collect::<Vec<_>>(),
                &critical_values_at(&fam, t - h).unwrap().iter().map(|p| p.v).collect::<Vec<_>>(),
            );
            for (j, p) in mid.iter().enumerate() {
                let fd = (plus[j] - minus[j]) / (2.0 * h);
                assert!((fd - p.gt).norm() <= 1e-6 * p.gt.norm().max(1e-3), "fd {fd} vs {}", p.gt);
            }
        }
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let sp = single_strand(TrigPolynomial::cos(2, q(1, 1)), TrigPolynomial::sin(2, q(1, 1)));
        let prof = arg_profile(&build_ga(&sp, &q(1, 1)).unwrap(), 1024).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,branch,re_v,im_v,D\n"));
        assert_eq!(text.lines().count(), 1 + prof.grid.len());
    }
}
