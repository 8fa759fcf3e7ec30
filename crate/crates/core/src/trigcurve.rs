//! Trigonometric polynomials, Fourier parametrizations of braid strands, and
//! the constant shift that keeps every strand away from the origin.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::braid::{cycles, BraidWord};
use crate::coeff::{Coeff, Mode, Q};
use crate::tolerances;

/// Finite Fourier series sum_l c_l e^{ilt}. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPolynomial {
    pub coeffs: BTreeMap<i64, Coeff>,
    /// Set for F_C, G_C: coefficients are Hermitian, c_{-l} = conj(c_l).
    pub real_valued: bool,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(0, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Coeff)>) -> Self {
        let mut p = Self::zero();
        for (l, c) in terms {
            p.add_term(l, c);
        }
        p
    }

    /// cos(l t) scaled by `amp`, as a real-valued polynomial.
    pub fn cos(l: i64, amp: Q) -> Self {
        let half = amp / Q::from_integer(2.into());
        let mut p = Self::from_terms([(l, Coeff::real(half.clone())), (-l, Coeff::real(half))]);
        p.real_valued = true;
        p
    }

    /// sin(l t) scaled by `amp`: (amp/2i)(e^{ilt} - e^{-ilt}).
    pub fn sin(l: i64, amp: Q) -> Self {
        let half = amp / Q::from_integer(2.into());
        let mut p = Self::from_terms([
            (l, Coeff::rational(Q::zero(), -half.clone())),
            (-l, Coeff::rational(Q::zero(), half)),
        ]);
        p.real_valued = true;
        p
    }

    pub fn add_term(&mut self, l: i64, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&l) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.coeffs.remove(&l);
        } else {
            self.coeffs.insert(l, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, l: i64) -> Coeff {
        self.coeffs.get(&l).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn mode(&self) -> Mode {
        if self.coeffs.values().all(Coeff::is_exact) {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn max_abs_freq(&self) -> i64 {
        self.coeffs.keys().map(|l| l.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&l, c)| c.to_c64() * Complex64::from_polar(1.0, l as f64 * t))
            .sum()
    }

    /// d/dt, term by term.
    pub fn derivative(&self) -> Self {
        let mut out = Self::from_terms(self.coeffs.iter().map(|(&l, c)| (l, c.mul_i_int(l))));
        out.real_valued = self.real_valued;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&l, c) in &other.coeffs {
            out.add_term(l, c.clone());
        }
        out.real_valued = self.real_valued && other.real_valued;
        out
    }

    pub fn scale(&self, s: &Coeff) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&l, c)| (l, c * s)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&l1, c1) in &self.coeffs {
            for (&l2, c2) in &other.coeffs {
                out.add_term(l1 + l2, c1 * c2);
            }
        }
        out
    }

    pub fn conj_reflect(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&l, c)| (-l, c.conj())))
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().all(|(&l, c)| {
            let other = self.get(-l).conj();
            if c.is_exact() && other.is_exact() {
                *c == other
            } else {
                (c.to_c64() - other.to_c64()).norm() <= 1e-12 * (1.0 + c.norm())
            }
        })
    }

    /// Drops float coefficients with modulus at most `rel` times the largest one.
    pub fn prune(&mut self, rel: f64) {
        let scale = self.coeffs.values().map(Coeff::norm).fold(0.0, f64::max);
        self.coeffs.retain(|_, c| c.is_exact() || c.norm() > rel * scale);
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|(&l, c)| json!([l, c.part_json(false), c.part_json(true)]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, real_valued: bool) -> Result<Self, String> {
        let arr = v.as_array().ok_or("trig polynomial must be an array of [l, re, im]")?;
        let mut p = Self::zero();
        for entry in arr {
            let e = entry.as_array().filter(|e| e.len() == 3).ok_or("entry must be [l, re, im]")?;
            let l = e[0].as_i64().ok_or("frequency must be an integer")?;
            p.add_term(l, Coeff::from_json_parts(&e[1], &e[2])?);
        }
        p.real_valued = real_valued;
        if real_valued && !p.is_hermitian() {
            return Err("real-valued polynomial is not Hermitian".into());
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentCurve {
    pub s_c: usize,
    pub f: TrigPolynomial,
    pub g: TrigPolynomial,
}

impl ComponentCurve {
    /// F + iG as one Laurent polynomial in e^{i tau}.
    pub fn h(&self) -> TrigPolynomial {
        self.f.add(&self.g.scale(&Coeff::rational(Q::zero(), Q::from_integer(1.into()))))
    }

    /// Strand `j` at braid time t.
    pub fn strand_point(&self, j: usize, t: f64) -> Complex64 {
        let tau = (t + 2.0 * PI * j as f64) / self.s_c as f64;
        let f = self.f.eval(tau);
        let g = self.g.eval(tau);
        Complex64::new(f.re, g.re)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrandParametrization {
    pub components: Vec<ComponentCurve>,
}

impl StrandParametrization {
    pub fn strands(&self) -> usize {
        self.components.iter().map(|c| c.s_c).sum()
    }

    pub fn mode(&self) -> Mode {
        let exact = self
            .components
            .iter()
            .all(|c| c.f.mode() == Mode::Exact && c.g.mode() == Mode::Exact);
        if exact {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    /// All s strand points at time t, component by component.
    pub fn points(&self, t: f64) -> Vec<Complex64> {
        self.components
            .iter()
            .flat_map(|c| (0..c.s_c).map(move |j| c.strand_point(j, t)))
            .collect()
    }

    /// Minimum of |F + iG| over all strands on a uniform grid of `n` times.
    pub fn min_origin_distance(&self, n: usize) -> f64 {
        self.grid_points(n).iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min)
    }

    /// All strand points on a uniform grid of `n` times.
    pub fn grid_points(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .into_par_iter()
            .flat_map_iter(|m| self.points(2.0 * PI * m as f64 / n as f64))
            .collect()
    }

    /// Minimum pairwise strand distance on a uniform grid of `n` times.
    pub fn min_separation(&self, n: usize) -> f64 {
        (0..n)
            .into_par_iter()
            .map(|m| {
                let pts = self.points(2.0 * PI * m as f64 / n as f64);
                let mut best = f64::INFINITY;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        best = best.min((pts[i] - pts[j]).norm());
                    }
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "components": self.components.iter().map(|c| json!({
                "sC": c.s_c,
                "F": c.f.to_json(),
                "G": c.g.to_json(),
            })).collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        let comps = v["components"].as_array().ok_or("missing components array")?;
        let mut components = Vec::new();
        for c in comps {
            let s_c = c["sC"].as_u64().filter(|&s| s >= 1).ok_or("sC must be a positive integer")?;
            components.push(ComponentCurve {
                s_c: s_c as usize,
                f: TrigPolynomial::from_json(&c["F"], true)?,
                g: TrigPolynomial::from_json(&c["G"], true)?,
            });
        }
        if components.is_empty() {
            return Err("parametrization has no components".into());
        }
        Ok(StrandParametrization { components })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("braid word has no crossings to pin the diagram")]
    EmptyWord,
    #[error("crossing offset must be positive")]
    BadOffset,
    #[error("fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("strand curves collide on the validation grid (min distance {min_distance:e} at upsampling {upsampling})")]
    Collision { min_distance: f64, upsampling: usize },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FitReport {
    pub offset: f64,
    pub dwell: [usize; 2],
    pub upsampling: usize,
    pub max_residual: f64,
    pub min_separation: f64,
}

/// Key points of one pass through the word for the strand starting at each
/// position. A letter takes 2w slots (w = dwell[0] for negative, dwell[1]
/// for positive letters); the two strands involved move along a half
/// ellipse at uniform angle, so slot 0 is "before" and slot w is "at" the
/// crossing.
fn key_points(b: &BraidWord, offset: f64, dwell: [usize; 2]) -> Vec<Vec<Complex64>> {
    let s = b.strands;
    let mut pos: Vec<usize> = (0..s).collect(); // pos[strand]
    let mut out = vec![Vec::new(); s];
    for l in &b.letters {
        let left = l.index - 1;
        let w = dwell[(l.sign > 0) as usize];
        let centre = left as f64 + 0.5;
        for strand in 0..s {
            let p = pos[strand];
            for i in 0..2 * w {
                let theta = PI * i as f64 / (2 * w) as f64;
                let pt = if p == left {
                    Complex64::new(centre - 0.5 * theta.cos(), offset * l.sign as f64 * theta.sin())
                } else if p == left + 1 {
                    Complex64::new(centre + 0.5 * theta.cos(), -offset * l.sign as f64 * theta.sin())
                } else {
                    Complex64::new(p as f64, 0.0)
                };
                out[strand].push(pt);
            }
        }
        for p in pos.iter_mut() {
            if *p == left {
                *p = left + 1;
            } else if *p == left + 1 {
                *p = left;
            }
        }
    }
    out
}

/// Exact trigonometric interpolant of real samples at tau_m = 2 pi m / M.
fn interpolate(samples: &[f64]) -> TrigPolynomial {
    let m = samples.len();
    let half = m as i64 / 2;
    let mut p = TrigPolynomial::zero();
    for l in 0..=half {
        let mut acc = Complex64::zero();
        for (idx, &x) in samples.iter().enumerate() {
            acc += x * Complex64::from_polar(1.0, -2.0 * PI * (l as f64) * idx as f64 / m as f64);
        }
        acc /= m as f64;
        if m.is_multiple_of(2) && l == half {
            // Nyquist bin: split evenly so the interpolant stays real
            let c = Complex64::new(acc.re / 2.0, 0.0);
            p.add_term(l, Coeff::Float(c));
            p.add_term(-l, Coeff::Float(c));
        } else if l == 0 {
            p.add_term(0, Coeff::Float(Complex64::new(acc.re, 0.0)));
        } else {
            p.add_term(l, Coeff::Float(acc));
            p.add_term(-l, Coeff::Float(acc.conj()));
        }
    }
    p.prune(tolerances::FLOAT_PRUNE);
    p.real_valued = true;
    p
}

/// Shape of the piecewise path that the fit interpolates.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FitShape {
    /// Half-height of a crossing, in units of the strand spacing.
    pub offset: f64,
    /// Slots per half crossing for negative and positive letters.
    pub dwell: [usize; 2],
}

impl FitShape {
    pub fn plain(offset: f64) -> Self {
        Self { offset, dwell: [1, 1] }
    }

    /// Candidate shapes tried by the realization pipeline. The sign with more
    /// letters gets the longer dwell, which spreads its crossings over more of
    /// the period and keeps the argument derivative of the critical values small.
    /// A fixed offset or dwell pair narrows the scan.
    pub fn candidates(b: &BraidWord, offset: Option<f64>, dwell: Option<[usize; 2]>) -> Vec<Self> {
        let pos = b.letters.iter().filter(|l| l.sign > 0).count();
        let neg = b.letters.len() - pos;
        let offsets = match offset {
            Some(o) => vec![o],
            None => tolerances::FIT_OFFSETS.to_vec(),
        };
        let mut out = Vec::new();
        for &o in &offsets {
            if let Some(dwell) = dwell {
                out.push(Self { offset: o, dwell });
                continue;
            }
            for &(short, long) in tolerances::FIT_DWELLS {
                let dwell = if pos >= neg { [short, long] } else { [long, short] };
                out.push(Self { offset: o, dwell });
            }
        }
        out
    }
}

pub fn fit_parametrization(
    b: &BraidWord,
    crossing_offset: f64,
) -> Result<(StrandParametrization, FitReport), FitError> {
    fit_parametrization_shaped(b, FitShape::plain(crossing_offset))
}

pub fn fit_parametrization_shaped(
    b: &BraidWord,
    shape: FitShape,
) -> Result<(StrandParametrization, FitReport), FitError> {
    if b.letters.is_empty() {
        return Err(FitError::EmptyWord);
    }
    if shape.offset.is_nan() || shape.offset <= 0.0 || shape.dwell.contains(&0) {
        return Err(FitError::BadOffset);
    }
    let keys = key_points(b, shape.offset, shape.dwell);
    let perm = b.permutation0();
    let comps = cycles(&perm);
    let mut last = None;
    let mut k = 1;
    while k <= tolerances::FIT_MAX_UPSAMPLING {
        let mut curves = Vec::new();
        let mut residual: f64 = 0.0;
        for cycle in &comps {
            let path: Vec<Complex64> = cycle.iter().flat_map(|&p| keys[p].iter().copied()).collect();
            let n = path.len();
            let dense: Vec<Complex64> = (0..n * k)
                .map(|i| {
                    let (a, frac) = (i / k, (i % k) as f64 / k as f64);
                    path[a] * (1.0 - frac) + path[(a + 1) % n] * frac
                })
                .collect();
            let f = interpolate(&dense.iter().map(|z| z.re).collect::<Vec<_>>());
            let g = interpolate(&dense.iter().map(|z| z.im).collect::<Vec<_>>());
            for (i, z) in path.iter().enumerate() {
                let tau = 2.0 * PI * i as f64 / n as f64;
                let fit = Complex64::new(f.eval(tau).re, g.eval(tau).re);
                residual = residual.max((fit - z).norm());
            }
            curves.push(ComponentCurve { s_c: cycle.len(), f, g });
        }
        if residual > tolerances::FIT_RESIDUAL {
            return Err(FitError::Residual { residual, tolerance: tolerances::FIT_RESIDUAL });
        }
        let sp = StrandParametrization { components: curves };
        let sep = sp.min_separation(tolerances::VALIDATION_GRID);
        if sep > tolerances::STRAND_SEPARATION {
            let report = FitReport { offset: shape.offset, dwell: shape.dwell, upsampling: k, max_residual: residual, min_separation: sep };
            return Ok((sp, report));
        }
        last = Some(sep);
        k *= 2;
    }
    Err(FitError::Collision {
        min_distance: last.unwrap_or(0.0),
        upsampling: tolerances::FIT_MAX_UPSAMPLING,
    })
}

#[derive(Debug, Error, PartialEq)]
#[error("no shift candidate clears the origin; best margin achieved {best:e}")]
pub struct ShiftError {
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shift {
    pub c: Complex64,
    /// Exact value of c when the parametrization is exact (c is rounded to 1/1024).
    pub c_exact: Option<(Q, Q)>,
    pub margin: f64,
}

fn dyadic(x: f64) -> Q {
    Q::new(((x * 1024.0).round() as i64).into(), 1024.into())
}

fn shifted(sp: &StrandParametrization, re: &Coeff, im: &Coeff) -> StrandParametrization {
    let mut out = sp.clone();
    for c in &mut out.components {
        c.f.add_term(0, re.clone());
        c.g.add_term(0, im.clone());
    }
    out
}

/// Translate the strands so that no strand passes within the origin margin.
/// An already clear parametrization is returned unchanged; otherwise the
/// candidate with the largest margin over all rings is taken.
pub fn shift_to_avoid_origin(
    sp: &StrandParametrization,
    grid_size: usize,
) -> Result<(StrandParametrization, Shift), ShiftError> {
    let grid_size = grid_size.max(256);
    let fine = grid_size * 4;
    let margin = tolerances::ORIGIN_MARGIN;
    let base = sp.min_origin_distance(grid_size);
    if base > margin {
        let achieved = sp.min_origin_distance(fine);
        if achieved > margin {
            let zero = (sp.mode() == Mode::Exact).then(|| (Q::zero(), Q::zero()));
            return Ok((sp.clone(), Shift { c: Complex64::zero(), c_exact: zero, margin: achieved }));
        }
    }
    let exact = sp.mode() == Mode::Exact;
    let pts = sp.grid_points(fine);
    let mut best = base;
    let mut chosen: Option<(Q, Q, f64)> = None;
    for ring in 0..tolerances::SHIFT_RINGS {
        let radius = tolerances::SHIFT_RADIUS0 * 2f64.powi(ring as i32);
        for dir in 0..tolerances::SHIFT_DIRECTIONS {
            let theta = 2.0 * PI * dir as f64 / tolerances::SHIFT_DIRECTIONS as f64;
            let (re, im) = (dyadic(radius * theta.cos()), dyadic(radius * theta.sin()));
            let c = Complex64::new(crate::coeff::q_to_f64(&re), crate::coeff::q_to_f64(&im));
            let d = pts.iter().map(|p| (p + c).norm()).fold(f64::INFINITY, f64::min);
            if d > margin && d > best {
                chosen = Some((re, im, d));
            }
            best = best.max(d);
        }
    }
    let chosen = chosen.map(|(re, im, d)| {
        let c = Complex64::new(crate::coeff::q_to_f64(&re), crate::coeff::q_to_f64(&im));
        let (cre, cim) = if exact {
            (Coeff::real(re.clone()), Coeff::real(im.clone()))
        } else {
            (Coeff::float(c.re, 0.0), Coeff::float(c.im, 0.0))
        };
        (shifted(sp, &cre, &cim), Shift { c, c_exact: exact.then_some((re, im)), margin: d })
    });
    if let Some(found) = chosen {
        return Ok(found);
    }
    Err(ShiftError { best })
}
