//! End-to-end pipeline from a braid word or strand parametrization and a
//! holomorphic q to a certified f = p_{a,k} q, and sampling of the link of f.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::braid::{cycle_type, is_syntactic_square, BraidWord, Letter};
use crate::braidfamily::{arg_profile, build_ga, min_admissible_nm, AdmissibleBound, ArgDerivativeProfile, SemiholoFamily};
use crate::coeff::{fmt_q, q, Q};
use crate::mixedpoly::{n_m, rescale_to_mixed, MixedPolynomial};
use crate::newton::newton_boundary;
use crate::nondeg::{certify_product, q_is_nondegenerate, required_k, Certificate, QCheck};
use crate::roots::{self, RootError};
use crate::tolerances::{
    CROSSING_TIME_TOL, DEFAULT_GRID, SAMPLE_MAX_REFINEMENTS, SAMPLE_MAX_INCLUSION_RATIO, SAMPLE_MIN_REL_SEPARATION,
    SAMPLE_R0_EXPONENTS, SAMPLE_RESIDUAL, VALIDATION_GRID,
};
use crate::trigcurve::{fit_parametrization_shaped, shift_to_avoid_origin, FitReport, FitShape, StrandParametrization};

pub const DEFAULT_SAMPLE_GRID: usize = 2048;
/// Projection rotations tried when crossings are not generic.
const MAX_PROJECTIONS: usize = 8;

#[derive(Clone, Debug)]
pub enum RealizeInput {
    Braid(BraidWord),
    Parametrization(StrandParametrization),
}

#[derive(Clone, Debug)]
pub struct RealizeOptions {
    pub a: Q,
    pub grid_size: usize,
    pub shift: bool,
    /// Fixed crossing offset for the fit; None scans the default offsets.
    pub crossing_offset: Option<f64>,
    /// Fixed (negative, positive) dwell for the fit; None scans the defaults.
    pub dwell: Option<[usize; 2]>,
    /// Use this k instead of the minimal one (must not be smaller).
    pub k: Option<u32>,
    /// User-supplied Milnor number of q for the consistency check.
    pub mu: Option<i64>,
    pub sample: bool,
    pub sample_grid: usize,
    pub r0: Option<f64>,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self {
            a: q(1, 2),
            grid_size: DEFAULT_GRID,
            shift: true,
            crossing_offset: None,
            dwell: None,
            k: None,
            mu: None,
            sample: false,
            sample_grid: DEFAULT_SAMPLE_GRID,
            r0: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Fit,
    Shift,
    Family,
    Profile,
    Bound,
    CheckQ,
    Rescale,
    Certify,
    Sample,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

/// First failing stage with whatever the earlier stages produced.
#[derive(Clone, Debug, Error, Serialize)]
#[error("{stage} stage failed: {message}")]
pub struct FailureReport {
    pub status: &'static str,
    pub stage: Stage,
    pub message: String,
    pub detail: Value,
    pub partial: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationReport {
    pub status: &'static str,
    pub inputs: Value,
    pub warnings: Vec<String>,
    pub fit: Option<FitReport>,
    /// Every fit shape tried, with its n' or the stage that rejected it.
    pub fit_scan: Vec<Value>,
    pub shift: Option<Value>,
    pub a: String,
    pub k: u32,
    pub n_m: u32,
    pub n_prime: u32,
    pub bound: AdmissibleBound,
    pub profile: ArgDerivativeProfile,
    pub q_check: QCheck,
    pub f: Value,
    pub boundary: Value,
    pub certificate: Certificate,
    pub sample: Option<LinkSample>,
}

/// Report plus the objects the CLI writes out as separate artifacts.
#[derive(Clone, Debug)]
pub struct Realization {
    pub report: RealizationReport,
    pub parametrization: StrandParametrization,
    pub family: SemiholoFamily,
    pub f: MixedPolynomial,
}

struct Progress {
    partial: Map<String, Value>,
}

impl Progress {
    fn fail(&self, stage: Stage, message: impl ToString, detail: Value) -> Box<FailureReport> {
        Box::new(FailureReport {
            status: "failure",
            stage,
            message: message.to_string(),
            detail,
            partial: Value::Object(self.partial.clone()),
        })
    }

    fn record(&mut self, key: &str, v: Value) {
        self.partial.insert(key.to_string(), v);
    }
}

struct Failure {
    stage: Stage,
    message: String,
    detail: Value,
}

impl Failure {
    fn new(stage: Stage, message: impl ToString, detail: Value) -> Self {
        Self { stage, message: message.to_string(), detail }
    }

    fn into_report(self, pr: &Progress) -> Box<FailureReport> {
        pr.fail(self.stage, self.message, self.detail)
    }
}

/// Shift, family, profile and bound for one parametrization.
struct FrontEnd {
    sp: StrandParametrization,
    shift: Option<Value>,
    fam: SemiholoFamily,
    profile: ArgDerivativeProfile,
    bound: AdmissibleBound,
}

fn front_end(sp: StrandParametrization, opts: &RealizeOptions) -> Result<FrontEnd, Failure> {
    let (sp, shift) = if opts.shift {
        let (sp, sh) = shift_to_avoid_origin(&sp, VALIDATION_GRID)
            .map_err(|e| Failure::new(Stage::Shift, &e, json!({"best_margin": e.best})))?;
        let v = json!({
            "c": [sh.c.re, sh.c.im],
            "c_exact": sh.c_exact.as_ref().map(|(re, im)| [fmt_q(re), fmt_q(im)]),
            "margin": sh.margin,
        });
        (sp, Some(v))
    } else {
        (sp, None)
    };
    let fam = build_ga(&sp, &opts.a).map_err(|e| Failure::new(Stage::Family, &e, Value::Null))?;
    let profile = arg_profile(&fam, opts.grid_size).map_err(|e| Failure::new(Stage::Profile, &e, Value::Null))?;
    let bound = min_admissible_nm(&profile)
        .map_err(|e| Failure::new(Stage::Profile, &e, serde_json::to_value(&profile).unwrap()))?;
    Ok(FrontEnd { sp, shift, fam, profile, bound })
}

/// Parametrization, family, profile and bound shared by every pipeline command.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub inputs: Value,
    pub warnings: Vec<String>,
    pub fit: Option<FitReport>,
    /// Every fit shape tried, with its n' or the stage that rejected it.
    pub fit_scan: Vec<Value>,
    pub parametrization: StrandParametrization,
    pub shift: Option<Value>,
    pub family: SemiholoFamily,
    pub profile: ArgDerivativeProfile,
    pub bound: AdmissibleBound,
    partial: Map<String, Value>,
}

impl Prepared {
    /// Everything recorded so far, as it would appear in a failure report.
    pub fn partial(&self) -> Value {
        Value::Object(self.partial.clone())
    }

    /// Failure report for a later stage, carrying this preparation.
    pub fn fail(&self, stage: Stage, message: impl ToString, detail: Value) -> Box<FailureReport> {
        Progress { partial: self.partial.clone() }.fail(stage, message, detail)
    }
}

/// Fit (scanning shapes for a braid), shift, family, profile and bound. For a
/// braid the shape with the smallest n' wins.
pub fn prepare(input: &RealizeInput, opts: &RealizeOptions) -> Result<Prepared, Box<FailureReport>> {
    let mut pr = Progress { partial: Map::new() };
    let mut warnings = Vec::new();
    let mut inputs = json!({});
    let mut fit_scan = Vec::new();
    let (fit, front) = match input {
        RealizeInput::Braid(b) => {
            inputs["braid"] = json!(b.to_text());
            inputs["strands"] = json!(b.strands);
            if !is_syntactic_square(b) {
                warnings.push("braid word is not a syntactic square; realizability is left to the rescale parity check".into());
            }
            pr.record("inputs", inputs.clone());
            let mut best: Option<(FitReport, FrontEnd)> = None;
            let mut first_err: Option<Failure> = None;
            for shape in FitShape::candidates(b, opts.crossing_offset, opts.dwell) {
                let attempt = fit_parametrization_shaped(b, shape)
                    .map_err(|e| Failure::new(Stage::Fit, &e, json!(format!("{e:?}"))))
                    .and_then(|(sp, rep)| front_end(sp, opts).map(|fe| (rep, fe)));
                match attempt {
                    Ok((rep, fe)) => {
                        fit_scan.push(json!({"shape": shape, "n_prime": fe.bound.n_prime}));
                        if best.as_ref().is_none_or(|(_, b)| fe.bound.n_prime < b.bound.n_prime) {
                            best = Some((rep, fe));
                        }
                    }
                    Err(f) => {
                        fit_scan.push(json!({"shape": shape, "stage": f.stage, "message": f.message}));
                        first_err.get_or_insert(f);
                    }
                }
            }
            pr.record("fit_scan", json!(fit_scan));
            match best {
                Some((rep, fe)) => {
                    pr.record("fit", serde_json::to_value(&rep).unwrap());
                    (Some(rep), fe)
                }
                None => return Err(first_err.expect("at least one fit shape").into_report(&pr)),
            }
        }
        RealizeInput::Parametrization(sp) => {
            inputs["parametrization"] = sp.to_json();
            pr.record("inputs", inputs.clone());
            (None, front_end(sp.clone(), opts).map_err(|f| f.into_report(&pr))?)
        }
    };
    let FrontEnd { sp, shift, fam, profile, bound } = front;
    if let Some(v) = &shift {
        pr.record("shift", v.clone());
    }
    pr.record("parametrization", sp.to_json());
    pr.record("profile", serde_json::to_value(&profile).unwrap());
    pr.record("bound", serde_json::to_value(&bound).unwrap());
    Ok(Prepared {
        inputs,
        warnings,
        fit,
        fit_scan,
        parametrization: sp,
        shift,
        family: fam,
        profile,
        bound,
        partial: pr.partial,
    })
}

pub fn realize(
    input: &RealizeInput,
    q: &MixedPolynomial,
    opts: &RealizeOptions,
) -> Result<Realization, Box<FailureReport>> {
    let mut prep = prepare(input, opts)?;
    prep.inputs["q"] = q.to_json();
    prep.inputs["q_text"] = json!(q.to_text());
    prep.partial.insert("inputs".into(), prep.inputs.clone());
    let Prepared { inputs, warnings, fit, fit_scan, parametrization: sp, shift, family: fam, profile, bound, partial } = prep;
    let mut pr = Progress { partial };

    let q_check = q_is_nondegenerate(q, opts.mu).map_err(|e| pr.fail(Stage::CheckQ, &e, Value::Null))?;
    pr.record("q_check", serde_json::to_value(&q_check).unwrap());
    let nm = match n_m(q) {
        Ok(Some(n)) => n,
        Ok(None) => return Err(pr.fail(Stage::CheckQ, "q has no pure power of v (n_m undefined)", Value::Null)),
        Err(e) => return Err(pr.fail(Stage::CheckQ, &e, Value::Null)),
    };
    if !q_check.nondegenerate {
        return Err(pr.fail(Stage::CheckQ, "q is degenerate", serde_json::to_value(&q_check).unwrap()));
    }
    if nm < bound.n_prime {
        return Err(pr.fail(
            Stage::Bound,
            format!("n_m = {nm} is below the admissible bound n' = {}; raise the v-order of q", bound.n_prime),
            json!({"n_m": nm, "n_prime": bound.n_prime}),
        ));
    }

    let min_k = required_k(&fam, q).map_err(|e| pr.fail(Stage::Rescale, &e, Value::Null))?;
    let k = opts.k.unwrap_or(min_k);
    if k < min_k {
        return Err(pr.fail(Stage::Rescale, format!("k = {k} is below the minimal k = {min_k}"), json!({"k": k, "min_k": min_k})));
    }
    rescale_to_mixed(&fam, k).map_err(|e| pr.fail(Stage::Rescale, &e, Value::Null))?;
    let (certificate, f) = certify_product(&fam, k, q, &profile).map_err(|e| pr.fail(Stage::Certify, &e, Value::Null))?;
    if !certificate.overall {
        return Err(pr.fail(Stage::Certify, "certificate is negative", serde_json::to_value(&certificate).unwrap()));
    }
    pr.record("certificate", serde_json::to_value(&certificate).unwrap());
    let sample = if opts.sample {
        Some(sample_link(&f, opts.r0, opts.sample_grid).map_err(|e| pr.fail(Stage::Sample, &e, Value::Null))?)
    } else {
        None
    };
    let report = RealizationReport {
        status: "success",
        inputs,
        warnings,
        fit,
        fit_scan,
        shift,
        a: fmt_q(&opts.a),
        k,
        n_m: nm,
        n_prime: bound.n_prime,
        bound,
        profile,
        q_check,
        f: f.to_json(),
        boundary: newton_boundary(&f).to_json(),
        certificate,
        sample,
    };
    Ok(Realization { report, parametrization: sp, family: fam, f })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("f must be semiholomorphic and monic in u")]
    NotMonic,
    #[error("root finder failed at t = {t}: {source}")]
    Roots { t: f64, source: RootError },
    #[error("roots are not resolved at r0 = {r0:e} (relative separation {separation:e}, inclusion ratio {inclusion:e})")]
    Collision { r0: f64, separation: f64, inclusion: f64 },
    #[error("no radius 2^-j, j in {lo}..={hi}, resolves the roots")]
    NoRadius { lo: i32, hi: i32 },
    #[error("root tracking is ambiguous even on a grid of {grid} points")]
    Tracking { grid: usize },
    #[error("root residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error("no generic projection found among {tries} rotations")]
    NonGeneric { tries: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkSample {
    pub r0: f64,
    pub grid_size: usize,
    /// Roots per column (= s + deg q).
    pub degree: usize,
    #[serde(skip)]
    pub t: Vec<f64>,
    /// strands[i][k]: tracked root i at t[k], in units of exp(ln_scale).
    #[serde(skip)]
    pub strands: Vec<Vec<Complex64>>,
    /// Roots are u = exp(ln_scale) w; residuals are measured for the monic
    /// polynomial in w.
    pub ln_scale: f64,
    pub root_counts_ok: bool,
    /// max |f(u*)| / (1 + |u*|)^degree.
    pub max_residual: f64,
    /// max |f(u*)| / sum_j |c_j| |u*|^j.
    pub max_backward_residual: f64,
    pub min_rel_separation: f64,
    /// See `inclusion_ratio`; below the tolerance on every column.
    pub max_inclusion_ratio: f64,
    /// Strand i ends where strand `closing[i]` started (tracked labels).
    pub closing: Vec<usize>,
    /// Closure permutation in projection slots, from the tracking.
    pub permutation: Vec<usize>,
    pub braid: String,
    /// Closure permutation of the extracted word.
    pub braid_permutation: Vec<usize>,
    pub consistent: bool,
    pub cycle_type: Vec<usize>,
    pub crossings: usize,
    pub projection_angle: f64,
    /// Zero for a linear projection.
    pub projection_shear: f64,
}

impl LinkSample {
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "strand", "re_u", "im_u", "re_w", "im_w"])?;
        let scale = self.ln_scale.exp();
        for (i, s) in self.strands.iter().enumerate() {
            for (k, w) in s.iter().enumerate() {
                let u = w * scale;
                out.write_record(&[
                    format!("{:.12}", self.t[k]),
                    i.to_string(),
                    format!("{:.15e}", u.re),
                    format!("{:.15e}", u.im),
                    format!("{:.15e}", w.re),
                    format!("{:.15e}", w.im),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn check_monic(f: &MixedPolynomial) -> Result<usize, SampleError> {
    let deg = f.u_degree();
    let top: Vec<_> = f.terms.iter().filter(|(e, _)| e[0] == deg).collect();
    if !f.is_semiholomorphic() || deg == 0 || top.len() != 1 || *top[0].0 != [deg, 0, 0, 0] || top[0].1.to_c64() != Complex64::new(1.0, 0.0) {
        return Err(SampleError::NotMonic);
    }
    Ok(deg as usize)
}

fn rel_separation(col: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..col.len() {
        for j in i + 1..col.len() {
            let scale = col[i].norm().max(col[j].norm());
            best = best.min(if scale == 0.0 { 0.0 } else { (col[i] - col[j]).norm() / scale });
        }
    }
    best
}

struct Columns {
    t: Vec<f64>,
    roots: Vec<Vec<Complex64>>,
    ln_scale: f64,
    max_residual: f64,
    max_backward: f64,
    min_sep: f64,
    max_inclusion: f64,
}

impl Columns {
    fn resolved(&self) -> bool {
        self.min_sep >= SAMPLE_MIN_REL_SEPARATION && self.max_inclusion < SAMPLE_MAX_INCLUSION_RATIO
    }
}

/// Largest ratio, over the roots, of an inclusion radius to the distance to
/// the nearest other root. The radius is deg * (|p(w)| + rounding bound) / |p'(w)|,
/// so a ratio below 1/2 means each computed root is pinned to its own true root.
fn inclusion_ratio(c: &[Complex64], rs: &[Complex64]) -> f64 {
    let deg = rs.len() as f64;
    let gamma = 4.0 * deg * f64::EPSILON;
    let mut worst = 0.0f64;
    for (i, w) in rs.iter().enumerate() {
        let nearest = rs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, z)| (w - z).norm()).fold(f64::INFINITY, f64::min);
        if !nearest.is_finite() {
            continue;
        }
        let (val, dval) = roots::horner(c, *w);
        let mag: f64 = c.iter().enumerate().map(|(j, x)| x.norm() * w.norm().powi(j as i32)).sum();
        let radius = deg * (val.norm() + gamma * mag) / dval.norm();
        worst = worst.max(if radius.is_finite() { radius / nearest } else { f64::INFINITY });
    }
    worst
}

fn solve_columns(f: &MixedPolynomial, deg: usize, r0: f64, n: usize) -> Result<Columns, SampleError> {
    let t: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let ln_scale = f.u_coeffs_log_scaled(r0, 0.0).1;
    let cols: Vec<(Vec<Complex64>, f64, f64, f64)> = t
        .par_iter()
        .map(|&tk| {
            let c = f.u_coeffs_log_scaled(r0, tk).0;
            let rs = roots::roots(&c).map_err(|source| SampleError::Roots { t: tk, source })?;
            let (mut res, mut back) = (0.0f64, 0.0f64);
            for u in &rs {
                let val = roots::horner(&c, *u).0.norm();
                let mag: f64 = c.iter().enumerate().map(|(j, x)| x.norm() * u.norm().powi(j as i32)).sum();
                res = res.max(val / (1.0 + u.norm()).powi(deg as i32));
                back = back.max(if mag > 0.0 { val / mag } else { 0.0 });
            }
            let inc = inclusion_ratio(&c, &rs);
            Ok((rs, res, back, inc))
        })
        .collect::<Result<_, SampleError>>()?;
    let min_sep = cols.iter().map(|c| rel_separation(&c.0)).fold(f64::INFINITY, f64::min);
    let max_residual = cols.iter().map(|c| c.1).fold(0.0, f64::max);
    let max_backward = cols.iter().map(|c| c.2).fold(0.0, f64::max);
    let max_inclusion = cols.iter().map(|c| c.3).fold(0.0, f64::max);
    Ok(Columns { t, roots: cols.into_iter().map(|c| c.0).collect(), ln_scale, max_residual, max_backward, min_sep, max_inclusion })
}

/// Tracks roots column to column; None when some root moves more than half
/// the distance to its nearest neighbour.
fn track_columns(roots_by_col: &[Vec<Complex64>]) -> Option<(Vec<Vec<Complex64>>, Vec<usize>)> {
    let n = roots_by_col.len();
    let unambiguous = |prev: &[Complex64], next: &[Complex64]| {
        prev.iter().enumerate().all(|(i, a)| {
            let near = prev.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, b)| (a - b).norm()).fold(f64::INFINITY, f64::min);
            (a - next[i]).norm() < 0.5 * near
        })
    };
    let mut tracked = vec![roots_by_col[0].clone()];
    for col in &roots_by_col[1..] {
        let next = roots::track(tracked.last().unwrap(), col);
        if !unambiguous(tracked.last().unwrap(), &next) {
            return None;
        }
        tracked.push(next);
    }
    // close the loop: last column to the first
    let first = &tracked[0];
    let last = &tracked[n - 1];
    let cost: Vec<Vec<f64>> = last.iter().map(|a| first.iter().map(|b| (a - b).norm()).collect()).collect();
    let closing = roots::min_cost_matching(&cost);
    let wrapped: Vec<Complex64> = closing.iter().map(|&j| first[j]).collect();
    if !unambiguous(last, &wrapped) {
        return None;
    }
    Some((tracked, closing))
}

struct Extraction {
    word: BraidWord,
    slot_perm: Vec<usize>,
}

/// Braid word from the tracked roots after rotating the plane by -theta and
/// projecting (x, y) to x + shear y^2. The shear is the first coordinate of a
/// plane diffeomorphism, so any shear gives the same closed braid; it breaks
/// the collinearity of antipodal strands with a cluster at the origin. None
/// when the projection is not generic.
fn extract_braid(tracked: &[Vec<Complex64>], closing: &[usize], theta: f64, shear: f64) -> Option<Extraction> {
    let n = tracked.len();
    let m = tracked[0].len();
    let rot = Complex64::from_polar(1.0, -theta);
    let at = |k: usize, i: usize| {
        let z = if k == n { tracked[0][closing[i]] * rot } else { tracked[k][i] * rot };
        Complex64::new(z.re + shear * z.im * z.im, z.im)
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| at(0, a).re.total_cmp(&at(0, b).re));
    if order.windows(2).any(|w| at(0, w[0]).re == at(0, w[1]).re) {
        return None;
    }
    let start = order.clone();
    let mut slot0 = vec![0; m];
    for (p, &i) in start.iter().enumerate() {
        slot0[i] = p;
    }

    struct Event {
        time: f64,
        left: usize,
        right: usize,
        sign: i8,
    }
    let mut events = Vec::new();
    for k in 0..n {
        for i in 0..m {
            for j in i + 1..m {
                let (a0, a1, b0, b1) = (at(k, i), at(k + 1, i), at(k, j), at(k + 1, j));
                let (d0, d1) = (a0.re - b0.re, a1.re - b1.re);
                if d0 == 0.0 || d1 == 0.0 {
                    return None;
                }
                if (d0 < 0.0) == (d1 < 0.0) {
                    continue;
                }
                let tau = d0 / (d0 - d1);
                let ya = a0.im + tau * (a1.im - a0.im);
                let yb = b0.im + tau * (b1.im - b0.im);
                if ya == yb {
                    return None;
                }
                let (left, right, yl, yr) = if d0 < 0.0 { (i, j, ya, yb) } else { (j, i, yb, ya) };
                events.push(Event { time: k as f64 + tau, left, right, sign: if yl > yr { 1 } else { -1 } });
            }
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    // Crossings closer in time than the tolerance form one group. Inside a
    // group a crossing can fire once its two strands are adjacent; two ready
    // crossings sharing a strand are a triple point.
    let tol = CROSSING_TIME_TOL * n as f64;
    let mut letters = Vec::with_capacity(events.len());
    let mut start_ev = 0;
    while start_ev < events.len() {
        let mut end_ev = start_ev + 1;
        while end_ev < events.len() && events[end_ev].time - events[end_ev - 1].time < tol {
            end_ev += 1;
        }
        let mut pending: Vec<&Event> = events[start_ev..end_ev].iter().collect();
        while !pending.is_empty() {
            let ready: Vec<usize> = (0..pending.len())
                .filter(|&x| {
                    let p = order.iter().position(|&s| s == pending[x].left).unwrap();
                    order.get(p + 1) == Some(&pending[x].right)
                })
                .collect();
            let first = *ready.first()?;
            let shares = |a: &Event, b: &Event| a.left == b.left || a.left == b.right || a.right == b.left || a.right == b.right;
            if ready.iter().skip(1).any(|&x| shares(pending[first], pending[x])) {
                return None;
            }
            let e = pending.remove(first);
            let p = order.iter().position(|&x| x == e.left).unwrap();
            order.swap(p, p + 1);
            letters.push(Letter { index: p + 1, sign: e.sign });
        }
        start_ev = end_ev;
    }
    // order now lists strands by slot at t = 2 pi; strand i sits where closing[i] started
    let slot_perm = start.iter().map(|&i| slot0[closing[i]]).collect();
    Some(Extraction { word: BraidWord::new(m, letters), slot_perm })
}

/// Samples the zero set of f on |v| = r0 and reads off a braid.
pub fn sample_link(f: &MixedPolynomial, r0: Option<f64>, grid_size: usize) -> Result<LinkSample, SampleError> {
    let deg = check_monic(f)?;
    let (r0, mut cols) = match r0 {
        Some(r) => {
            let c = solve_columns(f, deg, r, grid_size)?;
            if !c.resolved() {
                return Err(SampleError::Collision { r0: r, separation: c.min_sep, inclusion: c.max_inclusion });
            }
            (r, c)
        }
        None => {
            let mut found = None;
            for j in SAMPLE_R0_EXPONENTS {
                let r = 2f64.powi(-j);
                let c = solve_columns(f, deg, r, grid_size)?;
                if c.resolved() {
                    found = Some((r, c));
                    break;
                }
            }
            found.ok_or(SampleError::NoRadius { lo: *SAMPLE_R0_EXPONENTS.start(), hi: *SAMPLE_R0_EXPONENTS.end() })?
        }
    };
    let mut n = grid_size;
    let mut refinements = 0;
    let (tracked, closing) = loop {
        if let Some(tc) = track_columns(&cols.roots) {
            break tc;
        }
        if refinements == SAMPLE_MAX_REFINEMENTS {
            return Err(SampleError::Tracking { grid: n });
        }
        refinements += 1;
        n *= 2;
        cols = solve_columns(f, deg, r0, n)?;
    };
    if !cols.resolved() {
        return Err(SampleError::Collision { r0, separation: cols.min_sep, inclusion: cols.max_inclusion });
    }
    if cols.max_residual > SAMPLE_RESIDUAL {
        return Err(SampleError::Residual { residual: cols.max_residual });
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let extent = tracked.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let (ext, theta, shear) = [0.0, 1.0 / (4.0 * extent)]
        .into_iter()
        .flat_map(|shear| (0..MAX_PROJECTIONS).map(move |i| (2.0 * PI * golden * i as f64, shear)))
        .find_map(|(theta, shear)| extract_braid(&tracked, &closing, theta, shear).map(|e| (e, theta, shear)))
        .ok_or(SampleError::NonGeneric { tries: 2 * MAX_PROJECTIONS })?;
    let braid_permutation = ext.word.permutation0();
    let strands = (0..deg).map(|i| tracked.iter().map(|c| c[i]).collect()).collect();
    Ok(LinkSample {
        r0,
        grid_size: n,
        degree: deg,
        root_counts_ok: cols.roots.iter().all(|c| c.len() == deg),
        t: cols.t,
        strands,
        ln_scale: cols.ln_scale,
        max_residual: cols.max_residual,
        max_backward_residual: cols.max_backward,
        min_rel_separation: cols.min_sep,
        max_inclusion_ratio: cols.max_inclusion,
        closing,
        consistent: braid_permutation == ext.slot_perm,
        cycle_type: cycle_type(&ext.slot_perm),
        permutation: ext.slot_perm,
        crossings: ext.word.letters.len(),
        braid: ext.word.to_text(),
        braid_permutation,
        projection_angle: theta,
        projection_shear: shear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{closure_structure, parse_braid_word};
    use crate::braidfamily::tests::five_two_sq;
    use crate::coeff::Coeff;
    use crate::trigcurve::{ComponentCurve, TrigPolynomial};

    const FIVE_TWO_SQ: &str = "s1^-1 s2 s1^3 s2 s1^-1 s2 s1^3 s2";

    fn holo(t: &[(i64, u32, u32)]) -> MixedPolynomial {
        MixedPolynomial::holomorphic(t)
    }

    #[test]
    fn toy_sample_has_no_crossings() {
        let mut f = holo(&[(1, 2, 0)]);
        f.add_term([0, 0, 1, 1], Coeff::from_int(-1));
        let s = sample_link(&f, Some(0.25), 256).unwrap();
        assert_eq!(s.braid, "");
        assert_eq!(s.permutation, vec![0, 1]);
        assert!(s.consistent);
    }

    #[test]
    fn stated_parametrization_end_to_end() {
        let opts = RealizeOptions { grid_size: 1024, sample: true, ..Default::default() };
        let q = holo(&[(1, 2, 0), (1, 0, 14)]);
        let r = realize(&RealizeInput::Parametrization(five_two_sq()), &q, &opts).unwrap();
        assert!(r.report.certificate.overall);
        let s = r.report.sample.as_ref().unwrap();
        assert_eq!(s.degree, 5);
        assert!(s.root_counts_ok && s.consistent);
        assert_eq!(s.cycle_type, vec![1, 1, 3]);
        let b = parse_braid_word(FIVE_TWO_SQ, 3).unwrap();
        assert_eq!(cycle_type(&closure_structure(&b).permutation.iter().map(|p| p - 1).collect::<Vec<_>>()), vec![3]);
        let half = sample_link(&r.f, Some(s.r0 / 2.0), opts.sample_grid).unwrap();
        assert_eq!(half.cycle_type, s.cycle_type);
    }

    #[test]
    fn p_alone_reproduces_braid_permutation() {
        let fam = build_ga(&five_two_sq(), &q(1, 2)).unwrap();
        let p = rescale_to_mixed(&fam, 2).unwrap();
        let s = sample_link(&p, None, 2048).unwrap();
        assert!(s.consistent);
        assert_eq!(s.cycle_type, vec![3]);
        assert_eq!(s.crossings % 2, FIVE_TWO_SQ.split_whitespace().count() % 2);
    }

    #[test]
    fn fitted_braid_end_to_end() {
        let b = parse_braid_word(FIVE_TWO_SQ, 3).unwrap();
        let q14 = holo(&[(1, 2, 0), (1, 0, 14)]);
        let opts = RealizeOptions { grid_size: 1024, ..Default::default() };
        let r = realize(&RealizeInput::Braid(b.clone()), &q14, &opts).unwrap();
        assert!(r.report.certificate.overall);
        let p = rescale_to_mixed(&r.family, r.report.k).unwrap();
        let s = sample_link(&p, None, 2048).unwrap();
        assert!(s.consistent);
        assert_eq!(s.braid, b.to_text());
        // roots of p near r^{2k} and of q near r^7 cannot share a double-precision column
        assert!(matches!(sample_link(&r.f, None, 256), Err(SampleError::NoRadius { .. })));
    }

    #[test]
    fn figure_eight_needs_shift() {
        let b = parse_braid_word("s1 s2^-1 s1 s2^-1", 3).unwrap();
        let q14 = holo(&[(1, 2, 0), (1, 0, 14)]);
        let off = RealizeOptions { grid_size: 1024, shift: false, ..Default::default() };
        let err = realize(&RealizeInput::Braid(b.clone()), &q14, &off).unwrap_err();
        assert_eq!(err.stage, Stage::Profile);
        let on = RealizeOptions { grid_size: 1024, ..Default::default() };
        match realize(&RealizeInput::Braid(b), &q14, &on) {
            Ok(r) => assert!(r.report.certificate.overall),
            Err(e) => assert_ne!(e.stage, Stage::Profile, "{e}"),
        }
    }

    #[test]
    fn single_strand_pipeline() {
        let sp = StrandParametrization {
            components: vec![ComponentCurve { s_c: 1, f: TrigPolynomial::constant(Coeff::from_int(2)), g: TrigPolynomial::zero() }],
        };
        let opts = RealizeOptions { grid_size: 1024, sample: true, sample_grid: 256, ..Default::default() };
        let r = realize(&RealizeInput::Parametrization(sp), &holo(&[(1, 1, 0), (1, 0, 1)]), &opts).unwrap();
        assert!(r.report.certificate.overall);
        assert_eq!(r.report.n_prime, 1);
        assert_eq!(r.report.sample.unwrap().degree, 2);
    }

    #[test]
    fn low_order_q_is_rejected_with_bound() {
        let opts = RealizeOptions { grid_size: 1024, ..Default::default() };
        let err = realize(&RealizeInput::Parametrization(five_two_sq()), &holo(&[(1, 2, 0), (1, 0, 2)]), &opts).unwrap_err();
        assert_eq!(err.stage, Stage::Bound);
        assert!(err.detail["n_prime"].as_u64().unwrap() > 2);
        assert!(err.partial.get("profile").is_some());
    }
}
