//! Non-degeneracy: squarefree collapse of holomorphic face functions, the
//! Newton number, and the certificate for a product f = p_{a,k} q.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::braidfamily::{min_admissible_nm, ArgDerivativeProfile, SemiholoFamily, Validity};
use crate::coeff::{fmt_q, Coeff, QComplex};
use crate::mixedpoly::{multiply, n_m, ord_profile, rescale_min_k, rescale_to_mixed, MixedError, MixedPolynomial};
use crate::newton::{
    face_function, is_convenient, min_k, newton_boundary, predict_product_boundary, NewtonBoundary, NewtonError,
    Point, WeightVector,
};
use crate::roots;
use crate::tolerances::{CERT_MARGIN, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceClass {
    MonomialVertex,
    Holomorphic,
    SemiholomorphicQ1,
    SemiholomorphicQ2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Nondegenerate,
    StronglyNondegenerate,
    Degenerate,
    InvalidInput,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// Face function is c u^α v^β; no zeros in the torus.
    Monomial { point: Point },
    /// Face collapsed to C(w) = sum c_i w^i after factoring out u^α v^β.
    Collapsed { monomial: Point, coeffs: Vec<Value>, squarefree: bool, gcd_degree: usize },
    /// min over the grid of n_m + D(t) over the relevant branches.
    Margin { branches: Vec<usize>, min_value: f64, required: f64 },
    /// Support on the face is not a single monomial or not holomorphic.
    Unsupported { terms: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceVerdict {
    pub normal: (i64, i64),
    pub from: Point,
    pub to: Point,
    pub class: FaceClass,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl FaceVerdict {
    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::StronglyNondegenerate
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NondegError {
    #[error("polynomial is not weighted homogeneous for P = ({p1}, {p2})")]
    NotHomogeneous { p1: i64, p2: i64 },
    #[error("face function is not holomorphic")]
    NotHolomorphic,
    #[error("q is not convenient; Newton number undefined")]
    NotConvenient,
}

// Univariate polynomials over Q(i), low to high.

fn trim(p: &mut Vec<QComplex>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &[QComplex]) -> Vec<QComplex> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * QComplex::new(num_rational::BigRational::from_integer(i.into()), Zero::zero()))
        .collect()
}

fn rem(a: &[QComplex], b: &[QComplex]) -> Vec<QComplex> {
    let mut r = a.to_vec();
    let lead = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(c * &f);
        }
        r.pop();
        trim(&mut r);
    }
    r
}

/// Monic gcd by Euclid's algorithm.
pub fn poly_gcd(a: &[QComplex], b: &[QComplex]) -> Vec<QComplex> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}

pub fn is_squarefree(p: &[QComplex]) -> bool {
    poly_gcd(p, &derivative(p)).len() <= 1
}

/// Collapse of a holomorphic polynomial homogeneous for P: returns the
/// factored monomial u^α v^β and C with H(u, v) = C(u^{p₂} / v^{p₁}) v^{...}.
pub fn collapse(h: &MixedPolynomial, p: &WeightVector) -> Result<(Point, Vec<Coeff>), NondegError> {
    if !h.is_holomorphic() {
        return Err(NondegError::NotHolomorphic);
    }
    let pts = h.support_points();
    let d = p.rdeg(pts[0]);
    let err = NondegError::NotHomogeneous { p1: p.p1, p2: p.p2 };
    if pts.iter().any(|&q| p.rdeg(q) != d) {
        return Err(err);
    }
    let alpha = pts.iter().map(|q| q.0).min().unwrap();
    let beta = pts.iter().map(|q| q.1).min().unwrap();
    let top = pts.iter().map(|q| q.0).max().unwrap();
    let mut c = vec![Coeff::zero(); ((top - alpha) / p.p2) as usize + 1];
    for (e, coeff) in &h.terms {
        let off = e[0] as i64 - alpha;
        if off % p.p2 != 0 {
            return Err(err);
        }
        c[(off / p.p2) as usize] = coeff.clone();
    }
    Ok(((alpha, beta), c))
}

fn collapsed_verdict(h: &MixedPolynomial, p: &WeightVector) -> Result<(Verdict, Evidence), NondegError> {
    let (monomial, c) = collapse(h, p)?;
    if c.len() == 1 {
        return Ok((Verdict::StronglyNondegenerate, Evidence::Monomial { point: monomial }));
    }
    let exact: Vec<QComplex> = c.iter().map(Coeff::to_exact).collect();
    let g = poly_gcd(&exact, &derivative(&exact));
    let squarefree = g.len() <= 1;
    let coeffs = c
        .iter()
        .map(|x| serde_json::json!({"re": x.part_json(false), "im": x.part_json(true)}))
        .collect();
    // Euler identity: a weighted homogeneous holomorphic face has its critical
    // points on its zero set, so nondegenerate already means strongly.
    let verdict = if squarefree { Verdict::StronglyNondegenerate } else { Verdict::Degenerate };
    Ok((verdict, Evidence::Collapsed { monomial, coeffs, squarefree, gcd_degree: g.len().saturating_sub(1) }))
}

pub fn holomorphic_face_nondegenerate(h: &MixedPolynomial, p: &WeightVector) -> Result<FaceVerdict, NondegError> {
    let (verdict, evidence) = collapsed_verdict(h, p)?;
    let pts = h.support_points();
    let class = if pts.len() == 1 { FaceClass::MonomialVertex } else { FaceClass::Holomorphic };
    Ok(FaceVerdict {
        normal: (p.p1, p.p2),
        from: *pts.last().unwrap(),
        to: pts[0],
        class,
        verdict,
        evidence,
    })
}

/// Twice the area between the boundary and the axes (shoelace).
fn twice_area(b: &NewtonBoundary) -> i64 {
    b.vertices.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum()
}

/// ν = 2A - a - b + 1 with a, b the axis intercepts of Γ(q).
pub fn newton_number(q: &MixedPolynomial) -> Result<i64, NondegError> {
    if !is_convenient(q) {
        return Err(NondegError::NotConvenient);
    }
    let b = newton_boundary(q);
    if b.vertices == [(0, 0)] {
        return Ok(0);
    }
    let a = b.vertices[0].0;
    let c = b.vertices.last().unwrap().1;
    Ok(twice_area(&b) - a - c + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QCheck {
    pub nondegenerate: bool,
    pub faces: Vec<FaceVerdict>,
    pub newton_number: Option<i64>,
    pub milnor_number: Option<i64>,
    /// "consistent" when (μ = ν) agrees with the face verdicts, "inconsistent"
    /// otherwise, "unknown" without μ.
    pub mu_consistency: &'static str,
}

pub fn q_is_nondegenerate(q: &MixedPolynomial, mu: Option<i64>) -> Result<QCheck, NondegError> {
    if !q.is_holomorphic() {
        return Err(NondegError::NotHolomorphic);
    }
    let b = newton_boundary(q);
    let faces = b
        .faces
        .iter()
        .map(|f| holomorphic_face_nondegenerate(&face_function(q, &f.normal), &f.normal))
        .collect::<Result<Vec<_>, _>>()?;
    let nondegenerate = faces.iter().all(FaceVerdict::is_positive);
    let nu = newton_number(q).ok();
    let mu_consistency = match (mu, nu) {
        (Some(m), Some(n)) if (m == n) == nondegenerate => "consistent",
        (Some(_), Some(_)) => "inconsistent",
        _ => "unknown",
    };
    Ok(QCheck { nondegenerate, faces, newton_number: nu, milnor_number: mu, mu_consistency })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub samples: usize,
    /// Smallest |∇f_P| / (|u ∂_u| + |v ∂_v| scale) seen at zeros of f_P.
    pub min_relative_gradient: f64,
}

/// Falsification probe for a holomorphic face: at random v in the torus,
/// solve f_P(u, v) = 0 for u ≠ 0 and record the gradient there.
pub fn probe_face(h: &MixedPolynomial, samples: usize, seed: u64) -> ProbeResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    let deg = h.u_degree() as usize;
    while count < samples {
        let v = Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (e, coeff) in &h.terms {
            c[e[0] as usize] += coeff.to_c64() * v.powu(e[2]);
        }
        let Ok(us) = roots::roots(&c) else { continue };
        for u in us.into_iter().filter(|u| u.norm() > 1e-9) {
            let (mut du, mut dv, mut scale) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
            for (e, coeff) in &h.terms {
                let m = coeff.to_c64() * u.powu(e[0]) * v.powu(e[2]);
                du += m * e[0] as f64 / u;
                dv += m * e[2] as f64 / v;
                scale += m.norm() * (e[0] as f64 / u.norm() + e[2] as f64 / v.norm());
            }
            if scale > 0.0 {
                worst = worst.min((du.norm() + dv.norm()) / scale);
            }
            count += 1;
        }
    }
    ProbeResult { samples: count, min_relative_gradient: worst }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertParameters {
    pub a: String,
    pub s: usize,
    pub m: u32,
    pub k: u32,
    pub n_m: u32,
    pub n_prime: u32,
    pub min_k: u32,
    /// The monomial v^{n_m} of q, left out of the product conditions.
    pub excluded_monomial: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMetadata {
    pub grid_size: usize,
    pub refinements: usize,
    pub required_margin: f64,
    pub q1_margin: Option<f64>,
    pub q2_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub convenient: bool,
    pub faces: Vec<FaceVerdict>,
    pub parameters: CertParameters,
    pub grid: GridMetadata,
    pub boundary: Value,
    pub overall: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Mixed(#[from] MixedError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error(transparent)]
    Nondeg(#[from] NondegError),
    #[error("q has no pure power of v")]
    NoPureV,
    #[error("k = {k} is below the minimal k = {min_k}")]
    KBelowMin { k: u32, min_k: u32 },
    #[error("argument profile is invalid: branch {branch} vanishes near t = {zeros:?}")]
    ProfileInvalid { branch: usize, zeros: Vec<f64> },
    #[error("computed Newton boundary {computed:?} differs from the prediction {predicted:?}")]
    BoundaryMismatch { computed: Vec<Point>, predicted: Vec<Point> },
}

/// Smallest k valid for both the rescale and the product boundary.
pub fn required_k(fam: &SemiholoFamily, q: &MixedPolynomial) -> Result<u32, CertifyError> {
    let nm = n_m(q)?.ok_or(CertifyError::NoPureV)?;
    Ok(min_k(fam.s, nm, &q.support_points()).max(rescale_min_k(fam)))
}

fn margin_verdict(branches: Vec<usize>, min_value: f64) -> (Verdict, Evidence) {
    let verdict = if min_value > CERT_MARGIN { Verdict::StronglyNondegenerate } else { Verdict::Degenerate };
    (verdict, Evidence::Margin { branches, min_value, required: CERT_MARGIN })
}

/// Certificate for f = p_{a,k} q. Returns f alongside.
pub fn certify_product(
    fam: &SemiholoFamily,
    k: u32,
    q: &MixedPolynomial,
    profile: &ArgDerivativeProfile,
) -> Result<(Certificate, MixedPolynomial), CertifyError> {
    let m = q.u_degree();
    ord_profile(q, m)?;
    let nm = n_m(q)?.ok_or(CertifyError::NoPureV)?;
    let mk = required_k(fam, q)?;
    if k < mk {
        return Err(CertifyError::KBelowMin { k, min_k: mk });
    }
    if let Validity::Invalid { branch, zeros, .. } = &profile.validity {
        return Err(CertifyError::ProfileInvalid { branch: *branch, zeros: zeros.clone() });
    }
    let n_prime = min_admissible_nm(profile).map(|b| b.n_prime).unwrap_or(u32::MAX);
    let s = fam.s as i64;
    let f = multiply(&rescale_to_mixed(fam, k)?, q);
    let boundary = newton_boundary(&f);
    let predicted = predict_product_boundary(fam.s, k, q)?;
    if !boundary.same_polygon(&predicted) {
        return Err(CertifyError::BoundaryMismatch {
            computed: boundary.vertices.clone(),
            predicted: predicted.vertices,
        });
    }
    let top = (0, 2 * s * k as i64 + nm as i64);
    let q1 = (fam.s >= 2).then(|| profile.branches[1..].iter().map(|b| b.min_d).fold(f64::INFINITY, f64::min) + nm as f64);
    let q2 = profile.branches[0].min_d + nm as f64;

    let mut faces = Vec::new();
    for face in &boundary.faces {
        let fp = face_function(&f, &face.normal);
        let (class, (verdict, evidence)) = if face.to == top {
            match q1 {
                Some(v) => (FaceClass::SemiholomorphicQ1, margin_verdict((1..fam.s).collect(), v)),
                // a single strand has no critical values: only the u^s v^{n_m} and
                // top vertex monomials can vanish, and they do not in the torus
                None => (FaceClass::SemiholomorphicQ1, (Verdict::StronglyNondegenerate, Evidence::Margin {
                    branches: vec![],
                    min_value: f64::INFINITY,
                    required: CERT_MARGIN,
                })),
            }
        } else if fp.is_holomorphic() {
            (FaceClass::Holomorphic, collapsed_verdict(&fp, &face.normal)?)
        } else {
            (FaceClass::Holomorphic, (Verdict::InvalidInput, Evidence::Unsupported { terms: fp.terms.len() }))
        };
        faces.push(FaceVerdict {
            normal: (face.normal.p1, face.normal.p2),
            from: face.from,
            to: face.to,
            class,
            verdict,
            evidence,
        });
    }
    for (i, &v) in boundary.vertices.iter().enumerate() {
        let w = boundary.vertex_weight(i);
        let fp = face_function(&f, &w);
        let (class, (verdict, evidence)) = if v == top {
            (FaceClass::SemiholomorphicQ2, margin_verdict(vec![0], q2))
        } else if fp.terms.len() == 1 {
            (FaceClass::MonomialVertex, (Verdict::StronglyNondegenerate, Evidence::Monomial { point: v }))
        } else {
            (FaceClass::MonomialVertex, (Verdict::InvalidInput, Evidence::Unsupported { terms: fp.terms.len() }))
        };
        faces.push(FaceVerdict { normal: (w.p1, w.p2), from: v, to: v, class, verdict, evidence });
    }
    let convenient = is_convenient(&f);
    let overall = convenient && faces.iter().all(FaceVerdict::is_positive);
    let cert = Certificate {
        convenient,
        faces,
        parameters: CertParameters {
            a: fmt_q(&fam.a),
            s: fam.s,
            m,
            k,
            n_m: nm,
            n_prime,
            min_k: mk,
            excluded_monomial: (0, nm as i64),
        },
        grid: GridMetadata {
            grid_size: profile.grid_size,
            refinements: profile.refinements.len().saturating_sub(1),
            required_margin: CERT_MARGIN,
            q1_margin: q1,
            q2_margin: q2,
        },
        boundary: boundary.to_json(),
        overall,
    };
    Ok((cert, f))
}

/// Probe every holomorphic face of the certificate with the default seed.
pub fn probe_certificate(cert: &Certificate, f: &MixedPolynomial, samples: usize) -> Vec<ProbeResult> {
    cert.faces
        .iter()
        .filter(|fv| fv.class == FaceClass::Holomorphic && fv.is_positive())
        .map(|fv| probe_face(&face_function(f, &WeightVector::new(fv.normal.0, fv.normal.1)), samples, DEFAULT_SEED))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braidfamily::{arg_profile, build_ga, figure_eight_family, tests::five_two_sq};
    use crate::coeff::q as rat;

    fn h(terms: &[(i64, u32, u32)]) -> MixedPolynomial {
        MixedPolynomial::holomorphic(terms)
    }

    /// Pick's theorem oracle: count lattice points inside and on the region
    /// between Γ(q) and the axes.
    fn pick_oracle(q: &MixedPolynomial) -> i64 {
        let b = newton_boundary(q);
        let a = b.vertices[0].0;
        let c = b.vertices.last().unwrap().1;
        let (mut inside, mut on) = (0, 0);
        for x in 0..=a {
            for y in 0..=c {
                let gap = b.faces.iter().map(|f| f.normal.rdeg((x, y)) - f.d).min().unwrap();
                if gap > 0 {
                    continue;
                }
                if x == 0 || y == 0 || gap == 0 {
                    on += 1;
                } else {
                    inside += 1;
                }
            }
        }
        2 * inside + on - 2 - a - c + 1
    }

    #[test]
    fn face_examples() {
        let w = WeightVector::new(3, 2);
        let v = holomorphic_face_nondegenerate(&h(&[(1, 4, 0), (-2, 2, 3), (-1, 0, 6)]), &w).unwrap();
        assert_eq!(v.verdict, Verdict::StronglyNondegenerate);
        let Evidence::Collapsed { coeffs, .. } = &v.evidence else { panic!() };
        assert_eq!(coeffs.len(), 3);
        let sq = holomorphic_face_nondegenerate(&h(&[(1, 2, 0), (2, 1, 1), (1, 0, 2)]), &WeightVector::new(1, 1)).unwrap();
        assert_eq!(sq.verdict, Verdict::Degenerate);
        assert!(matches!(sq.evidence, Evidence::Collapsed { squarefree: false, gcd_degree: 1, .. }));
        let cusp = holomorphic_face_nondegenerate(&h(&[(1, 2, 0), (1, 0, 3)]), &w).unwrap();
        assert_eq!(cusp.verdict, Verdict::StronglyNondegenerate);
        assert!(holomorphic_face_nondegenerate(&h(&[(1, 2, 0), (1, 0, 5)]), &w).is_err());
    }

    #[test]
    fn newton_numbers() {
        assert_eq!(newton_number(&h(&[(1, 2, 0), (1, 0, 3)])).unwrap(), 2);
        for n in 1..20 {
            assert_eq!(newton_number(&h(&[(1, 2, 0), (1, 0, n)])).unwrap(), n as i64 - 1);
        }
        let q = h(&[(1, 4, 0), (-2, 2, 3), (-4, 1, 5), (-1, 0, 6), (-1, 0, 7)]);
        assert_eq!(newton_number(&q).unwrap(), 15);
        assert_eq!(pick_oracle(&q), 15);
        assert!(newton_number(&h(&[(1, 2, 1)])).is_err());
    }

    #[test]
    fn q_checks() {
        let q = h(&[(1, 4, 0), (-2, 2, 3), (-4, 1, 5), (-1, 0, 6), (-1, 0, 7)]);
        let c = q_is_nondegenerate(&q, Some(15)).unwrap();
        assert!(c.nondegenerate);
        assert_eq!(c.mu_consistency, "consistent");
        assert!(q_is_nondegenerate(&h(&[(1, 2, 0), (1, 0, 14)]), None).unwrap().nondegenerate);
        let sq = q_is_nondegenerate(&h(&[(1, 2, 0), (2, 1, 1), (1, 0, 2)]), None).unwrap();
        assert!(!sq.nondegenerate);
        assert_eq!(sq.mu_consistency, "unknown");
        assert_eq!(q_is_nondegenerate(&h(&[(1, 2, 0), (1, 0, 2)]), Some(5)).unwrap().mu_consistency, "inconsistent");
    }

    #[test]
    fn probe_finds_no_critical_zeros_on_nondegenerate_face() {
        let face = h(&[(1, 4, 0), (-2, 2, 3), (-1, 0, 6)]);
        let r = probe_face(&face, 10_000, DEFAULT_SEED);
        assert!(r.samples >= 10_000);
        assert!(r.min_relative_gradient > 1e-3);
        let sq = h(&[(1, 2, 0), (2, 1, 1), (1, 0, 2)]);
        assert!(probe_face(&sq, 100, DEFAULT_SEED).min_relative_gradient < 1e-6);
    }

    #[test]
    fn certify_five_two_squared() {
        let fam = build_ga(&five_two_sq(), &rat(1, 2)).unwrap();
        let prof = arg_profile(&fam, 1024).unwrap();
        let q = h(&[(1, 2, 0), (1, 0, 14)]);
        let k = required_k(&fam, &q).unwrap();
        let (cert, f) = certify_product(&fam, k, &q, &prof).unwrap();
        assert!(cert.overall, "{}", serde_json::to_string_pretty(&cert).unwrap());
        assert!(cert.faces.iter().all(FaceVerdict::is_positive));
        assert!(is_convenient(&f));
        let q2 = h(&[(1, 2, 0), (1, 0, 2)]);
        let (bad, _) = certify_product(&fam, required_k(&fam, &q2).unwrap(), &q2, &prof).unwrap();
        assert!(!bad.overall);
        assert!(bad.faces.iter().any(|f| f.verdict == Verdict::Degenerate));
        assert!(matches!(certify_product(&fam, 1, &q, &prof), Err(CertifyError::KBelowMin { .. })));
    }

    #[test]
    fn figure_eight_certificate_refused() {
        let fam = figure_eight_family(&rat(1, 2));
        let prof = arg_profile(&fam, 1024).unwrap();
        let q = h(&[(1, 2, 0), (1, 0, 14)]);
        let k = required_k(&fam, &q).unwrap();
        assert!(matches!(certify_product(&fam, k, &q, &prof), Err(CertifyError::ProfileInvalid { branch: 0, .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random convenient holomorphic q built from a few monomials.
        fn convenient_q() -> impl Strategy<Value = MixedPolynomial> {
            (1u32..8, 1u32..8, prop::collection::vec((0u32..8, 0u32..8, 1i64..4), 0..5)).prop_map(|(a, b, rest)| {
                let mut terms = vec![(1, a, 0), (1, 0, b)];
                terms.extend(rest.into_iter().map(|(i, j, c)| (c, i, j)).filter(|&(_, i, j)| i + j > 0));
                h(&terms)
            })
        }

        /// Binary forms with simple roots, times a random monomial.
        fn face_and_monomial() -> impl Strategy<Value = (Vec<i64>, u32, u32, u32, u32)> {
            (prop::collection::btree_set(-6i64..7, 1..4), 1u32..4, 1u32..4, 0u32..4, 0u32..4)
                .prop_map(|(rs, p1, p2, a, b)| (rs.into_iter().collect(), p1, p2, a, b))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]

            #[test]
            fn newton_number_matches_pick(q in convenient_q()) {
                prop_assert_eq!(newton_number(&q).unwrap(), pick_oracle(&q));
            }

            #[test]
            fn monomial_factor_invariance((rs, p1, p2, a, b) in face_and_monomial(), square in any::<bool>()) {
                // prod (u^{p2} - r v^{p1}), optionally with a repeated factor
                let mut face = h(&[(1, 0, 0)]);
                let mut factors = rs.clone();
                if square {
                    factors.push(rs[0]);
                }
                for r in factors {
                    face = multiply(&face, &h(&[(1, p2, 0), (-r, 0, p1)]));
                }
                let w = WeightVector::new(p1 as i64, p2 as i64);
                prop_assume!(num_integer::gcd(p1, p2) == 1);
                let base = holomorphic_face_nondegenerate(&face, &w).unwrap().verdict;
                let moved = holomorphic_face_nondegenerate(&multiply(&h(&[(1, a, b)]), &face), &w).unwrap().verdict;
                prop_assert_eq!(base, moved);
                // a repeated root r = 0 only adds to the monomial factor
                let expect_ok = !square || rs[0] == 0;
                prop_assert_eq!(base == Verdict::StronglyNondegenerate, expect_ok);
            }
        }
    }
}
