//! Mixed polynomials in (u, ū, v, v̄), the rescale g_a -> p_{a,k}, radial
//! weight types and the v-orders of a holomorphic q.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::braidfamily::SemiholoFamily;
use crate::coeff::{Coeff, Mode};

/// Exponents (ν₁, μ₁, ν₂, μ₂) of u, ū, v, v̄.
pub type Exps = [u32; 4];

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedPolynomial {
    pub terms: BTreeMap<Exps, Coeff>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixedError {
    #[error("odd frequency {l} in the coefficient of u^{j}: rescale is not polynomial")]
    Parity { j: usize, l: i64 },
    #[error("k = {k} too small: frequency {l} in the coefficient of u^{j} needs k >= {min_k}")]
    KTooSmall { k: u32, j: usize, l: i64, min_k: u32 },
    #[error("polynomial is not holomorphic")]
    NotHolomorphic,
    #[error("polynomial is not monic of degree {m} in u")]
    NotMonic { m: u32 },
    #[error("invalid polynomial JSON: {0}")]
    Json(String),
}

impl MixedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(e: Exps, c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// Holomorphic polynomial from (coefficient, u-exponent, v-exponent) triples.
    pub fn holomorphic(terms: &[(i64, u32, u32)]) -> Self {
        let mut p = Self::zero();
        for &(c, i, j) in terms {
            p.add_term([i, 0, j, 0], Coeff::from_int(c));
        }
        p
    }

    pub fn add_term(&mut self, e: Exps, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&e) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_semiholomorphic(&self) -> bool {
        self.terms.keys().all(|e| e[1] == 0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|e| e[1] == 0 && e[3] == 0)
    }

    pub fn mode(&self) -> Mode {
        if self.terms.values().all(Coeff::is_exact) {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    pub fn u_degree(&self) -> u32 {
        self.terms.keys().map(|e| e[0] + e[1]).max().unwrap_or(0)
    }

    /// Radial support points (ν₁+μ₁, ν₂+μ₂), sorted and deduplicated.
    pub fn support_points(&self) -> Vec<(i64, i64)> {
        let set: BTreeSet<(i64, i64)> =
            self.terms.keys().map(|e| ((e[0] + e[1]) as i64, (e[2] + e[3]) as i64)).collect();
        set.into_iter().collect()
    }

    pub fn eval(&self, u: Complex64, v: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_c64() * u.powu(e[0]) * u.conj().powu(e[1]) * v.powu(e[2]) * v.conj().powu(e[3])
            })
            .sum()
    }

    /// For a polynomial without ū: coefficients of u^0..u^deg at the given v.
    pub fn u_coeffs_at(&self, v: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.u_degree() as usize + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] += c.to_c64() * v.powu(e[2]) * v.conj().powu(e[3]);
        }
        out
    }

    /// Coefficients in w of f(λw, v)/λ^d at v = r e^{it} for a semiholomorphic f
    /// monic of u-degree d, with ln λ returned alongside. λ is the Fujiwara
    /// scale of the coefficient moduli, computed in log space so that roots far
    /// below the f64 range still come out of order one.
    pub fn u_coeffs_log_scaled(&self, r: f64, t: f64) -> (Vec<Complex64>, f64) {
        let d = self.u_degree() as usize;
        let ln_r = r.ln();
        let log_mag = |e: &Exps, c: &Coeff| c.to_c64().norm().ln() + (e[2] + e[3]) as f64 * ln_r;
        let mut per_degree = vec![f64::NEG_INFINITY; d + 1];
        for (e, c) in &self.terms {
            let lm = log_mag(e, c);
            let acc = &mut per_degree[e[0] as usize];
            let hi = acc.max(lm);
            if hi > f64::NEG_INFINITY {
                *acc = hi + ((*acc - hi).exp() + (lm - hi).exp()).ln();
            }
        }
        let ln_lambda = (0..d)
            .filter(|&j| per_degree[j] > f64::NEG_INFINITY)
            .map(|j| per_degree[j] / (d - j) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let ln_lambda = if ln_lambda.is_finite() { ln_lambda } else { 0.0 };
        let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
        for (e, c) in &self.terms {
            let c = c.to_c64();
            if c.norm() == 0.0 {
                continue;
            }
            let j = e[0] as usize;
            let mag = (log_mag(e, &Coeff::Float(c)) + (j as f64 - d as f64) * ln_lambda).exp();
            let phase = Complex64::from_polar(1.0, (e[2] as f64 - e[3] as f64) * t);
            out[j] += c / c.norm() * mag * phase;
        }
        (out, ln_lambda)
    }

    pub fn scale(&self, s: &Coeff) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let names = ["u", "ubar", "v", "vbar"];
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .zip(names)
                    .filter(|(&k, _)| k > 0)
                    .map(|(&k, n)| if k == 1 { n.to_string() } else { format!("{n}^{k}") })
                    .collect();
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", mono.join("*"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "semiholomorphic": self.is_semiholomorphic(),
            "terms": self.terms.iter().map(|(e, c)| json!({
                "nu": [e[0], e[2]],
                "mu": [e[1], e[3]],
                "c": {"re": c.part_json(false), "im": c.part_json(true)},
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, MixedError> {
        let bad = |m: &str| MixedError::Json(m.to_string());
        let terms = v["terms"].as_array().ok_or_else(|| bad("missing terms array"))?;
        let pair = |x: &Value, name: &str| -> Result<[u32; 2], MixedError> {
            let a = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad(&format!("{name} must be [a, b]")))?;
            let get = |y: &Value| y.as_u64().map(|n| n as u32).ok_or_else(|| bad(&format!("{name} entries must be nonnegative integers")));
            Ok([get(&a[0])?, get(&a[1])?])
        };
        let mut p = Self::zero();
        for t in terms {
            let nu = pair(&t["nu"], "nu")?;
            let mu = pair(&t["mu"], "mu")?;
            let c = Coeff::from_json_parts(&t["c"]["re"], &t["c"]["im"]).map_err(MixedError::Json)?;
            p.add_term([nu[0], mu[0], nu[1], mu[1]], c);
        }
        if v["semiholomorphic"].as_bool() == Some(true) && !p.is_semiholomorphic() {
            return Err(bad("flagged semiholomorphic but has ubar terms"));
        }
        Ok(p)
    }
}

pub fn multiply(f: &MixedPolynomial, g: &MixedPolynomial) -> MixedPolynomial {
    let mut out = MixedPolynomial::zero();
    for (e1, c1) in &f.terms {
        for (e2, c2) in &g.terms {
            let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
            out.add_term(e, c1 * c2);
        }
    }
    out
}

/// Smallest k for which every exponent (s-j)k - |l|/2 is nonnegative.
pub fn rescale_min_k(fam: &SemiholoFamily) -> u32 {
    let mut k = 1;
    for (j, c) in fam.coeffs.iter().enumerate().take(fam.s) {
        let span = 2 * (fam.s - j) as i64;
        k = k.max(((c.max_abs_freq() + span - 1) / span) as u32);
    }
    k
}

/// c_l e^{ilt} u^j  ->  c_l u^j v^{(s-j)k + l/2} v̄^{(s-j)k - l/2}.
pub fn rescale_to_mixed(fam: &SemiholoFamily, k: u32) -> Result<MixedPolynomial, MixedError> {
    let mut out = MixedPolynomial::zero();
    for (j, c) in fam.coeffs.iter().enumerate() {
        let base = ((fam.s - j) as i64) * k as i64;
        for (&l, coeff) in &c.coeffs {
            if l % 2 != 0 {
                return Err(MixedError::Parity { j, l });
            }
            if base - l.abs() / 2 < 0 {
                return Err(MixedError::KTooSmall { k, j, l, min_k: rescale_min_k(fam) });
            }
            let e = [j as u32, 0, (base + l / 2) as u32, (base - l / 2) as u32];
            out.add_term(e, coeff.clone());
        }
    }
    Ok(out)
}

/// Radial weights with q₁ x + q₂ y = d on the whole support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RadialType {
    /// Primitive presentation (gcd(q₁, q₂) = 1).
    pub q1: u64,
    pub q2: u64,
    pub d: u64,
    /// Axis-intercept presentation (Y, X; XY) when the support line meets both
    /// axes at lattice points; this is the form (2sk, s; 2s²k) for p_{a,k}.
    pub raw: Option<(u64, u64, u64)>,
}

pub fn radial_type(f: &MixedPolynomial) -> Option<RadialType> {
    let pts = f.support_points();
    let (x0, y0) = *pts.first()?;
    let (q1, q2) = if pts.len() == 1 {
        (1, 1)
    } else {
        let (x1, y1) = pts[pts.len() - 1];
        let (dx, dy) = (x1 - x0, y1 - y0);
        if dx == 0 || dy == 0 || (dx > 0) == (dy > 0) {
            return None;
        }
        let g = dx.abs().gcd(&dy.abs());
        (dy.abs() / g, dx.abs() / g)
    };
    let d = q1 * x0 + q2 * y0;
    if d <= 0 || pts.iter().any(|&(x, y)| q1 * x + q2 * y != d) {
        return None;
    }
    let raw = (d % (q1 * q2) == 0).then(|| {
        let m = d / (q1 * q2);
        ((m * q1) as u64, (m * q2) as u64, (m * d) as u64)
    });
    Some(RadialType { q1: q1 as u64, q2: q2 as u64, d: d as u64, raw })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrdEntry {
    /// Exponent of u.
    pub j: u32,
    /// n_{m-j} = ord_v θ_j; None when θ_j vanishes.
    pub n: Option<u32>,
}

/// v-orders of the coefficients θ_j of q = u^m + sum_{j<m} θ_j(v) u^j.
pub fn ord_profile(q: &MixedPolynomial, m: u32) -> Result<Vec<OrdEntry>, MixedError> {
    if !q.is_holomorphic() {
        return Err(MixedError::NotHolomorphic);
    }
    let top: Vec<(&Exps, &Coeff)> = q.terms.iter().filter(|(e, _)| e[0] >= m).collect();
    if top.len() != 1 || *top[0].0 != [m, 0, 0, 0] || top[0].1.to_c64() != Complex64::new(1.0, 0.0) {
        return Err(MixedError::NotMonic { m });
    }
    Ok((0..m)
        .map(|j| OrdEntry { j, n: q.terms.keys().filter(|e| e[0] == j).map(|e| e[2]).min() })
        .collect())
}

/// n_m = ord_v θ₀ for q monic of its own u-degree.
pub fn n_m(q: &MixedPolynomial) -> Result<Option<u32>, MixedError> {
    let m = q.u_degree();
    Ok(ord_profile(q, m)?.first().and_then(|e| e.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braidfamily::{build_ga, figure_eight_family, tests::five_two_sq};
    use crate::coeff::q as rat;
    use crate::trigcurve::{ComponentCurve, StrandParametrization, TrigPolynomial};
    use rand::{Rng, SeedableRng};

    #[test]
    fn multiply_examples() {
        let u = MixedPolynomial::holomorphic(&[(1, 1, 0)]);
        let v = MixedPolynomial::holomorphic(&[(1, 0, 1)]);
        assert_eq!(multiply(&u, &v), MixedPolynomial::holomorphic(&[(1, 1, 1)]));
        let a = MixedPolynomial::holomorphic(&[(1, 1, 0), (1, 0, 1)]);
        let b = MixedPolynomial::holomorphic(&[(1, 1, 0), (-1, 0, 1)]);
        assert_eq!(multiply(&a, &b), MixedPolynomial::holomorphic(&[(1, 2, 0), (-1, 0, 2)]));
    }

    #[test]
    fn figure_eight_rescale_terms() {
        for k in 1..=3u32 {
            let p = rescale_to_mixed(&figure_eight_family(&rat(1, 2)), k).unwrap();
            let a2 = rat(1, 4);
            let want = Coeff::real(rat(3, 4) * &a2);
            assert_eq!(p.terms[&[1, 0, 2 * k + 1, 2 * k - 1]], want);
            assert_eq!(p.terms[&[1, 0, 2 * k - 1, 2 * k + 1]], -&want);
            assert_eq!(p.terms[&[3, 0, 0, 0]], Coeff::one());
            assert!(p.is_semiholomorphic());
        }
    }

    #[test]
    fn product_support_is_minkowski_sum() {
        let p = rescale_to_mixed(&figure_eight_family(&rat(1, 2)), 1).unwrap();
        let q = MixedPolynomial::holomorphic(&[(1, 2, 0), (1, 0, 14)]);
        let f = multiply(&p, &q);
        let mut want = BTreeSet::new();
        for a in p.terms.keys() {
            for b in q.terms.keys() {
                want.insert([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
            }
        }
        assert_eq!(f.terms.keys().copied().collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn parity_and_k_errors() {
        let sp = StrandParametrization {
            components: vec![ComponentCurve {
                s_c: 1,
                f: TrigPolynomial::cos(1, rat(1, 1)),
                g: TrigPolynomial::zero(),
            }],
        };
        let fam = build_ga(&sp, &rat(1, 1)).unwrap();
        assert!(matches!(rescale_to_mixed(&fam, 3), Err(MixedError::Parity { l: 1 | -1, .. })));
        let fam = build_ga(&five_two_sq(), &rat(1, 2)).unwrap();
        // u^0 carries frequency 10, so 3k >= 5 needs k >= 2
        assert_eq!(rescale_min_k(&fam), 2);
        assert!(matches!(rescale_to_mixed(&fam, 1), Err(MixedError::KTooSmall { min_k: 2, .. })));
        let p = rescale_to_mixed(&fam, 2).unwrap();
        assert_eq!(p.u_degree(), 3);
    }

    #[test]
    fn rescale_round_trip_on_unit_circle() {
        let fam = build_ga(&five_two_sq(), &rat(1, 2)).unwrap();
        let p = rescale_to_mixed(&fam, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..64 {
            let t = rng.gen_range(0.0..6.3);
            let u = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let v = Complex64::from_polar(1.0, t);
            assert!((p.eval(u, v) - fam.eval(u, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn radial_types() {
        for k in 1..=3u32 {
            let p = rescale_to_mixed(&figure_eight_family(&rat(1, 2)), k).unwrap();
            let rt = radial_type(&p).unwrap();
            assert_eq!(rt.raw, Some((6 * k as u64, 3, 18 * k as u64)));
            assert_eq!(rt.q1.gcd(&rt.q2), 1);
        }
        let cusp = MixedPolynomial::holomorphic(&[(1, 2, 0), (1, 0, 3)]);
        let rt = radial_type(&cusp).unwrap();
        assert_eq!((rt.q1, rt.q2, rt.d), (3, 2, 6));
        assert_eq!(radial_type(&MixedPolynomial::holomorphic(&[(1, 2, 0), (1, 0, 3), (1, 0, 7)])), None);
    }

    #[test]
    fn log_scaled_coefficients_match_direct() {
        let fam = build_ga(&five_two_sq(), &rat(1, 2)).unwrap();
        let f = rescale_to_mixed(&fam, 2).unwrap();
        for &(r, t) in &[(0.3, 0.0), (0.7, 1.1), (0.05, 4.0)] {
            let direct = f.u_coeffs_at(Complex64::from_polar(r, t));
            let (scaled, ln_l) = f.u_coeffs_log_scaled(r, t);
            let d = direct.len() - 1;
            for j in 0..=d {
                let back = scaled[j] * ((d - j) as f64 * ln_l).exp();
                assert!((back - direct[j]).norm() <= 1e-12 * (1.0 + direct[j].norm()), "{j} {back} {}", direct[j]);
            }
        }
        // far below the f64 range the scaled column stays of order one
        let (scaled, ln_l) = f.u_coeffs_log_scaled(1e-200, 0.3);
        assert!(ln_l < -700.0);
        assert!(scaled.iter().all(|c| c.norm().is_finite() && c.norm() <= 1.0 + 1e-12));
        assert!(scaled[..scaled.len() - 1].iter().any(|c| c.norm() > 1e-3));
    }

    #[test]
    fn ord_profiles() {
        let q = MixedPolynomial::holomorphic(&[(1, 4, 0), (-2, 2, 3), (-4, 1, 5), (-1, 0, 6), (-1, 0, 7)]);
        let prof = ord_profile(&q, 4).unwrap();
        assert_eq!(prof[0], OrdEntry { j: 0, n: Some(6) });
        assert_eq!(prof[1], OrdEntry { j: 1, n: Some(5) });
        assert_eq!(prof[2], OrdEntry { j: 2, n: Some(3) });
        assert_eq!(prof[3], OrdEntry { j: 3, n: None });
        assert_eq!(n_m(&MixedPolynomial::holomorphic(&[(1, 2, 0), (1, 0, 9)])).unwrap(), Some(9));
        assert_eq!(n_m(&MixedPolynomial::holomorphic(&[(1, 1, 0)])).unwrap(), None);
        assert!(ord_profile(&MixedPolynomial::holomorphic(&[(2, 2, 0), (1, 0, 3)]), 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = rescale_to_mixed(&figure_eight_family(&rat(1, 2)), 1).unwrap();
        let v = p.to_json();
        assert_eq!(v["semiholomorphic"], json!(true));
        assert_eq!(MixedPolynomial::from_json(&v).unwrap(), p);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = MixedPolynomial> {
            prop::collection::vec(((0u32..3, 0u32..2, 0u32..3, 0u32..2), -3i64..4, 1i64..4), 0..5).prop_map(|ts| {
                let mut p = MixedPolynomial::zero();
                for ((a, b, c, d), n, den) in ts {
                    p.add_term([a, b, c, d], Coeff::rational(rat(n, den), rat(1 - n, den)));
                }
                p
            })
        }

        proptest! {
            #[test]
            fn multiply_commutes_and_associates(f in poly(), g in poly(), h in poly()) {
                prop_assert_eq!(multiply(&f, &g), multiply(&g, &f));
                prop_assert_eq!(multiply(&multiply(&f, &g), &h), multiply(&f, &multiply(&g, &h)));
            }
        }
    }
}
