//! Complex coefficients that are either exact (big rationals) or floating point.
//!
//! Arithmetic between two exact values stays exact; anything touching a float
//! promotes to float.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

pub type Q = BigRational;
pub type QComplex = Complex<BigRational>;

#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact(QComplex),
    Float(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    // numer/denom can overflow f64 individually for large exact values
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = x.denom().bits().max(x.numer().bits()) as i64 - 900;
            let scale = BigInt::one() << (shift.max(0) as usize);
            let n = (x.numer() / &scale).to_f64().unwrap_or(0.0);
            let d = (x.denom() / &scale).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Parses "p/q", "p", or a plain integer string.
pub fn parse_q(text: &str) -> Option<Q> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => text.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(QComplex::new(Q::zero(), Q::zero()))
    }

    pub fn one() -> Self {
        Coeff::Exact(QComplex::new(Q::one(), Q::zero()))
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::Exact(QComplex::new(Q::from_integer(n.into()), Q::zero()))
    }

    pub fn rational(re: Q, im: Q) -> Self {
        Coeff::Exact(QComplex::new(re, im))
    }

    pub fn real(re: Q) -> Self {
        Coeff::Exact(QComplex::new(re, Q::zero()))
    }

    pub fn float(re: f64, im: f64) -> Self {
        Coeff::Float(Complex64::new(re, im))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Coeff::Exact(_) => Mode::Exact,
            Coeff::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(c) => c.re.is_zero() && c.im.is_zero(),
            Coeff::Float(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Coeff::Exact(c) => Complex64::new(q_to_f64(&c.re), q_to_f64(&c.im)),
            Coeff::Float(c) => *c,
        }
    }

    pub fn to_float(&self) -> Coeff {
        Coeff::Float(self.to_c64())
    }

    /// Exact copy of the value; floats are converted without rounding.
    pub fn to_exact(&self) -> QComplex {
        match self {
            Coeff::Exact(c) => c.clone(),
            Coeff::Float(c) => QComplex::new(
                Q::from_float(c.re).unwrap_or_else(Q::zero),
                Q::from_float(c.im).unwrap_or_else(Q::zero),
            ),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn conj(&self) -> Coeff {
        match self {
            Coeff::Exact(c) => Coeff::Exact(c.conj()),
            Coeff::Float(c) => Coeff::Float(c.conj()),
        }
    }

    /// Multiplies by i * n.
    pub fn mul_i_int(&self, n: i64) -> Coeff {
        match self {
            Coeff::Exact(c) => {
                let n = Q::from_integer(n.into());
                Coeff::Exact(QComplex::new(-&c.im * &n, &c.re * &n))
            }
            Coeff::Float(c) => Coeff::Float(c * Complex64::new(0.0, n as f64)),
        }
    }

    pub fn div_int(&self, n: i64) -> Coeff {
        match self {
            Coeff::Exact(c) => {
                let n = Q::from_integer(n.into());
                Coeff::Exact(QComplex::new(&c.re / &n, &c.im / &n))
            }
            Coeff::Float(c) => Coeff::Float(c / n as f64),
        }
    }

    pub fn scale_q(&self, s: &Q) -> Coeff {
        match self {
            Coeff::Exact(c) => Coeff::Exact(QComplex::new(&c.re * s, &c.im * s)),
            Coeff::Float(c) => Coeff::Float(c * q_to_f64(s)),
        }
    }

    pub fn pow(&self, n: u32) -> Coeff {
        let mut out = Coeff::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// JSON encoding of one real part: exact as "p/q" string, float as number.
    pub fn part_json(&self, imag: bool) -> Value {
        match self {
            Coeff::Exact(c) => Value::String(fmt_q(if imag { &c.im } else { &c.re })),
            Coeff::Float(c) => serde_json::json!(if imag { c.im } else { c.re }),
        }
    }

    pub fn from_json_parts(re: &Value, im: &Value) -> Result<Coeff, String> {
        match (re, im) {
            (Value::String(a), Value::String(b)) => {
                let a = parse_q(a).ok_or_else(|| format!("bad rational {a:?}"))?;
                let b = parse_q(b).ok_or_else(|| format!("bad rational {b:?}"))?;
                Ok(Coeff::rational(a, b))
            }
            _ => {
                let a = json_f64(re)?;
                let b = json_f64(im)?;
                Ok(Coeff::float(a, b))
            }
        }
    }
}

fn json_f64(v: &Value) -> Result<f64, String> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| "bad number".to_string()),
        Value::String(s) => parse_q(s)
            .map(|x| q_to_f64(&x))
            .ok_or_else(|| format!("bad rational {s:?}")),
        other => Err(format!("expected number or rational string, got {other}")),
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(c) => {
                if c.im.is_zero() {
                    write!(f, "{}", fmt_q(&c.re))
                } else if c.re.is_zero() {
                    write!(f, "{}i", fmt_q(&c.im))
                } else {
                    let sign = if c.im.is_negative() { "-" } else { "+" };
                    write!(f, "({} {} {}i)", fmt_q(&c.re), sign, fmt_q(&c.im.abs()))
                }
            }
            Coeff::Float(c) => write!(f, "({:e} {:+e}i)", c.re, c.im),
        }
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a + b),
            _ => Coeff::Float(self.to_c64() + rhs.to_c64()),
        }
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a - b),
            _ => Coeff::Float(self.to_c64() - rhs.to_c64()),
        }
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a * b),
            _ => Coeff::Float(self.to_c64() * rhs.to_c64()),
        }
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        match self {
            Coeff::Exact(a) => Coeff::Exact(-a.clone()),
            Coeff::Float(a) => Coeff::Float(-a),
        }
    }
}
