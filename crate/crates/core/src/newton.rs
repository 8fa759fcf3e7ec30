//! Radial Newton boundary of a mixed polynomial in two variables, face
//! functions, and the boundary of a product p_{a,k} q.

use std::io::Write;

use num_integer::Integer;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mixedpoly::{n_m, MixedError, MixedPolynomial};

pub type Point = (i64, i64);

/// Positive weight vector, stored primitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeightVector {
    pub p1: i64,
    pub p2: i64,
    /// gcd of the vector as originally given.
    pub multiple: i64,
}

impl WeightVector {
    pub fn new(p1: i64, p2: i64) -> Self {
        assert!(p1 > 0 && p2 > 0, "weight vector must be positive");
        let g = p1.gcd(&p2);
        Self { p1: p1 / g, p2: p2 / g, multiple: g }
    }

    pub fn rdeg(&self, (x, y): Point) -> i64 {
        self.p1 * x + self.p2 * y
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Endpoint with the larger x.
    pub from: Point,
    pub to: Point,
    pub normal: WeightVector,
    pub d: i64,
    /// Support points on the face, collinear ones included, decreasing x.
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonBoundary {
    /// Extreme points of the lower-left hull, decreasing x.
    pub vertices: Vec<Point>,
    pub faces: Vec<Face>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewtonError {
    #[error("k = {k} is below the minimal k = {min_k} for this q")]
    KBelowMin { k: u32, min_k: u32 },
    #[error("q has no pure power of v (n_m undefined)")]
    NoPureV,
    #[error(transparent)]
    Mixed(#[from] MixedError),
}

fn cross(o: Point, a: Point, b: Point) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn face_between(from: Point, to: Point, support: &[Point]) -> Face {
    let normal = WeightVector::new(to.1 - from.1, from.0 - to.0);
    let d = normal.rdeg(from);
    let mut points: Vec<Point> = support.iter().copied().filter(|&p| normal.rdeg(p) == d).collect();
    points.sort_by(|a, b| b.cmp(a));
    Face { from, to, normal, d, points }
}

/// Lower-left hull of support + R²≥0, exact integer arithmetic.
pub fn boundary_of_points(support: &[Point]) -> NewtonBoundary {
    assert!(!support.is_empty(), "Newton boundary of the zero polynomial");
    let mut pts = support.to_vec();
    pts.sort();
    pts.dedup_by_key(|p| p.0);
    let min_y = pts.iter().map(|p| p.1).min().unwrap();
    let end = pts.iter().position(|p| p.1 == min_y).unwrap();
    let mut chain: Vec<Point> = Vec::new();
    for &p in &pts[..=end] {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0 {
            chain.pop();
        }
        chain.push(p);
    }
    chain.reverse();
    let faces = chain.windows(2).map(|w| face_between(w[0], w[1], support)).collect();
    NewtonBoundary { vertices: chain, faces }
}

pub fn newton_boundary(f: &MixedPolynomial) -> NewtonBoundary {
    boundary_of_points(&f.support_points())
}

impl NewtonBoundary {
    /// Boundary through the given vertices (decreasing x); face point lists
    /// hold only the endpoints.
    pub fn from_vertices(vertices: Vec<Point>) -> Self {
        let faces = vertices.windows(2).map(|w| face_between(w[0], w[1], w)).collect();
        Self { vertices, faces }
    }

    pub fn shifted(&self, dx: i64, dy: i64) -> Self {
        let sh = |p: Point| (p.0 + dx, p.1 + dy);
        Self {
            vertices: self.vertices.iter().map(|&p| sh(p)).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| Face {
                    from: sh(f.from),
                    to: sh(f.to),
                    normal: f.normal,
                    d: f.normal.rdeg(sh(f.from)),
                    points: f.points.iter().map(|&p| sh(p)).collect(),
                })
                .collect(),
        }
    }

    /// Equality of vertices and faces, ignoring face point lists.
    pub fn same_polygon(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.faces.len() == other.faces.len()
            && self.faces.iter().zip(&other.faces).all(|(a, b)| {
                (a.from, a.to, a.normal.p1, a.normal.p2, a.d) == (b.from, b.to, b.normal.p1, b.normal.p2, b.d)
            })
    }

    /// A weight exposing only the given vertex: the sum of the adjacent face
    /// normals, or a tilt of the single adjacent normal at an end.
    pub fn vertex_weight(&self, i: usize) -> WeightVector {
        let n = self.vertices.len();
        let normal = |j: usize| (self.faces[j].normal.p1, self.faces[j].normal.p2);
        let (a, b) = match (i, n) {
            (_, 1) => (1, 1),
            (0, _) => {
                let (p1, p2) = normal(0);
                (p1, p2 + 1)
            }
            (i, n) if i == n - 1 => {
                let (p1, p2) = normal(i - 1);
                (p1 + 1, p2)
            }
            (i, _) => {
                let (p1, p2) = normal(i - 1);
                let (q1, q2) = normal(i);
                (p1 + q1, p2 + q2)
            }
        };
        WeightVector::new(a, b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>(),
            "faces": self.faces.iter().map(|f| json!({
                "from": [f.from.0, f.from.1],
                "to": [f.to.0, f.to.1],
                "normal": [f.normal.p1, f.normal.p2],
                "d": f.d,
                "points": f.points.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn d_of(f: &MixedPolynomial, p: &WeightVector) -> i64 {
    f.support_points().into_iter().map(|q| p.rdeg(q)).min().expect("zero polynomial")
}

/// Terms of minimal radial P-degree.
pub fn face_function(f: &MixedPolynomial, p: &WeightVector) -> MixedPolynomial {
    let d = d_of(f, p);
    let mut out = MixedPolynomial::zero();
    for (e, c) in &f.terms {
        if p.rdeg(((e[0] + e[1]) as i64, (e[2] + e[3]) as i64)) == d {
            out.add_term(*e, c.clone());
        }
    }
    out
}

pub fn is_convenient(f: &MixedPolynomial) -> bool {
    let pts = f.support_points();
    pts.iter().any(|p| p.1 == 0) && pts.iter().any(|p| p.0 == 0)
}

/// Whether the segment [(s, n_m), (0, 2sk + n_m)] stays on the boundary of
/// the product in the presence of the monomial u^ν₁ v^ν₂ of q. Every
/// inequality is multiplied through by s + ν₁.
fn product_conditions(s: i64, k: i64, n_m: i64, (nu1, nu2): Point) -> bool {
    let c1a = n_m < 2 * k * nu1 + nu2;
    let c1b = n_m * (s + nu1) < 2 * s * k * nu1 + n_m * nu1 + s * nu2;
    let c2a = 2 * k * (s - nu1) + n_m < 2 * s * k + nu2;
    let lhs = (2 * k * (s - nu1) + n_m) * (s + nu1);
    let rhs = 2 * s * s * k + n_m * s + nu1 * nu2;
    // at ν₁ = 0 both sides equal the top vertex; the inequality is an identity there
    let c2b = if nu1 == 0 { lhs <= rhs } else { lhs < rhs };
    let c3 = 2 * s * k + n_m < 2 * k * (s + nu1) + nu2;
    c1a && c1b && c2a && c2b && c3
}

/// Smallest k for which every monomial of q other than v^{n_m} satisfies
/// the product conditions.
pub fn min_k(s: usize, n_m: u32, q_support: &[Point]) -> u32 {
    let others: Vec<Point> = q_support.iter().copied().filter(|&p| p != (0, n_m as i64)).collect();
    (1u32..)
        .find(|&k| others.iter().all(|&p| product_conditions(s as i64, k as i64, n_m as i64, p)))
        .unwrap()
}

/// Γ(q) shifted by (s, 0) joined with the segment [(s, n_m), (0, 2sk + n_m)].
pub fn predict_product_boundary(s: usize, k: u32, q: &MixedPolynomial) -> Result<NewtonBoundary, NewtonError> {
    let nm = n_m(q)?.ok_or(NewtonError::NoPureV)?;
    let mk = min_k(s, nm, &q.support_points());
    if k < mk {
        return Err(NewtonError::KBelowMin { k, min_k: mk });
    }
    let s = s as i64;
    let mut vertices = newton_boundary(q).shifted(s, 0).vertices;
    vertices.push((0, 2 * s * k as i64 + nm as i64));
    Ok(NewtonBoundary::from_vertices(vertices))
}

pub fn write_support_csv<W: Write>(f: &MixedPolynomial, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "nu1", "mu1", "nu2", "mu2", "re", "im"])?;
    for (e, c) in &f.terms {
        let z = c.to_c64();
        out.write_record([
            (e[0] + e[1]).to_string(),
            (e[2] + e[3]).to_string(),
            e[0].to_string(),
            e[1].to_string(),
            e[2].to_string(),
            e[3].to_string(),
            z.re.to_string(),
            z.im.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
