//! Exact projections and linear minimization oracles for boxes, Euclidean
//! balls and the unit simplex.
//!
//! LMO ties are broken deterministically: zero gradient components select the
//! lower bound of a box, a zero gradient selects the center of a ball, and the
//! smallest index wins on the simplex.

use crate::error::{contract, Result};
use crate::problem::{check_dim, FeasibleSet, Vector};

fn fingerprint_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
    parts.join(",")
}

/// `{x : lower <= x <= upper}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim("upper bound", upper.len(), lower.len())?;
        if lower.is_empty() {
            return Err(contract("box dimension must be positive"));
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(contract("box bounds must be finite"));
        }
        if lower.iter().zip(upper.iter()).any(|(lo, hi)| lo > hi) {
            return Err(contract("box requires lower <= upper componentwise"));
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vector::from_element(dim, lo), Vector::from_element(dim, hi))
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }
}

/// `{x : |x - center| <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSet {
    center: Vector,
    radius: f64,
}

impl BallSet {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(contract("ball dimension must be positive"));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(contract("ball center must be finite"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(contract(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// The unit simplex `{x >= 0, sum x = 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexSet {
    dim: usize,
}

impl SimplexSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(contract("simplex dimension must be at least 1"));
        }
        Ok(Self { dim })
    }

    pub fn barycenter(&self) -> Vector {
        Vector::from_element(self.dim, 1.0 / self.dim as f64)
    }

    pub fn vertex(&self, i: usize) -> Vector {
        let mut e = Vector::zeros(self.dim);
        e[i] = 1.0;
        e
    }
}

pub fn project_box(x: &Vector, set: &BoxSet) -> Result<Vector> {
    check_dim("point", x.len(), set.lower.len())?;
    Ok(Vector::from_iterator(
        x.len(),
        x.iter()
            .zip(set.lower.iter().zip(set.upper.iter()))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi)),
    ))
}

pub fn project_ball(x: &Vector, set: &BallSet) -> Result<Vector> {
    check_dim("point", x.len(), set.center.len())?;
    let offset = x - &set.center;
    let dist = offset.norm();
    if dist <= set.radius {
        return Ok(x.clone());
    }
    Ok(&set.center + offset * (set.radius / dist))
}

/// Sort-and-threshold projection onto the unit simplex.
pub fn project_simplex(x: &Vector, set: &SimplexSet) -> Result<Vector> {
    check_dim("point", x.len(), set.dim)?;
    let mut sorted: Vec<f64> = x.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut threshold = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    Ok(x.map(|v| (v - threshold).max(0.0)))
}

pub fn lmo_box(g: &Vector, set: &BoxSet) -> Result<Vector> {
    check_dim("gradient", g.len(), set.lower.len())?;
    Ok(Vector::from_iterator(
        g.len(),
        g.iter()
            .zip(set.lower.iter().zip(set.upper.iter()))
            .map(|(&gi, (&lo, &hi))| if gi < 0.0 { hi } else { lo }),
    ))
}

pub fn lmo_ball(g: &Vector, set: &BallSet) -> Result<Vector> {
    check_dim("gradient", g.len(), set.center.len())?;
    let norm = g.norm();
    if norm > 0.0 {
        Ok(&set.center - g * (set.radius / norm))
    } else {
        Ok(set.center.clone())
    }
}

pub fn lmo_simplex(g: &Vector, set: &SimplexSet) -> Result<Vector> {
    check_dim("gradient", g.len(), set.dim)?;
    let mut best = 0;
    for (i, &gi) in g.iter().enumerate().skip(1) {
        if gi < g[best] {
            best = i;
        }
    }
    Ok(set.vertex(best))
}

impl FeasibleSet for BoxSet {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    fn diameter(&self) -> Option<f64> {
        Some((&self.upper - &self.lower).norm())
    }

    fn has_projection(&self) -> bool {
        true
    }

    fn has_lmo(&self) -> bool {
        true
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        project_box(x, self)
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        lmo_box(g, self)
    }

    fn fingerprint(&self) -> String {
        format!(
            "box[{}|{}]",
            fingerprint_vec(&self.lower),
            fingerprint_vec(&self.upper)
        )
    }
}

impl FeasibleSet for BallSet {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim() && (x - &self.center).norm() <= self.radius + tol
    }

    fn diameter(&self) -> Option<f64> {
        Some(2.0 * self.radius)
    }

    fn has_projection(&self) -> bool {
        true
    }

    fn has_lmo(&self) -> bool {
        true
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        project_ball(x, self)
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        lmo_ball(g, self)
    }

    fn fingerprint(&self) -> String {
        format!(
            "ball[{}|{:016x}]",
            fingerprint_vec(&self.center),
            self.radius.to_bits()
        )
    }
}

impl FeasibleSet for SimplexSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim && x.iter().all(|&v| v >= -tol) && (x.sum() - 1.0).abs() <= tol
    }

    fn diameter(&self) -> Option<f64> {
        Some(if self.dim >= 2 { std::f64::consts::SQRT_2 } else { 0.0 })
    }

    fn has_projection(&self) -> bool {
        true
    }

    fn has_lmo(&self) -> bool {
        true
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        project_simplex(x, self)
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        lmo_simplex(g, self)
    }

    fn fingerprint(&self) -> String {
        format!("simplex[{}]", self.dim)
    }
}
