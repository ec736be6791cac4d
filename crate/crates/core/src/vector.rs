//! Dense vectors, extended reals, the generalized inverse `x ↦ x/‖x‖²`, and
//! central finite-difference oracles.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `dim × dim` (or `m × n`) real matrix.
pub type Matrix = DMatrix<f64>;

/// Threshold below which a vector norm is treated as zero.
pub const EPS_NORM: f64 = 1e-14;

/// Default step for central finite differences.
pub const FD_STEP: f64 = 1e-5;

/// A nonempty vector of finite doubles.
///
/// Arithmetic operators do not re-check finiteness; values leaving the
/// library's operators (projections, solver iterates) are validated.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("vector must have dimension ≥ 1".into()));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("vector component {bad}")));
        }
        Ok(Vector(DVector::from_vec(components)))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    /// One-dimensional vector holding `value`.
    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector must have dimension ≥ 1");
        Vector(DVector::zeros(dim))
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn try_from_dvector(v: DVector<f64>) -> Result<Self> {
        Self::new(v.iter().copied().collect())
    }

    pub(crate) fn from_dvector(v: DVector<f64>) -> Self {
        debug_assert!(v.len() >= 1);
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// First component; the natural accessor for one-dimensional problems.
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Returns `self` unchanged if every component is finite.
    pub fn ensure_finite(self, context: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(&self.0 * c)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &Vector) -> Vector {
        Vector(&self.0 + &other.0 * c)
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Vector {
        Vector(self.0.map(f))
    }

    /// Matrix–vector product `m·self`.
    pub fn transform(&self, m: &Matrix) -> Vector {
        Vector(m * &self.0)
    }

    /// Matrix–vector product `mᵀ·self`.
    pub fn transform_transpose(&self, m: &Matrix) -> Vector {
        Vector(m.tr_mul(&self.0))
    }

    /// Outer product `self · otherᵀ`.
    pub fn outer(&self, other: &Vector) -> Matrix {
        &self.0 * other.0.transpose()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got: self.dim() })
        }
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.to_vec()
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        self.scale(rhs)
    }
}

/// A value in `]−∞, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    /// Maps `+∞` to `PlusInfinity`; rejects NaN and `−∞`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::NonFinite("NaN function value".into()))
        } else if value == f64::INFINITY {
            Ok(ExtReal::PlusInfinity)
        } else if value == f64::NEG_INFINITY {
            Err(Error::NonFinite("function value −∞".into()))
        } else {
            Ok(ExtReal::Finite(value))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PlusInfinity => None,
        }
    }

    /// The value as an `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PlusInfinity) => Some(Ordering::Less),
            (ExtReal::PlusInfinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PlusInfinity, ExtReal::PlusInfinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// Generalized inverse `x ↦ x/‖x‖²`, an involution of the punctured space.
pub fn inv(x: &Vector) -> Result<Vector> {
    let n2 = x.norm_sq();
    let norm = n2.sqrt();
    if norm <= EPS_NORM {
        return Err(Error::ZeroVector { norm });
    }
    Ok(x.scale(1.0 / n2))
}

/// Derivative of [`inv`]: `‖x‖⁻² I − 2·(inv x)(inv x)ᵀ`.
pub fn inv_jacobian(x: &Vector) -> Result<Matrix> {
    let ix = inv(x)?;
    let n = x.dim();
    Ok(Matrix::identity(n, n) / x.norm_sq() - ix.outer(&ix) * 2.0)
}

/// Central-difference Jacobian; column `i` is `(g(x+h eᵢ) − g(x−h eᵢ))/(2h)`.
pub fn fd_jacobian<F, E>(g: F, x: &Vector, h: f64) -> std::result::Result<Matrix, E>
where
    F: Fn(&Vector) -> std::result::Result<Vector, E>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = x.dim();
    let mut columns = Vec::with_capacity(n);
    for i in 0..n {
        let e = Vector::basis(n, i);
        let plus = g(&x.add_scaled(h, &e))?;
        let minus = g(&x.add_scaled(-h, &e))?;
        columns.push((&plus - &minus).scale(0.5 / h));
    }
    let m = columns.first().map_or(0, Vector::dim);
    Ok(Matrix::from_fn(m, n, |r, c| columns[c].get(r)))
}

/// Central-difference gradient of a scalar map.
pub fn fd_gradient<F, E>(g: F, x: &Vector, h: f64) -> std::result::Result<Vector, E>
where
    F: Fn(&Vector) -> std::result::Result<f64, E>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = x.dim();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let e = Vector::basis(n, i);
        let plus = g(&x.add_scaled(h, &e))?;
        let minus = g(&x.add_scaled(-h, &e))?;
        grad.push((plus - minus) * 0.5 / h);
    }
    Ok(Vector::from_dvector(DVector::from_vec(grad)))
}

/// Largest absolute entry; used for matrix comparisons in diagnostics.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
