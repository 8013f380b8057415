//! Finite-dimensional normed spaces `ℓ₁ⁿ`, `ℓ₂ⁿ`, `ℓ∞ⁿ` and their declared
//! infratype parameters.
//!
//! A space has infratype `p` with constant `C` when, for every finite family
//! `x₁, …, xₙ`,
//!
//! ```text
//! min over signs αᵢ = ±1 of ‖Σ αᵢ xᵢ‖  ≤  C · (Σ ‖xᵢ‖ᵖ)^(1/p).
//! ```
//!
//! The declaration is trusted input. [`crate::balance`] can only lower-bound
//! the best constant empirically.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            Norm::L1 => diffs.map(f64::abs).sum(),
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Linf => diffs.fold(0.0, |m, d| m.max(d.abs())),
        }
    }

    /// Norm of the dual space, used to scale projections so that
    /// `|⟨w, v⟩| ≤ ‖v‖` whenever `dual(w) ≤ 1`.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::invalid(format!("unknown norm {other:?}"))),
        }
    }
}

/// Declared infratype `(p, C)` with `1 < p ≤ 2`, `C > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Infratype {
    p: f64,
    c: f64,
}

impl Infratype {
    pub fn new(p: f64, c: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::invalid(format!(
                "infratype exponent must lie in (1, 2], got {p}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!(
                "infratype constant must be positive, got {c}"
            )));
        }
        Ok(Infratype { p, c })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Selection constant `C₁ = 2C / (2^(1-1/p) - 1)`.
    pub fn c1(&self) -> f64 {
        2.0 * self.c / ((1.0 - 1.0 / self.p).exp2() - 1.0)
    }
}

/// `C₁ = 2C / (2^(1-1/p) - 1)` for raw parameters; rejects `p ≤ 1` where
/// the denominator vanishes.
pub fn c1_from(p: f64, c: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!(
            "C1 diverges for p <= 1 (got p = {p})"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    Ok(2.0 * c / ((1.0 - 1.0 / p).exp2() - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub struct SpaceDescriptor {
    dim: usize,
    norm: Norm,
    infratype: Option<Infratype>,
}

impl SpaceDescriptor {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("space dimension must be at least 1"));
        }
        Ok(SpaceDescriptor {
            dim,
            norm,
            infratype: None,
        })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(dim, Norm::L1)
    }

    pub fn l2(dim: usize) -> Result<Self> {
        Self::new(dim, Norm::L2)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, Norm::Linf)
    }

    pub fn with_infratype(mut self, p: f64, c: f64) -> Result<Self> {
        self.infratype = Some(Infratype::new(p, c)?);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn infratype(&self) -> Option<Infratype> {
        self.infratype
    }

    /// Same dimension and norm; the infratype declaration is metadata and
    /// does not change the geometry.
    pub fn same_geometry(&self, other: &SpaceDescriptor) -> bool {
        self.dim == other.dim && self.norm == other.norm
    }

    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::invalid(format!(
                "vector has dimension {} but the space has dimension {}",
                v.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Unchecked norm of a coordinate slice.
    #[inline]
    pub fn norm_of(&self, v: &[f64]) -> f64 {
        self.norm.of(v)
    }

    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm.dist(a, b)
    }

    pub fn c1_constant(&self) -> Result<f64> {
        self.infratype
            .map(|it| it.c1())
            .ok_or_else(|| Error::Unsupported("C1 requires a declared infratype".into()))
    }
}

/// Norm of `v` in `space`.
pub fn norm(space: &SpaceDescriptor, v: &Vector) -> Result<f64> {
    space.check_vector(v)?;
    Ok(space.norm_of(v.coords()))
}

/// `C₁` of a space with declared infratype.
pub fn c1_constant(space: &SpaceDescriptor) -> Result<f64> {
    space.c1_constant()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSpec {
    dim: usize,
    norm: Norm,
    #[serde(default)]
    infratype: Option<[f64; 2]>,
}

impl TryFrom<SpaceSpec> for SpaceDescriptor {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Self> {
        let space = SpaceDescriptor::new(spec.dim, spec.norm)?;
        match spec.infratype {
            Some([p, c]) => space.with_infratype(p, c),
            None => Ok(space),
        }
    }
}

impl From<SpaceDescriptor> for SpaceSpec {
    fn from(s: SpaceDescriptor) -> Self {
        SpaceSpec {
            dim: s.dim,
            norm: s.norm,
            infratype: s.infratype.map(|it| [it.p, it.c]),
        }
    }
}

/// A point with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("vector must have at least one coordinate"));
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "vector coordinate {x} is not finite"
            )));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// `i`-th standard basis vector (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
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
        v.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
