//! Primitive length-holonomy data and classification of loxodromic elements.
//!
//! A loxodromic element of SO(3,1)° is conjugate to the normal form
//! `exp_cartan(b, a)`: a boost of length `a > 0` along e₃ composed with a
//! rotation by `b` in the (e₁, e₂) plane. Its eigenvalues are `e^{±a}` and
//! `e^{±ib}`, so a bare matrix determines `b` only up to `b ↔ 2π - b`;
//! [`classify`] reports the representative in `[0, π]`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector4;
use thiserror::Error;

use crate::lie::{exp_cartan, CartanParams, Mat4, ALGEBRA_TOL};
use crate::multiset::RealMultiset;

/// Clustering tolerance for `(length, holonomy)` pairs.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// A matrix is loxodromic when its spectral radius exceeds `1 + LOXODROMIC_EPS`.
pub const LOXODROMIC_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error("matrix is not in SO(3,1)°: {reason}")]
    NotInGroup { reason: String },
    #[error("element is not loxodromic (spectral radius {spectral_radius})")]
    NotLoxodromic { spectral_radius: f64 },
    #[error("{0}")]
    Domain(String),
}

/// One primitive conjugacy class with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveClass {
    length: f64,
    holonomy: f64,
    multiplicity: u32,
}

impl PrimitiveClass {
    pub fn new(length: f64, holonomy: f64, multiplicity: u32) -> Result<Self, GeodesicError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GeodesicError::Domain(format!("length must be positive, got {length}")));
        }
        if !(holonomy.is_finite() && (0.0..TAU).contains(&holonomy)) {
            return Err(GeodesicError::Domain(format!("holonomy must lie in [0, 2π), got {holonomy}")));
        }
        if multiplicity == 0 {
            return Err(GeodesicError::Domain("multiplicity must be at least 1".into()));
        }
        Ok(PrimitiveClass { length, holonomy, multiplicity })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn holonomy(&self) -> f64 {
        self.holonomy
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn with_multiplicity(&self, multiplicity: u32) -> Result<Self, GeodesicError> {
        Self::new(self.length, self.holonomy, multiplicity)
    }

    /// The class of the inverse element.
    pub fn inverse(&self) -> Self {
        let (length, holonomy) = inverse_class(self.length, self.holonomy).expect("valid class");
        PrimitiveClass { length, holonomy, multiplicity: self.multiplicity }
    }

    /// Holonomy ratio `min(b, 2π - b) / a`, invariant under inversion.
    pub fn ratio(&self) -> f64 {
        canonical_holonomy(self.holonomy) / self.length
    }

    fn matches(&self, length: f64, holonomy: f64) -> bool {
        (self.length - length).abs() <= SPECTRUM_TOL && (self.holonomy - holonomy).abs() <= SPECTRUM_TOL
    }
}

/// The normal-form invariants of a (not necessarily primitive) class `δʲ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassInvariant {
    pub length: f64,
    pub holonomy: f64,
    pub primitive_power: u32,
}

/// A finite multiset of primitive classes in canonical order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    classes: Vec<PrimitiveClass>,
}

impl Spectrum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sorts by `(length, holonomy)` and merges pairs within `SPECTRUM_TOL`.
    pub fn from_classes<I: IntoIterator<Item = PrimitiveClass>>(classes: I) -> Self {
        let mut sorted: Vec<PrimitiveClass> = classes.into_iter().collect();
        sorted.sort_by(|x, y| x.length.total_cmp(&y.length).then(x.holonomy.total_cmp(&y.holonomy)));
        sorted.into_iter().fold(Spectrum::new(), |spec, cls| spec.merge(cls))
    }

    pub fn classes(&self) -> &[PrimitiveClass] {
        &self.classes
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrimitiveClass> {
        self.classes.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Number of distinct classes.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.classes.iter().map(|c| u64::from(c.multiplicity)).sum()
    }

    /// Adds `cls`, merging into an existing entry within `SPECTRUM_TOL`.
    pub fn merge(&self, cls: PrimitiveClass) -> Spectrum {
        let mut classes = self.classes.clone();
        if let Some(existing) = classes.iter_mut().find(|c| c.matches(cls.length, cls.holonomy)) {
            existing.multiplicity += cls.multiplicity;
        } else {
            let at = classes.partition_point(|c| {
                c.length.total_cmp(&cls.length).then(c.holonomy.total_cmp(&cls.holonomy)).is_lt()
            });
            classes.insert(at, cls);
        }
        Spectrum { classes }
    }

    /// Multiset sum.
    pub fn union(&self, other: &Spectrum) -> Spectrum {
        other.classes.iter().fold(self.clone(), |spec, &c| spec.merge(c))
    }

    /// Multiset difference `self ∖ other`, matching classes within `SPECTRUM_TOL`.
    pub fn difference(&self, other: &Spectrum) -> Spectrum {
        let classes = self
            .classes
            .iter()
            .filter_map(|c| {
                let removed: u32 = other
                    .classes
                    .iter()
                    .filter(|o| c.matches(o.length, o.holonomy))
                    .map(|o| o.multiplicity)
                    .sum();
                c.multiplicity.checked_sub(removed).filter(|&m| m > 0).map(|m| PrimitiveClass {
                    multiplicity: m,
                    ..*c
                })
            })
            .collect();
        Spectrum { classes }
    }

    /// Replaces every class by its inverse.
    pub fn inverse(&self) -> Spectrum {
        Spectrum::from_classes(self.classes.iter().map(PrimitiveClass::inverse))
    }

    /// The length multiset, with multiplicity.
    pub fn lengths(&self, tol: f64) -> RealMultiset {
        RealMultiset::from_weighted(self.classes.iter().map(|c| (c.length, c.multiplicity)), tol)
    }

    /// The multiset of ratios `min(b, 2π - b) / a`.
    pub fn ratios(&self, tol: f64) -> RealMultiset {
        RealMultiset::from_weighted(self.classes.iter().map(|c| (c.ratio(), c.multiplicity)), tol)
    }

    pub fn min_length(&self) -> Option<f64> {
        self.classes.iter().map(|c| c.length).min_by(f64::total_cmp)
    }
}

fn check_domain(a: f64, b: f64) -> Result<(), GeodesicError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(GeodesicError::Domain(format!("length must be positive, got {a}")));
    }
    if !b.is_finite() {
        return Err(GeodesicError::Domain(format!("holonomy must be finite, got {b}")));
    }
    Ok(())
}

/// `(a, b) ↦ (a, (2π - b) mod 2π)`.
pub fn inverse_class(a: f64, b: f64) -> Result<(f64, f64), GeodesicError> {
    check_domain(a, b)?;
    Ok((a, wrap_angle(TAU - b)))
}

/// Invariants of the `j`-th power of the class `(a, b)`.
pub fn power_class(a: f64, b: f64, j: u32) -> Result<ClassInvariant, GeodesicError> {
    check_domain(a, b)?;
    if j < 1 {
        return Err(GeodesicError::Domain("power must be at least 1".into()));
    }
    Ok(ClassInvariant { length: f64::from(j) * a, holonomy: wrap_angle(f64::from(j) * b), primitive_power: j })
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(b: f64) -> f64 {
    let r = b.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of `{b, 2π - b}` in `[0, π]`.
pub fn canonical_holonomy(b: f64) -> f64 {
    let b = wrap_angle(b);
    if b > PI {
        TAU - b
    } else {
        b
    }
}

/// The normal form `m_p · exp(a H₀)` for length `a` and holonomy `b`.
pub fn normal_form(a: f64, b: f64) -> Mat4 {
    exp_cartan(CartanParams::new(b, a))
}

fn check_group(g: &Mat4) -> Result<(), GeodesicError> {
    let j = Mat4::metric();
    let scale = g.max_abs().max(1.0);
    let residual = (g.transpose() * j * *g - j).max_abs();
    if residual > ALGEBRA_TOL * scale * scale {
        return Err(GeodesicError::NotInGroup { reason: format!("|gᵀJg - J| = {residual:e}") });
    }
    // gᵀJg = J forces det = ±1 and |g₄₄| ≥ 1
    let det = g.determinant();
    if det < 0.0 {
        return Err(GeodesicError::NotInGroup { reason: format!("determinant {det}") });
    }
    if g.get(3, 3) < 0.0 {
        return Err(GeodesicError::NotInGroup { reason: "reverses time orientation".into() });
    }
    Ok(())
}

fn minkowski(x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2] - x[3] * y[3]
}

/// Reads off `(length, holonomy)` of a loxodromic element.
///
/// The length is the logarithm of the spectral radius. The rotation angle is
/// measured on the spacelike plane W fixed by `g`, isolated with the spectral
/// projector of `g + g⁻¹` (which is `2 cosh a` on the boost plane and `2 cos b`
/// on W). Reading `cos b` and `sin b` from W and combining them with `atan2`
/// keeps the angle accurate near `0` and `π`, where the eigenvalue phases are
/// ill-conditioned.
pub fn classify(g: &Mat4) -> Result<(f64, f64), GeodesicError> {
    check_group(g)?;
    let eigen = g.as_matrix().complex_eigenvalues();
    let spectral_radius = eigen.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if !spectral_radius.is_finite() || spectral_radius <= 1.0 + LOXODROMIC_EPS {
        return Err(GeodesicError::NotLoxodromic { spectral_radius });
    }
    let a = spectral_radius.ln();

    let ch = a.cosh();
    let cos_estimate = g.trace() / 2.0 - ch;
    let sum = *g + g.lorentz_inverse();
    let projector = (Mat4::identity().scale(2.0 * ch) - sum).scale(1.0 / (2.0 * (ch - cos_estimate)));
    let p = projector.as_matrix();

    let columns: Vec<Vector4<f64>> = (0..4).map(|i| p.column(i).into_owned()).collect();
    let w1 = *columns.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("four columns");
    let n1 = minkowski(&w1, &w1);
    let w2 = columns
        .iter()
        .map(|v| v - w1 * (minkowski(v, &w1) / n1))
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("four columns");
    let n2 = minkowski(&w2, &w2);
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(GeodesicError::NotLoxodromic { spectral_radius });
    }
    let gw1 = g.as_matrix() * w1;
    let cos_b = minkowski(&w1, &gw1) / n1;
    let sin_b = minkowski(&w2, &gw1) / (n1 * n2).sqrt();
    let b = sin_b.abs().atan2(cos_b);
    Ok((a, b))
}
