//! Structure theory of so(3,1) and the subgroups A, A_p, M of SO(3,1)°.
//!
//! Matrices act on R^{3,1} with the metric `J = diag(1, 1, 1, -1)`; the last
//! coordinate is the time direction. An element of so(3,1) has the block form
//!
//! ```text
//! [ B   u ]
//! [ uᵀ  0 ]      B skew-symmetric 3×3, u ∈ R³
//! ```
//!
//! The Cartan involution differential is `A ↦ -Aᵀ`; its +1 eigenspace k holds
//! the skew block, its -1 eigenspace p the symmetric boost block. The Iwasawa
//! splitting uses the fixed bases of k, a_p (boost along e₃) and the abelian
//! nilpotent subalgebra n spanned by two explicit matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;
use thiserror::Error;

/// Membership tolerance for `AᵀJ + JA = 0` and `gᵀJg = J`.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not in so(3,1): |AᵀJ + JA| = {residual:e}")]
    NotInAlgebra { residual: f64 },
}

/// A finite 4×4 real matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat4(Matrix4<f64>);

impl Mat4 {
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self, LieError> {
        for (row, r) in rows.iter().enumerate() {
            for (col, v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LieError::NonFinite { row, col });
                }
            }
        }
        Ok(Self::from_rows_unchecked(rows))
    }

    fn from_rows_unchecked(rows: [[f64; 4]; 4]) -> Self {
        Mat4(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self, LieError> {
        let mut rows = [[0.0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        Self::from_rows(rows)
    }

    pub fn zero() -> Self {
        Mat4(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        Mat4(Matrix4::identity())
    }

    /// The Minkowski metric `diag(1, 1, 1, -1)`.
    pub fn metric() -> Self {
        Mat4(Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0)))
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[(i, j)];
            }
        }
        out
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Mat4(self.0.transpose())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Mat4(self.0 * factor)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        (*self - *other).max_abs()
    }

    /// Inverse of a Lorentz matrix, `J gᵀ J`. Only meaningful for group elements.
    pub fn lorentz_inverse(&self) -> Self {
        let j = Mat4::metric();
        j * self.transpose() * j
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, exp: u32) -> Self {
        let mut result = Mat4::identity();
        let mut base = *self;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }
}

impl fmt::Debug for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Mat4").field(&self.rows()).finish()
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4(self.0 + rhs.0)
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4(self.0 - rhs.0)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4(self.0 * rhs.0)
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        Mat4(-self.0)
    }
}

/// Residual of `AᵀJ + JA`, the so(3,1) membership defect.
pub fn algebra_residual(m: &Mat4) -> f64 {
    let j = Mat4::metric();
    (m.transpose() * j + j * *m).max_abs()
}

/// An element of so(3,1).
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LieElement(Mat4);

impl LieElement {
    /// Checks `AᵀJ + JA = 0` to `ALGEBRA_TOL`, scaled by the largest entry once
    /// entries exceed one.
    pub fn new(m: Mat4) -> Result<Self, LieError> {
        let residual = algebra_residual(&m);
        if residual > ALGEBRA_TOL * m.max_abs().max(1.0) {
            return Err(LieError::NotInAlgebra { residual });
        }
        Ok(LieElement(m))
    }

    /// Builds `[[B, u], [uᵀ, 0]]` from the skew entries `(B₁₂, B₁₃, B₂₃)` and the
    /// boost vector `u`.
    pub fn from_blocks(skew: [f64; 3], boost: [f64; 3]) -> Self {
        let [p, q, r] = skew;
        let [u1, u2, u3] = boost;
        LieElement(Mat4::from_rows_unchecked([
            [0.0, p, q, u1],
            [-p, 0.0, r, u2],
            [-q, -r, 0.0, u3],
            [u1, u2, u3, 0.0],
        ]))
    }

    /// Skew entries `(B₁₂, B₁₃, B₂₃)`.
    pub fn skew_coords(&self) -> [f64; 3] {
        let m = &self.0;
        [m.get(0, 1), m.get(0, 2), m.get(1, 2)]
    }

    /// Boost vector `u` (last column, first three rows).
    pub fn boost_coords(&self) -> [f64; 3] {
        let m = &self.0;
        [m.get(0, 3), m.get(1, 3), m.get(2, 3)]
    }

    pub fn zero() -> Self {
        LieElement(Mat4::zero())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// Element of the Cartan subalgebra a = a_k + a_p.
    pub fn cartan(p: CartanParams) -> Self {
        Self::from_blocks([p.b, 0.0, 0.0], [0.0, 0.0, p.alpha])
    }

    /// Element `alpha · H₀` of a_p.
    pub fn boost_generator(alpha: f64) -> Self {
        Self::from_blocks([0.0; 3], [0.0, 0.0, alpha])
    }

    /// Element of n with parameters `(a, b)`:
    ///
    /// ```text
    /// [ 0  0 -a  a ]
    /// [ 0  0 -b  b ]
    /// [ a  b  0  0 ]
    /// [ a  b  0  0 ]
    /// ```
    pub fn nilpotent(a: f64, b: f64) -> Self {
        Self::from_blocks([0.0, -a, -b], [a, b, 0.0])
    }

    /// Image under the differential of the Cartan involution, `A ↦ -Aᵀ`.
    pub fn involution(&self) -> Self {
        LieElement(-self.0.transpose())
    }
}

impl Add for LieElement {
    type Output = LieElement;
    fn add(self, rhs: LieElement) -> LieElement {
        LieElement(self.0 + rhs.0)
    }
}

impl Sub for LieElement {
    type Output = LieElement;
    fn sub(self, rhs: LieElement) -> LieElement {
        LieElement(self.0 - rhs.0)
    }
}

/// Coordinates on the Cartan subalgebra: rotation angle `b` in the (e₁, e₂)
/// plane and boost parameter `alpha` along e₃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanParams {
    pub b: f64,
    pub alpha: f64,
}

impl CartanParams {
    pub fn new(b: f64, alpha: f64) -> Self {
        CartanParams { b, alpha }
    }

    /// `H₀`, the unit boost with `β(H₀) = 1`.
    pub fn h0() -> Self {
        CartanParams { b: 0.0, alpha: 1.0 }
    }
}

impl Add for CartanParams {
    type Output = CartanParams;
    fn add(self, rhs: CartanParams) -> CartanParams {
        CartanParams { b: self.b + rhs.b, alpha: self.alpha + rhs.alpha }
    }
}

/// Lie bracket `xy - yx`.
pub fn bracket(x: &LieElement, y: &LieElement) -> LieElement {
    let (a, b) = (x.0, y.0);
    LieElement(a * b - b * a)
}

/// Splits `x` into its k (skew) and p (symmetric) parts.
pub fn cartan_split(x: &LieElement) -> (LieElement, LieElement) {
    let [p, q, r] = x.skew_coords();
    let u = x.boost_coords();
    (
        LieElement::from_blocks([p, q, r], [0.0; 3]),
        LieElement::from_blocks([0.0; 3], u),
    )
}

/// Iwasawa components of an so(3,1) element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IwasawaParts {
    pub k: LieElement,
    pub a_p: LieElement,
    pub n: LieElement,
    /// Boost parameter of the a_p component.
    pub alpha: f64,
    /// `(a, b)` parameters of the n component.
    pub n_params: (f64, f64),
}

/// Splits `x = k + a_p + n`.
///
/// With `x` written as skew entries `(p, q, r)` and boost `u`, the n-part
/// carries the boost components `u₁, u₂`, a_p carries `u₃`, and k absorbs the
/// skew entries that n contributes to the 3×3 block.
pub fn iwasawa_split(x: &LieElement) -> IwasawaParts {
    let [p, q, r] = x.skew_coords();
    let [u1, u2, u3] = x.boost_coords();
    let (na, nb) = (u1, u2);
    IwasawaParts {
        k: LieElement::from_blocks([p, q + na, r + nb], [0.0; 3]),
        a_p: LieElement::boost_generator(u3),
        n: LieElement::nilpotent(na, nb),
        alpha: u3,
        n_params: (na, nb),
    }
}

/// Closed form of `exp` on the Cartan subalgebra.
pub fn exp_cartan(p: CartanParams) -> Mat4 {
    let (s, c) = p.b.sin_cos();
    let (sh, ch) = (p.alpha.sinh(), p.alpha.cosh());
    Mat4::from_rows_unchecked([
        [c, s, 0.0, 0.0],
        [-s, c, 0.0, 0.0],
        [0.0, 0.0, ch, sh],
        [0.0, 0.0, sh, ch],
    ])
}

/// One of the four roots of `(so(3,1)^C, a^C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootId(u8);

impl RootId {
    pub const ALL: [RootId; 4] = [RootId(1), RootId(2), RootId(3), RootId(4)];

    pub fn new(index: u8) -> Option<Self> {
        (1..=4).contains(&index).then_some(RootId(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Coefficients `(c₁, c₂)` of the root in the basis `{e₁, e₂}`, where
    /// `e₁` reads the boost parameter and `e₂` the rotation parameter.
    pub fn coefficients(self) -> (i8, i8) {
        match self.0 {
            1 => (1, 1),
            2 => (-1, 1),
            3 => (-1, -1),
            _ => (1, -1),
        }
    }

    /// Positivity in the lexicographic ordering on `(e₁, e₂)`.
    pub fn is_positive(self) -> bool {
        let (c1, c2) = self.coefficients();
        c1 > 0 || (c1 == 0 && c2 > 0)
    }
}

/// Evaluates a root on `y ∈ a_p + i·a_k` with parameters `(b, alpha)`.
pub fn root_eval(root: RootId, p: CartanParams) -> f64 {
    let (c1, c2) = root.coefficients();
    f64::from(c1) * p.alpha + f64::from(c2) * p.b
}

/// Numbers `(p, q)` of positive roots restricting to `β` and `2β` on a_p.
pub fn restricted_root_multiplicities() -> (u32, u32) {
    let mut p = 0;
    let mut q = 0;
    for root in RootId::ALL.into_iter().filter(|r| r.is_positive()) {
        let value = root_eval(root, CartanParams::h0());
        if value == 1.0 {
            p += 1;
        } else if value == 2.0 {
            q += 1;
        }
    }
    (p, q)
}

/// `ρ₀ = ρ(H₀) = (p + 2q) / 2`.
pub fn rho0() -> f64 {
    let (p, q) = restricted_root_multiplicities();
    f64::from(p + 2 * q) / 2.0
}
