//! Truncated Euler products for the SO(3,1)° zeta function `Z_τ(s)`.
//!
//! For a primitive class with length `a` and holonomy `b`, a weight
//! `λ = m₁(e₁ + e₂) + m₂(e₁ - e₂)` and `k ∈ {-m, …, m}` (τ of dimension
//! `2m + 1`), the local factor is `1 - e^{-X}` with
//!
//! ```text
//! X = i·k·b + (m₁ + m₂)·a + i·(m₁ - m₂)·b + s·a
//! ```
//!
//! Products are accumulated as compensated sums of logarithms; the character
//! of Γ is trivial and all overall constants are 1.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geodesic::{PrimitiveClass, Spectrum};
use crate::lie::rho0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZetaError {
    #[error("{0}")]
    Domain(String),
    #[error("Euler factor vanishes at s = {s} (k = {k}, m1 = {m1}, m2 = {m2}, length = {length})")]
    FactorZero { s: Complex64, k: i64, m1: u32, m2: u32, length: f64 },
    #[error("denominator factor vanishes at s = {s}")]
    DivisionByZero { s: Complex64 },
}

/// Weight `m₁(e₁ + e₂) + m₂(e₁ - e₂)` of the semilattice L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub m1: u32,
    pub m2: u32,
}

impl LatticePoint {
    pub fn new(m1: u32, m2: u32) -> Self {
        LatticePoint { m1, m2 }
    }
}

/// Highest weight `m` of an irreducible representation τ of SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TauIndex {
    pub m: u32,
}

impl TauIndex {
    pub fn new(m: u32) -> Self {
        TauIndex { m }
    }

    pub fn dimension(&self) -> u32 {
        2 * self.m + 1
    }

    /// The weights `k ∈ {-m, …, m}` of τ restricted to M.
    pub fn weights(&self) -> impl Iterator<Item = i64> + Clone {
        let m = i64::from(self.m);
        -m..=m
    }
}

/// Bound on `m₁` and `m₂` in the weight product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub max_m: u32,
}

impl Truncation {
    pub fn new(max_m: u32) -> Self {
        Truncation { max_m }
    }

    pub fn lattice(&self) -> impl Iterator<Item = LatticePoint> + Clone {
        let n = self.max_m;
        (0..=n).flat_map(move |m1| (0..=n).map(move |m2| LatticePoint::new(m1, m2)))
    }
}

/// A value together with whether `s` lies in the half-plane `Re s > 2ρ₀`
/// where the full product converges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub convergent: bool,
}

/// `ξ_λ(h(p)) = exp((m₁ + m₂)a + i(m₁ - m₂)b)`.
pub fn xi_lambda(lp: LatticePoint, a: f64, b: f64) -> Result<Complex64, ZetaError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(ZetaError::Domain(format!("length must be positive, got {a}")));
    }
    let re = f64::from(lp.m1 + lp.m2) * a;
    let im = (f64::from(lp.m1) - f64::from(lp.m2)) * b;
    Ok(Complex64::new(re, im).exp())
}

fn exponent(k: i64, lp: LatticePoint, cls: &PrimitiveClass, s: Complex64) -> Complex64 {
    let (a, b) = (cls.length(), cls.holonomy());
    let rotation = (k as f64 + f64::from(lp.m1) - f64::from(lp.m2)) * b;
    Complex64::new(f64::from(lp.m1 + lp.m2) * a, rotation) + s * a
}

/// The local factor `1 - e^{-X}`.
pub fn euler_factor(k: i64, lp: LatticePoint, cls: &PrimitiveClass, s: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) - (-exponent(k, lp, cls, s)).exp()
}

/// `log(1 - w)` computed as `log1p(-w)` to keep precision for small `|w|`.
fn ln_one_minus(w: Complex64) -> Complex64 {
    let z = -w;
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

fn convergent(s: Complex64) -> bool {
    s.re > 2.0 * rho0()
}

/// Applies `f` to every factor exponent `e^{-X}` of the product and sums the
/// results per class (times multiplicity), in class order.
fn reduce_factors<F>(
    spec: &Spectrum,
    tau: TauIndex,
    s: Complex64,
    tr: Truncation,
    f: F,
) -> Result<Complex64, ZetaError>
where
    F: Fn(Complex64, &PrimitiveClass) -> Complex64 + Sync,
{
    let partials: Vec<Result<(Complex64, u32), ZetaError>> = spec
        .classes()
        .par_iter()
        .map(|cls| {
            let mut acc = CompensatedSum::default();
            for k in tau.weights() {
                for lp in tr.lattice() {
                    let w = (-exponent(k, lp, cls, s)).exp();
                    if w.re == 1.0 && w.im == 0.0 {
                        return Err(ZetaError::FactorZero { s, k, m1: lp.m1, m2: lp.m2, length: cls.length() });
                    }
                    acc.add(f(w, cls));
                }
            }
            Ok((acc.value(), cls.multiplicity()))
        })
        .collect();
    let mut total = CompensatedSum::default();
    for partial in partials {
        let (value, mult) = partial?;
        total.add(value * f64::from(mult));
    }
    Ok(total.value())
}

/// `Σ log(1 - e^{-X})` over all factors, the continuous branch of `log Z_τ(s)`.
pub fn log_zeta_tau(spec: &Spectrum, tau: TauIndex, s: Complex64, tr: Truncation) -> Result<Evaluation, ZetaError> {
    let value = reduce_factors(spec, tau, s, tr, |w, _| ln_one_minus(w))?;
    Ok(Evaluation { value, convergent: convergent(s) })
}

/// The truncated product `Z_τ(s)`.
pub fn zeta_tau(spec: &Spectrum, tau: TauIndex, s: Complex64, tr: Truncation) -> Result<Evaluation, ZetaError> {
    let log = log_zeta_tau(spec, tau, s, tr)?;
    Ok(Evaluation { value: log.value.exp(), convergent: log.convergent })
}

/// `d/ds log Z_τ(s) = Σ a·e^{-X} / (1 - e^{-X})`.
pub fn log_derivative(spec: &Spectrum, tau: TauIndex, s: Complex64, tr: Truncation) -> Result<Evaluation, ZetaError> {
    let one = Complex64::new(1.0, 0.0);
    let value = reduce_factors(spec, tau, s, tr, |w, cls| w * cls.length() / (one - w))?;
    Ok(Evaluation { value, convergent: convergent(s) })
}

/// `T(s) = Z_τ(spec1; s) / Z_τ(spec2; s)` with shared classes cancelled before
/// evaluation, so only the finite difference sets contribute.
pub fn zeta_ratio(
    spec1: &Spectrum,
    spec2: &Spectrum,
    tau: TauIndex,
    s: Complex64,
    tr: Truncation,
) -> Result<Evaluation, ZetaError> {
    let numerator = spec1.difference(spec2);
    let denominator = spec2.difference(spec1);
    let den = match log_zeta_tau(&denominator, tau, s, tr) {
        Err(ZetaError::FactorZero { s, .. }) => return Err(ZetaError::DivisionByZero { s }),
        other => other?,
    };
    match log_zeta_tau(&numerator, tau, s, tr) {
        Err(ZetaError::FactorZero { .. }) => Ok(Evaluation { value: Complex64::new(0.0, 0.0), convergent: den.convergent }),
        Err(e) => Err(e),
        Ok(num) => Ok(Evaluation { value: (num.value - den.value).exp(), convergent: num.convergent }),
    }
}
