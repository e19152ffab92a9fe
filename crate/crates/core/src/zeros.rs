//! Windowed zero sets of the truncated Euler product.
//!
//! The factor `1 - e^{-X}` vanishes exactly when `X ∈ 2πiℤ`, which gives
//! `s = -(m₁ + m₂) + i·s₂` with `s₂ = (-b(m₁ - m₂ + k) - 2nπ)/a`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geodesic::{PrimitiveClass, Spectrum};
use crate::multiset::{PeelSet, RealMultiset, TracePoint};
use crate::zeta::TauIndex;

/// Absolute tolerance for merging coincident zeros.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("{0}")]
    Domain(String),
    #[error("removing {value} would drive its multiplicity negative")]
    Underflow { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroWindow {
    max_m: u32,
    im_bound: f64,
}

impl ZeroWindow {
    pub fn new(max_m: u32, im_bound: f64) -> Result<Self, ZeroError> {
        if !(im_bound.is_finite() && im_bound > 0.0) {
            return Err(ZeroError::Domain(format!("im_bound must be positive and finite, got {im_bound}")));
        }
        Ok(ZeroWindow { max_m, im_bound })
    }

    /// Bound on `m₁ + m₂`.
    pub fn max_m(&self) -> u32 {
        self.max_m
    }

    pub fn im_bound(&self) -> f64 {
        self.im_bound
    }
}

/// Zeros with integer multiplicities, sorted by real then imaginary part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroMultiset {
    entries: Vec<(Complex64, u32)>,
}

impl ZeroMultiset {
    pub fn entries(&self) -> &[(Complex64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| u64::from(m)).sum()
    }

    /// Entries with `|Im s| ≤ im_bound`.
    pub fn restrict(&self, im_bound: f64) -> ZeroMultiset {
        ZeroMultiset { entries: self.entries.iter().copied().filter(|(z, _)| z.im.abs() <= im_bound).collect() }
    }

    fn from_raw(mut raw: Vec<(i64, f64, u32)>) -> Self {
        raw.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut grouped: Vec<(i64, f64, u32)> = Vec::new();
        for (re, im, m) in raw {
            match grouped.last_mut() {
                Some((r, i, count)) if *r == re && (im - *i).abs() <= ZERO_TOL => *count += m,
                _ => grouped.push((re, im, m)),
            }
        }
        let entries = grouped.into_iter().map(|(re, im, m)| (Complex64::new(re as f64, im), m)).collect();
        ZeroMultiset { entries }
    }
}

/// `s₂ = (-b·j - 2nπ)/a`.
pub(crate) fn line_value(a: f64, b: f64, j: i64, n: i64) -> f64 {
    (-(b * j as f64) - TAU * n as f64) / a
}

/// The `s₂` values of one class for a fixed `j = m₁ - m₂ + k`, ascending.
fn line_points(a: f64, b: f64, j: i64, im_bound: f64) -> Vec<f64> {
    let shift = b * j as f64;
    let lo = ((-im_bound * a - shift) / TAU).ceil() as i64 - 1;
    let hi = ((im_bound * a - shift) / TAU).floor() as i64 + 1;
    let mut out: Vec<f64> = (lo..=hi)
        .rev()
        .map(|n| line_value(a, b, j, n))
        .filter(|v| v.abs() <= im_bound)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn class_zeros(cls: &PrimitiveClass, tau: TauIndex, w: ZeroWindow, on_line_only: bool) -> Vec<(i64, f64, u32)> {
    let (a, b, mult) = (cls.length(), cls.holonomy(), cls.multiplicity());
    let max_sum = if on_line_only { 0 } else { i64::from(w.max_m) };
    let mut out = Vec::new();
    for k in tau.weights() {
        for m1 in 0..=max_sum {
            for m2 in 0..=(max_sum - m1) {
                for v in line_points(a, b, m1 - m2 + k, w.im_bound) {
                    out.push((-(m1 + m2), v, mult));
                }
            }
        }
    }
    out
}

fn generate(diff: &Spectrum, tau: TauIndex, w: ZeroWindow, on_line_only: bool) -> ZeroMultiset {
    let raw: Vec<(i64, f64, u32)> = diff
        .classes()
        .par_iter()
        .flat_map_iter(|cls| class_zeros(cls, tau, w, on_line_only))
        .collect();
    ZeroMultiset::from_raw(raw)
}

/// All zeros `s₁ + i·s₂` in the window, counted with class multiplicity.
pub fn zero_multiset(diff: &Spectrum, tau: TauIndex, w: ZeroWindow) -> ZeroMultiset {
    generate(diff, tau, w, false)
}

/// Imaginary parts of the zeros on `Re s = 0` (the `m₁ = m₂ = 0` terms).
pub fn zero_line(diff: &Spectrum, tau: TauIndex, w: ZeroWindow) -> RealMultiset {
    let zeros = generate(diff, tau, w, true);
    RealMultiset::from_weighted(zeros.entries.iter().map(|&(z, m)| (z.im, m)), ZERO_TOL)
}

/// Points `2nπ/a` of a pure-length trace within `±im_bound`. Points within
/// `tol` of the edge are optional.
pub(crate) fn length_trace(a: f64, im_bound: f64, tol: f64) -> Vec<TracePoint> {
    line_points(a, 0.0, 0, im_bound + tol)
        .into_iter()
        .map(|value| TracePoint { value, required: value.abs() <= im_bound - tol })
        .collect()
}

/// Removes the `k = 0` trace `{-2nπ/a}` of every length, leaving the `k = ±1`
/// part of an `m = 1` zero line.
pub fn strip_k0(zl: &RealMultiset, lengths: &RealMultiset, w: ZeroWindow) -> Result<RealMultiset, ZeroError> {
    let mut set = PeelSet::new(zl);
    for &(a, mult) in lengths.entries() {
        if !(a.is_finite() && a > 0.0) {
            return Err(ZeroError::Domain(format!("length must be positive, got {a}")));
        }
        set.remove_trace(&length_trace(a, w.im_bound, ZERO_TOL), mult, ZERO_TOL)
            .map_err(|value| ZeroError::Underflow { value })?;
    }
    Ok(set.to_multiset())
}
