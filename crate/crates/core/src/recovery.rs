//! Peeling algorithms that recover primitive lengths and holonomy ratios from
//! windowed zero lines, and the end-to-end comparison of two spectra.

use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::Serialize;
use thiserror::Error;

use crate::geodesic::Spectrum;
use crate::multiset::{multiset_equal, PeelSet, RealMultiset, Removal, TracePoint, Witness};
use crate::zeros::{length_trace, strip_k0, zero_line, ZeroError, ZeroWindow, ZERO_TOL};
use crate::zeta::TauIndex;

/// Upper bound on search nodes explored by [`recover_ratios`].
pub const MAX_SEARCH_NODES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecoveryError {
    #[error("window too small: {leftover} trace point(s) at 0 have no class with a visible trace")]
    IncompleteWindow { leftover: u64 },
    #[error("trace point {value} is missing; subtraction would drive a multiplicity negative")]
    NegativeMultiplicity { value: f64 },
    #[error("minimal element {value} is explained by more than one assignment of lengths")]
    AmbiguousTrace { value: f64 },
    #[error("residual element {value} cannot be explained by any trace")]
    Residual { value: f64 },
    #[error("search exceeded {MAX_SEARCH_NODES} nodes")]
    SearchLimit,
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

/// One iteration of a peeling loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeelStep {
    /// The peeled minimal element.
    pub value: f64,
    pub multiplicity: u32,
    /// Trace points matched in the current set.
    pub trace_size: u32,
    /// Total multiplicity removed.
    pub removed: u32,
    pub positive_before: u64,
    pub positive_after: u64,
}

fn check_tol(tol: f64) -> Result<(), RecoveryError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(RecoveryError::Domain(format!("tolerance must be nonnegative, got {tol}")))
    }
}

/// Recovers the length multiset from a `k = 0` zero line, recording each step.
pub fn recover_lengths_traced(
    z: &RealMultiset,
    w: ZeroWindow,
    tol: f64,
) -> Result<(RealMultiset, Vec<PeelStep>), RecoveryError> {
    check_tol(tol)?;
    let bound = w.im_bound() - tol;
    let mut set = PeelSet::new(&interior(z, bound));
    let mut lengths = Vec::new();
    let mut steps = Vec::new();
    while let Some((s0, mu)) = set.first_above(tol) {
        let a = TAU / s0;
        let positive_before = set.total_above(tol);
        let removal = set
            .remove_trace(&length_trace(a, bound, tol), mu, tol)
            .map_err(|value| RecoveryError::NegativeMultiplicity { value })?;
        steps.push(PeelStep {
            value: s0,
            multiplicity: mu,
            trace_size: removal.matched,
            removed: removal.removed,
            positive_before,
            positive_after: set.total_above(tol),
        });
        lengths.push((a, mu));
    }
    leftover_check(&set, tol)?;
    Ok((RealMultiset::from_weighted(lengths, ZERO_TOL), steps))
}

/// Points with `|v| ≤ bound`. Data within `tol` of the window edge is
/// ambiguous (a class's edge point may fall on either side), so peeling
/// works strictly inside it.
fn interior(z: &RealMultiset, bound: f64) -> RealMultiset {
    z.filter(|v| v.abs() <= bound)
}

fn leftover_check(set: &PeelSet, tol: f64) -> Result<(), RecoveryError> {
    match set.first() {
        None => Ok(()),
        Some((v, _)) if v < -tol => Err(RecoveryError::Residual { value: v }),
        Some(_) => Err(RecoveryError::IncompleteWindow { leftover: set.total() }),
    }
}

/// Peels `k = 0` zero-line data `{-2nπ/a}` back into the length multiset.
pub fn recover_lengths(z: &RealMultiset, w: ZeroWindow, tol: f64) -> Result<RealMultiset, RecoveryError> {
    recover_lengths_traced(z, w, tol).map(|(lengths, _)| lengths)
}

/// The `k = ±1` trace `{±c + 2nπ/a}` of a class with ratio `c`, ordered
/// outward from 0 so mismatches surface early.
fn ratio_trace(a: f64, c: f64, im_bound: f64, tol: f64) -> Vec<TracePoint> {
    let reach = im_bound + tol;
    let mut points = Vec::new();
    for shift in [c, -c] {
        let lo = ((-reach - shift) * a / TAU).ceil() as i64 - 1;
        let hi = ((reach - shift) * a / TAU).floor() as i64 + 1;
        for n in lo..=hi {
            let value = shift + TAU * n as f64 / a;
            if value.abs() <= reach {
                points.push(TracePoint { value, required: value.abs() <= im_bound - tol });
            }
        }
    }
    points.sort_by(|x, y| x.value.abs().total_cmp(&y.value.abs()));
    points
}

/// A recovered class: length and holonomy ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioAssignment {
    pub length: f64,
    pub ratio: f64,
}

struct RatioSearch {
    set: PeelSet,
    budget: Vec<(f64, u32)>,
    chosen: Vec<(usize, f64)>,
    visited: HashSet<Vec<(usize, u64)>>,
    solutions: Vec<Vec<(usize, f64)>>,
    failure: Option<RecoveryError>,
    nodes: usize,
    im_bound: f64,
    tol: f64,
}

impl RatioSearch {
    fn done(&self) -> bool {
        self.solutions.len() >= 2 || self.nodes > MAX_SEARCH_NODES
    }

    fn fail(&mut self, err: RecoveryError) {
        self.failure.get_or_insert(err);
    }

    fn run(&mut self) {
        self.nodes += 1;
        if self.done() {
            return;
        }
        let mut key: Vec<(usize, u64)> = self.chosen.iter().map(|&(i, c)| (i, c.to_bits())).collect();
        key.sort_unstable();
        if !self.visited.insert(key) {
            return;
        }
        if self.set.is_empty() {
            let unused: u64 = self.budget.iter().map(|&(_, m)| u64::from(m)).sum();
            if unused == 0 {
                self.record_solution();
            } else {
                self.fail(RecoveryError::IncompleteWindow { leftover: unused });
            }
            return;
        }
        let Some((c_min, _)) = self.set.first_above(-self.tol - f64::MIN_POSITIVE) else {
            let value = self.set.first().map_or(f64::NAN, |(v, _)| v);
            self.fail(RecoveryError::Residual { value });
            return;
        };
        let c = c_min.abs();
        for idx in 0..self.budget.len() {
            if self.budget[idx].1 == 0 {
                continue;
            }
            let trace = ratio_trace(self.budget[idx].0, c, self.im_bound, self.tol);
            match self.set.remove_trace(&trace, 1, self.tol) {
                Ok(removal) => self.descend(idx, c, removal),
                Err(value) => self.fail(RecoveryError::NegativeMultiplicity { value }),
            }
            if self.done() {
                return;
            }
        }
    }

    fn descend(&mut self, idx: usize, c: f64, removal: Removal) {
        self.budget[idx].1 -= 1;
        self.chosen.push((idx, c));
        self.run();
        self.chosen.pop();
        self.budget[idx].1 += 1;
        self.set.undo(removal);
    }

    fn record_solution(&mut self) {
        let mut sol = self.chosen.clone();
        sol.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let tol = self.tol;
        let same = |other: &Vec<(usize, f64)>| {
            other.len() == sol.len() && other.iter().zip(&sol).all(|(p, q)| p.0 == q.0 && (p.1 - q.1).abs() <= tol)
        };
        if !self.solutions.iter().any(same) {
            self.solutions.push(sol);
        }
    }
}

/// Recovers `(length, ratio)` assignments from the stripped `k = ±1` data.
///
/// The smallest nonnegative element is the next ratio `c`; every remaining
/// length whose trace `{±c + 2nπ/a}` is fully present is tried in turn, with
/// backtracking. Two distinct complete assignments give `AmbiguousTrace`.
/// A zero-holonomy class leaves two copies of `{2nπ/a}` and is reported with
/// ratio 0 once.
pub fn recover_assignments(
    z_pm: &RealMultiset,
    lengths: &RealMultiset,
    w: ZeroWindow,
    tol: f64,
) -> Result<Vec<RatioAssignment>, RecoveryError> {
    check_tol(tol)?;
    let mut search = RatioSearch {
        set: PeelSet::new(&interior(z_pm, w.im_bound() - tol)),
        budget: lengths.entries().to_vec(),
        chosen: Vec::new(),
        visited: HashSet::new(),
        solutions: Vec::new(),
        failure: None,
        nodes: 0,
        im_bound: w.im_bound() - tol,
        tol,
    };
    if search.set.is_empty() {
        return Ok(Vec::new());
    }
    search.run();
    match search.solutions.len() {
        0 if search.nodes > MAX_SEARCH_NODES => Err(RecoveryError::SearchLimit),
        0 => Err(search.failure.unwrap_or(RecoveryError::Residual { value: f64::NAN })),
        1 => Ok(search.solutions[0]
            .iter()
            .map(|&(i, c)| RatioAssignment { length: search.budget[i].0, ratio: c })
            .collect()),
        _ => {
            let (x, y) = (&search.solutions[0], &search.solutions[1]);
            let value = x.iter().zip(y).find(|(p, q)| p != q).map_or(x[0].1, |(p, _)| p.1);
            Err(RecoveryError::AmbiguousTrace { value })
        }
    }
}

/// The multiset of recovered ratios `min(b, 2π - b)/a`.
pub fn recover_ratios(
    z_pm: &RealMultiset,
    lengths: &RealMultiset,
    w: ZeroWindow,
    tol: f64,
) -> Result<RealMultiset, RecoveryError> {
    let assignments = recover_assignments(z_pm, lengths, w, tol)?;
    Ok(RealMultiset::from_values(assignments.into_iter().map(|r| r.ratio), tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Exact,
    Tolerant,
    Failed,
}

/// Result of a recovery run or comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub status: Status,
    /// Largest matching distance over all compared multisets.
    pub residual: f64,
    pub recovered_lengths: RealMultiset,
    pub recovered_ratios: RealMultiset,
    /// The other side of the comparison: the second spectrum's recovery in
    /// [`smo_check`], the true invariants in [`recover_spectrum`].
    pub counterpart_lengths: Option<RealMultiset>,
    pub counterpart_ratios: Option<RealMultiset>,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<String>,
}

impl RecoveryReport {
    fn empty() -> Self {
        RecoveryReport {
            status: Status::Exact,
            residual: 0.0,
            recovered_lengths: RealMultiset::new(),
            recovered_ratios: RealMultiset::new(),
            counterpart_lengths: None,
            counterpart_ratios: None,
            witness: None,
            diagnostics: Vec::new(),
        }
    }

    fn compare(&mut self, what: &str, a: &RealMultiset, b: &RealMultiset, tol: f64) {
        let m = multiset_equal(a, b, tol);
        self.residual = self.residual.max(m.max_distance);
        if !m.equal {
            self.status = Status::Failed;
            self.witness = self.witness.or(m.witness);
            if let Some(w) = m.witness {
                self.diagnostics.push(format!("{what} differ: unmatched {} on the {:?} side", w.value, w.side));
            }
        }
    }

    fn fail(&mut self, context: &str, err: &RecoveryError) {
        self.status = Status::Failed;
        self.diagnostics.push(format!("{context}: {err}"));
    }

    fn finish(mut self) -> Self {
        if self.status != Status::Failed && self.residual > 0.0 {
            self.status = Status::Tolerant;
        }
        self
    }
}

/// Lengths and ratios recovered from the `m = 0` and `m = 1` zero lines.
pub fn recover_from_zero_lines(
    line0: &RealMultiset,
    line1: &RealMultiset,
    w: ZeroWindow,
    tol: f64,
) -> Result<(RealMultiset, RealMultiset), RecoveryError> {
    let lengths = recover_lengths(line0, w, tol)?;
    let stripped = strip_k0(line1, &lengths, w)?;
    let ratios = recover_ratios(&stripped, &lengths, w, tol)?;
    Ok((lengths, ratios))
}

fn recover_side(spec: &Spectrum, w: ZeroWindow, tol: f64) -> Result<(RealMultiset, RealMultiset), RecoveryError> {
    let line0 = zero_line(spec, TauIndex::new(0), w);
    let line1 = zero_line(spec, TauIndex::new(1), w);
    recover_from_zero_lines(&line0, &line1, w, tol)
}

/// Forward-generates the zero lines of `spec`, recovers its invariants and
/// checks them against the true lengths and ratios.
pub fn recover_spectrum(spec: &Spectrum, w: ZeroWindow, tol: f64) -> RecoveryReport {
    let mut report = RecoveryReport::empty();
    let truth_lengths = spec.lengths(ZERO_TOL);
    let truth_ratios = spec.ratios(ZERO_TOL);
    match recover_side(spec, w, tol) {
        Ok((lengths, ratios)) => {
            report.compare("lengths", &lengths, &truth_lengths, tol);
            report.compare("ratios", &ratios, &truth_ratios, tol);
            report.recovered_lengths = lengths;
            report.recovered_ratios = ratios;
        }
        Err(e) => report.fail("recovery", &e),
    }
    report.counterpart_lengths = Some(truth_lengths);
    report.counterpart_ratios = Some(truth_ratios);
    report.finish()
}

/// Compares two spectra through the zero lines of their difference sets and
/// the invariants recovered from them.
pub fn smo_check(spec1: &Spectrum, spec2: &Spectrum, tau: TauIndex, w: ZeroWindow, tol: f64) -> RecoveryReport {
    let mut report = RecoveryReport::empty();
    if let Err(e) = check_tol(tol) {
        report.fail("input", &e);
        return report;
    }
    report.compare("lengths", &spec1.lengths(ZERO_TOL), &spec2.lengths(ZERO_TOL), tol);
    report.compare("ratios", &spec1.ratios(ZERO_TOL), &spec2.ratios(ZERO_TOL), tol);
    let s1 = spec1.difference(spec2);
    let s2 = spec2.difference(spec1);
    report.diagnostics.insert(
        0,
        format!("difference sets: {} and {} classes", s1.total_multiplicity(), s2.total_multiplicity()),
    );
    if s1.is_empty() && s2.is_empty() {
        report.status = if report.status == Status::Failed { Status::Failed } else { Status::Exact };
        return report.finish();
    }
    // Zero-line witnesses take precedence over the class-level ones above.
    report.witness = None;
    let mut ms = vec![0, 1, tau.m];
    ms.dedup();
    ms.sort_unstable();
    ms.dedup();
    for m in ms {
        let l1 = zero_line(&s1, TauIndex::new(m), w);
        let l2 = zero_line(&s2, TauIndex::new(m), w);
        report.compare(&format!("zero lines at m = {m}"), &l1, &l2, tol);
    }
    match (recover_side(&s1, w, tol), recover_side(&s2, w, tol)) {
        (Ok((len1, rat1)), Ok((len2, rat2))) => {
            report.compare("recovered lengths", &len1, &len2, tol);
            report.compare("recovered ratios", &rat1, &rat2, tol);
            report.recovered_lengths = len1;
            report.recovered_ratios = rat1;
            report.counterpart_lengths = Some(len2);
            report.counterpart_ratios = Some(rat2);
        }
        (r1, r2) => {
            for (side, r) in [("first difference set", r1), ("second difference set", r2)] {
                if let Err(e) = r {
                    report.fail(side, &e);
                }
            }
        }
    }
    report.finish()
}
