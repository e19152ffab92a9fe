//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use holonomy_zeta::cli::run_cli_with_stdin;
use holonomy_zeta::geodesic::{PrimitiveClass, Spectrum};
use holonomy_zeta::zeta::{euler_factor, LatticePoint};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type M4 = [[f64; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matmul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn max_diff(a: &M4, b: &M4) -> f64 {
    let mut d = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

/// `Σ_{k<terms} A^k / k!`.
pub fn expm_series(a: &M4, terms: usize) -> M4 {
    let mut sum = [[0.0; 4]; 4];
    let mut term = [[0.0; 4]; 4];
    for i in 0..4 {
        sum[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..terms {
        term = matmul(&term, a);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                sum[i][j] += term[i][j];
            }
        }
    }
    sum
}

/// The so(3,1) matrix with skew entries `(B₁₂, B₁₃, B₂₃)` and boost `u`.
pub fn algebra(skew: [f64; 3], u: [f64; 3]) -> M4 {
    let [p, q, r] = skew;
    [[0.0, p, q, u[0]], [-p, 0.0, r, u[1]], [-q, -r, 0.0, u[2]], [u[0], u[1], u[2], 0.0]]
}

/// Reads `(B₁₂, B₁₃, B₂₃, u₁, u₂, u₃)` from an so(3,1) matrix.
pub fn coords(m: &M4) -> [f64; 6] {
    [m[0][1], m[0][2], m[1][2], m[0][3], m[1][3], m[2][3]]
}

pub fn random_algebra(rng: &mut ChaCha8Rng, scale: f64) -> M4 {
    let mut v = || rng.gen_range(-scale..scale);
    algebra([v(), v(), v()], [v(), v(), v()])
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> [f64; N] {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        let s: f64 = (i + 1..N).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Iwasawa coefficients `(k₁₂, k₁₃, k₂₃, α, n_a, n_b)` of `x` against the
/// basis of k, the boost generator `E₃₄ + E₄₃` and `N(a, b)`.
pub fn iwasawa_oracle(x: &M4) -> [f64; 6] {
    let nil = |a: f64, b: f64| -> M4 { [[0.0, 0.0, -a, a], [0.0, 0.0, -b, b], [a, b, 0.0, 0.0], [a, b, 0.0, 0.0]] };
    let basis: [M4; 6] = [
        algebra([1.0, 0.0, 0.0], [0.0; 3]),
        algebra([0.0, 1.0, 0.0], [0.0; 3]),
        algebra([0.0, 0.0, 1.0], [0.0; 3]),
        algebra([0.0; 3], [0.0, 0.0, 1.0]),
        nil(1.0, 0.0),
        nil(0.0, 1.0),
    ];
    let mut a = [[0.0; 6]; 6];
    for (j, e) in basis.iter().enumerate() {
        let c = coords(e);
        for i in 0..6 {
            a[i][j] = c[i];
        }
    }
    solve(a, coords(x))
}

/// Random spectrum as `(length, holonomy, multiplicity)` triples.
pub fn random_classes(
    rng: &mut ChaCha8Rng,
    max_classes: usize,
    lengths: (f64, f64),
    holonomies: (f64, f64),
    max_mult: u32,
) -> Vec<(f64, f64, u32)> {
    let n = rng.gen_range(1..=max_classes);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(lengths.0..lengths.1),
                rng.gen_range(holonomies.0..holonomies.1),
                rng.gen_range(1..=max_mult),
            )
        })
        .collect()
}

pub fn spectrum(classes: &[(f64, f64, u32)]) -> Spectrum {
    Spectrum::from_classes(classes.iter().map(|&(a, b, m)| PrimitiveClass::new(a, b, m).unwrap()))
}

/// Brute-force `(value, multiplicity)` list of `(-b·k - 2nπ)/a` for
/// `k ∈ {-m, …, m}` with `|value| ≤ im_bound`.
pub fn zero_line_brute(classes: &[(f64, f64, u32)], m: i64, im_bound: f64) -> Vec<(f64, u32)> {
    let mut out = Vec::new();
    for &(a, b, mult) in classes {
        let n_max = (im_bound * a / TAU).ceil() as i64 + 2 * m + 2;
        for k in -m..=m {
            for n in -n_max..=n_max {
                let v = (-b * k as f64 - TAU * n as f64) / a;
                if v.abs() <= im_bound {
                    out.push((v, mult));
                }
            }
        }
    }
    out
}

/// Naive truncated product `Π (1 - exp(-X))^mult` with `m₁, m₂ ≤ max_m`.
pub fn zeta_product(classes: &[(f64, f64, u32)], tau_m: i64, s: Complex64, max_m: u32) -> Complex64 {
    let mut z = Complex64::new(1.0, 0.0);
    for &(a, b, mult) in classes {
        for k in -tau_m..=tau_m {
            for m1 in 0..=max_m {
                for m2 in 0..=max_m {
                    let x = Complex64::new(
                        f64::from(m1 + m2) * a,
                        (k as f64 + f64::from(m1) - f64::from(m2)) * b,
                    ) + s * a;
                    z *= (Complex64::new(1.0, 0.0) - (-x).exp()).powu(mult);
                }
            }
        }
    }
    z
}

/// `log` of the product over the zero window's index set (`m₁ + m₂ ≤ max_m`),
/// built from the public Euler factors.
pub struct WindowProduct {
    factors: Vec<(i64, LatticePoint, PrimitiveClass)>,
}

impl WindowProduct {
    pub fn new(spec: &Spectrum, tau_m: u32, max_m: u32) -> Self {
        let mut factors = Vec::new();
        for cls in spec.iter() {
            for k in -i64::from(tau_m)..=i64::from(tau_m) {
                for m1 in 0..=max_m {
                    for m2 in 0..=(max_m - m1) {
                        factors.push((k, LatticePoint::new(m1, m2), *cls));
                    }
                }
            }
        }
        WindowProduct { factors }
    }

    pub fn log(&self, s: Complex64) -> Complex64 {
        self.factors
            .iter()
            .map(|(k, lp, cls)| euler_factor(*k, *lp, cls, s).ln() * f64::from(cls.multiplicity()))
            .sum()
    }

    /// Change of `arg P` along the segment `p → q`, sampled at spacing `h`
    /// and bisected wherever one step turns the phase by more than 0.5.
    pub fn phase_change(&self, p: Complex64, q: Complex64, h: f64) -> f64 {
        let steps = ((q - p).norm() / h).ceil().max(1.0) as usize;
        let mut total = 0.0;
        let mut prev = self.log(p);
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            let z1 = p + (q - p) * t;
            let next = self.log(z1);
            let z0 = p + (q - p) * ((i - 1) as f64 / steps as f64);
            total += self.refine(z0, z1, prev, next, 0);
            prev = next;
        }
        total
    }

    fn refine(&self, z0: Complex64, z1: Complex64, l0: Complex64, l1: Complex64, depth: u32) -> f64 {
        let d = wrap(l1.im - l0.im);
        if d.abs() <= 0.5 || depth >= 48 {
            return d;
        }
        let zm = (z0 + z1) * 0.5;
        let lm = self.log(zm);
        self.refine(z0, zm, l0, lm, depth + 1) + self.refine(zm, z1, lm, l1, depth + 1)
    }

    /// Number of zeros inside the rectangle `[re0, re1] × [im0, im1]`.
    pub fn count_in_rect(&self, re0: f64, re1: f64, im0: f64, im1: f64, h: f64) -> i64 {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let corners = [c(re0, im0), c(re1, im0), c(re1, im1), c(re0, im1)];
        let total: f64 = (0..4).map(|i| self.phase_change(corners[i], corners[(i + 1) % 4], h)).sum();
        (total / TAU).round() as i64
    }

    /// Number of zeros inside the circle `|s - center| < radius`.
    pub fn count_in_circle(&self, center: Complex64, radius: f64, points: usize) -> i64 {
        let at = |i: usize| center + Complex64::from_polar(radius, TAU * i as f64 / points as f64);
        let mut total = 0.0;
        for i in 0..points {
            let (z0, z1) = (at(i), at(i + 1));
            total += self.refine(z0, z1, self.log(z0), self.log(z1), 0);
        }
        (total / TAU).round() as i64
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > std::f64::consts::PI {
        y - TAU
    } else {
        y
    }
}

/// Result of scanning a zero window for zeros of the truncated product.
#[derive(Debug, Default)]
pub struct ScanReport {
    pub cells: usize,
    /// Cells whose winding count differs from the listed count:
    /// `(re, im0, im1, found, listed)`.
    pub mismatched_cells: Vec<(f64, f64, f64, i64, i64)>,
    /// Listed zeros whose small circle does not wind the listed multiplicity.
    pub mismatched_points: Vec<(Complex64, i64, i64)>,
}

/// Scans `Re s ∈ [-(max_m) - 1.5, 1.5]`, `|Im s| ≤ im_bound` in unit-width
/// strips centred on integers, split into cells of height about two, and
/// compares winding counts with `listed`. Each listed zero is then checked
/// with a circle of radius `radius`.
pub fn scan_window(
    product: &WindowProduct,
    listed: &[(Complex64, u32)],
    max_m: u32,
    im_bound: f64,
    grid: f64,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> ScanReport {
    let mut report = ScanReport::default();
    let listed_im: Vec<f64> = listed.iter().map(|(z, _)| z.im).collect();
    // Outer edges sit on ±im_bound unless a listed zero is too close to it.
    let margin = 1e-4;
    let top = if listed_im.iter().any(|v| (v - im_bound).abs() < margin) { im_bound - 2.0 * margin } else { im_bound };
    let bottom =
        if listed_im.iter().any(|v| (v + im_bound).abs() < margin) { -im_bound + 2.0 * margin } else { -im_bound };
    let n_cells = ((top - bottom) / 2.0).ceil().max(1.0) as usize;
    let mut edges = vec![bottom];
    for i in 1..n_cells {
        let nominal = bottom + (top - bottom) * i as f64 / n_cells as f64;
        let mut y = nominal + rng.gen_range(-0.4..0.4);
        for _ in 0..50 {
            if listed_im.iter().all(|v| (v - y).abs() > 1e-3) {
                break;
            }
            y = nominal + rng.gen_range(-0.6..0.6);
        }
        edges.push(y);
    }
    edges.push(top);
    let strips: Vec<i64> = (-(i64::from(max_m) + 1)..=1).collect();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // Horizontal edges per strip (left to right), vertical edges per
    // half-integer line (upward); each cell sums four shared edges.
    let horizontal: Vec<Vec<f64>> = strips
        .par_iter()
        .map(|&j| {
            let (re0, re1) = (j as f64 - 0.5, j as f64 + 0.5);
            edges.iter().map(|&y| product.phase_change(c(re0, y), c(re1, y), grid)).collect()
        })
        .collect();
    let vertical: Vec<Vec<f64>> = (0..=strips.len())
        .into_par_iter()
        .map(|i| {
            let x = strips[0] as f64 - 0.5 + i as f64;
            edges.windows(2).map(|w| product.phase_change(c(x, w[0]), c(x, w[1]), grid)).collect()
        })
        .collect();
    for (si, &j) in strips.iter().enumerate() {
        let (re0, re1) = (j as f64 - 0.5, j as f64 + 0.5);
        for (ci, w) in edges.windows(2).enumerate() {
            let (im0, im1) = (w[0], w[1]);
            report.cells += 1;
            let winding = horizontal[si][ci] + vertical[si + 1][ci] - horizontal[si][ci + 1] - vertical[si][ci];
            let found = (winding / TAU).round() as i64;
            let expected: i64 = listed
                .iter()
                .filter(|(z, _)| z.re > re0 && z.re < re1 && z.im > im0 && z.im < im1)
                .map(|&(_, m)| i64::from(m))
                .sum();
            if found != expected {
                report.mismatched_cells.push((j as f64, im0, im1, found, expected));
            }
        }
    }
    for &(z, _) in listed {
        if z.im <= bottom || z.im >= top {
            continue;
        }
        let expected: i64 = listed
            .iter()
            .filter(|(w, _)| (w - z).norm() < radius)
            .map(|&(_, m)| i64::from(m))
            .sum();
        let found = product.count_in_circle(z, radius, 128);
        if found != expected {
            report.mismatched_points.push((z, found, expected));
        }
    }
    report
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// One line of `tests/golden/cases.txt`: `name: exit-code args…`, where
/// `$GOLDEN` stands for the golden directory.
#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: String,
    pub exit_code: i32,
    pub argv: Vec<String>,
}

pub fn golden_cases() -> Result<Vec<GoldenCase>, String> {
    let dir = golden_dir();
    let text = std::fs::read_to_string(dir.join("cases.txt")).map_err(|e| e.to_string())?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (name, rest) = line.split_once(':').ok_or(format!("bad case line `{line}`"))?;
            let (code, args) = rest.trim().split_once(' ').ok_or(format!("bad case line `{line}`"))?;
            let argv = std::iter::once("hzeta".to_string())
                .chain(args.split_whitespace().map(|a| a.replace("$GOLDEN", dir.to_str().unwrap())))
                .collect();
            Ok(GoldenCase {
                name: name.trim().to_string(),
                exit_code: code.parse().map_err(|_| format!("bad exit code in `{line}`"))?,
                argv,
            })
        })
        .collect()
}

/// Runs every golden case, comparing stdout (with the golden directory
/// written as `$GOLDEN`) and the exit code. With `bless`, rewrites the
/// expected outputs instead.
pub fn run_golden_cases(bless: bool) -> Result<(usize, BTreeSet<String>), String> {
    let dir = golden_dir();
    let dir_str = dir.to_str().unwrap().to_string();
    let mut subcommands = BTreeSet::new();
    let cases = golden_cases()?;
    for case in &cases {
        subcommands.insert(case.argv[1].clone());
        let out = run_cli_with_stdin(&case.argv, None);
        let stdout = out.stdout.replace(&dir_str, "$GOLDEN");
        let path = dir.join(format!("{}.json", case.name));
        if bless {
            std::fs::write(&path, format!("{stdout}\n")).map_err(|e| e.to_string())?;
        }
        if out.exit_code != case.exit_code {
            return Err(format!("{}: exit {} != {}", case.name, out.exit_code, case.exit_code));
        }
        let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", case.name))?;
        if stdout != golden.trim_end() {
            return Err(format!("{}: output differs from golden\n  got:      {stdout}\n  expected: {}", case.name, golden.trim_end()));
        }
    }
    Ok((cases.len(), subcommands))
}
