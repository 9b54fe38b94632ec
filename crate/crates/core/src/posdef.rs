//! Positive definiteness of `exp(-(a_1 (x_1^*)^q + ... + a_n (x_n^*)^q))`
//! tested on finite Gram matrices.
//!
//! A negative eigenvalue is a certificate; a run without one is only
//! consistent with positive definiteness.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{decide_embeddable, DEFAULT_DECISION_TOL};
use crate::lorentz::{Exponent, Weights};
use crate::numeric::dot_compensated;

pub const MIN_POINTS: usize = 2;
pub const MAX_POINTS: usize = 200;
/// Relative eigenvalue below which a Gram matrix refutes positive definiteness.
pub const REFUTE_TOL: f64 = 1e-6;
/// Relative eigenvalue above which a Gram matrix counts as positive semidefinite.
pub const CONSISTENT_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_BUDGET: u64 = 50_000;
const ORACLE_SIZES: (usize, usize) = (5, 40);
const ORBIT_CAP: usize = 60;

/// The kernel `exp(-sum_k a_k (x_k^*)^q)` with `a` paired in the given order.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    weights: Weights,
    q: Exponent,
}

impl KernelSpec {
    /// `0 < q <= 2`; the weights need not be ordered.
    pub fn new(weights: Weights, q: Exponent) -> Result<Self> {
        if q.value() > 2.0 {
            return Err(Error::InvalidExponent(format!(
                "exp(-||x||^q) is never positive definite for q > 2, got {}",
                q.value()
            )));
        }
        Ok(Self { weights, q })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Kernel value at the difference `d`.
    pub fn value(&self, d: &[f64]) -> f64 {
        let mut s: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        s.sort_unstable_by(|a, b| b.total_cmp(a));
        let q = self.q.value();
        let e: f64 = self
            .weights
            .values()
            .iter()
            .zip(&s)
            .map(|(a, x)| if *a == 0.0 { 0.0 } else { a * x.powf(q) })
            .sum();
        (-e).exp()
    }

    /// The embeddability verdict for the sorted weights, which predicts
    /// positive definiteness.
    pub fn predicted_positive_definite(&self) -> bool {
        decide_embeddable(&self.weights.sorted(), self.q, DEFAULT_DECISION_TOL)
            .map(|d| d.verdict)
            .unwrap_or(false)
    }

    // Scale at which the kernel decays by O(1) along a coordinate axis.
    fn natural_scale(&self) -> f64 {
        let total: f64 = self.weights.values().iter().sum();
        total.powf(-1.0 / self.q.value())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub m: usize,
    pub min_eigenvalue: f64,
    /// Spectral norm of the Gram matrix.
    pub norm: f64,
    pub relative_min_eigenvalue: f64,
    /// `||M v - lambda v|| / ||M||` for the smallest eigenpair.
    pub residual: f64,
    /// Compensated `v^T M v / v^T v` for the smallest eigenvector.
    pub quadratic_form: f64,
    pub refuted: bool,
    pub consistent: bool,
    /// The point set, kept when it refutes.
    pub witness_points: Option<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
}

pub fn gram_matrix(k: &KernelSpec, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = k.dim();
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("point coordinate".into()));
    }
    let m = points.len();
    let mut g = DMatrix::<f64>::identity(m, m);
    let mut d = vec![0.0; n];
    for i in 0..m {
        for j in i + 1..m {
            for (t, dv) in d.iter_mut().enumerate() {
                *dv = points[i][t] - points[j][t];
            }
            let v = k.value(&d);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

fn evaluations(m: usize) -> u64 {
    (m * (m - 1) / 2) as u64
}

/// Smallest eigenvalue of the Gram matrix, with a residual check and a
/// compensated re-evaluation of the quadratic form before refuting.
pub fn gram_min_eig(k: &KernelSpec, points: &[Vec<f64>]) -> Result<GramReport> {
    let m = points.len();
    if !(MIN_POINTS..=MAX_POINTS).contains(&m) {
        return Err(Error::InvalidInput(format!(
            "need {MIN_POINTS}..={MAX_POINTS} points, got {m}"
        )));
    }
    let g = gram_matrix(k, points)?;
    let eig = SymmetricEigen::try_new(g.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenNonConvergence {
        residual: f64::INFINITY,
        limit: RESIDUAL_TOL,
    })?;
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let norm = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let v: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
    let residual = (&g * &v - &v * lmin).norm() / norm;
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::EigenNonConvergence {
            residual,
            limit: RESIDUAL_TOL,
        });
    }
    let vs = v.as_slice();
    let mv: Vec<f64> = (0..m)
        .map(|i| dot_compensated(g.row(i).transpose().as_slice(), vs))
        .collect();
    let quadratic_form = dot_compensated(vs, &mv) / dot_compensated(vs, vs);
    let rel = lmin / norm;
    let refuted = rel < -REFUTE_TOL && quadratic_form / norm < -REFUTE_TOL;
    Ok(GramReport {
        m,
        min_eigenvalue: lmin,
        norm,
        relative_min_eigenvalue: rel,
        residual,
        quadratic_form,
        refuted,
        consistent: rel >= -CONSISTENT_TOL,
        witness_points: refuted.then(|| points.to_vec()),
        seed: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Gaussian,
    Lattice,
    Subspace,
    Orbit,
}

const SAMPLERS: [Sampler; 4] = [Sampler::Gaussian, Sampler::Lattice, Sampler::Subspace, Sampler::Orbit];

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Signed permutations of `v`, in a fixed order.
pub fn signed_orbit(v: &[i64]) -> Vec<Vec<i64>> {
    let mut base = v.to_vec();
    base.sort_unstable();
    let mut out = Vec::new();
    loop {
        let nz: Vec<usize> = (0..base.len()).filter(|&i| base[i] != 0).collect();
        for mask in 0u32..(1 << nz.len()) {
            let mut p = base.clone();
            for (b, &i) in nz.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    p[i] = -p[i];
                }
            }
            out.push(p);
        }
        // next permutation of base
        let Some(i) = (1..base.len()).rev().find(|&i| base[i - 1] < base[i]) else {
            break;
        };
        let j = (i..base.len()).rev().find(|&j| base[j] > base[i - 1]).expect("pivot");
        base.swap(i - 1, j);
        base[i..].reverse();
    }
    out
}

fn sample_points(k: &KernelSpec, sampler: Sampler, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = k.dim();
    let m = rng.random_range(ORACLE_SIZES.0..=ORACLE_SIZES.1);
    let scale = k.natural_scale() * log_uniform(rng, 1e-3, 3.0);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    match sampler {
        Sampler::Gaussian => (0..m)
            .map(|_| (0..n).map(|_| scale * normal(rng)).collect())
            .collect(),
        Sampler::Lattice => {
            let r: i64 = rng.random_range(1..=3);
            (0..m)
                .map(|_| (0..n).map(|_| scale * rng.random_range(-r..=r) as f64).collect())
                .collect()
        }
        Sampler::Subspace => {
            // span of two random diagonal directions e_i +- e_j
            let dirs: Vec<Vec<f64>> = (0..2)
                .map(|_| {
                    let mut d = vec![0.0; n];
                    let i = rng.random_range(0..n);
                    d[i] = 1.0;
                    if n > 1 {
                        let j = (i + rng.random_range(1..n)) % n;
                        d[j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    }
                    d
                })
                .collect();
            (0..m)
                .map(|_| {
                    let (s, t) = (normal(rng), normal(rng));
                    (0..n).map(|c| scale * (s * dirs[0][c] + t * dirs[1][c])).collect()
                })
                .collect()
        }
        Sampler::Orbit => {
            let mut v: Vec<i64> = (0..n).map(|_| rng.random_range(0..=2)).collect();
            if v.iter().all(|x| *x == 0) {
                v[0] = 1;
            }
            let mut pts = signed_orbit(&v);
            if pts.len() > ORACLE_SIZES.1 {
                pts.shuffle(rng);
                pts.truncate(m);
            }
            if pts.len() < 2 {
                pts.push(vec![0; n]);
            }
            pts.into_iter()
                .map(|p| p.into_iter().map(|c| scale * c as f64).collect())
                .collect()
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    /// No trial refuted.
    pub consistent: bool,
    pub trials: usize,
    pub seed: u64,
    /// Smallest relative eigenvalue over all trials.
    pub min_relative_eigenvalue: f64,
    /// First refuting trial in trial order.
    pub refuting_trial: Option<usize>,
    pub refuting_sampler: Option<Sampler>,
    pub witness: Option<GramReport>,
    /// Embeddability verdict of the sorted weights.
    pub predicted_positive_definite: bool,
}

/// Random Gram matrices from mixed samplers; the first refuting trial (in
/// trial order) wins, independently of thread scheduling.
pub fn schoenberg_decision_oracle(k: &KernelSpec, trials: usize, seed: u64) -> Result<OracleVerdict> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let reports: Vec<(Sampler, GramReport)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sampler = SAMPLERS[t % SAMPLERS.len()];
            let mut rng = trial_rng(seed, t as u64);
            let pts = sample_points(k, sampler, &mut rng);
            gram_min_eig(k, &pts).map(|r| (sampler, r))
        })
        .collect::<Result<_>>()?;
    let min_rel = reports
        .iter()
        .map(|(_, r)| r.relative_min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let first = reports.iter().position(|(_, r)| r.refuted);
    Ok(OracleVerdict {
        consistent: first.is_none(),
        trials,
        seed,
        min_relative_eigenvalue: min_rel,
        refuting_trial: first,
        refuting_sampler: first.map(|i| reports[i].0),
        witness: first.map(|i| {
            let mut r = reports[i].1.clone();
            r.seed = Some(seed);
            r
        }),
        predicted_positive_definite: k.predicted_positive_definite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub found: bool,
    pub strategy: Option<String>,
    pub evaluations: u64,
    pub budget: u64,
    pub seed: u64,
    pub best_relative_eigenvalue: f64,
    pub witness: Option<GramReport>,
}

struct Search<'a> {
    k: &'a KernelSpec,
    budget: u64,
    used: u64,
    best: f64,
}

impl Search<'_> {
    fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.used)
    }

    // Evaluates a point set if the budget allows; Some(report) when it refutes.
    fn try_set(&mut self, pts: &[Vec<f64>], limit: u64) -> Result<Option<GramReport>> {
        let cost = evaluations(pts.len());
        if self.used + cost > limit {
            return Ok(None);
        }
        self.used += cost;
        let r = gram_min_eig(self.k, pts)?;
        self.best = self.best.min(r.relative_min_eigenvalue);
        Ok(r.refuted.then_some(r))
    }

    fn relative_eig(&mut self, pts: &[Vec<f64>], cost: u64) -> Result<f64> {
        self.used += cost;
        let r = gram_min_eig(self.k, pts)?;
        self.best = self.best.min(r.relative_min_eigenvalue);
        Ok(r.relative_min_eigenvalue)
    }
}

// Non-increasing vectors with entries in 0..=top, supported on the first
// `support` coordinates.
fn orbit_bases(n: usize, support: usize, top: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; support];
    fn rec(pos: usize, max: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == cur.len() {
            if cur[0] > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in (0..=max).rev() {
            cur[pos] = v;
            rec(pos + 1, v, cur, out);
        }
    }
    rec(0, top, &mut cur, &mut out);
    out.sort_by_key(|v| (v.iter().filter(|x| **x != 0).count(), v.iter().sum::<i64>()));
    out.into_iter()
        .map(|mut v| {
            v.resize(n, 0);
            v
        })
        .collect()
}

/// Directed search for a point set whose Gram matrix has a certified
/// negative eigenvalue. `budget` counts kernel evaluations.
///
/// Strategies, in order: scaled signed-permutation orbits of small lattice
/// vectors (points on the hyperplanes `|x_i| = |x_j|` where the order
/// statistics kink), random restarts with coordinate descent on the
/// smallest eigenvalue, and random sets confined to two or three coordinates.
pub fn witness_search(k: &KernelSpec, budget: u64, seed: u64) -> Result<SearchOutcome> {
    if budget < 100 {
        return Err(Error::InvalidInput(format!("budget must be at least 100, got {budget}")));
    }
    let n = k.dim();
    let mut s = Search {
        k,
        budget,
        used: 0,
        best: f64::INFINITY,
    };
    let finish = |s: &Search, strategy: Option<&str>, witness: Option<GramReport>| SearchOutcome {
        found: witness.is_some(),
        strategy: strategy.map(str::to_string),
        evaluations: s.used,
        budget,
        seed,
        best_relative_eigenvalue: s.best,
        witness: witness.map(|mut w| {
            w.seed = Some(seed);
            w
        }),
    };
    let base_scale = k.natural_scale();
    let scales: Vec<f64> = (0..20).map(|i| base_scale * 1e-3 * 3000f64.powf(i as f64 / 19.0)).collect();

    // (1) lattice orbits
    let limit = budget / 2;
    let mut bases = orbit_bases(n, n.min(3), 3);
    if n > 3 {
        bases.extend(orbit_bases(n, n.min(4), 1));
    }
    'orbits: for v in &bases {
        let orbit = signed_orbit(v);
        if orbit.len() < 3 || orbit.len() > ORBIT_CAP {
            continue;
        }
        for &sc in &scales {
            if s.used + evaluations(orbit.len()) > limit {
                break 'orbits;
            }
            let pts: Vec<Vec<f64>> = orbit
                .iter()
                .map(|p| p.iter().map(|&c| sc * c as f64).collect())
                .collect();
            if let Some(w) = s.try_set(&pts, limit)? {
                return Ok(finish(&s, Some("lattice_orbit"), Some(w)));
            }
        }
    }

    // (2) coordinate descent from random restarts
    let mut rng = trial_rng(seed, 0);
    let limit = s.used + s.remaining() * 3 / 5;
    let m = 12usize;
    while s.used + evaluations(m) <= limit {
        let sc = base_scale * log_uniform(&mut rng, 1e-2, 3.0);
        let mut pts: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| sc * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut cur = s.relative_eig(&pts, evaluations(m))?;
        let mut step = 0.5 * sc;
        while step > 1e-3 * sc && s.used + (m as u64) <= limit {
            let mut improved = false;
            for i in 0..m {
                for c in 0..n {
                    for dir in [1.0, -1.0] {
                        if s.used + (m as u64) > limit {
                            break;
                        }
                        pts[i][c] += dir * step;
                        // one row of the Gram matrix changes
                        let v = s.relative_eig(&pts, (m - 1) as u64)?;
                        if v < cur {
                            cur = v;
                            improved = true;
                            break;
                        }
                        pts[i][c] -= dir * step;
                    }
                }
            }
            if cur < -REFUTE_TOL {
                let r = gram_min_eig(k, &pts)?;
                if r.refuted {
                    return Ok(finish(&s, Some("coordinate_descent"), Some(r)));
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }

    // (3) sets confined to a few coordinates
    let dims = n.min(3).max(1);
    while s.remaining() >= evaluations(ORACLE_SIZES.1) {
        let sub = rng.random_range(1..=dims);
        let mut coords: Vec<usize> = (0..n).collect();
        coords.shuffle(&mut rng);
        coords.truncate(sub);
        let size = rng.random_range(ORACLE_SIZES.0..=ORACLE_SIZES.1);
        let sc = base_scale * log_uniform(&mut rng, 1e-3, 3.0);
        let pts: Vec<Vec<f64>> = (0..size)
            .map(|_| {
                let mut p = vec![0.0; n];
                for &c in &coords {
                    p[c] = sc * rng.random_range(-2i64..=2) as f64;
                }
                p
            })
            .collect();
        if let Some(w) = s.try_set(&pts, budget)? {
            return Ok(finish(&s, Some("restricted_dimension"), Some(w)));
        }
    }
    Ok(finish(&s, None, None))
}
