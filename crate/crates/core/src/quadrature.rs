//! One-dimensional quadrature: globally adaptive Gauss-Kronrod (10/21),
//! composite Gauss-Legendre, and a power-law substitution for integrable
//! algebraic endpoint singularities.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + o.value,
            abs_err: self.abs_err + o.abs_err,
            evals: self.evals + o.evals,
        }
    }
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        QuadResult {
            value: self.value * s,
            abs_err: self.abs_err * s.abs(),
            evals: self.evals,
        }
    }
}

/// 21-point Kronrod rule on `[a, b]`: `(value, error estimate)`.
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_asc *= half.abs();
    res_abs *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Debug, PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// `int_a^b f`, splitting first at every point of `breaks` inside `(a, b)`.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<QuadResult> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("integration bounds".into()));
        }
        if a == b {
            return Ok(QuadResult::zero());
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p > lo && *p < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(lo);
        edges.extend(cuts);
        edges.push(hi);

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut evals = 0;
        for w in edges.windows(2) {
            let (v, e) = qk21(&f, w[0], w[1]);
            evals += 21;
            total += v;
            total_err += e;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value: v,
                err: e,
            });
        }

        let mut subdivisions = 0;
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if subdivisions >= self.max_subdivisions {
                return Err(Error::QuadratureNonConvergence {
                    estimate: total * sign,
                    error: total_err,
                    subdivisions,
                });
            }
            let worst = heap.pop().expect("at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel at machine resolution; accept its contribution as is.
                heap.push(Panel {
                    err: 0.0,
                    ..worst
                });
                total_err -= worst.err;
                continue;
            }
            let (v1, e1) = qk21(&f, worst.a, mid);
            let (v2, e2) = qk21(&f, mid, worst.b);
            evals += 42;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.err;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: v1,
                err: e1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: v2,
                err: e2,
            });
            subdivisions += 1;
        }
        // Re-sum from the panels to shed the drift of the running total.
        let mut sum = crate::numeric::NeumaierSum::default();
        let mut err = 0.0;
        for p in heap.iter() {
            sum.add(p.value);
            err += p.err;
        }
        if !sum.sum().is_finite() {
            return Err(Error::QuadratureNonConvergence {
                estimate: sum.sum(),
                error: f64::INFINITY,
                subdivisions,
            });
        }
        Ok(QuadResult {
            value: sign * sum.sum(),
            abs_err: err,
            evals,
        })
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// `int_0^len g(h) h^(-p) dh` for `0 <= p < 1` with `g` regular at 0.
    ///
    /// Uses `h = len * t^m`, `m = 1/(1-p)`, under which the singular factor
    /// and the Jacobian cancel exactly:
    /// `int = len^(1-p) * m * int_0^1 g(len * t^m) dt`.
    /// `kinks` are points in `h` where `g` is not smooth.
    pub fn integrate_power_singular<F: Fn(f64) -> f64>(
        &self,
        g: F,
        len: f64,
        p: f64,
        kinks: &[f64],
    ) -> Result<QuadResult> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "singularity exponent {p} is not integrable"
            )));
        }
        if !(len > 0.0) {
            return Err(Error::InvalidInput("panel length must be positive".into()));
        }
        let m = 1.0 / (1.0 - p);
        let tk: Vec<f64> = kinks
            .iter()
            .filter(|h| **h > 0.0 && **h < len)
            .map(|h| (h / len).powf(1.0 / m))
            .collect();
        let inner = self.integrate_with_breaks(|t| g(len * t.powf(m)), 0.0, 1.0, &tk)?;
        Ok(inner.scaled(len.powf(1.0 - p) * m))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            return (vec![0.0], vec![2.0]);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels of
/// `order` nodes each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(lo + 0.5 * h * (x + 1.0));
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}
