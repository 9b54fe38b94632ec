//! Exact geometry of the dual unit ball `B*` of `l_{w,1}^n`.
//!
//! `B*` is the convex hull of all signed permutations of `a`. When `a` is an
//! arithmetic progression it is a zonotope, and its generators give
//! `||x||_{w,1}` as a support function.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::{rational_to_f64, Weights};

pub const MAX_VERTEX_DIM: usize = 8;

/// Signed permutations of `a`, stored compactly.
///
/// Each coordinate is `sign * (id + 1)` where `id` indexes `values`, or `0`
/// for a zero coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    dim: usize,
    values: Vec<BigRational>,
    codes: Vec<i8>,
}

impl VertexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.codes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    fn decode(&self, c: i8) -> BigRational {
        match c.cmp(&0) {
            Ordering::Equal => BigRational::zero(),
            Ordering::Greater => self.values[c as usize - 1].clone(),
            Ordering::Less => -self.values[(-c) as usize - 1].clone(),
        }
    }

    pub fn point(&self, i: usize) -> Vec<BigRational> {
        self.codes[i * self.dim..(i + 1) * self.dim]
            .iter()
            .map(|&c| self.decode(c))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<BigRational>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn points_f64(&self) -> Vec<Vec<f64>> {
        let vf: Vec<f64> = self.values.iter().map(rational_to_f64).collect();
        self.codes
            .chunks(self.dim)
            .map(|ch| {
                ch.iter()
                    .map(|&c| match c.cmp(&0) {
                        Ordering::Equal => 0.0,
                        Ordering::Greater => vf[c as usize - 1],
                        Ordering::Less => -vf[(-c) as usize - 1],
                    })
                    .collect()
            })
            .collect()
    }
}

// Next lexicographic permutation in place; false once the last is passed.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Distinct signed permutations of the weights.
pub fn dual_extreme_points(w: &Weights) -> Result<VertexSet> {
    w.require_ordered()?;
    let n = w.len();
    if n > MAX_VERTEX_DIM {
        return Err(Error::TooLarge {
            what: "dimension for vertex enumeration",
            n,
            max: MAX_VERTEX_DIM,
        });
    }
    let a = w.to_rationals();
    let mut values: Vec<BigRational> = Vec::new();
    let mut ids: Vec<usize> = Vec::with_capacity(n);
    for v in &a {
        if v.is_zero() {
            ids.push(usize::MAX);
            continue;
        }
        let id = match values.iter().position(|u| u == v) {
            Some(p) => p,
            None => {
                values.push(v.clone());
                values.len() - 1
            }
        };
        ids.push(id);
    }
    ids.sort_unstable();
    let mut codes = Vec::new();
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&k| ids[k] != usize::MAX).collect();
        for mask in 0u32..(1u32 << nonzero.len()) {
            let mut row = vec![0i8; n];
            for (bit, &k) in nonzero.iter().enumerate() {
                let code = ids[k] as i8 + 1;
                row[k] = if mask >> bit & 1 == 1 { -code } else { code };
            }
            codes.extend_from_slice(&row);
        }
        if !next_permutation(&mut ids) {
            break;
        }
    }
    Ok(VertexSet { dim: n, values, codes })
}

/// `2^(#nonzero) * n! / prod(multiplicity!)`.
pub fn vertex_count(w: &Weights) -> u128 {
    let a = w.to_rationals();
    let n = a.len() as u128;
    let fact = |k: u128| (1..=k).product::<u128>();
    let mut groups: Vec<(BigRational, u128)> = Vec::new();
    for v in &a {
        match groups.iter_mut().find(|(u, _)| u == v) {
            Some(g) => g.1 += 1,
            None => groups.push((v.clone(), 1)),
        }
    }
    let nonzero = a.iter().filter(|v| !v.is_zero()).count() as u32;
    let denom: u128 = groups.iter().map(|(_, m)| fact(*m)).product();
    (1u128 << nonzero) * fact(n) / denom
}

fn dot(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn sub(u: &[BigRational], v: &[BigRational]) -> Vec<BigRational> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceShape {
    Triangle,
    Quadrilateral,
    Hexagon,
    Octagon,
    Polygon(usize),
}

impl FaceShape {
    fn from_count(k: usize) -> Self {
        match k {
            3 => FaceShape::Triangle,
            4 => FaceShape::Quadrilateral,
            6 => FaceShape::Hexagon,
            8 => FaceShape::Octagon,
            k => FaceShape::Polygon(k),
        }
    }
}

/// A convex polygon in an affine 2-plane of `R^n`, vertices in cyclic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFace {
    vertices: Vec<Vec<BigRational>>,
    origin: Vec<BigRational>,
    basis: [Vec<BigRational>; 2],
    /// Coordinates of each vertex in `origin + s basis[0] + t basis[1]`.
    planar: Vec<[BigRational; 2]>,
}

impl PlanarFace {
    /// Verifies exact coplanarity, orders the vertices by angle around the
    /// centroid and checks convex position.
    pub fn new(points: Vec<Vec<BigRational>>) -> Result<Self> {
        let mut uniq: Vec<Vec<BigRational>> = Vec::new();
        for p in points {
            if !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        if uniq.len() < 3 {
            return Err(Error::DegenerateFace(format!("{} distinct vertices", uniq.len())));
        }
        let dim = uniq[0].len();
        if uniq.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: uniq.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(dim),
            });
        }
        let origin = uniq[0].clone();
        let v1 = sub(&uniq[1], &origin);
        let g11 = dot(&v1, &v1);
        let mut v2 = None;
        for p in &uniq[2..] {
            let d = sub(p, &origin);
            let g12 = dot(&v1, &d);
            let g22 = dot(&d, &d);
            if &g11 * &g22 - &g12 * &g12 != BigRational::zero() {
                v2 = Some(d);
                break;
            }
        }
        let v2 = v2.ok_or_else(|| Error::DegenerateFace("vertices are collinear".into()))?;
        let g12 = dot(&v1, &v2);
        let g22 = dot(&v2, &v2);
        let det = &g11 * &g22 - &g12 * &g12;
        let mut planar = Vec::with_capacity(uniq.len());
        for p in &uniq {
            let d = sub(p, &origin);
            let r1 = dot(&v1, &d);
            let r2 = dot(&v2, &d);
            let s = (&g22 * &r1 - &g12 * &r2) / &det;
            let t = (&g11 * &r2 - &g12 * &r1) / &det;
            let resid: Vec<BigRational> = d
                .iter()
                .zip(v1.iter().zip(&v2))
                .map(|(di, (a, b))| di - &s * a - &t * b)
                .collect();
            if resid.iter().any(|r| !r.is_zero()) {
                return Err(Error::DegenerateFace("vertices are not coplanar".into()));
            }
            planar.push([s, t]);
        }

        let k = BigRational::from_integer(BigInt::from(uniq.len()));
        let cs: BigRational = planar.iter().map(|p| p[0].clone()).sum::<BigRational>() / &k;
        let ct: BigRational = planar.iter().map(|p| p[1].clone()).sum::<BigRational>() / &k;
        let rel: Vec<(BigRational, BigRational)> =
            planar.iter().map(|p| (&p[0] - &cs, &p[1] - &ct)).collect();
        let half = |u: &BigRational, v: &BigRational| -> u8 {
            if v.is_positive() || (v.is_zero() && u.is_positive()) {
                0
            } else {
                1
            }
        };
        let mut order: Vec<usize> = (0..uniq.len()).collect();
        order.sort_by(|&i, &j| {
            let (ui, vi) = &rel[i];
            let (uj, vj) = &rel[j];
            half(ui, vi).cmp(&half(uj, vj)).then_with(|| {
                let cross = ui * vj - vi * uj;
                BigRational::zero().cmp(&cross)
            })
        });
        let vertices: Vec<Vec<BigRational>> = order.iter().map(|&i| uniq[i].clone()).collect();
        let planar: Vec<[BigRational; 2]> = order.iter().map(|&i| planar[i].clone()).collect();

        let m = planar.len();
        let turn = |i: usize| {
            let (a, b, c) = (&planar[i], &planar[(i + 1) % m], &planar[(i + 2) % m]);
            (&b[0] - &a[0]) * (&c[1] - &b[1]) - (&b[1] - &a[1]) * (&c[0] - &b[0])
        };
        // the (s, t) frame may be reflected, so only a common turn sign is required
        let first = turn(0);
        if (0..m).any(|i| {
            let t = turn(i);
            t.is_zero() || t.is_positive() != first.is_positive()
        }) {
            return Err(Error::DegenerateFace("vertices are not in convex position".into()));
        }

        Ok(Self {
            vertices,
            origin,
            basis: [v1, v2],
            planar,
        })
    }

    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().map(rational_to_f64).collect())
            .collect()
    }

    pub fn origin(&self) -> &[BigRational] {
        &self.origin
    }

    pub fn basis(&self) -> &[Vec<BigRational>; 2] {
        &self.basis
    }

    pub fn planar_coordinates(&self) -> &[[BigRational; 2]] {
        &self.planar
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn shape(&self) -> FaceShape {
        FaceShape::from_count(self.vertices.len())
    }

    pub fn centroid(&self) -> Vec<BigRational> {
        let k = BigRational::from_integer(BigInt::from(self.vertices.len()));
        (0..self.dim())
            .map(|i| self.vertices.iter().map(|v| v[i].clone()).sum::<BigRational>() / &k)
            .collect()
    }

    /// OFF polygon: ambient coordinates when the face lives in `R^3` or
    /// lower, affine plane coordinates otherwise.
    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let dim = self.dim();
        if dim > 3 {
            s.push_str("# affine plane coordinates\n");
        }
        let _ = writeln!(s, "{} 1 0", self.vertices.len());
        for (v, p) in self.vertices.iter().zip(&self.planar) {
            let coords: Vec<f64> = if dim <= 3 {
                let mut c: Vec<f64> = v.iter().map(rational_to_f64).collect();
                c.resize(3, 0.0);
                c
            } else {
                vec![rational_to_f64(&p[0]), rational_to_f64(&p[1]), 0.0]
            };
            let _ = writeln!(s, "{} {} {}", coords[0], coords[1], coords[2]);
        }
        let idx: Vec<String> = (0..self.vertices.len()).map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", self.vertices.len(), idx.join(" "));
        s
    }
}

/// Whether `V = 2c - V` for the centroid `c`.
pub fn is_centrally_symmetric(face: &PlanarFace) -> bool {
    let c = face.centroid();
    let two = BigRational::from_integer(BigInt::from(2));
    let set: BTreeSet<&Vec<BigRational>> = face.vertices.iter().collect();
    face.vertices.iter().all(|v| {
        let r: Vec<BigRational> = c.iter().zip(v).map(|(ci, vi)| &two * ci - vi).collect();
        set.contains(&r)
    })
}

/// The face of `B*` spanned by all permutations of the last three
/// coordinates of `a`, the others held fixed.
pub fn permuted_triple_face(w: &Weights) -> Result<PlanarFace> {
    w.require_ordered()?;
    let a = w.to_rationals();
    let n = a.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 weights, got {n}")));
    }
    let tail = &a[n - 3..];
    if tail[0] == tail[2] {
        return Err(Error::DegenerateFace("the last three weights are equal".into()));
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let points = PERMS
        .iter()
        .map(|p| {
            let mut v = a[..n - 3].to_vec();
            v.extend(p.iter().map(|&i| tail[i].clone()));
            v
        })
        .collect();
    PlanarFace::new(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub vector: Vec<f64>,
    #[serde(skip)]
    pub exact: Vec<BigRational>,
    pub multiplicity: u32,
}

/// Segments `[-g, g]` whose Minkowski sum is `B*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSet {
    pub dim: usize,
    pub generators: Vec<Generator>,
}

impl GeneratorSet {
    fn push(&mut self, exact: Vec<BigRational>) {
        self.generators.push(Generator {
            vector: exact.iter().map(rational_to_f64).collect(),
            exact,
            multiplicity: 1,
        });
    }
}

/// `a_n e_i` for each `i`, and `(beta/2)(e_i + e_j)`, `(beta/2)(e_i - e_j)`
/// for `i < j`, with `beta = a_{n-1} - a_n`.
pub fn zonotope_generators(w: &Weights) -> Result<GeneratorSet> {
    w.require_ordered()?;
    let a = w.to_rationals();
    let n = a.len();
    if n >= 3 {
        let d0 = &a[0] - &a[1];
        if let Some(p) = a.windows(2).find(|p| &p[0] - &p[1] != d0) {
            let defect = rational_to_f64(&(&p[0] - &p[1] - &d0).abs());
            return Err(Error::NotArithmeticProgression { defect });
        }
    }
    let zero = BigRational::zero();
    let mut set = GeneratorSet {
        dim: n,
        generators: Vec::new(),
    };
    let last = &a[n - 1];
    if !last.is_zero() {
        for i in 0..n {
            let mut g = vec![zero.clone(); n];
            g[i] = last.clone();
            set.push(g);
        }
    }
    if n >= 2 {
        let half = (&a[n - 2] - last) / BigRational::from_integer(BigInt::from(2));
        if !half.is_zero() {
            for i in 0..n {
                for j in i + 1..n {
                    let mut g = vec![zero.clone(); n];
                    g[i] = half.clone();
                    g[j] = half.clone();
                    set.push(g.clone());
                    g[j] = -half.clone();
                    set.push(g);
                }
            }
        }
    }
    Ok(set)
}

/// `sum_j m_j |<x, g_j>|`.
pub fn support_function(gen: &GeneratorSet, x: &[f64]) -> Result<f64> {
    check_dim(gen, x.len())?;
    Ok(gen
        .generators
        .iter()
        .map(|g| {
            let d: f64 = g.vector.iter().zip(x).map(|(a, b)| a * b).sum();
            g.multiplicity as f64 * d.abs()
        })
        .sum())
}

pub fn support_function_exact(gen: &GeneratorSet, x: &[BigRational]) -> Result<BigRational> {
    check_dim(gen, x.len())?;
    Ok(gen
        .generators
        .iter()
        .map(|g| dot(&g.exact, x).abs() * BigRational::from_integer(BigInt::from(g.multiplicity)))
        .sum())
}

fn check_dim(gen: &GeneratorSet, found: usize) -> Result<()> {
    if found != gen.dim {
        return Err(Error::DimensionMismatch {
            expected: gen.dim,
            found,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceKind {
    pub kind: &'static str,
    pub vertices: usize,
    pub classes: usize,
    /// Symmetric for every weight vector.
    pub always_symmetric: bool,
    /// Symmetric for these weights.
    pub symmetric: bool,
}

/// The 2-faces of `B*` when the weights form an arithmetic progression:
/// two classes of quadrilaterals and one of octagons, symmetric for any
/// weights, and the permuted-triple hexagons, symmetric only for
/// arithmetic progressions. The hexagonal entry is computed; the others
/// are the documented classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceKindsReport {
    pub dim: usize,
    pub triple_shape: FaceShape,
    pub triple_symmetric: bool,
    pub kinds: Vec<FaceKind>,
}

pub fn face_kinds_report(w: &Weights) -> Result<FaceKindsReport> {
    let face = permuted_triple_face(w)?;
    let sym = is_centrally_symmetric(&face);
    let fixed = |kind, vertices, classes| FaceKind {
        kind,
        vertices,
        classes,
        always_symmetric: true,
        symmetric: true,
    };
    Ok(FaceKindsReport {
        dim: w.len(),
        triple_shape: face.shape(),
        triple_symmetric: sym,
        kinds: vec![
            fixed("quadrilateral", 4, 2),
            fixed("octagon", 8, 1),
            FaceKind {
                kind: "hexagon",
                vertices: 6,
                classes: 1,
                always_symmetric: false,
                symmetric: sym && face.shape() == FaceShape::Hexagon,
            },
        ],
    })
}
