//! Vector polynomial maps of small dimension and degree: exact iterate
//! composition, periodic-point enumeration with Bezout caps, the power-map
//! certificate, and Monte-Carlo hyperbolicity statistics.
//!
//! Dimension 1 is exact end to end (composition in rational arithmetic,
//! real counts by Sturm chains, complex roots by the simultaneous
//! iteration). Dimension 2 enumerates real cycles by seeded Newton on the
//! cycle system and reports an honest lower bound.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::solve_dense;
use crate::poly::exact::{RatPoly, SturmChain};
use crate::poly::{roots, Poly};

/// Number of multi-indices of total degree at most `d` in `n` variables.
pub fn coefficient_count(n: usize, d: usize) -> usize {
    match n {
        1 => d + 1,
        2 => (d + 1) * (d + 2) / 2,
        _ => unimplemented!("only dimensions 1 and 2 are built"),
    }
}

/// Dense bivariate polynomial over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct BiRat {
    /// c[i][j] multiplies x^i y^j.
    pub c: Vec<Vec<BigRational>>,
}

impl BiRat {
    pub fn zero() -> Self {
        BiRat { c: Vec::new() }
    }

    pub fn constant(v: BigRational) -> Self {
        BiRat { c: vec![vec![v]] }
    }

    fn get(&self, i: usize, j: usize) -> BigRational {
        self.c
            .get(i)
            .and_then(|row| row.get(j))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn set(&mut self, i: usize, j: usize, v: BigRational) {
        while self.c.len() <= i {
            self.c.push(Vec::new());
        }
        let row = &mut self.c[i];
        while row.len() <= j {
            row.push(BigRational::zero());
        }
        row[j] = v;
    }

    fn add(&self, other: &BiRat) -> BiRat {
        let mut out = self.clone();
        for (i, row) in other.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.set(i, j, out.get(i, j) + v);
                }
            }
        }
        out
    }

    fn mul(&self, other: &BiRat) -> BiRat {
        let mut out = BiRat::zero();
        for (i1, row1) in self.c.iter().enumerate() {
            for (j1, v1) in row1.iter().enumerate() {
                if v1.is_zero() {
                    continue;
                }
                for (i2, row2) in other.c.iter().enumerate() {
                    for (j2, v2) in row2.iter().enumerate() {
                        if v2.is_zero() {
                            continue;
                        }
                        let cur = out.get(i1 + i2, j1 + j2);
                        out.set(i1 + i2, j1 + j2, cur + v1 * v2);
                    }
                }
            }
        }
        out
    }

    /// Substitute `x = u(x, y)`, `y = v(x, y)`.
    fn compose(&self, u: &BiRat, v: &BiRat) -> BiRat {
        let mut acc = BiRat::zero();
        for row in self.c.iter().rev() {
            // acc = acc * u + row(v)
            let mut inner = BiRat::zero();
            for cv in row.iter().rev() {
                inner = inner.mul(v);
                let cur = inner.get(0, 0);
                inner.set(0, 0, cur + cv);
            }
            acc = acc.mul(u).add(&inner);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.c.iter().rev() {
            let mut inner = 0.0;
            for v in row.iter().rev() {
                inner = inner * y + v.to_f64().unwrap_or(f64::NAN);
            }
            acc = acc * x + inner;
        }
        acc
    }

    fn dx(&self) -> BiRat {
        let mut out = BiRat::zero();
        for (i, row) in self.c.iter().enumerate() {
            if i == 0 {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.set(i - 1, j, v * BigRational::from_integer(BigInt::from(i)));
                }
            }
        }
        out
    }

    fn dy(&self) -> BiRat {
        let mut out = BiRat::zero();
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if j >= 1 && !v.is_zero() {
                    out.set(i, j - 1, v * BigRational::from_integer(BigInt::from(j)));
                }
            }
        }
        out
    }

    fn total_degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    d = d.max(i + j);
                }
            }
        }
        d
    }
}

/// A polynomial self-map of N-space (N = 1 or 2) with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorPolynomial {
    One(RatPoly),
    Two { px: BiRat, py: BiRat },
}

/// Composition budgets: refuse rather than degrade.
#[derive(Debug, Clone)]
pub struct ComposeBudget {
    /// Max iterate degree in dimension 1.
    pub max_degree_1d: usize,
    /// Max period in dimension 2.
    pub max_period_2d: usize,
    /// Max base degree in dimension 2.
    pub max_degree_2d: usize,
}

impl Default for ComposeBudget {
    fn default() -> Self {
        ComposeBudget {
            max_degree_1d: 1 << 12,
            max_period_2d: 3,
            max_degree_2d: 3,
        }
    }
}

impl VectorPolynomial {
    pub fn dim(&self) -> usize {
        match self {
            VectorPolynomial::One(_) => 1,
            VectorPolynomial::Two { .. } => 2,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            VectorPolynomial::One(p) => p.degree(),
            VectorPolynomial::Two { px, py } => px.total_degree().max(py.total_degree()),
        }
    }

    /// One-dimensional map from ascending f64 coefficients.
    pub fn one_from_coeffs(coeffs: &[f64]) -> Result<Self> {
        Ok(VectorPolynomial::One(RatPoly::from_f64_coeffs(coeffs)?))
    }

    /// Two-dimensional map from per-component coefficient lists in graded
    /// order: degree blocks d = 0..=D, each block ordered by descending
    /// x-power.
    pub fn two_from_coeffs(d: usize, ax: &[f64], ay: &[f64]) -> Result<Self> {
        let expect = coefficient_count(2, d);
        if ax.len() != expect || ay.len() != expect {
            return Err(Error::invalid(format!(
                "expected {expect} coefficients per component for degree {d}"
            )));
        }
        let build = |a: &[f64]| -> Result<BiRat> {
            let mut p = BiRat::zero();
            let mut idx = 0;
            for total in 0..=d {
                for i in (0..=total).rev() {
                    let j = total - i;
                    let v = BigRational::from_float(a[idx])
                        .ok_or_else(|| Error::invalid("non-finite coefficient"))?;
                    if !v.is_zero() {
                        p.set(i, j, v);
                    }
                    idx += 1;
                }
            }
            Ok(p)
        };
        Ok(VectorPolynomial::Two {
            px: build(ax)?,
            py: build(ay)?,
        })
    }

    /// The k-fold composition, exactly.
    pub fn iterate_compose(&self, k: usize, budget: &ComposeBudget) -> Result<VectorPolynomial> {
        if k < 1 {
            return Err(Error::invalid("iterate count must be at least 1"));
        }
        match self {
            VectorPolynomial::One(p) => {
                let deg = p.degree().max(1).checked_pow(k as u32).ok_or_else(|| {
                    Error::Budget("iterate degree overflows".into())
                })?;
                if deg > budget.max_degree_1d {
                    return Err(Error::Budget(format!(
                        "iterate degree {deg} exceeds the 1-d budget {}",
                        budget.max_degree_1d
                    )));
                }
                Ok(VectorPolynomial::One(p.iterate(k)))
            }
            VectorPolynomial::Two { px, py } => {
                if k > budget.max_period_2d || self.degree() > budget.max_degree_2d {
                    return Err(Error::Budget(format!(
                        "2-d composition limited to degree {} and period {}",
                        budget.max_degree_2d, budget.max_period_2d
                    )));
                }
                let mut ax = px.clone();
                let mut ay = py.clone();
                for _ in 1..k {
                    let nx = px.compose(&ax, &ay);
                    let ny = py.compose(&ax, &ay);
                    ax = nx;
                    ay = ny;
                }
                Ok(VectorPolynomial::Two { px: ax, py: ay })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Field {
    Real,
    Complex,
}

/// Period-k solution set with multiplier spectra and the Bezout cap.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicSolutionSet {
    pub period: usize,
    pub dim: usize,
    pub field: Field,
    /// Each point: one (re, im) pair per coordinate.
    pub points: Vec<Vec<(f64, f64)>>,
    /// Eigenvalues of the cycle Jacobian at each point.
    pub multipliers: Vec<Vec<(f64, f64)>>,
    /// Distance of the closest multiplier modulus to 1, per point.
    pub margins: Vec<f64>,
    pub bezout_cap: u128,
    /// True when the enumeration is exhaustive (dimension 1).
    pub complete: bool,
    pub count: usize,
}

impl PeriodicSolutionSet {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sorted_multiplier_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self
            .multipliers
            .iter()
            .flatten()
            .map(|(re, im)| re.hypot(*im))
            .collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }
}

fn bezout_cap(d: usize, k: usize, n: usize) -> u128 {
    (d.max(1) as u128).pow((k * n) as u32)
}

/// All period-k points of a 1- or 2-dimensional polynomial map.
pub fn periodic_points(
    map: &VectorPolynomial,
    k: usize,
    field: Field,
    budget: &ComposeBudget,
) -> Result<PeriodicSolutionSet> {
    match map {
        VectorPolynomial::One(_) => periodic_points_1d(map, k, field, budget),
        VectorPolynomial::Two { .. } => {
            if field == Field::Complex {
                return Err(Error::invalid(
                    "complex enumeration is only exhaustive in dimension 1; use the power-map certificate for product maps",
                ));
            }
            periodic_points_2d_cycles(map, k, budget)
        }
    }
}

fn periodic_points_1d(
    map: &VectorPolynomial,
    k: usize,
    field: Field,
    budget: &ComposeBudget,
) -> Result<PeriodicSolutionSet> {
    let VectorPolynomial::One(p) = map else {
        unreachable!()
    };
    let iterate = map.iterate_compose(k, budget)?;
    let VectorPolynomial::One(it) = iterate else {
        unreachable!()
    };
    let fixed = it.sub(&RatPoly::from_f64_coeffs(&[0.0, 1.0])?);
    if fixed.is_zero() {
        return Err(Error::Nonisolated(
            "every point solves the cycle system".into(),
        ));
    }
    let cap = bezout_cap(p.degree(), k, 1);
    let int_poly = fixed.clear_denominators();
    if int_poly.degree() == 0 {
        // Constant nonzero: no solutions (degenerate map).
        return Ok(PeriodicSolutionSet {
            period: k,
            dim: 1,
            field,
            points: Vec::new(),
            multipliers: Vec::new(),
            margins: Vec::new(),
            bezout_cap: cap,
            complete: true,
            count: 0,
        });
    }
    let chain = SturmChain::build(&int_poly, 1 << 26)?;
    if chain.gcd_degree > 0 {
        return Err(Error::NonSquareFree {
            gcd_degree: chain.gcd_degree,
        });
    }
    if fixed.degree() > 1 << 11 {
        return Err(Error::Budget(format!(
            "root extraction beyond degree {} is out of budget",
            1 << 11
        )));
    }
    let fixed_f64 = Poly::new(fixed.to_f64_coeffs());
    if fixed_f64.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Budget(
            "iterate coefficients exceed the double range; only counting is possible".into(),
        ));
    }
    let all = roots::all_roots(&fixed_f64);
    // Polish and split by field.
    let deriv_f64 = Poly::new(it.derivative().to_f64_coeffs());
    let mut points: Vec<Complex64> = match field {
        Field::Complex => all,
        Field::Real => {
            let real_count = chain.count_all_real_roots();
            let mut reals: Vec<Complex64> = all
                .into_iter()
                .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
                .map(|z| Complex64::new(z.re, 0.0))
                .collect();
            reals.dedup_by(|a, b| (a.re - b.re).abs() < 1e-10 * (1.0 + b.re.abs()));
            if reals.len() != real_count {
                return Err(Error::CertificateFailure(format!(
                    "located {} real cycle points but the exact count is {real_count}",
                    reals.len()
                )));
            }
            reals
        }
    };
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut mult = Vec::with_capacity(points.len());
    let mut margins = Vec::with_capacity(points.len());
    for z in &points {
        let m = eval_complex(&deriv_f64.coeffs, *z);
        mult.push(vec![(m.re, m.im)]);
        margins.push((m.norm() - 1.0).abs());
    }
    let count = points.len();
    Ok(PeriodicSolutionSet {
        period: k,
        dim: 1,
        field,
        points: points.iter().map(|z| vec![(z.re, z.im)]).collect(),
        multipliers: mult,
        margins,
        bezout_cap: cap,
        complete: true,
        count,
    })
}

fn eval_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Dense-grid Newton on the cycle system
/// `P(x_1) = x_2, ..., P(x_k) = x_1` for real 2-d maps; reported count is
/// a lower bound.
fn periodic_points_2d_cycles(
    map: &VectorPolynomial,
    k: usize,
    budget: &ComposeBudget,
) -> Result<PeriodicSolutionSet> {
    let VectorPolynomial::Two { px, py } = map else {
        unreachable!()
    };
    if k > budget.max_period_2d || map.degree() > budget.max_degree_2d {
        return Err(Error::Budget(format!(
            "2-d cycle search limited to degree {} and period {}",
            budget.max_degree_2d, budget.max_period_2d
        )));
    }
    let apply = |x: f64, y: f64| (px.eval_f64(x, y), py.eval_f64(x, y));
    let jac = {
        let dxx = px.dx();
        let dxy = px.dy();
        let dyx = py.dx();
        let dyy = py.dy();
        move |x: f64, y: f64| {
            [
                [dxx.eval_f64(x, y), dxy.eval_f64(x, y)],
                [dyx.eval_f64(x, y), dyy.eval_f64(x, y)],
            ]
        }
    };
    let half = 3.0f64;
    let grid = 13usize;
    let dim = 2 * k;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for gi in 0..grid {
        for gj in 0..grid {
            let x0 = -half + 2.0 * half * (gi as f64 + 0.5) / grid as f64;
            let y0 = -half + 2.0 * half * (gj as f64 + 0.5) / grid as f64;
            // Seed the cycle by pushing forward.
            let mut u = vec![0.0; dim];
            u[0] = x0;
            u[1] = y0;
            let mut ok = true;
            for i in 1..k {
                let (nx, ny) = apply(u[2 * i - 2], u[2 * i - 1]);
                if !nx.is_finite() || !ny.is_finite() || nx.abs() + ny.abs() > 1e3 {
                    ok = false;
                    break;
                }
                u[2 * i] = nx;
                u[2 * i + 1] = ny;
            }
            if !ok {
                continue;
            }
            if let Some(sol) = newton_cycle(&apply, &jac, u, k) {
                if sol.iter().all(|v| v.abs() <= half * 1.5) {
                    found.push(sol);
                }
            }
        }
    }
    // Collect individual points of all cycles, dedup deterministically.
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for sol in &found {
        for i in 0..k {
            pts.push((sol[2 * i], sol[2 * i + 1]));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut unique: Vec<(f64, f64)> = Vec::new();
    'outer: for p in pts {
        for q in &unique {
            if (p.0 - q.0).hypot(p.1 - q.1) < 1e-8 {
                continue 'outer;
            }
        }
        unique.push(p);
    }
    let mut multipliers = Vec::new();
    let mut margins = Vec::new();
    for &(x, y) in &unique {
        // Cycle Jacobian product starting at this point.
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        let (mut cx, mut cy) = (x, y);
        for _ in 0..k {
            let j = jac(cx, cy);
            m = mat2_mul(j, m);
            let (nx, ny) = apply(cx, cy);
            cx = nx;
            cy = ny;
        }
        let eig = eig2(m);
        margins.push(
            eig.iter()
                .map(|(re, im)| (re.hypot(*im) - 1.0).abs())
                .fold(f64::INFINITY, f64::min),
        );
        multipliers.push(eig.to_vec());
    }
    let count = unique.len();
    Ok(PeriodicSolutionSet {
        period: k,
        dim: 2,
        field: Field::Real,
        points: unique
            .iter()
            .map(|&(x, y)| vec![(x, 0.0), (y, 0.0)])
            .collect(),
        multipliers,
        margins,
        bezout_cap: bezout_cap(map.degree(), k, 2),
        complete: false,
        count,
    })
}

fn mat2_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn eig2(m: [[f64; 2]; 2]) -> [(f64, f64); 2] {
    let t = m[0][0] + m[1][1];
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = t * t - 4.0 * d;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [((t + s) / 2.0, 0.0), ((t - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [(t / 2.0, s), (t / 2.0, -s)]
    }
}

type Apply<'a> = &'a dyn Fn(f64, f64) -> (f64, f64);
type Jac<'a> = &'a dyn Fn(f64, f64) -> [[f64; 2]; 2];

fn newton_cycle(apply: Apply, jac: Jac, mut u: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    let dim = 2 * k;
    for _ in 0..60 {
        // Residual P(x_i) - x_{i+1}.
        let mut r = vec![0.0; dim];
        let mut norm = 0.0f64;
        for i in 0..k {
            let (px, py) = apply(u[2 * i], u[2 * i + 1]);
            let nxt = (i + 1) % k;
            r[2 * i] = px - u[2 * nxt];
            r[2 * i + 1] = py - u[2 * nxt + 1];
            norm = norm.max(r[2 * i].abs()).max(r[2 * i + 1].abs());
        }
        if norm < 1e-12 {
            return Some(u);
        }
        let mut a = vec![vec![0.0; dim]; dim];
        for i in 0..k {
            let j = jac(u[2 * i], u[2 * i + 1]);
            let nxt = (i + 1) % k;
            a[2 * i][2 * i] = j[0][0];
            a[2 * i][2 * i + 1] = j[0][1];
            a[2 * i + 1][2 * i] = j[1][0];
            a[2 * i + 1][2 * i + 1] = j[1][1];
            a[2 * i][2 * nxt] -= 1.0;
            a[2 * i + 1][2 * nxt + 1] -= 1.0;
        }
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        if solve_dense(&mut a, &mut rhs).is_err() {
            return None;
        }
        for (ui, di) in u.iter_mut().zip(&rhs) {
            *ui += di;
            if !ui.is_finite() || ui.abs() > 1e6 {
                return None;
            }
        }
    }
    None
}

/// Multiplier spectra and unit-circle margins at given solution points of
/// the k-th iterate (dimension 1).
pub fn multiplier_spectrum(
    map: &VectorPolynomial,
    points: &[Complex64],
    k: usize,
    budget: &ComposeBudget,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let VectorPolynomial::One(_) = map else {
        return Err(Error::invalid(
            "standalone spectra are built for dimension 1; planar cycles carry theirs in the solution set",
        ));
    };
    let iterate = map.iterate_compose(k, budget)?;
    let VectorPolynomial::One(it) = iterate else {
        unreachable!()
    };
    let deriv = Poly::new(it.derivative().to_f64_coeffs());
    let spectra: Vec<Complex64> = points
        .iter()
        .map(|&z| eval_complex(&deriv.coeffs, z))
        .collect();
    let margins = spectra.iter().map(|m| (m.norm() - 1.0).abs()).collect();
    Ok((spectra, margins))
}

/// Verify the isolated-solution count against the Bezout cap.
#[derive(Debug, Clone, Serialize)]
pub struct BezoutCheck {
    pub period: usize,
    pub count: usize,
    pub cap: u128,
    pub within_cap: bool,
    pub exact: bool,
}

pub fn bezout_check(
    map: &VectorPolynomial,
    k: usize,
    budget: &ComposeBudget,
) -> Result<BezoutCheck> {
    let field = if map.dim() == 1 {
        Field::Complex
    } else {
        Field::Real
    };
    let set = periodic_points(map, k, field, budget)?;
    Ok(BezoutCheck {
        period: k,
        count: set.count,
        cap: set.bezout_cap,
        within_cap: (set.count as u128) <= set.bezout_cap,
        exact: set.complete,
    })
}

/// Exact enumeration for the coordinatewise power map
/// `(z_1, ..., z_N) -> (z_1^D, ..., z_N^D)`: per coordinate the period-k
/// points are 0 and the (D^k - 1)-st roots of unity, all hyperbolic.
#[derive(Debug, Clone, Serialize)]
pub struct PowerMapCertificate {
    pub dim: usize,
    pub degree: usize,
    pub period: usize,
    pub count: u128,
    pub expected: u128,
    pub count_matches: bool,
    /// min over points of the unit-circle margin; positive certifies
    /// hyperbolicity of the whole set.
    pub min_margin: f64,
    /// Sorted multiplier moduli (for cross-checks against the generic
    /// enumerator).
    pub sorted_moduli: Vec<f64>,
    /// Number of real periodic points (cross-check for real searches).
    pub real_count: u128,
}

pub fn power_map_certificate(n: usize, d: usize, k: usize) -> Result<PowerMapCertificate> {
    if n == 0 || d < 2 || k == 0 {
        return Err(Error::invalid("need dim >= 1, degree >= 2, period >= 1"));
    }
    let per_coord = (d as u128).pow(k as u32);
    let expected = per_coord.pow(n as u32);
    if expected > 10_000 {
        return Err(Error::Budget(format!(
            "certificate enumerates {expected} points, beyond the 10^4 budget"
        )));
    }
    let m = per_coord - 1; // root-of-unity order
    // Multiplier per coordinate: 0 at z = 0, else D^k * z^(D^k - 1) = D^k.
    // Enumerate coordinate patterns: each coordinate is zero or a root of
    // unity; moduli depend only on the pattern.
    let dk = per_coord as f64;
    let mut sorted_moduli: Vec<f64> = Vec::new();
    // Choose t coordinates nonzero: count = C(n, t) * m^t patterns; each
    // contributes t moduli equal to D^k and (n - t) zeros.
    let mut count: u128 = 0;
    for t in 0..=n {
        let choose = binomial(n as u128, t as u128);
        let patterns = choose * m.pow(t as u32);
        count += patterns;
        for _ in 0..patterns {
            for _ in 0..t {
                sorted_moduli.push(dk);
            }
            for _ in 0..n - t {
                sorted_moduli.push(0.0);
            }
        }
    }
    sorted_moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Margin: |0| and |D^k| are both off the unit circle.
    let min_margin = (dk - 1.0).min(1.0);
    // Real points per coordinate: 0, 1, and -1 when m is even (D odd).
    let real_per_coord: u128 = if m % 2 == 0 { 3 } else { 2 };
    Ok(PowerMapCertificate {
        dim: n,
        degree: d,
        period: k,
        count,
        expected,
        count_matches: count == expected,
        min_margin,
        sorted_moduli,
        real_count: real_per_coord.pow(n as u32),
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// The power map as a `VectorPolynomial`, for cross-checks.
pub fn power_map(n: usize, d: usize) -> Result<VectorPolynomial> {
    match n {
        1 => {
            let mut coeffs = vec![0.0; d + 1];
            coeffs[d] = 1.0;
            VectorPolynomial::one_from_coeffs(&coeffs)
        }
        2 => {
            let one = BigRational::from_integer(BigInt::from(1));
            let mut px = BiRat::zero();
            px.set(d, 0, one.clone());
            let mut py = BiRat::zero();
            py.set(0, d, one);
            Ok(VectorPolynomial::Two { px, py })
        }
        _ => Err(Error::invalid("power map built for dimensions 1 and 2")),
    }
}

/// Monte-Carlo hyperbolicity statistics for random 1-d polynomial maps.
#[derive(Debug, Clone, Serialize)]
pub struct McConfig {
    pub degree: usize,
    pub k_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub margin_tol: f64,
    /// Extra coefficient vectors appended after the random samples
    /// (deliberate witnesses); they share the flagging pipeline.
    pub plants: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McStats {
    pub samples: usize,
    pub planted: usize,
    /// Indices (into samples + plants) whose margin fell below tolerance.
    pub flagged: Vec<usize>,
    pub flagged_count: usize,
    pub min_margin: f64,
    /// Per-sample minimum margins, NaN for degenerate samples.
    pub margins: Vec<f64>,
    /// Samples where the analysis could not complete (near-degenerate
    /// leading coefficient or a non-square-free iterate).
    pub degenerate: Vec<usize>,
    /// Decade buckets of the margin distribution: (label, count).
    pub histogram: Vec<(String, u64)>,
}

/// Seeded, sample-parallelizable margin statistics: per-sample streams
/// come from the counter-indexed ChaCha stream, so order of evaluation
/// cannot change the results.
pub fn monte_carlo_hyperbolicity(cfg: &McConfig) -> Result<McStats> {
    if cfg.degree < 1 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    let budget = ComposeBudget::default();
    let coeff_count = cfg.degree + 1;
    let total = cfg.samples + cfg.plants.len();
    let mut margins = Vec::with_capacity(total);
    let mut flagged = Vec::new();
    let mut degenerate = Vec::new();
    for idx in 0..total {
        let coeffs: Vec<f64> = if idx < cfg.samples {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(idx as u64 + 1);
            (0..coeff_count).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
        } else {
            cfg.plants[idx - cfg.samples].clone()
        };
        match sample_margin(&coeffs, cfg.k_max, &budget) {
            Ok(margin) => {
                margins.push(margin);
                if margin < cfg.margin_tol {
                    flagged.push(idx);
                }
            }
            Err(_) => {
                margins.push(f64::NAN);
                degenerate.push(idx);
            }
        }
    }
    let min_margin = margins
        .iter()
        .filter(|m| m.is_finite())
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let histogram = margin_histogram(&margins);
    Ok(McStats {
        samples: cfg.samples,
        planted: cfg.plants.len(),
        flagged_count: flagged.len(),
        flagged,
        min_margin,
        margins,
        degenerate,
        histogram,
    })
}

/// Margin pipeline for the sampling census. Margins are floating-point
/// statistics, so the composition runs in f64 (the exact arithmetic stays
/// with `iterate_compose` and `periodic_points`, where counts are the
/// contract); a thousand samples cost well under a second this way.
fn sample_margin(coeffs: &[f64], k_max: usize, budget: &ComposeBudget) -> Result<f64> {
    // Strip trailing zeros first: deliberate witnesses may carry lower
    // degree than the sampling box.
    let trimmed = Poly::new(coeffs.to_vec());
    let lead = trimmed.coeffs.last().copied().unwrap_or(0.0);
    if trimmed.degree() < 1 || lead.abs() < 1e-9 {
        return Err(Error::invalid("near-degenerate leading coefficient"));
    }
    trimmed
        .degree()
        .checked_pow(k_max as u32)
        .filter(|&d| d <= budget.max_degree_1d)
        .ok_or_else(|| Error::Budget("iterate degree beyond budget".into()))?;
    let mut min_margin = f64::INFINITY;
    let mut iterate = trimmed.clone();
    for k in 1..=k_max {
        if k > 1 {
            iterate = trimmed.compose(&iterate);
        }
        let fixed = iterate.sub(&Poly::x());
        if fixed.is_zero() {
            // The identity: a continuum of unit multipliers.
            return Ok(0.0);
        }
        if fixed.degree() < 1 {
            continue;
        }
        if fixed.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Overflow("iterate coefficients overflow".into()));
        }
        let deriv = iterate.derivative();
        for z in roots::all_roots(&fixed) {
            let m = eval_complex(&deriv.coeffs, z);
            min_margin = min_margin.min((m.norm() - 1.0).abs());
        }
    }
    Ok(min_margin)
}

fn margin_histogram(margins: &[f64]) -> Vec<(String, u64)> {
    let edges = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let mut counts = vec![0u64; edges.len() + 1];
    for &m in margins {
        if !m.is_finite() {
            continue;
        }
        let mut bucket = edges.len();
        for (i, &e) in edges.iter().enumerate() {
            if m < e {
                bucket = i;
                break;
            }
        }
        counts[bucket] += 1;
    }
    let mut out = Vec::new();
    let mut labels = vec!["< 1e-6".to_string()];
    for w in edges.windows(2) {
        labels.push(format!("[{:.0e}, {:.0e})", w[0], w[1]));
    }
    labels.push(">= 1e0".to_string());
    for (label, count) in labels.into_iter().zip(counts) {
        out.push((label, count));
    }
    out
}
