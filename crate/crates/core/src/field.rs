//! Radial discretization of `ℝ^d`.
//!
//! A [`RadialGrid`] carries strictly increasing node radii starting at the origin
//! and trapezoidal weights against the spherical measure `c_d r^{d-1} dr`, so that
//! `Σ w_i g(r_i)` approximates `∫_{ℝ^d} g(|x|) dx`. A [`RadialField`] is a complex
//! sample per node; the last node is the Dirichlet wall used by the solvers.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("exponent q = {0} must satisfy q >= 1")]
    QOutOfRange(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Area of the unit sphere `S^{d-1}`: `c_d = 2π^{d/2} / Γ(d/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0);
    // Γ(1/2) = √π, Γ(1) = 1, Γ(x+1) = x Γ(x)
    let (mut g, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while 2.0 * x < n as f64 - 0.5 {
        g *= x;
        x += 1.0;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridKind {
    Uniform,
    /// Uniform up to `core_radius`, then geometric stretching with `ratio`.
    Graded {
        core_radius: f64,
        ratio: f64,
    },
    /// Arbitrary radii, e.g. read back from a field dump.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    dim: usize,
    r: Vec<f64>,
    w: Vec<f64>,
    kind: GridKind,
    #[serde(skip)]
    stencil: Vec<([usize; 5], [f64; 5])>,
}

/// Weights of the derivative at `x0` of the Lagrange interpolant through `xs`.
fn lagrange_d1_weights(x0: f64, xs: [f64; 5]) -> [f64; 5] {
    let mut w = [0.0; 5];
    for j in 0..5 {
        let denom: f64 = (0..5).filter(|&m| m != j).map(|m| xs[j] - xs[m]).product();
        let mut sum = 0.0;
        for k in (0..5).filter(|&k| k != j) {
            sum += (0..5)
                .filter(|&m| m != j && m != k)
                .map(|m| x0 - xs[m])
                .product::<f64>();
        }
        w[j] = sum / denom;
    }
    w
}

fn derivative_stencils(r: &[f64]) -> Vec<([usize; 5], [f64; 5])> {
    let n = r.len();
    let mut out = vec![([0; 5], [0.0; 5]); n];
    // even extension across the origin: u(-r_1) = u(r_1)
    out[1] = (
        [1, 0, 1, 2, 3],
        lagrange_d1_weights(r[1], [-r[1], 0.0, r[1], r[2], r[3]]),
    );
    for i in 2..n - 2 {
        let idx = [i - 2, i - 1, i, i + 1, i + 2];
        out[i] = (idx, lagrange_d1_weights(r[i], idx.map(|k| r[k])));
    }
    let i = n - 2;
    let (h1, h2) = (r[i] - r[i - 1], r[i + 1] - r[i]);
    out[i] = (
        [i - 1, i, i + 1, i, i],
        [
            -h2 / (h1 * (h1 + h2)),
            (h2 - h1) / (h1 * h2),
            h1 / (h2 * (h1 + h2)),
            0.0,
            0.0,
        ],
    );
    let i = n - 1;
    let (h1, h2) = (r[i - 1] - r[i - 2], r[i] - r[i - 1]);
    out[i] = (
        [i - 2, i - 1, i, i, i],
        [
            h2 / (h1 * (h1 + h2)),
            -(h1 + h2) / (h1 * h2),
            (h1 + 2.0 * h2) / (h2 * (h1 + h2)),
            0.0,
            0.0,
        ],
    );
    out
}

/// Default variational grid: `n = 4096`, `r_max = 200`, uniform on `[0, 20]` with 80% of the intervals.
pub const VARIATIONAL_GRID: (usize, f64, f64, f64) = (4096, 200.0, 20.0, 0.8);
/// Default evolution grid: uniform, `n = 8192`, `r_max = 100`.
pub const EVOLUTION_GRID: (usize, f64) = (8192, 100.0);

impl RadialGrid {
    pub fn default_variational(dim: usize) -> Result<Self, FieldError> {
        let (n, r_max, core_radius, core_fraction) = VARIATIONAL_GRID;
        Self::graded(dim, n, r_max, core_radius, core_fraction)
    }

    pub fn default_evolution(dim: usize) -> Result<Self, FieldError> {
        let (n, r_max) = EVOLUTION_GRID;
        Self::uniform(dim, n, r_max)
    }

    pub fn uniform(dim: usize, n: usize, r_max: f64) -> Result<Self, FieldError> {
        if n < 3 || !(r_max > 0.0) {
            return Err(FieldError::InvalidGrid(format!(
                "uniform grid needs n >= 3 and r_max > 0 (n = {n}, r_max = {r_max})"
            )));
        }
        let h = r_max / (n - 1) as f64;
        let r = (0..n)
            .map(|i| if i == n - 1 { r_max } else { i as f64 * h })
            .collect();
        Self::build(dim, r, GridKind::Uniform)
    }

    /// Uniform spacing on `[0, core_radius]` using `core_fraction` of the intervals,
    /// then geometrically growing spacing out to `r_max`.
    pub fn graded(
        dim: usize,
        n: usize,
        r_max: f64,
        core_radius: f64,
        core_fraction: f64,
    ) -> Result<Self, FieldError> {
        if n < 8
            || !(core_radius > 0.0)
            || !(r_max > core_radius)
            || !(core_fraction > 0.0 && core_fraction < 1.0)
        {
            return Err(FieldError::InvalidGrid(format!(
                "graded grid needs n >= 8, 0 < core_radius < r_max, core_fraction in (0,1) \
                 (n = {n}, core_radius = {core_radius}, r_max = {r_max}, core_fraction = {core_fraction})"
            )));
        }
        let intervals = n - 1;
        let n_core = ((core_fraction * intervals as f64).round() as usize).clamp(1, intervals - 1);
        let n_outer = intervals - n_core;
        let h = core_radius / n_core as f64;
        let span = r_max - core_radius;
        if span <= h * n_outer as f64 {
            return Err(FieldError::InvalidGrid(format!(
                "outer region too short for geometric stretching (span {span}, {n_outer} intervals of at least {h})"
            )));
        }
        // h Σ_{k=1}^{m} q^k = span, solved for q > 1 by bisection.
        let total = |q: f64| h * (1..=n_outer).map(|k| q.powi(k as i32)).sum::<f64>();
        let (mut lo, mut hi) = (1.0, 2.0);
        while total(hi) < span {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < span {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ratio = 0.5 * (lo + hi);
        let mut r = Vec::with_capacity(n);
        for i in 0..=n_core {
            r.push(i as f64 * h);
        }
        let mut step = h;
        for _ in 0..n_outer {
            step *= ratio;
            let next = r[r.len() - 1] + step;
            r.push(next);
        }
        *r.last_mut().unwrap() = r_max;
        Self::build(dim, r, GridKind::Graded { core_radius, ratio })
    }

    /// Grid on caller-supplied radii; the first radius must be zero.
    pub fn from_radii(dim: usize, r: Vec<f64>) -> Result<Self, FieldError> {
        Self::build(dim, r, GridKind::Explicit)
    }

    fn build(dim: usize, r: Vec<f64>, kind: GridKind) -> Result<Self, FieldError> {
        if dim < 1 {
            return Err(FieldError::InvalidGrid("dimension must be positive".into()));
        }
        if r.len() < 6 {
            return Err(FieldError::InvalidGrid("need at least six nodes".into()));
        }
        if r[0] != 0.0 {
            return Err(FieldError::InvalidGrid(format!(
                "first radius must be 0, got {}",
                r[0]
            )));
        }
        if r.windows(2).any(|p| !(p[1] > p[0]) || !p[1].is_finite()) {
            return Err(FieldError::InvalidGrid(
                "radii must be finite and strictly increasing".into(),
            ));
        }
        let c = sphere_area(dim);
        let n = r.len();
        let w = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { r[i] - r[i - 1] };
                let right = if i == n - 1 { 0.0 } else { r[i + 1] - r[i] };
                c * r[i].powi(dim as i32 - 1) * 0.5 * (left + right)
            })
            .collect();
        let stencil = derivative_stencils(&r);
        Ok(Self {
            dim,
            r,
            w,
            kind,
            stencil,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn radii(&self) -> &[f64] {
        &self.r
    }
    pub fn weights(&self) -> &[f64] {
        &self.w
    }
    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Trapezoidal integral of `g(r) c_d r^{d-1}` over `[0, r_k]`.
    pub fn partial_integral(&self, values: &[f64], k: usize) -> f64 {
        let c = sphere_area(self.dim);
        let dm1 = self.dim as i32 - 1;
        (0..k)
            .map(|i| {
                let a = values[i] * self.r[i].powi(dm1);
                let b = values[i + 1] * self.r[i + 1].powi(dm1);
                0.5 * (a + b) * (self.r[i + 1] - self.r[i])
            })
            .sum::<f64>()
            * c
    }

    /// Index of the node nearest to `radius`.
    pub fn nearest(&self, radius: f64) -> usize {
        match self.r.binary_search_by(|x| x.total_cmp(&radius)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.r.len() => self.r.len() - 1,
            Err(i) => {
                if radius - self.r[i - 1] <= self.r[i] - radius {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Radial derivative from five-point Lagrange stencils (fourth order),
    /// `u'(0) = 0`, falling back to three points at the outer end.
    pub fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.stencil
            .iter()
            .map(|(idx, w)| apply(idx, w, u))
            .collect()
    }

    /// Radial Laplacian `u'' + (d-1)/r u'` on nodes `0..n-1`; the value at the
    /// outer wall is left at zero.
    pub fn laplacian(&self, u: &[Complex64]) -> Vec<Complex64> {
        let r = &self.r;
        let n = r.len();
        let d = self.dim as f64;
        let mut lap = vec![Complex64::new(0.0, 0.0); n];
        // even extension across the origin: u_{-1} = u_1
        let h = r[1];
        lap[0] = (u[1] - u[0]) * (2.0 * d / (h * h));
        for i in 1..n - 1 {
            let h1 = r[i] - r[i - 1];
            let h2 = r[i + 1] - r[i];
            let d2 = (u[i - 1] / (h1 * (h1 + h2)) - u[i] / (h1 * h2) + u[i + 1] / (h2 * (h1 + h2)))
                * 2.0;
            let d1 = u[i - 1] * (-h2 / (h1 * (h1 + h2)))
                + u[i] * ((h2 - h1) / (h1 * h2))
                + u[i + 1] * (h1 / (h2 * (h1 + h2)));
            lap[i] = d2 + d1 * ((d - 1.0) / r[i]);
        }
        lap
    }
}

fn apply(idx: &[usize; 5], w: &[f64; 5], u: &[Complex64]) -> Complex64 {
    idx.iter().zip(w).map(|(&k, &c)| u[k] * c).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    pub fn sample<F: Fn(f64) -> Complex64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn sample_real<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Self {
        Self::sample(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn check_grid(&self, other: &RadialField) -> Result<(), FieldError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    /// `a·u + b·v`.
    pub fn axpy(
        a: Complex64,
        u: &RadialField,
        b: Complex64,
        v: &RadialField,
    ) -> Result<RadialField, FieldError> {
        u.check_grid(v)?;
        let values = u
            .values
            .iter()
            .zip(&v.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(RadialField {
            grid: u.grid.clone(),
            values,
        })
    }

    pub fn scale(&self, a: Complex64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|x| a * x).collect(),
        }
    }

    /// `⟨u, v⟩ = ∫ ū v`.
    pub fn inner(&self, other: &RadialField) -> Result<Complex64, FieldError> {
        self.check_grid(other)?;
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (x, y))| x.conj() * y * w)
            .sum())
    }

    /// `‖u‖_{L^q}^q`.
    pub fn lp_norm_pow(&self, q: f64) -> Result<f64, FieldError> {
        if !(q >= 1.0) {
            return Err(FieldError::QOutOfRange(q));
        }
        Ok(self.lp_norm_pow_unchecked(q))
    }

    pub(crate) fn lp_norm_pow_unchecked(&self, q: f64) -> f64 {
        let w = self.grid.weights();
        if q == 2.0 {
            w.iter()
                .zip(&self.values)
                .map(|(w, z)| w * z.norm_sqr())
                .sum()
        } else {
            w.iter()
                .zip(&self.values)
                .map(|(w, z)| {
                    let a = z.norm();
                    if a == 0.0 {
                        0.0
                    } else {
                        w * a.powf(q)
                    }
                })
                .sum()
        }
    }

    /// `‖∇u‖_{L^2}^2`.
    pub fn grad_norm_sq(&self) -> f64 {
        let du = self.grid.derivative(&self.values);
        self.grid
            .weights()
            .iter()
            .zip(&du)
            .map(|(w, z)| w * z.norm_sqr())
            .sum()
    }

    pub fn laplacian(&self) -> Vec<Complex64> {
        self.grid.laplacian(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Linear interpolation at radius `r`; zero beyond the outer wall.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let radii = self.grid.radii();
        if r <= 0.0 {
            return self.values[0];
        }
        if r > self.grid.r_max() {
            return Complex64::new(0.0, 0.0);
        }
        let i = radii
            .partition_point(|&x| x <= r)
            .min(radii.len() - 1)
            .max(1);
        let (r0, r1) = (radii[i - 1], radii[i]);
        let t = (r - r0) / (r1 - r0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    /// Writes columns `r, re, im` with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FieldError> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["r", "re", "im"])?;
        for (r, z) in self.grid.radii().iter().zip(&self.values) {
            wtr.write_record([
                format!("{r:e}"),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a `r, re, im` dump; the grid is rebuilt from the stored radii.
    pub fn read_csv<R: Read>(dim: usize, input: R) -> Result<RadialField, FieldError> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.deserialize() {
            let (r, re, im): (f64, f64, f64) = rec?;
            radii.push(r);
            values.push(Complex64::new(re, im));
        }
        let grid = Arc::new(RadialGrid::from_radii(dim, radii)?);
        RadialField::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::sample_real(grid.clone(), |r| (-r * r / 2.0).exp())
    }

    #[test]
    fn sphere_area_low_dimensions() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn graded_grid_reaches_r_max() {
        let g = RadialGrid::default_variational(5).unwrap();
        assert_eq!(g.len(), 4096);
        assert_eq!(g.r_max(), 200.0);
        assert!(g.weights().iter().all(|&w| w >= 0.0));
        assert!(g.radii().windows(2).all(|p| p[1] > p[0]));
        match g.kind() {
            GridKind::Graded { ratio, .. } => assert!(ratio > 1.0 && ratio < 1.01),
            _ => panic!("expected graded grid"),
        }
    }

    #[test]
    fn ball_volume_at_half_domain() {
        for dim in [3, 4, 5] {
            let g = RadialGrid::default_variational(dim).unwrap();
            let k = g.nearest(100.0);
            let ones = vec![1.0; g.len()];
            let vol = g.partial_integral(&ones, k);
            let exact = sphere_area(dim) * g.radii()[k].powi(dim as i32) / dim as f64;
            assert!(
                ((vol - exact) / exact).abs() < 1e-3,
                "d = {dim}: {vol} vs {exact}"
            );
        }
    }

    #[test]
    fn gaussian_mass() {
        for (dim, exact) in [(4, PI * PI), (5, PI.powf(2.5))] {
            let g = Arc::new(RadialGrid::default_variational(dim).unwrap());
            let m = gaussian(&g).lp_norm_pow(2.0).unwrap();
            assert!(((m - exact) / exact).abs() < 1e-4, "d = {dim}: {m}");
        }
    }

    #[test]
    fn gaussian_gradient() {
        for (dim, exact) in [(4, 2.0 * PI * PI), (5, 2.5 * PI.powf(2.5))] {
            let g = Arc::new(RadialGrid::default_variational(dim).unwrap());
            let k = gaussian(&g).grad_norm_sq();
            assert!(((k - exact) / exact).abs() < 1e-3, "d = {dim}: {k}");
        }
    }

    #[test]
    fn quadrature_is_second_order() {
        let exact = PI * PI;
        let err = |n| {
            let g = Arc::new(RadialGrid::uniform(4, n, 10.0).unwrap());
            (gaussian(&g).lp_norm_pow(2.0).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e1 / e2 >= 3.0, "{e1} -> {e2}");
        let gerr = |n| {
            let g = Arc::new(RadialGrid::uniform(4, n, 10.0).unwrap());
            (gaussian(&g).grad_norm_sq() - 2.0 * exact).abs()
        };
        let (e1, e2) = (gerr(201), gerr(401));
        assert!(e1 / e2 >= 3.0, "{e1} -> {e2}");
    }

    #[test]
    fn linear_space_operations() {
        let g = Arc::new(RadialGrid::uniform(5, 257, 12.0).unwrap());
        let zero = RadialField::sample(g.clone(), |_| Complex64::new(0.0, 0.0));
        for q in [1.0, 2.0, 3.5] {
            assert_eq!(zero.lp_norm_pow(q).unwrap(), 0.0);
        }
        let u = RadialField::sample(g.clone(), |r| {
            Complex64::new((-r).exp(), 0.3 * (-r * r).exp())
        });
        let one = Complex64::new(1.0, 0.0);
        assert!(RadialField::axpy(one, &u, -one, &u).unwrap().is_zero());
        let uu = u.inner(&u).unwrap();
        assert_eq!(uu.re, u.lp_norm_pow(2.0).unwrap());
        assert!(matches!(
            u.lp_norm_pow(0.5),
            Err(FieldError::QOutOfRange(_))
        ));
        let other = Arc::new(RadialGrid::uniform(5, 129, 12.0).unwrap());
        let v = RadialField::zeros(other);
        assert!(matches!(u.inner(&v), Err(FieldError::GridMismatch)));
    }

    #[test]
    fn plateau_has_no_interior_gradient() {
        let g = Arc::new(RadialGrid::uniform(4, 401, 20.0).unwrap());
        let u = RadialField::sample_real(g.clone(), |r| if r < 10.0 { 1.0 } else { 0.0 });
        let du = g.derivative(u.values());
        for (r, d) in g.radii().iter().zip(&du) {
            if (*r - 10.0).abs() > 0.2 {
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let g = Arc::new(RadialGrid::graded(5, 1024, 60.0, 10.0, 0.7).unwrap());
        let u = gaussian(&g);
        assert_eq!(
            u.grad_norm_sq().to_bits(),
            u.clone().grad_norm_sq().to_bits()
        );
        assert_eq!(
            u.lp_norm_pow(3.3).unwrap().to_bits(),
            u.lp_norm_pow(3.3).unwrap().to_bits()
        );
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(RadialGrid::graded(5, 64, 30.0, 5.0, 0.6).unwrap());
        let u = RadialField::sample(g, |r| Complex64::new((-r).exp(), r.sin() * 1e-3));
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"r,re,im\n"));
        let v = RadialField::read_csv(5, buf.as_slice()).unwrap();
        assert_eq!(u.values(), v.values());
        assert_eq!(u.grid().radii(), v.grid().radii());
    }
}
