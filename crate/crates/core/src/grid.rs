//! Cell-centered radial grid on `[0, R]` for radially symmetric fields in
//! `R^N`, with midpoint quadrature and a conservative Laplacian.
//!
//! Nodes sit at `r_j = (j + 1/2) dr`. The Laplacian is written in flux form
//! over the faces `r_{j+1/2} = (j + 1) dr`; the face areas are chosen so that
//! the operator is symmetric in the midpoint inner product and exact on
//! `r^2`. Fields are reflected evenly across the origin and vanish one cell
//! beyond `R`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    dr: f64,
    nodes: Vec<f64>,
    /// Midpoint quadrature weights `omega_{N-1} r_j^{N-1} dr`.
    weights: Vec<f64>,
    /// `omega_{N-1} A_{j+1/2} / dr` for the face between node `j` and `j+1`
    /// (the last face couples node `M-1` to the zero ghost value).
    face_coeffs: Vec<f64>,
    surface: f64,
}

/// Surface area of the unit sphere in `R^N`, `2 pi^{N/2} / Gamma(N/2)`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    // Gamma(N/2) for integer N by recursion from Gamma(1) or Gamma(1/2).
    let mut gamma = if dim.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut x = if dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = dim as f64 / 2.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(target) / gamma
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, points: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Invalid("dimension must be >= 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Invalid(format!("radius must be > 0, got {radius}")));
        }
        if points < 3 {
            return Err(Error::Invalid(format!("need at least 3 grid points, got {points}")));
        }
        let dr = radius / points as f64;
        let surface = unit_sphere_area(dim);
        let p = dim as i32 - 1;
        let nodes: Vec<f64> = (0..points).map(|j| (j as f64 + 0.5) * dr).collect();
        let weights: Vec<f64> = nodes.iter().map(|r| surface * r.powi(p) * dr).collect();
        // A_{j+1/2} r_{j+1/2} = N * sum_{i<=j} r_i^{N-1} dr makes Delta r^2 = 2N.
        let mut cumulative = 0.0;
        let face_coeffs = nodes
            .iter()
            .enumerate()
            .map(|(j, r)| {
                cumulative += r.powi(p) * dr;
                let face = (j + 1) as f64 * dr;
                surface * dim as f64 * cumulative / face / dr
            })
            .collect();
        Ok(Self {
            dim,
            radius,
            dr,
            nodes,
            weights,
            face_coeffs,
            surface,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn face_coeffs(&self) -> &[f64] {
        &self.face_coeffs
    }

    pub fn surface_factor(&self) -> f64 {
        self.surface
    }

    /// `int_{R^N} f dx` by the midpoint rule.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self.integrate_unchecked(f))
    }

    #[inline]
    pub(crate) fn integrate_unchecked(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Integral of `g(r_j, f_j)` without allocating the integrand.
    #[inline]
    pub(crate) fn integrate_map<T: Copy>(&self, f: &[T], g: impl Fn(f64, T) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(f)
            .map(|((&r, &w), &x)| w * g(r, x))
            .sum()
    }

    /// `d f / dr` at the nodes: central differences in the interior, even
    /// reflection at the first node, second-order one-sided at the last.
    pub fn radial_gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        Ok(gradient_impl(f, self.dr))
    }

    pub fn radial_gradient_complex(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.len(), f.len())?;
        Ok(gradient_impl(f, self.dr))
    }

    /// `Delta f = r^{1-N} (r^{N-1} f')'` in conservative flux form.
    pub fn radial_laplacian(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        let mut out = vec![0.0; f.len()];
        self.laplacian_into(f, &mut out);
        Ok(out)
    }

    pub fn radial_laplacian_complex(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.len(), f.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        self.laplacian_into(f, &mut out);
        Ok(out)
    }

    /// Tridiagonal coefficients `(lower, diag, upper)` of the Laplacian row `j`.
    #[inline]
    pub fn laplacian_row(&self, j: usize) -> (f64, f64, f64) {
        let inv_w = 1.0 / self.weights[j];
        let right = self.face_coeffs[j] * inv_w;
        let left = if j == 0 {
            0.0
        } else {
            self.face_coeffs[j - 1] * inv_w
        };
        (left, -(left + right), right)
    }

    pub(crate) fn laplacian_into<T>(&self, f: &[T], out: &mut [T])
    where
        T: Copy
            + std::ops::Sub<Output = T>
            + std::ops::Mul<f64, Output = T>
            + std::ops::Add<Output = T>
            + Default,
    {
        let m = f.len();
        let zero = T::default();
        let mut flux_left = zero;
        for j in 0..m {
            let next = if j + 1 < m { f[j + 1] } else { zero };
            let flux_right = (next - f[j]) * self.face_coeffs[j];
            out[j] = (flux_right - flux_left) * (1.0 / self.weights[j]);
            flux_left = flux_right;
        }
    }

    /// Face-based Dirichlet form `sum_faces c_f (f_{j+1}-f_j)(g_{j+1}-g_j)`,
    /// the discrete `int grad f . grad g dx` paired with the Laplacian:
    /// `integrate(f * laplacian(g)) == -dirichlet_form(f, g)` up to roundoff.
    pub fn dirichlet_form(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        check_len(self.len(), g.len())?;
        Ok(self.dirichlet_unchecked(f, g))
    }

    pub(crate) fn dirichlet_unchecked(&self, f: &[f64], g: &[f64]) -> f64 {
        let m = f.len();
        (0..m)
            .map(|j| {
                let (fn_, gn) = if j + 1 < m { (f[j + 1], g[j + 1]) } else { (0.0, 0.0) };
                self.face_coeffs[j] * (fn_ - f[j]) * (gn - g[j])
            })
            .sum()
    }

    /// `int |grad u|^2 dx` for a complex field, face-based.
    pub fn dirichlet_energy_complex(&self, u: &[Complex64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        let m = u.len();
        Ok((0..m)
            .map(|j| {
                let next = if j + 1 < m { u[j + 1] } else { Complex64::new(0.0, 0.0) };
                self.face_coeffs[j] * (next - u[j]).norm_sqr()
            })
            .sum())
    }
}

/// Radially symmetric complex field `u(r_j, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Arc<RadialGrid>,
    pub t: f64,
    pub values: Vec<Complex64>,
}

/// Relative amplitude at the outer node above which the field is considered
/// contaminated by the domain truncation.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

impl FieldState {
    pub fn new(grid: Arc<RadialGrid>, t: f64, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("state time must be >= 0, got {t}")));
        }
        Ok(Self { grid, t, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            t: 0.0,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// `|u_{M-1}| <= tol * max_j |u_j|`.
    pub fn boundary_decayed(&self, tol: f64) -> bool {
        let last = self.values.last().map_or(0.0, |z| z.norm());
        last <= tol * self.max_modulus()
    }

    /// Discrete `L^2` norm of `self - other`.
    pub fn l2_distance(&self, other: &[Complex64]) -> Result<f64> {
        check_len(self.values.len(), other.len())?;
        let sq: f64 = self
            .values
            .iter()
            .zip(other)
            .zip(self.grid.weights())
            .map(|((a, b), w)| w * (a - b).norm_sqr())
            .sum();
        Ok(sq.sqrt())
    }
}

fn gradient_impl<T>(f: &[T], dr: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let m = f.len();
    let h = 0.5 / dr;
    let mut out = Vec::with_capacity(m);
    // even reflection: f_{-1} = f_0
    out.push((f[1] - f[0]) * h);
    for j in 1..m - 1 {
        out.push((f[j + 1] - f[j - 1]) * h);
    }
    out.push((f[m - 1] * 3.0 - f[m - 2] * 4.0 + f[m - 3]) * h);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn nodes_are_cell_centered() {
        let g = RadialGrid::new(3, 2.0, 16).unwrap();
        assert_relative_eq!(g.nodes()[0], 0.0625);
        assert!(g.nodes().windows(2).all(|w| (w[1] - w[0] - g.dr()).abs() < 1e-15));
        assert!(g.nodes()[0] > 0.0);
    }

    #[test]
    fn integrate_zero_and_shape() {
        let g = RadialGrid::new(3, 12.0, 64).unwrap();
        assert_eq!(g.integrate(&vec![0.0; 64]).unwrap(), 0.0);
        assert!(matches!(
            g.integrate(&[1.0; 3]),
            Err(Error::Shape { expected: 64, got: 3 })
        ));
    }

    #[test]
    fn integrate_gaussian() {
        let g = RadialGrid::new(3, 12.0, 2048).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        assert_relative_eq!(g.integrate(&f).unwrap(), PI.powf(1.5), max_relative = 1e-6);
    }

    #[test]
    fn integrate_ball_indicator() {
        for m in [64, 128, 512] {
            let g = RadialGrid::new(3, 4.0, m).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|&r| if r <= 1.0 { 1.0 } else { 0.0 }).collect();
            let exact = 4.0 * PI / 3.0;
            let rel = (g.integrate(&f).unwrap() - exact).abs() / exact;
            assert!(rel <= 2.0 * g.dr(), "M={m}: rel err {rel}");
        }
    }

    #[test]
    fn gradient_cases() {
        let g = RadialGrid::new(3, 12.0, 2048).unwrap();
        let c = vec![3.5; 2048];
        assert!(g.radial_gradient(&c).unwrap().iter().all(|&x| x == 0.0));

        let sq: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let d = g.radial_gradient(&sq).unwrap();
        for (r, x) in g.nodes().iter().zip(&d) {
            assert_relative_eq!(*x, 2.0 * r, max_relative = 1e-10);
        }

        // odd functions violate the even reflection, so the origin node is skipped
        let s: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
        let d = g.radial_gradient(&s).unwrap();
        for (r, x) in g.nodes().iter().zip(&d).skip(1) {
            assert!((x - r.cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn laplacian_cases() {
        let g = RadialGrid::new(3, 12.0, 2048).unwrap();
        let c = vec![2.0; 2048];
        let l = g.radial_laplacian(&c).unwrap();
        assert!(l[..2047].iter().all(|x| x.abs() < 1e-9));

        let sq: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let l = g.radial_laplacian(&sq).unwrap();
        for x in &l[..2047] {
            assert_relative_eq!(*x, 6.0, max_relative = 1e-9);
        }

        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp()).collect();
        let l = g.radial_laplacian(&f).unwrap();
        for (r, x) in g.nodes().iter().zip(&l) {
            let exact = (r * r - 3.0) * (-r * r / 2.0).exp();
            assert!((x - exact).abs() < 1e-3, "r={r}: {x} vs {exact}");
        }
    }

    #[test]
    fn laplacian_in_other_dimensions() {
        for dim in [4, 5, 7] {
            let g = RadialGrid::new(dim, 3.0, 256).unwrap();
            let sq: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
            let l = g.radial_laplacian(&sq).unwrap();
            for x in &l[..255] {
                assert_relative_eq!(*x, 2.0 * dim as f64, max_relative = 1e-9);
            }
        }
    }

    fn max_err(points: usize) -> (f64, f64, f64) {
        let g = RadialGrid::new(3, 10.0, points).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp()).collect();
        let grad = g.radial_gradient(&f).unwrap();
        let lap = g.radial_laplacian(&f).unwrap();
        let mut eg = 0.0f64;
        let mut el = 0.0f64;
        for (j, r) in g.nodes().iter().enumerate() {
            let e = (-r * r / 2.0).exp();
            eg = eg.max((grad[j] + r * e).abs());
            el = el.max((lap[j] - (r * r - 3.0) * e).abs());
        }
        // r^2 e^{-r^2} has a nonzero fourth derivative, so the midpoint rule is
        // visibly second order on it
        let h: Vec<f64> = g.nodes().iter().map(|&r| if r < 2.0 { r * r } else { 0.0 }).collect();
        let vol = g.integrate(&h).unwrap();
        let ei = (vol - 4.0 * PI * 32.0 / 5.0).abs();
        (eg, el, ei)
    }

    #[test]
    fn second_order_refinement() {
        let (g1, l1, _) = max_err(200);
        let (g2, l2, _) = max_err(400);
        assert!((3.5..4.5).contains(&(g1 / g2)), "gradient ratio {}", g1 / g2);
        assert!((3.5..4.5).contains(&(l1 / l2)), "laplacian ratio {}", l1 / l2);
        // integration of a discontinuous integrand at a face converges at second order
        let (_, _, i1) = max_err(250);
        let (_, _, i2) = max_err(500);
        assert!((3.5..4.5).contains(&(i1 / i2)), "quadrature ratio {}", i1 / i2);
    }

    #[test]
    fn discrete_integration_by_parts() {
        let g = RadialGrid::new(3, 15.0, 1500).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp() * (1.0 + r)).collect();
        let h: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 3.0).exp() * r.cos()).collect();
        let lap = g.radial_laplacian(&h).unwrap();
        let lhs: f64 = f.iter().zip(&lap).map(|(a, b)| a * b).zip(g.weights()).map(|(x, w)| x * w).sum();
        let rhs = g.dirichlet_form(&f, &h).unwrap();
        let scale = g.integrate(&f.iter().map(|x| x * x).collect::<Vec<_>>()).unwrap().sqrt()
            * g.integrate(&h.iter().map(|x| x * x).collect::<Vec<_>>()).unwrap().sqrt();
        assert!((lhs + rhs).abs() <= 1e-8 * scale, "{lhs} vs {rhs}");
    }
}
