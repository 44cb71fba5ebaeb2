//! Closed-form test cases built from exact bivariate polynomials, so that
//! every derived quantity (laplacians, curls) is obtained by exact
//! differentiation rather than transcription.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::mesh::Point;

/// Polynomial `sum c_ij x^i y^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    coeffs: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(1.0, 0, 1)
    }

    pub fn monomial(c: f64, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(c, i, j);
        p
    }

    fn add_term(&mut self, c: f64, i: u32, j: u32) {
        if c == 0.0 {
            return;
        }
        let e = self.coeffs.entry((i, j)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(i, j), c)| c * p[0].powi(i as i32) * p[1].powi(j as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            if i > 0 {
                out.add_term(c * i as f64, i - 1, j);
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            if j > 0 {
                out.add_term(c * j as f64, i, j - 1);
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        &self.dx().dx() + &self.dy().dy()
    }

    /// `q(x, y) = p(y, x)`.
    pub fn swap_xy(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.coeffs {
            out.add_term(c, j, i);
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), &c) in &rhs.coeffs {
            out.add_term(c, i, j);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self * -1.0
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), &a) in &self.coeffs {
            for (&(k, l), &b) in &rhs.coeffs {
                out.add_term(a * b, i + k, j + l);
            }
        }
        out
    }
}

impl Mul<f64> for &Poly2 {
    type Output = Poly2;
    fn mul(self, s: f64) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), &c) in &self.coeffs {
            out.add_term(c * s, i, j);
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Mul<f64> for Poly2 {
    type Output = Poly2;
    fn mul(self, s: f64) -> Poly2 {
        &self * s
    }
}

/// Sign of the linear term in the second forcing component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingVariant {
    /// `f2 = -F(y, x) + (x - 1/2)`: the extra pair is the gradient of
    /// `(x - 1/2)(y - 1/2)` and `-lap(omega) = rot f` holds exactly.
    #[default]
    Consistent,
    /// `f2 = -f1(y, x)` applied literally, i.e. `-F(y, x) - (x - 1/2)`.
    /// `rot f` then differs from `-lap(omega)` by the constant 2.
    Literal,
}

/// Stokes problem on the unit square with closed-form stream function and
/// vorticity. Conventions: `rot f = d f2/dx - d f1/dy`,
/// `rot psi = (d psi/dy, -d psi/dx)`, `omega + lap(psi) = 0`,
/// `-lap(omega) = rot f`.
#[derive(Debug, Clone)]
pub struct AnalyticCase {
    pub name: &'static str,
    pub f1: Poly2,
    pub f2: Poly2,
    pub psi: Poly2,
    pub omega: Poly2,
    pub rot_f: Poly2,
    pub variant: ForcingVariant,
}

impl AnalyticCase {
    pub fn forcing(&self, p: Point) -> [f64; 2] {
        [self.f1.eval(p), self.f2.eval(p)]
    }

    pub fn psi_at(&self, p: Point) -> f64 {
        self.psi.eval(p)
    }

    pub fn omega_at(&self, p: Point) -> f64 {
        self.omega.eval(p)
    }

    /// `omega + lap(psi)` as an exact polynomial (zero for a consistent case).
    pub fn vorticity_defect(&self) -> Poly2 {
        &self.omega + &self.psi.laplacian()
    }

    /// `-lap(omega) - rot f` as an exact polynomial.
    pub fn momentum_defect(&self) -> Poly2 {
        &(-&self.omega.laplacian()) - &self.rot_f
    }

    /// Same case with the gradient of `p` added to the forcing.
    pub fn with_added_gradient(&self, p: &Poly2) -> Self {
        let mut out = self.clone();
        out.f1 = &out.f1 + &p.dx();
        out.f2 = &out.f2 + &p.dy();
        out.rot_f = &out.f2.dx() - &out.f1.dy();
        out
    }

    /// Scales forcing and solution by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.f1 = &out.f1 * s;
        out.f2 = &out.f2 * s;
        out.psi = &out.psi * s;
        out.omega = &out.omega * s;
        out.rot_f = &out.rot_f * s;
        out
    }
}

/// The Bercovier-Engelman benchmark:
/// `psi = -128 x^2 (x-1)^2 y^2 (y-1)^2`,
/// `omega = 256 (y^2 (y-1)^2 (6x^2-6x+1) + x^2 (x-1)^2 (6y^2-6y+1))`,
/// `f1 = 256 (x^2 (x-1)^2 (12y-6) + y (y-1) (2y-1) (12x^2-12x+2)) + (y - 1/2)`.
pub fn bercovier_engelman(variant: ForcingVariant) -> AnalyticCase {
    let x = Poly2::x();
    let y = Poly2::y();
    let one = Poly2::constant(1.0);
    let half = Poly2::constant(0.5);
    let xm1 = &x - &one;
    let ym1 = &y - &one;
    let x2x12 = &x.pow(2) * &xm1.pow(2);
    let y2y12 = &y.pow(2) * &ym1.pow(2);

    // main part of f1, before the linear term
    let main = (&x2x12 * &(&(&y * 12.0) - &Poly2::constant(6.0))
        + &(&(&y * &ym1) * &(&(&y * 2.0) - &one))
            * &(&(&(&x.pow(2) * 12.0) - &(&x * 12.0)) + &Poly2::constant(2.0)))
        * 256.0;
    let f1 = &main + &(&y - &half);
    let extra2 = &x - &half;
    let f2 = match variant {
        ForcingVariant::Consistent => &(-&main.swap_xy()) + &extra2,
        ForcingVariant::Literal => &(-&main.swap_xy()) - &extra2,
    };

    let psi = &(&x2x12 * &y2y12) * -128.0;
    let sextic = |t: &Poly2| &(&(&t.pow(2) * 6.0) - &(t * 6.0)) + &one;
    let omega = (&y2y12 * &sextic(&x) + &x2x12 * &sextic(&y)) * 256.0;
    let rot_f = &f2.dx() - &f1.dy();

    AnalyticCase {
        name: "bercovier-engelman",
        f1,
        f2,
        psi,
        omega,
        rot_f,
        variant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poly_algebra() {
        let x = Poly2::x();
        let y = Poly2::y();
        let p = &(&x * &y) + &x.pow(3); // xy + x^3
        assert_eq!(p.eval([2.0, 3.0]), 14.0);
        assert_eq!(p.dx().eval([2.0, 3.0]), 3.0 + 12.0);
        assert_eq!(p.dy().eval([2.0, 3.0]), 2.0);
        assert_eq!(p.laplacian().eval([2.0, 3.0]), 12.0);
        assert_eq!(p.swap_xy().eval([3.0, 2.0]), 14.0);
        assert_eq!(p.degree(), 3);
        assert_eq!((&p - &p), Poly2::zero());
    }

    #[test]
    fn reference_values() {
        let be = bercovier_engelman(ForcingVariant::Consistent);
        assert_eq!(be.omega_at([0.5, 0.0]), 16.0);
        assert_eq!(be.omega_at([0.0, 0.5]), 16.0);
        assert_relative_eq!(be.psi_at([0.5, 0.5]), -0.5, epsilon = 1e-15);
        assert_eq!(be.omega_at([0.0, 0.0]), 0.0);
        for t in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            for p in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                assert!(be.psi_at(p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn consistent_variant_satisfies_equations_exactly() {
        let be = bercovier_engelman(ForcingVariant::Consistent);
        assert!(be.vorticity_defect().max_abs_coeff() < 1e-9);
        assert!(be.momentum_defect().max_abs_coeff() < 1e-9);
        assert_eq!(be.f1.degree(), 5);
        assert_eq!(be.f2.degree(), 5);
    }

    #[test]
    fn literal_variant_is_off_by_two() {
        let be = bercovier_engelman(ForcingVariant::Literal);
        let d = be.momentum_defect();
        for p in [[0.1, 0.2], [0.5, 0.5], [0.9, 0.3]] {
            assert_relative_eq!(d.eval(p), 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn exact_fields_are_symmetric_in_x_and_y() {
        let be = bercovier_engelman(ForcingVariant::Consistent);
        assert!((&be.psi - &be.psi.swap_xy()).max_abs_coeff() < 1e-12);
        assert!((&be.omega - &be.omega.swap_xy()).max_abs_coeff() < 1e-12);
    }
}
