use crate::error::{Error, Result};

/// Symmetric quadrature on the reference triangle in barycentric
/// coordinates. Weights are normalized to sum to one, so an integral over
/// a triangle `K` is `|K| * sum_q w_q f(x_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// One-point centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        Self {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
            degree: 1,
        }
    }

    /// Three interior points, exact for degree 2.
    pub fn three_point() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Seven-point rule exact for degree 5 (Radon / Dunavant).
    pub fn seven_point() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let b1 = (9.0 + 2.0 * s) / 21.0;
        let w1 = (155.0 - s) / 1200.0;
        let a2 = (6.0 + s) / 21.0;
        let b2 = (9.0 - 2.0 * s) / 21.0;
        let w2 = (155.0 + s) / 1200.0;
        Self {
            points: vec![
                [1.0 / 3.0; 3],
                [b1, a1, a1],
                [a1, b1, a1],
                [a1, a1, b1],
                [b2, a2, a2],
                [a2, b2, a2],
                [a2, a2, b2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// Cheapest bundled rule whose exactness degree is at least `degree`.
    pub fn with_degree(degree: usize) -> Result<Self> {
        match degree {
            0 | 1 => Ok(Self::centroid()),
            2 => Ok(Self::three_point()),
            3..=5 => Ok(Self::seven_point()),
            _ => Err(Error::InvalidArgument(format!(
                "no bundled triangle quadrature of degree {degree} (maximum 5)"
            ))),
        }
    }

    /// Physical quadrature points of triangle `p`.
    pub fn map(&self, p: &[[f64; 2]; 3]) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let p = *p;
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            (
                [
                    l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                    l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
                ],
                w,
            )
        })
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::seven_point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // exact mean of x^a y^b over the triangle (0,0),(1,0),(0,1): 2 a! b! / (a+b+2)!
    fn monomial_mean(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn weights_sum_to_one() {
        for d in 0..=5 {
            let q = QuadratureRule::with_degree(d).unwrap();
            assert_relative_eq!(q.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            for p in &q.points {
                assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            }
        }
        assert!(QuadratureRule::with_degree(6).is_err());
    }

    #[test]
    fn monomials_integrated_exactly_up_to_degree() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for rule in [QuadratureRule::centroid(), QuadratureRule::three_point(), QuadratureRule::seven_point()] {
            for a in 0..=rule.degree as u32 {
                for b in 0..=(rule.degree as u32 - a) {
                    let approx: f64 = rule.map(&tri).map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32)).sum();
                    assert_relative_eq!(approx, monomial_mean(a, b), max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn seven_point_is_not_degree_six() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let q = QuadratureRule::seven_point();
        let approx: f64 = q.map(&tri).map(|(x, w)| w * x[0].powi(6)).sum();
        assert!((approx - monomial_mean(6, 0)).abs() > 1e-6);
    }
}
