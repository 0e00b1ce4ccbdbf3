//! Radial quadrature rules.
//!
//! Gauss-Laguerre handles `e^{-t}`-weighted integrals exactly for polynomial
//! integrands; the exp-sinh rule (double-exponential map of the half line)
//! handles the Bessel-weighted kernels, which have algebraic or logarithmic
//! behaviour at the origin and exponential decay at infinity.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Nodes and weights of `int_0^inf e^{-t} f(t) dt ~ sum w_i f(t_i)`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 180 {
            return Err(Error::Quadrature(format!(
                "Gauss-Laguerre order {order} outside 1..=180"
            )));
        }
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n {
            // Initial guesses from Numerical Recipes' gaulag with alpha = 0.
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
                }
            };
            let mut converged = false;
            for _ in 0..200 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
                }
                let pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                // Rounding in the recurrence leaves a limit cycle near 1e-13.
                if (z - z1).abs() <= 2e-13 * z.abs() {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Quadrature(format!(
                    "Gauss-Laguerre root {i} of order {n} did not converge"
                )));
            }
            // Recompute with the polished root for the weight.
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            let pp = (nf * p1 - nf * p2) / z;
            nodes[i] = z;
            weights[i] = -1.0 / (pp * nf * p2);
        }
        Ok(GaussLaguerre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Largest |t| kept by the exp-sinh map; `exp(pi/2 sinh t)` spans about
/// `1e-300 ..= 1e300` on this interval.
const EXP_SINH_TMAX: f64 = 6.78;

fn exp_sinh_point(t: f64) -> (f64, f64) {
    let x = (FRAC_PI_2 * t.sinh()).exp();
    let dx = FRAC_PI_2 * t.cosh() * x;
    (x, dx)
}

/// Fixed exp-sinh rule for `int_0^inf f(x) dx` at step `2^{-level}`,
/// restricted to nodes inside `[x_min, x_max]`.
#[derive(Debug, Clone)]
pub struct ExpSinhRule {
    pub level: u32,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ExpSinhRule {
    pub fn new(level: u32, x_min: f64, x_max: f64) -> Self {
        let h = 0.5f64.powi(level as i32);
        let kmax = (EXP_SINH_TMAX / h).floor() as i64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for k in -kmax..=kmax {
            let (x, dx) = exp_sinh_point(k as f64 * h);
            if x >= x_min && x <= x_max && dx > 0.0 {
                nodes.push(x);
                weights.push(h * dx);
            }
        }
        ExpSinhRule {
            level,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Adaptive exp-sinh integration of `f` over `(0, inf)`.
///
/// Halves the step until two successive levels agree to `rel_tol`. `f` must
/// return finite values everywhere on the half line (write integrands in log
/// form so that `x^a e^{-x}` stays finite at the extremes).
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    const MAX_LEVEL: u32 = 10;
    let eval = |t: f64| -> Result<f64> {
        let (x, dx) = exp_sinh_point(t);
        if x == 0.0 || !x.is_finite() {
            return Ok(0.0);
        }
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!(
                "integrand is not finite at x = {x:e}"
            )));
        }
        Ok(v * dx)
    };
    let kmax = EXP_SINH_TMAX.floor() as i64;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        sum += eval(k as f64)?;
    }
    let mut h = 1.0;
    let mut estimate = sum * h;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let kmax = (EXP_SINH_TMAX / h).floor() as i64;
        let mut k = -kmax;
        if k % 2 == 0 {
            k += 1;
        }
        while k <= kmax {
            sum += eval(k as f64 * h)?;
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if level >= 3 && diff <= rel_tol * next.abs() {
            return Ok(next);
        }
        if level >= 3 && next == 0.0 && diff == 0.0 {
            return Ok(0.0);
        }
    }
    Err(Error::Quadrature(format!(
        "exp-sinh did not reach relative tolerance {rel_tol:e} (estimate {estimate:e})"
    )))
}

/// Trapezoid rule with `order` equispaced points on `[0, 2 pi)`; exact for
/// `e^{i k theta}` whenever `|k| < order`.
pub fn angular_nodes(order: usize) -> Vec<f64> {
    (0..order)
        .map(|b| std::f64::consts::TAU * b as f64 / order as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_integrates_polynomials() {
        let gl = GaussLaguerre::new(64).unwrap();
        let mut fact = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = gl.integrate(|t| t.powi(k));
            assert!(((got - fact) / fact).abs() < 1e-12, "k={k} got {got} want {fact}");
        }
        assert!(gl.weights.iter().all(|&w| w > 0.0));
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn laguerre_small_orders() {
        let gl = GaussLaguerre::new(2).unwrap();
        // Roots of L_2: 2 -+ sqrt 2.
        assert!((gl.nodes[0] - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((gl.nodes[1] - (2.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(GaussLaguerre::new(0).is_err());
    }

    #[test]
    fn exp_sinh_reference_integrals() {
        // int_0^inf e^{-x} = 1
        let v = exp_sinh(|x| (-x).exp(), 1e-14).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        // int_0^inf x^{-1/2} e^{-x} = sqrt(pi)
        let v = exp_sinh(|x| (-0.5 * x.ln() - x).exp(), 1e-14).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        // int_0^inf dx / (1 + x^2) = pi/2
        let v = exp_sinh(|x| 1.0 / (1.0 + x * x), 1e-13).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn exp_sinh_rejects_non_finite_integrand() {
        assert!(exp_sinh(|x| x.powi(3) * (-x).exp(), 1e-12).is_err());
    }

    #[test]
    fn angular_rule_orthogonality() {
        let nodes = angular_nodes(16);
        for k in -15i32..=15 {
            let s: num_complex::Complex64 = nodes
                .iter()
                .map(|&t| num_complex::Complex64::from_polar(1.0, k as f64 * t))
                .sum::<num_complex::Complex64>()
                / 16.0;
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((s.re - want).abs() < 1e-14 && s.im.abs() < 1e-14, "k={k}");
        }
    }
}
