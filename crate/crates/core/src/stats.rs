//! Estimates with standard errors and the small least-squares fits used by
//! the sweep experiments.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// Success fraction of `k` out of `n` Bernoulli trials.
    pub fn binomial(k: u64, n: u64) -> Self {
        if n == 0 {
            return Self { value: f64::NAN, stderr: f64::NAN };
        }
        let p = k as f64 / n as f64;
        Self { value: p, stderr: (p * (1.0 - p) / n as f64).sqrt() }
    }

    /// `|self − expected|` in units of the standard error; exact estimates
    /// compare with a 1e-10 floor.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.value - expected).abs() / self.stderr.max(1e-10)
    }

    pub fn within(&self, expected: f64, sigmas: f64) -> bool {
        self.z_score(expected) <= sigmas
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.value, self.stderr)
    }
}

/// Weighted least squares `y ≈ X β`. With any zero standard error the fit
/// is unweighted and the covariance comes from the residual scatter.
pub struct LinearFit {
    pub coefficients: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

pub fn least_squares(design: &DMatrix<f64>, y: &[f64], stderr: &[f64]) -> Result<LinearFit> {
    let (n, k) = design.shape();
    if y.len() != n || stderr.len() != n || n < k {
        return Err(Error::InvalidParameter(format!("least squares needs at least {k} points, got {n}")));
    }
    let weighted = stderr.iter().all(|s| *s > 0.0 && s.is_finite());
    let w = DVector::from_iterator(n, stderr.iter().map(|s| if weighted { s.powi(-2) } else { 1.0 }));
    let yv = DVector::from_row_slice(y);
    let xtw = design.transpose() * DMatrix::from_diagonal(&w);
    let normal = &xtw * design;
    let inv = normal.try_inverse().ok_or_else(|| Error::InvalidParameter("singular least-squares system".into()))?;
    let beta = &inv * (&xtw * &yv);
    let covariance = if weighted {
        inv
    } else {
        let rss = (&yv - design * &beta).norm_squared();
        let dof = n.saturating_sub(k);
        inv * if dof == 0 { 0.0 } else { rss / dof as f64 }
    };
    Ok(LinearFit { coefficients: beta, covariance })
}

fn log_points(v: &[f64], se: &[f64]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let keep: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0 && v[i] > 3.0 * se[i]).collect();
    let y = keep.iter().map(|&i| v[i].ln()).collect();
    let s = keep.iter().map(|&i| se[i] / v[i]).collect();
    (keep, y, s)
}

/// Fits `V = A·exp(−t/T)` and returns `T`, in the units of `t`.
pub fn fit_exponential_decay(t: &[f64], v: &[f64], se: &[f64]) -> Result<Estimate> {
    let (keep, y, s) = log_points(v, se);
    let x = DMatrix::from_fn(keep.len(), 2, |r, c| if c == 0 { 1.0 } else { t[keep[r]] });
    let fit = least_squares(&x, &y, &s)?;
    let slope = fit.coefficients[1];
    if slope >= 0.0 {
        return Err(Error::InvalidParameter("visibility does not decay".into()));
    }
    let tau = -1.0 / slope;
    Ok(Estimate::new(tau, tau * tau * fit.covariance[(1, 1)].sqrt()))
}

/// Fits `V = A·exp(−(t/T)²)` and returns `T`.
pub fn fit_gaussian_decay(t: &[f64], v: &[f64], se: &[f64]) -> Result<Estimate> {
    let (keep, y, s) = log_points(v, se);
    let x = DMatrix::from_fn(keep.len(), 2, |r, c| if c == 0 { 1.0 } else { t[keep[r]].powi(2) });
    let fit = least_squares(&x, &y, &s)?;
    let slope = fit.coefficients[1];
    if slope >= 0.0 {
        return Err(Error::InvalidParameter("visibility does not decay".into()));
    }
    let tau = (-slope).powf(-0.5);
    Ok(Estimate::new(tau, 0.5 * tau.powi(3) * fit.covariance[(1, 1)].sqrt()))
}

/// Fit of `y = a + b·cos θ + c·sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub offset: f64,
    pub cos: f64,
    pub sin: f64,
    /// `√(b² + c²)/a`.
    pub visibility: Estimate,
    pub phase: f64,
}

pub fn fit_sinusoid(theta: &[f64], y: &[f64], se: &[f64]) -> Result<SinusoidFit> {
    let x = DMatrix::from_fn(theta.len(), 3, |r, c| match c {
        0 => 1.0,
        1 => theta[r].cos(),
        _ => theta[r].sin(),
    });
    let fit = least_squares(&x, y, se)?;
    let (a, b, c) = (fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]);
    let amp = b.hypot(c);
    let vis = amp / a;
    // gradient of √(b²+c²)/a
    let g = if amp > 0.0 {
        DVector::from_row_slice(&[-vis / a, b / (amp * a), c / (amp * a)])
    } else {
        DVector::from_row_slice(&[0.0, 1.0 / a, 0.0])
    };
    let var = (g.transpose() * &fit.covariance * &g)[(0, 0)].max(0.0);
    Ok(SinusoidFit { offset: a, cos: b, sin: c, visibility: Estimate::new(vis, var.sqrt()), phase: c.atan2(b) })
}

/// Fringe amplitude from outcome probabilities at final-pulse azimuths
/// `0, π/2, π, 3π/2`, with delta-method error.
pub fn quadrature_visibility(p: [Estimate; 4]) -> Estimate {
    let dx = p[0].value - p[2].value;
    let dy = p[1].value - p[3].value;
    let v = dx.hypot(dy);
    let vx = p[0].stderr.powi(2) + p[2].stderr.powi(2);
    let vy = p[1].stderr.powi(2) + p[3].stderr.powi(2);
    let se = if v > 0.0 { ((dx * dx * vx + dy * dy * vy) / (v * v)).sqrt() } else { (vx + vy).sqrt() };
    Estimate::new(v, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_errors() {
        let e = Estimate::binomial(25, 100);
        assert_eq!(e.value, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(Estimate::binomial(0, 10).stderr, 0.0);
        assert!(Estimate::binomial(0, 0).value.is_nan());
    }

    #[test]
    fn exact_decays_recovered() {
        let t: Vec<f64> = (0..8).map(|i| 300.0 * i as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 0.9 * (-x / 2700.0).exp()).collect();
        let zero = vec![0.0; t.len()];
        let tau = fit_exponential_decay(&t, &v, &zero).unwrap();
        assert!((tau.value - 2700.0).abs() < 1e-6);
        let g: Vec<f64> = t.iter().map(|x| (-(x / 1000.0f64).powi(2)).exp()).collect();
        let tau = fit_gaussian_decay(&t[..4], &g[..4], &zero[..4]).unwrap();
        assert!((tau.value - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn sinusoid_fit_recovers_visibility() {
        let th: Vec<f64> = (0..24).map(|i| i as f64 * std::f64::consts::TAU / 24.0).collect();
        let y: Vec<f64> = th.iter().map(|x| 0.25 * (1.0 + 0.6 * (x - 0.4).cos())).collect();
        let fit = fit_sinusoid(&th, &y, &[0.0; 24]).unwrap();
        assert!((fit.visibility.value - 0.6).abs() < 1e-12);
        assert!((fit.phase - 0.4).abs() < 1e-12);
        assert!(fit.visibility.stderr < 1e-12);
    }

    #[test]
    fn weighted_fit_error_scales() {
        // fixed design, doubling every error doubles the slope error
        let x = DMatrix::from_fn(5, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
        let y = [1.0, 1.9, 3.1, 4.0, 5.1];
        let a = least_squares(&x, &y, &[0.1; 5]).unwrap();
        let b = least_squares(&x, &y, &[0.2; 5]).unwrap();
        assert!((b.covariance[(1, 1)].sqrt() / a.covariance[(1, 1)].sqrt() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_estimate() {
        let p = [0.9, 0.5, 0.1, 0.5].map(Estimate::exact);
        assert!((quadrature_visibility(p).value - 0.8).abs() < 1e-15);
    }
}
