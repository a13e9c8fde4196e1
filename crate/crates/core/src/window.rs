//! Smooth compactly supported windows on [1, 2] with closed-form
//! derivative evaluation.

use crate::error::{Error, Result};

/// Highest derivative order with a precomputed closed form.
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// The canonical bump w(x) = exp(-1/((x-1)(2-x))) on (1, 2), identically
/// zero elsewhere, together with all derivatives up to
/// [`MAX_DERIVATIVE_ORDER`].
///
/// Derivatives use the representation w^(j) = P_j / u^{2j} * w with
/// u = (x-1)(2-x) and integer polynomials P_j obtained from the recursion
/// P_{j+1} = P_j' u^2 - 2j P_j u' u + P_j u'.
#[derive(Debug, Clone)]
pub struct SmoothWindow {
    kind: WindowKind,
    // P_j coefficients, constant term first
    polys: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WindowKind {
    Bump,
    Zero,
}

// u = -x^2 + 3x - 2, u' = -2x + 3
const U: [i64; 3] = [-2, 3, -1];
const DU: [i64; 2] = [3, -2];

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j]
                .checked_add(x.checked_mul(y).expect("window polynomial overflow"))
                .expect("window polynomial overflow");
        }
    }
    out
}

fn poly_add(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)
        })
        .collect()
}

fn poly_scale(a: &[i64], c: i64) -> Vec<i64> {
    a.iter()
        .map(|&x| x.checked_mul(c).expect("window polynomial overflow"))
        .collect()
}

fn poly_diff(a: &[i64]) -> Vec<i64> {
    if a.len() <= 1 {
        return vec![0];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as i64)
        .collect()
}

fn poly_eval(a: &[i64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in a.iter().rev() {
        acc = acc * x + c as f64;
    }
    acc
}

impl SmoothWindow {
    /// The canonical bump.
    pub fn bump() -> Self {
        let uu = poly_mul(&U, &U);
        let mut polys: Vec<Vec<i64>> = vec![vec![1]];
        for j in 0..MAX_DERIVATIVE_ORDER as usize {
            let pj = &polys[j];
            let term1 = poly_mul(&poly_diff(pj), &uu);
            let term2 = poly_scale(&poly_mul(&poly_mul(pj, &DU), &U), -2 * j as i64);
            let term3 = poly_mul(pj, &DU);
            polys.push(poly_add(&poly_add(&term1, &term2), &term3));
        }
        Self {
            kind: WindowKind::Bump,
            polys,
        }
    }

    /// Identically-zero window (degenerate case used by tests and the
    /// harness sanity path).
    pub fn zero() -> Self {
        Self {
            kind: WindowKind::Zero,
            polys: vec![vec![0]],
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            WindowKind::Zero => 0.0,
            WindowKind::Bump => bump(x),
        }
    }

    /// j-th derivative (j = 0 is the value itself).
    pub fn deriv(&self, x: f64, j: u32) -> Result<f64> {
        if j > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder(j, MAX_DERIVATIVE_ORDER));
        }
        match self.kind {
            WindowKind::Zero => Ok(0.0),
            WindowKind::Bump => {
                if j == 0 {
                    return Ok(bump(x));
                }
                if x <= 1.0 || x >= 2.0 {
                    return Ok(0.0);
                }
                let u = (x - 1.0) * (2.0 - x);
                // beyond this point exp(-1/u) underflows anyway
                if u < 1e-6 {
                    return Ok(0.0);
                }
                let w = (-1.0 / u).exp();
                let p = poly_eval(&self.polys[j as usize], x);
                Ok(w * p / u.powi(2 * j as i32))
            }
        }
    }

    /// True when `eval` is identically zero.
    pub fn is_zero(&self) -> bool {
        self.kind == WindowKind::Zero
    }
}

impl Default for SmoothWindow {
    fn default() -> Self {
        Self::bump()
    }
}

/// The raw bump value, exact zero outside (1, 2).
#[inline]
pub fn bump(x: f64) -> f64 {
    if x <= 1.0 || x >= 2.0 {
        return 0.0;
    }
    let u = (x - 1.0) * (2.0 - x);
    if u < 1e-6 {
        return 0.0;
    }
    (-1.0 / u).exp()
}
