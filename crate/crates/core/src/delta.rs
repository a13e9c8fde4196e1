//! The delta-symbol decomposition: a smooth two-variable kernel and a
//! calibrated constant that together expand the indicator of n = 0 into
//! additive characters e(an/q) over moduli q up to a resolution parameter.

use crate::arith::{ramanujan_sum, totient_table};
use crate::error::{Error, Result};
use crate::kahan::Kahan;
use crate::quad::{integrate, QuadratureConfig};
use crate::window::bump;

/// Calibrated delta-symbol kernel at resolution Q.
///
/// The kernel is h(x, y) = sum_{j>=1} (xj)^{-1} (w(xj) - w(|y|/(xj))) with
/// w the canonical bump rescaled to [1/2, 1] and normalised to unit mass;
/// the normalisation makes the calibration constant approach 1 rapidly.
/// The series is a finite sum for every (x, y) because w has compact
/// support, and h vanishes identically for x > max(1, 2|y|).
#[derive(Debug, Clone)]
pub struct DeltaKernel {
    q: u32,
    c_q: f64,
    /// 2 / integral of the raw bump: makes w have unit mass
    w_norm: f64,
}

impl DeltaKernel {
    /// Build and calibrate a kernel for resolution `q > 1`. The calibration
    /// constant is the unique value making `delta(0) = 1` exactly.
    pub fn new(q: u32) -> Result<Self> {
        if q <= 1 {
            return Err(Error::InvalidParameter(format!(
                "delta resolution must exceed 1, got {q}"
            )));
        }
        let mass = integrate(bump, 1.0, 2.0, &QuadratureConfig::default())?
            .value
            .re;
        let mut kernel = Self {
            q,
            c_q: 1.0,
            w_norm: 2.0 / mass,
        };
        let phi = totient_table(q as usize + 1);
        let mut denom = Kahan::new();
        for qq in 1..=q {
            let h = kernel.kernel_eval(qq as f64 / q as f64, 0.0);
            denom.add(phi[qq as usize] as f64 * h);
        }
        let d = denom.value();
        if d <= 0.0 {
            return Err(Error::Calibration(d));
        }
        kernel.c_q = (q as f64) * (q as f64) / d;
        Ok(kernel)
    }

    pub fn resolution(&self) -> u32 {
        self.q
    }

    /// The calibration constant c_Q.
    pub fn calibration(&self) -> f64 {
        self.c_q
    }

    /// Rescaled unit-mass weight w on [1/2, 1].
    #[inline]
    pub fn weight(&self, u: f64) -> f64 {
        self.w_norm * bump(2.0 * u)
    }

    /// The smooth kernel h(x, y); exact zero outside x <= max(1, 2|y|).
    pub fn kernel_eval(&self, x: f64, y: f64) -> f64 {
        self.first_series(x) - self.second_series(x, y.abs())
    }

    /// The y-independent part sum_j (xj)^{-1} w(xj); only indices with
    /// xj in (1/2, 1) contribute.
    pub(crate) fn first_series(&self, x: f64) -> f64 {
        assert!(x > 0.0, "kernel requires x > 0");
        let lo = ((0.5 / x).floor() as u64).max(1);
        let hi = (1.0 / x).ceil() as u64 + 1;
        let mut sum = Kahan::new();
        for j in lo..=hi {
            let xj = x * j as f64;
            let w = self.weight(xj);
            if w != 0.0 {
                sum.add(w / xj);
            }
        }
        sum.value()
    }

    /// The y-dependent part sum_j (xj)^{-1} w(|y|/(xj)); only indices with
    /// |y|/(xj) in (1/2, 1) contribute.
    pub(crate) fn second_series(&self, x: f64, ay: f64) -> f64 {
        if ay == 0.0 {
            return 0.0;
        }
        let lo = ((ay / x).floor() as u64).max(1);
        let hi = (2.0 * ay / x).ceil() as u64 + 1;
        let mut sum = Kahan::new();
        for j in lo..=hi {
            let xj = x * j as f64;
            let w = self.weight(ay / xj);
            if w != 0.0 {
                sum.add(w / xj);
            }
        }
        sum.value()
    }

    /// The decomposition evaluated at integer n: c_Q/Q^2 sum_q c_q(n)
    /// h(q/Q, n/Q^2). The q-sum stops exactly at the kernel support bound
    /// q <= max(Q, 2|n|/Q).
    pub fn delta(&self, n: i64) -> f64 {
        let q = self.q as f64;
        let q_cap = (self.q as u64).max((2 * n.unsigned_abs()) / self.q as u64 + 2);
        let y = n as f64 / (q * q);
        let mut sum = Kahan::new();
        for qq in 1..=q_cap {
            let h = self.kernel_eval(qq as f64 / q, y);
            if h != 0.0 {
                sum.add(ramanujan_sum(qq as u32, n) as f64 * h);
            }
        }
        self.c_q / (q * q) * sum.value()
    }
}

/// Empirical bounds report for the kernel partial derivatives, by
/// Richardson-extrapolated central differences on a grid.
#[derive(Debug, Clone)]
pub struct DerivativeBoundsReport {
    pub order: (u32, u32),
    /// sup over the grid of |x^i y^j d^{i+j} h| * x  (the 1/x envelope constant)
    pub envelope_constant: f64,
    /// sup ratios against the decay envelope x^{-(1+i+j)} (x^N + min(1, (x/|y|)^N))
    /// in the regime x = o(min(1, |y|)), for N = 1 and N = 2; the x^N term is
    /// omitted when j = 0
    pub decay_constants: [f64; 2],
    /// grid points skipped for sitting within the margin of the support edge
    pub skipped: usize,
}

const FD_STEP: f64 = 1e-5;
const SUPPORT_MARGIN: f64 = 1e-3;

fn central<F: Fn(f64) -> f64>(f: &F, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

fn richardson<F: Fn(f64) -> f64>(f: &F, t: f64, h: f64) -> f64 {
    (4.0 * central(f, t, h / 2.0) - central(f, t, h)) / 3.0
}

/// Mixed partial d^{i+j} h / dx^i dy^j by nested Richardson differences.
fn kernel_partial(k: &DeltaKernel, x: f64, y: f64, i: u32, j: u32) -> f64 {
    match (i, j) {
        (0, 0) => k.kernel_eval(x, y),
        (i, 0) => {
            let f = |t: f64| kernel_partial(k, t, y, i - 1, 0);
            richardson(&f, x, FD_STEP)
        }
        (i, j) => {
            let f = |t: f64| kernel_partial(k, x, t, i, j - 1);
            richardson(&f, y, FD_STEP)
        }
    }
}

/// Evaluate the derivative-bound envelopes on a rectangular grid of
/// (x, y) points. Points within `SUPPORT_MARGIN` of the support edge
/// x = max(1, 2|y|) are skipped and counted.
pub fn derivative_bounds(
    kernel: &DeltaKernel,
    xs: &[f64],
    ys: &[f64],
    i: u32,
    j: u32,
) -> Result<DerivativeBoundsReport> {
    if i + j > 3 {
        return Err(Error::DerivativeOrder(i + j, 3));
    }
    let mut envelope: f64 = 0.0;
    let mut decay = [0.0f64; 2];
    let mut skipped = 0usize;
    for &x in xs {
        if x <= 2.0 * FD_STEP {
            skipped += 1;
            continue;
        }
        for &y in ys {
            let edge = (1.0f64).max(2.0 * y.abs());
            if (x - edge).abs() < SUPPORT_MARGIN {
                skipped += 1;
                continue;
            }
            let d = kernel_partial(kernel, x, y, i, j);
            let weighted = (x.powi(i as i32) * y.abs().powi(j as i32) * d).abs() * x;
            envelope = envelope.max(weighted);
            // decay regime: x well below min(1, |y|)
            if x < 0.2 * y.abs().min(1.0) {
                for (slot, nn) in [(0usize, 1i32), (1, 2)] {
                    let mut env = (x / y.abs()).powi(nn).min(1.0);
                    if j > 0 {
                        env += x.powi(nn);
                    }
                    env *= x.powi(-(1 + i as i32 + j as i32));
                    decay[slot] = decay[slot].max(d.abs() / env);
                }
            }
        }
    }
    Ok(DerivativeBoundsReport {
        order: (i, j),
        envelope_constant: envelope,
        decay_constants: decay,
        skipped,
    })
}
