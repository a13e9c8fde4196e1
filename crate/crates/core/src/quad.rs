//! Adaptive Gauss-Kronrod quadrature with oscillation-aware panel seeding,
//! for real and complex integrands, plus the window Fourier transform.

use crate::error::{Error, Result};
use crate::kahan::KahanComplex;
use crate::window::SmoothWindow;
use num_complex::Complex64;
use std::f64::consts::PI;

/// e(t) = exp(2 pi i t)
#[inline]
pub fn e2pi(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Tolerances and limits for the adaptive rule.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// cap on the total number of panels (initial + refinements)
    pub max_panels: usize,
    /// initial panels per oscillation period of the phase
    pub panels_per_period: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 200_000,
            panels_per_period: 1.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_panels == 0 || self.panels_per_period <= 0.0 {
            return Err(Error::InvalidParameter(
                "quadrature limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule
// (standard QUADPACK constants on [-1, 1]).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod pass over [a, b]; returns (K15 value, |K15 - G7|).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut kron = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    for i in 0..7 {
        let lo = f(c - r * XGK[i]);
        let hi = f(c + r * XGK[i]);
        kron += WGK[i] * (lo + hi);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    let mid = f(c);
    kron += WGK[7] * mid;
    gauss += WG[3] * mid;
    (kron * r, (kron - gauss).norm() * r)
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

/// Adaptive integration of a complex integrand. `est_cycles` seeds the
/// initial subdivision (number of oscillation periods expected over the
/// interval); refinement then bisects the worst panel until the summed
/// error estimate meets the tolerance.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    est_cycles: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    assert!(b > a, "empty interval");
    let initial = ((est_cycles.abs() * cfg.panels_per_period).ceil() as usize)
        .clamp(1, cfg.max_panels)
        .max(1);
    let mut panels: Vec<Panel> = Vec::with_capacity(initial + 16);
    let step = (b - a) / initial as f64;
    for i in 0..initial {
        let lo = a + i as f64 * step;
        let hi = if i + 1 == initial { b } else { lo + step };
        let (v, e) = gk15(&f, lo, hi);
        panels.push(Panel {
            a: lo,
            b: hi,
            value: v,
            error: e,
        });
    }

    loop {
        let mut total = KahanComplex::new();
        let mut err = 0.0;
        for p in &panels {
            total.add(p.value);
            err += p.error;
        }
        let value = total.value();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if err <= target {
            return Ok(QuadResult {
                value,
                error: err,
                panels: panels.len(),
            });
        }
        if panels.len() >= cfg.max_panels {
            return Err(Error::QuadratureTolerance {
                value,
                error: err,
                panels: panels.len(),
            });
        }
        // bisect the worst panel (first index wins ties: deterministic)
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        panels[worst] = Panel {
            a: pa,
            b: mid,
            value: v1,
            error: e1,
        };
        panels.push(Panel {
            a: mid,
            b: pb,
            value: v2,
            error: e2,
        });
    }
}

/// Integral of f(x) e(freq x) over [a, b], splitting panels along the
/// phase periods before adapting.
pub fn oscillatory_integral<F: Fn(f64) -> f64>(
    f: F,
    freq: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let cycles = freq.abs() * (b - a);
    integrate_adaptive(
        move |x| f(x) * e2pi(freq * x),
        a,
        b,
        cycles.max(1.0),
        cfg,
    )
}

/// Plain real integral (zero frequency).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    integrate_adaptive(move |x| Complex64::new(f(x), 0.0), a, b, 1.0, cfg)
}

/// Window Fourier transform W_hat(y) = int W(x) e(-x y) dx over the
/// support [1, 2].
pub fn fourier_transform(w: &SmoothWindow, y: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    let wc = w.clone();
    oscillatory_integral(move |x| wc.eval(x), -y, 1.0, 2.0, cfg)
}
