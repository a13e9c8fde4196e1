//! The double shifted convolution sum and its transformation pipeline:
//! direct evaluation, the delta-expanded identity, the Poisson-dualised
//! shift sum, the closed-form character sum, the oscillatory kernel
//! integral with its decay envelopes, and the decay experiment.

mod divisor;
mod pipeline;

pub use divisor::{divisor_correlation, ingham_fit, triple_correlation, InghamReport};
pub use pipeline::{delta_expanded_sum, post_poisson_sum, PipelineParams, PipelineStage};

use crate::delta::DeltaKernel;
use crate::error::{Error, Result};
use crate::forms::Eigenform;
use crate::kahan::{Kahan, KahanComplex};
use crate::quad::{e2pi, integrate_adaptive, QuadratureConfig};
use crate::window::SmoothWindow;
use num_complex::Complex64;

/// Inputs of the averaged double shifted convolution sum
/// (1/H) sum_h V(h/H) sum_n lambda1(n) lambda2(n+h) lambda3(n+2h) W(n/N).
#[derive(Clone)]
pub struct ShiftedSumSpec<'a> {
    pub forms: [&'a Eigenform; 3],
    pub n_len: usize,
    pub h_len: usize,
    pub v: SmoothWindow,
    pub w: SmoothWindow,
}

impl<'a> ShiftedSumSpec<'a> {
    pub fn new(forms: [&'a Eigenform; 3], n_len: usize, h_len: usize) -> Result<Self> {
        let spec = Self {
            forms,
            n_len,
            h_len,
            v: SmoothWindow::bump(),
            w: SmoothWindow::bump(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Largest coefficient index touched: n <= 2N and n + 2h <= 2N + 4H.
    pub fn required_prec(&self) -> usize {
        2 * self.n_len + 4 * self.h_len
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_len < 1 {
            return Err(Error::InvalidParameter("H must be at least 1".into()));
        }
        let need = self.required_prec();
        let have = self.forms.iter().map(|f| f.prec()).min().unwrap();
        if need > have {
            return Err(Error::PrecisionShortfall {
                have,
                need,
                what: "averaged shifted sum".into(),
            });
        }
        Ok(())
    }
}

/// Unaveraged single-shift sum sum_{n<=N} lambda1(n) lambda2(n+h) lambda3(n+2h).
pub fn single_shift_sum(forms: [&Eigenform; 3], n_max: usize, h: usize) -> Result<f64> {
    let need = n_max + 2 * h;
    let have = forms.iter().map(|f| f.prec()).min().unwrap();
    if need > have {
        return Err(Error::PrecisionShortfall {
            have,
            need,
            what: format!("single shift sum at N={n_max}, h={h}"),
        });
    }
    let mut s = Kahan::new();
    for n in 1..=n_max {
        s.add(forms[0].lambda(n) * forms[1].lambda(n + h) * forms[2].lambda(n + 2 * h));
    }
    Ok(s.value())
}

/// The averaged sum, shift-major loop order.
pub fn averaged_sum(spec: &ShiftedSumSpec) -> Result<f64> {
    spec.validate()?;
    let (n_len, h_len) = (spec.n_len, spec.h_len);
    let [f1, f2, f3] = spec.forms;
    let mut outer = Kahan::new();
    for h in h_len..=2 * h_len {
        let vh = spec.v.eval(h as f64 / h_len as f64);
        if vh == 0.0 {
            continue;
        }
        let mut inner = Kahan::new();
        for n in n_len..=2 * n_len {
            let wn = spec.w.eval(n as f64 / n_len as f64);
            if wn != 0.0 {
                inner.add(f1.lambda(n) * f2.lambda(n + h) * f3.lambda(n + 2 * h) * wn);
            }
        }
        outer.add(vh * inner.value());
    }
    Ok(outer.value() / h_len as f64)
}

/// The same sum with the loops exchanged; serves as a mutual oracle for
/// `averaged_sum`.
pub fn averaged_sum_n_major(spec: &ShiftedSumSpec) -> Result<f64> {
    spec.validate()?;
    let (n_len, h_len) = (spec.n_len, spec.h_len);
    let [f1, f2, f3] = spec.forms;
    let mut outer = Kahan::new();
    for n in n_len..=2 * n_len {
        let wn = spec.w.eval(n as f64 / n_len as f64);
        if wn == 0.0 {
            continue;
        }
        let mut inner = Kahan::new();
        for h in h_len..=2 * h_len {
            let vh = spec.v.eval(h as f64 / h_len as f64);
            if vh != 0.0 {
                inner.add(f2.lambda(n + h) * f3.lambda(n + 2 * h) * vh);
            }
        }
        outer.add(wn * f1.lambda(n) * inner.value());
    }
    Ok(outer.value() / h_len as f64)
}

// ---------------------------------------------------------------------------
// Character sum
// ---------------------------------------------------------------------------

/// Closed form of the full residue sum sum_{alpha mod q1 q2}
/// e((a1 q2 + 2 a2 q1 + h) alpha / (q1 q2)): equals q1 q2 when
/// q1 q2 divides a1 q2 + 2 a2 q1 + h, and zero otherwise.
pub fn character_sum(a1: i64, a2: i64, q1: u32, q2: u32, h: i64) -> Result<i64> {
    check_coprime(a1, q1)?;
    check_coprime(a2, q2)?;
    let q = q1 as i64 * q2 as i64;
    let arg = a1 * q2 as i64 + 2 * a2 * q1 as i64 + h;
    Ok(if arg.rem_euclid(q) == 0 { q } else { 0 })
}

/// Brute-force oracle for [`character_sum`]: sums the roots of unity
/// directly and rounds the (provably integral) result.
pub fn character_sum_brute(a1: i64, a2: i64, q1: u32, q2: u32, h: i64) -> Result<i64> {
    check_coprime(a1, q1)?;
    check_coprime(a2, q2)?;
    let q = q1 as i64 * q2 as i64;
    let arg = a1 * q2 as i64 + 2 * a2 * q1 as i64 + h;
    let mut s = KahanComplex::new();
    for alpha in 0..q {
        s.add(e2pi((arg.rem_euclid(q) * alpha) as f64 / q as f64));
    }
    let v = s.value();
    assert!(v.im.abs() < 1e-6, "character sum not real: {v}");
    Ok(v.re.round() as i64)
}

fn check_coprime(a: i64, q: u32) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidParameter("modulus must be positive".into()));
    }
    if q > 1 && num_integer::gcd(a.rem_euclid(q as i64), q as i64) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Oscillatory kernel integral
// ---------------------------------------------------------------------------

/// The x-integral of the two delta kernels against the averaging window at
/// dual shift frequency: int_1^2 h(q1/Q1, (n + xH - u)/Q1^2)
/// h(q2/Q2, (n + 2xH - v)/Q2^2) V(x) e(-shift H x / (q1 q2)) dx.
#[allow(clippy::too_many_arguments)]
pub fn dual_shift_integral(
    dual_shift: i64,
    n: f64,
    u: f64,
    v: f64,
    q1: u32,
    q2: u32,
    big_h: f64,
    kernel1: &DeltaKernel,
    kernel2: &DeltaKernel,
    window: &SmoothWindow,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let big_q1 = kernel1.resolution() as f64;
    let big_q2 = kernel2.resolution() as f64;
    let freq = -(dual_shift as f64) * big_h / (q1 as f64 * q2 as f64);
    let x1 = q1 as f64 / big_q1;
    let x2 = q2 as f64 / big_q2;
    let w = window.clone();
    let k1 = kernel1.clone();
    let k2 = kernel2.clone();
    let f = move |x: f64| -> Complex64 {
        let wv = w.eval(x);
        if wv == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let y1 = (n + x * big_h - u) / (big_q1 * big_q1);
        let y2 = (n + 2.0 * x * big_h - v) / (big_q2 * big_q2);
        let h1 = k1.kernel_eval(x1, y1);
        if h1 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let h2 = k2.kernel_eval(x2, y2);
        if h2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        h1 * h2 * wv * e2pi(freq * x)
    };
    Ok(integrate_adaptive(f, 1.0, 2.0, freq.abs().max(1.0), cfg)?.value)
}

/// Decay study of [`dual_shift_integral`] in the dual shift variable:
/// reports the h = 0 value, the value at shift = decay_factor (q1 q2 / H + 1),
/// and fitted envelope constants
/// sup |J(h)| / (Q1 Q2 (q1 q2/(hH) + 1/h)^j) for j = 1, 2 over a shift grid.
#[derive(Debug, Clone)]
pub struct DualShiftDecayReport {
    pub base_value: f64,
    pub far_shift: i64,
    pub far_ratio: f64,
    pub envelope_constants: [f64; 2],
}

#[allow(clippy::too_many_arguments)]
pub fn dual_shift_decay(
    n: f64,
    u: f64,
    v: f64,
    q1: u32,
    q2: u32,
    big_h: f64,
    kernel1: &DeltaKernel,
    kernel2: &DeltaKernel,
    shift_grid: &[i64],
    decay_factor: f64,
    cfg: &QuadratureConfig,
) -> Result<DualShiftDecayReport> {
    let window = SmoothWindow::bump();
    let eval = |shift: i64| {
        dual_shift_integral(shift, n, u, v, q1, q2, big_h, kernel1, kernel2, &window, cfg)
    };
    let base = eval(0)?;
    let base_value = base.norm();
    let far_shift = (decay_factor * (q1 as f64 * q2 as f64 / big_h + 1.0)).ceil() as i64;
    let far = eval(far_shift)?.norm();
    let big_q1 = kernel1.resolution() as f64;
    let big_q2 = kernel2.resolution() as f64;
    let mut envelope = [0.0f64; 2];
    for &shift in shift_grid {
        if shift == 0 {
            continue;
        }
        let value = eval(shift)?.norm();
        let hh = shift.unsigned_abs() as f64;
        for (slot, j) in [(0usize, 1i32), (1, 2)] {
            let env = big_q1 * big_q2
                * (q1 as f64 * q2 as f64 / (hh * big_h) + 1.0 / hh).powi(j);
            envelope[slot] = envelope[slot].max(value / env);
        }
    }
    Ok(DualShiftDecayReport {
        base_value,
        far_shift,
        far_ratio: far / base_value.max(1e-300),
        envelope_constants: envelope,
    })
}

// ---------------------------------------------------------------------------
// Voronoi-kernel transform derivative
// ---------------------------------------------------------------------------

/// Derivative study of the holomorphic Voronoi-kernel transform with
/// respect to its shift argument w:
///
///   T(w) = N^2 int int W2(u) W3(v) [ int h(q/Q, (w + xH - Nu)/Q^2)
///          h(q/Q, (w + 2xH - Nv)/Q^2) V(x) e(-h H x/q^2) dx ]
///          J_{k-1}(4 pi sqrt(y N u)) J_{k-1}(4 pi sqrt(z N v)) du dv.
///
/// Reports sup |dT/dw| / N over the grid by Richardson finite differences,
/// together with the consistency defect between steps delta and delta/2.
#[derive(Debug, Clone)]
pub struct TransformDerivativeReport {
    pub sup_ratio: f64,
    pub richardson_defect: f64,
    pub grid_points: usize,
}

pub fn transform_derivative_check(
    form: &Eigenform,
    q: u32,
    n_scale: f64,
    w_grid: &[f64],
    window: &SmoothWindow,
    cfg: &QuadratureConfig,
) -> Result<TransformDerivativeReport> {
    use crate::bessel::bessel_j_unchecked;
    if w_grid.is_empty() {
        return Err(Error::GridTooSmall {
            have: 0,
            need: 1,
            what: "transform derivative grid".into(),
        });
    }
    let big_q = (n_scale.sqrt().ceil() as u32).max(2);
    let kernel = DeltaKernel::new(big_q)?;
    let big_h = n_scale.powf(0.6).ceil();
    let k = form.weight();
    let dual_h = 1i64;
    let (y, z) = (1.0 / (q as f64 * q as f64), 1.0 / (q as f64 * q as f64));

    // moderate fixed tensor grid for the (u, v) integral; the x-integral
    // reuses the adaptive machinery
    let uv_nodes = 24usize;
    let transform = |w: f64| -> Result<f64> {
        let mut acc = KahanComplex::new();
        for iu in 0..uv_nodes {
            let u = 1.0 + (iu as f64 + 0.5) / uv_nodes as f64;
            let wu = window.eval(u);
            if wu == 0.0 {
                continue;
            }
            for iv in 0..uv_nodes {
                let v = 1.0 + (iv as f64 + 0.5) / uv_nodes as f64;
                let wv = window.eval(v);
                if wv == 0.0 {
                    continue;
                }
                let inner = dual_shift_integral(
                    dual_h,
                    w,
                    n_scale * u,
                    n_scale * v,
                    q,
                    q,
                    big_h,
                    &kernel,
                    &kernel,
                    window,
                    cfg,
                )?;
                let bessels = bessel_j_unchecked(k - 1, 4.0 * std::f64::consts::PI * (y * n_scale * u).sqrt())
                    * bessel_j_unchecked(k - 1, 4.0 * std::f64::consts::PI * (z * n_scale * v).sqrt());
                acc.add(inner * wu * wv * bessels / (uv_nodes as f64 * uv_nodes as f64));
            }
        }
        Ok(n_scale * n_scale * acc.value().norm())
    };

    let mut sup: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let step = 0.5f64.max(n_scale * 1e-4);
    for &w in w_grid {
        let d1 = (transform(w + step)? - transform(w - step)?) / (2.0 * step);
        let d2 = (transform(w + step / 2.0)? - transform(w - step / 2.0)?) / step;
        sup = sup.max(d1.abs() / n_scale);
        let scale = d1.abs().max(d2.abs()).max(1e-12);
        defect = defect.max((d1 - d2).abs() / scale);
    }
    Ok(TransformDerivativeReport {
        sup_ratio: sup,
        richardson_defect: defect,
        grid_points: w_grid.len(),
    })
}

// ---------------------------------------------------------------------------
// Decay experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DecayScanReport {
    /// per grid point: (N, H, |S|, trivial-bound ratio |S| / (N ln^3 N))
    pub rows: Vec<(usize, usize, f64, f64)>,
    pub fitted_exponent: f64,
}

/// Compute |averaged sum| along an N grid with H = ceil(N^theta), fit the
/// exponent of |S| against N, and report the trivial-bound ratios.
pub fn decay_scan(
    forms: [&Eigenform; 3],
    n_grid: &[usize],
    theta: f64,
) -> Result<DecayScanReport> {
    if n_grid.len() < 4 {
        return Err(Error::GridTooSmall {
            have: n_grid.len(),
            need: 4,
            what: "decay scan".into(),
        });
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    let mut rows = Vec::with_capacity(grid.len());
    for &n_len in &grid {
        let h_len = (n_len as f64).powf(theta).ceil().max(1.0) as usize;
        let spec = ShiftedSumSpec::new(forms, n_len, h_len)?;
        let s = averaged_sum(&spec)?.abs();
        let trivial = n_len as f64 * (n_len as f64).ln().powi(3);
        rows.push((n_len, h_len, s, s / trivial));
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.2 > 0.0)
        .map(|r| ((r.0 as f64).ln(), r.2.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::GridTooSmall {
            have: pts.len(),
            need: 4,
            what: "decay scan fit (nonzero sums)".into(),
        });
    }
    Ok(DecayScanReport {
        rows,
        fitted_exponent: crate::forms::slope_of(&pts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::eigenform;
    use crate::arith::divisor_table;

    fn small_forms() -> Eigenform {
        eigenform(12, 700).unwrap()
    }

    #[test]
    fn single_shift_single_term() {
        let f = small_forms();
        let v = single_shift_sum([&f, &f, &f], 1, 1).unwrap();
        let expect = f.lambda(1) * f.lambda(2) * f.lambda(3);
        assert!((v - expect).abs() < 1e-16);
    }

    #[test]
    fn single_shift_matches_naive_loop() {
        let f = small_forms();
        let v = single_shift_sum([&f, &f, &f], 100, 1).unwrap();
        // independent re-implementation
        let mut naive = 0.0;
        for n in 1..=100usize {
            naive += f.lambda(n) * f.lambda(n + 1) * f.lambda(n + 2);
        }
        assert!((v - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn single_shift_respects_divisor_envelope() {
        let f = small_forms();
        let n_max = 200;
        let h = 3;
        let v = single_shift_sum([&f, &f, &f], n_max, h).unwrap().abs();
        let d = divisor_table(n_max + 2 * h);
        let mut envelope = 0.0;
        for n in 1..=n_max {
            envelope += (d[n] as f64) * (d[n + h] as f64) * (d[n + 2 * h] as f64);
        }
        assert!(v <= envelope);
    }

    #[test]
    fn single_shift_precision_error_names_requirement() {
        let f = small_forms();
        match single_shift_sum([&f, &f, &f], 700, 10) {
            Err(Error::PrecisionShortfall { need, .. }) => assert_eq!(need, 720),
            other => panic!("expected precision error, got {other:?}"),
        }
    }

    #[test]
    fn averaged_loop_orders_agree() {
        let f = small_forms();
        let spec = ShiftedSumSpec::new([&f, &f, &f], 150, 20).unwrap();
        let a = averaged_sum(&spec).unwrap();
        let b = averaged_sum_n_major(&spec).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn averaged_zero_window_is_zero() {
        let f = small_forms();
        let mut spec = ShiftedSumSpec::new([&f, &f, &f], 100, 10).unwrap();
        spec.v = SmoothWindow::zero();
        assert_eq!(averaged_sum(&spec).unwrap(), 0.0);
    }

    #[test]
    fn averaged_triangle_inequality() {
        let f = small_forms();
        let spec = ShiftedSumSpec::new([&f, &f, &f], 150, 20).unwrap();
        let s = averaged_sum(&spec).unwrap().abs();
        // |S| <= max|V| max|W| max_h |inner windowed sum| in absolute value
        let mut max_inner: f64 = 0.0;
        for h in 20..=40usize {
            let mut inner = 0.0;
            for n in 150..=300usize {
                inner += (f.lambda(n) * f.lambda(n + h) * f.lambda(n + 2 * h)).abs()
                    * spec.w.eval(n as f64 / 150.0);
            }
            max_inner = max_inner.max(inner);
        }
        let max_v = spec.v.eval(1.5);
        assert!(s <= max_v * max_inner * 21.0 / 20.0);
    }

    #[test]
    fn character_sum_trivial_modulus() {
        assert_eq!(character_sum(0, 0, 1, 1, 5).unwrap(), 1);
    }

    #[test]
    fn character_sum_residue_structure() {
        // (1, 1, 2, 3): argument 7 + h, modulus 6: nonzero iff h = 5 (mod 6)
        for h in 0..12 {
            let v = character_sum(1, 1, 2, 3, h).unwrap();
            if h % 6 == 5 {
                assert_eq!(v, 6);
            } else {
                assert_eq!(v, 0);
            }
        }
    }

    #[test]
    fn character_sum_exhaustive_vs_brute_force() {
        for q1 in 1..=8u32 {
            for q2 in 1..=8u32 {
                for a1 in 0..q1.max(1) as i64 {
                    if q1 > 1 && num_integer::gcd(a1, q1 as i64) != 1 {
                        continue;
                    }
                    for a2 in 0..q2.max(1) as i64 {
                        if q2 > 1 && num_integer::gcd(a2, q2 as i64) != 1 {
                            continue;
                        }
                        for h in 0..(q1 * q2) as i64 {
                            assert_eq!(
                                character_sum(a1, a2, q1, q2, h).unwrap(),
                                character_sum_brute(a1, a2, q1, q2, h).unwrap(),
                                "({a1},{a2},{q1},{q2},{h})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn character_sum_coprimality_enforced() {
        assert!(character_sum(2, 1, 4, 3, 0).is_err());
    }
}
