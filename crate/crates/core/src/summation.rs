//! Numeric verifiers for the Poisson summation formula, holomorphic
//! Voronoi summation, and additive-twist cancellation.

use crate::bessel::bessel_j_unchecked;
use crate::error::{Error, Result};
use crate::forms::Eigenform;
use crate::kahan::{Kahan, KahanComplex};
use crate::quad::{e2pi, fourier_transform, integrate_adaptive, QuadratureConfig};
use crate::window::SmoothWindow;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Shared truncation convention: polylogarithmic stand-in for the
/// epsilon-power factors in support estimates, C * ln^3(argument).
pub fn polylog_cut(c: f64, arg: f64) -> f64 {
    let l = arg.max(2.0).ln();
    c * l * l * l
}

/// Default constant for [`polylog_cut`].
pub const TRUNCATION_C: f64 = 10.0;

/// Relative tolerance down to which measured dual tails must fall.
pub const TAIL_TOL: f64 = 1e-10;

fn modular_inverse(a: i64, q: u32) -> Result<i64> {
    let q = q as i64;
    let a = a.rem_euclid(q.max(1));
    if q == 1 {
        return Ok(0);
    }
    let (mut old_r, mut r) = (a, q);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotCoprime { a, q: q as u32 });
    }
    Ok(old_s.rem_euclid(q))
}

// ---------------------------------------------------------------------------
// Poisson
// ---------------------------------------------------------------------------

/// Both sides of the twisted Poisson identity together with the measured
/// discrepancy and dual tail.
#[derive(Debug, Clone)]
pub struct PoissonReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_discrepancy: f64,
    /// discrepancy relative to max(|lhs|, |rhs|, l1 mass of the window sum)
    pub rel_discrepancy: f64,
    /// measured dual mass beyond the cut, relative to the same scale
    pub tail: f64,
    pub dual_terms: usize,
    pub l1_scale: f64,
}

/// Verify sum_n e(an/q) W(n/X) = X sum_{m = -a mod q} W_hat(mX/q).
///
/// The left side is a finite exact sum over the window support. The dual
/// side is truncated by the polylog convention and then extended until the
/// measured block mass drops below `TAIL_TOL` of the scale.
pub fn poisson_verify(
    window: &SmoothWindow,
    x: f64,
    a: i64,
    q: u32,
    cfg: &QuadratureConfig,
) -> Result<PoissonReport> {
    if x < 10.0 {
        return Err(Error::InvalidParameter(format!("X = {x} below 10")));
    }
    if num_integer::gcd(a.rem_euclid(q as i64), q as i64) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    // LHS: support n/X in (1,2)
    let mut lhs = KahanComplex::new();
    let mut l1 = Kahan::new();
    let lo = x.floor() as i64;
    let hi = (2.0 * x).ceil() as i64;
    for n in lo..=hi {
        let w = window.eval(n as f64 / x);
        if w != 0.0 {
            lhs.add(w * e2pi((a * n.rem_euclid(q as i64)) as f64 / q as f64));
            l1.add(w.abs());
        }
    }
    let lhs = lhs.value();
    let l1_scale = l1.value().max(f64::MIN_POSITIVE);

    // RHS: m = -a (mod q), |m| <= cut, then extend until tail is measured small
    let cut = polylog_cut(TRUNCATION_C, q as f64 * x) * q as f64 / x;
    let m0 = (-a).rem_euclid(q as i64);
    let term = |m: i64| -> Result<Complex64> {
        let w_hat = fourier_transform(window, m as f64 * x / q as f64, cfg)?;
        Ok(x * w_hat.value)
    };
    let mut rhs = KahanComplex::new();
    let mut dual_terms = 0usize;
    // admissible m in [-cut, cut]
    let mut ms: Vec<i64> = Vec::new();
    let cut_i = cut.ceil() as i64;
    let mut m = m0 - ((m0 + cut_i) / q as i64) * q as i64;
    while m <= cut_i {
        ms.push(m);
        m += q as i64;
    }
    for &m in &ms {
        rhs.add(term(m)?);
        dual_terms += 1;
    }
    // measured tail: extend in blocks until the block mass is negligible
    let mut tail = Kahan::new();
    let mut lo_m = ms.first().copied().unwrap_or(m0);
    let mut hi_m = ms.last().copied().unwrap_or(m0);
    let mut block = q as i64 * 8;
    let mut guard = 0;
    loop {
        let mut mass = Kahan::new();
        let mut mm = hi_m + q as i64;
        while mm <= hi_m + block {
            mass.add(term(mm)?.norm());
            mm += q as i64;
        }
        let mut mm = lo_m - q as i64;
        while mm >= lo_m - block {
            mass.add(term(mm)?.norm());
            mm -= q as i64;
        }
        hi_m += block;
        lo_m -= block;
        tail.add(mass.value());
        if mass.value() <= TAIL_TOL * l1_scale || guard >= 6 {
            break;
        }
        block *= 2;
        guard += 1;
    }
    let rhs = rhs.value();
    let abs_d = (lhs - rhs).norm();
    let scale = lhs.norm().max(rhs.norm()).max(l1_scale);
    Ok(PoissonReport {
        lhs,
        rhs,
        abs_discrepancy: abs_d,
        rel_discrepancy: abs_d / scale,
        tail: tail.value() / scale,
        dual_terms,
        l1_scale,
    })
}

// ---------------------------------------------------------------------------
// Voronoi (holomorphic)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VoronoiReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_discrepancy: f64,
    pub tail: f64,
    pub dual_terms: usize,
}

/// Dual side of the holomorphic Voronoi identity for a weight-k level-1
/// eigenform: (2 pi i^k / q) sum_n lambda(n) e(-nbar{a}/q) X int W(u)
/// J_{k-1}(4 pi sqrt(n X u)/q) du, extended until the measured block mass
/// falls under `TAIL_TOL` of the working scale. Returns (value, absolute
/// measured tail, dual terms kept).
pub fn voronoi_rhs(
    form: &Eigenform,
    a: i64,
    q: u32,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64, usize)> {
    let a_inv = modular_inverse(a, q)?;
    let k = form.weight();
    let dual_term = |n: u64| -> Result<Complex64> {
        let osc = 4.0 * PI * (n as f64 * x).sqrt() / q as f64;
        // phase cycles of J_{k-1}(osc sqrt(u)) over [1,2]
        let cycles = osc * (2f64.sqrt() - 1.0) / (2.0 * PI);
        let integral = integrate_adaptive(
            |u| Complex64::new(crate::window::bump(u) * bessel_j_unchecked(k - 1, osc * u.sqrt()), 0.0),
            1.0,
            2.0,
            cycles.max(1.0),
            cfg,
        )?;
        let lam = form.lambda(n as usize);
        Ok(lam * x * integral.value * e2pi(-(a_inv * n as i64).rem_euclid(q as i64) as f64 / q as f64))
    };

    let init_cut = (polylog_cut(TRUNCATION_C, q as f64 * x) * q as f64 * q as f64 / x)
        .ceil()
        .max(2.0) as u64;
    let mut partial = KahanComplex::new();
    let mut l1_mass = Kahan::new();
    let mut n = 1u64;
    let mut upto = init_cut;
    let mut tail_mass;
    let mut guard = 0;
    loop {
        while n <= upto {
            if n as usize > form.prec() {
                return Err(Error::PrecisionShortfall {
                    have: form.prec(),
                    need: n as usize,
                    what: "Voronoi dual sum".into(),
                });
            }
            let t = dual_term(n)?;
            partial.add(t);
            l1_mass.add(t.norm());
            n += 1;
        }
        // measure the next block
        let block_end = upto + (upto / 2).max(8);
        let mut mass = Kahan::new();
        let mut probe = KahanComplex::new();
        while n <= block_end {
            if n as usize > form.prec() {
                return Err(Error::PrecisionShortfall {
                    have: form.prec(),
                    need: n as usize,
                    what: "Voronoi dual sum".into(),
                });
            }
            let t = dual_term(n)?;
            mass.add(t.norm());
            probe.add(t);
            n += 1;
        }
        // the working scale guards against accidental cancellation of the
        // partial value itself
        let scale = partial.value().norm().max(l1_mass.value()).max(1e-300);
        tail_mass = mass.value();
        if tail_mass <= TAIL_TOL * scale {
            break;
        }
        // absorb the measured block and keep extending
        partial.merge(&probe);
        l1_mass.add(mass.value());
        upto = block_end;
        guard += 1;
        if guard > 12 {
            return Err(Error::TailAboveTolerance {
                tail: tail_mass,
                tol: TAIL_TOL * scale,
                terms: n as usize,
            });
        }
    }
    let i_pow_k = match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let pref = 2.0 * PI * i_pow_k / q as f64;
    let value = pref * partial.value();
    Ok((value, tail_mass * pref.norm(), upto as usize))
}

/// Direct side: finite exact-coefficient sum over the dilated window.
pub fn voronoi_lhs(form: &Eigenform, a: i64, q: u32, x: f64) -> Result<Complex64> {
    let hi = (2.0 * x).ceil() as usize;
    if hi > form.prec() {
        return Err(Error::PrecisionShortfall {
            have: form.prec(),
            need: hi,
            what: "Voronoi direct sum".into(),
        });
    }
    let mut lhs = KahanComplex::new();
    for n in (x.floor() as usize)..=hi {
        let w = crate::window::bump(n as f64 / x);
        if w != 0.0 {
            lhs.add(form.lambda(n) * w * e2pi((a * (n as i64).rem_euclid(q as i64)) as f64 / q as f64));
        }
    }
    Ok(lhs.value())
}

/// Compare both sides of the Voronoi identity.
pub fn voronoi_verify(
    form: &Eigenform,
    a: i64,
    q: u32,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<VoronoiReport> {
    if num_integer::gcd(a.rem_euclid(q as i64).max(1), q as i64) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    let lhs = voronoi_lhs(form, a, q, x)?;
    let (rhs, tail, dual_terms) = voronoi_rhs(form, a, q, x, cfg)?;
    let rel = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
    Ok(VoronoiReport {
        lhs,
        rhs,
        rel_discrepancy: rel,
        tail,
        dual_terms,
    })
}

// ---------------------------------------------------------------------------
// Additive twists
// ---------------------------------------------------------------------------

/// Partial sum sum_{n<=X} lambda(n) e(alpha n), compensated.
pub fn additive_twist(form: &Eigenform, alpha: f64, x: usize) -> Result<Complex64> {
    if x > form.prec() {
        return Err(Error::PrecisionShortfall {
            have: form.prec(),
            need: x,
            what: "additive twist".into(),
        });
    }
    let mut s = KahanComplex::new();
    for n in 1..=x {
        let phase = alpha * n as f64;
        s.add(form.lambda(n) * e2pi(phase - phase.floor()));
    }
    Ok(s.value())
}

#[derive(Debug, Clone)]
pub struct TwistScanReport {
    /// per X: (X, sup over alpha of |S| / (sqrt(X) ln 2X), untwisted ratio
    /// |sum lambda| / X^{1/3 + 0.05})
    pub rows: Vec<(usize, f64, f64)>,
    pub alphas: usize,
}

/// Scan the normalised twisted sums over seeded random alpha in [0, 1) and
/// the untwisted partial sum, at each X in the grid.
pub fn twist_scan(
    form: &Eigenform,
    xgrid: &[usize],
    n_alpha: usize,
    seed: u64,
) -> Result<TwistScanReport> {
    use rand::SeedableRng;
    if xgrid.is_empty() {
        return Err(Error::GridTooSmall {
            have: 0,
            need: 1,
            what: "twist scan".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas: Vec<f64> = (0..n_alpha).map(|_| rng.gen::<f64>()).collect();
    let max_x = *xgrid.iter().max().unwrap();
    if max_x > form.prec() {
        return Err(Error::PrecisionShortfall {
            have: form.prec(),
            need: max_x,
            what: "twist scan".into(),
        });
    }
    let mut grid = xgrid.to_vec();
    grid.sort_unstable();

    // running sums per alpha plus the untwisted one, single pass over n
    let mut sums: Vec<KahanComplex> = vec![KahanComplex::new(); alphas.len()];
    let mut plain = Kahan::new();
    let mut rows = Vec::with_capacity(grid.len());
    let mut next = 0usize;
    for n in 1..=max_x {
        let lam = form.lambda(n);
        for (s, &alpha) in sums.iter_mut().zip(&alphas) {
            let phase = alpha * n as f64;
            s.add(lam * e2pi(phase - phase.floor()));
        }
        plain.add(lam);
        while next < grid.len() && grid[next] == n {
            let xf = n as f64;
            let norm = xf.sqrt() * (2.0 * xf).ln();
            let sup = sums
                .iter()
                .map(|s| s.value().norm() / norm)
                .fold(0.0f64, f64::max);
            let plain_ratio = plain.value().abs() / xf.powf(1.0 / 3.0 + 0.05);
            rows.push((n, sup, plain_ratio));
            next += 1;
        }
    }
    Ok(TwistScanReport {
        rows,
        alphas: alphas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::eigenform;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn modular_inverse_basics() {
        assert_eq!(modular_inverse(1, 1).unwrap(), 0);
        assert_eq!(modular_inverse(3, 7).unwrap(), 5);
        assert!(modular_inverse(2, 4).is_err());
    }

    #[test]
    fn poisson_classical_q1() {
        let w = SmoothWindow::bump();
        let rep = poisson_verify(&w, 50.0, 0, 1, &cfg()).unwrap();
        assert!(
            rep.rel_discrepancy < 1e-8,
            "classical Poisson at X=50: {:?}",
            rep
        );
        assert!(rep.tail < 1e-10);
    }

    #[test]
    fn poisson_twisted_example() {
        let w = SmoothWindow::bump();
        let rep = poisson_verify(&w, 200.0, 1, 3, &cfg()).unwrap();
        assert!(rep.rel_discrepancy < 1e-8, "{rep:?}");
        assert!(rep.tail < 1e-10);
    }

    #[test]
    fn poisson_rejects_non_coprime() {
        let w = SmoothWindow::bump();
        assert!(matches!(
            poisson_verify(&w, 100.0, 2, 4, &cfg()),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn voronoi_weight12_small() {
        let f = eigenform(12, 300).unwrap();
        let rep = voronoi_verify(&f, 1, 1, 100.0, &cfg()).unwrap();
        assert!(rep.rel_discrepancy < 1e-4, "{rep:?}");
    }

    #[test]
    fn voronoi_periodicity_and_conjugation() {
        let f = eigenform(12, 1100).unwrap();
        let l1 = voronoi_lhs(&f, 1, 5, 500.0).unwrap();
        let l2 = voronoi_lhs(&f, 6, 5, 500.0).unwrap();
        assert!((l1 - l2).norm() < 1e-12);
        let l3 = voronoi_lhs(&f, -1, 5, 500.0).unwrap();
        assert!((l1.conj() - l3).norm() < 1e-12);
    }

    #[test]
    fn twist_single_term() {
        let f = eigenform(12, 10).unwrap();
        let alpha = 0.37;
        let s = additive_twist(&f, alpha, 1).unwrap();
        assert!((s - e2pi(alpha)).norm() < 1e-15);
    }

    #[test]
    fn twist_scan_reports() {
        let f = eigenform(12, 2000).unwrap();
        let rep = twist_scan(&f, &[500, 2000], 20, 42).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows.iter().all(|r| r.1.is_finite() && r.2.is_finite()));
        // determinism under the seed
        let rep2 = twist_scan(&f, &[500, 2000], 20, 42).unwrap();
        assert_eq!(rep.rows, rep2.rows);
    }
}
