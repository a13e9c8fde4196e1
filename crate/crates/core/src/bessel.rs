//! Integer-order Bessel functions of the first kind for orders up to 30.
//!
//! Strategy: the ascending power series (accumulated in double-double
//! arithmetic to absorb alternating cancellation) covers x <= max(SWITCH, n);
//! beyond that the standard large-argument asymptotic expansion supplies
//! J_0 and J_1, and higher orders follow by the forward recurrence
//! J_{n+1} = (2n/x) J_n - J_{n-1}, which is stable for x > n.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const MAX_ORDER: u32 = 30;

/// Series/asymptotic crossover for the base orders.
pub const SWITCH_POINT: f64 = 18.0;

// ---------------------------------------------------------------------------
// minimal double-double arithmetic (Dekker/Knuth)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Dd { hi: p, lo: err }
    }

    fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let r = Dd::two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn mul(self, other: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let r = Dd::two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::two_prod(-q1, d));
        let q2 = (r.hi + r.lo) / d;
        let s = Dd::two_sum(q1, q2);
        Dd { hi: s.hi, lo: s.lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

// ---------------------------------------------------------------------------

/// Ascending series sum_m (-1)^m (x/2)^{n+2m} / (m! (n+m)!), double-double
/// accumulated. Valid for any x, accurate while the cancellation stays
/// within the extended precision (x up to ~40 for small orders).
fn series_dd(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = x / 2.0;
    // leading term (x/2)^n / n!
    let mut term = Dd::from(1.0);
    for i in 1..=n {
        term = term.mul(Dd::from(half)).div_f64(i as f64);
    }
    let q = Dd::two_prod(half, half);
    let mut sum = term;
    let mut m = 1u32;
    loop {
        // term *= -q / (m (n+m))
        term = term.mul(q).div_f64(-(m as f64)).div_f64((n + m) as f64);
        sum = sum.add(term);
        if term.value().abs() < 1e-40 * (1.0 + sum.value().abs()) || m > 400 {
            break;
        }
        m += 1;
    }
    sum.value()
}

/// Large-argument asymptotic expansion for orders 0 and 1, truncated at the
/// smallest term. For x >= SWITCH_POINT the truncation error is far below
/// f64 resolution.
fn asymptotic_base(n: u32, x: f64) -> f64 {
    debug_assert!(n <= 1);
    let mu = 4.0 * (n * n) as f64;
    // P ~ sum (-1)^k a_{2k}/x^{2k},  Q ~ sum (-1)^k a_{2k+1}/x^{2k+1}
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_0
    let mut k = 0u32;
    let mut last = f64::INFINITY;
    loop {
        let scaled = a / x.powi(k as i32);
        if scaled.abs() >= last {
            break; // divergence point reached
        }
        last = scaled.abs();
        match k % 4 {
            0 => p += scaled,
            1 => q += scaled,
            2 => p -= scaled,
            _ => q -= scaled,
        }
        k += 1;
        let j = (2 * k - 1) as f64;
        a *= (mu - j * j) / (k as f64 * 8.0);
        if k > 60 {
            break;
        }
    }
    let chi = x - (n as f64 / 2.0 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_n(x) for 0 <= n <= MAX_ORDER, x >= 0.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "Bessel order {n} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    if x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Bessel argument {x} must be non-negative"
        )));
    }
    Ok(bessel_j_unchecked(n, x))
}

pub(crate) fn bessel_j_unchecked(n: u32, x: f64) -> f64 {
    if x <= SWITCH_POINT.max(n as f64) {
        series_dd(n, x)
    } else if n <= 1 {
        asymptotic_base(n, x)
    } else {
        // forward recurrence from the asymptotic base orders, stable since
        // x > n along the whole climb
        let mut jm = asymptotic_base(0, x);
        let mut j0 = asymptotic_base(1, x);
        for k in 1..n {
            let next = (2.0 * k as f64 / x) * j0 - jm;
            jm = j0;
            j0 = next;
        }
        j0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // frozen 20-digit references from an independent arbitrary-precision
    // evaluation
    const REFS: [(u32, f64, f64); 18] = [
        (0, 2.0, 0.22389077914123566805),
        (1, 1.0, 0.44005058574493351596),
        (2, 5.0, 0.046565116277752215532),
        (11, 1.0, 1.1980067463031370965e-11),
        (11, 20.0, 0.061356303375950925553),
        (0, 18.0, -0.013355805721984110885),
        (1, 18.0, -0.18799488548806959401),
        (5, 18.0, -0.15537009877904934332),
        (2, 18.0, -0.0075325148878013995603),
        (30, 29.0, 0.10304804665860467132),
        (30, 100.0, 0.081460129581172222968),
        (7, 123.45, 0.02396626524608664888),
        (29, 500.0, -0.018433161876733803633),
        (0, 0.5, 0.93846980724081290423),
        (3, 0.1, 0.000020820315754756261429),
        (15, 15.0, 0.18130634149321354231),
        (20, 12.0, 0.00025121327024539953203),
        (9, 300.0, -0.036032302036864213714),
    ];

    #[test]
    fn reference_values() {
        for &(n, x, want) in &REFS {
            let got = bessel_j(n, x).unwrap();
            let err = (got - want).abs() / want.abs().max(1e-300);
            assert!(err < 5e-13, "J_{n}({x}) = {got}, want {want}, rel {err:.2e}");
        }
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(11, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn order11_matches_plain_series_oracle() {
        // independent oracle: direct f64 term summation (no shared code)
        let x: f64 = 1.0;
        let mut term = 1.0f64;
        for i in 1..=11 {
            term *= (x / 2.0) / i as f64;
        }
        let mut oracle = term;
        for m in 1..40 {
            term *= -(x * x / 4.0) / (m as f64 * (11 + m) as f64);
            oracle += term;
        }
        let got = bessel_j(11, 1.0).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1e-300));
    }

    #[test]
    fn branch_continuity_at_switch() {
        // series and asymptotic sides agree at the crossover to 1e-12
        for n in 0..=1u32 {
            let s = series_dd(n, SWITCH_POINT);
            let a = asymptotic_base(n, SWITCH_POINT);
            assert!(
                (s - a).abs() / s.abs().max(1e-30) < 1e-12,
                "order {n}: series {s} vs asymptotic {a}"
            );
        }
        // and the series against the recurrence route at the same point
        for n in 2..=8u32 {
            let series = series_dd(n, SWITCH_POINT);
            let mut jm = asymptotic_base(0, SWITCH_POINT);
            let mut j0 = asymptotic_base(1, SWITCH_POINT);
            for k in 1..n {
                let next = (2.0 * k as f64 / SWITCH_POINT) * j0 - jm;
                jm = j0;
                j0 = next;
            }
            assert!(
                (series - j0).abs() / series.abs().max(1e-30) < 1e-12,
                "order {n} branch mismatch at switch: {series} vs {j0}"
            );
        }
    }

    #[test]
    fn three_term_recurrence_holds() {
        for &x in &[0.5, 1.0, 5.0, 10.0, 17.9, 18.1, 25.0, 50.0, 120.0, 500.0] {
            for nu in 1..=29u32 {
                let lo = bessel_j(nu - 1, x).unwrap();
                let hi = bessel_j(nu + 1, x).unwrap();
                let mid = bessel_j(nu, x).unwrap();
                let resid = lo + hi - (2.0 * nu as f64 / x) * mid;
                let scale = lo.abs().max(hi.abs()).max(mid.abs()).max(1e-10);
                assert!(
                    (resid / scale).abs() < 1e-10,
                    "recurrence fails at nu={nu}, x={x}: {resid:e}"
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(31, 1.0).is_err());
        assert!(bessel_j(0, -1.0).is_err());
    }
}
