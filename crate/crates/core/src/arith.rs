//! Sieved arithmetic tables and elementary multiplicative functions:
//! divisor functions d and d_k, Euler totient, Möbius, divisor power sums,
//! Ramanujan sums.

use crate::error::{Error, Result};
use num_rational::Ratio;

/// Table of d(n) = number of divisors, for 0 <= n <= x (index 0 unused).
pub fn divisor_table(x: usize) -> Vec<u32> {
    let mut d = vec![0u32; x + 1];
    for q in 1..=x {
        for m in (q..=x).step_by(q) {
            d[m] += 1;
        }
    }
    d
}

/// Table of d_k(n), the Dirichlet coefficients of zeta^k, by repeated
/// convolution of the all-ones function. `k >= 2`; d_2 equals `divisor_table`.
pub fn divisor_k_table(k: u32, x: usize) -> Result<Vec<u64>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "d_k requires k >= 2, got {k}"
        )));
    }
    let mut cur: Vec<u64> = vec![1; x + 1];
    if x > 0 {
        cur[0] = 0;
    }
    for _ in 1..k {
        let mut next = vec![0u64; x + 1];
        for q in 1..=x {
            for mult in (q..=x).step_by(q) {
                next[mult] += cur[mult / q];
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Euler totient for 1..=x.
pub fn totient_table(x: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=x as u64).collect();
    for p in 2..=x {
        if phi[p] == p as u64 {
            // p prime
            for m in (p..=x).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    phi
}

/// Möbius function for 1..=x.
pub fn mobius_table(x: usize) -> Vec<i8> {
    let mut mu = vec![1i8; x + 1];
    let mut primes = Vec::new();
    let mut is_comp = vec![false; x + 1];
    for n in 2..=x {
        if !is_comp[n] {
            primes.push(n);
            mu[n] = -1;
        }
        for &p in &primes {
            let m = n * p;
            if m > x {
                break;
            }
            is_comp[m] = true;
            if n % p == 0 {
                mu[m] = 0;
                break;
            } else {
                mu[m] = -mu[n];
            }
        }
    }
    mu
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Möbius of a single integer by trial factorisation.
pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler totient of a single integer.
pub fn totient(n: u64) -> u64 {
    let mut r = n;
    for (p, _) in factorize(n) {
        r -= r / p;
    }
    r
}

/// Ramanujan sum c_q(n) = sum over d | gcd(q, n) of d * mu(q/d).
/// For n = 0 this reduces to phi(q). Exact integer arithmetic throughout.
pub fn ramanujan_sum(q: u32, n: i64) -> i64 {
    assert!(q >= 1, "modulus must be positive");
    let q = q as u64;
    let g = if n == 0 {
        q
    } else {
        num_integer::gcd(q, n.unsigned_abs())
    };
    let mut s = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            s += d as i64 * mobius(q / d);
            let e = g / d;
            if e != d {
                s += e as i64 * mobius(q / e);
            }
        }
        d += 1;
    }
    s
}

/// sigma_{-1}(h) = sum over j | h of 1/j, as an exact rational.
pub fn sigma_minus_one(h: u64) -> Ratio<u64> {
    assert!(h >= 1);
    let mut s = Ratio::new(0, 1);
    let mut j = 1;
    while j * j <= h {
        if h % j == 0 {
            s += Ratio::new(1, j);
            let e = h / j;
            if e != j {
                s += Ratio::new(1, e);
            }
        }
        j += 1;
    }
    s
}

/// Divisor power sum sigma_m(n) as u128 (used by small-index Eisenstein tests).
pub fn sigma_pow(m: u32, n: u64) -> u128 {
    let mut s = 0u128;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += (d as u128).pow(m);
            let e = n / d;
            if e != d {
                s += (e as u128).pow(m);
            }
        }
        d += 1;
    }
    s
}

/// Primes up to x by Eratosthenes.
pub fn primes_up_to(x: usize) -> Vec<usize> {
    if x < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; x + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= x {
        if sieve[p] {
            for m in (p * p..=x).step_by(p) {
                sieve[m] = false;
            }
        }
        p += 1;
    }
    (2..=x).filter(|&n| sieve[n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ramanujan_brute(q: u32, n: i64) -> i64 {
        // direct sum over primitive residues of e(an/q)
        let mut re = 0.0f64;
        for a in 1..=q as i64 {
            if num_integer::gcd(a, q as i64) == 1 {
                re += (2.0 * PI * (a * n) as f64 / q as f64).cos();
            }
        }
        if q == 1 {
            re = 1.0;
        }
        let r = re.round();
        assert!((re - r).abs() < 1e-6, "non-integer Ramanujan sum {re}");
        r as i64
    }

    #[test]
    fn divisor_values() {
        let d = divisor_table(100);
        assert_eq!(d[6], 4);
        assert_eq!(d[1], 1);
        assert_eq!(d[97], 2);
    }

    #[test]
    fn divisor_k_values() {
        let d3 = divisor_k_table(3, 200).unwrap();
        // d_3(4): ordered triples with product 4
        assert_eq!(d3[4], 6);
        assert_eq!(d3[1], 1);
        let d2 = divisor_k_table(2, 100).unwrap();
        let d = divisor_table(100);
        for n in 1..=100 {
            assert_eq!(d2[n], d[n] as u64, "d_2 = d at {n}");
        }
        // brute-force d_3 by triple loop
        for n in 1..=60u64 {
            let mut count = 0u64;
            for a in 1..=n {
                if n % a == 0 {
                    for b in 1..=n / a {
                        if (n / a) % b == 0 {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(d3[n as usize], count, "d_3 at {n}");
        }
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan_sum(6, 0), 2); // phi(6)
        assert_eq!(ramanujan_sum(2, 1), -1);
        assert_eq!(ramanujan_sum(6, 3), -2);
        assert_eq!(ramanujan_sum(1, 7), 1);
    }

    #[test]
    fn ramanujan_matches_brute_force() {
        for q in 1..=50 {
            for n in -100..=100 {
                assert_eq!(
                    ramanujan_sum(q, n),
                    ramanujan_brute(q, n),
                    "c_{q}({n})"
                );
            }
        }
    }

    #[test]
    fn totient_and_mobius_tables() {
        let phi = totient_table(100);
        let mu = mobius_table(100);
        assert_eq!(phi[6], 2);
        assert_eq!(phi[1], 1);
        assert_eq!(mu[1], 1);
        assert_eq!(mu[6], 1);
        assert_eq!(mu[12], 0);
        assert_eq!(mu[30], -1);
        for n in 1..=100u64 {
            assert_eq!(mobius(n), mu[n as usize] as i64);
            assert_eq!(totient(n), phi[n as usize]);
        }
    }

    #[test]
    fn sigma_minus_one_values() {
        assert_eq!(sigma_minus_one(1), Ratio::new(1, 1));
        assert_eq!(sigma_minus_one(6), Ratio::new(2, 1)); // 1 + 1/2 + 1/3 + 1/6
        assert_eq!(sigma_minus_one(4), Ratio::new(7, 4));
    }
}
