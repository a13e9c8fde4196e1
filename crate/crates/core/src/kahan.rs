//! Compensated (Neumaier) summation for reproducible long reductions.

use num_complex::Complex64;

/// Running compensated sum. The correction term makes the result
/// independent of how a reduction is blocked, to well below the
/// tolerances used anywhere in this crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Absorb another compensated sum, keeping both corrections.
    pub fn merge(&mut self, other: &Kahan) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut k = Kahan::new();
        for v in iter {
            k.add(v);
        }
        k.value()
    }
}

/// Componentwise compensated complex sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn merge(&mut self, other: &KahanComplex) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms() {
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..1_000_000 {
            k.add(1e-18);
        }
        let plain: f64 = 1.0 + 1e-18 * 1e6;
        assert!((k.value() - plain).abs() < 1e-15);
        assert!(k.value() > 1.0);
    }

    #[test]
    fn blocking_invariance() {
        let terms: Vec<f64> = (0..10_000)
            .map(|i| ((i * 2654435761u64 % 1000) as f64 - 499.5) * 1e-7)
            .collect();
        let whole = Kahan::sum_iter(terms.iter().copied());
        let mut blocked = Kahan::new();
        for chunk in terms.chunks(37) {
            let mut b = Kahan::new();
            for &t in chunk {
                b.add(t);
            }
            blocked.merge(&b);
        }
        assert_eq!(whole, blocked.value());
    }
}
