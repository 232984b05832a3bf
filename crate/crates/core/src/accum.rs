use std::iter::Sum;
use std::ops::AddAssign;

use num_complex::Complex64;

/// Neumaier-compensated accumulator for real sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Componentwise compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

impl Sum<Complex64> for ComplexSum {
    fn sum<I: Iterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let mut s = CompensatedSum::new();
        s += 1e100;
        s += 1.0;
        s += -1e100;
        assert_eq!(s.value(), 1.0);

        let naive: f64 = (0..10_000).map(|_| 0.1).sum();
        let comp: CompensatedSum = (0..10_000).map(|_| 0.1).sum();
        assert!((comp.value() - 1000.0).abs() <= (naive - 1000.0).abs());
        assert!((comp.value() - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn complex_parts_are_independent() {
        let z: ComplexSum = [Complex64::new(1e16, 1.0), Complex64::new(1.0, -1.0), Complex64::new(-1e16, 0.5)]
            .into_iter()
            .sum();
        assert_eq!(z.value(), Complex64::new(1.0, 0.5));
    }
}
