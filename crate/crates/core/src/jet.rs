//! Multilinear jets in four infinitesimals with `ε_i² = 0`.
//!
//! Coefficient `c[S]` (bitmask `S` over the generators) of `f(x + Σ ε_i)` equals the
//! mixed partial `∂_S f(x)`, each variable differentiated at most once. Generators:
//! bit 0 is the temporal frequency, bits 1..=3 the spatial wavenumber axes.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Jet4 {
    pub c: [Complex64; 16],
}

impl Jet4 {
    pub fn constant(v: Complex64) -> Self {
        let mut c = [ZERO; 16];
        c[0] = v;
        Jet4 { c }
    }

    pub fn real(v: f64) -> Self {
        Jet4::constant(Complex64::new(v, 0.0))
    }

    /// Independent variable `v + ε_bit`.
    pub fn variable(v: f64, bit: usize) -> Self {
        let mut j = Jet4::real(v);
        j.c[1 << bit] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn scale(mut self, a: Complex64) -> Self {
        self.c.iter_mut().for_each(|v| *v *= a);
        self
    }

    fn nilpotent_part(&self) -> Jet4 {
        let mut n = *self;
        n.c[0] = ZERO;
        n
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == ZERO)
    }

    /// `1/self`; requires a nonzero constant part.
    pub fn recip(&self) -> Jet4 {
        let a = self.c[0];
        let inv = 1.0 / a;
        let n = self.nilpotent_part().scale(-inv);
        // 1/(a + n) = (1/a) Σ_j (-n/a)^j, terminating after four factors.
        let mut term = Jet4::constant(inv);
        let mut sum = term;
        for _ in 0..4 {
            term = term * n;
            if term.is_zero() {
                break;
            }
            sum = sum + term;
        }
        sum
    }

    /// `f(self)` for a real-analytic `f` given its derivatives at the (real) constant part.
    /// `derivs[j] = f^(j)(a)`; the nilpotent part must vanish at power `derivs.len()`.
    pub fn lift(&self, derivs: &[f64]) -> Jet4 {
        let n = self.nilpotent_part();
        let mut out = Jet4::real(derivs[0]);
        let mut power = Jet4::real(1.0);
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().skip(1) {
            power = power * n;
            fact *= j as f64;
            out = out + power.scale(Complex64::new(d / fact, 0.0));
        }
        debug_assert!((power * n).is_zero(), "jet lift truncated a nonzero power");
        out
    }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: Jet4) -> Jet4 {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(mut self, rhs: Jet4) -> Jet4 {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let mut out = [ZERO; 16];
        for (s, o) in out.iter_mut().enumerate() {
            // Sum over all splits of S into disjoint A and S \ A.
            let mut a = s;
            loop {
                *o += self.c[a] * rhs.c[s ^ a];
                if a == 0 {
                    break;
                }
                a = (a - 1) & s;
            }
        }
        Jet4 { c: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Jet4::variable(2.0, 0);
        let y = Jet4::variable(3.0, 1);
        let p = x * x * y;
        // f = x² y with single-order derivatives only.
        assert_eq!(p.c[0], Complex64::new(12.0, 0.0));
        assert_eq!(p.c[1], Complex64::new(12.0, 0.0));
        assert_eq!(p.c[2], Complex64::new(4.0, 0.0));
        assert_eq!(p.c[3], Complex64::new(4.0, 0.0));
    }

    #[test]
    fn reciprocal_matches_closed_form() {
        // D = a + Σ c_i ε_i; coefficient of S in 1/D is (-1)^|S| |S|! Π c_i / a^{|S|+1}.
        let a = Complex64::new(0.3, 1.7);
        let cs = [
            Complex64::new(0.0, 2.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(2.5, 0.0),
        ];
        let mut d = Jet4::constant(a);
        for (i, c) in cs.iter().enumerate() {
            d.c[1 << i] = *c;
        }
        let r = d.recip();
        for s in 0..16usize {
            let m = s.count_ones() as i32;
            let mut prod = Complex64::new(1.0, 0.0);
            for (i, c) in cs.iter().enumerate() {
                if s & (1 << i) != 0 {
                    prod *= c;
                }
            }
            let fact: f64 = (1..=m).map(f64::from).product();
            let expect = prod * fact * (-1f64).powi(m) / a.powi(m + 1);
            assert!((r.c[s] - expect).norm() < 1e-13 * expect.norm().max(1.0), "mask {s}");
        }
    }

    #[test]
    fn lift_exp() {
        let x = Jet4::variable(0.5, 2);
        let e = 0.5f64.exp();
        let y = x.lift(&[e, e]);
        assert!((y.c[0].re - e).abs() < 1e-15);
        assert!((y.c[4].re - e).abs() < 1e-15);
    }
}
