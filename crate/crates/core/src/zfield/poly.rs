//! Sparse polynomials in three variables with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// Exponent triple `(a, b, c)` standing for `x1^a x2^b x3^c`.
pub type Exponents = (u32, u32, u32);

/// Sparse trivariate polynomial over the rationals.
///
/// Terms are kept in a `BTreeMap` keyed by exponent triple, never storing a
/// zero coefficient, so equality is structural and iteration order is
/// canonical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly3 {
    terms: BTreeMap<Exponents, BigRational>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly3::zero();
        p.add_term((0, 0, 0), c);
        p
    }

    pub fn constant_i64(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// The variable `x_axis` with `axis` in `1..=3`.
    pub fn var(axis: usize) -> Self {
        let mut p = Poly3::zero();
        p.add_term(exponents_for_axis(axis), BigRational::one());
        p
    }

    /// `x1^2 + x2^2 + x3^2`.
    pub fn r_squared() -> Self {
        let mut p = Poly3::zero();
        for axis in 1..=3 {
            let mut e = (0, 0, 0);
            match axis {
                1 => e.0 = 2,
                2 => e.1 = 2,
                _ => e.2 = 2,
            }
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponents, BigRational)>) -> Self {
        let mut p = Poly3::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b, c)| a + b + c).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Partial derivative with respect to `x_axis`.
    pub fn diff(&self, axis: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(a, b, c), coeff) in &self.terms {
            let (e, factor) = match axis {
                1 if a > 0 => ((a - 1, b, c), a),
                2 if b > 0 => ((a, b - 1, c), b),
                3 if c > 0 => ((a, b, c - 1), c),
                _ => continue,
            };
            out.add_term(e, coeff * BigRational::from_integer(BigInt::from(factor)));
        }
        out
    }

    /// Multiplication by the variable `x_axis`.
    pub fn mul_var(&self, axis: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(a, b, c), coeff) in &self.terms {
            let e = match axis {
                1 => (a + 1, b, c),
                2 => (a, b + 1, c),
                _ => (a, b, c + 1),
            };
            out.add_term(e, coeff.clone());
        }
        out
    }

    /// Evaluate in floating point.
    pub fn eval_f64(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (&(a, b, c), coeff) in &self.terms {
            let monomial = x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32);
            acc += coeff.to_f64().expect("rational representable") * monomial;
        }
        acc
    }

    /// Random sparse polynomial of total degree at most `max_degree`, with
    /// small rational coefficients. Never returns the zero polynomial.
    pub fn random(rng: &mut impl Rng, max_degree: u32, max_terms: usize) -> Poly3 {
        loop {
            let mut p = Poly3::zero();
            let n_terms = rng.gen_range(1..=max_terms.max(1));
            for _ in 0..n_terms {
                let a = rng.gen_range(0..=max_degree);
                let b = rng.gen_range(0..=max_degree - a);
                let c = rng.gen_range(0..=max_degree - a - b);
                let mut num = 0i64;
                while num == 0 {
                    num = rng.gen_range(-9..=9);
                }
                let den = rng.gen_range(1..=4i64);
                p.add_term(
                    (a, b, c),
                    BigRational::new(BigInt::from(num), BigInt::from(den)),
                );
            }
            if !p.is_zero() {
                return p;
            }
        }
    }
}

fn exponents_for_axis(axis: usize) -> Exponents {
    match axis {
        1 => (1, 0, 0),
        2 => (0, 1, 0),
        3 => (0, 0, 1),
        _ => panic!("axis must be 1, 2, or 3, got {axis}"),
    }
}

impl Add for &Poly3 {
    type Output = Poly3;
    fn add(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl Mul for &Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(a1, b1, c1), k1) in &self.terms {
            for (&(a2, b2, c2), k2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2, c1 + c2), k1 * k2);
            }
        }
        out
    }
}

impl Neg for &Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        let mut out = Poly3::zero();
        for (&e, c) in &self.terms {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b, c), coeff) in &self.terms {
            let sign = if coeff.is_negative() { "-" } else { "+" };
            let mag = coeff.abs();
            if first {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let is_const = a == 0 && b == 0 && c == 0;
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, " ")?;
                }
            }
            for (exp, name) in [(a, "x1"), (b, "x2"), (c, "x3")] {
                match exp {
                    0 => {}
                    1 => write!(f, "{name}")?,
                    _ => write!(f, "{name}^{exp}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arithmetic_keeps_canonical_form() {
        let x = Poly3::var(1);
        let y = Poly3::var(2);
        let p = &(&x * &x) - &(&y * &y);
        let q = &(&x - &y) * &(&x + &y);
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
        assert_eq!(p.degree(), 2);
        // Cancellation removes the stored term entirely.
        let z = &p - &p;
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn derivative_and_mul_var() {
        let x = Poly3::var(1);
        let p = &(&x * &x) * &x; // x1^3
        assert_eq!(p.diff(1), {
            let mut q = Poly3::zero();
            q.add_term((2, 0, 0), BigRational::from_integer(BigInt::from(3)));
            q
        });
        assert!(p.diff(2).is_zero());
        assert_eq!(p.mul_var(2).degree(), 4);
    }

    #[test]
    fn display_is_readable() {
        let p = Poly3::from_terms([
            ((2, 0, 0), BigRational::new(BigInt::from(3), BigInt::from(2))),
            ((0, 1, 0), BigRational::from_integer(BigInt::from(-1))),
        ]);
        assert_eq!(p.to_string(), "-x2 + 3/2 x1^2");
    }

    #[test]
    fn eval_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = Poly3::random(&mut rng, 4, 6);
            let q = Poly3::random(&mut rng, 4, 6);
            let x = [0.3, -1.2, 0.7];
            let sum = (&p + &q).eval_f64(x);
            assert!((sum - (p.eval_f64(x) + q.eval_f64(x))).abs() < 1e-9);
        }
    }
}
