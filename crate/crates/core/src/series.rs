//! Power series in one grading variable `t`, truncated at a fixed degree.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// `sum_{k<=N} c_k t^k`, arithmetic modulo `t^(N+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coefficients: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn zero(degree: usize) -> Self {
        TruncatedSeries { coefficients: vec![Rational::zero(); degree + 1] }
    }

    pub fn one(degree: usize) -> Self {
        Self::monomial(degree, 0, Rational::one())
    }

    /// `c t^k`; zero if `k` exceeds the truncation degree.
    pub fn monomial(degree: usize, k: usize, c: Rational) -> Self {
        let mut s = Self::zero(degree);
        if k <= degree {
            s.coefficients[k] = c;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> &Rational {
        &self.coefficients[k]
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn add_term(&mut self, k: usize, c: &Rational) {
        if k <= self.degree() {
            self.coefficients[k] += c;
        }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.degree();
        let c0 = &self.coefficients[0];
        if c0.is_zero() {
            return Err(Error::Invalid("series with zero constant term is not invertible".into()));
        }
        let inv0 = c0.recip();
        let mut out = Self::zero(n);
        out.coefficients[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                acc += &self.coefficients[j] * &out.coefficients[k - j];
            }
            out.coefficients[k] = -acc * &inv0;
        }
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inverse()?)
    }

    /// First degree at which the two series differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<usize> {
        (0..=self.degree().min(other.degree())).find(|&k| self.coefficients[k] != other.coefficients[k])
    }

    fn check_degree(&self, other: &Self) {
        assert_eq!(self.degree(), other.degree(), "series truncated at different degrees");
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, other: &TruncatedSeries) -> TruncatedSeries {
        self.check_degree(other);
        TruncatedSeries {
            coefficients: self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, other: &TruncatedSeries) -> TruncatedSeries {
        self + &(-other)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coefficients: self.coefficients.iter().map(|c| -c).collect() }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, other: &TruncatedSeries) -> TruncatedSeries {
        self.check_degree(other);
        let n = self.degree();
        let mut out = TruncatedSeries::zero(n);
        for (i, a) in self.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coefficients[..=n - i].iter().enumerate() {
                out.coefficients[i + j] += a * b;
            }
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("{} t^{k}", format_rational(c)))
            .collect();
        if terms.is_empty() {
            write!(f, "0 + O(t^{})", self.degree() + 1)
        } else {
            write!(f, "{} + O(t^{})", terms.join(" + "), self.degree() + 1)
        }
    }
}
