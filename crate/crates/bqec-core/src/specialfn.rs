//! Exact-finite-sum special functions and unit conversions.
//!
//! Every hypergeometric function appearing in the closed forms of this crate is
//! a terminating Gauss series: at least one upper parameter is a non-positive
//! integer (possibly after the parity split in `m`), so the sum is a polynomial
//! and can be evaluated exactly term by term. No transformation formulas, no
//! convergence heuristics.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialFnError {
    /// Neither upper parameter is a non-positive integer.
    #[error("series does not terminate: neither upper parameter is a non-positive integer")]
    NonTerminatingSeries,
    /// The lower parameter hits a non-positive integer before the series
    /// terminates, so a Pochhammer factor in the denominator vanishes.
    #[error("lower parameter produces a pole before termination (c = {c}, termination order {order})")]
    PoleInLowerParameter { c: Rational, order: u32 },
}

/// Exact rational parameter, kept as a (numerator, denominator) pair so that
/// termination detection is integer arithmetic rather than a floating-point test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    /// num/2. Halves are the only non-integer parameters the state formulas need.
    pub fn half(num: i64) -> Self {
        Rational::new(num, 2)
    }

    pub fn integer(num: i64) -> Self {
        Rational { num, den: 1 }
    }

    /// If this is a non-positive integer `-n`, returns `n`.
    pub fn as_nonpositive_integer(&self) -> Option<u32> {
        if self.den == 1 && self.num <= 0 {
            Some((-self.num) as u32)
        } else {
            None
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl From<i64> for Rational {
    fn from(num: i64) -> Self {
        Rational::integer(num)
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if a == 0 {
        return b.max(1);
    }
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Terminating Gauss hypergeometric sum 2F1(a, b; c; x).
///
/// Requires `a` or `b` to be a non-positive integer; the value is then the exact
/// finite sum over `j = 0..=J` of `(a)_j (b)_j / ((c)_j j!) x^j`, with `J` the
/// smallest termination order among the terminating upper parameters.
pub fn hyp2f1_terminating(
    a: Rational,
    b: Rational,
    c: Rational,
    x: Complex64,
) -> Result<Complex64, SpecialFnError> {
    let order = match (a.as_nonpositive_integer(), b.as_nonpositive_integer()) {
        (Some(na), Some(nb)) => na.min(nb),
        (Some(na), None) => na,
        (None, Some(nb)) => nb,
        (None, None) => return Err(SpecialFnError::NonTerminatingSeries),
    };
    // (c)_j vanishes at j = -c + 1 <= J, i.e. when c is a non-positive integer
    // smaller in magnitude than the termination order.
    if let Some(nc) = c.as_nonpositive_integer() {
        if nc < order {
            return Err(SpecialFnError::PoleInLowerParameter { c, order });
        }
    }
    let (af, bf, cf) = (a.as_f64(), b.as_f64(), c.as_f64());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 0..=order {
        sum += term;
        if j < order {
            let jf = j as f64;
            term *= x * ((af + jf) * (bf + jf)) / ((cf + jf) * (jf + 1.0));
        }
    }
    Ok(sum)
}

/// Real-argument convenience wrapper around [`hyp2f1_terminating`].
pub fn hyp2f1_terminating_real(
    a: Rational,
    b: Rational,
    c: Rational,
    x: f64,
) -> Result<f64, SpecialFnError> {
    hyp2f1_terminating(a, b, c, Complex64::new(x, 0.0)).map(|v| v.re)
}

/// Physicists' Hermite polynomial H_k(w) by the three-term recurrence
/// H_{k+1} = 2 w H_k - 2 k H_{k-1}.
pub fn hermite_poly(k: u32, w: Complex64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut h_prev = Complex64::new(1.0, 0.0);
    let mut h = 2.0 * w;
    for i in 1..k {
        let next = 2.0 * w * h - 2.0 * (i as f64) * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Squeezing in dB measured on the quadrature standard deviation: r = dB ln(10)/20.
pub fn squeezing_db_to_r(s_db: f64) -> f64 {
    s_db * std::f64::consts::LN_10 / 20.0
}

/// Inverse of [`squeezing_db_to_r`].
pub fn r_to_squeezing_db(r: f64) -> f64 {
    20.0 * r / std::f64::consts::LN_10
}

/// ln(n!) via Stirling's series for large n, exact accumulation for small n.
/// Used to keep closed-form amplitude prefactors in log space.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n < 64 {
        let mut acc = 0.0;
        for i in 2..=n {
            acc += (i as f64).ln();
        }
        return acc;
    }
    let x = (n + 1) as f64;
    // Stirling series for ln Gamma(x)
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}
