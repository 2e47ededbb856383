use std::fmt;
use std::ops::{Div, Mul, Neg};

/// Determinant carried as sign and binary mantissa/exponent so that products
/// of many diagonal entries neither overflow nor underflow.
///
/// The magnitude is `mantissa * 2^exponent` with `mantissa` in `[0.5, 1)`.
/// Multiplying two values multiplies mantissas (one rounding, as in plain
/// floating point) and adds exponents.
#[derive(Clone, Copy, PartialEq)]
pub struct DetValue {
    sign: i8,
    mantissa: f64,
    exponent: i64,
}

/// `x = m * 2^e` with `|m|` in `[0.5, 1)`; zero and non-finite pass through.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal: renormalise first
        let (m, e) = frexp(x * f64::powi(2.0, 64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff_u64 << 52)) | (1022_u64 << 52));
    (m, biased - 1022)
}

/// `m * 2^e`, split in two steps so that only the final product rounds.
fn ldexp(m: f64, e: i64) -> f64 {
    let e = e.clamp(-2200, 2200) as i32;
    let half = e / 2;
    m * f64::powi(2.0, half) * f64::powi(2.0, e - half)
}

impl DetValue {
    pub const ZERO: DetValue = DetValue {
        sign: 0,
        mantissa: 0.0,
        exponent: 0,
    };

    pub const ONE: DetValue = DetValue {
        sign: 1,
        mantissa: 0.5,
        exponent: 1,
    };

    pub fn from_f64(x: f64) -> DetValue {
        assert!(x.is_finite(), "determinant value must be finite");
        if x == 0.0 {
            return DetValue::ZERO;
        }
        let (m, e) = frexp(x.abs());
        DetValue {
            sign: if x < 0.0 { -1 } else { 1 },
            mantissa: m,
            exponent: e,
        }
    }

    /// Builds a value from its sign and natural-log magnitude.
    pub fn from_sign_log(sign: i8, log_magnitude: f64) -> DetValue {
        if sign == 0 {
            return DetValue::ZERO;
        }
        let log2 = log_magnitude / std::f64::consts::LN_2;
        let e = log2.floor();
        let (m, extra) = frexp(f64::exp2(log2 - e));
        DetValue {
            sign: sign.signum(),
            mantissa: m,
            exponent: e as i64 + extra,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `ln |det|`; negative infinity for a zero determinant.
    pub fn log_magnitude(&self) -> f64 {
        if self.sign == 0 {
            return f64::NEG_INFINITY;
        }
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    /// Plain value, or `None` when it is outside the `f64` range.
    pub fn to_f64(&self) -> Option<f64> {
        if self.sign == 0 {
            return Some(0.0);
        }
        if self.exponent > 1024 {
            return None;
        }
        let v = ldexp(self.mantissa, self.exponent);
        v.is_finite().then_some(f64::from(self.sign) * v)
    }

    /// Compares sign exactly and log-magnitudes with tolerance
    /// `rel * max(1, |ln a|, |ln b|)`.
    pub fn approx_eq(&self, other: &DetValue, rel: f64) -> bool {
        if self.sign != other.sign {
            return false;
        }
        if self.sign == 0 {
            return true;
        }
        let (a, b) = (self.log_magnitude(), other.log_magnitude());
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    fn normalized(sign: i8, mantissa: f64, exponent: i64) -> DetValue {
        if sign == 0 || mantissa == 0.0 {
            return DetValue::ZERO;
        }
        let (m, e) = frexp(mantissa);
        DetValue {
            sign,
            mantissa: m,
            exponent: exponent + e,
        }
    }
}

impl Mul for DetValue {
    type Output = DetValue;

    fn mul(self, rhs: DetValue) -> DetValue {
        DetValue::normalized(
            self.sign * rhs.sign,
            self.mantissa * rhs.mantissa,
            self.exponent + rhs.exponent,
        )
    }
}

impl Mul<f64> for DetValue {
    type Output = DetValue;

    fn mul(self, rhs: f64) -> DetValue {
        self * DetValue::from_f64(rhs)
    }
}

impl Div for DetValue {
    type Output = DetValue;

    /// Panics on division by a zero determinant.
    fn div(self, rhs: DetValue) -> DetValue {
        assert!(rhs.sign != 0, "division by zero determinant");
        DetValue::normalized(
            self.sign * rhs.sign,
            self.mantissa / rhs.mantissa,
            self.exponent - rhs.exponent,
        )
    }
}

impl Div<f64> for DetValue {
    type Output = DetValue;

    fn div(self, rhs: f64) -> DetValue {
        self / DetValue::from_f64(rhs)
    }
}

impl Neg for DetValue {
    type Output = DetValue;

    fn neg(self) -> DetValue {
        DetValue {
            sign: -self.sign,
            ..self
        }
    }
}

impl fmt::Debug for DetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DetValue {{ sign: {}, log_magnitude: {} }}",
            self.sign,
            self.log_magnitude()
        )
    }
}

impl fmt::Display for DetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_f64() {
            Some(v) => write!(f, "{v:e}"),
            None => write!(
                f,
                "{}exp({})",
                if self.sign < 0 { "-" } else { "" },
                self.log_magnitude()
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_values() {
        let d = DetValue::from_f64(-2.0);
        assert_eq!(d.sign(), -1);
        assert!((d.log_magnitude() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(DetValue::ONE.to_f64(), Some(1.0));
        assert_eq!(DetValue::ZERO.log_magnitude(), f64::NEG_INFINITY);
        assert_eq!(DetValue::from_f64(0.0).sign(), 0);
    }

    #[test]
    fn huge_products_stay_representable() {
        let mut acc = DetValue::ONE;
        for _ in 0..400 {
            acc = acc * 1e10;
        }
        assert_eq!(acc.to_f64(), None);
        assert!((acc.log_magnitude() - 4000.0 * 10f64.ln()).abs() < 1e-9);
        for _ in 0..400 {
            acc = acc / 1e10;
        }
        assert!((acc.to_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subnormals_roundtrip() {
        let tiny = 3.0e-320;
        assert_eq!(DetValue::from_f64(tiny).to_f64(), Some(tiny));
        assert_eq!(DetValue::from_f64(-f64::MAX).to_f64(), Some(-f64::MAX));
    }

    #[test]
    fn sign_log_constructor() {
        let d = DetValue::from_sign_log(-1, 3.5);
        assert_eq!(d.sign(), -1);
        assert!((d.log_magnitude() - 3.5).abs() < 1e-14);
        assert!(DetValue::from_sign_log(1, 0.0).approx_eq(&DetValue::ONE, 1e-15));
    }

    proptest! {
        #[test]
        fn roundtrip_is_exact(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL) {
            prop_assert_eq!(DetValue::from_f64(x).to_f64(), Some(x));
        }

        #[test]
        fn multiplication_adds_logs(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            prop_assume!(a != 0.0 && b != 0.0);
            let p = DetValue::from_f64(a) * DetValue::from_f64(b);
            prop_assert_eq!(p.sign(), (a * b).signum() as i8);
            let expect = a.abs().ln() + b.abs().ln();
            prop_assert!((p.log_magnitude() - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            prop_assert_eq!(p.to_f64(), Some(a * b));
        }
    }
}
