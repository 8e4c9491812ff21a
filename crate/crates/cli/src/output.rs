use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::args::Unit;
use crate::CliError;

/// `printf("%.12g", x)`.
pub fn fmt_g(x: f64) -> String {
    fmt_g_digits(x, 12)
}

pub fn fmt_g_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let digits = digits.max(1);
    // Round once in scientific form; its exponent decides the style.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Unit {
    /// Converts a value in nats.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        // Reference strings from C printf("%.12g").
        let cases = [
            (0.264_497_094_315_708_45, "0.264497094316"),
            (std::f64::consts::LN_2, "0.69314718056"),
            (1.0, "1"),
            (0.5, "0.5"),
            (8.0, "8"),
            (-1.25, "-1.25"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (123_456_789_012.0, "123456789012"),
            (1_234_567_890_123.0, "1.23456789012e+12"),
            (9.999_999_999_999_9, "10"),
            (0.0, "0"),
            (2.5e-300, "2.5e-300"),
        ];
        for (x, expect) in cases {
            assert_eq!(fmt_g(x), expect, "{x:e}");
        }
        assert_eq!(fmt_g(f64::NAN), "nan");
        assert_eq!(fmt_g_digits(std::f64::consts::PI, 6), "3.14159");
    }

    #[test]
    fn bits_divide_by_ln2() {
        assert_eq!(Unit::Nats.convert(0.3), 0.3);
        assert!((Unit::Bits.convert(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }
}
