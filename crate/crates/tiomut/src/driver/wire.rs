//! Line protocol primitives: decimal time stamps and the delay
//! grant/reply framing.

use num::rational::Ratio;
use num::{One, Signed, Zero};

pub const DELAY_PREFIX: &str = "@delay ";
pub const DELAYED_PREFIX: &str = "@delayed ";

const SCALE: i64 = 1_000_000;

/// Renders a non-negative time as a decimal with at most six fractional
/// digits. Values that need more precision are rounded down, so a
/// rendered delay never overstates the original.
pub fn format_time(t: Ratio<i64>) -> String {
    debug_assert!(!t.is_negative());
    let scaled = (t * Ratio::from_integer(SCALE)).floor().to_integer();
    let whole = scaled / SCALE;
    let frac = scaled % SCALE;
    if frac == 0 {
        return whole.to_string();
    }
    let digits = format!("{frac:06}");
    format!("{whole}.{}", digits.trim_end_matches('0'))
}

/// Parses a decimal time stamp with at most six fractional digits.
pub fn parse_time(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    if s.is_empty() || s.starts_with('-') || s.starts_with('+') {
        return None;
    }
    let (whole, frac) = match s.split_once('.') {
        Some((w, f)) => (w, f),
        None => (s, ""),
    };
    if frac.len() > 6 || (!frac.is_empty() && !frac.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let whole: i64 = whole.parse().ok()?;
    if frac.is_empty() {
        return Some(Ratio::from_integer(whole));
    }
    let denom = 10i64.pow(frac.len() as u32);
    let frac: i64 = frac.parse().ok()?;
    Some(Ratio::new(whole * denom + frac, denom))
}

/// The half-unit grid step used for concrete delay choices.
pub fn half() -> Ratio<i64> {
    Ratio::new(1, 2)
}

/// Smallest multiple of one half that is >= t.
pub fn ceil_to_half(t: Ratio<i64>) -> Ratio<i64> {
    (t * Ratio::from_integer(2)).ceil() / Ratio::from_integer(2)
}

pub fn one() -> Ratio<i64> {
    Ratio::one()
}

pub fn zero() -> Ratio<i64> {
    Ratio::zero()
}
