//! Number formatting shared by every subcommand.

use heraldsim::Complex64;

/// `x` with `digits` significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise, trailing zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = digits as i32 - 1 - exp;
        if decimals < 0 {
            let unit = 10f64.powi(-decimals);
            return format!("{:.0}", (x / unit).round() * unit);
        }
        // rounding can carry into a new digit (9.99… → 10.0), which only adds a zero
        trim(&format!("{x:.*}", decimals as usize))
    } else {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim(mantissa), e)
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `re±im i`, each part with `digits` significant digits.
pub fn complex(z: Complex64, digits: usize) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", sig(z.re, digits), sign, sig(z.im.abs(), digits))
}
