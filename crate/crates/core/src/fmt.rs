//! Deterministic number formatting shared by the CLI and the CSV emitters.
//!
//! Every float is printed with 12 significant digits so that output from two
//! implementations (or two runs) can be compared byte for byte.

/// Formats `x` with 12 significant digits, `%g`-style: plain decimal notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.11e}", x); // 12 significant digits
    let epos = sci.find('e').expect("scientific format");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent");
    let neg = sci.starts_with('-');
    let digits: String = sci[..epos].chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 12);

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-4..12).contains(&exp) {
        if exp >= 0 {
            let ip = exp as usize + 1;
            if ip >= digits.len() {
                out.push_str(&digits);
                out.extend(std::iter::repeat_n('0', ip - digits.len()));
            } else {
                out.push_str(&digits[..ip]);
                let frac = trim_zeros(&digits[ip..]);
                if !frac.is_empty() {
                    out.push('.');
                    out.push_str(frac);
                }
            }
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(trim_zeros(&digits));
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = trim_zeros(&digits[1..]);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

fn trim_zeros(s: &str) -> &str {
    s.trim_end_matches('0')
}
