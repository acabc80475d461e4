//! Text formats for complex numbers, windows and pixel grids.

use num_complex::Complex64;

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` or `-i`. Exponents such as `1e-3`
/// are allowed in either part.
pub fn complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let bytes = s.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(i) => (&s[..i], &s[i..]),
        None if s.ends_with('i') => ("", s.as_str()),
        None => (s.as_str(), ""),
    };
    let real = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| format!("invalid complex number `{text}`"))
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        real(re_part)?
    };
    let im = match im_part.strip_suffix('i') {
        None if im_part.is_empty() => 0.0,
        None => return Err(format!("invalid complex number `{text}`")),
        Some("" | "+") => 1.0,
        Some("-") => -1.0,
        Some(t) => real(t)?,
    };
    let z = Complex64::new(re, im);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("complex number `{text}` is not finite"))
    }
}

/// `a+bi` with shortest round-trip digits.
pub fn show_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// `re0,re1,im0,im1`.
pub fn window(text: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("invalid window `{text}`"))?;
    parts
        .try_into()
        .map_err(|_| format!("window `{text}` needs four numbers re0,re1,im0,im1"))
}

/// `WxH`.
pub fn pixels(text: &str) -> Result<(usize, usize), String> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("pixel grid `{text}` must look like 400x300"))?;
    let dim = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid pixel grid `{text}`"))
    };
    Ok((dim(w)?, dim(h)?))
}
