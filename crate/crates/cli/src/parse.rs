//! Parsing of comma-separated complex coefficient lists.
//!
//! Accepted item forms: `1`, `-0.5`, `i`, `-i`, `2i`, `1+2i`, `0.5-0.5i`.

use gbound_core::Error;
use num_complex::Complex64 as C64;

pub fn complex_list(s: &str) -> Result<Vec<C64>, Error> {
    s.split(',')
        .map(|item| complex_scalar(item.trim()))
        .collect()
}

pub fn complex_scalar(s: &str) -> Result<C64, Error> {
    let err = || Error::InvalidInput(format!("cannot parse complex number '{s}'"));
    if s.is_empty() {
        return Err(err());
    }
    if let Some(im_part) = s.strip_suffix(['i', 'j']) {
        // split a trailing imaginary term off an optional real part:
        // scan for a sign that is not an exponent sign and not leading
        let bytes = im_part.as_bytes();
        let mut split = None;
        for pos in (1..bytes.len()).rev() {
            let c = bytes[pos] as char;
            if (c == '+' || c == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
                split = Some(pos);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(pos) => (&im_part[..pos], &im_part[pos..]),
            None => ("0", im_part),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| err())?,
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str.parse::<f64>().map_err(|_| err())?
        };
        Ok(C64::new(re, im))
    } else {
        Ok(C64::new(s.parse::<f64>().map_err(|_| err())?, 0.0))
    }
}
