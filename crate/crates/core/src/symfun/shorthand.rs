//! Compact command-line syntax for speed functions.
//!
//! | form | function |
//! |------|----------|
//! | `power-mean:r` | power mean `H_r` |
//! | `elem-sym:k` | `S_k^{1/k}` |
//! | `sym-quotient:k,l` | `(S_k/S_l)^{1/(k-l)}` |
//! | `geo-mix:w_0,...,w_{n-1}` | weighted geometric mean of `S_{j+1}/S_j` |
//! | `{...}` | full JSON descriptor |

use super::SpeedFunction;
use crate::error::{Error, Result};

fn numbers<T: std::str::FromStr>(args: &str, form: &str) -> Result<Vec<T>> {
    args.split(',')
        .map(|a| {
            a.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidSpec(format!("cannot parse '{a}' in {form}")))
        })
        .collect()
}

/// Parse a shorthand or JSON descriptor. `n` supplies the arity for forms
/// that do not carry one.
pub fn parse_speed(text: &str, n: usize) -> Result<SpeedFunction> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()));
    }
    let (head, args) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidSpec(format!("expected kind:args, got '{text}'")))?;
    match head {
        "power-mean" => {
            let r: Vec<f64> = numbers(args, head)?;
            match r[..] {
                [r] => SpeedFunction::power_mean(r, n),
                _ => Err(Error::InvalidSpec("power-mean takes one exponent".into())),
            }
        }
        "elem-sym" => match numbers::<usize>(args, head)?[..] {
            [k] => SpeedFunction::elem_sym(k, n),
            _ => Err(Error::InvalidSpec("elem-sym takes one index".into())),
        },
        "sym-quotient" => match numbers::<usize>(args, head)?[..] {
            [k, l] => SpeedFunction::sym_quotient(k, l, n),
            _ => Err(Error::InvalidSpec("sym-quotient takes two indices k,l".into())),
        },
        "geo-mix" => {
            let w: Vec<f64> = numbers(args, head)?;
            if w.len() != n {
                return Err(Error::ArityMismatch { expected: n, got: w.len() });
            }
            SpeedFunction::weighted_geo_mean(w)
        }
        other => Err(Error::InvalidSpec(format!("unknown speed kind '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::SpeedSpec;

    #[test]
    fn parses_forms() {
        assert_eq!(
            parse_speed("power-mean:-0.5", 3).unwrap().spec(),
            &SpeedSpec::PowerMean { r: -0.5, n: 3 }
        );
        assert_eq!(
            parse_speed("sym-quotient:2,1", 4).unwrap().spec(),
            &SpeedSpec::SymQuotient { k: 2, l: 1, n: 4 }
        );
        assert_eq!(parse_speed("elem-sym:3", 3).unwrap().arity(), 3);
        assert_eq!(parse_speed("geo-mix:0.5,0.25,0.25", 3).unwrap().arity(), 3);
        assert_eq!(
            parse_speed(r#"{"kind":"power_mean","r":2,"n":3}"#, 5).unwrap().arity(),
            3
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_speed("power-mean", 3).is_err());
        assert!(parse_speed("power-mean:x", 3).is_err());
        assert!(parse_speed("sym-quotient:2", 3).is_err());
        assert!(parse_speed("geo-mix:0.5,0.5", 3).is_err());
        assert!(parse_speed("cubic:1", 3).is_err());
    }
}
