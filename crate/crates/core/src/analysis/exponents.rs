use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Result, SmcfError};

/// Gap added above the strict regularity threshold when `d ≥ 5`.
pub const S_MARGIN: f64 = 1.0 / 16.0;

/// Regularity and Strichartz exponents for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentTable {
    pub d: usize,
    /// Regularity index actually used for norms.
    pub s_d: f64,
    /// Lower bound on `s_d`; attained when `threshold_strict` is false.
    #[serde(serialize_with = "ser_ratio")]
    pub s_threshold: Rational64,
    pub threshold_strict: bool,
    /// Strichartz spatial exponent.
    #[serde(serialize_with = "ser_ratio")]
    pub r_d: Rational64,
    /// `s_d - 2`.
    pub sigma_d: f64,
    /// Keel–Tao endpoint pair `(2, 2d/(d-2))`; `None` for `d ≤ 2`.
    #[serde(serialize_with = "ser_pair")]
    pub endpoint: Option<(Rational64, Rational64)>,
    /// False for the `d ∈ {2, 3}` simulation defaults, which carry no
    /// well-posedness guarantee.
    pub theorem_regime: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn ser_pair<S: serde::Serializer>(
    p: &Option<(Rational64, Rational64)>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some((a, b)) => s.collect_str(&format_args!("({a}, {b})")),
        None => s.serialize_none(),
    }
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Exponent table for `d ≥ 2`.
///
/// For `d ≥ 4`: `r_d = 2d(d-1)/(d-2)^2`, `s_d = 3` when `d = 4`, and for
/// `d ≥ 5` the threshold `(d+1)/2 + 1/(2(d-1))` plus [`S_MARGIN`]. For
/// `d = 2` and `d = 3` simulation defaults `(s, r) = (2, 4)` and `(3, 12)`
/// are returned with `theorem_regime = false`.
pub fn exponents(d: usize) -> Result<ExponentTable> {
    let di = d as i64;
    match d {
        0 | 1 => Err(SmcfError::Unsupported(format!(
            "exponents need d >= 2, got {d}"
        ))),
        2 => Ok(ExponentTable {
            d,
            s_d: 2.0,
            s_threshold: rat(2, 1),
            threshold_strict: false,
            r_d: rat(4, 1),
            sigma_d: 0.0,
            endpoint: None,
            theorem_regime: false,
        }),
        3 => Ok(ExponentTable {
            d,
            s_d: 3.0,
            s_threshold: rat(3, 1),
            threshold_strict: false,
            r_d: rat(12, 1),
            sigma_d: 1.0,
            endpoint: Some((rat(2, 1), rat(6, 1))),
            theorem_regime: false,
        }),
        _ => {
            let r_d = rat(2 * di * (di - 1), (di - 2) * (di - 2));
            let (s_threshold, strict) = if d == 4 {
                (rat(3, 1), false)
            } else {
                (rat(di + 1, 2) + rat(1, 2 * (di - 1)), true)
            };
            let base = *s_threshold.numer() as f64 / *s_threshold.denom() as f64;
            let s_d = if strict { base + S_MARGIN } else { base };
            Ok(ExponentTable {
                d,
                s_d,
                s_threshold,
                threshold_strict: strict,
                r_d,
                sigma_d: s_d - 2.0,
                endpoint: Some((rat(2, 1), rat(2 * di, di - 2))),
                theorem_regime: true,
            })
        }
    }
}

impl ExponentTable {
    pub fn r_d_f64(&self) -> f64 {
        *self.r_d.numer() as f64 / *self.r_d.denom() as f64
    }

    /// Checks the defining relations; `Ok(())` or a description of the
    /// first violated one.
    pub fn verify(&self) -> std::result::Result<(), String> {
        if !self.theorem_regime {
            return Ok(());
        }
        let d = self.d as i64;
        if self.r_d != rat(2 * d * (d - 1), (d - 2) * (d - 2)) {
            return Err(format!("r_d mismatch at d={d}"));
        }
        let thr = *self.s_threshold.numer() as f64 / *self.s_threshold.denom() as f64;
        let ok = if self.threshold_strict {
            self.s_d > thr
        } else {
            self.s_d >= thr
        };
        if !ok {
            return Err(format!("s_d = {} below threshold {thr}", self.s_d));
        }
        let d_over_r = self.d as f64 / self.r_d_f64();
        if self.sigma_d <= d_over_r {
            return Err(format!(
                "sigma_d = {} not above d/r_d = {d_over_r}",
                self.sigma_d
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_five_six() {
        let t4 = exponents(4).unwrap();
        assert_eq!(t4.r_d, rat(6, 1));
        assert_eq!(t4.s_d, 3.0);
        assert_eq!(t4.sigma_d, 1.0);
        let t5 = exponents(5).unwrap();
        assert_eq!(t5.r_d, rat(40, 9));
        assert_eq!(t5.s_threshold, rat(25, 8));
        assert!(t5.threshold_strict && t5.s_d > 3.125);
        assert_eq!(exponents(6).unwrap().r_d, rat(15, 4));
    }

    #[test]
    fn threshold_is_sobolev_condition() {
        // (d+1)/2 + 1/(2(d-1)) equals d/r_d + 2 exactly
        for d in 5..=12i64 {
            let t = exponents(d as usize).unwrap();
            assert_eq!(t.s_threshold, rat(d, 1) / t.r_d + rat(2, 1));
            t.verify().unwrap();
        }
    }

    #[test]
    fn low_dimensions() {
        assert!(exponents(1).is_err());
        assert!(!exponents(2).unwrap().theorem_regime);
        assert_eq!(exponents(3).unwrap().r_d, rat(12, 1));
    }
}
