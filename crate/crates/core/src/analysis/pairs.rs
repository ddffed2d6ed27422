use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::SmcfError;

/// A Lebesgue exponent in `[1, ∞]`, held exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    pub fn int(n: i64) -> Self {
        Exponent::Finite(Rational64::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Exponent::Finite(Rational64::new(n, d))
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> Rational64 {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinite => Rational64::from_integer(0),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Exponent {
    type Err = SmcfError;

    /// Accepts `inf`, integers and `a/b`.
    fn from_str(s: &str) -> Result<Self, SmcfError> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinite);
        }
        let bad = || SmcfError::InvalidConfig(format!("not an exponent: {s:?}"));
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim().parse::<i64>(), d.trim().parse::<i64>()),
            None => (t.parse::<i64>(), Ok(1)),
        };
        let (n, d) = (n.map_err(|_| bad())?, d.map_err(|_| bad())?);
        if d <= 0 || n < d {
            return Err(bad());
        }
        Ok(Exponent::ratio(n, d))
    }
}

/// Which case of the inhomogeneous estimate a pair of pairs falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InhomogeneousCase {
    None,
    NonSharp,
    Sharp,
    Endpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub admissible: bool,
    pub admissible_tilde: bool,
    pub acceptable: bool,
    pub acceptable_tilde: bool,
    pub scaling: bool,
    pub inhomogeneous_case: InhomogeneousCase,
}

/// Keel–Tao admissibility: `2/q + d/r = d/2`, `2 ≤ q, r ≤ ∞`,
/// `(q, r, d) ≠ (2, ∞, 2)`.
pub fn admissible(q: Exponent, r: Exponent, d: usize) -> bool {
    let (iq, ir) = (q.recip(), r.recip());
    let half = Rational64::new(1, 2);
    let dd = Rational64::from_integer(d as i64);
    iq <= half
        && ir <= half
        && iq * 2 + dd * ir == dd * half
        && !(iq == half && r.is_infinite() && d == 2)
}

/// `1 ≤ q < ∞`, `2 ≤ r ≤ ∞`, `1/q < d/2 (1 - 2/r)`, or `(q, r) = (∞, 2)`.
pub fn acceptable(q: Exponent, r: Exponent, d: usize) -> bool {
    let (iq, ir) = (q.recip(), r.recip());
    let one = Rational64::from_integer(1);
    let half = Rational64::new(1, 2);
    if q.is_infinite() && ir == half {
        return true;
    }
    let dd = Rational64::from_integer(d as i64);
    !q.is_infinite() && iq <= one && ir <= half && iq < dd * half * (one - ir * 2)
}

/// Evaluates every condition for `(q, r)` and `(q̃, r̃)` in dimension `d`.
pub fn pair_check(q: Exponent, r: Exponent, qt: Exponent, rt: Exponent, d: usize) -> PairVerdict {
    let (iq, ir, iqt, irt) = (q.recip(), r.recip(), qt.recip(), rt.recip());
    let one = Rational64::from_integer(1);
    let half = Rational64::new(1, 2);
    let dd = Rational64::from_integer(d as i64);
    let acc = acceptable(q, r, d);
    let acc_t = acceptable(qt, rt, d);
    let scaling = iq + iqt == dd * half * (one - ir - irt);

    let mut case = InhomogeneousCase::None;
    if d >= 3 && acc && acc_t && scaling {
        let lo = Rational64::new(d as i64 - 2, d as i64);
        let hi = Rational64::new(d as i64, d as i64 - 2);
        let sum = iq + iqt;
        if sum < one && lo * ir <= irt && irt <= hi * ir && ir <= half && irt <= half {
            case = InhomogeneousCase::NonSharp;
        } else if sum == one && ir <= iq && irt <= iqt {
            if lo * ir < irt && irt < hi * ir {
                case = InhomogeneousCase::Sharp;
            } else if ir == hi * irt || ir == lo * irt {
                case = InhomogeneousCase::Endpoint;
            }
        }
    }
    PairVerdict {
        admissible: admissible(q, r, d),
        admissible_tilde: admissible(qt, rt, d),
        acceptable: acc,
        acceptable_tilde: acc_t,
        scaling,
        inhomogeneous_case: case,
    }
}

/// The pairs used to close the Strichartz bound: `(2, r_d)` and
/// `(2, 2(d-1)/(d-2))`.
pub fn proof_pairs(d: usize) -> (Exponent, Exponent, Exponent, Exponent) {
    let di = d as i64;
    (
        Exponent::int(2),
        Exponent::ratio(2 * di * (di - 1), (di - 2) * (di - 2)),
        Exponent::int(2),
        Exponent::ratio(2 * (di - 1), di - 2),
    )
}
