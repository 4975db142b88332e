//! Field parameter, winding numbers and exact degree arithmetic.
//!
//! Degrees live in `ℤ ± {0, α/π}` with `α = arccos h`. They are stored
//! symbolically so that sums and admissibility checks never depend on the
//! floating-point value of `α`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{NeelError, Result};

/// External field strength `h ∈ [0, 1]` together with `α = arccos h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParam {
    pub h: f64,
    pub alpha: f64,
}

impl FieldParam {
    pub fn new(h: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&h) || !h.is_finite() {
            return Err(NeelError::InvalidField(h));
        }
        let alpha = if h == 1.0 { 0.0 } else { h.acos() };
        Ok(Self { h, alpha })
    }

    pub fn alpha_over_pi(&self) -> f64 {
        self.alpha / PI
    }

    /// `h = 1`: single well at `(1, 0)`, all degrees are integers.
    pub fn is_unit(&self) -> bool {
        self.h == 1.0
    }

    /// The two wells `(cos α, ± sin α)` expressed as phases `±α`.
    pub fn wells(&self) -> (f64, f64) {
        (-self.alpha, self.alpha)
    }
}

/// Fractional part of a winding number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Offset {
    Zero,
    PlusAlphaOverPi,
    MinusAlphaOverPi,
}

impl Offset {
    pub fn sign(self) -> i64 {
        match self {
            Offset::Zero => 0,
            Offset::PlusAlphaOverPi => 1,
            Offset::MinusAlphaOverPi => -1,
        }
    }

    pub fn from_sign(s: i64) -> Option<Self> {
        match s {
            0 => Some(Offset::Zero),
            1 => Some(Offset::PlusAlphaOverPi),
            -1 => Some(Offset::MinusAlphaOverPi),
            _ => None,
        }
    }
}

/// A degree `k`, `k + α/π` or `k − α/π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindingNumber {
    pub k: i64,
    pub offset: Offset,
}

impl WindingNumber {
    pub const ZERO: WindingNumber = WindingNumber {
        k: 0,
        offset: Offset::Zero,
    };

    pub fn new(k: i64, offset: Offset) -> Self {
        Self { k, offset }
    }

    pub fn integer(k: i64) -> Self {
        Self::new(k, Offset::Zero)
    }

    /// `k + α/π`
    pub fn plus_alpha(k: i64) -> Self {
        Self::new(k, Offset::PlusAlphaOverPi)
    }

    /// `k − α/π`
    pub fn minus_alpha(k: i64) -> Self {
        Self::new(k, Offset::MinusAlphaOverPi)
    }

    pub fn value(&self, p: &FieldParam) -> f64 {
        self.k as f64 + self.offset.sign() as f64 * p.alpha_over_pi()
    }

    pub fn expr(&self) -> DegreeExpr {
        DegreeExpr::new(self.k, self.offset.sign())
    }

    /// At `h = 1` the offsets collapse onto the integers.
    pub fn normalized(&self, p: &FieldParam) -> Self {
        if p.is_unit() {
            Self::integer(self.k)
        } else {
            *self
        }
    }

    pub fn is_zero(&self, p: &FieldParam) -> bool {
        self.normalized(p) == Self::ZERO
    }

    /// Orientation reversal `m(x) ↦ (m₁(−x), −m₂(−x))` maps degree `d` to `d`
    /// for integers; negation of the lifting maps `d` to `−d`.
    pub fn negated(&self) -> Self {
        let s = -self.offset.sign();
        Self::new(-self.k, Offset::from_sign(s).expect("sign in range"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        DegreeExpr::parse(text)?
            .as_winding_number()
            .ok_or_else(|| NeelError::UnrepresentableDegree(text.to_string(), f64::NAN))
    }
}

impl fmt::Display for WindingNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr().fmt(f)
    }
}

/// Exact element of `ℤ + ℤ·(α/π)`, used for partition arithmetic where sums
/// of several parts may leave the three-offset set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeExpr {
    pub int: i64,
    pub alpha: i64,
}

impl DegreeExpr {
    pub const ZERO: DegreeExpr = DegreeExpr { int: 0, alpha: 0 };

    pub fn new(int: i64, alpha: i64) -> Self {
        Self { int, alpha }
    }

    pub fn value(&self, p: &FieldParam) -> f64 {
        self.int as f64 + self.alpha as f64 * p.alpha_over_pi()
    }

    /// Membership in `ℕ = {1, 2, …}`, symbolically (generic `α`).
    pub fn is_natural(&self) -> bool {
        self.alpha == 0 && self.int >= 1
    }

    pub fn is_integer(&self) -> bool {
        self.alpha == 0
    }

    pub fn as_winding_number(&self) -> Option<WindingNumber> {
        Offset::from_sign(self.alpha).map(|o| WindingNumber::new(self.int, o))
    }

    /// Membership in `D_h = (ℕ ± {0, α/π}) ∪ {α/π}` for generic `α`.
    pub fn in_admissible_set(&self) -> bool {
        match self.alpha {
            0 => self.int >= 1,
            1 => self.int >= 0,
            -1 => self.int >= 1,
            _ => false,
        }
    }

    /// Parses forms like `2`, `a`, `-a`, `2-a`, `1+a`, `3 - alpha/pi`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || NeelError::UnrepresentableDegree(text.to_string(), f64::NAN);
        let cleaned: String = text
            .replace("alpha/pi", "a")
            .replace("α/π", "a")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if cleaned.is_empty() {
            return Err(bad());
        }
        let mut int = 0i64;
        let mut alpha = 0i64;
        let mut rest = cleaned.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ if first => (1, rest),
                _ => return Err(bad()),
            };
            first = false;
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            if let Some(coef) = term.strip_suffix('a') {
                let c: i64 = if coef.is_empty() {
                    1
                } else {
                    coef.trim_end_matches('*').parse().map_err(|_| bad())?
                };
                alpha += sign * c;
            } else {
                let v: i64 = term.parse().map_err(|_| bad())?;
                int += sign * v;
            }
        }
        Ok(Self { int, alpha })
    }
}

impl Add for DegreeExpr {
    type Output = DegreeExpr;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.int + rhs.int, self.alpha + rhs.alpha)
    }
}

impl Sub for DegreeExpr {
    type Output = DegreeExpr;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.int - rhs.int, self.alpha - rhs.alpha)
    }
}

impl Neg for DegreeExpr {
    type Output = DegreeExpr;
    fn neg(self) -> Self {
        Self::new(-self.int, -self.alpha)
    }
}

impl std::iter::Sum for DegreeExpr {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DegreeExpr::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for DegreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha_term = |c: i64| match c.abs() {
            1 => "α/π".to_string(),
            n => format!("{n}α/π"),
        };
        match (self.int, self.alpha) {
            (k, 0) => write!(f, "{k}"),
            (0, a) if a > 0 => write!(f, "{}", alpha_term(a)),
            (0, a) => write!(f, "-{}", alpha_term(a)),
            (k, a) if a > 0 => write!(f, "{k}+{}", alpha_term(a)),
            (k, a) => write!(f, "{k}-{}", alpha_term(a)),
        }
    }
}

/// Boundary phases `(φ₋, φ₊)` encoding the degree `d`.
///
/// `φ₋ = +α` for `d ∈ ℤ − α/π` and `φ₋ = −α` otherwise; `φ₊ = φ₋ + 2π d(h)`.
/// Both limits land on the wells `(cos α, ± sin α)`.
pub fn boundary_phases(d: &WindingNumber, p: &FieldParam) -> (f64, f64) {
    let d = d.normalized(p);
    let minus = match d.offset {
        Offset::MinusAlphaOverPi => p.alpha,
        _ => -p.alpha,
    };
    // Built from the exact increments 2πk ± 2α so that the ends sit on the
    // wells without accumulating rounding from d(h).
    let plus = minus + 2.0 * PI * d.k as f64 + 2.0 * d.offset.sign() as f64 * p.alpha;
    (minus, plus)
}

/// Decomposes a real degree value back into `k ± {0, α/π}`; `prefer_minus`
/// breaks ties (only possible at `h = 0`) in favour of the `k − α/π` form.
pub fn decompose_degree(value: f64, p: &FieldParam, prefer_minus: bool) -> Result<WindingNumber> {
    const TOL: f64 = 1e-9;
    let a = p.alpha_over_pi();
    let order: [i64; 3] = if prefer_minus { [-1, 0, 1] } else { [0, 1, -1] };
    for s in order {
        let k = (value - s as f64 * a).round();
        if (value - (k + s as f64 * a)).abs() <= TOL {
            let w = WindingNumber::new(k as i64, Offset::from_sign(s).expect("sign in range"));
            return Ok(w.normalized(p));
        }
    }
    Err(NeelError::DegreeDecomposition {
        value,
        alpha_over_pi: a,
    })
}

/// Number of points with `m₁ = ±1` carried by a minimiser of degree `d`.
pub fn expected_wall_count(d: &WindingNumber, p: &FieldParam) -> usize {
    let d = d.normalized(p);
    if d == WindingNumber::ZERO {
        return 0;
    }
    // Work with |d| in the form k ± {0, α/π}, k ≥ 0.
    let d = if d.value(p) < 0.0 { d.negated() } else { d };
    match d.offset {
        Offset::Zero if p.is_unit() => (2 * d.k - 1) as usize,
        Offset::Zero => (2 * d.k) as usize,
        // |d| = ℓ − 1 + α/π
        Offset::PlusAlphaOverPi => (2 * (d.k + 1) - 1) as usize,
        // |d| = ℓ − α/π
        Offset::MinusAlphaOverPi => (2 * d.k - 1) as usize,
    }
}
