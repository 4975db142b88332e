//! Ordered decompositions of a degree into admissible parts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::degree::{DegreeExpr, FieldParam};
use crate::error::{NeelError, Result};

/// `target = Σ parts`, each part admissible, neighbouring non-integer parts
/// compatible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<DegreeExpr>,
    pub target: DegreeExpr,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Two non-integer parts separated only by integers must sum to an integer.
pub fn compatible_neighbours(parts: &[DegreeExpr]) -> bool {
    let mut last: Option<i64> = None;
    for p in parts.iter().filter(|p| !p.is_integer()) {
        if let Some(a) = last {
            if a + p.alpha != 0 {
                return false;
            }
        }
        last = Some(p.alpha);
    }
    true
}

impl Partition {
    /// Checks the sum, admissibility and adjacency conditions.
    pub fn is_valid(&self, p: &FieldParam) -> bool {
        self.parts.len() >= 2
            && self.parts.iter().copied().sum::<DegreeExpr>() == self.target
            && self.parts.iter().all(|d| admissible(d, p))
            && compatible_neighbours(&self.parts)
    }
}

/// Membership in the admissible set for this field. At `h = 1` only
/// positive integers remain.
pub fn admissible(d: &DegreeExpr, p: &FieldParam) -> bool {
    if p.is_unit() {
        d.is_natural()
    } else {
        d.in_admissible_set()
    }
}

/// Admissible values with integer part at most `max_int`, in ascending
/// symbolic order.
pub fn candidate_parts(max_int: i64, p: &FieldParam) -> Vec<DegreeExpr> {
    let mut out: Vec<DegreeExpr> = (0..=max_int)
        .flat_map(|k| [-1, 0, 1].map(|a| DegreeExpr::new(k, a)))
        .filter(|d| admissible(d, p))
        .collect();
    out.sort();
    out
}

/// All nontrivial partitions of `d` with at most `max_parts` parts, sorted
/// by length and then lexicographically.
pub fn enumerate_partitions(d: &DegreeExpr, p: &FieldParam, max_parts: usize) -> Result<Vec<Partition>> {
    if !admissible(d, p) {
        return Err(NeelError::UnrepresentableDegree(
            format!("{d} is not an admissible degree at h = {}", p.h),
            d.value(p),
        ));
    }
    if max_parts < 2 {
        return Err(NeelError::Precondition(format!("max_parts must be at least 2, got {max_parts}")));
    }
    let candidates = candidate_parts(d.int, p);
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(max_parts);
    extend(d, &candidates, max_parts, &mut stack, &mut out);
    out.sort_by(|a: &Partition, b| a.parts.len().cmp(&b.parts.len()).then_with(|| a.parts.cmp(&b.parts)));
    Ok(out)
}

fn extend(
    target: &DegreeExpr,
    candidates: &[DegreeExpr],
    max_parts: usize,
    stack: &mut Vec<DegreeExpr>,
    out: &mut Vec<Partition>,
) {
    let sum: DegreeExpr = stack.iter().copied().sum();
    let rest = *target - sum;
    if stack.len() >= 2 && rest == DegreeExpr::ZERO {
        out.push(Partition {
            parts: stack.clone(),
            target: *target,
        });
    }
    if stack.len() == max_parts {
        return;
    }
    let slots = (max_parts - stack.len()) as i64;
    for c in candidates {
        let after = rest - *c;
        // every remaining part has int ≥ 0 and |alpha| ≤ 1
        if after.int < 0 || after.alpha.abs() > slots - 1 {
            continue;
        }
        if after == DegreeExpr::ZERO && stack.is_empty() {
            // a single part is the trivial partition
            continue;
        }
        stack.push(*c);
        if compatible_neighbours(stack) {
            extend(target, candidates, max_parts, stack, out);
        }
        stack.pop();
    }
}
