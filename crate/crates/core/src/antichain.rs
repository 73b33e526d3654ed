//! Antichains as the minimal-generator representation of upper sets.

use serde::{Deserialize, Serialize};

use crate::error::OrderError;
use crate::poset::{leq, repr_cmp, Poset, Value};

/// A set of mutually incomparable elements, kept sorted in a canonical
/// (representation) order for determinism.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Antichain {
    pub poset: Poset,
    elems: Vec<Value>,
}

impl Antichain {
    pub fn empty(poset: Poset) -> Antichain {
        Antichain {
            poset,
            elems: Vec::new(),
        }
    }

    /// Minimal elements of `points`; the antichain property and dedup are
    /// established here. An empty input is valid and means "infeasible".
    pub fn from_points(points: Vec<Value>, poset: Poset) -> Result<Antichain, OrderError> {
        let elems = pareto_min(points, &poset)?;
        Ok(Antichain { poset, elems })
    }

    pub fn elems(&self) -> &[Value] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Membership of `r` in the upper set generated by this antichain.
    pub fn upper_set_contains(&self, r: &Value) -> Result<bool, OrderError> {
        for a in &self.elems {
            if leq(a, r, &self.poset)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Union at the upper-set level: minimal elements of the merged generators.
    pub fn union(&self, other: &Antichain) -> Result<Antichain, OrderError> {
        if self.poset != other.poset {
            return Err(OrderError::PosetMismatch {
                left: self.poset.signature(),
                right: other.poset.signature(),
            });
        }
        let mut pts = self.elems.clone();
        pts.extend(other.elems.iter().cloned());
        Antichain::from_points(pts, self.poset.clone())
    }

    /// Upper-set equality via mutual generator containment.
    pub fn same_upper_set(&self, other: &Antichain) -> Result<bool, OrderError> {
        for a in &self.elems {
            if !other.upper_set_contains(a)? {
                return Ok(false);
            }
        }
        for b in &other.elems {
            if !self.upper_set_contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Upper set of `self` contains the upper set of `other`.
    pub fn upper_set_includes(&self, other: &Antichain) -> Result<bool, OrderError> {
        for b in &other.elems {
            if !self.upper_set_contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Minimal elements of a multiset of points under `poset`, deduplicated
/// (numeric equality within tolerance) and canonically sorted.
pub fn pareto_min(points: Vec<Value>, poset: &Poset) -> Result<Vec<Value>, OrderError> {
    let mut kept: Vec<Value> = Vec::new();
    'outer: for cand in points {
        let mut i = 0;
        while i < kept.len() {
            if leq(&kept[i], &cand, poset)? {
                // dominated (or a duplicate) - drop the candidate
                continue 'outer;
            }
            if leq(&cand, &kept[i], poset)? {
                kept.swap_remove(i);
            } else {
                i += 1;
            }
        }
        kept.push(cand);
    }
    kept.sort_by(repr_cmp);
    Ok(kept)
}
