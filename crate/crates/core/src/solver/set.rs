use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::lattice::{LatticeSeq, SolveResult};

/// Solutions deduplicated modulo sign in the ∞-norm and kept sorted by
/// energy, ties broken by the canonical profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    members: Vec<SolveResult>,
}

/// Entries below this are treated as zero when fixing the canonical sign.
const SIGN_FLOOR: f64 = 1e-12;

fn canonical(u: &LatticeSeq) -> LatticeSeq {
    match u.values().iter().find(|v| v.abs() > SIGN_FLOOR) {
        Some(v) if *v < 0.0 => u.neg(),
        _ => u.clone(),
    }
}

fn order(a: &SolveResult, b: &SolveResult) -> Ordering {
    a.energy.total_cmp(&b.energy).then_with(|| {
        a.u.values()
            .iter()
            .zip(b.u.values())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

impl SolutionSet {
    pub const DEDUP_TOL: f64 = 1e-6;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[SolveResult] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &SolveResult> {
        self.members.iter()
    }

    pub fn into_vec(self) -> Vec<SolveResult> {
        self.members
    }

    pub fn energies(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.energy).collect()
    }

    /// ∞-distance from `u` to the nearest member or its negation.
    pub fn distance(&self, u: &LatticeSeq) -> f64 {
        self.members
            .iter()
            .map(|m| m.u.dist_inf(u).min(m.u.dist_inf(&u.neg())))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, u: &LatticeSeq) -> bool {
        self.distance(u) <= Self::DEDUP_TOL
    }

    /// Inserts `res` with canonical sign. A duplicate replaces the stored
    /// member only if its residual is smaller. Returns whether `res` was new.
    pub fn insert(&mut self, mut res: SolveResult) -> bool {
        res.u = canonical(&res.u);
        if let Some(i) = self
            .members
            .iter()
            .position(|m| m.u.dist_inf(&res.u).min(m.u.dist_inf(&res.u.neg())) <= Self::DEDUP_TOL)
        {
            if res.residual_inf_norm < self.members[i].residual_inf_norm {
                self.members.remove(i);
                let at = self.members.partition_point(|m| order(m, &res).is_lt());
                self.members.insert(at, res);
            }
            return false;
        }
        let at = self.members.partition_point(|m| order(m, &res).is_lt());
        self.members.insert(at, res);
        true
    }

    /// Members whose energy exceeds that of the previously kept member by
    /// more than `rel_tol · max(1, |J|)`, starting from the lowest.
    pub fn strict_levels(&self, rel_tol: f64) -> SolutionSet {
        let mut out: Vec<SolveResult> = Vec::new();
        for m in &self.members {
            let keep = match out.last() {
                None => true,
                Some(prev) => m.energy - prev.energy > rel_tol * prev.energy.abs().max(1.0),
            };
            if keep {
                out.push(m.clone());
            }
        }
        SolutionSet { members: out }
    }

    /// Drops members with `‖u‖_∞ <= DEDUP_TOL`.
    pub fn nontrivial(&self) -> SolutionSet {
        SolutionSet {
            members: self.members.iter().filter(|m| m.u.values().iter().any(|v| v.abs() > Self::DEDUP_TOL)).cloned().collect(),
        }
    }

    pub fn retain(&mut self, f: impl FnMut(&SolveResult) -> bool) {
        self.members.retain(f);
    }
}

impl FromIterator<SolveResult> for SolutionSet {
    fn from_iter<I: IntoIterator<Item = SolveResult>>(iter: I) -> Self {
        let mut set = SolutionSet::new();
        for r in iter {
            set.insert(r);
        }
        set
    }
}
