//! Critical points of the Morse function on `G_{n,m}(R)` and their combinatorics.
//!
//! Critical points are labelled by strictly increasing `m`-subsets of
//! `{1, ..., n}` (1-based, as in all public output). The Morse index of the
//! point labelled `i_1 < ... < i_m` is `sum_t (i_t - t)`, so index-`r` points
//! are in bijection with partitions of `r` fitting in an `m x (n - m)` box.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A critical point `O_{i_1 ... i_m}`, identified by its column labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CriticalPoint {
    subset: Vec<usize>,
    n: usize,
    morse_index: usize,
}

impl CriticalPoint {
    pub fn new(n: usize, subset: Vec<usize>) -> Result<Self> {
        let m = subset.len();
        check_dimensions(n, m)?;
        if subset[0] < 1 || subset[m - 1] > n {
            return Err(Error::InvalidParameters(format!(
                "labels {subset:?} must lie in 1..={n}"
            )));
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameters(format!(
                "labels {subset:?} must be strictly increasing"
            )));
        }
        let morse_index = index_of(&subset);
        Ok(CriticalPoint { subset, n, morse_index })
    }

    /// The minimum `{1, ..., m}` of `f`.
    pub fn bottom(n: usize, m: usize) -> Result<Self> {
        Self::new(n, (1..=m).collect())
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.subset.len()
    }

    pub fn morse_index(&self) -> usize {
        self.morse_index
    }

    /// Labels not in the subset, ascending: `k_1 < ... < k_{n-m}`.
    pub fn complement(&self) -> Vec<usize> {
        (1..=self.n).filter(|j| !self.contains(*j)).collect()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.subset.binary_search(&label).is_ok()
    }

    /// Lower label `i_k` (1-based slot) by one, if the result is still a
    /// valid subset.
    pub fn lowered(&self, slot_k: usize) -> Option<CriticalPoint> {
        if slot_k == 0 || slot_k > self.m() {
            return None;
        }
        let idx = slot_k - 1;
        let new_label = self.subset[idx].checked_sub(1).filter(|&l| l >= 1)?;
        if idx > 0 && self.subset[idx - 1] >= new_label {
            return None;
        }
        let mut subset = self.subset.clone();
        subset[idx] = new_label;
        Some(CriticalPoint {
            subset,
            n: self.n,
            morse_index: self.morse_index - 1,
        })
    }
}

impl fmt::Display for CriticalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.subset.iter().map(|i| i.to_string()).collect();
        write!(f, "O_{{{}}}", labels.join(","))
    }
}

impl Serialize for CriticalPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.subset.serialize(serializer)
    }
}

/// An index-lowering move `i_k -> i_k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lowering {
    pub from: CriticalPoint,
    /// 1-based slot.
    pub slot_k: usize,
    pub to: CriticalPoint,
}

pub(crate) fn check_dimensions(n: usize, m: usize) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::InvalidParameters(format!(
            "need 1 <= m <= n, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

fn index_of(subset: &[usize]) -> usize {
    subset.iter().enumerate().map(|(t, &i)| i - (t + 1)).sum()
}

/// All `C(n, m)` critical points in lexicographic order of their labels.
pub fn enumerate_critical_points(n: usize, m: usize) -> Result<Vec<CriticalPoint>> {
    check_dimensions(n, m)?;
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=m).collect();
    loop {
        out.push(CriticalPoint {
            morse_index: index_of(&current),
            subset: current.clone(),
            n,
        });
        // advance to the next combination in lexicographic order
        let mut t = m;
        while t > 0 && current[t - 1] == n - m + t {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        current[t - 1] += 1;
        for u in t..m {
            current[u] = current[u - 1] + 1;
        }
    }
    Ok(out)
}

pub fn morse_index(p: &CriticalPoint) -> usize {
    p.morse_index()
}

/// Every valid lowering of `p`, sorted by slot.
pub fn lowerings(p: &CriticalPoint) -> Vec<Lowering> {
    (1..=p.m())
        .filter_map(|k| {
            p.lowered(k).map(|to| Lowering {
                from: p.clone(),
                slot_k: k,
                to,
            })
        })
        .collect()
}

/// Number of critical points of each Morse index `0..=m(n-m)`.
///
/// The counts are cross-checked against an independent enumeration of
/// partitions in an `m x (n - m)` box; a mismatch is reported as an internal
/// consistency error.
pub fn index_census(n: usize, m: usize) -> Result<Vec<usize>> {
    let points = enumerate_critical_points(n, m)?;
    let mut census = vec![0usize; m * (n - m) + 1];
    for p in &points {
        census[p.morse_index()] += 1;
    }
    let oracle = box_partition_counts(m, n - m);
    if census != oracle {
        return Err(Error::InternalConsistency(format!(
            "index census {census:?} differs from box partition counts {oracle:?} for G_{{{n},{m}}}"
        )));
    }
    Ok(census)
}

/// Coefficients of the Gaussian binomial `[rows + cols choose rows]_q`,
/// obtained by listing partitions with at most `rows` parts, each at most
/// `cols`.
pub fn box_partition_counts(rows: usize, cols: usize) -> Vec<usize> {
    fn walk(rows_left: usize, max_part: usize, size: usize, counts: &mut [usize]) {
        counts[size] += 1;
        if rows_left == 0 {
            return;
        }
        for part in 1..=max_part {
            walk(rows_left - 1, part, size + part, counts);
        }
    }
    let mut counts = vec![0usize; rows * cols + 1];
    walk(rows, cols, 0, &mut counts);
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(n: usize, s: &[usize]) -> CriticalPoint {
        CriticalPoint::new(n, s.to_vec()).unwrap()
    }

    fn subsets(points: &[CriticalPoint]) -> Vec<Vec<usize>> {
        points.iter().map(|p| p.subset().to_vec()).collect()
    }

    #[test]
    fn enumerates_small_cases() {
        let pts = enumerate_critical_points(2, 1).unwrap();
        assert_eq!(subsets(&pts), vec![vec![1], vec![2]]);

        let pts = enumerate_critical_points(4, 2).unwrap();
        assert_eq!(
            subsets(&pts),
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
        assert_eq!(enumerate_critical_points(10, 3).unwrap().len(), 120);
        assert_eq!(enumerate_critical_points(5, 5).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(enumerate_critical_points(3, 0).is_err());
        assert!(enumerate_critical_points(3, 4).is_err());
        assert!(index_census(0, 0).is_err());
        assert!(CriticalPoint::new(4, vec![2, 2]).is_err());
        assert!(CriticalPoint::new(4, vec![0, 2]).is_err());
        assert!(CriticalPoint::new(4, vec![1, 5]).is_err());
    }

    #[test]
    fn morse_index_examples() {
        assert_eq!(morse_index(&cp(5, &[1, 2, 3])), 0);
        assert_eq!(morse_index(&cp(4, &[2, 4])), 3);
        assert_eq!(morse_index(&cp(7, &[5, 6, 7])), 3 * 4);
    }

    #[test]
    fn lowering_examples() {
        assert!(lowerings(&cp(4, &[1, 2])).is_empty());

        let l = lowerings(&cp(4, &[2, 4]));
        assert_eq!(l.len(), 2);
        assert_eq!((l[0].slot_k, l[0].to.subset()), (1, &[1, 4][..]));
        assert_eq!((l[1].slot_k, l[1].to.subset()), (2, &[2, 3][..]));

        let l = lowerings(&cp(4, &[1, 3]));
        assert_eq!(l.len(), 1);
        assert_eq!((l[0].slot_k, l[0].to.subset()), (2, &[1, 2][..]));
    }

    #[test]
    fn census_examples() {
        assert_eq!(index_census(4, 2).unwrap(), vec![1, 1, 2, 1, 1]);
        assert_eq!(index_census(5, 2).unwrap(), vec![1, 1, 2, 2, 2, 1, 1]);
        assert_eq!(index_census(6, 1).unwrap(), vec![1; 6]);
    }

    #[test]
    fn display_uses_labels() {
        assert_eq!(cp(6, &[2, 5]).to_string(), "O_{2,5}");
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn census_invariants_up_to_twelve() {
        for n in 1..=12 {
            for m in 1..=n {
                let c = index_census(n, m).unwrap();
                assert_eq!(c.iter().sum::<usize>(), binomial(n, m));
                let rev: Vec<_> = c.iter().rev().copied().collect();
                assert_eq!(c, rev, "palindromic census for ({n},{m})");
                if m < n {
                    assert_eq!(c, index_census(n, n - m).unwrap(), "duality ({n},{m})");
                }
            }
        }
    }

    #[test]
    fn index_depends_only_on_label_sum() {
        let pts = enumerate_critical_points(8, 3).unwrap();
        for p in &pts {
            for q in &pts {
                let sp: usize = p.subset().iter().sum();
                let sq: usize = q.subset().iter().sum();
                assert_eq!(sp == sq, p.morse_index() == q.morse_index());
            }
            for l in lowerings(p) {
                assert_eq!(l.to.morse_index() + 1, l.from.morse_index());
            }
        }
    }
}
