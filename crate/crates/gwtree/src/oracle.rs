//! Ground truth by exhaustive enumeration: every ordered tree of a
//! given (small) size, weighted by the product of offspring
//! probabilities over vertex outdegrees, yields exact conditioned
//! expectations of any per-tree statistic.

use crate::error::{Error, Result};
use crate::offspring::OffspringDist;
use crate::trees::Tree;

/// Catalan(11) = 58786 trees at n = 12 is the intended ceiling.
pub const ENUMERATION_MAX_N: usize = 12;

/// All valid Lukasiewicz words of length `n` (ballot sequences), in
/// lexicographic order, decoded to trees on the fly.
pub fn enumerate_trees(n: usize) -> Result<impl Iterator<Item = Tree>> {
    if n == 0 || n > ENUMERATION_MAX_N {
        return Err(Error::SizeGuard {
            what: "tree enumeration",
            n,
            max: ENUMERATION_MAX_N,
        });
    }
    Ok(BallotWords::new(n).map(|w| {
        Tree::from_lukasiewicz(&w).expect("enumerated words are valid by construction")
    }))
}

/// Lexicographic generator of degree sequences satisfying the ballot
/// condition. Tracks b = number of open slots (1 + running sum of
/// deg-1); a prefix of length i is completable iff 1 <= b <= n - i.
struct BallotWords {
    n: usize,
    word: Vec<u32>,
    started: bool,
    done: bool,
}

impl BallotWords {
    fn new(n: usize) -> Self {
        BallotWords {
            n,
            word: Vec::with_capacity(n),
            started: false,
            done: false,
        }
    }

    fn open_slots(&self) -> i64 {
        1 + self.word.iter().map(|&d| d as i64 - 1).sum::<i64>()
    }

    /// Append the lexicographically smallest viable suffix: degree 0
    /// wherever possible, degree 1 when a single open slot must be
    /// carried forward.
    fn lex_min_complete(&mut self) {
        let mut b = self.open_slots();
        while self.word.len() < self.n {
            let rem = self.n - self.word.len() - 1;
            let d = if b == 1 && rem > 0 { 1 } else { 0 };
            self.word.push(d);
            b += d as i64 - 1;
        }
        debug_assert_eq!(b, 0);
    }

    /// Move to the lexicographic successor: bump the rightmost position
    /// that stays completable, then minimally complete.
    fn advance(&mut self) -> bool {
        while let Some(d) = self.word.pop() {
            let rem = self.n - self.word.len() - 1;
            // With degree d+1 here, open slots become b_before + d;
            // completable iff that is at most rem.
            if rem >= 1 && self.open_slots() + d as i64 <= rem as i64 {
                self.word.push(d + 1);
                self.lex_min_complete();
                return true;
            }
        }
        false
    }
}

impl Iterator for BallotWords {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.lex_min_complete();
            return Some(self.word.clone());
        }
        if self.advance() {
            Some(self.word.clone())
        } else {
            self.done = true;
            None
        }
    }
}

/// Every ordered tree of size n with its conditioned-model weight.
pub struct WeightedTreeSet {
    pub n: usize,
    pub trees: Vec<(Tree, f64)>,
    /// Sum of weights = P(|T| = n).
    pub total_weight: f64,
}

impl WeightedTreeSet {
    pub fn build(dist: &OffspringDist, n: usize) -> Result<Self> {
        let mut trees = Vec::new();
        let mut total = 0.0;
        for tree in enumerate_trees(n)? {
            let w: f64 = (0..n as u32).map(|v| dist.prob(tree.outdegree(v) as usize)).product();
            total += w;
            trees.push((tree, w));
        }
        Ok(WeightedTreeSet {
            n,
            trees,
            total_weight: total,
        })
    }
}

/// E[stat(T_n)] by finite weighted sum; `stat` returns a value vector
/// per tree (ragged vectors are zero-padded on the right).
pub fn exact_conditioned_expectation<F>(
    dist: &OffspringDist,
    n: usize,
    mut stat: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&Tree) -> Vec<f64>,
{
    let set = WeightedTreeSet::build(dist, n)?;
    if set.total_weight <= 0.0 {
        return Err(Error::ZeroWeight(n));
    }
    let mut acc: Vec<f64> = Vec::new();
    for (tree, w) in &set.trees {
        if *w == 0.0 {
            continue;
        }
        let x = stat(tree);
        if x.len() > acc.len() {
            acc.resize(x.len(), 0.0);
        }
        for (i, &v) in x.iter().enumerate() {
            acc[i] += w * v;
        }
    }
    for v in acc.iter_mut() {
        *v /= set.total_weight;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series;
    use crate::stats;

    fn catalan(n: usize) -> usize {
        let mut c = 1usize;
        for i in 0..n {
            c = c * 2 * (2 * i + 1) / (i + 2);
        }
        c
    }

    #[test]
    fn counts_are_catalan() {
        for n in 1..=8 {
            let count = enumerate_trees(n).unwrap().count();
            assert_eq!(count, catalan(n - 1), "n = {n}");
        }
        assert!(enumerate_trees(13).is_err());
        assert!(enumerate_trees(0).is_err());
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        for n in 1..=7 {
            let mut words: Vec<Vec<u32>> =
                enumerate_trees(n).unwrap().map(|t| t.degrees()).collect();
            let len = words.len();
            words.sort();
            words.dedup();
            assert_eq!(words.len(), len, "n = {n}");
        }
    }

    #[test]
    fn total_weight_matches_series() {
        let f_geo = series::series_f(&crate::offspring::OffspringDist::geometric(), 9);
        for spec in ["geometric", "poisson", "binary", "custom:0.4,0.3,0.2,0.1"] {
            let dist = crate::offspring::OffspringDist::from_spec(spec).unwrap();
            let f = series::series_f(&dist, 9);
            for n in 1..=9 {
                let set = WeightedTreeSet::build(&dist, n).unwrap();
                assert_eq!(set.trees.len(), catalan(n - 1));
                assert!(
                    (set.total_weight - f.coeff(n)).abs() < 1e-12,
                    "{spec} n={n}: {} vs {}",
                    set.total_weight,
                    f.coeff(n)
                );
            }
        }
        assert!((f_geo.coeff(3) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn small_exact_values() {
        let dist = crate::offspring::OffspringDist::geometric();
        // P_k at n = 3: P_1 = 2 always, P_2 = 1 always.
        let p = exact_conditioned_expectation(&dist, 3, |t| {
            let prof = stats::pair_profile(t, 4, 4);
            prof.p.iter().map(|&c| c as f64).collect()
        })
        .unwrap();
        assert!((p[1] - 2.0).abs() < 1e-14);
        assert!((p[2] - 1.0).abs() < 1e-14);
        // Z_1 at n = 3: cherry 2, path 1, equal weights -> 1.5.
        let z = exact_conditioned_expectation(&dist, 3, |t| {
            stats::level_profile(t).z.iter().map(|&c| c as f64).collect()
        })
        .unwrap();
        assert!((z[1] - 1.5).abs() < 1e-14);
        // Y_{1,1} at n = 3: cherry 2, path 0 -> 1.
        let y = exact_conditioned_expectation(&dist, 3, |t| {
            vec![stats::pair_profile(t, 2, 2).y[1][1] as f64]
        })
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binary_span_mismatch_is_zero_weight() {
        let dist = crate::offspring::OffspringDist::binary();
        let err = exact_conditioned_expectation(&dist, 4, |_| vec![1.0]);
        assert!(matches!(err, Err(Error::ZeroWeight(4))));
    }
}
