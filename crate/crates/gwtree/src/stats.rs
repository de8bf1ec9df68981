//! Per-tree statistics: level profiles, pair counts at each distance,
//! ancestor-split counts, and root-path pair counts, each with an
//! independent brute-force route for cross-checking.

use crate::error::{Error, Result};
use crate::mc::{monte_carlo_mean, EstimateTable};
use crate::offspring::OffspringDist;
use crate::trees::{sample_conditioned, Tree};
use std::collections::VecDeque;

pub const DEFAULT_Y_CAP: usize = 64;
const BRUTEFORCE_MAX_N: usize = 2000;

/// z[k] = number of vertices at depth k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    pub z: Vec<u64>,
}

/// Distance-pair counts of one tree.
///
/// `p[k]` counts unordered pairs at distance k (index 0 unused);
/// `y[l][m]` counts ordered pairs (v, w) with d(v, lca) = l and
/// d(w, lca) = m, stored up to the requested caps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairProfile {
    pub p: Vec<u64>,
    pub y: Vec<Vec<u64>>,
}

/// q[k] = pairs at distance k whose path visits the root;
/// qp[k] = those where neither endpoint is the root. q = qp + z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootPairCounts {
    pub q: Vec<u64>,
    pub qp: Vec<u64>,
}

pub fn level_profile(tree: &Tree) -> LevelProfile {
    let mut z = vec![0u64; tree.height() as usize + 1];
    for &d in tree.depths() {
        z[d as usize] += 1;
    }
    LevelProfile { z }
}

/// Exact pair profile by a post-order merge of descendant depth profiles.
///
/// At each vertex u, pairs with lca = u are cross-convolutions between the
/// depth profile of each incoming child subtree and the profile of the
/// previously merged children (plus pairs involving u itself). Smaller
/// profiles merge into larger ones, keeping the cost near O(n * height).
pub fn pair_profile(tree: &Tree, lcap: usize, mcap: usize) -> PairProfile {
    let n = tree.n();
    let mut p = vec![0u64; n.max(2)];
    let mut y = vec![vec![0u64; mcap + 1]; lcap + 1];
    y[0][0] = n as u64;

    // prof[v]: counts of subtree(v) vertices by depth relative to v.
    let mut prof: Vec<Option<VecDeque<u64>>> = vec![None; n];
    for v in (0..n as u32).rev() {
        let mut acc: Option<VecDeque<u64>> = None;
        for &c in tree.children(v) {
            // Shift child profile to be relative to depth(v)+1: index i
            // now means distance i+1 from v.
            let pc = prof[c as usize].take().expect("children precede parents");
            acc = Some(match acc {
                None => pc,
                Some(prev) => {
                    let (mut big, small) = if prev.len() >= pc.len() {
                        (prev, pc)
                    } else {
                        (pc, prev)
                    };
                    for (i, &ci) in small.iter().enumerate() {
                        if ci == 0 {
                            continue;
                        }
                        for (j, &cj) in big.iter().enumerate() {
                            if cj == 0 {
                                continue;
                            }
                            let (l, m) = (i + 1, j + 1);
                            let cnt = ci * cj;
                            p[l + m] += cnt;
                            if l <= lcap && m <= mcap {
                                y[l][m] += cnt;
                            }
                            if m <= lcap && l <= mcap {
                                y[m][l] += cnt;
                            }
                        }
                    }
                    for (j, &cj) in small.iter().enumerate() {
                        big[j] += cj;
                    }
                    big
                }
            });
        }
        let mut profile = acc.unwrap_or_default();
        // Pairs (descendant, v): split (i+1, 0).
        for (i, &cnt) in profile.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let l = i + 1;
            p[l] += cnt;
            if l <= lcap {
                y[l][0] += cnt;
            }
            if l <= mcap {
                y[0][l] += cnt;
            }
        }
        profile.push_front(1);
        prof[v as usize] = Some(profile);
    }
    PairProfile { p, y }
}

/// O(n^2) oracle for [`pair_profile`]: BFS from every vertex; the split
/// (l, m) follows from the distance and the two depths.
pub fn pair_profile_bruteforce(tree: &Tree, lcap: usize, mcap: usize) -> Result<PairProfile> {
    let n = tree.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::SizeGuard {
            what: "brute-force pair profile",
            n,
            max: BRUTEFORCE_MAX_N,
        });
    }
    let mut p = vec![0u64; n.max(2)];
    let mut y = vec![vec![0u64; mcap + 1]; lcap + 1];
    y[0][0] = n as u64;

    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n as u32 {
        dist.fill(u32::MAX);
        dist[v as usize] = 0;
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            let push = |w: u32, dist: &mut Vec<u32>, queue: &mut VecDeque<u32>| {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            };
            if let Some(parent) = tree.parent(u) {
                push(parent, &mut dist, &mut queue);
            }
            for &c in tree.children(u) {
                push(c, &mut dist, &mut queue);
            }
        }
        for w in (v + 1)..n as u32 {
            let k = dist[w as usize] as usize;
            p[k] += 1;
            // depth(v) - depth(lca) = l with l + m = k.
            let l = (k as i64 + tree.depth(v) as i64 - tree.depth(w) as i64) / 2;
            let m = k as i64 - l;
            let (l, m) = (l as usize, m as usize);
            if l <= lcap && m <= mcap {
                y[l][m] += 1;
            }
            if m <= lcap && l <= mcap {
                y[m][l] += 1;
            }
        }
    }
    Ok(PairProfile { p, y })
}

/// Pairs through the root: cross-convolve the depth profiles of the
/// root's child subtrees, then add the pairs ending at the root.
pub fn root_pair_counts(tree: &Tree) -> RootPairCounts {
    let z = level_profile(tree).z;
    let h = z.len() - 1;
    let mut qp = vec![0u64; (2 * h + 1).max(2)];

    // Depth profile of each root child subtree, relative to the child;
    // fringe contiguity makes each one a single pass over an id range.
    let mut running: Vec<u64> = Vec::new();
    for &c in tree.children(0) {
        let lo = c as usize;
        let hi = lo + tree.subtree_size(c) as usize;
        let mut zc: Vec<u64> = Vec::new();
        for u in lo..hi {
            let rel = (tree.depth(u as u32) - 1) as usize;
            if rel >= zc.len() {
                zc.resize(rel + 1, 0);
            }
            zc[rel] += 1;
        }
        for (j, &a) in zc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (i, &b) in running.iter().enumerate() {
                qp[j + i + 2] += a * b;
            }
        }
        if zc.len() > running.len() {
            running.resize(zc.len(), 0);
        }
        for (j, &a) in zc.iter().enumerate() {
            running[j] += a;
        }
    }
    let mut q = qp.clone();
    for (k, &zk) in z.iter().enumerate().skip(1) {
        q[k] += zk;
    }
    let len = q.len();
    RootPairCounts {
        q,
        qp: {
            qp.resize(len, 0);
            qp
        },
    }
}

/// Sum of Q_k over all fringe subtrees; equals P_k because every pair is
/// counted exactly once, at its lca. Used as a structural cross-check.
pub fn fringe_qk_sum(tree: &Tree) -> Result<Vec<u64>> {
    let mut total = vec![0u64; tree.n().max(2)];
    for v in 0..tree.n() as u32 {
        let f = tree.fringe_subtree(v)?;
        let rc = root_pair_counts(&f);
        if rc.q.len() > total.len() {
            total.resize(rc.q.len(), 0);
        }
        for (k, &qk) in rc.q.iter().enumerate() {
            total[k] += qk;
        }
    }
    Ok(total)
}

/// Statistics selectable for Monte Carlo estimation on conditioned trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Z_k(T_n), indexed by depth k.
    LevelProfile,
    /// P_k(T_n), indexed by distance k.
    PairCounts,
    /// Q_k(T_n), indexed by distance k.
    RootPairCounts,
}

/// Sample means with standard errors of a per-tree statistic over fresh
/// conditioned trees.
pub fn monte_carlo_mean_stat(
    dist: &OffspringDist,
    n: usize,
    stat: Statistic,
    reps: u64,
    seed: u64,
) -> Result<EstimateTable> {
    // Fail fast on span mismatch rather than inside the replicate loop.
    if n == 0 || n % dist.span() != 1 % dist.span() {
        return Err(Error::SpanMismatch {
            n,
            span: dist.span(),
        });
    }
    let mut err = None;
    let table = monte_carlo_mean(reps, seed, |rng| {
        match sample_conditioned(dist, n, rng) {
            Ok(t) => match stat {
                Statistic::LevelProfile => {
                    level_profile(&t).z.iter().map(|&c| c as f64).collect()
                }
                Statistic::PairCounts => pair_profile(&t, 0, 0)
                    .p
                    .iter()
                    .map(|&c| c as f64)
                    .collect(),
                Statistic::RootPairCounts => root_pair_counts(&t)
                    .q
                    .iter()
                    .map(|&c| c as f64)
                    .collect(),
            },
            Err(e) => {
                err.get_or_insert(e);
                vec![]
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(table),
    }
}

/// Monte Carlo E Z_k(T_n)^2 for one fixed k.
pub fn mc_level_squared(
    dist: &OffspringDist,
    n: usize,
    k: usize,
    reps: u64,
    seed: u64,
) -> Result<EstimateTable> {
    let mut err = None;
    let table = monte_carlo_mean(reps, seed, |rng| match sample_conditioned(dist, n, rng) {
        Ok(t) => {
            let z = level_profile(&t).z;
            let zk = z.get(k).copied().unwrap_or(0) as f64;
            vec![zk * zk]
        }
        Err(e) => {
            err.get_or_insert(e);
            vec![]
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(table),
    }
}

/// Monte Carlo E Q_k(unconditioned GW tree) for k = 1..=kmax, by the
/// generation-size process truncated at depth kmax.
///
/// Q_k depends only on the first kmax generations, so the truncation is
/// exact in distribution while avoiding the infinite expected size of the
/// full tree. Returns a table indexed by k-1.
pub fn mc_qk_unconditioned(
    dist: &OffspringDist,
    kmax: usize,
    reps: u64,
    seed: u64,
) -> EstimateTable {
    monte_carlo_mean(reps, seed, |rng| {
        let root_deg = dist.sample(rng);
        // Z_k of the whole tree, k = 0..=kmax.
        let mut z = vec![0u64; kmax + 1];
        z[0] = 1;
        // Q'_k cross-sums, accumulated against previous subtrees.
        let mut qp = vec![0u64; kmax + 1];
        let mut prev = vec![0u64; kmax.max(1)];
        for _ in 0..root_deg {
            // Generation sizes of one root subtree, relative depths 0..kmax-1.
            let mut gen = vec![0u64; kmax.max(1)];
            gen[0] = 1;
            for j in 1..kmax {
                let mut next = 0u64;
                for _ in 0..gen[j - 1] {
                    next += dist.sample(rng) as u64;
                }
                gen[j] = next;
            }
            for k in 2..=kmax {
                let mut s = 0u64;
                for j in 0..=(k - 2) {
                    s += gen[j] * prev[k - 2 - j];
                }
                qp[k] += s;
            }
            for j in 1..=kmax {
                z[j] += gen[j - 1];
            }
            for j in 0..kmax {
                prev[j] += gen[j];
            }
        }
        // Q_k = Q'_k + Z_k.
        (1..=kmax).map(|k| (qp[k] + z[k]) as f64).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::replicate_rng;

    fn cherry() -> Tree {
        Tree::from_lukasiewicz(&[2, 0, 0]).unwrap()
    }
    fn path3() -> Tree {
        Tree::from_lukasiewicz(&[1, 1, 0]).unwrap()
    }

    #[test]
    fn level_profiles() {
        assert_eq!(level_profile(&path3()).z, vec![1, 1, 1]);
        assert_eq!(level_profile(&cherry()).z, vec![1, 2]);
        let single = Tree::from_lukasiewicz(&[0]).unwrap();
        assert_eq!(level_profile(&single).z, vec![1]);
    }

    #[test]
    fn pair_profile_hand_enumeration() {
        let pp = pair_profile(&cherry(), 4, 4);
        assert_eq!(&pp.p[1..3], &[2, 1]);
        assert_eq!(pp.y[1][1], 2);
        assert_eq!(pp.y[0][1], 2);
        assert_eq!(pp.y[1][0], 2);
        assert_eq!(pp.y[0][0], 3);

        let pp = pair_profile(&path3(), 4, 4);
        assert_eq!(&pp.p[1..3], &[2, 1]);
        assert_eq!(pp.y[1][1], 0);
        assert_eq!(pp.y[0][2], 1);
        assert_eq!(pp.y[2][0], 1);
        assert_eq!(pp.y[1][0], 2);

        // Star with 4 leaves: 4 edges, C(4,2) = 6 pairs at distance 2.
        let star = Tree::from_lukasiewicz(&[4, 0, 0, 0, 0]).unwrap();
        let pp = pair_profile(&star, 2, 2);
        assert_eq!(&pp.p[1..3], &[4, 6]);
    }

    #[test]
    fn bruteforce_agrees() {
        let geo = OffspringDist::geometric();
        let mut rng = replicate_rng(21, 0);
        for n in [10usize, 50, 200] {
            for _ in 0..20 {
                let t = sample_conditioned(&geo, n, &mut rng).unwrap();
                let a = pair_profile(&t, 8, 8);
                let b = pair_profile_bruteforce(&t, 8, 8).unwrap();
                assert_eq!(a, b);
            }
        }
        let big = Tree::from_lukasiewicz(&vec![0u32; 1][..]).unwrap();
        assert_eq!(
            pair_profile_bruteforce(&big, 1, 1).unwrap(),
            pair_profile(&big, 1, 1)
        );
    }

    #[test]
    fn pair_profile_invariants() {
        let geo = OffspringDist::geometric();
        let mut rng = replicate_rng(22, 0);
        for _ in 0..50 {
            let t = sample_conditioned(&geo, 60, &mut rng).unwrap();
            let n = t.n() as u64;
            let pp = pair_profile(&t, 16, 16);
            assert_eq!(pp.p[1], n - 1);
            assert_eq!(pp.p.iter().sum::<u64>(), n * (n - 1) / 2);
            assert_eq!(pp.y[0][0], n);
            for l in 0..=16 {
                for m in 0..=16 {
                    assert_eq!(pp.y[l][m], pp.y[m][l]);
                }
            }
            // 2 P_k = sum over l+m=k of Y_{l,m}, within the cap range.
            for k in 1..=16usize {
                let s: u64 = (0..=k).map(|l| pp.y[l][k - l]).sum();
                assert_eq!(2 * pp.p[k], s, "k = {k}");
            }
        }
    }

    #[test]
    fn root_pair_hand_enumeration() {
        let rc = root_pair_counts(&path3());
        assert_eq!(rc.q[1], 1);
        assert_eq!(rc.q[2], 1);
        assert_eq!(rc.qp[2], 0);
        let rc = root_pair_counts(&cherry());
        assert_eq!(rc.q[1], 2);
        assert_eq!(rc.q[2], 1);
        assert_eq!(rc.qp[2], 1);
    }

    #[test]
    fn q_identities_on_random_trees() {
        let geo = OffspringDist::geometric();
        let mut rng = replicate_rng(23, 0);
        for _ in 0..30 {
            let t = sample_conditioned(&geo, 80, &mut rng).unwrap();
            let z = level_profile(&t).z;
            let rc = root_pair_counts(&t);
            for k in 1..rc.q.len() {
                let zk = z.get(k).copied().unwrap_or(0);
                assert_eq!(rc.q[k], rc.qp[k] + zk);
            }
            let pp = pair_profile(&t, 0, 0);
            let fq = fringe_qk_sum(&t).unwrap();
            for k in 1..pp.p.len().max(fq.len()) {
                let a = pp.p.get(k).copied().unwrap_or(0);
                let b = fq.get(k).copied().unwrap_or(0);
                assert_eq!(a, b, "k = {k}");
            }
        }
    }

    #[test]
    fn mc_qk_matches_formula() {
        // E Q_k(GW tree) = 1 + (k-1) sigma^2 / 2; geometric sigma^2 = 2.
        let geo = OffspringDist::geometric();
        let table = mc_qk_unconditioned(&geo, 5, 100_000, 31);
        for k in 1..=5usize {
            let target = k as f64;
            let (m, se) = (table.mean[k - 1], table.stderr[k - 1]);
            assert!((m - target).abs() < 3.5 * se, "k={k}: {m} +- {se}");
        }
    }

    #[test]
    fn mc_mean_stat_smoke() {
        let geo = OffspringDist::geometric();
        let t = monte_carlo_mean_stat(&geo, 3, Statistic::PairCounts, 20_000, 5).unwrap();
        // E P_2(T_3) = 1 exactly (both shapes have P_2 = 1): zero variance.
        assert!((t.mean[2] - 1.0).abs() < 1e-12);
        let z = monte_carlo_mean_stat(&geo, 9, Statistic::LevelProfile, 5_000, 6).unwrap();
        assert!((z.mean[0] - 1.0).abs() < 1e-12); // one root, always
        assert!(matches!(
            monte_carlo_mean_stat(&OffspringDist::binary(), 4, Statistic::LevelProfile, 10, 1),
            Err(Error::SpanMismatch { .. })
        ));
    }
}
