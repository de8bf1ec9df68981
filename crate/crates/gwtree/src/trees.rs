//! Rooted ordered trees in depth-first array form, and samplers for the
//! unconditioned Galton-Watson tree and for the tree conditioned to have
//! exactly `n` vertices.

use crate::error::{Error, Result};
use crate::offspring::OffspringDist;
use rand::Rng;
use std::collections::VecDeque;

pub const ROOT: u32 = u32::MAX;

/// Default rejection cap for the conditioned sampler.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;
/// Default size cap for the unconditioned sampler.
pub const DEFAULT_SIZE_CAP: usize = 10_000_000;

/// A rooted ordered tree with vertices in depth-first (preorder) ids,
/// so every fringe subtree is a contiguous id range.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<u32>,
    depth: Vec<u32>,
    subtree: Vec<u32>,
    child_start: Vec<u32>,
    child_list: Vec<u32>,
}

impl Tree {
    /// Decode a depth-first outdegree sequence (Lukasiewicz word).
    ///
    /// The sequence must satisfy the ballot condition: partial sums of
    /// `deg - 1` stay >= 0 on proper prefixes and end at -1.
    pub fn from_lukasiewicz(degrees: &[u32]) -> Result<Tree> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::BadLukasiewicz("empty sequence".into()));
        }
        let mut sum: i64 = 0;
        for (i, &d) in degrees.iter().enumerate() {
            sum += d as i64 - 1;
            if sum < 0 && i + 1 < n {
                return Err(Error::BadLukasiewicz(format!(
                    "prefix sum drops to {sum} at position {i}"
                )));
            }
        }
        if sum != -1 {
            return Err(Error::BadLukasiewicz(format!(
                "degree sum {} != n - 1 = {}",
                sum + n as i64,
                n - 1
            )));
        }

        let mut parent = vec![ROOT; n];
        let mut depth = vec![0u32; n];
        // Stack of (vertex, children still to attach).
        let mut stack: Vec<(u32, u32)> = Vec::with_capacity(64);
        stack.push((0, degrees[0]));
        for v in 1..n as u32 {
            while let Some(&(_, 0)) = stack.last() {
                stack.pop();
            }
            let top = stack.last_mut().expect("ballot condition guarantees a parent");
            top.1 -= 1;
            parent[v as usize] = top.0;
            depth[v as usize] = depth[top.0 as usize] + 1;
            stack.push((v, degrees[v as usize]));
        }

        let mut subtree = vec![1u32; n];
        for v in (1..n).rev() {
            let p = parent[v] as usize;
            subtree[p] += subtree[v];
        }

        // Children in CSR form; filling in increasing id order preserves
        // the left-to-right child order because ids are preorder.
        let mut child_start = vec![0u32; n + 1];
        for v in 1..n {
            child_start[parent[v] as usize + 1] += 1;
        }
        for i in 0..n {
            child_start[i + 1] += child_start[i];
        }
        let mut cursor = child_start.clone();
        let mut child_list = vec![0u32; n - 1];
        for v in 1..n {
            let p = parent[v] as usize;
            child_list[cursor[p] as usize] = v as u32;
            cursor[p] += 1;
        }

        Ok(Tree {
            parent,
            depth,
            subtree,
            child_start,
            child_list,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }
    pub fn root(&self) -> u32 {
        0
    }
    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != ROOT).then_some(p)
    }
    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }
    pub fn depths(&self) -> &[u32] {
        &self.depth
    }
    pub fn parents(&self) -> &[u32] {
        &self.parent
    }
    pub fn subtree_size(&self, v: u32) -> u32 {
        self.subtree[v as usize]
    }
    pub fn children(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.child_list[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }
    pub fn outdegree(&self, v: u32) -> u32 {
        self.child_start[v as usize + 1] - self.child_start[v as usize]
    }
    pub fn height(&self) -> u32 {
        *self.depth.iter().max().unwrap()
    }

    /// Preorder outdegree sequence (inverse of [`Tree::from_lukasiewicz`]).
    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n() as u32).map(|v| self.outdegree(v)).collect()
    }

    /// The subtree of all descendants of `v` (including `v`), re-indexed.
    pub fn fringe_subtree(&self, v: u32) -> Result<Tree> {
        if v as usize >= self.n() {
            return Err(Error::BadVertex {
                vertex: v as usize,
                n: self.n(),
            });
        }
        let lo = v as usize;
        let hi = lo + self.subtree[lo] as usize;
        let degrees: Vec<u32> = (lo..hi).map(|u| self.outdegree(u as u32)).collect();
        Tree::from_lukasiewicz(&degrees)
    }
}

/// Rotate a degree multiset with sum n-1 into its unique valid
/// Lukasiewicz word (cycle lemma): start right after the first position
/// where the prefix sum of `deg - 1` attains its minimum. (Positions
/// before a later tied minimum would wrap to height -1, so only the
/// first one yields a valid word.)
pub fn cycle_lemma_rotation(degrees: &mut Vec<u32>) {
    let n = degrees.len();
    let mut sum: i64 = 0;
    let mut min = i64::MAX;
    let mut argmin = 0usize;
    for (i, &d) in degrees.iter().enumerate() {
        sum += d as i64 - 1;
        if sum < min {
            min = sum;
            argmin = i;
        }
    }
    debug_assert_eq!(sum, -1);
    degrees.rotate_left((argmin + 1) % n);
}

/// Sample the conditioned tree `T_n` exactly: rejection on the total
/// offspring sum, then the cycle lemma, then decoding.
pub fn sample_conditioned<R: Rng + ?Sized>(
    dist: &OffspringDist,
    n: usize,
    rng: &mut R,
) -> Result<Tree> {
    sample_conditioned_capped(dist, n, DEFAULT_REJECTION_CAP, rng)
}

/// Check that trees of size `n` exist for the law: n >= 1 and
/// n = 1 (mod span).
pub fn check_size(dist: &OffspringDist, n: usize) -> Result<()> {
    if n == 0 || n % dist.span() != 1 % dist.span() {
        return Err(Error::SpanMismatch {
            n,
            span: dist.span(),
        });
    }
    Ok(())
}

pub fn sample_conditioned_capped<R: Rng + ?Sized>(
    dist: &OffspringDist,
    n: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<Tree> {
    check_size(dist, n)?;
    let target = n as u64 - 1;
    let mut degrees: Vec<u32> = Vec::with_capacity(n);
    for _ in 0..max_attempts {
        degrees.clear();
        let mut sum: u64 = 0;
        for _ in 0..n {
            let d = dist.sample(rng) as u64;
            sum += d;
            if sum > target {
                break;
            }
            degrees.push(d as u32);
        }
        if degrees.len() == n && sum == target {
            cycle_lemma_rotation(&mut degrees);
            debug_assert_eq!(count_valid_rotations(&degrees), 1);
            return Tree::from_lukasiewicz(&degrees);
        }
    }
    Err(Error::RejectionCap(max_attempts))
}

/// Number of cyclic rotations of `degrees` that satisfy the ballot
/// condition; the cycle lemma says exactly one when the sum is n-1.
pub fn count_valid_rotations(degrees: &[u32]) -> usize {
    let n = degrees.len();
    (0..n)
        .filter(|&s| {
            let mut sum: i64 = 0;
            for i in 0..n {
                sum += degrees[(s + i) % n] as i64 - 1;
                if sum < 0 && i + 1 < n {
                    return false;
                }
            }
            sum == -1
        })
        .count()
}

/// Grow the unconditioned tree breadth-first; a.s. finite under
/// criticality. A sample exceeding `size_cap` is reported as truncated
/// so the caller can treat it as censored.
pub fn sample_unconditioned<R: Rng + ?Sized>(
    dist: &OffspringDist,
    size_cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    // Degrees are generated in BFS order, then reassembled into a
    // preorder word through the BFS parent links.
    let mut bfs_degrees: Vec<u32> = Vec::new();
    let mut bfs_parent: Vec<u32> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    bfs_degrees.push(dist.sample(rng) as u32);
    bfs_parent.push(ROOT);
    for _ in 0..bfs_degrees[0] {
        queue.push_back(0);
    }
    while let Some(p) = queue.pop_front() {
        if bfs_degrees.len() >= size_cap {
            return Err(Error::Truncated(size_cap));
        }
        let v = bfs_degrees.len() as u32;
        let d = dist.sample(rng) as u32;
        bfs_degrees.push(d);
        bfs_parent.push(p);
        for _ in 0..d {
            queue.push_back(v);
        }
    }
    // Convert to preorder by a DFS over BFS children lists.
    let n = bfs_degrees.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 1..n {
        children[bfs_parent[v] as usize].push(v as u32);
    }
    let mut degrees = Vec::with_capacity(n);
    let mut stack = vec![0u32];
    while let Some(v) = stack.pop() {
        degrees.push(bfs_degrees[v as usize]);
        for &c in children[v as usize].iter().rev() {
            stack.push(c);
        }
    }
    Tree::from_lukasiewicz(&degrees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::replicate_rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decode_basics() {
        let cherry = Tree::from_lukasiewicz(&[2, 0, 0]).unwrap();
        assert_eq!(cherry.n(), 3);
        assert_eq!(cherry.children(0), &[1, 2]);
        assert_eq!(cherry.depth(1), 1);
        assert_eq!(cherry.depth(2), 1);
        assert_eq!(cherry.subtree_size(0), 3);

        let path = Tree::from_lukasiewicz(&[1, 1, 0]).unwrap();
        assert_eq!(path.parent(2), Some(1));
        assert_eq!(path.depth(2), 2);

        assert!(Tree::from_lukasiewicz(&[0, 1, 0]).is_err());
        assert!(Tree::from_lukasiewicz(&[2, 0, 0, 0]).is_err());
        assert!(Tree::from_lukasiewicz(&[]).is_err());
    }

    #[test]
    fn tree_invariants_roundtrip() {
        let t = Tree::from_lukasiewicz(&[3, 2, 0, 0, 0, 1, 0]).unwrap();
        assert_eq!(t.degrees(), vec![3, 2, 0, 0, 0, 1, 0]);
        let degsum: u32 = (0..t.n() as u32).map(|v| t.outdegree(v)).sum();
        assert_eq!(degsum as usize, t.n() - 1);
        for v in 1..t.n() as u32 {
            assert_eq!(t.depth(v), t.depth(t.parent(v).unwrap()) + 1);
        }
        for v in 0..t.n() as u32 {
            let s: u32 = t.children(v).iter().map(|&c| t.subtree_size(c)).sum();
            assert_eq!(t.subtree_size(v), s + 1);
        }
    }

    #[test]
    fn fringe_extraction() {
        let t = Tree::from_lukasiewicz(&[2, 1, 0, 0]).unwrap();
        let whole = t.fringe_subtree(0).unwrap();
        assert_eq!(whole, t);
        let leaf = t.fringe_subtree(3).unwrap();
        assert_eq!(leaf.n(), 1);
        let sub = t.fringe_subtree(1).unwrap();
        assert_eq!(sub.degrees(), vec![1, 0]);
        // Both sides count (ancestor, descendant) pairs.
        let lhs: u32 = (0..t.n() as u32).map(|v| t.subtree_size(v)).sum();
        let rhs: u32 = (0..t.n() as u32).map(|v| t.depth(v) + 1).sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conditioned_sampler_edge_cases() {
        let binary = OffspringDist::binary();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // n = 3 with support {0,2}: always the cherry.
        for _ in 0..50 {
            let t = sample_conditioned(&binary, 3, &mut rng).unwrap();
            assert_eq!(t.degrees(), vec![2, 0, 0]);
        }
        assert!(matches!(
            sample_conditioned(&binary, 4, &mut rng),
            Err(Error::SpanMismatch { .. })
        ));
        let geo = OffspringDist::geometric();
        let t1 = sample_conditioned(&geo, 1, &mut rng).unwrap();
        assert_eq!(t1.n(), 1);
        let t = sample_conditioned(&geo, 100, &mut rng).unwrap();
        assert_eq!(t.n(), 100);
    }

    #[test]
    fn conditioned_geometric_n3_is_fair() {
        // Both size-3 shapes have GW weight 1/32, so 1/2 each conditioned.
        let geo = OffspringDist::geometric();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let reps = 100_000u64;
        let mut cherries = 0u64;
        for _ in 0..reps {
            let t = sample_conditioned(&geo, 3, &mut rng).unwrap();
            if t.outdegree(0) == 2 {
                cherries += 1;
            }
        }
        // Chi-square with 1 df at significance 1e-3: critical value 10.828.
        let e = reps as f64 / 2.0;
        let chi2 = (cherries as f64 - e).powi(2) / e
            + ((reps - cherries) as f64 - e).powi(2) / e;
        assert!(chi2 < 10.828, "chi2 = {chi2}");
    }

    #[test]
    fn unconditioned_size_frequencies() {
        // The small size cap only censors huge trees, which cannot affect
        // the frequencies of the small sizes being counted.
        let geo = OffspringDist::geometric();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reps = 100_000u64;
        let (mut n1, mut n3) = (0u64, 0u64);
        for _ in 0..reps {
            match sample_unconditioned(&geo, 1000, &mut rng) {
                Ok(t) => {
                    if t.n() == 1 {
                        n1 += 1;
                    } else if t.n() == 3 {
                        n3 += 1;
                    }
                }
                Err(Error::Truncated(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let check = |count: u64, p: f64| {
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            let obs = count as f64 / reps as f64;
            assert!((obs - p).abs() < 3.0 * se, "obs {obs} vs {p}");
        };
        check(n1, 0.5); // P(|T| = 1) = p_0
        check(n3, 1.0 / 16.0); // two shapes of weight 1/32 each

        // Poisson: Borel distribution, P(|T| = 2) = 2^1 e^{-2} / 2! = e^{-2}.
        let poi = OffspringDist::poisson();
        let mut n2 = 0u64;
        for _ in 0..reps {
            if let Ok(t) = sample_unconditioned(&poi, 1000, &mut rng) {
                if t.n() == 2 {
                    n2 += 1;
                }
            }
        }
        let p = (-2.0f64).exp();
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((n2 as f64 / reps as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn conditioned_vs_unconditioned_shapes() {
        // Two-sample chi-square over shape frequencies at n = 5
        // (Catalan(4) = 14 shapes), 1e5 samples each.
        use std::collections::HashMap;
        let geo = OffspringDist::geometric();
        let reps = 20_000usize;
        let mut freq_cond: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut rng = replicate_rng(11, 0);
        for _ in 0..reps {
            let t = sample_conditioned(&geo, 5, &mut rng).unwrap();
            *freq_cond.entry(t.degrees()).or_insert(0) += 1;
        }
        // A tight size cap keeps rejected attempts cheap without touching
        // the law of the accepted size-5 trees.
        let mut freq_unc: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut rng = replicate_rng(11, 1);
        let mut got = 0usize;
        while got < reps {
            if let Ok(t) = sample_unconditioned(&geo, 64, &mut rng) {
                if t.n() == 5 {
                    *freq_unc.entry(t.degrees()).or_insert(0) += 1;
                    got += 1;
                }
            }
        }
        let shapes: std::collections::BTreeSet<_> = freq_cond
            .keys()
            .chain(freq_unc.keys())
            .cloned()
            .collect();
        assert_eq!(shapes.len(), 14);
        let mut chi2 = 0.0f64;
        for s in &shapes {
            let a = *freq_cond.get(s).unwrap_or(&0) as f64;
            let b = *freq_unc.get(s).unwrap_or(&0) as f64;
            // Equal sample sizes: chi2 contribution (a-b)^2 / (a+b).
            chi2 += (a - b).powi(2) / (a + b);
        }
        // 13 df at significance 1e-3: critical value 34.53.
        assert!(chi2 < 34.53, "chi2 = {chi2}");
    }

    proptest::proptest! {
        #[test]
        fn cycle_lemma_uniqueness(raw in proptest::collection::vec(0u32..4, 1..40)) {
            // Force the sum to n-1: a deficit is fixed by raising a degree,
            // an excess by appending leaves (each new leaf raises n-1 by 1).
            let mut degrees = raw;
            loop {
                let n = degrees.len() as i64;
                let sum: i64 = degrees.iter().map(|&d| d as i64).sum();
                match sum.cmp(&(n - 1)) {
                    std::cmp::Ordering::Equal => break,
                    std::cmp::Ordering::Less => degrees[0] += 1,
                    std::cmp::Ordering::Greater => degrees.push(0),
                }
            }
            proptest::prop_assert_eq!(count_valid_rotations(&degrees), 1);
            let mut rotated = degrees.clone();
            cycle_lemma_rotation(&mut rotated);
            let t = Tree::from_lukasiewicz(&rotated).unwrap();
            proptest::prop_assert_eq!(t.n(), degrees.len());
        }
    }
}
