//! Identifier-to-vector expansion, interval partitioning, and the
//! hierarchical classifier tree that stores one attribute column.
//!
//! A tree node covers an integer interval and owns a small classifier that
//! routes a key (expanded to a pseudo-random vector) to one of up to
//! `fanout` child sub-intervals. Leaves are unit-width intervals, so a full
//! root-to-leaf traversal recovers an exact integer. Keys are never fed to a
//! classifier raw; a scalar input carries too weak a signal to memorize.

use crate::error::Error;
use crate::nn::{self, Mlp, MlpConfig, TrainConfig};
use crate::rng::{self, fold, mix, GOLDEN_GAMMA};
use crate::Result;

/// Expands an integer key to `dims` pseudo-random reals in [-1, 1),
/// bit-exact across platforms (SplitMix64 stream seeded by the key).
pub fn seed_expand(id: u64, dims: usize) -> Vec<f64> {
    let mut state = id;
    (0..dims)
        .map(|_| {
            state = state.wrapping_add(GOLDEN_GAMMA);
            let frac = (mix(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            2.0 * frac - 1.0
        })
        .collect()
}

/// Half-open integer interval `[lo, hi)`. Bounds are `i128` so the full
/// 64-bit ciphertext space is representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
}

impl Interval {
    pub fn new(lo: i128, hi: i128) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The full signed 64-bit value space.
    pub fn full() -> Self {
        Self {
            lo: i64::MIN as i128,
            hi: i64::MAX as i128 + 1,
        }
    }

    pub fn width(&self) -> i128 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: i64) -> bool {
        (v as i128) >= self.lo && (v as i128) < self.hi
    }
}

/// Splits `iv` into at most `k` near-equal sub-intervals of width
/// `ceil(|iv|/k)` (the last possibly shorter); unit intervals when
/// `|iv| <= k`. The result exactly covers `iv` in ascending order.
pub fn interval_partition(iv: Interval, k: usize) -> Result<Vec<Interval>> {
    if k < 2 {
        return Err(Error::InvalidParameter("fanout must be at least 2".into()));
    }
    let width = iv.width();
    let chunk = (width + k as i128 - 1) / k as i128;
    let mut out = Vec::new();
    let mut lo = iv.lo;
    while lo < iv.hi {
        let hi = (lo + chunk).min(iv.hi);
        out.push(Interval { lo, hi });
        lo = hi;
    }
    Ok(out)
}

#[inline]
fn child_index(iv: Interval, chunk: i128, v: i64) -> usize {
    (((v as i128) - iv.lo) / chunk) as usize
}

/// Classifier attached to a tree node.
///
/// `Constant` stands in for a single-class node (all routed keys map to the
/// same child). `Split` is the growth fallback: keys are divided by one bit
/// of a key hash and each half gets its own model.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeModel {
    Constant(usize),
    Net(Mlp),
    Split {
        bit: u32,
        zero: Box<NodeModel>,
        one: Box<NodeModel>,
    },
}

const SPLIT_SALT: u64 = 0x5EED_5EED_5EED_5EED;

#[inline]
fn split_bit(key: u64, bit: u32) -> bool {
    (mix(key ^ SPLIT_SALT) >> bit) & 1 == 1
}

impl NodeModel {
    pub fn classify(&self, key: u64, input: &[f64]) -> usize {
        match self {
            NodeModel::Constant(c) => *c,
            NodeModel::Net(mlp) => mlp.predict(input),
            NodeModel::Split { bit, zero, one } => {
                if split_bit(key, *bit) {
                    one.classify(key, input)
                } else {
                    zero.classify(key, input)
                }
            }
        }
    }

    fn param_count(&self) -> usize {
        match self {
            NodeModel::Constant(_) => 0,
            NodeModel::Net(mlp) => {
                let (w, b) = mlp.actual_param_count();
                w + b
            }
            NodeModel::Split { zero, one, .. } => zero.param_count() + one.param_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnTreeNode {
    pub interval: Interval,
    /// Ascending partition of `interval`; empty at unit-width leaves.
    pub children_intervals: Vec<Interval>,
    /// Absent at leaves and on nodes that never saw a training pair.
    pub model: Option<NodeModel>,
    /// `None` entries are structural placeholders for empty children.
    pub children: Vec<Option<Box<DnnTreeNode>>>,
}

impl DnnTreeNode {
    fn is_leaf(&self) -> bool {
        self.interval.width() == 1
    }
}

/// Build/training knobs for one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub fanout: usize,
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    /// Cap for the width-doubling fallback.
    pub max_width: usize,
    /// Cap for recursive hash-splitting after width growth fails.
    pub max_split_depth: u32,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            fanout: 10,
            input_dim: 4,
            hidden_width: 64,
            hidden_layers: 4,
            max_width: 512,
            max_split_depth: 6,
            seed: 0,
            train: TrainConfig {
                max_epochs: 1500,
                learning_rate: 0.003,
                ..TrainConfig::default()
            },
        }
    }
}

/// Nodes with few routed keys tolerate (and want) a larger step size; big
/// nodes need the conservative base rate to reach 100%.
fn node_learning_rate(base: f64, n_samples: usize) -> f64 {
    if n_samples < 400 {
        base * 3.0
    } else {
        base
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fanout < 2 {
            return Err(Error::InvalidParameter("fanout must be at least 2".into()));
        }
        if self.input_dim < 1 || self.hidden_width < 1 || self.hidden_layers < 1 {
            return Err(Error::InvalidParameter("invalid node architecture".into()));
        }
        self.train.validate()
    }
}

/// Hierarchy of classifiers storing a `key -> integer value` map with exact
/// recovery for every trained key.
#[derive(Debug, Clone, PartialEq)]
pub struct DnnTree {
    pub root: DnnTreeNode,
    pub fanout: usize,
    pub input_dim: usize,
}

type ClassSample = (u64, usize);

fn train_node_model(
    class_pairs: &[ClassSample],
    n_classes: usize,
    cfg: &TreeConfig,
    node_salt: u64,
    split_depth: u32,
    interval: Interval,
) -> Result<NodeModel> {
    let first = class_pairs[0].1;
    if class_pairs.iter().all(|&(_, c)| c == first) {
        return Ok(NodeModel::Constant(first));
    }

    let samples: Vec<(Vec<f64>, usize)> = class_pairs
        .iter()
        .map(|&(key, class)| (seed_expand(key, cfg.input_dim), class))
        .collect();

    let mut width = cfg.hidden_width;
    loop {
        let mlp_cfg = MlpConfig::new(
            cfg.input_dim,
            width,
            cfg.hidden_layers,
            n_classes,
            fold(cfg.seed, &[node_salt, width as u64, split_depth as u64]),
        );
        let mut net = nn::init_mlp(mlp_cfg)?;
        let train_cfg = TrainConfig {
            rng_seed: mlp_cfg.seed ^ 1,
            learning_rate: node_learning_rate(cfg.train.learning_rate, samples.len()),
            ..cfg.train
        };
        let report = nn::train_storable(&mut net, &samples, &train_cfg)?;
        if report.converged {
            return Ok(NodeModel::Net(net));
        }
        if width < cfg.max_width {
            width = (width * 2).min(cfg.max_width);
            continue;
        }
        break;
    }

    // Width growth exhausted: divide the keys by a hash bit and give each
    // half its own model.
    if split_depth >= cfg.max_split_depth {
        return Err(Error::TrainingFailure {
            lo: interval.lo,
            hi: interval.hi,
        });
    }
    let bit = split_depth;
    let (zeros, ones): (Vec<ClassSample>, Vec<ClassSample>) = class_pairs
        .iter()
        .partition(|&&(key, _)| !split_bit(key, bit));
    let train_half = |half: &[ClassSample], tag: u64| -> Result<NodeModel> {
        if half.is_empty() {
            return Ok(NodeModel::Constant(0));
        }
        train_node_model(
            half,
            n_classes,
            cfg,
            fold(node_salt, &[tag]),
            split_depth + 1,
            interval,
        )
    };
    Ok(NodeModel::Split {
        bit,
        zero: Box::new(train_half(&zeros, 0)?),
        one: Box::new(train_half(&ones, 1)?),
    })
}

fn build_node(
    interval: Interval,
    pairs: &[(u64, i64)],
    cfg: &TreeConfig,
    path_salt: u64,
) -> Result<DnnTreeNode> {
    if interval.width() == 1 {
        return Ok(DnnTreeNode {
            interval,
            children_intervals: Vec::new(),
            model: None,
            children: Vec::new(),
        });
    }
    let children_intervals = interval_partition(interval, cfg.fanout)?;
    let chunk = (interval.width() + cfg.fanout as i128 - 1) / cfg.fanout as i128;
    let n_children = children_intervals.len();

    let mut routed: Vec<Vec<(u64, i64)>> = vec![Vec::new(); n_children];
    let mut class_pairs: Vec<ClassSample> = Vec::with_capacity(pairs.len());
    for &(key, value) in pairs {
        let idx = child_index(interval, chunk, value);
        routed[idx].push((key, value));
        class_pairs.push((key, idx));
    }

    let model = if class_pairs.is_empty() {
        None
    } else {
        Some(train_node_model(
            &class_pairs,
            n_children,
            cfg,
            path_salt,
            0,
            interval,
        )?)
    };

    let mut children = Vec::with_capacity(n_children);
    for (idx, child_pairs) in routed.iter().enumerate() {
        if child_pairs.is_empty() {
            children.push(None);
        } else {
            let child = build_node(
                children_intervals[idx],
                child_pairs,
                cfg,
                fold(path_salt, &[idx as u64]),
            )?;
            children.push(Some(Box::new(child)));
        }
    }
    Ok(DnnTreeNode {
        interval,
        children_intervals,
        model,
        children,
    })
}

impl DnnTree {
    /// Trains a tree storing `pairs` over `domain`. Keys must be distinct
    /// and every value must lie in `domain`. Every trained node reaches
    /// 100% accuracy on its routed pairs (growing or splitting as needed).
    pub fn build(pairs: &[(u64, i64)], domain: Interval, cfg: &TreeConfig) -> Result<DnnTree> {
        cfg.validate()?;
        for &(_, value) in pairs {
            if !domain.contains(value) {
                return Err(Error::ValueOutOfDomain {
                    value,
                    lo: domain.lo,
                    hi: domain.hi,
                });
            }
        }
        {
            let mut keys: Vec<u64> = pairs.iter().map(|&(k, _)| k).collect();
            keys.sort_unstable();
            if keys.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter("duplicate keys in tree build".into()));
            }
        }
        let root = build_node(domain, pairs, cfg, rng::fold(cfg.seed, &[0x7EEE]))?;
        Ok(DnnTree {
            root,
            fanout: cfg.fanout,
            input_dim: cfg.input_dim,
        })
    }

    pub fn domain(&self) -> Interval {
        self.root.interval
    }

    /// Root-to-leaf traversal. Total for any key; for a trained key the
    /// result is exactly the stored value.
    pub fn lookup(&self, key: u64) -> i64 {
        let input = seed_expand(key, self.input_dim);
        let mut node = &self.root;
        loop {
            if node.is_leaf() {
                return node.interval.lo as i64;
            }
            let class = match &node.model {
                Some(m) => m.classify(key, &input),
                None => 0,
            };
            match node.children.get(class).and_then(|c| c.as_deref()) {
                Some(child) => node = child,
                // Placeholder child: no trained key descends here; answer
                // with the interval floor to stay total.
                None => return node.children_intervals[class].lo as i64,
            }
        }
    }

    /// Interval reached after descending at most `depth` levels; the
    /// coarse-resolution answer for the key.
    pub fn lookup_resolution(&self, key: u64, depth: usize) -> Interval {
        let input = seed_expand(key, self.input_dim);
        let mut node = &self.root;
        for _ in 0..depth {
            if node.is_leaf() {
                break;
            }
            let class = match &node.model {
                Some(m) => m.classify(key, &input),
                None => 0,
            };
            match node.children.get(class).and_then(|c| c.as_deref()) {
                Some(child) => node = child,
                None => return node.children_intervals[class],
            }
        }
        node.interval
    }

    /// Adds pairs to the tree, retraining only the nodes on the affected
    /// paths. `all_pairs` must be the complete updated pair set (the prior
    /// contents plus `added`).
    pub fn insert_pairs(
        &mut self,
        added: &[(u64, i64)],
        all_pairs: &[(u64, i64)],
        cfg: &TreeConfig,
    ) -> Result<()> {
        if added.is_empty() {
            return Ok(());
        }
        let domain = self.root.interval;
        for &(_, value) in added {
            if !domain.contains(value) {
                return Err(Error::ValueOutOfDomain {
                    value,
                    lo: domain.lo,
                    hi: domain.hi,
                });
            }
        }
        upsert_node(
            &mut self.root,
            added.to_vec(),
            all_pairs.to_vec(),
            cfg,
            rng::fold(cfg.seed, &[0x7EEE]),
        )
    }

    pub fn depth(&self) -> usize {
        fn rec(node: &DnnTreeNode) -> usize {
            1 + node
                .children
                .iter()
                .flatten()
                .map(|c| rec(c))
                .max()
                .unwrap_or(0)
        }
        rec(&self.root)
    }

    pub fn param_count_total(&self) -> usize {
        fn rec(node: &DnnTreeNode) -> usize {
            node.model.as_ref().map_or(0, |m| m.param_count())
                + node.children.iter().flatten().map(|c| rec(c)).sum::<usize>()
        }
        rec(&self.root)
    }

    pub fn node_count(&self) -> usize {
        fn rec(node: &DnnTreeNode) -> usize {
            1 + node.children.iter().flatten().map(|c| rec(c)).sum::<usize>()
        }
        rec(&self.root)
    }
}

fn model_is_exact(model: &NodeModel, class_pairs: &[ClassSample], input_dim: usize) -> bool {
    class_pairs
        .iter()
        .all(|&(key, class)| model.classify(key, &seed_expand(key, input_dim)) == class)
}

fn upsert_node(
    node: &mut DnnTreeNode,
    added: Vec<(u64, i64)>,
    all: Vec<(u64, i64)>,
    cfg: &TreeConfig,
    path_salt: u64,
) -> Result<()> {
    if node.is_leaf() {
        return Ok(());
    }
    let interval = node.interval;
    let chunk = (interval.width() + cfg.fanout as i128 - 1) / cfg.fanout as i128;
    let class_pairs: Vec<ClassSample> = all
        .iter()
        .map(|&(key, value)| (key, child_index(interval, chunk, value)))
        .collect();

    let exact = node
        .model
        .as_ref()
        .is_some_and(|m| model_is_exact(m, &class_pairs, cfg.input_dim));
    if !exact {
        let mut retrained = None;
        if let Some(NodeModel::Net(net)) = &mut node.model {
            // Warm start: the existing net already memorizes the old pairs.
            let samples: Vec<(Vec<f64>, usize)> = class_pairs
                .iter()
                .map(|&(key, class)| (seed_expand(key, cfg.input_dim), class))
                .collect();
            let train_cfg = TrainConfig {
                rng_seed: fold(path_salt, &[all.len() as u64]),
                learning_rate: node_learning_rate(cfg.train.learning_rate, samples.len()),
                ..cfg.train
            };
            let report = nn::train_storable(net, &samples, &train_cfg)?;
            if report.converged {
                retrained = Some(node.model.take().unwrap());
            }
        }
        node.model = Some(match retrained {
            Some(m) => m,
            None => train_node_model(
                &class_pairs,
                node.children_intervals.len(),
                cfg,
                path_salt,
                0,
                interval,
            )?,
        });
    }

    // Route the additions to children.
    let n_children = node.children_intervals.len();
    let mut added_by_child: Vec<Vec<(u64, i64)>> = vec![Vec::new(); n_children];
    for &(key, value) in &added {
        added_by_child[child_index(interval, chunk, value)].push((key, value));
    }
    for (idx, child_added) in added_by_child.into_iter().enumerate() {
        if child_added.is_empty() {
            continue;
        }
        let child_all: Vec<(u64, i64)> = all
            .iter()
            .filter(|&&(_, v)| node.children_intervals[idx].contains(v))
            .copied()
            .collect();
        let child_salt = fold(path_salt, &[idx as u64]);
        match &mut node.children[idx] {
            Some(child) => upsert_node(child, child_added, child_all, cfg, child_salt)?,
            slot @ None => {
                *slot = Some(Box::new(build_node(
                    node.children_intervals[idx],
                    &child_all,
                    cfg,
                    child_salt,
                )?));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use std::collections::HashSet;

    fn fast_cfg(seed: u64) -> TreeConfig {
        TreeConfig {
            hidden_width: 24,
            hidden_layers: 2,
            seed,
            train: TrainConfig {
                learning_rate: 0.01,
                max_epochs: 600,
                ..TrainConfig::default()
            },
            ..TreeConfig::default()
        }
    }

    #[test]
    fn seed_expand_contract() {
        assert_eq!(seed_expand(42, 4), seed_expand(42, 4));
        let mut seen = HashSet::new();
        for id in 1..=10_000u64 {
            let v = seed_expand(id, 4);
            assert_eq!(v.len(), 4);
            for &x in &v {
                assert!((-1.0..1.0).contains(&x));
            }
            let bits: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            assert!(seen.insert(bits), "collision at id {id}");
        }
    }

    #[test]
    fn partition_examples() {
        let iv = Interval::new(0, 1000).unwrap();
        let parts = interval_partition(iv, 10).unwrap();
        assert_eq!(parts.len(), 10);
        assert_eq!(parts[0], Interval { lo: 0, hi: 100 });
        assert_eq!(parts[9], Interval { lo: 900, hi: 1000 });

        let small = interval_partition(Interval::new(0, 7).unwrap(), 10).unwrap();
        assert_eq!(small.len(), 7);
        assert!(small.iter().all(|p| p.width() == 1));

        let unit = interval_partition(Interval::new(5, 6).unwrap(), 3).unwrap();
        assert_eq!(unit, vec![Interval { lo: 5, hi: 6 }]);
    }

    #[test]
    fn partition_covers_exactly() {
        let mut rng = SplitMix64::new(6);
        for _ in 0..200 {
            let lo = rng.next_below(1000) as i128 - 500;
            let width = 1 + rng.next_below(5000) as i128;
            let k = 2 + rng.next_below(16) as usize;
            let iv = Interval::new(lo, lo + width).unwrap();
            let parts = interval_partition(iv, k).unwrap();
            assert!(parts.len() <= k);
            assert_eq!(parts[0].lo, iv.lo);
            assert_eq!(parts.last().unwrap().hi, iv.hi);
            for w in parts.windows(2) {
                assert_eq!(w[0].hi, w[1].lo);
            }
        }
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(Interval::new(5, 5).is_err());
        assert!(Interval::new(9, 2).is_err());
    }

    fn random_pairs(n: u64, domain: Interval, seed: u64) -> Vec<(u64, i64)> {
        let mut rng = SplitMix64::new(seed);
        (1..=n)
            .map(|id| {
                let v = domain.lo as i64 + rng.next_below(domain.width() as u64) as i64;
                (id, v)
            })
            .collect()
    }

    #[test]
    fn tree_round_trip() {
        let domain = Interval::new(1, 301).unwrap();
        let pairs = random_pairs(300, domain, 13);
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(1)).unwrap();
        for &(key, value) in &pairs {
            assert_eq!(tree.lookup(key), value, "key {key}");
        }
    }

    #[test]
    fn tree_is_deterministic() {
        let domain = Interval::new(1, 101).unwrap();
        let pairs = random_pairs(60, domain, 3);
        let a = DnnTree::build(&pairs, domain, &fast_cfg(5)).unwrap();
        let b = DnnTree::build(&pairs, domain, &fast_cfg(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_pair_tree() {
        let domain = Interval::new(1, 1001).unwrap();
        let tree = DnnTree::build(&[(7, 423)], domain, &fast_cfg(2)).unwrap();
        assert_eq!(tree.lookup(7), 423);
        // Unknown keys still get some in-domain answer.
        let v = tree.lookup(99999);
        assert!(domain.contains(v));
    }

    #[test]
    fn constant_column_tree() {
        let domain = Interval::new(1, 1001).unwrap();
        let pairs: Vec<(u64, i64)> = (1..=50).map(|id| (id, 700)).collect();
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(4)).unwrap();
        for id in 1..=50 {
            assert_eq!(tree.lookup(id), 700);
        }
        // Every model on the single populated path is a constant.
        fn all_constant(node: &DnnTreeNode) -> bool {
            node.model
                .as_ref()
                .map_or(true, |m| matches!(m, NodeModel::Constant(_)))
                && node.children.iter().flatten().all(|c| all_constant(c))
        }
        assert!(all_constant(&tree.root));
    }

    #[test]
    fn structural_partition_invariant() {
        let domain = Interval::new(1, 501).unwrap();
        let pairs = random_pairs(80, domain, 8);
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(9)).unwrap();
        fn check(node: &DnnTreeNode) {
            if node.children_intervals.is_empty() {
                assert_eq!(node.interval.width(), 1);
                return;
            }
            assert_eq!(node.children_intervals[0].lo, node.interval.lo);
            assert_eq!(node.children_intervals.last().unwrap().hi, node.interval.hi);
            for w in node.children_intervals.windows(2) {
                assert_eq!(w[0].hi, w[1].lo);
            }
            for (child, iv) in node.children.iter().zip(&node.children_intervals) {
                if let Some(c) = child {
                    assert_eq!(c.interval, *iv);
                    check(c);
                }
            }
        }
        check(&tree.root);
    }

    #[test]
    fn resolution_narrows_with_depth() {
        let domain = Interval::new(1, 1001).unwrap();
        let pairs = random_pairs(100, domain, 15);
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(11)).unwrap();
        for &(key, value) in pairs.iter().take(20) {
            let mut prev_width = i128::MAX;
            for depth in 0..=tree.depth() {
                let iv = tree.lookup_resolution(key, depth);
                assert!(iv.contains(value));
                assert!(iv.width() <= prev_width);
                prev_width = iv.width();
            }
            assert_eq!(prev_width, 1);
        }
    }

    #[test]
    fn depth_bound() {
        let domain = Interval::new(1, 1001).unwrap();
        let pairs = random_pairs(120, domain, 19);
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(21)).unwrap();
        // ceil(log_10(1000)) = 3 levels of classifiers plus unit leaves.
        assert!(tree.depth() <= 4);
    }

    #[test]
    fn value_out_of_domain_rejected() {
        let domain = Interval::new(1, 11).unwrap();
        let err = DnnTree::build(&[(1, 99)], domain, &fast_cfg(0));
        assert!(matches!(err, Err(Error::ValueOutOfDomain { .. })));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let domain = Interval::new(1, 11).unwrap();
        let err = DnnTree::build(&[(1, 2), (1, 3)], domain, &fast_cfg(0));
        assert!(err.is_err());
    }

    #[test]
    fn incremental_insert_round_trips() {
        let domain = Interval::new(1, 201).unwrap();
        let mut pairs = random_pairs(60, domain, 31);
        let mut tree = DnnTree::build(&pairs, domain, &fast_cfg(33)).unwrap();
        let mut rng = SplitMix64::new(77);
        for batch in 0..5 {
            let added: Vec<(u64, i64)> = (0..4)
                .map(|i| {
                    (
                        1000 + batch * 10 + i,
                        1 + rng.next_below(200) as i64,
                    )
                })
                .collect();
            pairs.extend_from_slice(&added);
            tree.insert_pairs(&added, &pairs, &fast_cfg(33)).unwrap();
            for &(key, value) in &pairs {
                assert_eq!(tree.lookup(key), value, "key {key}");
            }
        }
    }

    #[test]
    fn wide_domain_sparse_keys() {
        // Ciphertext-style usage: values scattered over the full i64 space.
        let domain = Interval::full();
        let mut rng = SplitMix64::new(41);
        let pairs: Vec<(u64, i64)> = (1..=40).map(|id| (id, rng.next_u64() as i64)).collect();
        let tree = DnnTree::build(&pairs, domain, &fast_cfg(43)).unwrap();
        for &(key, value) in &pairs {
            assert_eq!(tree.lookup(key), value);
        }
    }
}
