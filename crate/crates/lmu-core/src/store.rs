//! Construction, auxiliary indexing, and statistics of the memory unit for
//! one table.
//!
//! A unit pairs trained classifier trees with plain auxiliary data:
//!
//! - `forward`: one tree per attribute, id -> attribute value;
//! - `inverse`: one tree over a folded attribute-vector key -> representative
//!   (minimum) id, verified against forward recovery on use;
//! - per-attribute bundles: trees keyed on a folded (group value, renamed id)
//!   pair that recover the original id and every other column; these drive
//!   equality/range search without touching non-matching groups;
//! - aux: live id set, hashed and sorted (value, count) aggregates per
//!   attribute, and duplicate-vector id lists.
//!
//! Set operations may concatenate units; a unit therefore holds one or more
//! `parts`, each a complete storage for one source table.

use crate::encode::{DnnTree, Interval, TreeConfig};
use crate::error::Error;
use crate::nn::TrainConfig;
use crate::rng::fold;
use crate::table::{GroupIndex, Schema, Table, Tuple, Value};
use crate::Result;
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

const VEC_KEY_SALT: u64 = 0x1AB1_E0_F0_0D;
const SLOT_KEY_SALT: u64 = 0x51_07_5A_17;

/// Folds a full attribute vector into the 64-bit key fed to the inverse
/// tree.
pub fn vec_key(values: &[Value]) -> u64 {
    let words: Vec<u64> = values.iter().map(|&v| v as u64).collect();
    fold(VEC_KEY_SALT, &words)
}

/// Folds a (attribute, group value, renamed id) triple into the key fed to
/// that attribute's bundle trees. Renamed ids are 1-based.
pub fn slot_key(attr: usize, value: Value, renamed_id: u64) -> u64 {
    fold(SLOT_KEY_SALT, &[attr as u64, value as u64, renamed_id])
}

/// Counts bundle slot recoveries, so tests can assert the equality-search
/// work bound (`cnt_k` recoveries for a key with count `cnt_k`).
static BUNDLE_LOOKUPS: AtomicU64 = AtomicU64::new(0);

pub fn bundle_lookup_count() -> u64 {
    BUNDLE_LOOKUPS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmuConfig {
    pub fanout: usize,
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub max_width: usize,
    pub seed: u64,
    pub train: TrainConfig,
    /// Tombstoned-slot fraction above which an attribute's bundle is
    /// compacted and retrained.
    pub compact_threshold: f64,
}

impl Default for LmuConfig {
    fn default() -> Self {
        let tree = TreeConfig::default();
        Self {
            fanout: tree.fanout,
            input_dim: tree.input_dim,
            hidden_width: tree.hidden_width,
            hidden_layers: tree.hidden_layers,
            max_width: tree.max_width,
            seed: 0,
            train: tree.train,
            compact_threshold: 0.25,
        }
    }
}

impl LmuConfig {
    /// A lighter architecture for small desk-scale tables; same contracts,
    /// faster training.
    pub fn light(seed: u64) -> Self {
        Self {
            hidden_width: 24,
            hidden_layers: 2,
            seed,
            ..Self::default()
        }
    }

    pub fn tree_cfg(&self, salt: u64) -> TreeConfig {
        TreeConfig {
            fanout: self.fanout,
            input_dim: self.input_dim,
            hidden_width: self.hidden_width,
            hidden_layers: self.hidden_layers,
            max_width: self.max_width,
            max_split_depth: 6,
            seed: fold(self.seed, &[salt]),
            train: self.train,
        }
    }

    pub(crate) fn forward_salt(j: usize) -> u64 {
        fold(1, &[j as u64])
    }

    pub(crate) fn inverse_salt() -> u64 {
        fold(2, &[])
    }

    pub(crate) fn bundle_salt(j: usize, out: usize) -> u64 {
        fold(3, &[j as u64, out as u64])
    }
}

/// Plain auxiliary data: aggregates and the live id set.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxInfo {
    /// Inclusive id range `[1, N]`; `(1, 0)` when empty. Unused in
    /// encrypted mode (ids live in ciphertext space).
    pub id_range: (u64, u64),
    pub live_ids: BTreeSet<u64>,
    /// Hashed per-attribute aggregates: value -> live count.
    pub hf: Vec<HashMap<Value, u32>>,
    /// Sorted per-attribute aggregates, ascending by value.
    pub bt: Vec<Vec<(Value, u32)>>,
    /// Attribute vectors stored more than once: folded key -> sorted ids.
    pub dup: HashMap<u64, Vec<u64>>,
}

/// Per-attribute search bundle: renaming plus the trees that recover full
/// tuples from (group value, renamed id) keys.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrBundle {
    pub group: GroupIndex,
    /// slot key -> original id.
    pub id_tree: DnnTree,
    /// slot key -> value of each *other* attribute, ascending attribute
    /// order with the bundle's own attribute skipped.
    pub attr_trees: Vec<DnnTree>,
}

impl AttrBundle {
    /// Position of attribute `other` within `attr_trees` for a bundle over
    /// attribute `own`.
    pub fn tree_slot(own: usize, other: usize) -> usize {
        if other < own {
            other
        } else {
            other - 1
        }
    }
}

/// Complete storage for one source table.
#[derive(Debug, Clone, PartialEq)]
pub struct LmuPart {
    pub schema: Schema,
    pub aux: AuxInfo,
    pub forward: Vec<DnnTree>,
    pub inverse: DnnTree,
    pub bundles: Vec<AttrBundle>,
    /// Output domain used by id-valued trees (holds headroom for inserts).
    pub id_domain: Interval,
    pub config: LmuConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageMode {
    Plain,
    Encrypted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lmu {
    pub mode: StorageMode,
    pub parts: Vec<LmuPart>,
}

fn id_headroom(max_id: u64) -> Interval {
    let hi = (2 * max_id.max(32)).next_power_of_two() as i128 + 1;
    Interval::new(1, hi).expect("nonempty")
}

/// Per-phase training effort recorded while a part is built, for build
/// reports. Epoch counts come from the global trainer counter, so they are
/// only meaningful when builds run one at a time.
#[derive(Debug, Clone, Default)]
pub struct BuildLog {
    pub forward_epochs: Vec<u64>,
    pub inverse_epochs: u64,
    pub bundle_epochs: Vec<u64>,
}

fn build_part(table: &Table, cfg: &LmuConfig, id_domain: Interval) -> Result<(LmuPart, BuildLog)> {
    table.validate()?;
    let d = table.schema.arity();
    let max_id = table.tuples.iter().map(|t| t.id).max().unwrap_or(0);
    for t in &table.tuples {
        if !id_domain.contains(t.id as i64) {
            return Err(Error::InvalidTable(format!("id {} outside id domain", t.id)));
        }
    }
    let mut log = BuildLog::default();

    // Forward trees: id -> value, one per attribute.
    let mut forward = Vec::with_capacity(d);
    for j in 0..d {
        let pairs: Vec<(u64, i64)> = table.tuples.iter().map(|t| (t.id, t.values[j])).collect();
        let before = crate::nn::epochs_trained();
        forward.push(DnnTree::build(
            &pairs,
            table.schema.attrs[j].domain,
            &cfg.tree_cfg(LmuConfig::forward_salt(j)),
        )?);
        log.forward_epochs.push(crate::nn::epochs_trained() - before);
    }

    // Inverse tree: folded vector key -> minimum matching id.
    let mut by_vec: HashMap<u64, Vec<u64>> = HashMap::new();
    for t in &table.tuples {
        by_vec.entry(vec_key(&t.values)).or_default().push(t.id);
    }
    let mut inverse_pairs: Vec<(u64, i64)> = Vec::with_capacity(by_vec.len());
    let mut dup = HashMap::new();
    for (key, mut ids) in by_vec {
        ids.sort_unstable();
        inverse_pairs.push((key, ids[0] as i64));
        if ids.len() > 1 {
            dup.insert(key, ids);
        }
    }
    inverse_pairs.sort_unstable();
    let before = crate::nn::epochs_trained();
    let inverse = DnnTree::build(
        &inverse_pairs,
        id_domain,
        &cfg.tree_cfg(LmuConfig::inverse_salt()),
    )?;
    log.inverse_epochs = crate::nn::epochs_trained() - before;

    // Per-attribute bundles and aggregates.
    let id_of: HashMap<u64, &Tuple> = table.tuples.iter().map(|t| (t.id, t)).collect();
    let mut bundles = Vec::with_capacity(d);
    let mut hf = Vec::with_capacity(d);
    let mut bt = Vec::with_capacity(d);
    for j in 0..d {
        let bundle_start = crate::nn::epochs_trained();
        let group = GroupIndex::build(table, j)?;
        let mut id_pairs = Vec::with_capacity(table.len());
        let mut attr_pairs: Vec<Vec<(u64, i64)>> = vec![Vec::with_capacity(table.len()); d - 1];
        for g in &group.groups {
            for (slot, id) in g.slots.iter().enumerate() {
                let id = id.expect("fresh group index has no tombstones");
                let key = slot_key(j, g.value, slot as u64 + 1);
                id_pairs.push((key, id as i64));
                let tuple = id_of[&id];
                for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
                    attr_pairs[out].push((key, tuple.values[jj]));
                }
            }
        }
        let id_tree = DnnTree::build(
            &id_pairs,
            id_domain,
            &cfg.tree_cfg(LmuConfig::bundle_salt(j, 0)),
        )?;
        let mut attr_trees = Vec::with_capacity(d - 1);
        for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
            attr_trees.push(DnnTree::build(
                &attr_pairs[out],
                table.schema.attrs[jj].domain,
                &cfg.tree_cfg(LmuConfig::bundle_salt(j, jj + 1)),
            )?);
        }
        let aggregates = group.aggregates();
        hf.push(aggregates.iter().map(|&(v, c)| (v, c as u32)).collect());
        bt.push(aggregates.iter().map(|&(v, c)| (v, c as u32)).collect());
        bundles.push(AttrBundle {
            group,
            id_tree,
            attr_trees,
        });
        log.bundle_epochs
            .push(crate::nn::epochs_trained() - bundle_start);
    }

    let part = LmuPart {
        schema: table.schema.clone(),
        aux: AuxInfo {
            id_range: (1, max_id),
            live_ids: table.tuples.iter().map(|t| t.id).collect(),
            hf,
            bt,
            dup,
        },
        forward,
        inverse,
        bundles,
        id_domain,
        config: *cfg,
    };
    Ok((part, log))
}

/// Trains a complete memory unit for `table`. Every tree reaches 100%
/// accuracy on its training pairs or construction fails.
pub fn build_lmu(table: &Table, cfg: &LmuConfig) -> Result<Lmu> {
    Ok(build_lmu_logged(table, cfg)?.0)
}

/// [`build_lmu`] plus the per-phase training effort log.
pub fn build_lmu_logged(table: &Table, cfg: &LmuConfig) -> Result<(Lmu, BuildLog)> {
    let max_id = table.tuples.iter().map(|t| t.id).max().unwrap_or(0);
    let (part, log) = build_part(table, cfg, id_headroom(max_id))?;
    Ok((
        Lmu {
            mode: StorageMode::Plain,
            parts: vec![part],
        },
        log,
    ))
}

pub(crate) fn build_part_with_domain(
    table: &Table,
    cfg: &LmuConfig,
    id_domain: Interval,
) -> Result<LmuPart> {
    Ok(build_part(table, cfg, id_domain)?.0)
}

impl LmuPart {
    /// Recovers one tuple's values through the forward trees.
    pub fn recover(&self, id: u64) -> Vec<Value> {
        self.forward.iter().map(|t| t.lookup(id)).collect()
    }

    /// Recovers a full tuple from a bundle slot (group value + 1-based
    /// renamed id). Counts toward the bundle lookup total.
    pub fn recover_slot(&self, attr: usize, value: Value, renamed_id: u64) -> Tuple {
        BUNDLE_LOOKUPS.fetch_add(1, Ordering::Relaxed);
        let bundle = &self.bundles[attr];
        let key = slot_key(attr, value, renamed_id);
        let id = bundle.id_tree.lookup(key) as u64;
        let d = self.schema.arity();
        let mut values = vec![0; d];
        values[attr] = value;
        for jj in (0..d).filter(|&jj| jj != attr) {
            values[jj] = bundle.attr_trees[AttrBundle::tree_slot(attr, jj)].lookup(key);
        }
        Tuple { id, values }
    }

    pub fn scan(&self) -> Vec<Tuple> {
        self.aux
            .live_ids
            .iter()
            .map(|&id| Tuple {
                id,
                values: self.recover(id),
            })
            .collect()
    }

    /// True iff some live tuple carries exactly `values`.
    pub fn exists_values(&self, values: &[Value]) -> bool {
        let key = vec_key(values);
        let candidate = self.inverse.lookup(key) as u64;
        if self.aux.live_ids.contains(&candidate) && self.recover(candidate) == values {
            return true;
        }
        if let Some(ids) = self.aux.dup.get(&key) {
            return ids
                .iter()
                .any(|id| self.aux.live_ids.contains(id) && self.recover(*id) == values);
        }
        false
    }

    /// Live ids of tuples carrying exactly `values`.
    pub fn ids_with_values(&self, values: &[Value]) -> Vec<u64> {
        let key = vec_key(values);
        if let Some(ids) = self.aux.dup.get(&key) {
            return ids
                .iter()
                .copied()
                .filter(|id| self.aux.live_ids.contains(id) && self.recover(*id) == values)
                .collect();
        }
        let candidate = self.inverse.lookup(key) as u64;
        if self.aux.live_ids.contains(&candidate) && self.recover(candidate) == values {
            vec![candidate]
        } else {
            Vec::new()
        }
    }

    pub fn live_len(&self) -> usize {
        self.aux.live_ids.len()
    }
}

impl Lmu {
    pub fn schema(&self) -> &Schema {
        &self.parts[0].schema
    }

    /// Assembles every live tuple through the forward trees, part by part,
    /// ascending by id within a part.
    pub fn seq_scan(&self) -> Vec<Tuple> {
        self.parts.iter().flat_map(|p| p.scan()).collect()
    }

    pub fn exists_id(&self, id: u64) -> bool {
        self.parts.iter().any(|p| p.aux.live_ids.contains(&id))
    }

    /// Existence by attribute vector: inverse lookup plus forward
    /// verification (an unknown vector yields a candidate that fails the
    /// check).
    pub fn exists_attrs(&self, values: &[Value]) -> Result<bool> {
        if values.len() != self.schema().arity() {
            return Err(Error::DimensionMismatch {
                expected: self.schema().arity(),
                got: values.len(),
            });
        }
        Ok(self.parts.iter().any(|p| p.exists_values(values)))
    }

    pub fn live_len(&self) -> usize {
        self.parts.iter().map(|p| p.live_len()).sum()
    }

    pub fn stats(&self) -> LmuStats {
        let total_params: usize = self
            .parts
            .iter()
            .map(|p| {
                p.forward
                    .iter()
                    .chain(std::iter::once(&p.inverse))
                    .chain(p.bundles.iter().flat_map(|b| {
                        std::iter::once(&b.id_tree).chain(b.attr_trees.iter())
                    }))
                    .map(|t| t.param_count_total())
                    .sum::<usize>()
            })
            .sum();
        let serialized_bytes = crate::persist::to_bytes(self).map(|b| b.len()).unwrap_or(0);
        let n = self.live_len();
        let d = self.schema().arity();
        let raw_table_bytes = n * d * 8 + n * 8;
        let forward_depths = self.parts[0].forward.iter().map(|t| t.depth()).collect();
        LmuStats {
            total_params,
            serialized_bytes,
            raw_table_bytes,
            overhead_ratio: if raw_table_bytes > 0 {
                serialized_bytes as f64 / raw_table_bytes as f64
            } else {
                f64::INFINITY
            },
            forward_depths,
            live_tuples: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmuStats {
    pub total_params: usize,
    pub serialized_bytes: usize,
    pub raw_table_bytes: usize,
    pub overhead_ratio: f64,
    pub forward_depths: Vec<usize>,
    pub live_tuples: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::table::{uniform_schema, AttrDef};

    pub(crate) fn random_table(n: usize, d: usize, domain: Interval, seed: u64) -> Table {
        let mut rng = SplitMix64::new(seed);
        let schema = uniform_schema(d, domain);
        let tuples = (1..=n as u64)
            .map(|id| Tuple {
                id,
                values: (0..d)
                    .map(|_| domain.lo as i64 + rng.next_below(domain.width() as u64) as i64)
                    .collect(),
            })
            .collect();
        Table::new(schema, tuples).unwrap()
    }

    #[test]
    fn build_and_scan_round_trip() {
        let table = random_table(60, 3, Interval::new(1, 101).unwrap(), 5);
        let lmu = build_lmu(&table, &LmuConfig::light(1)).unwrap();
        assert_eq!(lmu.seq_scan(), table.tuples);
    }

    #[test]
    fn single_tuple_unit() {
        let table = random_table(1, 2, Interval::new(1, 1001).unwrap(), 9);
        let lmu = build_lmu(&table, &LmuConfig::light(2)).unwrap();
        assert_eq!(lmu.seq_scan(), table.tuples);
        assert!(lmu.exists_id(1));
        assert!(!lmu.exists_id(2));
    }

    #[test]
    fn existence_checks() {
        let table = random_table(40, 2, Interval::new(1, 51).unwrap(), 11);
        let lmu = build_lmu(&table, &LmuConfig::light(3)).unwrap();
        for t in &table.tuples {
            assert!(lmu.exists_attrs(&t.values).unwrap(), "tuple {}", t.id);
        }
        // Vectors differing from every stored tuple in one position.
        let mut probe = table.tuples[0].values.clone();
        probe[0] = 50;
        while table.tuples.iter().any(|t| t.values == probe) {
            probe[1] = (probe[1] % 50) + 1;
        }
        assert!(!lmu.exists_attrs(&probe).unwrap());
        assert!(lmu.exists_attrs(&[1]).is_err());
    }

    #[test]
    fn duplicate_vectors_resolve_to_min_id() {
        let schema = uniform_schema(2, Interval::new(1, 11).unwrap());
        let tuples = vec![
            Tuple { id: 1, values: vec![3, 4] },
            Tuple { id: 2, values: vec![3, 4] },
            Tuple { id: 3, values: vec![5, 6] },
        ];
        let table = Table::new(schema, tuples).unwrap();
        let lmu = build_lmu(&table, &LmuConfig::light(4)).unwrap();
        let part = &lmu.parts[0];
        assert_eq!(part.inverse.lookup(vec_key(&[3, 4])) as u64, 1);
        assert_eq!(part.ids_with_values(&[3, 4]), vec![1, 2]);
        assert!(lmu.exists_attrs(&[3, 4]).unwrap());
        assert_eq!(lmu.seq_scan(), table.tuples);
    }

    #[test]
    fn aggregates_agree_between_hash_and_sorted() {
        let table = random_table(50, 3, Interval::new(1, 11).unwrap(), 21);
        let lmu = build_lmu(&table, &LmuConfig::light(5)).unwrap();
        let part = &lmu.parts[0];
        for j in 0..3 {
            let bt = &part.aux.bt[j];
            assert!(bt.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(bt.len(), part.aux.hf[j].len());
            for &(v, c) in bt {
                assert_eq!(part.aux.hf[j][&v], c);
            }
            let total: u32 = bt.iter().map(|&(_, c)| c).sum();
            assert_eq!(total as usize, part.live_len());
        }
    }

    #[test]
    fn stats_accounting() {
        let table = random_table(30, 2, Interval::new(1, 51).unwrap(), 31);
        let lmu = build_lmu(&table, &LmuConfig::light(6)).unwrap();
        let stats = lmu.stats();
        assert_eq!(stats.live_tuples, 30);
        assert_eq!(stats.raw_table_bytes, 30 * 2 * 8 + 30 * 8);
        assert!(stats.total_params > 0);
        assert!(stats.serialized_bytes > 0);
    }

    #[test]
    fn empty_table_unit() {
        let schema = Schema::new(vec![AttrDef {
            name: "A1".into(),
            domain: Interval::new(1, 11).unwrap(),
        }])
        .unwrap();
        let table = Table::new(schema, vec![]).unwrap();
        let lmu = build_lmu(&table, &LmuConfig::light(7)).unwrap();
        assert!(lmu.seq_scan().is_empty());
        assert!(!lmu.exists_id(1));
    }
}
