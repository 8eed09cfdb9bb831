//! Relational operators and maintenance over memory units.
//!
//! Every operator is defined to be equivalent to its brute-force relational
//! counterpart over the scanned table; the test suites enforce that
//! equivalence against in-memory oracles. Equality and range selection go
//! through the per-attribute aggregates and bundle trees and never touch
//! non-matching groups.

use crate::encode::Interval;
use crate::error::Error;
use crate::store::{vec_key, Lmu, LmuPart, StorageMode};
use crate::table::{Group, Table, Tuple, Value};
use crate::Result;
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateKind {
    Equals(Value),
    /// Inclusive on both ends.
    Range(Value, Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Predicate {
    pub attr: usize,
    pub kind: PredicateKind,
}

impl Predicate {
    pub fn validate(&self, arity: usize) -> Result<()> {
        if self.attr >= arity {
            return Err(Error::UnknownAttribute(format!("#{}", self.attr)));
        }
        if let PredicateKind::Range(lo, hi) = self.kind {
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "range [{lo}, {hi}] has min > max"
                )));
            }
        }
        Ok(())
    }

    pub fn matches(&self, value: Value) -> bool {
        match self.kind {
            PredicateKind::Equals(c) => value == c,
            PredicateKind::Range(lo, hi) => (lo..=hi).contains(&value),
        }
    }
}

/// Materialized operator output: named columns and value rows. Identifier
/// columns are ordinary columns (named `id`, or `r_id`/`s_id` for binary
/// operators).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultSet {
    fn tuple_columns(lmu: &Lmu) -> Vec<String> {
        std::iter::once("id".to_string())
            .chain(lmu.schema().attrs.iter().map(|a| a.name.clone()))
            .collect()
    }

    fn tuple_row(t: &Tuple) -> Vec<Value> {
        std::iter::once(t.id as Value)
            .chain(t.values.iter().copied())
            .collect()
    }

    /// Rows sorted for order-insensitive (multiset) comparison.
    pub fn sorted_rows(&self) -> Vec<Vec<Value>> {
        let mut rows = self.rows.clone();
        rows.sort_unstable();
        rows
    }
}

/// Bag projection onto a subset of attributes, in scan order.
pub fn project(lmu: &Lmu, attrs: &[String]) -> Result<ResultSet> {
    if attrs.is_empty() {
        return Err(Error::InvalidParameter("empty projection list".into()));
    }
    let idx: Vec<usize> = attrs
        .iter()
        .map(|name| lmu.schema().attr_index(name))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for part in &lmu.parts {
        for t in part.scan() {
            rows.push(
                std::iter::once(t.id as Value)
                    .chain(idx.iter().map(|&j| t.values[j]))
                    .collect(),
            );
        }
    }
    Ok(ResultSet {
        columns: std::iter::once("id".to_string())
            .chain(attrs.iter().cloned())
            .collect(),
        rows,
    })
}

fn group_rows(part: &LmuPart, attr: usize, group: &Group) -> Vec<Tuple> {
    group
        .slots
        .iter()
        .enumerate()
        .filter(|(_, slot)| slot.is_some())
        .map(|(i, _)| part.recover_slot(attr, group.value, i as u64 + 1))
        .collect()
}

fn collect_eq(lmu: &Lmu, attr: usize, c: Value) -> Vec<Tuple> {
    let mut out = Vec::new();
    for part in &lmu.parts {
        // Hash-file probe first; absent keys cost nothing.
        if !part.aux.hf[attr].contains_key(&c) {
            continue;
        }
        let group = part.bundles[attr]
            .group
            .group_for_value(c)
            .expect("aggregate key has a group");
        out.extend(group_rows(part, attr, group));
    }
    out
}

/// Equality selection through the hashed aggregates and the attribute's
/// bundle trees; exactly `cnt_k` slot recoveries for a key of count
/// `cnt_k`.
pub fn select_eq(lmu: &Lmu, attr: &str, c: Value) -> Result<ResultSet> {
    let j = lmu.schema().attr_index(attr)?;
    Ok(ResultSet {
        columns: ResultSet::tuple_columns(lmu),
        rows: collect_eq(lmu, j, c).iter().map(ResultSet::tuple_row).collect(),
    })
}

fn collect_range(lmu: &Lmu, attr: usize, c_min: Value, c_max: Value) -> Vec<Tuple> {
    let mut out = Vec::new();
    for part in &lmu.parts {
        let bt = &part.aux.bt[attr];
        let start = bt.partition_point(|&(v, _)| v < c_min);
        for &(v, _) in &bt[start..] {
            if v > c_max {
                break;
            }
            let group = part.bundles[attr]
                .group
                .group_for_value(v)
                .expect("aggregate key has a group");
            out.extend(group_rows(part, attr, group));
        }
    }
    out
}

/// Range selection through the sorted aggregates. Unsupported in encrypted
/// mode (the cipher is not order-preserving).
pub fn select_range(lmu: &Lmu, attr: &str, c_min: Value, c_max: Value) -> Result<ResultSet> {
    if lmu.mode == StorageMode::Encrypted {
        return Err(Error::UnsupportedSecure("range selection"));
    }
    if c_min > c_max {
        return Err(Error::InvalidParameter(format!(
            "range [{c_min}, {c_max}] has min > max"
        )));
    }
    let j = lmu.schema().attr_index(attr)?;
    Ok(ResultSet {
        columns: ResultSet::tuple_columns(lmu),
        rows: collect_range(lmu, j, c_min, c_max)
            .iter()
            .map(ResultSet::tuple_row)
            .collect(),
    })
}

/// Estimated number of matching tuples, from the exact aggregate counts.
fn selectivity(lmu: &Lmu, pred: &Predicate) -> u64 {
    lmu.parts
        .iter()
        .map(|part| match pred.kind {
            PredicateKind::Equals(c) => {
                *part.aux.hf[pred.attr].get(&c).unwrap_or(&0) as u64
            }
            PredicateKind::Range(lo, hi) => part.aux.bt[pred.attr]
                .iter()
                .filter(|&&(v, _)| (lo..=hi).contains(&v))
                .map(|&(_, c)| c as u64)
                .sum(),
        })
        .sum()
}

/// Conjunctive multi-attribute selection: fetch candidates through the most
/// selective predicate's index, refine the rest on recovered tuples.
pub fn select_range_multi(lmu: &Lmu, predicates: &[Predicate]) -> Result<ResultSet> {
    if lmu.mode == StorageMode::Encrypted {
        return Err(Error::UnsupportedSecure("range selection"));
    }
    if predicates.is_empty() {
        return Err(Error::InvalidParameter("no predicates".into()));
    }
    let arity = lmu.schema().arity();
    let mut seen = BTreeSet::new();
    for p in predicates {
        p.validate(arity)?;
        if !seen.insert(p.attr) {
            return Err(Error::InvalidParameter(format!(
                "duplicate predicate on attribute #{}",
                p.attr
            )));
        }
    }
    let driver = predicates
        .iter()
        .min_by_key(|p| selectivity(lmu, p))
        .expect("nonempty");
    let candidates = match driver.kind {
        PredicateKind::Equals(c) => collect_eq(lmu, driver.attr, c),
        PredicateKind::Range(lo, hi) => collect_range(lmu, driver.attr, lo, hi),
    };
    let rows = candidates
        .iter()
        .filter(|t| {
            predicates
                .iter()
                .all(|p| p.attr == driver.attr || p.matches(t.values[p.attr]))
        })
        .map(ResultSet::tuple_row)
        .collect();
    Ok(ResultSet {
        columns: ResultSet::tuple_columns(lmu),
        rows,
    })
}

fn pair_columns(r: &Lmu, s: &Lmu) -> Vec<String> {
    std::iter::once("r_id".to_string())
        .chain(r.schema().attrs.iter().map(|a| format!("r_{}", a.name)))
        .chain(std::iter::once("s_id".to_string()))
        .chain(s.schema().attrs.iter().map(|a| format!("s_{}", a.name)))
        .collect()
}

fn pair_row(r: &Tuple, s: &Tuple) -> Vec<Value> {
    std::iter::once(r.id as Value)
        .chain(r.values.iter().copied())
        .chain(std::iter::once(s.id as Value))
        .chain(s.values.iter().copied())
        .collect()
}

/// All tuple pairs, outer order by r scan position then s scan position.
pub fn cartesian(r: &Lmu, s: &Lmu) -> Result<ResultSet> {
    let r_rows = r.seq_scan();
    let s_rows = s.seq_scan();
    let mut rows = Vec::with_capacity(r_rows.len() * s_rows.len());
    for rt in &r_rows {
        for st in &s_rows {
            rows.push(pair_row(rt, st));
        }
    }
    Ok(ResultSet {
        columns: pair_columns(r, s),
        rows,
    })
}

/// Equi-join: merge the two sorted aggregate indexes on equal keys, then
/// recover each matching group once per side and emit the cross pairs.
pub fn join_eq(r: &Lmu, r_attr: &str, s: &Lmu, s_attr: &str) -> Result<ResultSet> {
    let j = r.schema().attr_index(r_attr)?;
    let l = s.schema().attr_index(s_attr)?;
    let keys = |lmu: &Lmu, attr: usize| -> BTreeSet<Value> {
        lmu.parts
            .iter()
            .flat_map(|p| p.aux.bt[attr].iter().map(|&(v, _)| v))
            .collect()
    };
    let common: Vec<Value> = keys(r, j).intersection(&keys(s, l)).copied().collect();
    let mut rows = Vec::new();
    for v in common {
        let r_group = collect_eq(r, j, v);
        let s_group = collect_eq(s, l, v);
        for rt in &r_group {
            for st in &s_group {
                rows.push(pair_row(rt, st));
            }
        }
    }
    Ok(ResultSet {
        columns: pair_columns(r, s),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOpKind {
    Union,
    Intersect,
    Difference,
}

/// Removes `id` from a part's auxiliary data only; the trained weights are
/// untouched and the tuple becomes unreachable.
fn aux_remove(part: &mut LmuPart, id: u64, values: &[Value]) {
    part.aux.live_ids.remove(&id);
    for (j, &v) in values.iter().enumerate() {
        if let Some(cnt) = part.aux.hf[j].get_mut(&v) {
            *cnt -= 1;
            if *cnt == 0 {
                part.aux.hf[j].remove(&v);
            }
        }
        if let Ok(pos) = part.aux.bt[j].binary_search_by_key(&v, |&(k, _)| k) {
            part.aux.bt[j][pos].1 -= 1;
            if part.aux.bt[j][pos].1 == 0 {
                part.aux.bt[j].remove(pos);
            }
        }
        let group_index = &mut part.bundles[j].group;
        if let Some((value, slot)) = group_index.by_id.remove(&id) {
            debug_assert_eq!(value, v);
            let gpos = group_index
                .groups
                .binary_search_by_key(&value, |g| g.value)
                .expect("renamed id has a group");
            group_index.groups[gpos].slots[slot] = None;
        }
    }
    let key = vec_key(values);
    if let Some(ids) = part.aux.dup.get_mut(&key) {
        ids.retain(|&i| i != id);
        if ids.is_empty() {
            part.aux.dup.remove(&key);
        }
    }
}

/// Set operations with set semantics over attribute vectors. The result is
/// a new unit assembled from clones of the operand storages with edited
/// auxiliary data, with no retraining.
pub fn set_op(r: &Lmu, s: &Lmu, kind: SetOpKind) -> Result<Lmu> {
    if r.schema() != s.schema() {
        return Err(Error::SchemaMismatch(
            "set operands must share a schema".into(),
        ));
    }
    // Scan the smaller operand and probe the other by attribute vector.
    let (small, large, small_is_r) = if r.live_len() <= s.live_len() {
        (r, s, true)
    } else {
        (s, r, false)
    };
    let mut common_r: BTreeSet<u64> = BTreeSet::new();
    let mut common_s: BTreeSet<u64> = BTreeSet::new();
    for t in small.seq_scan() {
        let other_ids: Vec<u64> = large
            .parts
            .iter()
            .flat_map(|p| p.ids_with_values(&t.values))
            .collect();
        if !other_ids.is_empty() {
            let (own, other) = if small_is_r {
                (&mut common_r, &mut common_s)
            } else {
                (&mut common_s, &mut common_r)
            };
            own.insert(t.id);
            other.extend(other_ids);
        }
    }

    let remove_ids = |lmu: &Lmu, ids: &BTreeSet<u64>| -> Vec<LmuPart> {
        let mut parts = lmu.parts.clone();
        for part in &mut parts {
            let doomed: Vec<u64> = part
                .aux
                .live_ids
                .iter()
                .copied()
                .filter(|id| ids.contains(id))
                .collect();
            for id in doomed {
                let values = part.recover(id);
                aux_remove(part, id, &values);
            }
        }
        parts
    };

    let parts = match kind {
        // Both storages; common vectors contribute only the copy in r.
        SetOpKind::Union => {
            let mut parts = r.parts.clone();
            parts.extend(remove_ids(s, &common_s));
            parts
        }
        SetOpKind::Intersect => {
            let keep = common_r;
            let drop: BTreeSet<u64> = r
                .parts
                .iter()
                .flat_map(|p| p.aux.live_ids.iter().copied())
                .filter(|id| !keep.contains(id))
                .collect();
            remove_ids(r, &drop)
        }
        SetOpKind::Difference => remove_ids(r, &common_r),
    };
    Ok(Lmu {
        mode: r.mode,
        parts,
    })
}

fn single_part(lmu: &mut Lmu) -> Result<&mut LmuPart> {
    if lmu.parts.len() != 1 {
        return Err(Error::MultiPartMaintenance);
    }
    Ok(&mut lmu.parts[0])
}

/// Next free identifier (`N + 1` for a freshly built unit).
pub fn next_id(lmu: &Lmu) -> u64 {
    lmu.parts
        .iter()
        .map(|p| p.aux.id_range.1)
        .max()
        .unwrap_or(0)
        + 1
}

/// Inserts one tuple; see [`insert_batch`].
pub fn insert(lmu: &mut Lmu, tuple: Tuple) -> Result<()> {
    insert_batch(lmu, vec![tuple])
}

/// Batch insertion with a single retrain pass: extends the auxiliary data,
/// then retrains only the affected tree paths (warm-started) over the
/// updated table.
pub fn insert_batch(lmu: &mut Lmu, tuples: Vec<Tuple>) -> Result<()> {
    if tuples.is_empty() {
        return Ok(());
    }
    let part = single_part(lmu)?;
    let d = part.schema.arity();
    {
        let mut new_ids = BTreeSet::new();
        for t in &tuples {
            if t.values.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: t.values.len(),
                });
            }
            for (v, a) in t.values.iter().zip(&part.schema.attrs) {
                if !a.domain.contains(*v) {
                    return Err(Error::ValueOutOfDomain {
                        value: *v,
                        lo: a.domain.lo,
                        hi: a.domain.hi,
                    });
                }
            }
            if part.aux.live_ids.contains(&t.id) || !new_ids.insert(t.id) {
                return Err(Error::DuplicateId(t.id));
            }
        }
    }

    let mut current = part.scan();
    current.extend(tuples.iter().cloned());
    let updated = current;
    let max_id = updated.iter().map(|t| t.id).max().unwrap_or(0);

    // Identifier-valued trees must be able to express every new id; grow
    // the output domain and rebuild them when the headroom runs out.
    if !part.id_domain.contains(max_id as i64) {
        rebuild_id_trees(part, &updated, max_id)?;
    } else {
        // Inverse tree: recompute the representative-id pair set and feed
        // the changed pairs through a path retrain.
        let (prev_pairs, _) = inverse_pairs(&part.scan_pairs_cache(&updated, tuples.len()));
        let (new_pairs, dup) = inverse_pairs(&updated);
        let added: Vec<(u64, i64)> = new_pairs
            .iter()
            .filter(|p| !prev_pairs.contains(p))
            .copied()
            .collect();
        part.inverse.insert_pairs(
            &added,
            &new_pairs,
            &part.config.tree_cfg(crate::store::LmuConfig::inverse_salt()),
        )?;
        part.aux.dup = dup;
    }

    // Forward trees.
    for j in 0..d {
        let added: Vec<(u64, i64)> = tuples.iter().map(|t| (t.id, t.values[j])).collect();
        let all: Vec<(u64, i64)> = updated.iter().map(|t| (t.id, t.values[j])).collect();
        let cfg = part.config.tree_cfg(crate::store::LmuConfig::forward_salt(j));
        part.forward[j].insert_pairs(&added, &all, &cfg)?;
    }

    // Bundles: new slots are appended at the end of their groups, so
    // existing (value, renamed id) keys keep their meaning.
    let values_of: HashMap<u64, &Vec<Value>> = updated.iter().map(|t| (t.id, &t.values)).collect();
    for j in 0..d {
        let mut added_slots: Vec<(Value, u64, u64)> = Vec::new(); // (value, renamed, id)
        for t in &tuples {
            let v = t.values[j];
            let group_index = &mut part.bundles[j].group;
            let gpos = match group_index.groups.binary_search_by_key(&v, |g| g.value) {
                Ok(p) => p,
                Err(p) => {
                    group_index.groups.insert(
                        p,
                        Group {
                            value: v,
                            slots: Vec::new(),
                        },
                    );
                    p
                }
            };
            group_index.groups[gpos].slots.push(Some(t.id));
            let slot = group_index.groups[gpos].slots.len() - 1;
            group_index.by_id.insert(t.id, (v, slot));
            added_slots.push((v, slot as u64 + 1, t.id));

            *part.aux.hf[j].entry(v).or_insert(0) += 1;
            match part.aux.bt[j].binary_search_by_key(&v, |&(k, _)| k) {
                Ok(p) => part.aux.bt[j][p].1 += 1,
                Err(p) => part.aux.bt[j].insert(p, (v, 1)),
            }
        }
        retrain_bundle_paths(part, j, &added_slots, &values_of)?;
    }

    for t in &tuples {
        part.aux.live_ids.insert(t.id);
    }
    part.aux.id_range.1 = part.aux.id_range.1.max(max_id);
    Ok(())
}

impl LmuPart {
    // The pre-insert table is the updated table minus the trailing
    // additions; avoids a second full scan.
    fn scan_pairs_cache(&self, updated: &[Tuple], added_len: usize) -> Vec<Tuple> {
        updated[..updated.len() - added_len].to_vec()
    }
}

fn inverse_pairs(tuples: &[Tuple]) -> (Vec<(u64, i64)>, HashMap<u64, Vec<u64>>) {
    let mut by_vec: HashMap<u64, Vec<u64>> = HashMap::new();
    for t in tuples {
        by_vec.entry(vec_key(&t.values)).or_default().push(t.id);
    }
    let mut pairs = Vec::with_capacity(by_vec.len());
    let mut dup = HashMap::new();
    for (key, mut ids) in by_vec {
        ids.sort_unstable();
        pairs.push((key, ids[0] as i64));
        if ids.len() > 1 {
            dup.insert(key, ids);
        }
    }
    pairs.sort_unstable();
    (pairs, dup)
}

fn bundle_pair_sets(
    part: &LmuPart,
    j: usize,
    values_of: &HashMap<u64, &Vec<Value>>,
) -> (Vec<(u64, i64)>, Vec<Vec<(u64, i64)>>) {
    let d = part.schema.arity();
    let mut id_pairs = Vec::new();
    let mut attr_pairs: Vec<Vec<(u64, i64)>> = vec![Vec::new(); d - 1];
    for g in &part.bundles[j].group.groups {
        for (slot, id) in g.slots.iter().enumerate() {
            let Some(id) = id else { continue };
            let key = crate::store::slot_key(j, g.value, slot as u64 + 1);
            id_pairs.push((key, *id as i64));
            let values = values_of[id];
            for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
                attr_pairs[out].push((key, values[jj]));
            }
        }
    }
    (id_pairs, attr_pairs)
}

fn retrain_bundle_paths(
    part: &mut LmuPart,
    j: usize,
    added_slots: &[(Value, u64, u64)],
    values_of: &HashMap<u64, &Vec<Value>>,
) -> Result<()> {
    let d = part.schema.arity();
    let (id_all, attr_all) = bundle_pair_sets(part, j, values_of);
    let id_added: Vec<(u64, i64)> = added_slots
        .iter()
        .map(|&(v, renamed, id)| (crate::store::slot_key(j, v, renamed), id as i64))
        .collect();
    let cfg = part
        .config
        .tree_cfg(crate::store::LmuConfig::bundle_salt(j, 0));
    part.bundles[j].id_tree.insert_pairs(&id_added, &id_all, &cfg)?;
    for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
        let added: Vec<(u64, i64)> = added_slots
            .iter()
            .map(|&(v, renamed, id)| {
                (
                    crate::store::slot_key(j, v, renamed),
                    values_of[&id][jj],
                )
            })
            .collect();
        let cfg = part
            .config
            .tree_cfg(crate::store::LmuConfig::bundle_salt(j, jj + 1));
        part.bundles[j].attr_trees[out].insert_pairs(&added, &attr_all[out], &cfg)?;
    }
    Ok(())
}

fn rebuild_id_trees(part: &mut LmuPart, updated: &[Tuple], max_id: u64) -> Result<()> {
    part.id_domain = Interval::new(1, (2 * max_id.max(32)).next_power_of_two() as i128 + 1)
        .expect("nonempty");
    let (pairs, dup) = inverse_pairs(updated);
    part.inverse = crate::encode::DnnTree::build(
        &pairs,
        part.id_domain,
        &part.config.tree_cfg(crate::store::LmuConfig::inverse_salt()),
    )?;
    part.aux.dup = dup;
    // Bundle id trees output identifiers too. They are rebuilt lazily in
    // retrain_bundle_paths, which needs current groups; force a fresh build
    // here over the pre-existing slots.
    let values_of: HashMap<u64, &Vec<Value>> = updated.iter().map(|t| (t.id, &t.values)).collect();
    let d = part.schema.arity();
    for j in 0..d {
        let (id_pairs, _) = bundle_pair_sets(part, j, &values_of);
        part.bundles[j].id_tree = crate::encode::DnnTree::build(
            &id_pairs,
            part.id_domain,
            &part.config.tree_cfg(crate::store::LmuConfig::bundle_salt(j, 0)),
        )?;
    }
    Ok(())
}

/// Tombstones a tuple in the auxiliary data; no retraining. When an
/// attribute's renaming accumulates too many dead slots the bundle is
/// compacted and retrained.
pub fn delete(lmu: &mut Lmu, id: u64) -> Result<()> {
    let part = single_part(lmu)?;
    if !part.aux.live_ids.contains(&id) {
        return Err(Error::UnknownId(id));
    }
    let values = part.recover(id);
    aux_remove(part, id, &values);

    let threshold = part.config.compact_threshold;
    let needs_compaction: Vec<usize> = (0..part.schema.arity())
        .filter(|&j| {
            let g = &part.bundles[j].group;
            let total = g.total_slots();
            total > 0 && g.tombstoned_slots() as f64 > threshold * total as f64
        })
        .collect();
    if !needs_compaction.is_empty() {
        let table = Table {
            schema: part.schema.clone(),
            tuples: part.scan(),
        };
        for j in needs_compaction {
            compact_bundle(part, j, &table)?;
        }
    }
    Ok(())
}

/// Rebuilds one attribute's renaming densely from the live table and
/// retrains its bundle trees.
fn compact_bundle(part: &mut LmuPart, j: usize, table: &Table) -> Result<()> {
    let group = crate::table::GroupIndex::build(table, j)?;
    let d = part.schema.arity();
    let values_of: HashMap<u64, &Vec<Value>> =
        table.tuples.iter().map(|t| (t.id, &t.values)).collect();
    let mut id_pairs = Vec::new();
    let mut attr_pairs: Vec<Vec<(u64, i64)>> = vec![Vec::new(); d - 1];
    for g in &group.groups {
        for (slot, id) in g.slots.iter().enumerate() {
            let id = id.expect("fresh group index has no tombstones");
            let key = crate::store::slot_key(j, g.value, slot as u64 + 1);
            id_pairs.push((key, id as i64));
            for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
                attr_pairs[out].push((key, values_of[&id][jj]));
            }
        }
    }
    part.bundles[j].id_tree = crate::encode::DnnTree::build(
        &id_pairs,
        part.id_domain,
        &part.config.tree_cfg(crate::store::LmuConfig::bundle_salt(j, 0)),
    )?;
    for (out, jj) in (0..d).filter(|&jj| jj != j).enumerate() {
        part.bundles[j].attr_trees[out] = crate::encode::DnnTree::build(
            &attr_pairs[out],
            part.schema.attrs[jj].domain,
            &part.config.tree_cfg(crate::store::LmuConfig::bundle_salt(j, jj + 1)),
        )?;
    }
    part.bundles[j].group = group;
    Ok(())
}

/// Attribute update: retrain-over-updated-table semantics, realized as
/// delete plus insert that keeps the original id.
pub fn update(lmu: &mut Lmu, id: u64, new_values: Vec<Value>) -> Result<()> {
    {
        let part = single_part(lmu)?;
        if !part.aux.live_ids.contains(&id) {
            return Err(Error::UnknownId(id));
        }
        if new_values.len() != part.schema.arity() {
            return Err(Error::DimensionMismatch {
                expected: part.schema.arity(),
                got: new_values.len(),
            });
        }
        for (v, a) in new_values.iter().zip(&part.schema.attrs) {
            if !a.domain.contains(*v) {
                return Err(Error::ValueOutOfDomain {
                    value: *v,
                    lo: a.domain.lo,
                    hi: a.domain.hi,
                });
            }
        }
    }
    delete(lmu, id)?;
    insert(lmu, Tuple { id, values: new_values })
}
