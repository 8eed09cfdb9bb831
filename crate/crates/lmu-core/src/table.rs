//! Relational schema, table, and group-index types.
//!
//! Tables hold integer attributes with unique positive integer identifiers.
//! The group index sorts one attribute's values into groups `(a_k, cnt_k)`
//! and renames each tuple within its group to a fresh id in `[1, cnt_k]`;
//! the composite `(a_k, renamed id)` is the key under which the equality and
//! range search networks store tuples.

use crate::encode::Interval;
use crate::error::Error;
use crate::Result;
use std::collections::{HashMap, HashSet};

pub type Value = i64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrDef {
    pub name: String,
    pub domain: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub attrs: Vec<AttrDef>,
}

impl Schema {
    pub fn new(attrs: Vec<AttrDef>) -> Result<Self> {
        if attrs.is_empty() {
            return Err(Error::InvalidTable("schema needs at least one attribute".into()));
        }
        let mut names = HashSet::new();
        for a in &attrs {
            if !names.insert(a.name.as_str()) {
                return Err(Error::InvalidTable(format!("duplicate attribute name {:?}", a.name)));
            }
        }
        Ok(Self { attrs })
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn attr_index(&self, name: &str) -> Result<usize> {
        self.attrs
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub id: u64,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub schema: Schema,
    pub tuples: Vec<Tuple>,
}

impl Table {
    pub fn new(schema: Schema, tuples: Vec<Tuple>) -> Result<Self> {
        let table = Self { schema, tuples };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.tuples.len());
        for t in &self.tuples {
            if !ids.insert(t.id) {
                return Err(Error::DuplicateId(t.id));
            }
            if t.values.len() != self.schema.arity() {
                return Err(Error::InvalidTable(format!(
                    "tuple {} has {} values, schema has {} attributes",
                    t.id,
                    t.values.len(),
                    self.schema.arity()
                )));
            }
            for (v, a) in t.values.iter().zip(&self.schema.attrs) {
                if !a.domain.contains(*v) {
                    return Err(Error::ValueOutOfDomain {
                        value: *v,
                        lo: a.domain.lo,
                        hi: a.domain.hi,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// One value group: the group's attribute value and the original ids of its
/// members in renamed-id order (`slots[i]` holds renamed id `i + 1`;
/// `None` marks a deleted slot).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub value: Value,
    pub slots: Vec<Option<u64>>,
}

impl Group {
    pub fn live_count(&self) -> usize {
        self.slots.iter().flatten().count()
    }
}

/// Sorted per-attribute grouping with tuple renaming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIndex {
    pub attr: usize,
    /// Ascending by value.
    pub groups: Vec<Group>,
    /// Original id -> (group value, slot index).
    pub by_id: HashMap<u64, (Value, usize)>,
}

impl GroupIndex {
    /// Groups `table` by attribute `attr`, ascending by value; renaming
    /// within a group is stable by original id ascending.
    pub fn build(table: &Table, attr: usize) -> Result<Self> {
        if attr >= table.schema.arity() {
            return Err(Error::UnknownAttribute(format!("#{attr}")));
        }
        let mut sorted: Vec<(Value, u64)> = table
            .tuples
            .iter()
            .map(|t| (t.values[attr], t.id))
            .collect();
        sorted.sort_unstable();

        let mut groups: Vec<Group> = Vec::new();
        let mut by_id = HashMap::with_capacity(sorted.len());
        for (value, id) in sorted {
            if groups.last().map(|g: &Group| g.value) != Some(value) {
                groups.push(Group {
                    value,
                    slots: Vec::new(),
                });
            }
            let gi = groups.len() - 1;
            groups[gi].slots.push(Some(id));
            by_id.insert(id, (value, groups[gi].slots.len() - 1));
        }
        Ok(Self { attr, groups, by_id })
    }

    pub fn group_for_value(&self, value: Value) -> Option<&Group> {
        self.groups
            .binary_search_by_key(&value, |g| g.value)
            .ok()
            .map(|i| &self.groups[i])
    }

    /// Live `(value, count)` aggregates, ascending by value.
    pub fn aggregates(&self) -> Vec<(Value, usize)> {
        self.groups
            .iter()
            .filter(|g| g.live_count() > 0)
            .map(|g| (g.value, g.live_count()))
            .collect()
    }

    pub fn live_total(&self) -> usize {
        self.groups.iter().map(|g| g.live_count()).sum()
    }

    pub fn tombstoned_slots(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.slots.iter().filter(|s| s.is_none()).count())
            .sum()
    }

    pub fn total_slots(&self) -> usize {
        self.groups.iter().map(|g| g.slots.len()).sum()
    }
}

/// Convenience constructor for test fixtures and the data generator.
pub fn uniform_schema(d: usize, domain: Interval) -> Schema {
    Schema::new(
        (1..=d)
            .map(|j| AttrDef {
                name: format!("A{j}"),
                domain,
            })
            .collect(),
    )
    .expect("d >= 1")
}
