//! Graphical valuations: each agent's value depends only on the goods incident to it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Error, Result};
use crate::multigraph::EdgeId;

pub type Bundle = BTreeSet<EdgeId>;

/// Largest incident set an explicit table may range over (2^16 entries).
pub const TABLE_MAX_EDGES: usize = 16;
pub const MONOTONE_CHECK_MAX_EDGES: usize = 20;
pub const CANCELLABLE_CHECK_MAX_EDGES: usize = 12;

/// A monotone set function over goods, with integer values.
///
/// Goods missing from a valuation's support contribute nothing, so bundles may freely
/// contain goods the agent does not value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Additive(BTreeMap<EdgeId, u64>),
    BudgetAdditive {
        values: BTreeMap<EdgeId, u64>,
        cap: u64,
    },
    UnitDemand(BTreeMap<EdgeId, u64>),
    Table(Table),
}

impl Valuation {
    pub fn additive(values: impl IntoIterator<Item = (EdgeId, u64)>) -> Self {
        Valuation::Additive(values.into_iter().collect())
    }

    pub fn budget_additive(values: impl IntoIterator<Item = (EdgeId, u64)>, cap: u64) -> Self {
        Valuation::BudgetAdditive {
            values: values.into_iter().collect(),
            cap,
        }
    }

    pub fn unit_demand(values: impl IntoIterator<Item = (EdgeId, u64)>) -> Self {
        Valuation::UnitDemand(values.into_iter().collect())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::Additive(_) => "additive",
            Valuation::BudgetAdditive { .. } => "budget_additive",
            Valuation::UnitDemand(_) => "unit_demand",
            Valuation::Table(_) => "table",
        }
    }

    /// Additive, budget-additive and unit-demand valuations are all cancellable.
    pub fn is_cancellable_family(&self) -> bool {
        !matches!(self, Valuation::Table(_))
    }

    /// Goods this valuation may assign nonzero marginal value to.
    pub fn support(&self) -> Vec<EdgeId> {
        match self {
            Valuation::Additive(v)
            | Valuation::BudgetAdditive { values: v, .. }
            | Valuation::UnitDemand(v) => v.keys().copied().collect(),
            Valuation::Table(t) => t.edges.clone(),
        }
    }

    pub fn value(&self, bundle: &Bundle) -> u64 {
        self.value_of(bundle.iter().copied())
    }

    /// Value of a set given as an iterator of distinct goods.
    pub fn value_of(&self, goods: impl IntoIterator<Item = EdgeId>) -> u64 {
        match self {
            Valuation::Additive(v) => goods.into_iter().filter_map(|g| v.get(&g)).sum(),
            Valuation::BudgetAdditive { values, cap } => {
                let sum: u64 = goods.into_iter().filter_map(|g| values.get(&g)).sum();
                sum.min(*cap)
            }
            Valuation::UnitDemand(v) => goods
                .into_iter()
                .filter_map(|g| v.get(&g))
                .copied()
                .max()
                .unwrap_or(0),
            Valuation::Table(t) => t.values[t.mask_of(goods)],
        }
    }

    /// Value of the union of several disjoint bundles.
    pub fn value_of_union<'a>(&self, parts: impl IntoIterator<Item = &'a Bundle>) -> u64 {
        self.value_of(parts.into_iter().flat_map(|b| b.iter().copied()))
    }
}

/// Explicit value table over a small set of goods, indexed by bitmask: bit `i` stands for
/// the `i`-th smallest good of `edges`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    edges: Vec<EdgeId>,
    values: Vec<u64>,
}

impl Table {
    /// Builds a table from a value per subset (indexed by mask) and validates that the
    /// empty set is worth 0 and values never decrease when a good is added.
    pub fn from_mask_values(edges: Vec<EdgeId>, values: Vec<u64>) -> Result<Self> {
        let table = Self::unchecked(edges, values)?;
        if table.values[0] != 0 {
            return Err(invalid("table value of the empty bundle must be 0"));
        }
        let k = table.edges.len();
        for mask in 0..table.values.len() {
            for i in 0..k {
                let bit = 1 << i;
                if mask & bit == 0 && table.values[mask | bit] < table.values[mask] {
                    return Err(invalid(format!(
                        "table is not monotone: adding good {} to {:?} lowers the value",
                        table.edges[i],
                        table.subset(mask)
                    )));
                }
            }
        }
        Ok(table)
    }

    /// Builds a table from `(subset, value)` entries; every subset of `edges` must appear
    /// exactly once.
    pub fn from_entries(
        edges: impl IntoIterator<Item = EdgeId>,
        entries: impl IntoIterator<Item = (Bundle, u64)>,
    ) -> Result<Self> {
        let edges: Vec<EdgeId> = edges
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        check_table_size(edges.len())?;
        let mut values: Vec<Option<u64>> = vec![None; 1 << edges.len()];
        for (subset, value) in entries {
            let mut mask = 0usize;
            for g in &subset {
                let i = edges
                    .binary_search(g)
                    .map_err(|_| invalid(format!("table entry mentions undeclared good {g}")))?;
                mask |= 1 << i;
            }
            if values[mask].replace(value).is_some() {
                return Err(invalid(format!("duplicate table entry for {subset:?}")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(mask, v)| {
                v.ok_or_else(|| invalid(format!("table has no entry for subset mask {mask:#b}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_mask_values(edges, values)
    }

    /// Skips the zero-at-empty and monotonicity checks. Only meant for exercising the
    /// brute-force property verifiers; solvers assume validated tables.
    pub fn unchecked(edges: Vec<EdgeId>, values: Vec<u64>) -> Result<Self> {
        check_table_size(edges.len())?;
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != edges {
            return Err(invalid("table goods must be strictly ascending"));
        }
        if values.len() != 1 << edges.len() {
            return Err(invalid(format!(
                "table over {} goods needs {} values, got {}",
                edges.len(),
                1usize << edges.len(),
                values.len()
            )));
        }
        Ok(Table { edges, values })
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// `(subset, value)` for every subset, in mask order.
    pub fn entries(&self) -> impl Iterator<Item = (Bundle, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(mask, &v)| (self.subset(mask), v))
    }

    fn subset(&self, mask: usize) -> Bundle {
        self.edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &g)| g)
            .collect()
    }

    fn mask_of(&self, goods: impl IntoIterator<Item = EdgeId>) -> usize {
        goods
            .into_iter()
            .filter_map(|g| self.edges.binary_search(&g).ok())
            .fold(0, |m, i| m | 1 << i)
    }
}

fn check_table_size(k: usize) -> Result<()> {
    if k > TABLE_MAX_EDGES {
        return Err(Error::Capacity {
            what: "table goods",
            actual: k as u128,
            limit: TABLE_MAX_EDGES as u128,
        });
    }
    Ok(())
}

/// Outcome of an exhaustive property check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Violated(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// `v(set ∪ {good}) < v(set)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneWitness {
    pub set: Bundle,
    pub good: EdgeId,
}

/// `v(s) >= v(t)` but `v(s ∪ {good}) < v(t ∪ {good})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancellableWitness {
    pub s: Bundle,
    pub t: Bundle,
    pub good: EdgeId,
}

/// Evaluates `val` on every subset of `incident`, indexed by mask.
fn mask_table(val: &Valuation, incident: &[EdgeId]) -> Vec<u64> {
    (0..1usize << incident.len())
        .map(|mask| {
            val.value_of(
                incident
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &g)| g),
            )
        })
        .collect()
}

fn mask_to_bundle(incident: &[EdgeId], mask: usize) -> Bundle {
    incident
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &g)| g)
        .collect()
}

fn check_bound(incident: &[EdgeId], limit: usize, what: &'static str) -> Result<Vec<EdgeId>> {
    if incident.len() > limit {
        return Err(Error::Capacity {
            what,
            actual: incident.len() as u128,
            limit: limit as u128,
        });
    }
    let mut sorted = incident.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted)
}

/// Checks `v(S ∪ {g}) >= v(S)` for every `S ⊆ incident` and `g ∉ S`. Subsets are visited
/// in mask order, goods ascending; the first failure is reported.
pub fn is_monotone_bruteforce(
    val: &Valuation,
    incident: &[EdgeId],
) -> Result<Verdict<MonotoneWitness>> {
    let incident = check_bound(
        incident,
        MONOTONE_CHECK_MAX_EDGES,
        "monotonicity check goods",
    )?;
    let values = mask_table(val, &incident);
    for mask in 0..values.len() {
        for (i, &g) in incident.iter().enumerate() {
            let bit = 1 << i;
            if mask & bit == 0 && values[mask | bit] < values[mask] {
                return Ok(Verdict::Violated(MonotoneWitness {
                    set: mask_to_bundle(&incident, mask),
                    good: g,
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Checks the cancellable property over all `S, T ⊆ incident` and `g ∉ S ∪ T`, with `S`
/// in the outer loop, then `T`, then `g`, all ascending.
pub fn is_cancellable_bruteforce(
    val: &Valuation,
    incident: &[EdgeId],
) -> Result<Verdict<CancellableWitness>> {
    let incident = check_bound(
        incident,
        CANCELLABLE_CHECK_MAX_EDGES,
        "cancellability check goods",
    )?;
    let values = mask_table(val, &incident);
    let full = values.len();
    for s in 0..full {
        for t in 0..full {
            if values[s] < values[t] {
                continue;
            }
            for (i, &g) in incident.iter().enumerate() {
                let bit = 1 << i;
                if (s | t) & bit == 0 && values[s | bit] < values[t | bit] {
                    return Ok(Verdict::Violated(CancellableWitness {
                        s: mask_to_bundle(&incident, s),
                        t: mask_to_bundle(&incident, t),
                        good: g,
                    }));
                }
            }
        }
    }
    Ok(Verdict::Holds)
}
