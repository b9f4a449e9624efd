//! Ground sets, element sets and partition matroids.
//!
//! A partition matroid over a ground set N is given by an ordered list of
//! non-empty, pairwise disjoint parts P_1, ..., P_m whose union is N. A set
//! S is independent iff |S ∩ P_i| ≤ 1 for every part, and a base iff
//! |S ∩ P_i| = 1 for every part.
//!
//! Elements and parts are identified by stable text names; indices are an
//! internal encoding. Names may not contain whitespace or commas, because
//! they travel through the file format and comma-separated CLI flags.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Result, SglError};

pub(crate) fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(SglError::InvalidName {
            name: name.to_string(),
            reason: "empty",
        });
    }
    if name.chars().any(|c| c.is_whitespace()) {
        return Err(SglError::InvalidName {
            name: name.to_string(),
            reason: "contains whitespace",
        });
    }
    if name.contains(',') {
        return Err(SglError::InvalidName {
            name: name.to_string(),
            reason: "contains a comma",
        });
    }
    Ok(())
}

/// Interned ground set: element names in a fixed order plus a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ground {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Ground {
    pub fn new<I, S>(names: I) -> Result<Arc<Ground>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Ground {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            let name = name.into();
            validate_name(&name)?;
            if g.index.contains_key(&name) {
                return Err(SglError::DuplicateName(name));
            }
            g.index.insert(name.clone(), g.names.len() as u32);
            g.names.push(name);
        }
        Ok(Arc::new(g))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    pub fn id(&self, name: &str) -> Result<u32> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| SglError::UnknownElement(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Element set from names, failing on any name outside the ground set.
    pub fn set_from_names<'a, I>(&self, names: I) -> Result<ElementSet>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut s = ElementSet::empty();
        for name in names {
            s.insert(self.id(name)?);
        }
        Ok(s)
    }

    pub(crate) fn check_id(&self, id: u32) -> Result<()> {
        if (id as usize) < self.names.len() {
            Ok(())
        } else {
            Err(SglError::UnknownElement(format!("#{id}")))
        }
    }
}

/// Unordered, duplicate-free collection of element ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ElementSet(BTreeSet<u32>);

impl ElementSet {
    pub fn empty() -> Self {
        ElementSet(BTreeSet::new())
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        ElementSet(ids.into_iter().collect())
    }

    pub fn insert(&mut self, id: u32) -> bool {
        self.0.insert(id)
    }

    pub fn remove(&mut self, id: u32) -> bool {
        self.0.remove(&id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// Copy of `self` with `id` added; the workhorse of marginal evaluation.
    pub fn with_element(&self, id: u32) -> Self {
        let mut s = self.clone();
        s.insert(id);
        s
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        ElementSet(self.0.union(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Names of the members under `ground`, in id order.
    pub fn names<'g>(&self, ground: &'g Ground) -> Vec<&'g str> {
        self.iter().map(|id| ground.name(id)).collect()
    }

    /// Sorted-name rendering used by reports and error messages.
    pub fn render(&self, ground: &Ground) -> String {
        let mut names = self.names(ground);
        names.sort_unstable();
        names.join(" ")
    }
}

impl FromIterator<u32> for ElementSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        ElementSet(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    name: String,
    members: Vec<u32>,
}

impl Part {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Members in canonical (construction) order; tie policies and option
    /// listings rely on this order being stable.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    /// Member names in canonical order.
    pub fn members_names<'g>(&self, ground: &'g Ground) -> Vec<&'g str> {
        self.members.iter().map(|&id| ground.name(id)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    ground: Arc<Ground>,
    parts: Vec<Part>,
    part_of: Vec<u32>,
}

/// Builds a partition matroid from `(part name, element names)` pairs,
/// validating every invariant: non-empty disjoint parts, unique names, names
/// fit for the file format. Part order is preserved and becomes the index
/// order 1..m used by permutations.
pub fn make_partition(parts: &[(String, Vec<String>)]) -> Result<PartitionMatroid> {
    if parts.is_empty() {
        return Err(SglError::InvariantViolation(
            "a partition matroid needs at least one part".into(),
        ));
    }
    let mut part_names: HashMap<String, usize> = HashMap::new();
    let mut element_part: HashMap<String, usize> = HashMap::new();
    let mut all_elements: Vec<String> = Vec::new();

    for (pix, (pname, members)) in parts.iter().enumerate() {
        validate_name(pname)?;
        if part_names.insert(pname.clone(), pix).is_some() {
            return Err(SglError::DuplicateName(pname.clone()));
        }
        if members.is_empty() {
            return Err(SglError::EmptyPart(pname.clone()));
        }
        let mut seen_here: BTreeSet<&str> = BTreeSet::new();
        for e in members {
            if !seen_here.insert(e.as_str()) {
                return Err(SglError::DuplicateName(e.clone()));
            }
            if let Some(&first) = element_part.get(e) {
                return Err(SglError::OverlappingParts {
                    element: e.clone(),
                    first: parts[first].0.clone(),
                    second: pname.clone(),
                });
            }
            element_part.insert(e.clone(), pix);
            all_elements.push(e.clone());
        }
    }

    let ground = Ground::new(all_elements)?;
    let mut part_of = vec![0u32; ground.len()];
    let parts: Vec<Part> = parts
        .iter()
        .enumerate()
        .map(|(pix, (pname, members))| {
            let members: Vec<u32> = members
                .iter()
                .map(|e| {
                    let id = ground.id(e).expect("interned above");
                    part_of[id as usize] = pix as u32;
                    id
                })
                .collect();
            Part {
                name: pname.clone(),
                members,
            }
        })
        .collect();

    Ok(PartitionMatroid {
        ground,
        parts,
        part_of,
    })
}

impl PartitionMatroid {
    pub fn ground(&self) -> &Arc<Ground> {
        &self.ground
    }

    /// Number of parts, the m of the arrival process.
    pub fn m(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn part(&self, ix: usize) -> &Part {
        &self.parts[ix]
    }

    pub fn part_index(&self, name: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| SglError::UnknownPart(name.to_string()))
    }

    /// Index of the part containing element `id`.
    pub fn part_of(&self, id: u32) -> Result<usize> {
        self.ground.check_id(id)?;
        Ok(self.part_of[id as usize] as usize)
    }

    /// Number of bases, Π |P_i|.
    pub fn base_count(&self) -> u128 {
        self.parts.iter().map(|p| p.members.len() as u128).product()
    }

    fn part_counts(&self, s: &ElementSet) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; self.parts.len()];
        for id in s.iter() {
            self.ground.check_id(id)?;
            counts[self.part_of[id as usize] as usize] += 1;
        }
        Ok(counts)
    }

    /// |S ∩ P_i| ≤ 1 for every part.
    pub fn is_independent(&self, s: &ElementSet) -> Result<bool> {
        Ok(self.part_counts(s)?.iter().all(|&c| c <= 1))
    }

    /// |S ∩ P_i| = 1 for every part.
    pub fn is_base(&self, s: &ElementSet) -> Result<bool> {
        Ok(self.part_counts(s)?.iter().all(|&c| c == 1))
    }
}
