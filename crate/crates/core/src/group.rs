use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Largest group that will be materialized element by element.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

/// A permutation group given by generators, with its elements enumerated
/// on demand by breadth-first product closure.
///
/// Elements, once materialized, are sorted lexicographically by image
/// array so that every traversal of a group is reproducible.
#[derive(Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    order: u128,
    elements: OnceLock<Vec<Permutation>>,
}

impl Clone for PermutationGroup {
    fn clone(&self) -> Self {
        let elements = OnceLock::new();
        if let Some(e) = self.elements.get() {
            let _ = elements.set(e.clone());
        }
        PermutationGroup {
            degree: self.degree,
            generators: self.generators.clone(),
            order: self.order,
            elements,
        }
    }
}

impl PermutationGroup {
    pub fn trivial(degree: usize) -> Self {
        let elements = OnceLock::new();
        let _ = elements.set(vec![Permutation::identity(degree)]);
        PermutationGroup {
            degree,
            generators: Vec::new(),
            order: 1,
            elements,
        }
    }

    /// Closure of `generators` with the default element cap.
    pub fn from_generators(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        Self::from_generators_capped(degree, generators, DEFAULT_ELEMENT_CAP)
    }

    pub fn from_generators_capped(
        degree: usize,
        generators: Vec<Permutation>,
        cap: usize,
    ) -> Result<Self> {
        check_degrees(degree, &generators)?;
        let elements = closure(degree, &generators, cap)?;
        let order = elements.len() as u128;
        let cell = OnceLock::new();
        let _ = cell.set(elements);
        Ok(PermutationGroup {
            degree,
            generators: strip_identity(generators),
            order,
            elements: cell,
        })
    }

    /// A group whose order is already known (for instance from a
    /// canonical-labeling search); elements are materialized lazily.
    pub fn with_known_order(
        degree: usize,
        generators: Vec<Permutation>,
        order: u128,
    ) -> Result<Self> {
        check_degrees(degree, &generators)?;
        Ok(PermutationGroup {
            degree,
            generators: strip_identity(generators),
            order,
            elements: OnceLock::new(),
        })
    }

    /// Builds the group from a complete, closed element list.
    pub(crate) fn from_closed_elements(degree: usize, mut elements: Vec<Permutation>) -> Self {
        elements.sort();
        elements.dedup();
        let generators = greedy_generators(degree, &elements);
        let order = elements.len() as u128;
        let cell = OnceLock::new();
        let _ = cell.set(elements);
        PermutationGroup {
            degree,
            generators,
            order,
            elements: cell,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// All elements, materializing them if needed.
    pub fn elements(&self) -> Result<&[Permutation]> {
        if let Some(e) = self.elements.get() {
            return Ok(e);
        }
        if self.order > DEFAULT_ELEMENT_CAP as u128 {
            return Err(Error::Resource(format!(
                "group of order {} exceeds element cap {DEFAULT_ELEMENT_CAP}",
                self.order
            )));
        }
        let e = closure(self.degree, &self.generators, DEFAULT_ELEMENT_CAP)?;
        if e.len() as u128 != self.order {
            return Err(Error::consistency(format!(
                "declared group order {} but closure has {} elements",
                self.order,
                e.len()
            )));
        }
        let _ = self.elements.set(e);
        Ok(self.elements.get().expect("just set"))
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        Ok(self.elements()?.binary_search(p).is_ok())
    }

    /// Subgroup of the elements satisfying `keep`; the predicate must
    /// describe a subgroup (a stabilizer, typically).
    pub fn subgroup_where(&self, mut keep: impl FnMut(&Permutation) -> bool) -> Result<Self> {
        let elements: Vec<Permutation> = self.elements()?.iter().filter(|g| keep(g)).cloned().collect();
        Ok(Self::from_closed_elements(self.degree, elements))
    }

    /// Orbit of a point under the group, via the generators.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        let mut out = vec![x];
        seen[x] = true;
        let mut i = 0;
        while i < out.len() {
            let y = out[i];
            for g in &self.generators {
                let z = g.apply(y);
                if !seen[z] {
                    seen[z] = true;
                    out.push(z);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }
}

/// Multiset of element orders, as `order -> multiplicity`.
pub fn element_order_multiset(g: &PermutationGroup) -> Result<BTreeMap<u64, usize>> {
    let mut out = BTreeMap::new();
    for e in g.elements()? {
        *out.entry(e.order()).or_insert(0) += 1;
    }
    Ok(out)
}

fn check_degrees(degree: usize, generators: &[Permutation]) -> Result<()> {
    for g in generators {
        if g.degree() != degree {
            return Err(Error::input(format!(
                "generator {g} has degree {} but group degree is {degree}",
                g.degree()
            )));
        }
    }
    Ok(())
}

fn strip_identity(generators: Vec<Permutation>) -> Vec<Permutation> {
    let mut out: Vec<Permutation> = Vec::with_capacity(generators.len());
    for g in generators {
        if !g.is_identity() && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

fn closure(degree: usize, generators: &[Permutation], cap: usize) -> Result<Vec<Permutation>> {
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::new();
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(e) = queue.pop_front() {
        for g in generators {
            let h = g.compose(&e);
            if !seen.contains(&h) {
                if seen.len() >= cap {
                    return Err(Error::Resource(format!(
                        "group closure exceeds element cap {cap}"
                    )));
                }
                seen.insert(h.clone());
                queue.push_back(h);
            }
        }
    }
    let mut elements: Vec<Permutation> = seen.into_iter().collect();
    elements.sort();
    Ok(elements)
}

/// Picks elements not yet generated until the whole list is covered.
fn greedy_generators(degree: usize, elements: &[Permutation]) -> Vec<Permutation> {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut generated: HashSet<Permutation> = HashSet::new();
    generated.insert(Permutation::identity(degree));
    for e in elements {
        if generated.contains(e) {
            continue;
        }
        gens.push(e.clone());
        // elements is a finite group, so the closure stays inside it
        generated = closure(degree, &gens, elements.len())
            .expect("closure of subgroup elements is bounded by the group")
            .into_iter()
            .collect();
    }
    gens
}
