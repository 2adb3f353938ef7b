//! Finite-support partial orders on the naturals.
//!
//! A [`PartialOrder`] here is a reflexive, transitive relation that need not
//! be antisymmetric (a preorder in most textbooks). Only the non-diagonal
//! pairs are stored; every `(m, m)` is implicitly a member, so the empty
//! relation is the diagonal `D`, the neutral element of [`PartialOrder::join`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index into the countable ground set.
pub type Element = u32;

/// An ordered pair `(j, k)`.
pub type Pair = (Element, Element);

/// A reflexive, transitive relation with finitely many non-diagonal pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialOrder {
    pairs: BTreeSet<Pair>,
}

impl PartialOrder {
    /// The diagonal relation `D`.
    pub fn diagonal() -> Self {
        Self::default()
    }

    /// Smallest partial order containing `raw`. Diagonal entries are dropped.
    pub fn closure<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = Pair>,
    {
        let mut succ: BTreeMap<Element, BTreeSet<Element>> = BTreeMap::new();
        for (j, k) in raw {
            if j != k {
                succ.entry(j).or_default().insert(k);
            }
        }

        // DFS from every source.
        let mut pairs = BTreeSet::new();
        for &src in succ.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<Element> = succ[&src].iter().copied().collect();
            while let Some(v) = stack.pop() {
                if !seen.insert(v) {
                    continue;
                }
                if let Some(next) = succ.get(&v) {
                    stack.extend(next.iter().copied().filter(|n| !seen.contains(n)));
                }
            }
            pairs.extend(seen.into_iter().filter(|&v| v != src).map(|v| (src, v)));
        }
        PartialOrder { pairs }
    }

    /// Builds a relation from pairs that are already transitively closed.
    ///
    /// Returns `None` if the pairs are not transitive.
    pub fn from_closed<I>(pairs: I) -> Option<Self>
    where
        I: IntoIterator<Item = Pair>,
    {
        let pairs: BTreeSet<Pair> = pairs.into_iter().filter(|(j, k)| j != k).collect();
        let rel = PartialOrder { pairs };
        rel.is_transitive().then_some(rel)
    }

    pub(crate) fn from_closed_unchecked(pairs: BTreeSet<Pair>) -> Self {
        debug_assert!(pairs.iter().all(|(j, k)| j != k));
        PartialOrder { pairs }
    }

    /// Non-diagonal pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.pairs.iter().copied()
    }

    /// Number of non-diagonal pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True for the diagonal relation.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Membership, with the diagonal always present.
    pub fn contains(&self, j: Element, k: Element) -> bool {
        j == k || self.pairs.contains(&(j, k))
    }

    /// The closure of the union of both relations.
    pub fn join(&self, other: &PartialOrder) -> PartialOrder {
        if other.pairs.is_subset(&self.pairs) {
            return self.clone();
        }
        if self.pairs.is_subset(&other.pairs) {
            return other.clone();
        }
        Self::closure(self.pairs().chain(other.pairs()))
    }

    /// Inclusion of the non-diagonal parts.
    pub fn leq(&self, other: &PartialOrder) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Elements incident to some non-diagonal pair.
    pub fn support(&self) -> BTreeSet<Element> {
        self.pairs.iter().flat_map(|&(j, k)| [j, k]).collect()
    }

    /// Checks the transitivity invariant directly.
    pub fn is_transitive(&self) -> bool {
        self.pairs.iter().all(|&(j, k)| {
            self.pairs
                .range((k, Element::MIN)..=(k, Element::MAX))
                .all(|&(_, l)| l == j || self.pairs.contains(&(j, l)))
        })
    }
}

impl fmt::Display for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (j, k)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({j},{k})")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<Pair> for PartialOrder {
    fn from_iter<I: IntoIterator<Item = Pair>>(iter: I) -> Self {
        Self::closure(iter)
    }
}
