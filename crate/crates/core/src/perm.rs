//! Permutations of tensor index slots.
//!
//! A [`Perm`] encodes an index *arrangement*: applied to a base multi-index
//! `x`, slot `i` of the result takes `x[p(i)]`. Over the base `(α, μ, ν)` the
//! permutation `(3,1,2)` therefore yields `(ν, α, μ)`.
//!
//! Composition is `(p∘q)(i) = p(q(i))`, and the action satisfies
//! `apply(p∘q, x) = apply(q, apply(p, x))`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest rank for which [`PermTable`] may be built (6! = 720).
pub const MAX_TABLE_RANK: usize = 6;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    // zero-based images
    image: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { image: (0..n).collect() }
    }

    /// Builds a permutation from zero-based images.
    pub fn from_zero_based(image: Vec<usize>) -> Result<Self> {
        if image.is_empty() {
            return Err(Error::InvalidRank(0));
        }
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::arg(format!("{image:?} is not a permutation of 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Perm { image })
    }

    /// Builds a permutation from one-based images, e.g. `[3, 1, 2]`.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::arg(format!("{image:?}: one-based images must be positive")));
        }
        Self::from_zero_based(image.iter().map(|&v| v - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Zero-based image of slot `i`.
    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|v| v + 1).collect()
    }

    /// `(self∘other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        if self.len() != other.len() {
            return Err(Error::arg(format!(
                "cannot compose permutations of sizes {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Perm { image: other.image.iter().map(|&j| self.image[j]).collect() })
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Perm { image: inv }
    }

    /// `result[i] = x[p(i)]`.
    pub fn apply_to_index<T: Clone>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(Error::arg(format!(
                "multi-index of length {} for a permutation of size {}",
                x.len(),
                self.len()
            )));
        }
        Ok(self.image.iter().map(|&j| x[j].clone()).collect())
    }

    /// +1 for even, -1 for odd.
    pub fn parity(&self) -> i8 {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !visited[j] {
                visited[j] = true;
                j = self.image[j];
            }
        }
        if (n - cycles).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// The transposition swapping zero-based slots `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Perm {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(i, j);
        Perm { image }
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Perm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Perm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Perm::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

/// Canonical enumeration of S_n.
///
/// Rank 3 uses the arrangement order `αμν, ναμ, μνα, ανμ, νμα, μαν`, i.e.
/// `(1,2,3),(3,1,2),(2,3,1),(1,3,2),(3,2,1),(2,1,3)`: the three even
/// permutations first, then the three transpositions. Every other rank puts
/// the identity first and the rest in lexicographic order of image tuples.
pub fn canonical_order(n: usize) -> Result<Vec<Perm>> {
    if n == 0 {
        return Err(Error::InvalidRank(0));
    }
    if n == 3 {
        return [[1, 2, 3], [3, 1, 2], [2, 3, 1], [1, 3, 2], [3, 2, 1], [2, 1, 3]]
            .iter()
            .map(|p| Perm::from_one_based(p))
            .collect();
    }
    // Lexicographic order already starts with the identity.
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(Perm { image: current.clone() });
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Precomputed Cayley table of S_n over the canonical order.
#[derive(Debug, Clone)]
pub struct PermTable {
    order: Vec<Perm>,
    compose_index: Vec<usize>,
    inverse_index: Vec<usize>,
    lookup: HashMap<Perm, usize>,
}

impl PermTable {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_TABLE_RANK {
            return Err(Error::UnsupportedRank {
                rank: n,
                reason: "permutation tables are limited to n! <= 720",
            });
        }
        let order = canonical_order(n)?;
        let lookup: HashMap<Perm, usize> =
            order.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let m = order.len();
        let mut compose_index = Vec::with_capacity(m * m);
        for p in &order {
            for q in &order {
                compose_index.push(lookup[&p.compose(q)?]);
            }
        }
        let inverse_index = order.iter().map(|p| lookup[&p.inverse()]).collect();
        Ok(PermTable { order, compose_index, inverse_index, lookup })
    }

    pub fn rank(&self) -> usize {
        self.order[0].len()
    }

    /// Number of permutations, n!.
    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[Perm] {
        &self.order
    }

    pub fn perm(&self, i: usize) -> &Perm {
        &self.order[i]
    }

    /// Canonical index of `order[i] ∘ order[j]`.
    #[inline]
    pub fn compose(&self, i: usize, j: usize) -> usize {
        self.compose_index[i * self.order.len() + j]
    }

    #[inline]
    pub fn inverse(&self, i: usize) -> usize {
        self.inverse_index[i]
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.lookup.get(p).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Perm {
        Perm::from_one_based(v).unwrap()
    }

    #[test]
    fn canonical_order_rank3_matches_arrangements() {
        let order = canonical_order(3).unwrap();
        let base = ['a', 'm', 'n'];
        let words: Vec<String> =
            order.iter().map(|q| q.apply_to_index(&base).unwrap().into_iter().collect()).collect();
        assert_eq!(words, ["amn", "nam", "mna", "anm", "nma", "man"]);
    }

    #[test]
    fn canonical_order_small_ranks() {
        assert_eq!(canonical_order(1).unwrap(), vec![p(&[1])]);
        assert_eq!(canonical_order(2).unwrap(), vec![p(&[1, 2]), p(&[2, 1])]);
        assert!(matches!(canonical_order(0), Err(Error::InvalidRank(0))));
        let four = canonical_order(4).unwrap();
        assert_eq!(four.len(), 24);
        assert!(four[0].is_identity());
        assert!(four.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(p(&[3, 1, 2]).compose(&p(&[3, 1, 2])).unwrap(), p(&[2, 3, 1]));
        assert_eq!(p(&[3, 1, 2]).compose(&Perm::identity(3)).unwrap(), p(&[3, 1, 2]));
        assert_eq!(p(&[1, 3, 2]).compose(&p(&[1, 3, 2])).unwrap(), p(&[1, 2, 3]));
        assert!(p(&[1, 2]).compose(&p(&[1, 2, 3])).is_err());
    }

    #[test]
    fn invert_examples() {
        assert_eq!(p(&[3, 1, 2]).inverse(), p(&[2, 3, 1]));
        assert_eq!(Perm::identity(4).inverse(), Perm::identity(4));
        assert_eq!(p(&[3, 2, 1]).inverse(), p(&[3, 2, 1]));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(p(&[3, 1, 2]).apply_to_index(&["α", "μ", "ν"]).unwrap(), ["ν", "α", "μ"]);
        assert_eq!(p(&[1, 3, 2]).apply_to_index(&[0, 1, 2]).unwrap(), [0, 2, 1]);
        assert_eq!(Perm::identity(3).apply_to_index(&[7, 8, 9]).unwrap(), [7, 8, 9]);
        assert!(p(&[1, 2]).apply_to_index(&[0, 1, 2]).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(Perm::identity(3).parity(), 1);
        assert_eq!(p(&[1, 3, 2]).parity(), -1);
        assert_eq!(p(&[3, 1, 2]).parity(), 1);
        let order = canonical_order(3).unwrap();
        let parities: Vec<i8> = order.iter().map(Perm::parity).collect();
        assert_eq!(parities, [1, 1, 1, -1, -1, -1]);
    }

    #[test]
    fn invalid_perms_rejected() {
        assert!(Perm::from_one_based(&[1, 1, 2]).is_err());
        assert!(Perm::from_one_based(&[0, 1]).is_err());
        assert!(Perm::from_one_based(&[]).is_err());
        assert!(Perm::from_one_based(&[1, 4, 2]).is_err());
    }

    #[test]
    fn group_laws_exhaustive_up_to_rank4() {
        for n in 1..=4 {
            let t = PermTable::new(n).unwrap();
            let m = t.size();
            assert_eq!(m, factorial(n));
            for i in 0..m {
                assert_eq!(t.compose(0, i), i);
                assert_eq!(t.compose(i, 0), i);
                assert_eq!(t.compose(i, t.inverse(i)), 0);
                for j in 0..m {
                    let pij = t.perm(t.compose(i, j));
                    assert_eq!(pij.parity(), t.perm(i).parity() * t.perm(j).parity());
                    for k in 0..m {
                        assert_eq!(t.compose(t.compose(i, j), k), t.compose(i, t.compose(j, k)));
                    }
                }
            }
        }
    }

    #[test]
    fn action_convention_exhaustive_rank3_dim2() {
        let order = canonical_order(3).unwrap();
        for a in &order {
            for b in &order {
                let ab = a.compose(b).unwrap();
                for flat in 0..8usize {
                    let x = [flat >> 2 & 1, flat >> 1 & 1, flat & 1];
                    let lhs = ab.apply_to_index(&x).unwrap();
                    let rhs = b.apply_to_index(&a.apply_to_index(&x).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn serializes_one_based() {
        let q = p(&[3, 1, 2]);
        assert_eq!(serde_json::to_string(&q).unwrap(), "[3,1,2]");
        let back: Perm = serde_json::from_str("[3,1,2]").unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<Perm>("[1,1]").is_err());
    }
}
