//! Finite groups presented by Cayley tables, with the regular
//! representations and the character data the gauge model consumes.
//!
//! The built-in group is Q8, the quaternion group
//! {1, −1, I, −I, J, −J, K, −K} in that canonical element order, with the
//! character of its two-dimensional faithful irreducible representation.
//! Arbitrary groups can be supplied through a small JSON interchange format
//! (see [`FiniteGroup::from_json_str`]); every constructor runs the full
//! axiom validation.

use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, ONE};
use crate::{Error, Result};

/// Index of a group element in the canonical element order.
pub type Element = usize;

/// A finite group given by its multiplication table, plus the (real-valued)
/// character of the faithful representation used by the gauge couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    /// `table[a][b]` is the index of the product a·b.
    table: Vec<Vec<Element>>,
    /// Character of the faithful irrep, one real value per element.
    char_fund: Vec<f64>,
    /// `inv[g]` is the index of g⁻¹.
    inv: Vec<Element>,
}

/// Serialized form of a group definition file.
#[derive(Serialize, Deserialize)]
struct GroupFile {
    labels: Vec<String>,
    cayley: Vec<Vec<Element>>,
    char_fund: Vec<f64>,
}

impl FiniteGroup {
    /// Build a group from parts and validate all group axioms.
    ///
    /// Requirements checked: square table over valid indices, identity at
    /// index 0, every row and column a permutation, associativity, unique
    /// two-sided inverses, and a character that is a real class function
    /// symmetric under inversion with χ(1) > 0 and |χ(g)| ≤ χ(1).
    pub fn from_parts(
        labels: Vec<String>,
        table: Vec<Vec<Element>>,
        char_fund: Vec<f64>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty element list".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup(format!(
                "Cayley table must be {n}×{n} to match {n} labels"
            )));
        }
        if char_fund.len() != n {
            return Err(Error::InvalidGroup(format!(
                "character must list {n} values, got {}",
                char_fund.len()
            )));
        }
        if table
            .iter()
            .flatten()
            .any(|&e| e >= n)
        {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        // Identity must sit at index 0.
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return Err(Error::InvalidGroup(
                    "element 0 is not a two-sided identity".into(),
                ));
            }
        }
        // Latin-square property (cancellation).
        for a in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for b in 0..n {
                seen_row[table[a][b]] = true;
                seen_col[table[b][a]] = true;
            }
            if seen_row.iter().any(|&s| !s) || seen_col.iter().any(|&s| !s) {
                return Err(Error::InvalidGroup(format!(
                    "row/column {a} is not a permutation"
                )));
            }
        }
        // Associativity, exhaustive.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        // Two-sided inverses.
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if table[a][b] == 0 {
                    if table[b][a] != 0 {
                        return Err(Error::InvalidGroup(format!(
                            "one-sided inverse at element {a}"
                        )));
                    }
                    inv[a] = b;
                }
            }
        }
        if inv.iter().any(|&b| b == usize::MAX) {
            return Err(Error::InvalidGroup("missing inverse".into()));
        }
        let group = FiniteGroup {
            labels,
            table,
            char_fund,
            inv,
        };
        group.validate_character()?;
        Ok(group)
    }

    /// Character sanity: real class function, symmetric under inversion,
    /// with positive dimension χ(1) bounding all other values.
    fn validate_character(&self) -> Result<()> {
        let dim = self.char_fund[0];
        if !(dim > 0.0) {
            return Err(Error::InvalidGroup(
                "character dimension χ(identity) must be positive".into(),
            ));
        }
        for g in 0..self.order() {
            if !self.char_fund[g].is_finite() {
                return Err(Error::InvalidGroup("non-finite character value".into()));
            }
            if self.char_fund[g].abs() > dim + crate::tol::EXACT {
                return Err(Error::InvalidGroup(format!(
                    "|χ| exceeds χ(identity) at element {g}"
                )));
            }
            if (self.char_fund[g] - self.char_fund[self.inv[g]]).abs() > crate::tol::EXACT {
                return Err(Error::InvalidGroup(format!(
                    "character not symmetric under inversion at element {g}"
                )));
            }
        }
        for cls in self.conjugacy_classes() {
            let v = self.char_fund[cls[0]];
            if cls
                .iter()
                .any(|&g| (self.char_fund[g] - v).abs() > crate::tol::EXACT)
            {
                return Err(Error::InvalidGroup(
                    "character is not a class function".into(),
                ));
            }
        }
        Ok(())
    }

    /// The quaternion group Q8 in the canonical order
    /// (1, −1, I, −I, J, −J, K, −K), with the character (2, −2, 0, …, 0) of
    /// its two-dimensional faithful irrep.
    pub fn q8() -> Self {
        let labels = ["1", "-1", "I", "-I", "J", "-J", "K", "-K"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        // Row = left factor, column = right factor.
        let table = vec![
            vec![0, 1, 2, 3, 4, 5, 6, 7],
            vec![1, 0, 3, 2, 5, 4, 7, 6],
            vec![2, 3, 1, 0, 6, 7, 5, 4],
            vec![3, 2, 0, 1, 7, 6, 4, 5],
            vec![4, 5, 7, 6, 1, 0, 2, 3],
            vec![5, 4, 6, 7, 0, 1, 3, 2],
            vec![6, 7, 4, 5, 3, 2, 1, 0],
            vec![7, 6, 5, 4, 2, 3, 0, 1],
        ];
        let char_fund = vec![2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        Self::from_parts(labels, table, char_fund)
            .expect("built-in Q8 definition must validate")
    }

    /// Number of elements.
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    /// Identity element (always index 0).
    pub fn identity(&self) -> Element {
        0
    }

    /// Product a·b.
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.table[a][b]
    }

    /// Inverse g⁻¹.
    pub fn inv(&self, g: Element) -> Element {
        self.inv[g]
    }

    /// Element label.
    pub fn label(&self, g: Element) -> &str {
        &self.labels[g]
    }

    /// Look up an element by its label.
    pub fn element_by_label(&self, label: &str) -> Option<Element> {
        self.labels.iter().position(|l| l == label)
    }

    /// Character of the faithful irrep at g.
    pub fn char_fund(&self, g: Element) -> f64 {
        self.char_fund[g]
    }

    /// Dimension of the faithful irrep, χ(identity).
    pub fn fund_dim(&self) -> f64 {
        self.char_fund[0]
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<Element>> {
        let n = self.order();
        let mut assigned = vec![false; n];
        let mut classes = Vec::new();
        for g in 0..n {
            if assigned[g] {
                continue;
            }
            let mut cls: Vec<Element> = (0..n)
                .map(|h| self.mul(self.mul(h, g), self.inv(h)))
                .collect();
            cls.sort_unstable();
            cls.dedup();
            for &m in &cls {
                assigned[m] = true;
            }
            classes.push(cls);
        }
        classes
    }

    /// Right-regular representation of h: the permutation |g⟩ → |g·h⟩.
    ///
    /// Composition runs backwards (an antihomomorphism):
    /// `right_regular(h₂) ∘ right_regular(h₁) = right_regular(h₁·h₂)`.
    pub fn right_regular(&self, h: Element) -> Permutation {
        Permutation {
            images: (0..self.order()).map(|g| self.mul(g, h)).collect(),
        }
    }

    /// Left-regular representation of h: the permutation |g⟩ → |h·g⟩.
    pub fn left_regular(&self, h: Element) -> Permutation {
        Permutation {
            images: (0..self.order()).map(|g| self.mul(h, g)).collect(),
        }
    }

    /// Parse and validate a group from its JSON interchange form
    /// (object with keys `labels`, `cayley`, `char_fund`).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GroupFile = serde_json::from_str(text)?;
        Self::from_parts(file.labels, file.cayley, file.char_fund)
    }

    /// Load a group definition file (see [`FiniteGroup::from_json_str`]).
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Serialize to the JSON interchange form.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GroupFile {
            labels: self.labels.clone(),
            cayley: self.table.clone(),
            char_fund: self.char_fund.clone(),
        })
        .expect("group file serialization cannot fail")
    }
}

/// A permutation of basis states |0⟩ … |n−1⟩.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    /// `images[src]` is the index the basis state |src⟩ is sent to.
    pub images: Vec<usize>,
}

impl Permutation {
    /// Identity permutation on n states.
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Dimension.
    pub fn len(&self) -> usize {
        self.images.len()
    }

    /// True for the empty permutation (never produced by this crate).
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image of one basis index.
    pub fn apply(&self, src: usize) -> usize {
        self.images[src]
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&m| self.images[m]).collect(),
        }
    }

    /// Inverse permutation.
    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (src, &dst) in self.images.iter().enumerate() {
            images[dst] = src;
        }
        Permutation { images }
    }

    /// Dense unitary matrix: M[images[g], g] = 1.
    pub fn matrix(&self) -> CMat {
        let n = self.images.len();
        let mut m = CMat::zeros((n, n));
        for (src, &dst) in self.images.iter().enumerate() {
            m[[dst, src]] = ONE;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, C64};
    use ndarray::array;

    /// Independent product oracle: the two-dimensional matrix representation
    /// D(1)=𝟙, D(−1)=−𝟙, D(±I)=∓iσx, D(±J)=∓iσy, D(±K)=∓iσz, multiplied
    /// numerically. Table entries must agree with rep-matrix products.
    fn rep2(g: usize) -> CMat {
        let i = C64::new(0.0, 1.0);
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let eye = array![[o, z], [z, o]];
        let sx = array![[z, o], [o, z]];
        let sy = array![[z, -i], [i, z]];
        let sz = array![[o, z], [z, -o]];
        match g {
            0 => eye,
            1 => eye.mapv(|v| -v),
            2 => sx.mapv(|v| -i * v),
            3 => sx.mapv(|v| i * v),
            4 => sy.mapv(|v| -i * v),
            5 => sy.mapv(|v| i * v),
            6 => sz.mapv(|v| -i * v),
            7 => sz.mapv(|v| i * v),
            _ => unreachable!(),
        }
    }

    #[test]
    fn q8_table_matches_matrix_representation() {
        let g = FiniteGroup::q8();
        for a in 0..8 {
            for b in 0..8 {
                let product = rep2(a).dot(&rep2(b));
                let table_says = rep2(g.mul(a, b));
                assert!(
                    max_abs_diff(&product, &table_says) < crate::tol::EXACT,
                    "table disagrees with matrix product at ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn q8_character_matches_representation_traces() {
        let g = FiniteGroup::q8();
        for e in 0..8 {
            let trace: C64 = rep2(e).diag().sum();
            assert!(trace.im.abs() < crate::tol::EXACT);
            assert!((trace.re - g.char_fund(e)).abs() < crate::tol::EXACT);
        }
    }

    #[test]
    fn q8_quaternion_relations() {
        let g = FiniteGroup::q8();
        let (m1, i, j, k) = (1, 2, 4, 6);
        assert_eq!(g.mul(i, i), m1, "I² = −1");
        assert_eq!(g.mul(j, j), m1, "J² = −1");
        assert_eq!(g.mul(k, k), m1, "K² = −1");
        assert_eq!(g.mul(i, j), k, "IJ = K");
        assert_eq!(g.mul(j, i), g.mul(m1, k), "JI = −K");
        assert_eq!(g.mul(g.mul(i, j), k), m1, "IJK = −1");
    }

    #[test]
    fn q8_has_five_conjugacy_classes() {
        let g = FiniteGroup::q8();
        let classes = g.conjugacy_classes();
        assert_eq!(
            classes,
            vec![vec![0], vec![1], vec![2, 3], vec![4, 5], vec![6, 7]]
        );
    }

    #[test]
    fn right_regular_is_antihomomorphism() {
        let g = FiniteGroup::q8();
        for h1 in 0..8 {
            for h2 in 0..8 {
                let lhs = g.right_regular(h2).compose(&g.right_regular(h1));
                let rhs = g.right_regular(g.mul(h1, h2));
                assert_eq!(lhs, rhs, "θ(h₂)θ(h₁) ≠ θ(h₁h₂) at ({h1},{h2})");
            }
        }
    }

    #[test]
    fn left_regular_is_homomorphism_and_commutes_with_right() {
        let g = FiniteGroup::q8();
        for h1 in 0..8 {
            for h2 in 0..8 {
                let lhs = g.left_regular(h1).compose(&g.left_regular(h2));
                assert_eq!(lhs, g.left_regular(g.mul(h1, h2)));
                let rl = g.right_regular(h1).compose(&g.left_regular(h2));
                let lr = g.left_regular(h2).compose(&g.right_regular(h1));
                assert_eq!(rl, lr, "left and right actions must commute");
            }
        }
    }

    #[test]
    fn regular_rep_examples() {
        let g = FiniteGroup::q8();
        // |I⟩ under right multiplication by J lands on |K⟩ (IJ = K).
        assert_eq!(g.right_regular(4).apply(2), 6);
        // |I⟩ under left multiplication by J lands on |−K⟩ (JI = −K).
        assert_eq!(g.left_regular(4).apply(2), 7);
    }

    #[test]
    fn permutation_matrix_and_inverse() {
        let g = FiniteGroup::q8();
        let p = g.right_regular(3);
        let m = p.matrix();
        let minv = p.inverse().matrix();
        let eye = CMat::eye(8);
        assert!(max_abs_diff(&m.dot(&minv), &eye) < crate::tol::EXACT);
        // Right regular of g⁻¹ is the inverse permutation.
        assert_eq!(p.inverse(), g.right_regular(g.inv(3)));
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroup::q8();
        let text = g.to_json_string();
        let back = FiniteGroup::from_json_str(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn validation_rejects_corrupted_table() {
        let g = FiniteGroup::q8();
        let mut table: Vec<Vec<usize>> = (0..8).map(|a| (0..8).map(|b| g.mul(a, b)).collect()).collect();
        table[3][5] = 0; // break the latin-square property
        let labels = (0..8).map(|i| g.label(i).to_string()).collect();
        let chars = (0..8).map(|i| g.char_fund(i)).collect();
        assert!(FiniteGroup::from_parts(labels, table, chars).is_err());
    }

    #[test]
    fn validation_rejects_bad_character() {
        let g = FiniteGroup::q8();
        let table: Vec<Vec<usize>> = (0..8).map(|a| (0..8).map(|b| g.mul(a, b)).collect()).collect();
        let labels: Vec<String> = (0..8).map(|i| g.label(i).to_string()).collect();
        // χ(I) ≠ χ(−I) breaks the class-function requirement.
        let chars = vec![2.0, -2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(FiniteGroup::from_parts(labels, table, chars).is_err());
    }
}
