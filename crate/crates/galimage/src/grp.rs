//! Finite subgroups of GL2(GF(p^k)) given by generators.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ff::{FieldRef, FqElem};
use crate::mat::Mat2;

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrpError {
    #[error("closure exceeds {0} elements")]
    CapExceeded(usize),
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("empty generator list")]
    NoGenerators,
    #[error("not a homomorphism: fails on elements {0} and {1}")]
    NotHomomorphism(usize, usize),
    #[error("projective image of order {order} with element orders {stats:?} fits no finite subgroup of PGL2")]
    Unclassifiable { order: usize, stats: BTreeMap<usize, usize> },
}

#[derive(Clone)]
pub struct MatrixGroup {
    pub field: FieldRef,
    pub generators: Vec<Mat2>,
    /// Breadth-first order from the identity.
    pub elements: Vec<Mat2>,
    /// Indices into `elements` of the scalar matrices.
    pub scalars: Vec<usize>,
    pub proj_order: usize,
    index: HashMap<Mat2, usize>,
    /// For each element but the identity: (parent index, generator index)
    /// with element = parent · generator.
    parent: Vec<(usize, usize)>,
}

impl fmt::Debug for MatrixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixGroup(order {}, scalars {}, over {:?})", self.order(), self.scalars.len(), self.field)
    }
}

pub fn closure(gens: &[Mat2], cap: usize) -> Result<MatrixGroup, GrpError> {
    let first = gens.first().ok_or(GrpError::NoGenerators)?;
    let field = first.field();
    for (i, g) in gens.iter().enumerate() {
        if g.det().is_zero() {
            return Err(GrpError::SingularGenerator(i));
        }
    }
    let id = Mat2::identity(field);
    let mut elements = vec![id];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut parent = vec![(0, 0)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let x = elements[i];
        for (gi, g) in gens.iter().enumerate() {
            let y = x * *g;
            if index.contains_key(&y) {
                continue;
            }
            if elements.len() >= cap {
                return Err(GrpError::CapExceeded(cap));
            }
            index.insert(y, elements.len());
            parent.push((i, gi));
            queue.push_back(elements.len());
            elements.push(y);
        }
    }
    let scalars: Vec<usize> = (0..elements.len()).filter(|&i| elements[i].is_scalar()).collect();
    let proj_order = elements.len() / scalars.len();
    Ok(MatrixGroup { field, generators: gens.to_vec(), elements, scalars, proj_order, index, parent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjType {
    Cyclic(usize),
    Dihedral(usize),
    TetraA4,
    OctaS4,
    IcosaA5,
}

impl ProjType {
    pub fn order(&self) -> usize {
        match self {
            ProjType::Cyclic(n) => *n,
            ProjType::Dihedral(n) => 2 * n,
            ProjType::TetraA4 => 12,
            ProjType::OctaS4 => 24,
            ProjType::IcosaA5 => 60,
        }
    }
    pub fn parse(s: &str) -> Option<ProjType> {
        let num = |pre: &str| s.strip_prefix(pre)?.strip_suffix(')')?.parse().ok();
        match s {
            "A4" => Some(ProjType::TetraA4),
            "S4" => Some(ProjType::OctaS4),
            "A5" => Some(ProjType::IcosaA5),
            _ => num("Cyclic(").map(ProjType::Cyclic).or_else(|| num("Dihedral(").map(ProjType::Dihedral)),
        }
    }
}

impl fmt::Display for ProjType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjType::Cyclic(n) => write!(f, "Cyclic({n})"),
            ProjType::Dihedral(n) => write!(f, "Dihedral({n})"),
            ProjType::TetraA4 => write!(f, "A4"),
            ProjType::OctaS4 => write!(f, "S4"),
            ProjType::IcosaA5 => write!(f, "A5"),
        }
    }
}

impl Serialize for ProjType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl MatrixGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn index_of(&self, m: &Mat2) -> Option<usize> {
        self.index.get(m).copied()
    }
    pub fn contains(&self, m: &Mat2) -> bool {
        self.index.contains_key(m)
    }
    pub fn scalar_elements(&self) -> Vec<Mat2> {
        self.scalars.iter().map(|&i| self.elements[i]).collect()
    }
    pub fn element_order(&self, m: &Mat2) -> usize {
        let mut x = *m;
        let mut k = 1;
        while !x.is_identity() {
            x = x * *m;
            k += 1;
        }
        k
    }
    /// Order of the image in PGL2.
    pub fn proj_element_order(&self, m: &Mat2) -> usize {
        let mut x = *m;
        let mut k = 1;
        while !x.is_scalar() {
            x = x * *m;
            k += 1;
        }
        k
    }
    pub fn scalars_cyclic(&self) -> bool {
        let n = self.scalars.len();
        self.scalars.iter().any(|&i| self.element_order(&self.elements[i]) == n)
    }
    pub fn determinants(&self) -> Vec<FqElem> {
        let mut d: Vec<FqElem> = self.elements.iter().map(|m| m.det()).collect();
        d.sort();
        d.dedup();
        d
    }
    /// Number of projective classes of each projective order.
    pub fn proj_order_stats(&self) -> BTreeMap<usize, usize> {
        let z = self.scalars.len();
        let mut stats = BTreeMap::new();
        for m in &self.elements {
            *stats.entry(self.proj_element_order(m)).or_insert(0) += 1;
        }
        stats.values_mut().for_each(|v| *v /= z);
        stats
    }

    /// Extend generator images to every element along the closure tree and
    /// check the result is multiplicative on all pairs.
    pub fn hom_values<T: Clone + PartialEq>(
        &self,
        gen_images: &[T],
        identity: T,
        op: impl Fn(&T, &T) -> T,
    ) -> Result<Vec<T>, GrpError> {
        assert_eq!(gen_images.len(), self.generators.len());
        let mut vals = vec![identity; self.order()];
        for i in 1..self.order() {
            let (par, g) = self.parent[i];
            vals[i] = op(&vals[par], &gen_images[g]);
        }
        self.check_hom(&vals, op)?;
        Ok(vals)
    }

    fn check_hom<T: PartialEq>(&self, vals: &[T], op: impl Fn(&T, &T) -> T) -> Result<(), GrpError> {
        for a in 0..self.order() {
            for b in 0..self.order() {
                let ab = self.index[&(self.elements[a] * self.elements[b])];
                if vals[ab] != op(&vals[a], &vals[b]) {
                    return Err(GrpError::NotHomomorphism(a, b));
                }
            }
        }
        Ok(())
    }

    /// Subgroup formed by the listed elements (must be closed).
    pub fn subgroup(&self, idx: &[usize]) -> Result<MatrixGroup, GrpError> {
        let gens: Vec<Mat2> = idx.iter().map(|&i| self.elements[i]).collect();
        if gens.is_empty() {
            return closure(&[Mat2::identity(self.field)], 1);
        }
        closure(&gens, self.order())
    }
}

pub fn projective_type(g: &MatrixGroup) -> Result<ProjType, GrpError> {
    let n = g.proj_order;
    let stats = g.proj_order_stats();
    let max = *stats.keys().max().unwrap();
    let count = |k: usize| stats.get(&k).copied().unwrap_or(0);
    let err = || GrpError::Unclassifiable { order: n, stats: stats.clone() };
    if max == n {
        return Ok(ProjType::Cyclic(n));
    }
    if n % 2 == 0 && max == n / 2 {
        let m = n / 2;
        if count(2) == m + usize::from(m % 2 == 0) {
            return Ok(ProjType::Dihedral(m));
        }
        return Err(err());
    }
    let expect: &[(usize, usize)] = match n {
        12 => &[(1, 1), (2, 3), (3, 8)],
        24 => &[(1, 1), (2, 9), (3, 8), (4, 6)],
        60 => &[(1, 1), (2, 15), (3, 20), (5, 24)],
        _ => return Err(err()),
    };
    if stats.len() != expect.len() || expect.iter().any(|&(k, c)| count(k) != c) {
        return Err(err());
    }
    Ok(match n {
        12 => ProjType::TetraA4,
        24 => ProjType::OctaS4,
        _ => ProjType::IcosaA5,
    })
}

pub fn derived_subgroup(g: &MatrixGroup) -> MatrixGroup {
    let inv: Vec<Mat2> = g.elements.iter().map(|m| m.inverse().expect("group elements are invertible")).collect();
    let mut comms = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for a in 0..g.order() {
        for b in 0..g.order() {
            let c = g.elements[a] * g.elements[b] * inv[a] * inv[b];
            if seen.insert(c) {
                comms.push(c);
            }
        }
    }
    closure(&comms, g.order()).expect("commutators lie in the group")
}

/// Kernel of χ after checking χ(ab) = χ(a)χ(b) on all pairs.
pub fn subgroup_from_character(g: &MatrixGroup, chi: impl Fn(&Mat2) -> FqElem) -> Result<MatrixGroup, GrpError> {
    let vals: Vec<FqElem> = g.elements.iter().map(&chi).collect();
    g.check_hom(&vals, |a, b| *a * *b)?;
    let ker: Vec<usize> = (0..g.order()).filter(|&i| vals[i].is_one()).collect();
    g.subgroup(&ker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycNum;
    use crate::ff::{make_field, nth_root_of_unity};

    fn reduce(f: FieldRef, entries: [&str; 4]) -> Mat2 {
        Mat2 { e: entries.map(|s| CycNum::parse(s).unwrap().reduce_mod_p(f).unwrap()) }
    }

    fn binary_icosahedral(f: FieldRef) -> Vec<Mat2> {
        // Quaternions (1+i+j+k)/2 and (φ + φ⁻¹ i + j)/2 as 2×2 matrices,
        // with φ = 1 + ζ5 + ζ5^4 and φ⁻¹ = ζ5 + ζ5^4, written over ζ20.
        vec![
            reduce(f, ["(1 + z^5)/2 @ 20", "(1 + z^5)/2 @ 20", "(-1 + z^5)/2 @ 20", "(1 - z^5)/2 @ 20"]),
            reduce(
                f,
                [
                    "(1 + z^4 + z^16 + z^9 + z)/2 @ 20",
                    "(1)/2",
                    "(-1)/2",
                    "(1 + z^4 + z^16 - z^9 - z)/2 @ 20",
                ],
            ),
        ]
    }

    #[test]
    fn trivial_and_scalar_groups() {
        let f = make_field(13, 1).unwrap();
        let g = closure(&[Mat2::identity(f)], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(projective_type(&g).unwrap(), ProjType::Cyclic(1));
        let f2 = make_field(17, 2).unwrap();
        let z8 = nth_root_of_unity(f2, 8).unwrap();
        let g = closure(&[Mat2::scalar(z8)], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(g.scalars.len(), 8);
        assert!(g.scalars_cyclic());
    }

    #[test]
    fn closure_errors() {
        let f = make_field(13, 1).unwrap();
        let sing = Mat2::from_ints(f, [1, 0, 0, 0]);
        assert_eq!(closure(&[sing], 10).unwrap_err(), GrpError::SingularGenerator(0));
        let z = Mat2::from_ints(f, [2, 0, 0, 1]);
        assert_eq!(closure(&[z], 5).unwrap_err(), GrpError::CapExceeded(5));
        assert_eq!(closure(&[], 5).unwrap_err(), GrpError::NoGenerators);
    }

    #[test]
    fn binary_icosahedral_mod_13() {
        let f = make_field(13, 4).unwrap();
        let g = closure(&binary_icosahedral(f), DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 120);
        assert_eq!(g.scalars.len(), 2);
        assert_eq!(projective_type(&g).unwrap(), ProjType::IcosaA5);
        // A5 is perfect.
        assert_eq!(derived_subgroup(&g).order(), 120);
    }

    #[test]
    fn klein_four_is_dihedral_2() {
        let f = make_field(13, 1).unwrap();
        let g = closure(&[Mat2::from_ints(f, [1, 0, 0, -1]), Mat2::from_ints(f, [0, 1, 1, 0])], DEFAULT_CAP).unwrap();
        assert_eq!(g.proj_order, 4);
        assert_eq!(projective_type(&g).unwrap(), ProjType::Dihedral(2));
    }

    #[test]
    fn octahedral_derived_subgroup_is_tetrahedral() {
        let f = make_field(17, 1).unwrap();
        let gens = [
            reduce(f, ["z @ 4", "0", "0", "-z @ 4"]),
            reduce(f, ["0", "1", "-1", "0"]),
            reduce(f, ["(1 + z)/2 @ 4", "(1 + z)/2 @ 4", "(-1 + z)/2 @ 4", "(1 - z)/2 @ 4"]),
            reduce(f, ["z @ 8", "0", "0", "z^7 @ 8"]),
        ];
        let g = closure(&gens, DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 48);
        assert_eq!(projective_type(&g).unwrap(), ProjType::OctaS4);
        let d = derived_subgroup(&g);
        assert_eq!(d.order(), 24);
        assert_eq!(projective_type(&d).unwrap(), ProjType::TetraA4);
    }

    #[test]
    fn dihedral_derived_subgroup() {
        let f = make_field(13, 1).unwrap();
        let gens = [reduce(f, ["z @ 6", "0", "0", "z^2 @ 6"]), reduce(f, ["0", "1", "1", "0"])];
        let g = closure(&gens, DEFAULT_CAP).unwrap();
        assert_eq!(projective_type(&g).unwrap(), ProjType::Dihedral(6));
        let d = derived_subgroup(&g);
        assert_eq!(projective_type(&d).unwrap(), ProjType::Cyclic(3));
    }

    #[test]
    fn kernels_of_characters() {
        let f = make_field(13, 1).unwrap();
        let gens = [reduce(f, ["z @ 6", "0", "0", "z^5 @ 6"]), reduce(f, ["0", "1", "1", "0"])];
        let g = closure(&gens, DEFAULT_CAP).unwrap();
        assert_eq!(subgroup_from_character(&g, |_| f.one()).unwrap().order(), g.order());
        let k = subgroup_from_character(&g, |m| m.det()).unwrap();
        assert_eq!(g.order() % k.order(), 0);
        assert_eq!(k.order() * 2, g.order());
        let bad = subgroup_from_character(&g, |m| m.e[0] + m.e[1]);
        assert!(matches!(bad, Err(GrpError::NotHomomorphism(_, _))));
    }
}
