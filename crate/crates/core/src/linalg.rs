//! Exact sparse linear algebra over [`Coefficient`]: reduced row echelon form
//! with input tracking, used for ranks, kernels, solves and quotients.

use std::collections::BTreeMap;

use crate::coeff::Coefficient;

pub type SparseVec<K> = BTreeMap<K, Coefficient>;

/// `acc += c * v`, pruning cancelled entries.
pub fn axpy<K: Ord + Clone>(acc: &mut SparseVec<K>, c: &Coefficient, v: &SparseVec<K>) {
    if c.is_zero() {
        return;
    }
    for (k, a) in v {
        let delta = a * c;
        match acc.get_mut(k) {
            Some(x) => {
                *x += &delta;
                if x.is_zero() {
                    acc.remove(k);
                }
            }
            None => {
                acc.insert(k.clone(), delta);
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Row<K> {
    vector: SparseVec<K>,
    /// The row as a combination of inserted inputs.
    combo: SparseVec<usize>,
}

/// Incremental reduced row echelon form.
///
/// Each stored row has coefficient 1 at its pivot (its smallest key) and no
/// other row contains that pivot.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    inputs: usize,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon {
            rows: BTreeMap::new(),
            inputs: 0,
        }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Reduces `v` against the stored rows. Returns the remainder (free of
    /// pivot keys) and the combination of inputs that was subtracted.
    pub fn reduce(&self, v: &SparseVec<K>) -> (SparseVec<K>, SparseVec<usize>) {
        let mut rem = v.clone();
        let mut used = SparseVec::new();
        let hits: Vec<K> = rem
            .keys()
            .filter(|k| self.rows.contains_key(*k))
            .cloned()
            .collect();
        for p in hits {
            let Some(c) = rem.get(&p).cloned() else {
                continue;
            };
            let row = &self.rows[&p];
            axpy(&mut rem, &-&c, &row.vector);
            axpy(&mut used, &c, &row.combo);
        }
        (rem, used)
    }

    /// Inserts the next input vector. Returns `Some(kernel)` when it is
    /// dependent on earlier inputs, where `kernel` is a combination of inputs
    /// summing to zero (with coefficient 1 on the new input).
    pub fn insert(&mut self, v: SparseVec<K>) -> Option<SparseVec<usize>> {
        let idx = self.inputs;
        self.inputs += 1;
        let (rem, used) = self.reduce(&v);
        let mut combo = SparseVec::new();
        combo.insert(idx, Coefficient::one());
        axpy(&mut combo, &-Coefficient::one(), &used);
        if rem.is_empty() {
            return Some(combo);
        }
        let (pivot, lead) = rem
            .iter()
            .next()
            .map(|(k, c)| (k.clone(), c.clone()))
            .expect("nonempty remainder");
        let inv = lead.recip().expect("nonzero pivot");
        let vector: SparseVec<K> = rem.into_iter().map(|(k, c)| (k, c * &inv)).collect();
        let combo: SparseVec<usize> = combo.into_iter().map(|(k, c)| (k, c * &inv)).collect();
        for row in self.rows.values_mut() {
            if let Some(c) = row.vector.get(&pivot).cloned() {
                axpy(&mut row.vector, &-&c, &vector);
                axpy(&mut row.combo, &-&c, &combo);
            }
        }
        self.rows.insert(pivot, Row { vector, combo });
        None
    }

    /// Expresses `target` as a combination of inputs, if it lies in their span.
    pub fn solve(&self, target: &SparseVec<K>) -> Option<SparseVec<usize>> {
        let (rem, used) = self.reduce(target);
        rem.is_empty().then_some(used)
    }
}

/// Rank of a list of vectors.
pub fn rank<K: Ord + Clone>(vectors: impl IntoIterator<Item = SparseVec<K>>) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Kernel of the linear map sending input `i` to `images[i]`, as combinations
/// of inputs. Deterministic in the input order.
pub fn kernel<K: Ord + Clone>(images: impl IntoIterator<Item = SparseVec<K>>) -> Vec<SparseVec<usize>> {
    let mut e = Echelon::new();
    images.into_iter().filter_map(|v| e.insert(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(u32, i64)]) -> SparseVec<u32> {
        entries
            .iter()
            .map(|&(k, c)| (k, Coefficient::from_int(c)))
            .collect()
    }

    #[test]
    fn rank_and_kernel() {
        let vs = vec![v(&[(0, 1), (1, 2)]), v(&[(1, 1), (2, 1)]), v(&[(0, 1), (1, 4), (2, 2)])];
        assert_eq!(rank(vs.clone()), 2);
        let k = kernel(vs.clone());
        assert_eq!(k.len(), 1);
        // check the combination really vanishes
        let mut sum = SparseVec::new();
        for (i, c) in &k[0] {
            axpy(&mut sum, c, &vs[*i]);
        }
        assert!(sum.is_empty());
    }

    #[test]
    fn remainder_is_canonical() {
        let mut e = Echelon::new();
        e.insert(v(&[(0, 1), (1, 1)]));
        let (r1, _) = e.reduce(&v(&[(1, 3)]));
        let (r2, _) = e.reduce(&v(&[(0, -3)]));
        assert_eq!(r1, r2);
        assert_eq!(r1, v(&[(1, 3)]));
        assert!(e.solve(&v(&[(0, 2), (1, 2)])).is_some());
        assert!(e.solve(&v(&[(1, 2)])).is_none());
    }

    #[test]
    fn solve_reports_combination() {
        let inputs = vec![v(&[(0, 2)]), v(&[(0, 1), (3, 1)])];
        let mut e = Echelon::new();
        for i in &inputs {
            e.insert(i.clone());
        }
        let target = v(&[(0, 5), (3, 2)]);
        let combo = e.solve(&target).unwrap();
        let mut sum = SparseVec::new();
        for (i, c) in &combo {
            axpy(&mut sum, c, &inputs[*i]);
        }
        assert_eq!(sum, target);
    }
}
