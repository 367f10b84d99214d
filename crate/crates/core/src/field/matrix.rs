use super::{FieldElement, Gf2m};
use crate::error::{Error, Result};

/// A row vector over `GF(2)` packed into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut row = BitRow::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    /// The low `len` bits of `value`, bit `i` at position `i`.
    pub fn from_u128(value: u128, len: usize) -> Self {
        let mut row = BitRow::zeros(len);
        for i in 0..len.min(128) {
            row.set(i, (value >> i) & 1 == 1);
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

/// A dense matrix over `GF(2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitRow>,
    cols: usize,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<BitRow>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        BitMatrix { rows, cols }
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduced row echelon form with zero rows dropped.
    pub fn reduced_row_echelon(&self) -> BitMatrix {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rows.truncate(rank);
        BitMatrix { rows, cols: self.cols }
    }
}

pub fn rank_gf2(m: &BitMatrix) -> usize {
    m.reduced_row_echelon().rows.len()
}

/// Solves `A v = y` over `GF(2^m)` for a system with at least as many rows
/// as unknowns. Fails if the columns are dependent or the extra rows
/// disagree with the solution.
pub fn solve_gf2m(
    field: &Gf2m,
    a: &[Vec<FieldElement>],
    y: &[FieldElement],
) -> Result<Vec<FieldElement>> {
    assert_eq!(a.len(), y.len());
    let n = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<FieldElement>> = a
        .iter()
        .zip(y)
        .map(|(row, &rhs)| {
            assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..aug.len())
            .find(|&r| !aug[r][col].is_zero())
            .ok_or(Error::SingularSystem)?;
        aug.swap(col, p);
        let inv = field.inv(aug[col][col]).expect("pivot is nonzero");
        for v in aug[col].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            let factor = row[col];
            if r != col && !factor.is_zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot).skip(col) {
                    *v += field.mul(factor, pv);
                }
            }
        }
    }
    if aug[n..].iter().any(|row| !row[n].is_zero()) {
        return Err(Error::InconsistentSystem);
    }
    Ok(aug[..n].iter().map(|row| row[n]).collect())
}

/// Inverse of a square matrix over `GF(2^m)`.
pub fn invert_gf2m(field: &Gf2m, a: &[Vec<FieldElement>]) -> Result<Vec<Vec<FieldElement>>> {
    let n = a.len();
    let mut aug: Vec<Vec<FieldElement>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix is not square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { FieldElement::ONE } else { FieldElement::ZERO }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !aug[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        aug.swap(col, p);
        let inv = field.inv(aug[col][col]).expect("pivot is nonzero");
        for v in aug[col].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            let factor = row[col];
            if r != col && !factor.is_zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v += field.mul(factor, pv);
                }
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Reduced row echelon form over `GF(2^m)`, pivoting only in the first
/// `cols` columns; any further columns are carried along. Returns the
/// reduced rows and the pivot column of each nonzero row.
pub fn rref_gf2m(
    field: &Gf2m,
    mut rows: Vec<Vec<FieldElement>>,
    cols: usize,
) -> (Vec<Vec<FieldElement>>, Vec<usize>) {
    let mut pivots = Vec::new();
    for col in 0..cols {
        let rank = pivots.len();
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
        for v in rows[rank].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            let factor = row[col];
            if r != rank && !factor.is_zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot).skip(col) {
                    if !pv.is_zero() {
                        *v += field.mul(factor, pv);
                    }
                }
            }
        }
        pivots.push(col);
    }
    (rows, pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Rank via determinant-free elimination on `u128` bitmasks; a second
    /// implementation that shares nothing with `BitMatrix`.
    fn rank_by_masks(rows: &[Vec<bool>]) -> usize {
        let mut basis: Vec<u128> = Vec::new();
        for row in rows {
            let mut v = row.iter().enumerate().fold(0u128, |a, (i, &b)| a | ((b as u128) << i));
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                basis.push(v);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        basis.len()
    }

    fn bit_matrix() -> impl Strategy<Value = Vec<Vec<bool>>> {
        (1usize..12, 1usize..100)
            .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(any::<bool>(), c), r))
    }

    fn to_matrix(rows: &[Vec<bool>]) -> BitMatrix {
        BitMatrix::from_rows(rows.iter().map(|r| BitRow::from_bits(r)).collect(), rows[0].len())
    }

    proptest! {
        #[test]
        fn rank_agrees_with_mask_elimination(rows in bit_matrix()) {
            prop_assume!(rows[0].len() <= 128);
            prop_assert_eq!(rank_gf2(&to_matrix(&rows)), rank_by_masks(&rows));
        }

        #[test]
        fn echelon_form_is_idempotent(rows in bit_matrix()) {
            let m = to_matrix(&rows);
            let once = m.reduced_row_echelon();
            prop_assert_eq!(once.reduced_row_echelon(), once.clone());
            prop_assert!(once.rows().len() <= rows.len().min(m.cols()));
        }
    }

    #[test]
    fn solve_and_invert_round_trip() {
        let f = Gf2m::new(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 7;
        let a: Vec<Vec<_>> = (0..n).map(|_| (0..n).map(|_| f.random(&mut rng)).collect()).collect();
        let x: Vec<_> = (0..n).map(|_| f.random(&mut rng)).collect();
        let y: Vec<_> = a
            .iter()
            .map(|row| row.iter().zip(&x).map(|(&p, &q)| f.mul(p, q)).sum())
            .collect();
        assert_eq!(solve_gf2m(&f, &a, &y).unwrap(), x);
        let inv = invert_gf2m(&f, &a).unwrap();
        for (i, row) in a.iter().enumerate() {
            for j in 0..n {
                let v: FieldElement = row.iter().zip(&inv).map(|(&p, q)| f.mul(p, q[j])).sum();
                assert_eq!(v, if i == j { FieldElement::ONE } else { FieldElement::ZERO });
            }
        }
    }

    #[test]
    fn rref_identifies_pivots() {
        let f = Gf2m::new(16).unwrap();
        let (o, z, two) = (FieldElement::ONE, FieldElement::ZERO, FieldElement(2));
        // x0 + x1 = 3, 2 x1 = 4, x2 free
        let rows = vec![vec![o, o, z, FieldElement(3)], vec![z, two, z, FieldElement(4)]];
        let (red, piv) = rref_gf2m(&f, rows, 3);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(red[1][3], FieldElement(2));
        assert_eq!(red[0][3], FieldElement(1));
    }

    #[test]
    fn overdetermined_systems() {
        let f = Gf2m::new(8).unwrap();
        let one = FieldElement::ONE;
        let z = FieldElement::ZERO;
        let a = vec![vec![one, z], vec![z, one], vec![one, one]];
        let sol = solve_gf2m(&f, &a, &[FieldElement(3), FieldElement(5), FieldElement(6)]).unwrap();
        assert_eq!(sol, vec![FieldElement(3), FieldElement(5)]);
        assert_eq!(
            solve_gf2m(&f, &a, &[FieldElement(3), FieldElement(5), FieldElement(7)]),
            Err(Error::InconsistentSystem)
        );
        let dependent = vec![vec![one, one], vec![one, one]];
        assert_eq!(solve_gf2m(&f, &dependent, &[one, one]), Err(Error::SingularSystem));
        assert_eq!(invert_gf2m(&f, &dependent), Err(Error::SingularSystem));
    }
}
