//! Systematic rank-metric codes built from linearized polynomials over
//! `GF(2^m)`, evaluated at the polynomial basis `1, x, ..., x^(P_o - 1)`.

use crate::error::{Error, Result};
use crate::field::{invert_gf2m, rank_gf2, solve_gf2m, BitMatrix, BitRow, FieldElement, Gf2m};

/// `f(x) = sum_i v_i x^(2^(i-1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPolynomial {
    pub coeffs: Vec<FieldElement>,
}

impl LinearizedPolynomial {
    pub fn evaluate(&self, field: &Gf2m, x: FieldElement) -> FieldElement {
        let mut power = x;
        let mut acc = FieldElement::ZERO;
        for &v in &self.coeffs {
            acc += field.mul(v, power);
            power = field.square(power);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// A `(P_o, P)` code: the first `P` evaluations are the information symbols
/// and the remaining `P_o - P` are parities.
#[derive(Clone, Debug)]
pub struct SystematicRankCode {
    field: Gf2m,
    p: usize,
    p_o: usize,
    eval_points: Vec<FieldElement>,
}

/// Row `[x, x^2, x^4, ...]` of length `len`.
fn moore_row(field: &Gf2m, x: FieldElement, len: usize) -> Vec<FieldElement> {
    std::iter::successors(Some(x), |&y| Some(field.square(y))).take(len).collect()
}

impl SystematicRankCode {
    pub fn new(field: Gf2m, p: usize, p_o: usize) -> Result<Self> {
        if p > p_o {
            return Err(Error::InvalidConfig(format!(
                "information length {p} exceeds code length {p_o}"
            )));
        }
        if p_o > field.degree() as usize {
            return Err(Error::FieldTooSmall { required: p_o, available: field.degree() });
        }
        let eval_points = (0..p_o as u32).map(|i| field.basis(i)).collect();
        Ok(SystematicRankCode { field, p, p_o, eval_points })
    }

    pub fn field(&self) -> &Gf2m {
        &self.field
    }

    pub fn info_len(&self) -> usize {
        self.p
    }

    pub fn code_len(&self) -> usize {
        self.p_o
    }

    pub fn parity_len(&self) -> usize {
        self.p_o - self.p
    }

    pub fn eval_points(&self) -> &[FieldElement] {
        &self.eval_points
    }

    fn check_len(&self, info: &[FieldElement]) {
        assert_eq!(info.len(), self.p, "expected {} information symbols", self.p);
    }

    /// The unique `f` with `f(theta_j) = info_j` for `j = 1..P`.
    pub fn interpolate(&self, info: &[FieldElement]) -> LinearizedPolynomial {
        self.check_len(info);
        if self.p == 0 {
            return LinearizedPolynomial { coeffs: Vec::new() };
        }
        let moore: Vec<_> =
            self.eval_points[..self.p].iter().map(|&x| moore_row(&self.field, x, self.p)).collect();
        let coeffs = solve_gf2m(&self.field, &moore, info)
            .expect("evaluation points are linearly independent over GF(2)");
        LinearizedPolynomial { coeffs }
    }

    pub fn parities(&self, info: &[FieldElement]) -> Vec<FieldElement> {
        let f = self.interpolate(info);
        self.eval_points[self.p..].iter().map(|&x| f.evaluate(&self.field, x)).collect()
    }

    /// All `P_o` evaluations: the information symbols followed by parities.
    pub fn encode(&self, info: &[FieldElement]) -> Vec<FieldElement> {
        let mut out = info.to_vec();
        out.extend(self.parities(info));
        out
    }

    /// Matrix `E` with `parities(w) = E w`, one row per parity.
    pub fn parity_generator(&self) -> Vec<Vec<FieldElement>> {
        if self.p == 0 {
            return vec![Vec::new(); self.parity_len()];
        }
        let moore: Vec<_> =
            self.eval_points[..self.p].iter().map(|&x| moore_row(&self.field, x, self.p)).collect();
        let inv = invert_gf2m(&self.field, &moore)
            .expect("evaluation points are linearly independent over GF(2)");
        self.eval_points[self.p..]
            .iter()
            .map(|&x| {
                let ext = moore_row(&self.field, x, self.p);
                (0..self.p)
                    .map(|j| ext.iter().zip(&inv).map(|(&a, row)| self.field.mul(a, row[j])).sum())
                    .collect()
            })
            .collect()
    }

    /// Recovers the information symbols from observations `y = sum_j g_j f(theta_j)`
    /// with `g` over `GF(2)`.
    pub fn recover(&self, combos: &[(BitRow, FieldElement)]) -> Result<Vec<FieldElement>> {
        for (g, _) in combos {
            assert_eq!(g.len(), self.p_o, "combination row has wrong length");
        }
        let rows: Vec<BitRow> = combos.iter().map(|(g, _)| g.clone()).collect();
        let rank = rank_gf2(&BitMatrix::from_rows(rows, self.p_o));
        if rank < self.p {
            return Err(Error::RankDeficient { rank, needed: self.p });
        }
        if self.p == 0 {
            return Ok(Vec::new());
        }
        let (a, y): (Vec<_>, Vec<_>) = combos
            .iter()
            .map(|(g, y)| {
                let x: FieldElement = g.ones().map(|j| self.eval_points[j]).sum();
                (moore_row(&self.field, x, self.p), *y)
            })
            .unzip();
        let coeffs = solve_gf2m(&self.field, &a, &y)?;
        let f = LinearizedPolynomial { coeffs };
        Ok(self.eval_points[..self.p].iter().map(|&x| f.evaluate(&self.field, x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_info(f: &Gf2m, rng: &mut ChaCha8Rng, n: usize) -> Vec<FieldElement> {
        (0..n).map(|_| f.random(rng)).collect()
    }

    fn combos_from(evals: &[FieldElement], g: &[BitRow]) -> Vec<(BitRow, FieldElement)> {
        g.iter().map(|row| (row.clone(), row.ones().map(|j| evals[j]).sum())).collect()
    }

    fn random_full_rank(rng: &mut ChaCha8Rng, p: usize, p_o: usize) -> Vec<BitRow> {
        loop {
            let rows: Vec<BitRow> = (0..p)
                .map(|_| BitRow::from_bits(&(0..p_o).map(|_| rng.gen()).collect::<Vec<bool>>()))
                .collect();
            if rank_gf2(&BitMatrix::from_rows(rows.clone(), p_o)) == p {
                return rows;
            }
        }
    }

    #[test]
    fn interpolation_round_trip() {
        let f = Gf2m::new(32).unwrap();
        let code = SystematicRankCode::new(f, 9, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let info = random_info(&f, &mut rng, 9);
        let poly = code.interpolate(&info);
        for (j, &w) in info.iter().enumerate() {
            assert_eq!(poly.evaluate(&f, code.eval_points()[j]), w);
        }
        let all: Vec<_> = code.eval_points().iter().map(|&x| poly.evaluate(&f, x)).collect();
        assert_eq!(code.encode(&info), all);
    }

    #[test]
    fn small_cases() {
        let f = Gf2m::new(8).unwrap();
        let code = SystematicRankCode::new(f, 3, 5).unwrap();
        assert!(code.interpolate(&[FieldElement::ZERO; 3]).is_zero());
        assert_eq!(code.parities(&[FieldElement::ZERO; 3]), vec![FieldElement::ZERO; 2]);
        let single = SystematicRankCode::new(f, 1, 1).unwrap();
        let w = FieldElement(0x53);
        assert_eq!(single.interpolate(&[w]).coeffs, vec![w]);
        assert!(single.parities(&[w]).is_empty());
        assert_eq!(
            SystematicRankCode::new(f, 3, 9).unwrap_err(),
            Error::FieldTooSmall { required: 9, available: 8 }
        );
    }

    #[test]
    fn parity_generator_matches_encoding() {
        let f = Gf2m::new(64).unwrap();
        let code = SystematicRankCode::new(f, 6, 14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let info = random_info(&f, &mut rng, 6);
        let e = code.parity_generator();
        let via_matrix: Vec<FieldElement> =
            e.iter().map(|row| row.iter().zip(&info).map(|(&a, &b)| f.mul(a, b)).sum()).collect();
        assert_eq!(via_matrix, code.parities(&info));
    }

    #[test]
    fn recovery_from_systematic_and_parity_rows() {
        let f = Gf2m::new(32).unwrap();
        let code = SystematicRankCode::new(f, 5, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info = random_info(&f, &mut rng, 5);
        let evals = code.encode(&info);
        let unit = |j: usize| {
            let mut r = BitRow::zeros(12);
            r.set(j, true);
            r
        };
        let systematic: Vec<_> = (0..5).map(unit).collect();
        assert_eq!(code.recover(&combos_from(&evals, &systematic)).unwrap(), info);
        let parity_only: Vec<_> = (5..12).map(unit).collect();
        assert_eq!(code.recover(&combos_from(&evals, &parity_only)).unwrap(), info);
        let deficient: Vec<_> = (0..4).map(unit).chain([{
            let mut r = unit(0);
            r.set(1, true);
            r
        }]).collect();
        assert_eq!(
            code.recover(&combos_from(&evals, &deficient)),
            Err(Error::RankDeficient { rank: 4, needed: 5 })
        );
    }

    #[test]
    fn recovery_from_random_full_rank_rows() {
        let f = Gf2m::new(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let p = rng.gen_range(1..=12);
            let p_o = rng.gen_range(p..=24);
            let code = SystematicRankCode::new(f, p, p_o).unwrap();
            let info = random_info(&f, &mut rng, p);
            let evals = code.encode(&info);
            let g = random_full_rank(&mut rng, p, p_o);
            assert_eq!(code.recover(&combos_from(&evals, &g)).unwrap(), info);
        }
    }

    proptest! {
        #[test]
        fn evaluation_is_additive(coeffs in prop::collection::vec(any::<u64>(), 1..8), x in any::<u64>(), y in any::<u64>()) {
            let f = Gf2m::new(64).unwrap();
            let poly = LinearizedPolynomial { coeffs: coeffs.into_iter().map(|c| FieldElement(c as u128)).collect() };
            let (x, y) = (FieldElement(x as u128), FieldElement(y as u128));
            prop_assert_eq!(poly.evaluate(&f, x + y), poly.evaluate(&f, x) + poly.evaluate(&f, y));
        }

        #[test]
        fn recovery_ignores_row_operations(seed in any::<u64>()) {
            let f = Gf2m::new(16).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, p_o) = (4, 10);
            let code = SystematicRankCode::new(f, p, p_o).unwrap();
            let info = random_info(&f, &mut rng, p);
            let evals = code.encode(&info);
            let g = random_full_rank(&mut rng, p, p_o);
            // add row 0 into every other row
            let mut mixed = g.clone();
            for row in mixed.iter_mut().skip(1) {
                row.xor_assign(&g[0]);
            }
            let a = code.recover(&combos_from(&evals, &g)).unwrap();
            let b = code.recover(&combos_from(&evals, &mixed)).unwrap();
            prop_assert_eq!(&a, &info);
            prop_assert_eq!(a, b);
        }
    }
}
