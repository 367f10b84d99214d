#![allow(dead_code)]

use coded_cache::combinatorics::{DemandVector, PatternSet};
use coded_cache::field::{rank_gf2, BitMatrix, BitRow, FieldElement, Gf2m};
use coded_cache::rank_metric::SystematicRankCode;
use coded_cache::rational::{ratio, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Alphas = Vec<(DemandVector, Vec<(PatternSet, Rational)>)>;

pub fn dv(n: usize, e: &[usize]) -> DemandVector {
    DemandVector::new(n, e.to_vec()).unwrap()
}

/// (1,1,2,3), t=2: files 1,2 together, files 1,3 together, file 1 apart
/// from files 2,3 on the mixed type.
pub fn split_pattern(d: &DemandVector) -> PatternSet {
    PatternSet::from_fn(d, 2, |ty| match ty.counts.as_slice() {
        [2, 1, 0] => vec![vec![1, 2]],
        [2, 0, 1] => vec![vec![1, 3]],
        [1, 1, 1] => vec![vec![1], vec![2, 3]],
        other => panic!("unexpected type {other:?}"),
    })
}

/// (1,1,1,2), t=2: the three-requester type kept whole, the mixed type split.
pub fn triple_split_pattern(d: &DemandVector) -> PatternSet {
    PatternSet::from_fn(d, 2, |ty| match ty.counts.as_slice() {
        [3, 0, 0] => vec![vec![1]],
        [2, 1, 0] => vec![vec![1], vec![2]],
        other => panic!("unexpected type {other:?}"),
    })
}

/// Hand-built weights reaching (M, R) = (4/3, 5/6) for (N, K, t) = (3, 4, 2).
pub fn hand_certificate() -> Alphas {
    let aaaa = dv(3, &[1, 1, 1, 1]);
    let aaab = dv(3, &[1, 1, 1, 2]);
    let aabb = dv(3, &[1, 1, 2, 2]);
    let aabc = dv(3, &[1, 1, 2, 3]);
    vec![
        (
            aaaa.clone(),
            vec![(PatternSet::no_decomposition(&aaaa, 2), ratio(5, 6)), (PatternSet::uncoded(), ratio(1, 6))],
        ),
        (
            aaab.clone(),
            vec![
                (PatternSet::no_decomposition(&aaab, 2), ratio(1, 2)),
                (triple_split_pattern(&aaab), ratio(1, 2)),
            ],
        ),
        (
            aabb.clone(),
            vec![
                (PatternSet::no_decomposition(&aabb, 2), ratio(1, 2)),
                (PatternSet::all_singletons(&aabb, 2), ratio(1, 2)),
            ],
        ),
        (aabc.clone(), vec![(split_pattern(&aabc), ratio(1, 1))]),
    ]
}

/// Random full-rank binary combinations of a codeword must give back the
/// information symbols. Returns the number of successful trials.
pub fn recover_trials(trials: usize, seed: u64) -> usize {
    let field = Gf2m::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = 0;
    for _ in 0..trials {
        let p = rng.gen_range(1..=8);
        let p_o = rng.gen_range(p..=16);
        let code = SystematicRankCode::new(field, p, p_o).unwrap();
        let info: Vec<FieldElement> = (0..p).map(|_| field.random(&mut rng)).collect();
        let word = code.encode(&info);
        let rows = loop {
            let rows: Vec<BitRow> = (0..p)
                .map(|_| BitRow::from_bits(&(0..p_o).map(|_| rng.gen()).collect::<Vec<bool>>()))
                .collect();
            if rank_gf2(&BitMatrix::from_rows(rows.clone(), p_o)) == p {
                break rows;
            }
        };
        let combos: Vec<(BitRow, FieldElement)> = rows
            .into_iter()
            .map(|row| {
                let value = row.ones().map(|j| word[j]).sum();
                (row, value)
            })
            .collect();
        if code.recover(&combos).ok().as_ref() == Some(&info) {
            ok += 1;
        }
    }
    ok
}
