use super::*;
use crate::combinatorics::pattern_sets;
use crate::rational::{int, ratio};

fn dv(n: usize, e: &[usize]) -> DemandVector {
    DemandVector::new(n, e.to_vec()).unwrap()
}

fn gf(m: u32) -> Gf2m {
    Gf2m::new(m).unwrap()
}

/// Pattern for (1,1,2,3), t=2 that keeps files 1 and 2 together, files 1
/// and 3 together, and splits file 1 from files 2 and 3 on the mixed type.
fn split_pattern(d: &DemandVector) -> PatternSet {
    PatternSet::from_fn(d, 2, |ty| match ty.counts.as_slice() {
        [2, 1, 0] => vec![vec![1, 2]],
        [2, 0, 1] => vec![vec![1, 3]],
        [1, 1, 1] => vec![vec![1], vec![2, 3]],
        other => panic!("unexpected type {other:?}"),
    })
}

/// "A23" style name of a single-instance segment.
fn label(layout: &SegmentLayout, idx: usize) -> String {
    let id = layout.id(idx);
    let letter = (b'A' + id.file as u8 - 1) as char;
    format!("{letter}{}", id.users.iter().map(|u| u.to_string()).collect::<String>())
}

fn labels(layout: &SegmentLayout, log: &[Transmission]) -> BTreeSet<BTreeSet<String>> {
    log.iter().map(|tx| tx.support.iter().map(|&i| label(layout, i)).collect()).collect()
}

fn set(items: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    items.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
}

use std::collections::BTreeSet;

fn single_plan(d: &DemandVector, t: usize, p: PatternSet) -> InstancePlan {
    InstancePlan { t, r: 1, entries: vec![PlanEntry { demand: d.clone(), counts: vec![(p, 1)] }] }
}

#[test]
fn layout_numbering() {
    let layout = SegmentLayout::new(3, 4, 2, 6);
    assert_eq!(layout.total(), 6 * 3 * 6);
    for i in 0..layout.total() {
        assert_eq!(layout.index(layout.id(i)), i);
    }
    assert_eq!(layout.user_segments(1).len(), 6 * 3 * 3);
    assert_eq!(layout.file_segments(2).len(), 36);
}

#[test]
fn instance_counts() {
    let d = dv(3, &[1, 1, 1, 1]);
    let nd = PatternSet::no_decomposition(&d, 2);
    let plan = plan_instances(2, &[(d.clone(), vec![(nd.clone(), ratio(5, 6)), (PatternSet::uncoded(), ratio(1, 6))])]).unwrap();
    assert_eq!(plan.r, 6);
    assert_eq!(plan.entries[0].counts, vec![(PatternSet::uncoded(), 1), (nd.clone(), 5)]);
    assert_eq!(plan.pattern_of_instance(&d, 1), Some(&PatternSet::uncoded()));
    assert_eq!(plan.pattern_of_instance(&d, 6), Some(&nd));

    let plan = plan_instances(2, &[(d.clone(), vec![(nd.clone(), int(1))])]).unwrap();
    assert_eq!(plan.r, 1);
    let plan = plan_instances(2, &[(d.clone(), vec![(PatternSet::uncoded(), ratio(1, 3)), (nd, ratio(2, 3))])]).unwrap();
    assert_eq!(plan.r, 3);
    assert_eq!(plan.entries[0].counts.iter().map(|c| c.1).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn prefetch_sizes() {
    let pre = prefetch(3, 4, 2, 1, 8, gf(32), 7).unwrap();
    assert_eq!((pre.code.info_len(), pre.code.code_len()), (9, 17));
    let pre = prefetch(3, 4, 2, 6, 48, gf(128), 7).unwrap();
    assert_eq!((pre.code.info_len(), pre.code.code_len()), (54, 102));
    assert!(pre.caches.iter().all(|c| c.parities.len() == 48));
    assert_eq!(
        prefetch(3, 4, 2, 6, 48, gf(64), 7).unwrap_err(),
        Error::FieldTooSmall { required: 102, available: 64 }
    );
    let doubled = prefetch(2, 3, 1, 1, 2, gf(16), 1).unwrap();
    assert_eq!(doubled.code.code_len(), 2 * doubled.code.info_len());
}

#[test]
fn caches_do_not_depend_on_demands() {
    let a = prefetch(3, 4, 2, 1, 8, gf(32), 99).unwrap();
    let b = prefetch(3, 4, 2, 1, 8, gf(32), 99).unwrap();
    let d = dv(3, &[1, 1, 2, 3]);
    let plan = single_plan(&d, 2, split_pattern(&d));
    deliver(&d, &plan, &a).unwrap();
    assert_eq!(a.caches, b.caches);
    assert_eq!(a.segments, b.segments);
}

#[test]
fn split_pattern_delivery() {
    let d = dv(3, &[1, 1, 2, 3]);
    let pre = prefetch(3, 4, 2, 1, 8, gf(32), 3).unwrap();
    let log = deliver(&d, &single_plan(&d, 2, split_pattern(&d)), &pre).unwrap();
    assert_eq!(
        labels(&pre.layout, &log),
        set(&[&["A23", "A13", "B12"], &["A24", "A14", "C12"], &["B14", "C13"], &["B24", "C23"], &["A34"]])
    );
}

#[test]
fn singleton_delivery() {
    let d = dv(3, &[1, 1, 2, 3]);
    let pre = prefetch(3, 4, 2, 1, 8, gf(32), 3).unwrap();
    let log = deliver(&d, &single_plan(&d, 2, PatternSet::all_singletons(&d, 2)), &pre).unwrap();
    assert_eq!(
        labels(&pre.layout, &log),
        set(&[
            &["A34"], &["B12"], &["B14"], &["B24"], &["C12"], &["C13"], &["C23"], &["A13", "A23"], &["A14", "A24"]
        ])
    );
}

#[test]
fn uncoded_delivery_sends_two_files() {
    let d = dv(3, &[1, 1, 1, 1]);
    let pre = prefetch(3, 4, 2, 1, 3, gf(32), 3).unwrap();
    let log = deliver(&d, &single_plan(&d, 2, PatternSet::uncoded()), &pre).unwrap();
    assert_eq!(log.len(), 12);
    let files: BTreeSet<usize> = log.iter().map(|tx| pre.layout.id(tx.support[0]).file).collect();
    assert_eq!(files, BTreeSet::from([1, 2]));
}

#[test]
fn unknown_demand_is_rejected() {
    let d = dv(3, &[1, 1, 2, 3]);
    let pre = prefetch(3, 4, 2, 1, 8, gf(32), 3).unwrap();
    let plan = single_plan(&d, 2, split_pattern(&d));
    assert!(matches!(deliver(&dv(3, &[1, 1, 2, 2]), &plan, &pre), Err(Error::PlanMismatch(_))));
}

#[test]
fn split_pattern_first_user() {
    let d = dv(3, &[1, 1, 2, 3]);
    let plan = single_plan(&d, 2, split_pattern(&d));
    let pre = prefetch(3, 4, 2, 1, 8, gf(32), 5).unwrap();
    let log = deliver(&d, &plan, &pre).unwrap();
    let out = decode_constructive(&pre.layout, &pre.code, &pre.caches[0], &d, &plan, &log).unwrap();
    assert_eq!(out.collected, 1);
    assert_eq!(out.rank, 9);
    let source: Vec<_> = pre.layout.file_segments(1).iter().map(|&i| pre.segments[i]).collect();
    assert_eq!(out.file, source);
}

#[test]
fn uncoded_user_collects_six() {
    let d = dv(3, &[1, 1, 1, 1]);
    let plan = single_plan(&d, 2, PatternSet::uncoded());
    let pre = prefetch(3, 4, 2, 1, 3, gf(32), 5).unwrap();
    let log = deliver(&d, &plan, &pre).unwrap();
    for cache in &pre.caches {
        let out = decode_constructive(&pre.layout, &pre.code, cache, &d, &plan, &log).unwrap();
        assert_eq!(out.collected, 6);
    }
}

#[test]
fn every_pattern_decodes_on_one_instance() {
    for (n, k, t) in [(3, 4, 2), (2, 3, 1), (3, 3, 1), (2, 4, 2), (3, 3, 0), (2, 2, 2)] {
        for d in crate::combinatorics::representative_demands(n, k) {
            for p in pattern_sets(&d, t, 1000).unwrap() {
                let report = verify_single_pattern(&d, t, &p, gf(32), 11)
                    .unwrap_or_else(|e| panic!("{d} t={t} {p}: {e}"));
                assert_eq!(report.run.transmissions, report.run.expected_transmissions);
            }
        }
    }
}

#[test]
fn full_caching_needs_no_delivery() {
    let d = dv(2, &[1, 2, 2]);
    let report = verify_single_pattern(&d, 3, &PatternSet::no_decomposition(&d, 3), gf(16), 1).unwrap();
    assert_eq!(report.run.transmissions, 0);
}

#[test]
fn oracle_edge_cases() {
    let d = dv(2, &[1, 2]);
    let pre = prefetch(2, 2, 0, 1, 0, gf(16), 1).unwrap();
    let generator = pre.code.parity_generator();
    let nothing = decode_oracle(&pre.layout, &pre.code, &generator, &pre.caches[0], &d, &[]);
    assert_eq!(nothing.file, vec![None]);
    let everything: Vec<Transmission> = (0..pre.layout.total())
        .map(|i| Transmission { instance: 1, kind: TransmissionKind::Uncoded, support: vec![i], value: pre.segments[i] })
        .collect();
    let all = decode_oracle(&pre.layout, &pre.code, &generator, &pre.caches[0], &d, &everything);
    assert_eq!(all.complete(), Some(vec![pre.segments[0]]));
}

#[test]
fn redundancy_identity() {
    let report = check_redundancy_reduction(&dv(3, &[1, 1, 2, 3]), 2).unwrap();
    assert!(report.configurations > 0);
    for d in crate::combinatorics::representative_demands(2, 4) {
        check_redundancy_reduction(&d, 1).unwrap();
    }
}

#[test]
fn separation_and_independence() {
    let d = dv(3, &[1, 1, 2, 3]);
    let r = check_separation_independence(&d, 2, &split_pattern(&d)).unwrap();
    assert_eq!(r.transmissions, 5);
    check_separation_independence(&d, 2, &PatternSet::all_singletons(&d, 2)).unwrap();
    // piece of file 1 on users {2,3,4}, which holds no leader of file 1
    let leaderless = vec![(1, UserSet::from_users([3, 4]))];
    assert!(matches!(
        check_separation_independence_with(&d, 2, &PatternSet::all_singletons(&d, 2), &[leaderless]),
        Err(Error::DependenceFound(_))
    ));
}

#[test]
fn singleton_delivery_is_decomposed_uncoded_delivery() {
    let r = check_hidden_connection(&dv(3, &[1, 1, 2, 3]), 2).unwrap();
    assert_eq!(r.pieces, 10);
    assert_eq!(r.segment_occurrences, 12);
    assert_eq!(r.distinct, 9);
    assert_eq!(r.singleton_delivery, 9);
}

#[test]
fn reconstruction_from_delivered_pieces() {
    for d in crate::combinatorics::representative_demands(3, 4) {
        for p in pattern_sets(&d, 2, 1000).unwrap().iter().filter(|p| !p.is_uncoded) {
            let r = check_reconstruction(&d, 2, p).unwrap();
            assert_eq!(r.rank, r.delivered);
        }
    }
}

#[test]
fn two_files_two_users_end_to_end() {
    let spec = crate::region::RegionSpec::build(2, 2, 1, 1000).unwrap();
    let cert = crate::region::min_rate_for_memory(&spec, &ratio(1, 2)).unwrap();
    let alphas: Vec<_> = cert.demands.iter().map(|c| (c.demand.clone(), c.weights.clone())).collect();
    let report = verify_end_to_end(2, 2, 1, &alphas, gf(16), 4).unwrap();
    assert_eq!(report.memory, ratio(1, 2));
    assert_eq!(report.rate, cert.rate);
}
