mod common;

use cpslint::ast::ColumnType;
use cpslint::corruptor::{compose, corrupt, select_blocks, CorruptionJob, CorruptionKind, Records};
use cpslint::transforms::enforce_type;
use cpslint::Column;
use proptest::prelude::*;

fn records() -> Records {
    Records::from_table(&common::reference(1000))
}

fn kind() -> impl Strategy<Value = CorruptionKind> {
    proptest::sample::select(CorruptionKind::ALL.to_vec())
}

fn rows_altered(before: &Records, after: &Records) -> usize {
    before.rows.iter().zip(&after.rows).filter(|(a, b)| a != b).count()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn blocks_are_aligned_and_disjoint(seed in any::<u64>(), rate in 0.001f64..0.3, block in 1usize..40, kind in kind()) {
        let recs = records();
        let mut job = common::job(kind);
        job.seed = seed;
        job.rate = rate;
        job.block_size = block;
        let blocks = select_blocks(&recs, &job).unwrap();
        prop_assert_eq!(blocks.len(), job.block_count(recs.rows.len()));
        prop_assert!(blocks.iter().all(|s| s % block == 0 && s + block <= recs.rows.len()));
        prop_assert!(blocks.windows(2).all(|w| w[0] + block <= w[1]));
    }

    #[test]
    fn in_place_kinds_stay_within_budget(seed in any::<u64>(), kind in proptest::sample::select(vec![
        CorruptionKind::TypeMismatch, CorruptionKind::OutOfBounds, CorruptionKind::OutOfOrderKeepTimestamps,
        CorruptionKind::OutOfOrderNewTimestamps, CorruptionKind::MissingFields,
    ])) {
        let recs = records();
        let mut job = common::job(kind);
        job.seed = seed;
        job.rate = 0.03;
        let out = corrupt(&recs, &job).unwrap();
        prop_assert_eq!(out.rows.len(), recs.rows.len());
        let altered = rows_altered(&recs, &out);
        prop_assert!(altered >= job.block_size && altered <= job.block_count(recs.rows.len()) * job.block_size,
            "{} rows altered", altered);
    }

    #[test]
    fn missing_rows_is_pure_deletion(seed in any::<u64>()) {
        let recs = records();
        let mut job = CorruptionJob::new(CorruptionKind::MissingRows, seed);
        job.rate = 0.05;
        let out = corrupt(&recs, &job).unwrap();
        let blocks = select_blocks(&recs, &job).unwrap();
        let kept: Vec<&Vec<String>> = recs.rows.iter().enumerate()
            .filter(|(i, _)| !blocks.iter().any(|s| (*s..s + job.block_size).contains(i)))
            .map(|(_, r)| r)
            .collect();
        prop_assert_eq!(out.rows.iter().collect::<Vec<_>>(), kept);
    }

    #[test]
    fn type_mismatch_cells_fail_numeric_parsing(seed in any::<u64>()) {
        let recs = records();
        let out = corrupt(&recs, &CorruptionJob::new(CorruptionKind::TypeMismatch, seed)).unwrap();
        for name in ["Voltage", "Current", "Energy"] {
            let c = recs.column_index(name).unwrap();
            for (before, after) in recs.rows.iter().zip(&out.rows) {
                if before[c] != after[c] {
                    let parsed = enforce_type(&Column::from_text(name, &[after[c].as_str()]), ColumnType::Real);
                    prop_assert!(parsed.cells[0].is_empty(), "{} still parses", after[c]);
                    prop_assert!(after[c].len() == before[c].len() + 1);
                }
            }
        }
    }

    #[test]
    fn misplaced_eol_leaves_long_records(seed in any::<u64>()) {
        let recs = records();
        let job = CorruptionJob::new(CorruptionKind::MisplacedEol, seed);
        let out = corrupt(&recs, &job).unwrap();
        let width = recs.header.len();
        let merged = out.rows.iter().filter(|r| r.len() == 2 * width - 1).count();
        prop_assert_eq!(merged, job.block_count(recs.rows.len()) * job.block_size / 2);
        prop_assert_eq!(out.rows.len() + merged, recs.rows.len());
    }
}

#[test]
fn independent_jobs_can_overlap() {
    let recs = records();
    let overlapping = (0..200u64).any(|seed| {
        let jobs = [CorruptionJob::new(CorruptionKind::OutOfBounds, seed), CorruptionJob::new(CorruptionKind::MissingFields, seed)];
        let mut second = jobs[1].clone();
        second.rate = 0.05;
        let first = select_blocks(&recs, &CorruptionJob { rate: 0.05, ..jobs[0].clone() }).unwrap();
        let other = select_blocks(&recs, &CorruptionJob { seed: seed + 1, ..second }).unwrap();
        first.iter().any(|b| other.contains(b))
    });
    assert!(overlapping);
}

#[test]
fn composition_is_reproducible_and_ordered() {
    let recs = records();
    let jobs = vec![
        CorruptionJob::new(CorruptionKind::OutOfBounds, 3),
        CorruptionJob::new(CorruptionKind::MissingRows, 3),
    ];
    let a = compose(&recs, &jobs).unwrap();
    assert_eq!(a, compose(&recs, &jobs).unwrap());
    assert_eq!(a.rows.len(), recs.rows.len() - 10);
    assert!(compose(&recs, &[]).is_err());
}
