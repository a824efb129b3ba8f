use cpslint::ast::{ColumnType, CutRule, ImputeStrategy, SubstringFilter, ValidRange};
use cpslint::numeric::{index_axis, linear_fill, polynomial_fill, Polynomial};
use cpslint::table::{apply_substring_filters, parse_csv};
use cpslint::transforms::{apply_range, compute_segments, enforce_type, impute, sort_rows};
use cpslint::{CellValue, Column, Table};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn cell() -> impl Strategy<Value = CellValue> {
    prop_oneof![
        3 => (-1000.0f64..1000.0).prop_map(CellValue::Real),
        2 => (-1000i64..1000).prop_map(CellValue::Int),
        1 => "[a-z#!]{1,4}".prop_map(CellValue::Str),
        2 => Just(CellValue::Empty),
    ]
}

fn numeric_cell() -> impl Strategy<Value = CellValue> {
    prop_oneof![
        3 => (-1000.0f64..1000.0).prop_map(CellValue::Real),
        2 => Just(CellValue::Empty),
    ]
}

proptest! {
    #[test]
    fn enforce_type_is_idempotent(cells in proptest::collection::vec(cell(), 0..40), ty in prop_oneof![
        Just(ColumnType::Int), Just(ColumnType::Real), Just(ColumnType::Str)
    ]) {
        let col = Column::new("c", cells);
        let once = enforce_type(&col, ty);
        prop_assert_eq!(enforce_type(&once, ty), once.clone());
        for c in &once.cells {
            let ok = matches!(
                (ty, c),
                (_, CellValue::Empty)
                    | (ColumnType::Int, CellValue::Int(_))
                    | (ColumnType::Real, CellValue::Real(_))
                    | (ColumnType::Str, CellValue::Str(_))
            );
            prop_assert!(ok, "{c:?} under {ty}");
        }
    }

    #[test]
    fn range_keeps_only_values_inside(cells in proptest::collection::vec(numeric_cell(), 0..40),
                                      a in -500.0f64..500.0, b in -500.0f64..500.0) {
        let range = ValidRange::new(a.min(b), a.max(b));
        let col = Column::new("c", cells);
        let out = apply_range(&col, range);
        prop_assert!(out.known_count() <= col.known_count());
        prop_assert_eq!(apply_range(&out, range), out.clone());
        for (before, after) in col.cells.iter().zip(&out.cells) {
            match before.as_f64() {
                Some(v) if range.contains(v) => prop_assert_eq!(after, before),
                _ => prop_assert!(after.is_empty()),
            }
        }
    }

    #[test]
    fn imputation_never_touches_known_cells(cells in proptest::collection::vec(numeric_cell(), 1..40),
                                            pick in 0usize..6) {
        let strategy = [
            ImputeStrategy::Mean, ImputeStrategy::Median, ImputeStrategy::ForwardFill,
            ImputeStrategy::BackFill, ImputeStrategy::Linear, ImputeStrategy::Polynomial(1),
        ][pick];
        let col = Column::new("c", cells);
        let Ok(out) = impute(&col, strategy, None) else { return Ok(()) };
        for (before, after) in col.cells.iter().zip(&out.cells) {
            if !before.is_empty() {
                prop_assert_eq!(before, after);
            }
        }
        let first = col.cells.iter().position(|c| !c.is_empty());
        let last = col.cells.iter().rposition(|c| !c.is_empty());
        if let (Some(first), Some(last)) = (first, last) {
            let filled = |range: std::ops::Range<usize>| out.cells[range].iter().all(|c| !c.is_empty());
            match strategy {
                ImputeStrategy::ForwardFill => prop_assert!(filled(first..out.cells.len())),
                ImputeStrategy::BackFill => prop_assert!(filled(0..last + 1)),
                ImputeStrategy::Linear => prop_assert!(filled(first..last + 1)),
                _ => prop_assert!(filled(0..out.cells.len())),
            }
        }
    }

    #[test]
    fn linear_fill_matches_exact_arithmetic(values in proptest::collection::vec(
        proptest::option::of(-1000i64..1000), 2..30)) {
        let exact: Vec<Option<BigRational>> = values.iter().map(|v| v.map(rat)).collect();
        let xs: Vec<BigRational> = index_axis(values.len());
        let got = linear_fill(&xs, &exact);
        let floats: Vec<Option<f64>> = values.iter().map(|v| v.map(|v| v as f64)).collect();
        let got_f = linear_fill(&index_axis::<f64>(values.len()), &floats);
        for i in 0..values.len() {
            let left = (0..=i).rev().find(|&j| values[j].is_some());
            let right = (i..values.len()).find(|&j| values[j].is_some());
            let expected = match (left, right) {
                (Some(l), Some(r)) if l == r => Some(rat(values[l].unwrap())),
                (Some(l), Some(r)) => {
                    let (y0, y1) = (rat(values[l].unwrap()), rat(values[r].unwrap()));
                    Some(y0.clone() + (y1 - y0) * rat((i - l) as i64) / rat((r - l) as i64))
                }
                _ => None,
            };
            prop_assert_eq!(&got[i], &expected);
            match (&got_f[i], &expected) {
                (Some(f), Some(e)) => {
                    let e = e.numer().to_string().parse::<f64>().unwrap() / e.denom().to_string().parse::<f64>().unwrap();
                    prop_assert!((f - e).abs() <= 1e-9, "{f} vs {e}");
                }
                (None, None) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }
    }

    #[test]
    fn polynomial_fit_recovers_exact_polynomials(coeffs in proptest::collection::vec(-20i64..20, 1..5),
                                                 gaps in proptest::collection::vec(any::<bool>(), 12..30)) {
        let degree = coeffs.len() - 1;
        let truth = |x: i64| coeffs.iter().rev().fold(rat(0), |acc, c| acc * rat(x) + rat(*c));
        let values: Vec<Option<BigRational>> = gaps
            .iter()
            .enumerate()
            .map(|(i, gap)| (!gap || i % 3 == 0).then(|| truth(i as i64)))
            .collect();
        prop_assume!(values.iter().filter(|v| v.is_some()).count() > degree);
        let filled = polynomial_fill(&index_axis(values.len()), &values, degree).unwrap();
        for (i, v) in filled.iter().enumerate() {
            prop_assert_eq!(v.as_ref(), Some(&truth(i as i64)));
        }
        let floats: Vec<Option<f64>> = values
            .iter()
            .map(|v| v.as_ref().map(|r| r.numer().to_string().parse::<f64>().unwrap()))
            .collect();
        let filled_f = polynomial_fill(&index_axis::<f64>(floats.len()), &floats, degree).unwrap();
        for (i, v) in filled_f.iter().enumerate() {
            let t: f64 = truth(i as i64).numer().to_string().parse().unwrap();
            prop_assert!((v.unwrap() - t).abs() <= 1e-6 * t.abs().max(1.0), "{} vs {t}", v.unwrap());
        }
    }

    #[test]
    fn least_squares_residual_is_orthogonal(ys in proptest::collection::vec(-50i64..50, 6..20), degree in 1usize..4) {
        let points: Vec<(BigRational, BigRational)> =
            ys.iter().enumerate().map(|(i, y)| (rat(i as i64), rat(*y))).collect();
        let poly = Polynomial::fit(&points, degree).unwrap();
        for k in 0..=degree {
            let mut dot = rat(0);
            for (x, y) in &points {
                let u = (x.clone() - poly.centre.clone()) / poly.scale.clone();
                let mut p = rat(1);
                for _ in 0..k {
                    p *= u.clone();
                }
                dot += (y.clone() - poly.eval(x.clone())) * p;
            }
            prop_assert_eq!(dot, rat(0));
        }
    }

    #[test]
    fn segments_match_brute_force(labels in proptest::collection::vec(prop_oneof![
        Just(""), Just("go"), Just("stop"), Just("go "),
    ], 0..40)) {
        let rows: Vec<Vec<String>> = labels.iter().enumerate().map(|(i, l)| vec![i.to_string(), l.to_string()]).collect();
        let table = Table::from_text_rows(&["i".to_string(), "U".to_string()], &rows).unwrap();
        let rule = CutRule { column: "U".into(), marker: "go".into() };
        let segments = compute_segments(&table, &rule).unwrap();

        let mut expected: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..labels.len() {
            if table.cell(i, 1).render() == "go" {
                expected.push((start, i));
                start = i;
            }
        }
        expected.push((start, labels.len()));
        let got: Vec<(usize, usize)> = segments.iter().map(|s| (s.start_row, s.end_row_exclusive)).collect();
        prop_assert_eq!(got, expected);
        for (k, s) in segments.iter().enumerate() {
            prop_assert_eq!(s.index, k);
        }
    }

    #[test]
    fn sort_matches_stable_insertion_sort(keys in proptest::collection::vec(proptest::option::of(-5i64..5), 0..40)) {
        let rows: Vec<Vec<String>> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| vec![k.map(|k| k.to_string()).unwrap_or_default(), i.to_string()])
            .collect();
        let raw = Table::from_text_rows(&["k".to_string(), "pos".to_string()], &rows).unwrap();
        let table = raw.with_column(0, enforce_type(&raw.columns()[0], ColumnType::Int)).unwrap();
        let sorted = sort_rows(&table, "k").unwrap();

        let mut order: Vec<usize> = Vec::new();
        for i in 0..keys.len() {
            let rank = |k: Option<i64>| k.map_or((1, 0), |k| (0, k));
            let at = order.iter().position(|&j| rank(keys[j]) > rank(keys[i])).unwrap_or(order.len());
            order.insert(at, i);
        }
        let got: Vec<String> = (0..sorted.row_count()).map(|r| sorted.cell(r, 1).render()).collect();
        let want: Vec<String> = order.iter().map(|i| i.to_string()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn substring_filters_are_idempotent(cells in proptest::collection::vec("[a-c#]{0,6}", 1..10), needle in "[a-c#]{1,2}") {
        let text = format!("A\n{}\n", cells.join("\n"));
        let table = parse_csv(&text, &[]).unwrap();
        let filter = [SubstringFilter::everywhere(needle.clone())];
        let once = apply_substring_filters(&table, &filter).unwrap();
        prop_assert_eq!(apply_substring_filters(&once, &filter).unwrap(), once.clone());
        for r in 0..once.row_count() {
            prop_assert!(!once.cell(r, 0).render().contains(&needle));
        }
    }
}

#[test]
fn csv_text_round_trips_through_the_table_engine() {
    let text = "A,B,C\n1,2.5,\"x, y\"\n,,\n-3,1e3,\"quote \"\"q\"\"\"\n";
    let table = parse_csv(text, &[]).unwrap();
    let again = parse_csv(&table.to_csv_string(), &[]).unwrap();
    assert_eq!(table, again);
    assert_eq!(table.cell(2, 1), &CellValue::Str("1e3".into()));
    assert!(table.cell(1, 0).is_empty());
}
