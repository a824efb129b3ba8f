//! Generators of valid programs.

use cpslint::ast::{
    ColumnPlan, ColumnType, Command, CutRule, ExportCmd, ImportCmd, ImputeStrategy, InspectCmd, RowFilter,
    SubstringFilter, ValidRange,
};
use cpslint::Spec;
use proptest::prelude::*;

pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[A-Za-z][A-Za-z0-9_ .-]{0,10}",
        1 => "[^\u{0}]{1,8}",
        1 => Just("it's a \\ path\n\ttab".to_string()),
    ]
}

pub fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(f64::from),
        -1.0e6f64..1.0e6,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
    ]
}

pub fn strategy() -> impl Strategy<Value = ImputeStrategy> {
    prop_oneof![
        Just(ImputeStrategy::Mean),
        Just(ImputeStrategy::Median),
        Just(ImputeStrategy::ForwardFill),
        Just(ImputeStrategy::BackFill),
        Just(ImputeStrategy::Linear),
        (1u32..=5).prop_map(ImputeStrategy::Polynomial),
    ]
}

pub fn plan(index: usize) -> impl Strategy<Value = ColumnPlan> {
    (
        text(),
        text(),
        proptest::option::of(prop_oneof![Just(ColumnType::Int), Just(ColumnType::Real), Just(ColumnType::Str)]),
        proptest::option::of((finite(), finite())),
        proptest::option::of(strategy()),
    )
        .prop_map(move |(source, output, ty, range, impute)| {
            let mut plan = ColumnPlan::new(source, format!("{output}{index}"));
            let needs_number = range.is_some() || impute.is_some_and(ImputeStrategy::is_numeric);
            plan.declared_type = match ty {
                Some(ColumnType::Str) | None if needs_number => Some(ColumnType::Real),
                other => other,
            };
            plan.valid_range = range.map(|(a, b)| ValidRange::new(a.min(b), a.max(b)));
            plan.impute = impute;
            plan
        })
}

pub fn export() -> impl Strategy<Value = ExportCmd> {
    (1usize..5)
        .prop_flat_map(|n| {
            let plans: Vec<_> = (0..n).map(plan).collect();
            (plans, text(), any::<bool>(), proptest::option::of((any::<prop::sample::Index>(), text())))
        })
        .prop_map(|(plans, target, sort, cut)| {
            let mut cmd = ExportCmd::new(plans.clone(), target);
            if sort {
                cmd.sort_by = plans
                    .iter()
                    .find(|p| p.declared_type.is_some_and(ColumnType::is_numeric))
                    .map(|p| p.output_name.clone());
            }
            if let Some((pick, marker)) = cut {
                cmd.cut = Some(CutRule { column: pick.get(&plans).output_name.clone(), marker });
                cmd.target.push('#');
            }
            cmd
        })
}

pub fn import() -> impl Strategy<Value = ImportCmd> {
    (
        text(),
        any::<(bool, bool, bool)>(),
        proptest::collection::vec((text(), proptest::option::of(text())), 0..3),
    )
        .prop_map(|(source, (empty, malformed, swap), filters)| {
            let mut row_filters = Vec::new();
            if empty {
                row_filters.push(RowFilter::SkipEmpty);
            }
            if malformed {
                row_filters.push(RowFilter::SkipMalformed);
            }
            if swap {
                row_filters.reverse();
            }
            let substring_filters = filters
                .into_iter()
                .map(|(needle, column)| match column {
                    Some(c) => SubstringFilter::in_column(needle, c),
                    None => SubstringFilter::everywhere(needle),
                })
                .collect();
            ImportCmd { source, row_filters, substring_filters }
        })
}

pub fn spec() -> impl Strategy<Value = Spec> {
    prop_oneof![
        1 => text().prop_map(|source| Spec::new(vec![Command::Inspect(InspectCmd { source })])),
        6 => (import(), proptest::collection::vec(export(), 1..3)).prop_map(|(import, exports)| {
            let mut commands = vec![Command::Import(import)];
            commands.extend(exports.into_iter().map(Command::Export));
            Spec::new(commands)
        }),
    ]
}
