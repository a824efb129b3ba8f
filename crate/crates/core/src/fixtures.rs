//! Deterministic synthetic power traces with the usual trace schema:
//! `Timestamp` (ms), `Voltage` (V), `Current` (A), `Energy` (J) and a
//! sparse `UART` message column carrying phase markers.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::{CellValue, Column, Table};

pub const MIN_ROWS: usize = 100;

/// Message that opens every image-loading phase.
pub const IMAGE_LOADER: &str = "image loader";

/// Rows per round of the emulated task cycle.
pub const CYCLE_ROWS: usize = 1000;

const CYCLE_MESSAGES: [(usize, &str); 4] = [
    (100, IMAGE_LOADER),
    (400, "image processor"),
    (750, "image saver"),
    (900, "core temperature 47C"),
];

const SAMPLE_PERIOD_S: f64 = 0.001;
const NOISE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reference traces need at least {MIN_ROWS} rows, asked for {0}")]
pub struct TooFewRows(pub usize);

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn generate_reference(rows: usize, seed: u64) -> Result<Table, TooFewRows> {
    if rows < MIN_ROWS {
        return Err(TooFewRows(rows));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase_v: f64 = rng.gen::<f64>() * TAU;
    let phase_a: f64 = rng.gen::<f64>() * TAU;

    let mut timestamp = Vec::with_capacity(rows);
    let mut voltage = Vec::with_capacity(rows);
    let mut current = Vec::with_capacity(rows);
    let mut energy = Vec::with_capacity(rows);
    let mut uart = Vec::with_capacity(rows);
    let mut consumed = 0.0;

    for i in 0..rows {
        let t = i as f64;
        let v = 12.0 + 1.5 * (TAU * t / 500.0 + phase_v).sin() + 0.4 * (TAU * t / 1300.0 + 0.7).sin()
            + rng.gen_range(-NOISE..NOISE);
        let a = 1.2 + 0.5 * (TAU * t / 700.0 + phase_a).sin() + rng.gen_range(-NOISE..NOISE);
        let (v, a) = (round6(v), round6(a));
        consumed += v * a * SAMPLE_PERIOD_S;

        timestamp.push(CellValue::Int(1_000 + i as i64));
        voltage.push(CellValue::Real(v));
        current.push(CellValue::Real(a));
        energy.push(CellValue::Real(round6(consumed)));
        let message = CYCLE_MESSAGES.iter().find(|(offset, _)| i % CYCLE_ROWS == *offset).map(|(_, m)| *m);
        uart.push(message.map_or(CellValue::Empty, |m| CellValue::Str(m.to_string())));
    }

    Ok(Table::new(vec![
        Column::new("Timestamp", timestamp),
        Column::new("Voltage", voltage),
        Column::new("Current", current),
        Column::new("Energy", energy),
        Column::new("UART", uart),
    ])
    .expect("fixture columns are well formed"))
}
