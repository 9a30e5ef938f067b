//! Evaluation outputs: reward ECDF, satisfied ratios, the per-zone reward
//! heatmap, and parameter sweeps, plus their CSV serializations.
//!
//! CSV headers are stable and are the plotting contract:
//! `ecdf.csv` -> `value,fraction`
//! `satisfied.csv` -> `param,value,mean_ratio,min,max,seeds`
//! `heatmap.csv` -> `row,col,mean_reward_milli,payments`

mod sweep;

pub use sweep::{
    apply_param, sweep, sweep_sequential, sweep_with, sweep_with_sequential, CellOutcome,
    SweepError, SweepOutput, SweepParam, SweepRow,
};

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::currency::Currency;
use crate::sim::ZoneState;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot compute a distribution over an empty sample")]
    EmptyInput,
    #[error("satisfied ratio is undefined with zero decision rounds")]
    ZeroRounds,
    #[error("zone layout is not grid-mappable: {0}")]
    Layout(String),
}

/// Right-continuous empirical CDF at the distinct sorted sample values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EcdfSeries {
    pub points: Vec<EcdfPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EcdfPoint {
    pub value: Currency,
    pub fraction: f64,
}

pub fn ecdf(values: &[Currency]) -> Result<EcdfSeries, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut points: Vec<EcdfPoint> = Vec::new();
    let mut seen = 0usize;
    for value in sorted {
        seen += 1;
        match points.last_mut() {
            Some(last) if last.value == value => last.fraction = seen as f64 / n,
            _ => points.push(EcdfPoint {
                value,
                fraction: seen as f64 / n,
            }),
        }
    }
    Ok(EcdfSeries { points })
}

/// `satisfied / decided`, defined only when at least one round was decided.
pub fn satisfied_ratio(satisfied: u64, decided: u64) -> Result<f64, MetricsError> {
    if decided == 0 {
        return Err(MetricsError::ZeroRounds);
    }
    Ok(satisfied as f64 / decided as f64)
}

/// Pooled ratio over all zones: total satisfied rounds over total rounds.
pub fn overall_satisfied_ratio(zones: &[ZoneState]) -> Result<f64, MetricsError> {
    let decided: u64 = zones.iter().map(|z| z.decision_rounds).sum();
    let satisfied: u64 = zones.iter().map(|z| z.satisfied_rounds).sum();
    satisfied_ratio(satisfied, decided)
}

/// One heatmap cell: the zone's mean reward per payment, kept as the exact
/// (total, count) pair. A cell with zero payments is empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub zone: u32,
    pub total_paid: Currency,
    pub payments: u64,
}

impl HeatmapCell {
    /// Mean reward per payment in milli-units; `None` marks an empty cell.
    pub fn mean_paid_milli(&self) -> Option<f64> {
        (self.payments > 0).then(|| self.total_paid.milli() as f64 / self.payments as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatmapGrid {
    pub rows: u32,
    pub cols: u32,
    /// Row-major; `None` where no zone maps to the position.
    pub cells: Vec<Option<HeatmapCell>>,
}

impl HeatmapGrid {
    pub fn cell(&self, row: u32, col: u32) -> Option<&HeatmapCell> {
        self.cells
            .get((row * self.cols + col) as usize)
            .and_then(|c| c.as_ref())
    }
}

/// Maps zones onto their configured grid positions. Errors if any zone
/// lacks a grid position or two zones claim the same cell.
pub fn heatmap(zones: &[ZoneState]) -> Result<HeatmapGrid, MetricsError> {
    if zones.is_empty() {
        return Err(MetricsError::Layout("no zones".into()));
    }
    let mut placed: Vec<(u32, u32, HeatmapCell)> = Vec::with_capacity(zones.len());
    for zone in zones {
        let (row, col) = match (zone.spec.grid_row, zone.spec.grid_col) {
            (Some(r), Some(c)) => (r, c),
            _ => {
                return Err(MetricsError::Layout(format!(
                    "zone {} has no grid position",
                    zone.spec.id
                )))
            }
        };
        if placed.iter().any(|&(r, c, _)| r == row && c == col) {
            return Err(MetricsError::Layout(format!(
                "grid cell ({row}, {col}) is claimed twice"
            )));
        }
        placed.push((
            row,
            col,
            HeatmapCell {
                zone: zone.spec.id,
                total_paid: zone.total_paid,
                payments: zone.payments_count,
            },
        ));
    }
    let rows = placed.iter().map(|&(r, _, _)| r).max().unwrap() + 1;
    let cols = placed.iter().map(|&(_, c, _)| c).max().unwrap() + 1;
    let mut cells = vec![None; (rows * cols) as usize];
    for (row, col, cell) in placed {
        cells[(row * cols + col) as usize] = Some(cell);
    }
    Ok(HeatmapGrid { rows, cols, cells })
}

pub fn write_ecdf_csv<W: Write>(mut w: W, series: &EcdfSeries) -> io::Result<()> {
    writeln!(w, "value,fraction")?;
    for point in &series.points {
        writeln!(w, "{},{}", point.value, point.fraction)?;
    }
    Ok(())
}

pub fn write_heatmap_csv<W: Write>(mut w: W, grid: &HeatmapGrid) -> io::Result<()> {
    writeln!(w, "row,col,mean_reward_milli,payments")?;
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            if let Some(cell) = grid.cell(row, col) {
                match cell.mean_paid_milli() {
                    Some(mean) => writeln!(w, "{row},{col},{mean},{}", cell.payments)?,
                    None => writeln!(w, "{row},{col},,0")?,
                }
            }
        }
    }
    Ok(())
}

pub fn write_satisfied_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "param,value,mean_ratio,min,max,seeds")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.param, row.value, row.mean_ratio, row.min_ratio, row.max_ratio, row.seeds
        )?;
    }
    Ok(())
}

/// Companion reward aggregates for sweeps; not part of the fixed three-file
/// contract but written next to `satisfied.csv` by the sweep command.
pub fn write_rewards_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(
        w,
        "param,value,mean_reward_milli,p90_reward_milli,min_reward_milli,max_reward_milli,seeds"
    )?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            row.param,
            row.value,
            row.mean_reward_milli,
            row.mean_p90_reward_milli,
            row.min_reward_milli,
            row.max_reward_milli,
            row.seeds
        )?;
    }
    Ok(())
}

pub fn csv_to_string<F>(write: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{grid_zones, ZoneSpec};

    fn zone_state(spec: ZoneSpec, satisfied: u64, decided: u64, paid_milli: i64, payments: u64) -> ZoneState {
        ZoneState {
            spec,
            satisfied_rounds: satisfied,
            decision_rounds: decided,
            total_paid: Currency::from_milli(paid_milli),
            payments_count: payments,
        }
    }

    #[test]
    fn ecdf_matches_the_hand_computed_example() {
        let values: Vec<Currency> = [1.0, 2.0, 2.0, 3.0]
            .iter()
            .map(|&v| Currency::from_units(v))
            .collect();
        let series = ecdf(&values).unwrap();
        let expected = vec![
            (Currency::from_units(1.0), 0.25),
            (Currency::from_units(2.0), 0.75),
            (Currency::from_units(3.0), 1.0),
        ];
        let got: Vec<(Currency, f64)> = series.points.iter().map(|p| (p.value, p.fraction)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn ecdf_of_a_singleton_is_one_point() {
        let series = ecdf(&[Currency::from_units(5.0)]).unwrap();
        assert_eq!(series.points.len(), 1);
        assert_eq!(series.points[0].value, Currency::from_units(5.0));
        assert_eq!(series.points[0].fraction, 1.0);
    }

    #[test]
    fn ecdf_rejects_empty_input() {
        assert_eq!(ecdf(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn ecdf_agrees_with_a_brute_force_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.random_range(1..200);
            let sample: Vec<Currency> = (0..n)
                .map(|_| Currency::from_milli(rng.random_range(0..20) * 50))
                .collect();
            let series = ecdf(&sample).unwrap();
            for point in &series.points {
                // oracle: count of sample values <= v, over n
                let count = sample.iter().filter(|&&s| s <= point.value).count();
                assert_eq!(point.fraction, count as f64 / sample.len() as f64);
            }
            // strictly increasing values and fractions, ending at 1
            for pair in series.points.windows(2) {
                assert!(pair[0].value < pair[1].value);
                assert!(pair[0].fraction < pair[1].fraction);
            }
            assert_eq!(series.points.last().unwrap().fraction, 1.0);
        }
    }

    #[test]
    fn satisfied_ratio_edges() {
        assert_eq!(satisfied_ratio(0, 100).unwrap(), 0.0);
        assert_eq!(satisfied_ratio(100, 100).unwrap(), 1.0);
        assert_eq!(satisfied_ratio(1, 0), Err(MetricsError::ZeroRounds));
    }

    #[test]
    fn heatmap_cell_means_are_exact() {
        let specs = grid_zones(1, 2, 1000.0, 500.0, 100.0, 3, 600);
        let zones = vec![
            // payments of 1.0 and 1.2 -> mean 1.1
            zone_state(specs[0].clone(), 2, 10, 2200, 2),
            zone_state(specs[1].clone(), 0, 10, 0, 0),
        ];
        let grid = heatmap(&zones).unwrap();
        assert_eq!((grid.rows, grid.cols), (1, 2));
        assert_eq!(grid.cell(0, 0).unwrap().mean_paid_milli(), Some(1100.0));
        assert_eq!(grid.cell(0, 1).unwrap().mean_paid_milli(), None);
        let csv = csv_to_string(|w| write_heatmap_csv(w, &grid));
        assert_eq!(csv, "row,col,mean_reward_milli,payments\n0,0,1100,2\n0,1,,0\n");
    }

    #[test]
    fn heatmap_rejects_unmapped_and_duplicate_positions() {
        let mut specs = grid_zones(1, 2, 1000.0, 500.0, 100.0, 3, 600);
        specs[1].grid_row = None;
        let zones: Vec<ZoneState> = specs
            .iter()
            .map(|s| zone_state(s.clone(), 0, 1, 0, 0))
            .collect();
        assert!(matches!(heatmap(&zones), Err(MetricsError::Layout(_))));

        let mut specs = grid_zones(1, 2, 1000.0, 500.0, 100.0, 3, 600);
        specs[1].grid_col = Some(0);
        let zones: Vec<ZoneState> = specs
            .iter()
            .map(|s| zone_state(s.clone(), 0, 1, 0, 0))
            .collect();
        assert!(matches!(heatmap(&zones), Err(MetricsError::Layout(_))));
    }

    #[test]
    fn ecdf_csv_uses_exact_decimal_values() {
        let series = ecdf(&[Currency::from_units(0.1), Currency::from_units(1.0)]).unwrap();
        let csv = csv_to_string(|w| write_ecdf_csv(w, &series));
        assert_eq!(csv, "value,fraction\n0.100,0.5\n1.000,1\n");
    }
}
