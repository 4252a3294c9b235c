//! Scenario CSV ingestion.
//!
//! Schema: header `outcome,p[,d1,d2,...]`, one row per outcome. The `p`
//! column is the reference probability; columns named `d<number>` are
//! scenario densities (ordered by their number); every other column is a
//! named position. Probabilities and densities are validated, never
//! renormalized — a file whose `p` column sums to 0.999 is an error that
//! names the sum, not a file that silently becomes a distribution.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use geomrisk_core::prob::{PositivePosition, ProbSpace, Scenario, ScenarioSet};

#[derive(Debug)]
pub struct ScenarioData {
    pub space: Arc<ProbSpace>,
    /// Present when the file has `d` columns.
    pub scenarios: Option<ScenarioSet>,
    /// Position columns in header order.
    pub columns: Vec<(String, Vec<f64>)>,
}

impl ScenarioData {
    pub fn position(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|(c, _)| c == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| {
                anyhow!(
                    "no position column named {name:?}; the file has: {}",
                    self.columns.iter().map(|(c, _)| c.as_str()).collect::<Vec<_>>().join(", ")
                )
            })
    }

    /// The named column as a strictly positive position.
    pub fn positive_position(&self, name: &str) -> Result<PositivePosition> {
        PositivePosition::new(self.space.clone(), self.position(name)?.to_vec())
            .with_context(|| format!("column {name:?} is not a strictly positive position"))
    }

    /// All position columns as strictly positive positions, in header order.
    pub fn all_positive_positions(&self) -> Result<Vec<(String, PositivePosition)>> {
        self.columns.iter().map(|(name, _)| Ok((name.clone(), self.positive_position(name)?))).collect()
    }
}

fn density_index(header: &str) -> Option<usize> {
    let rest = header.strip_prefix('d')?;
    if rest.is_empty() {
        return None;
    }
    rest.parse::<usize>().ok()
}

pub fn ingest_scenarios(path: &Path) -> Result<ScenarioData> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open scenario file {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .with_context(|| format!("cannot read the header row of {}", path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.len() < 2 || headers[0] != "outcome" || headers[1] != "p" {
        bail!(
            "scenario files start with the columns `outcome,p`; this header starts with `{}`",
            headers.iter().take(2).cloned().collect::<Vec<_>>().join(",")
        );
    }

    // Column roles: (header index, density number) for densities, header
    // indices for positions.
    let mut density_cols: Vec<(usize, usize)> = Vec::new();
    let mut position_cols: Vec<usize> = Vec::new();
    for (idx, name) in headers.iter().enumerate().skip(2) {
        match density_index(name) {
            Some(k) => density_cols.push((idx, k)),
            None => position_cols.push(idx),
        }
    }
    density_cols.sort_by_key(|&(_, k)| k);

    let mut outcomes: Vec<String> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 2; // 1-based, after the header row
        let record = record.with_context(|| format!("row {row} does not parse"))?;
        if record.len() != headers.len() {
            bail!("row {row} has {} fields, the header has {}", record.len(), headers.len());
        }
        outcomes.push(record[0].to_owned());
        for (col, raw) in record.iter().enumerate().skip(1) {
            let value: f64 = raw.parse().map_err(|_| {
                anyhow!("row {row}, column {:?}: {raw:?} is not a number", headers[col])
            })?;
            if col == 1 {
                probs.push(value);
            } else {
                cells[col].push(value);
            }
        }
    }

    let space = ProbSpace::new(outcomes, probs)
        .with_context(|| format!("the `p` column of {} is not a distribution", path.display()))?;

    let scenarios = if density_cols.is_empty() {
        None
    } else {
        let list: Vec<Scenario> = density_cols
            .iter()
            .map(|&(idx, _)| {
                Scenario::new(space.clone(), cells[idx].clone())
                    .with_context(|| format!("column {:?} is not a scenario density", headers[idx]))
            })
            .collect::<Result<_>>()?;
        Some(ScenarioSet::new(list)?)
    };

    let columns =
        position_cols.into_iter().map(|idx| (headers[idx].clone(), cells[idx].clone())).collect();
    Ok(ScenarioData { space, scenarios, columns })
}
