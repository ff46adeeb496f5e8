//! Dataset CSV loading. Schema: header `group,x1,...,xm,y`; `group` is a
//! non-negative integer label; rows in any order; groups are re-indexed
//! densely in first-appearance order.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::problems::{Group, GroupedDataset};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn schema(line: usize, msg: impl Into<String>) -> DatasetError {
    DatasetError::Schema { line, msg: msg.into() }
}

pub fn load_dataset(path: &Path) -> Result<GroupedDataset<f64>, DatasetError> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn parse_dataset(text: &str) -> Result<GroupedDataset<f64>, DatasetError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| schema(1, "empty file, expected header `group,x1,...,xm,y`"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "group" || *cols.last().unwrap() != "y" {
        return Err(schema(1, format!("bad header `{header}`, expected `group,x1,...,xm,y`")));
    }
    let m = cols.len() - 2;
    for (i, &c) in cols[1..=m].iter().enumerate() {
        let expected = format!("x{}", i + 1);
        if c != expected {
            return Err(schema(1, format!("bad header column `{c}`, expected `{expected}`")));
        }
    }

    // label -> dense index, in first-appearance order
    let mut order: Vec<u64> = Vec::new();
    let mut groups: Vec<Group<f64>> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').map(str::trim).collect();
        if cells.len() != m + 2 {
            return Err(schema(
                line_no,
                format!("expected {} columns, found {}", m + 2, cells.len()),
            ));
        }
        let label: u64 = cells[0]
            .parse()
            .map_err(|_| schema(line_no, format!("group label `{}` is not a non-negative integer", cells[0])))?;
        let mut features = Vec::with_capacity(m);
        for &cell in &cells[1..=m] {
            let v: f64 = cell
                .parse()
                .map_err(|_| schema(line_no, format!("non-numeric cell `{cell}`")))?;
            features.push(v);
        }
        let y: f64 = cells[m + 1]
            .parse()
            .map_err(|_| schema(line_no, format!("non-numeric cell `{}`", cells[m + 1])))?;
        let dense = match order.iter().position(|&l| l == label) {
            Some(i) => i,
            None => {
                order.push(label);
                groups.push(Group { features: Vec::new(), targets: Vec::new() });
                order.len() - 1
            }
        };
        groups[dense].features.push(features);
        groups[dense].targets.push(y);
    }

    GroupedDataset::new(groups).map_err(|e| DatasetError::Invalid(e.to_string()))
}
