//! Reading and writing the per-(video, segment) feature CSV.

use std::path::Path;

use vidframing::colorfeat::format_sig6;

use crate::CliError;

/// In-memory features.csv: fixed `id,segment,n_frames` prefix followed
/// by numeric feature columns, empty cells meaning "missing".
pub struct FeatureTable {
    /// Feature column names (without the 3-column prefix).
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

pub struct FeatureRow {
    pub id: String,
    pub segment: String,
    pub n_frames: Option<usize>,
    /// Aligned with [`FeatureTable::columns`].
    pub values: Vec<Option<f64>>,
}

impl FeatureTable {
    pub fn load(path: &Path) -> Result<FeatureTable, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!(
                "cannot read {}: {e}; run `vidframing features` first",
                path.display()
            ))
        })?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::config(format!("{} is empty", path.display())))?;
        let head: Vec<&str> = header.split(',').collect();
        if head.len() < 4 || head[0] != "id" || head[1] != "segment" || head[2] != "n_frames" {
            return Err(CliError::config(format!(
                "{} does not look like a feature CSV (header {header:?})",
                path.display()
            )));
        }
        let columns: Vec<String> = head[3..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() + 3 {
                return Err(CliError::config(format!(
                    "{} row {} has {} cells, expected {}",
                    path.display(),
                    i + 2,
                    cells.len(),
                    columns.len() + 3
                )));
            }
            let parse_cell = |s: &str, what: &str| -> Result<Option<f64>, CliError> {
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse::<f64>().map(Some).map_err(|_| {
                    CliError::config(format!(
                        "{} row {}: bad {what} value {s:?}",
                        path.display(),
                        i + 2
                    ))
                })
            };
            let n_frames = match cells[2] {
                "" => None,
                s => Some(s.parse::<usize>().map_err(|_| {
                    CliError::config(format!(
                        "{} row {}: bad n_frames {s:?}",
                        path.display(),
                        i + 2
                    ))
                })?),
            };
            let values = cells[3..]
                .iter()
                .map(|s| parse_cell(s, "feature"))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureRow {
                id: cells[0].to_string(),
                segment: cells[1].to_string(),
                n_frames,
                values,
            });
        }
        Ok(FeatureTable { columns, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,segment,n_frames");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.id);
            out.push(',');
            out.push_str(&row.segment);
            out.push(',');
            if let Some(n) = row.n_frames {
                out.push_str(&n.to_string());
            }
            for v in &row.values {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format_sig6(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn column_index(&self, name: &str) -> Result<usize, CliError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| {
            CliError::config(format!(
                "unknown feature {name:?}; available: {}",
                self.columns.join(", ")
            ))
        })
    }

    /// Rows of one segment, in file order.
    pub fn segment_rows(&self, segment: &str) -> Vec<&FeatureRow> {
        self.rows.iter().filter(|r| r.segment == segment).collect()
    }

    /// Indices of a named column group, or a config error listing what
    /// exists.
    pub fn columns_with_prefix(&self, prefix: &str) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.columns[i].starts_with(prefix))
            .collect()
    }
}
