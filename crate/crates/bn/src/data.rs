use crate::error::{BnError, Result};

/// Row-major table of fully observed categorical values.
///
/// Columns are matched to network nodes by name; extra columns are ignored
/// by the fitter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DataTable {
    columns: Vec<String>,
    values: Vec<u32>,
}

impl DataTable {
    pub fn new(columns: Vec<String>) -> Self {
        DataTable {
            columns,
            values: Vec::new(),
        }
    }

    pub fn with_capacity(columns: Vec<String>, rows: usize) -> Self {
        let width = columns.len();
        DataTable {
            columns,
            values: Vec::with_capacity(rows * width),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(BnError::RowWidth {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn row(&self, index: usize) -> &[u32] {
        let w = self.columns.len();
        &self.values[index * w..(index + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        // chunks_exact panics on a zero width; an empty table has no rows anyway
        self.values.chunks_exact(self.columns.len().max(1))
    }
}
