use crate::error::{Error, Result};

/// `n` labelled observations `(x_i, y_i)` with `x_i` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, column_names: Vec<String>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("dataset has no rows"));
        }
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "{} rows of x but {} responses",
                x.len(),
                y.len()
            )));
        }
        let d = x[0].len();
        if d == 0 {
            return Err(Error::invalid("dataset has no explanatory columns"));
        }
        if column_names.len() != d {
            return Err(Error::invalid(format!(
                "{} column names for {d} columns",
                column_names.len()
            )));
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite value at row {i}, column {j}")));
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite response at row {i}")));
        }
        Ok(Dataset { x, y, column_names })
    }

    /// Builds a dataset with generated column names `x1..xd`.
    pub fn from_rows(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let d = x.first().map_or(0, Vec::len);
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Dataset::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.column_names.len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        Dataset::new(
            rows.iter().map(|&i| self.x[i].clone()).collect(),
            rows.iter().map(|&i| self.y[i]).collect(),
            self.column_names.clone(),
        )
    }
}
