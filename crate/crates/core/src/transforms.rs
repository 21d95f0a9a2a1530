//! Nonlinear augmentation of the explanatory variables with `x^2`, `ln x` and
//! `1/x`, and greedy selection of which augmented columns to keep.

use crate::dataset::Dataset;
use crate::error::{Error, Result, TransformKind};
use crate::lp::{abs_error, l1_fit};

/// Minimum validation MAE decrease for a candidate column to be accepted.
const MIN_IMPROVEMENT: f64 = 1e-9;

/// Which transformed copies of each original column are appended.
///
/// Output layout: the `d` original columns, then the selected squares, logs
/// and reciprocals, each block in column order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformSpec {
    pub square: Vec<bool>,
    pub log: Vec<bool>,
    pub recip: Vec<bool>,
}

impl TransformSpec {
    /// No transforms over `d` columns.
    pub fn identity(d: usize) -> Self {
        TransformSpec {
            square: vec![false; d],
            log: vec![false; d],
            recip: vec![false; d],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.square.len()
    }

    pub fn output_dim(&self) -> usize {
        self.input_dim() + self.selected().count()
    }

    pub fn flags(&self, kind: TransformKind) -> &[bool] {
        match kind {
            TransformKind::Square => &self.square,
            TransformKind::Log => &self.log,
            TransformKind::Recip => &self.recip,
        }
    }

    fn flags_mut(&mut self, kind: TransformKind) -> &mut Vec<bool> {
        match kind {
            TransformKind::Square => &mut self.square,
            TransformKind::Log => &mut self.log,
            TransformKind::Recip => &mut self.recip,
        }
    }

    /// Selected `(kind, column)` pairs in output order.
    pub fn selected(&self) -> impl Iterator<Item = (TransformKind, usize)> + '_ {
        KINDS.iter().flat_map(move |&kind| {
            self.flags(kind)
                .iter()
                .enumerate()
                .filter(|(_, on)| **on)
                .map(move |(j, _)| (kind, j))
        })
    }

    pub fn augment(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::invalid(format!(
                "expected {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite input in column {j}")));
        }
        let mut out = Vec::with_capacity(self.output_dim());
        out.extend_from_slice(x);
        for (kind, j) in self.selected() {
            out.push(apply(kind, j, x[j])?);
        }
        Ok(out)
    }

    /// Augmented row with a trailing constant-one intercept column.
    pub fn design_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut row = self.augment(x)?;
        row.push(1.0);
        Ok(row)
    }

    pub fn design_matrix(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        ds.x().iter().map(|row| self.design_row(row)).collect()
    }

    /// Column names of [`design_row`](Self::design_row) output.
    pub fn design_names(&self, names: &[String]) -> Vec<String> {
        let mut out = names.to_vec();
        for (kind, j) in self.selected() {
            out.push(match kind {
                TransformKind::Square => format!("{}^2", names[j]),
                TransformKind::Log => format!("ln({})", names[j]),
                TransformKind::Recip => format!("1/{}", names[j]),
            });
        }
        out.push("intercept".to_string());
        out
    }

    /// Augmented dataset with the intercept column, ready for fitting.
    pub fn design_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        Dataset::new(
            self.design_matrix(ds)?,
            ds.y().to_vec(),
            self.design_names(ds.column_names()),
        )
    }
}

const KINDS: [TransformKind; 3] = [TransformKind::Square, TransformKind::Log, TransformKind::Recip];

fn apply(kind: TransformKind, column: usize, v: f64) -> Result<f64> {
    match kind {
        TransformKind::Square => Ok(v * v),
        TransformKind::Log if v > 0.0 => Ok(v.ln()),
        TransformKind::Recip if v != 0.0 => Ok(1.0 / v),
        _ => Err(Error::TransformDomain {
            column,
            kind,
            value: v,
        }),
    }
}

fn eligible(kind: TransformKind, j: usize, sets: &[&Dataset]) -> bool {
    sets.iter()
        .flat_map(|ds| ds.x().iter())
        .all(|row| apply(kind, j, row[j]).is_ok_and(f64::is_finite))
}

/// Validation MAE of a single global L1 fit (with intercept) on `train`.
fn validation_mae(spec: &TransformSpec, train: &Dataset, val: &Dataset) -> Result<f64> {
    let xt = spec.design_matrix(train)?;
    let fit = l1_fit(&xt, train.y())?;
    let xv = spec.design_matrix(val)?;
    Ok(abs_error(&xv, val.y(), &fit.beta) / val.n() as f64)
}

/// Greedy forward selection: keep adding the eligible transformed column
/// that lowers validation MAE the most, until nothing improves.
///
/// A column is eligible when its transform is defined and finite on every
/// training and validation row.
pub fn select_transforms(train: &Dataset, val: &Dataset) -> Result<TransformSpec> {
    let d = train.d();
    if val.d() != d {
        return Err(Error::invalid(format!(
            "train has {d} columns but validation has {}",
            val.d()
        )));
    }
    let sets = [train, val];
    let candidates: Vec<(TransformKind, usize)> = KINDS
        .iter()
        .flat_map(|&kind| (0..d).map(move |j| (kind, j)))
        .filter(|&(kind, j)| eligible(kind, j, &sets))
        .collect();

    let mut spec = TransformSpec::identity(d);
    let mut best_mae = validation_mae(&spec, train, val)?;
    loop {
        let mut round_best: Option<((TransformKind, usize), f64)> = None;
        for &(kind, j) in &candidates {
            if spec.flags(kind)[j] {
                continue;
            }
            let mut trial = spec.clone();
            trial.flags_mut(kind)[j] = true;
            let mae = validation_mae(&trial, train, val)?;
            if round_best.map_or(true, |(_, m)| mae < m) {
                round_best = Some(((kind, j), mae));
            }
        }
        match round_best {
            Some(((kind, j), mae)) if best_mae - mae > MIN_IMPROVEMENT => {
                log::debug!("transform selection: add {kind} of column {j}, val MAE {mae:.6}");
                spec.flags_mut(kind)[j] = true;
                best_mae = mae;
            }
            _ => return Ok(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_on(d: usize) -> TransformSpec {
        TransformSpec {
            square: vec![true; d],
            log: vec![true; d],
            recip: vec![true; d],
        }
    }

    #[test]
    fn augment_examples() {
        assert_eq!(all_on(1).augment(&[1.0]).unwrap(), vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            all_on(1).augment(&[2.0]).unwrap(),
            vec![2.0, 4.0, std::f64::consts::LN_2, 0.5]
        );
        let mut spec = TransformSpec::identity(2);
        spec.square[1] = true;
        assert_eq!(spec.augment(&[-3.0, 2.0]).unwrap(), vec![-3.0, 2.0, 4.0]);
        spec.square = vec![true, false];
        assert_eq!(spec.augment(&[-3.0, 2.0]).unwrap(), vec![-3.0, 2.0, 9.0]);
        assert_eq!(spec.output_dim(), 3);
        assert_eq!(all_on(3).output_dim(), 12);
    }

    #[test]
    fn block_ordering() {
        let spec = TransformSpec {
            square: vec![false, true],
            log: vec![true, false],
            recip: vec![true, true],
        };
        let out = spec.augment(&[2.0, 4.0]).unwrap();
        assert_eq!(out, vec![2.0, 4.0, 16.0, 2f64.ln(), 0.5, 0.25]);
    }

    #[test]
    fn domain_errors_name_the_column() {
        let mut spec = TransformSpec::identity(2);
        spec.log[1] = true;
        match spec.augment(&[1.0, -1.0]) {
            Err(Error::TransformDomain { column: 1, kind: TransformKind::Log, .. }) => {}
            other => panic!("{other:?}"),
        }
        let mut spec = TransformSpec::identity(1);
        spec.recip[0] = true;
        assert!(matches!(
            spec.augment(&[0.0]),
            Err(Error::TransformDomain { column: 0, kind: TransformKind::Recip, .. })
        ));
        assert!(spec.augment(&[1.0, 2.0]).is_err());
    }

    fn line_data(xs: &[f64], f: impl Fn(f64) -> f64) -> Dataset {
        Dataset::from_rows(xs.iter().map(|&v| vec![v]).collect(), xs.iter().map(|&v| f(v)).collect())
            .unwrap()
    }

    #[test]
    fn selects_square_for_quadratic_response() {
        let train = line_data(&[-2.0, -1.5, -1.0, -0.3, 0.4, 1.0, 1.7, 2.5], |v| v * v);
        let val = line_data(&[-1.8, -0.7, 0.2, 0.9, 2.2], |v| v * v);
        let spec = select_transforms(&train, &val).unwrap();
        assert!(spec.square[0]);
        // Negative values make log and reciprocal-of-zero checks matter.
        assert!(!spec.log[0]);
        assert!(validation_mae(&spec, &train, &val).unwrap() <= 1e-6);
    }

    #[test]
    fn linear_response_needs_nothing() {
        let train = line_data(&[0.5, 1.0, 1.5, 2.0, 3.0, 4.0], |v| 3.0 * v);
        let val = line_data(&[0.7, 2.5, 3.3], |v| 3.0 * v);
        assert_eq!(select_transforms(&train, &val).unwrap(), TransformSpec::identity(1));
    }

    #[test]
    fn zero_column_never_gets_reciprocal() {
        // 1/x would fit exactly, but the column contains a zero.
        let xs = [0.0, 0.5, 1.0, 2.0, 4.0, 5.0];
        let f = |v: f64| if v == 0.0 { 7.0 } else { 1.0 / v };
        let train = line_data(&xs, f);
        let val = line_data(&[0.25, 3.0], f);
        let spec = select_transforms(&train, &val).unwrap();
        assert!(!spec.recip[0]);
        assert!(!spec.log[0]);
        for ds in [&train, &val] {
            for row in ds.x() {
                spec.augment(row).unwrap();
            }
        }
    }
}
