//! The end-to-end piecewise model: transform selection, clustering,
//! assignment, region construction and per-region refits, plus prediction
//! and a plain-text model file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::assign::{big_m_audit, solve_problem3, Optimality};
use crate::clustering::cluster;
use crate::config::Config;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::{dot, l1_fit};
use crate::separation::{build_polyhedra, separate_pair, Halfspace, Hyperplane, Polyhedron, Side};
use crate::transforms::{select_transforms, TransformSpec};

/// Model file format version written by [`FittedModel::save`].
pub const MODEL_VERSION: u32 = 1;
const MAGIC: &str = "fmiom-model";

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub objective: f64,
    pub eliminated_fraction: f64,
    pub optimality: Optimality,
    pub root_bound: f64,
    pub nodes: usize,
    /// Satisfaction degree of each training point's absolute error under
    /// the configured error tolerance.
    pub mu_delta: Vec<f64>,
    /// Attained violation of each separating hyperplane, pairs in
    /// `(1,2), (1,3), .., (K-1,K)` order.
    pub separation: Vec<f64>,
    pub big_m_warnings: Vec<String>,
}

/// How a prediction was routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Lowest-index region containing the point.
    Region(usize),
    /// No region contained the point; majority group of its neighbours.
    Fallback(usize),
}

impl Route {
    pub fn group(self) -> usize {
        match self {
            Route::Region(k) | Route::Fallback(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: TransformSpec,
    /// `beta_k` at index `k - 1`, over the augmented columns plus intercept.
    pub betas: Vec<Vec<f64>>,
    pub polyhedra: Vec<Polyhedron>,
    /// Augmented rows of the training points that were not discarded.
    pub train_points: Vec<Vec<f64>>,
    /// Group (1-based) of each retained training point.
    pub train_groups: Vec<usize>,
    pub cfg: Config,
    pub diagnostics: Diagnostics,
}

/// Fits a model. Transforms are selected on `val` when it is given.
pub fn fit(train: &Dataset, val: Option<&Dataset>, cfg: &Config) -> Result<FittedModel> {
    let spec = match val {
        Some(val) => select_transforms(train, val)?,
        None => TransformSpec::identity(train.d()),
    };
    fit_with_spec(train, spec, cfg)
}

/// Fits a model with a fixed set of transforms.
pub fn fit_with_spec(train: &Dataset, spec: TransformSpec, cfg: &Config) -> Result<FittedModel> {
    cfg.validate()?;
    if spec.input_dim() != train.d() {
        return Err(Error::invalid(format!(
            "transform spec expects {} columns, data has {}",
            spec.input_dim(),
            train.d()
        )));
    }
    if cfg.l > train.n() {
        return Err(Error::config(format!(
            "L = {} exceeds the {} training points",
            cfg.l,
            train.n()
        )));
    }
    let data = spec.design_dataset(train)?;
    let clustering = cluster(data.x(), data.y(), cfg.l)?;
    let assignment = solve_problem3(&data, &clustering, cfg)?;
    let kept_clusters = assignment.cluster_group.iter().filter(|&&g| g != 0).count();
    if cfg.k > kept_clusters {
        return Err(Error::config(format!(
            "K = {} exceeds the {kept_clusters} clusters left after outlier removal",
            cfg.k
        )));
    }
    let groups = assignment.groups(&clustering);

    let rows_of = |k: usize| -> Vec<&[f64]> { groups.group(k).iter().map(|&i| data.row(i)).collect() };
    let mut hyperplanes = BTreeMap::new();
    let mut separation = Vec::new();
    for k in 1..=cfg.k {
        for r in k + 1..=cfg.k {
            let (gk, gr) = (rows_of(k), rows_of(r));
            let h = if gk.is_empty() || gr.is_empty() {
                // An empty group gets a region no point can satisfy: the
                // lower-indexed group sees `0 <= 1`, the higher `0 >= 1`.
                // Empty groups are always the highest-indexed ones.
                Hyperplane {
                    p: vec![0.0; data.d()],
                    q: 1.0,
                    objective: 0.0,
                }
            } else {
                separate_pair(&gk, &gr)?
            };
            separation.push(h.objective);
            hyperplanes.insert((k, r), h);
        }
    }
    let polyhedra = build_polyhedra(cfg.k, &hyperplanes)?;

    let point_groups = assignment.point_groups(&clustering);
    let retained: Vec<usize> = (0..data.n()).filter(|&i| point_groups[i] != 0).collect();
    let mut betas = assignment.betas.clone();
    for (k, poly) in polyhedra.iter().enumerate() {
        let inside: Vec<usize> = retained
            .iter()
            .copied()
            .filter(|&i| poly.contains(data.row(i)))
            .collect();
        if inside.is_empty() {
            continue;
        }
        let rows: Vec<&[f64]> = inside.iter().map(|&i| data.row(i)).collect();
        let ys: Vec<f64> = inside.iter().map(|&i| data.y()[i]).collect();
        betas[k] = l1_fit(&rows, &ys)?.beta;
    }

    let mu_delta = assignment
        .deltas
        .iter()
        .map(|&d| cfg.delta_tol.membership(d))
        .collect::<Result<Vec<_>>>()?;
    let big_m_warnings = big_m_audit(&data, &assignment, cfg);
    for w in &big_m_warnings {
        log::warn!("{w}");
    }

    Ok(FittedModel {
        spec,
        betas,
        polyhedra,
        train_points: retained.iter().map(|&i| data.row(i).to_vec()).collect(),
        train_groups: retained.iter().map(|&i| point_groups[i]).collect(),
        cfg: cfg.clone(),
        diagnostics: Diagnostics {
            objective: assignment.objective,
            eliminated_fraction: assignment.eliminated_fraction,
            optimality: assignment.optimality,
            root_bound: assignment.root_bound,
            nodes: assignment.nodes,
            mu_delta,
            separation,
            big_m_warnings,
        },
    })
}

impl FittedModel {
    pub fn num_groups(&self) -> usize {
        self.betas.len()
    }

    /// Region used for a raw input row.
    pub fn route(&self, x_raw: &[f64]) -> Result<Route> {
        let x = self.spec.design_row(x_raw)?;
        Ok(self.route_design(&x))
    }

    fn route_design(&self, x: &[f64]) -> Route {
        if let Some(p) = self.polyhedra.iter().find(|p| p.contains(x)) {
            return Route::Region(p.group);
        }
        Route::Fallback(self.neighbour_vote(x))
    }

    /// Majority group among the `F` nearest retained training points; ties
    /// go to whichever tied group has the nearest member.
    fn neighbour_vote(&self, x: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .train_points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near = &dist[..self.cfg.neighbors.min(dist.len())];
        let mut votes = vec![0usize; self.num_groups() + 1];
        for &(_, i) in near {
            votes[self.train_groups[i]] += 1;
        }
        let top = *votes.iter().max().unwrap_or(&0);
        near.iter()
            .map(|&(_, i)| self.train_groups[i])
            .find(|&g| votes[g] == top)
            .unwrap_or(1)
    }

    pub fn predict(&self, x_raw: &[f64]) -> Result<f64> {
        let x = self.spec.design_row(x_raw)?;
        let k = self.route_design(&x).group();
        Ok(dot(&self.betas[k - 1], &x))
    }

    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<f64>> {
        ds.x().iter().map(|row| self.predict(row)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        FittedModel::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{MAGIC} {MODEL_VERSION}");
        let _ = writeln!(w, "[config]");
        w.push_str(&self.cfg.to_text());
        let _ = writeln!(w, "[spec]");
        let _ = writeln!(w, "inputs {}", self.spec.input_dim());
        for (name, flags) in [("square", &self.spec.square), ("log", &self.spec.log), ("recip", &self.spec.recip)] {
            let bits: Vec<&str> = flags.iter().map(|&b| if b { "1" } else { "0" }).collect();
            let _ = writeln!(w, "{name} {}", bits.join(" "));
        }
        let _ = writeln!(w, "[betas]");
        let _ = writeln!(w, "groups {}", self.betas.len());
        for (k, beta) in self.betas.iter().enumerate() {
            let _ = writeln!(w, "beta {} {}", k + 1, nums(beta));
        }
        let _ = writeln!(w, "[polyhedra]");
        for poly in &self.polyhedra {
            let _ = writeln!(w, "polyhedron {} {}", poly.group, poly.halfspaces.len());
            for h in &poly.halfspaces {
                let side = match h.side {
                    Side::Le => "le",
                    Side::Ge => "ge",
                };
                let _ = writeln!(w, "{side} {} {}", num(h.q), nums(&h.p));
            }
        }
        let _ = writeln!(w, "[train_points]");
        let _ = writeln!(w, "count {}", self.train_points.len());
        for (g, p) in self.train_groups.iter().zip(&self.train_points) {
            let _ = writeln!(w, "point {g} {}", nums(p));
        }
        let d = &self.diagnostics;
        let _ = writeln!(w, "[diagnostics]");
        let _ = writeln!(w, "objective {}", num(d.objective));
        let _ = writeln!(w, "eliminated_fraction {}", num(d.eliminated_fraction));
        let _ = match d.optimality {
            Optimality::Proven => writeln!(w, "optimality proven"),
            Optimality::Gap(g) => writeln!(w, "optimality gap {}", num(g)),
            Optimality::TimeLimit { gap } => writeln!(w, "optimality time-limit {}", num(gap)),
        };
        let _ = writeln!(w, "root_bound {}", num(d.root_bound));
        let _ = writeln!(w, "nodes {}", d.nodes);
        let _ = writeln!(w, "mu_delta {}", nums(&d.mu_delta));
        let _ = writeln!(w, "separation {}", nums(&d.separation));
        for warning in &d.big_m_warnings {
            let _ = writeln!(w, "warning {warning}");
        }
        let _ = writeln!(w, "end");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (line, header) = r.next_line()?;
        let (magic, version) = header
            .split_once(' ')
            .ok_or_else(|| Error::parse(line, "missing model header"))?;
        if magic != MAGIC {
            return Err(Error::parse(line, format!("not a model file (header {magic:?})")));
        }
        if version.trim() != MODEL_VERSION.to_string() {
            return Err(Error::UnsupportedVersion {
                found: version.trim().to_string(),
                expected: MODEL_VERSION,
            });
        }

        r.section("config")?;
        let mut cfg = Config::default();
        while !r.at_section() {
            let (line, text) = r.next_line()?;
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key=value, got {text:?}")))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(line, e.to_string()))?;
        }
        cfg.validate()?;

        r.section("spec")?;
        let inputs: usize = r.keyed("inputs")?.1;
        let mut flags = Vec::new();
        for name in ["square", "log", "recip"] {
            let (line, rest) = r.field(name)?;
            let bits: Vec<bool> = rest
                .split_whitespace()
                .map(|b| match b {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::parse(line, format!("bad flag {other:?}"))),
                })
                .collect::<Result<_>>()?;
            if bits.len() != inputs {
                return Err(Error::parse(line, format!("expected {inputs} flags, got {}", bits.len())));
            }
            flags.push(bits);
        }
        let recip = flags.pop().expect("three flag rows");
        let log = flags.pop().expect("three flag rows");
        let square = flags.pop().expect("three flag rows");
        let spec = TransformSpec { square, log, recip };
        let dim = spec.output_dim() + 1;

        r.section("betas")?;
        let groups: usize = r.keyed("groups")?.1;
        if groups != cfg.k {
            return Err(Error::parse(r.line, format!("{groups} groups but K = {}", cfg.k)));
        }
        let mut betas = Vec::with_capacity(groups);
        for k in 1..=groups {
            let (line, rest) = r.field("beta")?;
            let (idx, values) = rest.split_once(' ').unwrap_or((rest, ""));
            if idx != k.to_string() {
                return Err(Error::parse(line, format!("expected beta {k}")));
            }
            betas.push(parse_nums(line, values, dim)?);
        }

        r.section("polyhedra")?;
        let mut polyhedra = Vec::with_capacity(groups);
        for k in 1..=groups {
            let (line, rest) = r.field("polyhedron")?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 || parts[0] != k.to_string() {
                return Err(Error::parse(line, format!("expected polyhedron {k} <count>")));
            }
            let count: usize = parts[1]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad halfspace count {:?}", parts[1])))?;
            let mut halfspaces = Vec::with_capacity(count);
            for _ in 0..count {
                let (line, text) = r.next_line()?;
                let (side, rest) = text.split_once(' ').unwrap_or((text, ""));
                let side = match side {
                    "le" => Side::Le,
                    "ge" => Side::Ge,
                    other => return Err(Error::parse(line, format!("bad halfspace side {other:?}"))),
                };
                let mut values = parse_nums(line, rest, dim + 1)?;
                let q = values.remove(0);
                halfspaces.push(Halfspace { p: values, q, side });
            }
            polyhedra.push(Polyhedron { group: k, halfspaces });
        }

        r.section("train_points")?;
        let count: usize = r.keyed("count")?.1;
        let mut train_points = Vec::with_capacity(count);
        let mut train_groups = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, rest) = r.field("point")?;
            let (g, values) = rest.split_once(' ').unwrap_or((rest, ""));
            let g: usize = g
                .parse()
                .ok()
                .filter(|g| (1..=groups).contains(g))
                .ok_or_else(|| Error::parse(line, format!("bad group label {g:?}")))?;
            train_groups.push(g);
            train_points.push(parse_nums(line, values, dim)?);
        }
        if count == 0 {
            return Err(Error::parse(r.line, "model has no training points"));
        }

        r.section("diagnostics")?;
        let objective = r.keyed_f64("objective")?;
        let eliminated_fraction = r.keyed_f64("eliminated_fraction")?;
        let (line, opt) = r.field("optimality")?;
        let optimality = match opt.split_once(' ') {
            None if opt == "proven" => Optimality::Proven,
            Some(("gap", g)) => Optimality::Gap(parse_num(line, g)?),
            Some(("time-limit", g)) => Optimality::TimeLimit {
                gap: parse_num(line, g)?,
            },
            _ => return Err(Error::parse(line, format!("bad optimality {opt:?}"))),
        };
        let root_bound = r.keyed_f64("root_bound")?;
        let nodes: usize = r.keyed("nodes")?.1;
        let (line, rest) = r.field("mu_delta")?;
        let mu_delta = parse_list(line, rest)?;
        let (line, rest) = r.field("separation")?;
        let separation = parse_list(line, rest)?;
        let mut big_m_warnings = Vec::new();
        loop {
            let (line, text) = r.next_line()?;
            if text == "end" {
                break;
            }
            match text.strip_prefix("warning ") {
                Some(w) => big_m_warnings.push(w.to_string()),
                None => return Err(Error::parse(line, format!("unexpected line {text:?}"))),
            }
        }

        Ok(FittedModel {
            spec,
            betas,
            polyhedra,
            train_points,
            train_groups,
            cfg,
            diagnostics: Diagnostics {
                objective,
                eliminated_fraction,
                optimality,
                root_bound,
                nodes,
                mu_delta,
                separation,
                big_m_warnings,
            },
        })
    }
}

/// 17 significant digits: enough to read back the identical `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn nums(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

fn parse_num(line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad number {:?}", s.trim())))
}

fn parse_list(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| parse_num(line, t)).collect()
}

fn parse_nums(line: usize, s: &str, expected: usize) -> Result<Vec<f64>> {
    let v = parse_list(line, s)?;
    if v.len() != expected {
        return Err(Error::parse(line, format!("expected {expected} numbers, got {}", v.len())));
    }
    Ok(v)
}

/// Line cursor that reports 1-based line numbers and skips blank lines.
struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    /// Line number of the last line returned.
    line: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Reader { lines, pos: 0, line: 0 }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.get(self.pos) {
            Some(&(n, l)) => {
                self.pos += 1;
                self.line = n;
                Ok((n, l))
            }
            None => Err(Error::parse(self.line + 1, "unexpected end of model file")),
        }
    }

    fn at_section(&self) -> bool {
        self.lines.get(self.pos).map_or(true, |(_, l)| l.starts_with('['))
    }

    fn section(&mut self, name: &str) -> Result<()> {
        let (line, text) = self.next_line()?;
        if text != format!("[{name}]") {
            return Err(Error::parse(line, format!("expected [{name}], got {text:?}")));
        }
        Ok(())
    }

    /// A line `name rest`; returns `rest`.
    fn field(&mut self, name: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.next_line()?;
        match text.split_once(' ') {
            Some((key, rest)) if key == name => Ok((line, rest.trim())),
            None if text == name => Ok((line, "")),
            _ => Err(Error::parse(line, format!("expected {name:?}, got {text:?}"))),
        }
    }

    fn keyed<T: std::str::FromStr>(&mut self, name: &str) -> Result<(usize, T)> {
        let (line, rest) = self.field(name)?;
        let v = rest
            .parse()
            .map_err(|_| Error::parse(line, format!("bad value for {name}: {rest:?}")))?;
        Ok((line, v))
    }

    fn keyed_f64(&mut self, name: &str) -> Result<f64> {
        let (line, rest) = self.field(name)?;
        parse_num(line, rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::FuzzyNumber;

    fn two_segments(n_each: usize) -> Dataset {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_each {
            let v = i as f64 / (n_each - 1) as f64;
            x.push(vec![v]);
            y.push(v);
        }
        for i in 0..n_each {
            let v = 3.0 + i as f64 / (n_each - 1) as f64;
            x.push(vec![v]);
            y.push(4.0 - v);
        }
        Dataset::from_rows(x, y).unwrap()
    }

    fn cfg(k: usize, l: usize, rho: f64) -> Config {
        Config {
            k,
            l,
            rho: FuzzyNumber::crisp(rho),
            ..Config::default()
        }
    }

    #[test]
    fn two_segments_fit_exactly() {
        let data = two_segments(20);
        let model = fit(&data, None, &cfg(2, 6, 0.0)).unwrap();
        for (row, &y) in data.x().iter().zip(data.y()) {
            assert!((model.predict(row).unwrap() - y).abs() <= 1e-6);
        }
        assert!(model.diagnostics.objective <= 1e-6);
        assert!(model.diagnostics.mu_delta.iter().all(|&m| m > 1.0 - 1e-6));
        // Each segment is covered by its own region.
        let first = model.route(&[0.5]).unwrap();
        let second = model.route(&[3.5]).unwrap();
        assert!(matches!(first, Route::Region(_)) && matches!(second, Route::Region(_)));
        assert_ne!(first.group(), second.group());
    }

    #[test]
    fn single_group_is_global_l1() {
        let data = Dataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]],
            vec![0.3, 1.1, 1.7, 3.4, 3.9, 5.2],
        )
        .unwrap();
        let model = fit(&data, None, &cfg(1, 3, 0.0)).unwrap();
        let rows: Vec<Vec<f64>> = data.x().iter().map(|r| vec![r[0], 1.0]).collect();
        let global = l1_fit(&rows, data.y()).unwrap();
        assert_eq!(model.betas[0], global.beta);
        assert!(model.polyhedra[0].halfspaces.is_empty());
        for x in [-10.0, 0.5, 77.0] {
            assert_eq!(model.predict(&[x]).unwrap(), dot(&global.beta, &[x, 1.0]));
        }
    }

    fn manual(groups: Vec<usize>, points: Vec<Vec<f64>>, neighbors: usize) -> FittedModel {
        // Three regions that never contain anything, so every query falls
        // back to the neighbour vote.
        let never = |group| Polyhedron {
            group,
            halfspaces: vec![Halfspace {
                p: vec![0.0, 0.0],
                q: 1.0,
                side: Side::Ge,
            }],
        };
        FittedModel {
            spec: TransformSpec::identity(1),
            betas: vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]],
            polyhedra: vec![never(1), never(2), never(3)],
            train_points: points,
            train_groups: groups,
            cfg: Config {
                k: 3,
                neighbors,
                ..Config::default()
            },
            diagnostics: Diagnostics {
                objective: 0.0,
                eliminated_fraction: 0.0,
                optimality: Optimality::Proven,
                root_bound: 0.0,
                nodes: 1,
                mu_delta: vec![],
                separation: vec![0.0; 3],
                big_m_warnings: vec![],
            },
        }
    }

    #[test]
    fn fallback_takes_majority_of_neighbours() {
        let pts: Vec<Vec<f64>> = [0.1, 0.2, 0.3, 0.4, 0.5, 5.0, 6.0]
            .iter()
            .map(|&v| vec![v, 1.0])
            .collect();
        let model = manual(vec![3, 2, 2, 2, 2, 1, 1], pts, 5);
        assert_eq!(model.route(&[0.0]).unwrap(), Route::Fallback(2));
        assert_eq!(model.predict(&[0.0]).unwrap(), 0.0);
        assert_eq!(model.predict(&[0.25]).unwrap(), 0.5);
    }

    #[test]
    fn fallback_tie_goes_to_nearest() {
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 3.0].iter().map(|&v| vec![v, 1.0]).collect();
        let model = manual(vec![1, 2, 2, 1], pts, 4);
        assert_eq!(model.route(&[2.9]).unwrap(), Route::Fallback(1));
        assert_eq!(model.route(&[1.1]).unwrap(), Route::Fallback(2));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let data = two_segments(8);
        let model = fit(&data, None, &cfg(2, 4, 0.0)).unwrap();
        let back = FittedModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn bad_files_are_rejected() {
        let data = two_segments(8);
        let text = fit(&data, None, &cfg(2, 4, 0.0)).unwrap().to_text();
        let cut: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
        assert!(matches!(FittedModel::from_text(&cut), Err(Error::Parse { .. })));
        let bumped = text.replacen("fmiom-model 1", "fmiom-model 9", 1);
        assert!(matches!(
            FittedModel::from_text(&bumped),
            Err(Error::UnsupportedVersion { .. })
        ));
        let broken = text.replacen("objective ", "objective x", 1);
        match FittedModel::from_text(&broken) {
            Err(Error::Parse { line, .. }) => {
                assert_eq!(text.lines().nth(line - 1).unwrap().split(' ').next(), Some("objective"))
            }
            other => panic!("{other:?}"),
        }
    }
}
