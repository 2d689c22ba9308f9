//! Finite-order sign-pattern certification on grids.
//!
//! A certification samples `f` on `{q^j x : 0 <= j <= N}` for every grid
//! point `x`, builds the q-difference table and checks the sign of each
//! `D_q^n f(x)` required by the property. Values whose magnitude does not
//! exceed `tol_abs + tol_rel * scale` are counted as neutral: the table
//! cannot resolve their sign. A `Consistent` verdict only says that no
//! violation was found at this order, grid and tolerance.

mod harness;
mod report;

pub use harness::*;
pub use report::*;

use rayon::prelude::*;

use crate::error::{QError, Result};
use crate::qcore::{big_e_one, QParam};
use crate::qdiff::{QDiffTable, RealFunction, MAX_ORDER};

/// Point distribution of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

/// Strictly increasing, positive, finite evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spacing: Option<Spacing>,
    points: Vec<f64>,
}

impl Default for Grid {
    /// 64 log-spaced points on `[0.1, 5]`.
    fn default() -> Self {
        Grid::new(0.1, 5.0, 64, Spacing::Log).expect("default grid is valid")
    }
}

impl Grid {
    /// `count` points from `min` to `max` inclusive. A single point needs
    /// `min == max`.
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if !(min > 0.0) || !max.is_finite() || !min.is_finite() {
            return Err(QError::Input(format!(
                "grid bounds must be finite and > 0, got [{}, {}]",
                min, max
            )));
        }
        let points = match count {
            0 => return Err(QError::Input("grid needs at least one point".to_string())),
            1 if min == max => vec![min],
            1 => return Err(QError::Input("a one-point grid needs grid-min == grid-max".to_string())),
            _ if !(min < max) => {
                return Err(QError::Input(format!(
                    "grid-min must be below grid-max, got [{}, {}]",
                    min, max
                )))
            }
            _ => {
                let last = (count - 1) as f64;
                let mut pts: Vec<f64> = (0..count)
                    .map(|i| {
                        let s = i as f64 / last;
                        match spacing {
                            Spacing::Linear => min + (max - min) * s,
                            Spacing::Log => min * (max / min).powf(s),
                        }
                    })
                    .collect();
                pts[0] = min;
                pts[count - 1] = max;
                pts
            }
        };
        let g = Self {
            spacing: Some(spacing),
            points,
        };
        g.validate()?;
        Ok(g)
    }

    /// Explicit points; must be positive, finite and strictly increasing.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let g = Self { spacing: None, points };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(QError::Input("grid needs at least one point".to_string()));
        }
        if let Some(p) = self.points.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(QError::Input(format!("grid point {} is not finite and positive", p)));
        }
        if self.points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(QError::Input("grid points must be strictly increasing".to_string()));
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `None` for grids built from explicit points.
    pub fn spacing(&self) -> Option<Spacing> {
        self.spacing
    }

    /// Short description such as `log[0.1,5]x64`.
    pub fn describe(&self) -> String {
        let kind = self.spacing.map_or("points", Spacing::name);
        format!(
            "{}[{},{}]x{}",
            kind,
            self.points[0],
            self.points[self.points.len() - 1],
            self.points.len()
        )
    }
}

/// The sign pattern under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// `(-1)^n D_q^n f >= 0` for `n = 0..N`.
    QCM,
    /// `(-1)^n D_q^n Log_q f >= 0` for `n = 1..N`.
    QLogCM,
    /// `f >= 0` and `(-1)^(n-1) D_q^n f >= 0` for `n = 1..N`.
    QBernstein,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::QCM => "qcm",
            Property::QLogCM => "qlogcm",
            Property::QBernstein => "qbernstein",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qcm" => Some(Property::QCM),
            "qlogcm" => Some(Property::QLogCM),
            "qbernstein" => Some(Property::QBernstein),
            _ => None,
        }
    }

    fn first_order(self) -> usize {
        match self {
            Property::QLogCM => 1,
            _ => 0,
        }
    }

    /// Required sign of `D_q^n` for this property.
    fn sign(self, n: usize) -> f64 {
        let alt = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self {
            Property::QCM | Property::QLogCM => alt,
            Property::QBernstein if n == 0 => 1.0,
            Property::QBernstein => -alt,
        }
    }
}

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_TOL_ABS: f64 = 1e-9;
pub const DEFAULT_TOL_REL: f64 = 1e-7;

/// What to check and how strictly.
#[derive(Debug, Clone, PartialEq)]
pub struct CertSpec {
    pub property: Property,
    pub max_order: usize,
    pub grid: Grid,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl CertSpec {
    /// Default order, grid and tolerances.
    pub fn new(property: Property) -> Self {
        Self {
            property,
            max_order: DEFAULT_ORDER,
            grid: Grid::default(),
            tol_abs: DEFAULT_TOL_ABS,
            tol_rel: DEFAULT_TOL_REL,
        }
    }

    pub fn with_order(mut self, n: usize) -> Self {
        self.max_order = n;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_tolerances(mut self, tol_abs: f64, tol_rel: f64) -> Self {
        self.tol_abs = tol_abs;
        self.tol_rel = tol_rel;
        self
    }

    pub fn with_property(mut self, property: Property) -> Self {
        self.property = property;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ORDER).contains(&self.max_order) {
            return Err(QError::Input(format!(
                "order must be in 1..={}, got {}",
                MAX_ORDER, self.max_order
            )));
        }
        if !(self.tol_abs > 0.0) || !(self.tol_rel > 0.0) || !self.tol_abs.is_finite() || !self.tol_rel.is_finite() {
            return Err(QError::Input(format!(
                "tolerances must be finite and > 0, got tol_abs = {}, tol_rel = {}",
                self.tol_abs, self.tol_rel
            )));
        }
        self.grid.validate()
    }
}

/// Serial or rayon-parallel sweep over grid points. Both give identical
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Certifies `f` against `spec.property` using parallel evaluation.
pub fn certify<F: RealFunction + ?Sized>(f: &F, q: QParam, spec: &CertSpec) -> Result<CertReport> {
    certify_with(f, q, spec, Execution::Parallel)
}

pub fn certify_with<F: RealFunction + ?Sized>(
    f: &F,
    q: QParam,
    spec: &CertSpec,
    exec: Execution,
) -> Result<CertReport> {
    spec.validate()?;
    match spec.property {
        Property::QLogCM => {
            let ln_e = big_e_one(q)?.ln();
            let sampler = |x: f64| -> Result<QDiffTable> {
                let t = sample_table(f, x, q, spec.max_order)?;
                let mut logs = Vec::with_capacity(t.samples().len());
                for (j, &v) in t.samples().iter().enumerate() {
                    if !(v > 0.0) {
                        return Err(QError::Input(format!(
                            "Log_q needs f > 0, but f({}) = {}",
                            q.pow(j as f64) * x,
                            v
                        )));
                    }
                    logs.push(v.ln() / ln_e);
                }
                Ok(QDiffTable::from_samples(x, q, logs))
            };
            run(&sampler, q, spec, exec)
        }
        _ => run(&|x| sample_table(f, x, q, spec.max_order), q, spec, exec),
    }
}

/// QLogCM certification from `ln f` directly, for functions whose
/// logarithm is computed more accurately than the function itself.
pub fn certify_log_cm_from_ln<F: RealFunction + ?Sized>(
    ln_f: &F,
    q: QParam,
    spec: &CertSpec,
    exec: Execution,
) -> Result<CertReport> {
    let spec = spec.clone().with_property(Property::QLogCM);
    spec.validate()?;
    let ln_e = big_e_one(q)?.ln();
    let sampler = |x: f64| -> Result<QDiffTable> {
        let t = sample_table(ln_f, x, q, spec.max_order)?;
        let logs = t.samples().iter().map(|v| v / ln_e).collect();
        Ok(QDiffTable::from_samples(x, q, logs))
    };
    run(&sampler, q, &spec, exec)
}

fn sample_table<F: RealFunction + ?Sized>(f: &F, x: f64, q: QParam, order: usize) -> Result<QDiffTable> {
    QDiffTable::build(f, x, q, order).map_err(|e| match e {
        QError::NonFinite { x: p, .. } => QError::Input(format!("function is not evaluable at x = {}", p)),
        other => other,
    })
}

fn run<S>(sampler: &S, q: QParam, spec: &CertSpec, exec: Execution) -> Result<CertReport>
where
    S: Fn(f64) -> Result<QDiffTable> + Sync,
{
    let pts = spec.grid.points();
    let per_point = |(i, &x): (usize, &f64)| -> Result<Vec<CheckRecord>> {
        let table = sampler(x)?;
        Ok(check_point(&table, i, x, spec))
    };
    let rows: Vec<Result<Vec<CheckRecord>>> = match exec {
        Execution::Serial => pts.iter().enumerate().map(per_point).collect(),
        Execution::Parallel => pts.par_iter().enumerate().map(per_point).collect(),
    };
    // first error in grid order, independent of scheduling
    let mut checks = Vec::with_capacity(pts.len() * (spec.max_order + 1));
    for r in rows {
        checks.extend(r?);
    }
    Ok(CertReport::from_checks(q, spec, checks))
}

fn check_point(table: &QDiffTable, index: usize, x: f64, spec: &CertSpec) -> Vec<CheckRecord> {
    (spec.property.first_order()..=spec.max_order)
        .map(|n| {
            let value = spec.property.sign(n) * table.value(n);
            let scale = table.scale(n);
            let status = if value.abs() <= spec.tol_abs + spec.tol_rel * scale {
                CheckStatus::Neutral
            } else if value > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Violation
            };
            CheckRecord {
                index,
                x,
                n,
                value,
                scale,
                status,
            }
        })
        .collect()
}
