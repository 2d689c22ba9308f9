//! Higher-order q-differentiation of black-box functions, q-partial Bell
//! polynomials and the q-Faà di Bruno composition sum.

use std::collections::HashMap;

use crate::error::{QError, Result};
use crate::qcore::{q_factorial, q_number, QParam};
use crate::sum::NeumaierSum;

/// Default cap on the order of black-box q-differentiation.
pub const MAX_ORDER: usize = 8;

/// A deterministic real function of one real variable.
///
/// Implementations must be callable from several threads at once; the
/// certifier evaluates grid points concurrently. A NaN or infinite return
/// value marks the point as not evaluable.
pub trait RealFunction: Sync {
    fn eval(&self, x: f64) -> f64;
}

impl<F> RealFunction for F
where
    F: Fn(f64) -> f64 + Sync,
{
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Triangular table of q-derivatives on the geometric point set
/// `x0, q x0, ..., q^n x0`.
///
/// Entry `(m, j)` holds `(D_q^m f)(q^j x0)`; row `m` has `n - m + 1` entries.
#[derive(Debug, Clone)]
pub struct QDiffTable {
    x0: f64,
    q: QParam,
    rows: Vec<Vec<f64>>,
    // same recurrence on absolute values with sums: bounds the magnitude
    // that cancels in each entry
    bounds: Vec<Vec<f64>>,
}

/// `x0, q x0, q^2 x0, ...` by repeated multiplication, so that nested
/// two-point quotients started at `x0` hit bit-identical points.
fn geometric_points(x0: f64, q: QParam, order: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(order + 1);
    let mut p = x0;
    for _ in 0..=order {
        pts.push(p);
        p *= q.q();
    }
    pts
}

impl QDiffTable {
    /// Samples `f` at `n + 1` points and fills the table with the recurrence
    /// `(m, j) = ((m-1, j+1) - (m-1, j)) / (q^j x0 (q - 1))`.
    pub fn build<F: RealFunction + ?Sized>(f: &F, x0: f64, q: QParam, order: usize) -> Result<Self> {
        if x0 == 0.0 || !x0.is_finite() {
            return Err(QError::domain(
                "q_derive_n",
                format!("point must be finite and nonzero, got {}", x0),
            ));
        }
        let points = geometric_points(x0, q, order);
        let mut samples = Vec::with_capacity(order + 1);
        for &p in &points {
            let v = f.eval(p);
            if !v.is_finite() {
                return Err(QError::NonFinite { op: "q_derive_n", x: p });
            }
            samples.push(v);
        }
        Ok(Self::from_samples(x0, q, samples))
    }

    pub(crate) fn from_samples(x0: f64, q: QParam, samples: Vec<f64>) -> Self {
        let order = samples.len() - 1;
        let step: Vec<f64> = geometric_points(x0, q, order)
            .into_iter()
            .map(|p| p * (q.q() - 1.0))
            .collect();
        let mut rows = Vec::with_capacity(order + 1);
        let mut bounds = Vec::with_capacity(order + 1);
        bounds.push(samples.iter().map(|v| v.abs()).collect::<Vec<f64>>());
        rows.push(samples);
        for m in 1..=order {
            let prev = &rows[m - 1];
            let prev_bound = &bounds[m - 1];
            let row: Vec<f64> = (0..prev.len() - 1).map(|j| (prev[j + 1] - prev[j]) / step[j]).collect();
            let bound: Vec<f64> = (0..prev.len() - 1)
                .map(|j| (prev_bound[j + 1] + prev_bound[j]) / step[j].abs())
                .collect();
            rows.push(row);
            bounds.push(bound);
        }
        Self { x0, q, rows, bounds }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    /// Raw samples `f(q^j x0)`.
    pub fn samples(&self) -> &[f64] {
        &self.rows[0]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m]
    }

    /// `(D_q^m f)(q^j x0)`
    pub fn entry(&self, m: usize, j: usize) -> f64 {
        self.rows[m][j]
    }

    /// `(D_q^m f)(x0)`
    pub fn value(&self, m: usize) -> f64 {
        self.rows[m][0]
    }

    /// Condition scale of `value(m)`: the same difference recurrence run on
    /// `|f|` with the subtraction replaced by addition. Rounding error in
    /// `value(m)` is a small multiple of machine epsilon times this scale.
    pub fn scale(&self, m: usize) -> f64 {
        self.bounds[m][0]
    }
}

/// A q-derivative value with its cancellation scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDerivative {
    pub value: f64,
    pub scale: f64,
}

/// `D_q f(x) = (f(qx) - f(x)) / (x (q - 1))`.
pub fn q_derive<F: RealFunction + ?Sized>(f: &F, x: f64, q: QParam) -> Result<f64> {
    Ok(QDiffTable::build(f, x, q, 1)?.value(1))
}

/// `D_q^n f(x)` from the `(n + 1)`-point difference table.
pub fn q_derive_n<F: RealFunction + ?Sized>(f: &F, x: f64, q: QParam, n: i64) -> Result<f64> {
    Ok(q_derive_n_scaled(f, x, q, n)?.value)
}

/// Like [`q_derive_n`] but also reports the cancellation scale.
pub fn q_derive_n_scaled<F: RealFunction + ?Sized>(f: &F, x: f64, q: QParam, n: i64) -> Result<QDerivative> {
    if n < 0 {
        return Err(QError::domain("q_derive_n", format!("order must be >= 0, got {}", n)));
    }
    let n = n as usize;
    let t = QDiffTable::build(f, x, q, n)?;
    Ok(QDerivative {
        value: t.value(n),
        scale: t.scale(n),
    })
}

/// Compositions of `n` into `k` positive parts in lexicographic order.
#[derive(Debug, Clone)]
pub struct Compositions {
    parts: Vec<usize>,
    done: bool,
}

impl Compositions {
    pub fn new(n: usize, k: usize) -> Self {
        if k == 0 || k > n {
            return Self {
                parts: Vec::new(),
                done: true,
            };
        }
        let mut parts = vec![1; k];
        parts[k - 1] = n - k + 1;
        Self { parts, done: false }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.parts.clone();
        let k = self.parts.len();
        // rightmost i < k-1 with slack in the suffix after it
        let mut suffix = self.parts[k - 1];
        let mut advanced = false;
        for i in (0..k - 1).rev() {
            let slack = suffix - (k - 1 - i);
            if slack > 0 {
                self.parts[i] += 1;
                for p in &mut self.parts[i + 1..k - 1] {
                    *p = 1;
                }
                self.parts[k - 1] = suffix - 1 - (k - 2 - i);
                advanced = true;
                break;
            }
            suffix += self.parts[i];
        }
        if !advanced {
            self.done = true;
        }
        Some(out)
    }
}

/// Coefficient `[n]! / (prod_j [b_1 + ... + b_j] * prod_j [b_j - 1]!)` of a composition.
fn composition_coefficient(parts: &[usize], n_fact: f64, q: QParam) -> f64 {
    let mut denom = 1.0;
    let mut prefix = 0;
    for &b in parts {
        prefix += b;
        denom *= q_number(prefix as f64, q);
        denom *= q_factorial(b as i64 - 1, q).unwrap_or(1.0);
    }
    n_fact / denom
}

/// q-partial Bell polynomial `B_{n,k,q}(x_1, ..., x_{n-k+1})`.
pub fn q_bell(n: usize, k: usize, q: QParam, xs: &[f64]) -> Result<f64> {
    if k < 1 || k > n {
        return Err(QError::domain(
            "q_bell",
            format!("require 1 <= k <= n, got n = {}, k = {}", n, k),
        ));
    }
    if xs.len() < n - k + 1 {
        return Err(QError::Input(format!(
            "q_bell needs {} arguments, got {}",
            n - k + 1,
            xs.len()
        )));
    }
    let n_fact = q_factorial(n as i64, q)?;
    let mut acc = NeumaierSum::new();
    for parts in Compositions::new(n, k) {
        let coef = composition_coefficient(&parts, n_fact, q);
        let prod: f64 = parts.iter().map(|&b| xs[b - 1]).product();
        acc += coef * prod;
    }
    Ok(acc.sum())
}

/// Right-hand side of the q-Faà di Bruno expansion of `D_q^n g(h(x))`.
///
/// `dg(k, y)` must return `(D_q^k g)(y)`. The inner factors are
/// `(D_q^{b_j} h)(q^{b_1 + ... + b_{j-1}} x)`, each taken from a difference
/// table of `h`.
pub fn q_faa_di_bruno<G, H>(dg: G, h: &H, x: f64, q: QParam, n: usize) -> Result<f64>
where
    G: Fn(usize, f64) -> Result<f64>,
    H: RealFunction + ?Sized,
{
    if n < 1 {
        return Err(QError::domain("q_faa_di_bruno", "order must be >= 1"));
    }
    let hx = h.eval(x);
    if !hx.is_finite() {
        return Err(QError::NonFinite {
            op: "q_faa_di_bruno",
            x,
        });
    }
    // (D_q^i h)(q^s x) for i + s <= n, keyed by shift s
    let mut inner: HashMap<usize, QDiffTable> = HashMap::new();
    for s in 0..n {
        let shifted = x * q.q().powi(s as i32);
        inner.insert(s, QDiffTable::build(h, shifted, q, n - s)?);
    }
    let n_fact = q_factorial(n as i64, q)?;
    let mut total = NeumaierSum::new();
    for k in 1..=n {
        let outer = dg(k, hx)?;
        let mut acc = NeumaierSum::new();
        for parts in Compositions::new(n, k) {
            let coef = composition_coefficient(&parts, n_fact, q);
            let mut prod = 1.0;
            let mut shift = 0;
            for &b in &parts {
                prod *= inner[&shift].value(b);
                shift += b;
            }
            acc += coef * prod;
        }
        total += outer * acc.sum();
    }
    Ok(total.sum())
}

/// [`q_faa_di_bruno`] with the outer derivatives also taken from
/// difference tables of a black-box `g`.
pub fn q_faa_di_bruno_black_box<G, H>(g: &G, h: &H, x: f64, q: QParam, n: usize) -> Result<f64>
where
    G: RealFunction + ?Sized,
    H: RealFunction + ?Sized,
{
    q_faa_di_bruno(|k, y| q_derive_n(g, y, q, k as i64), h, x, q, n)
}
