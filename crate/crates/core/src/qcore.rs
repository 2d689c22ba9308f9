//! Primitive q-objects: the base `q`, q-numbers, q-Pochhammer symbols,
//! q-factorials, Gaussian binomials, the two q-exponentials, the power
//! `E_q^x = E_q(1)^x` and its inverse `Log_q`.

use crate::error::{QError, Result};
use crate::sum::NeumaierSum;

/// Which side of 1 the base lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// 0 < q < 1
    SubOne,
    /// q > 1
    SuperOne,
}

/// A validated base `q > 0`, `q != 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam {
    q: f64,
    regime: Regime,
}

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 || q == 1.0 {
            return Err(QError::InvalidBase(q));
        }
        let regime = if q < 1.0 { Regime::SubOne } else { Regime::SuperOne };
        Ok(Self { q, regime })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn regime(&self) -> Regime {
        self.regime
    }

    #[inline]
    pub fn is_sub_one(&self) -> bool {
        self.regime == Regime::SubOne
    }

    #[inline]
    pub fn ln(&self) -> f64 {
        self.q.ln()
    }

    /// `q^x`
    #[inline]
    pub fn pow(&self, x: f64) -> f64 {
        self.q.powf(x)
    }

    pub(crate) fn require_sub_one(&self, op: &'static str) -> Result<()> {
        if self.is_sub_one() {
            Ok(())
        } else {
            Err(QError::domain(op, format!("requires 0 < q < 1, got q = {}", self.q)))
        }
    }
}

/// Truncation policy for infinite sums and products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Stop once `|term| <= rel_term_tol * |partial sum|`.
    pub rel_term_tol: f64,
    pub max_terms: usize,
    /// Infinite products drop factors once `|a q^j| < product_tail_tol`.
    pub product_tail_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_term_tol: 1e-16,
            max_terms: 10_000,
            product_tail_tol: 1e-18,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_term_tol: f64, max_terms: usize, product_tail_tol: f64) -> Result<Self> {
        let ctrl = Self {
            rel_term_tol,
            max_terms,
            product_tail_tol,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_term_tol > 0.0) || !(self.product_tail_tol > 0.0) || self.max_terms == 0 {
            return Err(QError::Input(format!(
                "series control requires positive tolerances and max_terms >= 1, got {:?}",
                self
            )));
        }
        Ok(())
    }

    /// Sums `term(n)` for `n = start, start+1, ...` with compensated
    /// accumulation until the relative stopping rule fires.
    pub(crate) fn sum_series<F>(&self, op: &'static str, start: usize, mut term: F) -> Result<f64>
    where
        F: FnMut(usize) -> f64,
    {
        let mut acc = NeumaierSum::new();
        for i in 0..self.max_terms {
            let t = term(start + i);
            if !t.is_finite() {
                return Err(QError::NonFinite {
                    op,
                    x: (start + i) as f64,
                });
            }
            acc += t;
            if t.abs() <= self.rel_term_tol * acc.sum().abs() || t == 0.0 {
                return Ok(acc.sum());
            }
        }
        Err(QError::Convergence {
            op,
            terms: self.max_terms,
        })
    }
}

/// q-number `[x] = (1 - q^x) / (1 - q)`.
pub fn q_number(x: f64, q: QParam) -> f64 {
    // expm1 keeps full relative accuracy for q near 1 and small x.
    let ln_q = q.ln();
    (x * ln_q).exp_m1() / ln_q.exp_m1()
}

/// q-Pochhammer symbol `[x]_k = [x][x+1]...[x+k-1]`.
pub fn q_pochhammer(x: f64, k: i64, q: QParam) -> Result<f64> {
    if k < 0 {
        return Err(QError::domain("q_pochhammer", format!("k must be >= 0, got {}", k)));
    }
    Ok((0..k).map(|j| q_number(x + j as f64, q)).product())
}

/// q-factorial `[n]! = [1][2]...[n]`.
pub fn q_factorial(n: i64, q: QParam) -> Result<f64> {
    if n < 0 {
        return Err(QError::domain("q_factorial", format!("n must be >= 0, got {}", n)));
    }
    q_pochhammer(1.0, n, q)
}

/// Gaussian binomial coefficient `[n]! / ([k]! [n-k]!)`.
pub fn q_binomial(n: i64, k: i64, q: QParam) -> Result<f64> {
    if k < 0 || k > n {
        return Err(QError::domain(
            "q_binomial",
            format!("require 0 <= k <= n, got n = {}, k = {}", n, k),
        ));
    }
    let k = k.min(n - k);
    // [n]!/([k]![n-k]!) = prod_{i=1}^{k} [n-k+i]/[i]
    Ok((1..=k)
        .map(|i| q_number((n - k + i) as f64, q) / q_number(i as f64, q))
        .product())
}

/// The two q-analogues of the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QExpKind {
    /// `e_q(x) = sum x^n / [n]!`
    Small,
    /// `E_q(x) = sum q^{n(n-1)/2} x^n / [n]!`
    Big,
}

/// Radius of convergence of the selected q-exponential series, `None` if entire.
pub fn q_exp_radius(q: QParam, kind: QExpKind) -> Option<f64> {
    match (q.regime(), kind) {
        (Regime::SubOne, QExpKind::Small) => Some(1.0 / (1.0 - q.q())),
        (Regime::SuperOne, QExpKind::Big) => Some(q.q() / (q.q() - 1.0)),
        _ => None,
    }
}

/// Truncated series for `e_q(x)` or `E_q(x)`.
pub fn q_exp(x: f64, q: QParam, kind: QExpKind, ctrl: &SeriesControl) -> Result<f64> {
    if let Some(r) = q_exp_radius(q, kind) {
        if x.abs() >= r {
            return Err(QError::domain(
                "q_exp",
                format!("|x| = {} outside radius of convergence {}", x.abs(), r),
            ));
        }
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let qq = q.q();
    let mut term = 1.0;
    let mut qpow = 1.0; // q^{n-1}
    ctrl.sum_series("q_exp", 0, |n| {
        if n > 0 {
            term *= x / q_number(n as f64, q);
            if kind == QExpKind::Big {
                term *= qpow;
                qpow *= qq;
            }
        }
        term
    })
}

/// `E_q(x)` for `0 < q < 1` through Euler's product `(-(1-q)x; q)_inf`.
///
/// Agrees with the series of [`q_exp`] but does not cancel for large
/// negative arguments, where the series terms grow far beyond the result.
pub fn big_e_product(x: f64, q: QParam, ctrl: &SeriesControl) -> Result<f64> {
    qpoch_inf(-(1.0 - q.q()) * x, q, ctrl)
}

/// `E_q(1)` with the default series control.
pub fn big_e_one(q: QParam) -> Result<f64> {
    q_exp(1.0, q, QExpKind::Big, &SeriesControl::default())
}

/// `E_q^x = E_q(1)^x`, an ordinary power of the constant `E_q(1)`.
pub fn eq_power(x: f64, q: QParam, ctrl: &SeriesControl) -> Result<f64> {
    let base = q_exp(1.0, q, QExpKind::Big, ctrl)?;
    Ok((x * base.ln()).exp())
}

/// `Log_q y = ln y / ln E_q(1)`, inverse of [`eq_power`].
pub fn log_q(y: f64, q: QParam) -> Result<f64> {
    if !(y > 0.0) {
        return Err(QError::domain("log_q", format!("argument must be > 0, got {}", y)));
    }
    Ok(y.ln() / big_e_one(q)?.ln())
}

fn product_terms(a: f64, q: QParam, ctrl: &SeriesControl) -> usize {
    if a == 0.0 {
        return 0;
    }
    // |a| q^j < tol  <=>  j > ln(tol/|a|) / ln q
    let j = (ctrl.product_tail_tol / a.abs()).ln() / q.ln();
    if j <= 0.0 {
        1
    } else {
        j.ceil() as usize + 1
    }
}

/// Upper bound on the number of factors an infinite product may use.
const MAX_PRODUCT_FACTORS: usize = 50_000_000;

/// `ln |(a; q)_inf|` together with the sign of the product. Returns
/// `None` for the log when the product vanishes exactly.
pub(crate) fn ln_qpoch_inf(a: f64, q: QParam, ctrl: &SeriesControl) -> Result<(Option<f64>, f64)> {
    q.require_sub_one("qpoch_inf")?;
    let n = product_terms(a, q, ctrl);
    if n > MAX_PRODUCT_FACTORS {
        return Err(QError::Convergence {
            op: "qpoch_inf",
            terms: MAX_PRODUCT_FACTORS,
        });
    }
    let mut acc = NeumaierSum::new();
    let mut sign = 1.0;
    let mut aq = a;
    for _ in 0..n {
        let factor = 1.0 - aq;
        if factor == 0.0 {
            return Ok((None, 0.0));
        }
        if factor < 0.0 {
            sign = -sign;
        }
        acc += (-aq).ln_1p_abs();
        aq *= q.q();
    }
    Ok((Some(acc.sum()), sign))
}

trait Ln1pAbs {
    fn ln_1p_abs(self) -> f64;
}

impl Ln1pAbs for f64 {
    /// `ln |1 + self|`
    fn ln_1p_abs(self) -> f64 {
        if self > -1.0 {
            self.ln_1p()
        } else {
            (-1.0 - self).ln()
        }
    }
}

/// Infinite q-Pochhammer product `(a; q)_inf = prod_{j>=0} (1 - a q^j)`, `0 < q < 1`.
pub fn qpoch_inf(a: f64, q: QParam, ctrl: &SeriesControl) -> Result<f64> {
    match ln_qpoch_inf(a, q, ctrl)? {
        (Some(l), sign) => Ok(sign * l.exp()),
        (None, _) => Ok(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn qparam_validation() {
        assert!(QParam::new(1.0).is_err());
        assert!(QParam::new(0.0).is_err());
        assert!(QParam::new(-0.5).is_err());
        assert!(QParam::new(f64::NAN).is_err());
        assert_eq!(qp(0.5).regime(), Regime::SubOne);
        assert_eq!(qp(2.0).regime(), Regime::SuperOne);
    }

    #[test]
    fn series_control_validation() {
        assert!(SeriesControl::new(0.0, 10, 1e-18).is_err());
        assert!(SeriesControl::new(1e-16, 0, 1e-18).is_err());
        assert!(SeriesControl::new(1e-16, 10, -1.0).is_err());
        assert!(SeriesControl::new(1e-16, 10, 1e-18).is_ok());
    }

    #[test]
    fn q_number_examples() {
        for q in [0.1, 0.5, 0.9, 3.0] {
            assert!((q_number(1.0, qp(q)) - 1.0).abs() < 1e-15);
        }
        assert!((q_number(3.0, qp(0.5)) - 1.75).abs() < 1e-15);
        assert!((q_number(2.0, qp(0.999)) - 1.999).abs() < 1e-3);
    }

    #[test]
    fn pochhammer_factorial_examples() {
        let q = qp(0.5);
        assert_eq!(q_pochhammer(5.0, 0, q).unwrap(), 1.0);
        assert!((q_pochhammer(1.0, 3, q).unwrap() - 2.625).abs() < 1e-14);
        assert!((q_pochhammer(2.0, 2, q).unwrap() - 2.625).abs() < 1e-14);
        assert!(q_pochhammer(2.0, -1, q).is_err());
        assert_eq!(q_factorial(0, qp(0.3)).unwrap(), 1.0);
        assert!((q_factorial(3, q).unwrap() - 2.625).abs() < 1e-14);
        assert!((q_factorial(4, q).unwrap() - 4.921875).abs() < 1e-14);
        assert!(q_factorial(-2, q).is_err());
    }

    #[test]
    fn binomial_examples() {
        let q = qp(0.5);
        assert_eq!(q_binomial(7, 0, qp(0.3)).unwrap(), 1.0);
        // Gaussian polynomial 1 + q + 2q^2 + q^3 + q^4 at q = 1/2
        let gauss = 1.0 + 0.5 + 2.0 * 0.25 + 0.125 + 0.0625;
        assert!(rel(q_binomial(4, 2, q).unwrap(), gauss) < 1e-14);
        assert!((q_binomial(4, 2, q).unwrap() - 2.1875).abs() < 1e-14);
        // [5 choose 2] via the factorial ratio, independently evaluated
        let ratio = q_factorial(5, q).unwrap() / (q_factorial(2, q).unwrap() * q_factorial(3, q).unwrap());
        assert!(rel(q_binomial(5, 2, q).unwrap(), ratio) < 1e-12);
        assert!((q_binomial(5, 2, q).unwrap() - 2.421875).abs() < 1e-13);
        assert!(q_binomial(3, 4, q).is_err());
        assert!(q_binomial(3, -1, q).is_err());
    }

    #[test]
    fn q_exp_examples() {
        let q = qp(0.5);
        let c = SeriesControl::default();
        assert_eq!(q_exp(0.0, q, QExpKind::Small, &c).unwrap(), 1.0);
        assert_eq!(q_exp(0.0, q, QExpKind::Big, &c).unwrap(), 1.0);
        let e1 = q_exp(1.0, q, QExpKind::Big, &c).unwrap();
        assert!((e1 - 2.384_231_029_031_371_7).abs() < 1e-14);
        assert!((2.0..=std::f64::consts::E).contains(&e1));
        let prod = q_exp(0.5, q, QExpKind::Small, &c).unwrap() * q_exp(-0.5, q, QExpKind::Big, &c).unwrap();
        assert!((prod - 1.0).abs() < 1e-10);
    }

    #[test]
    fn q_exp_domain_error() {
        let c = SeriesControl::default();
        // radius 1/(1-q) = 2
        assert!(matches!(
            q_exp(2.0, qp(0.5), QExpKind::Small, &c),
            Err(QError::Domain { .. })
        ));
        assert!(q_exp(-1e3, qp(0.5), QExpKind::Big, &c).is_ok());
    }

    #[test]
    fn q_exp_convergence_error() {
        let c = SeriesControl::new(1e-16, 5, 1e-18).unwrap();
        assert!(matches!(
            q_exp(1.9, qp(0.5), QExpKind::Small, &c),
            Err(QError::Convergence { .. })
        ));
    }

    #[test]
    fn big_e_matches_euler_product() {
        // E_q(x) = (-(1-q)x; q)_inf
        let c = SeriesControl::default();
        for q in [0.3, 0.5, 0.9] {
            let q = qp(q);
            for x in [-3.0, -1.0, 0.5, 2.0] {
                let series = q_exp(x, q, QExpKind::Big, &c).unwrap();
                let prod = qpoch_inf(-(1.0 - q.q()) * x, q, &c).unwrap();
                assert!(
                    (series - prod).abs() < 1e-12 * prod.abs().max(1.0),
                    "{} {}",
                    series,
                    prod
                );
            }
        }
    }

    #[test]
    fn eq_power_and_log_q() {
        let c = SeriesControl::default();
        let q = qp(0.5);
        assert_eq!(eq_power(0.0, q, &c).unwrap(), 1.0);
        let e1 = q_exp(1.0, q, QExpKind::Big, &c).unwrap();
        assert!(rel(eq_power(1.0, q, &c).unwrap(), e1) < 1e-15);
        let p1 = eq_power(1.0, q, &c).unwrap();
        assert!(rel(eq_power(2.0, q, &c).unwrap(), p1 * p1) < 1e-12);
        assert_eq!(log_q(1.0, q).unwrap(), 0.0);
        assert!((log_q(e1, q).unwrap() - 1.0).abs() < 1e-12);
        let q7 = qp(0.7);
        let y = eq_power(3.7, q7, &c).unwrap();
        assert!((log_q(y, q7).unwrap() - 3.7).abs() < 1e-10);
        assert!(log_q(0.0, q).is_err());
        assert!(log_q(-1.0, q).is_err());
    }

    #[test]
    fn qpoch_inf_examples() {
        let c = SeriesControl::default();
        let q = qp(0.5);
        assert_eq!(qpoch_inf(0.0, q, &c).unwrap(), 1.0);
        assert!((qpoch_inf(0.5, q, &c).unwrap() - 0.288_788_095_086_602_4).abs() < 1e-15);
        assert_eq!(qpoch_inf(1.0, q, &c).unwrap(), 0.0);
        assert!(qpoch_inf(0.5, qp(2.0), &c).is_err());
    }

    /// q-Pascal recurrence computed bottom-up, independent of factorial ratios.
    fn pascal_table(n_max: usize, q: f64) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![1.0]];
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = vec![1.0; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + q.powi(k as i32) * prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_matches_pascal_oracle() {
        for qv in [0.3, 0.5, 0.9] {
            let table = pascal_table(12, qv);
            for n in 0..=12i64 {
                for k in 0..=n {
                    let v = q_binomial(n, k, qp(qv)).unwrap();
                    assert!(rel(v, table[n as usize][k as usize]) < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn q_number_is_geometric_sum(n in 1i32..60, qv in 0.01f64..0.99) {
            let direct: f64 = (0..n).map(|j| qv.powi(j)).sum();
            prop_assert!(rel(q_number(n as f64, qp(qv)), direct) < 1e-13);
        }

        #[test]
        fn binomial_symmetry(n in 0i64..30, kf in 0.0f64..1.0, qv in 0.05f64..0.95) {
            let k = ((n as f64) * kf).floor() as i64;
            let a = q_binomial(n, k, qp(qv)).unwrap();
            let b = q_binomial(n, n - k, qp(qv)).unwrap();
            prop_assert!(rel(a, b) < 1e-12);
        }

        #[test]
        fn eq_power_is_a_power_law(x in -20.0f64..20.0, y in -20.0f64..20.0, qv in 0.05f64..0.95) {
            let c = SeriesControl::default();
            let q = qp(qv);
            let lhs = eq_power(x + y, q, &c).unwrap();
            let rhs = eq_power(x, q, &c).unwrap() * eq_power(y, q, &c).unwrap();
            prop_assert!(rel(lhs, rhs) < 1e-12);
        }

        #[test]
        fn log_q_inverts_eq_power(x in -10.0f64..10.0, qv in 0.05f64..0.95) {
            let q = qp(qv);
            let y = eq_power(x, q, &SeriesControl::default()).unwrap();
            prop_assert!((log_q(y, q).unwrap() - x).abs() < 1e-10);
        }

        #[test]
        fn exponential_inverse_identity(t in -1.0f64..1.0, qi in 0usize..3) {
            let qv = [0.3, 0.5, 0.9][qi];
            let q = qp(qv);
            let x = t * 0.5 / (1.0 - qv);
            let c = SeriesControl::default();
            let p = q_exp(x, q, QExpKind::Small, &c).unwrap()
                * q_exp(-x, q, QExpKind::Big, &c).unwrap();
            prop_assert!((p - 1.0).abs() < 1e-10);
        }
    }
}
