//! Finitely supported measures on the half-line, Jackson q-integration,
//! q-Laplace transforms under both kernels, q-convolution and the
//! convolution-semigroup check.

use std::fmt::Write as _;

use crate::error::{QError, Result};
use crate::format::fmt17;
use crate::qcore::{big_e_product, eq_power, q_exp, QExpKind, QParam, SeriesControl};
use crate::qdiff::RealFunction;
use crate::sum::NeumaierSum;

/// Locations closer than `MERGE_TOL * (1 + |t|)` are treated as one atom.
pub const MERGE_TOL: f64 = 1e-12;

/// A finite nonnegative measure with finitely many atoms.
///
/// Atoms are kept sorted by location with near-duplicates merged and
/// zero-weight atoms dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::new();
        for (t, w) in atoms {
            if !(t.is_finite() && t >= 0.0) {
                return Err(QError::Input(format!(
                    "atom location must be finite and >= 0, got {}",
                    t
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(QError::Input(format!("atom weight must be finite and >= 0, got {}", w)));
            }
            v.push((t, w));
        }
        Ok(Self::normalized(v))
    }

    fn normalized(mut v: Vec<(f64, f64)>) -> Self {
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (t, w) in v {
            match atoms.last_mut() {
                Some(last) if t - last.0 <= MERGE_TOL * (1.0 + last.0.abs()) => last.1 += w,
                _ => atoms.push((t, w)),
            }
        }
        atoms.retain(|&(_, w)| w > 0.0);
        Self { atoms }
    }

    /// Unit point mass at `t`.
    pub fn delta(t: f64) -> Result<Self> {
        Self::new([(t, 1.0)])
    }

    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).collect::<NeumaierSum>().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    /// Plain-text form: one `t w` line per atom, sorted by `t`, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(t, w) in &self.atoms {
            let _ = writeln!(out, "{} {}", fmt17(t), fmt17(w));
        }
        out
    }

    /// Parses the form written by [`to_text`](Self::to_text). Blank lines
    /// and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut prev: Option<f64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(ts), Some(ws), None) = (it.next(), it.next(), it.next()) else {
                return Err(QError::Parse {
                    line: i + 1,
                    msg: format!("expected `t w`, got {:?}", line),
                });
            };
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| QError::Parse {
                    line: i + 1,
                    msg: format!("{:?}: {}", s, e),
                })
            };
            let t = parse(ts)?;
            let w = parse(ws)?;
            if let Some(p) = prev {
                if t < p {
                    return Err(QError::Parse {
                        line: i + 1,
                        msg: "locations must be sorted".to_string(),
                    });
                }
            }
            prev = Some(t);
            atoms.push((t, w));
        }
        Self::new(atoms)
    }
}

/// Kernel of the q-Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `E_q(-lambda t)`
    JacksonE,
    /// `E_q^{-lambda t} = E_q(1)^{-lambda t}`
    PowerE,
}

impl KernelKind {
    pub fn eval(self, lam: f64, t: f64, q: QParam, ctrl: &SeriesControl) -> Result<f64> {
        let y = -lam * t;
        match self {
            KernelKind::PowerE => eq_power(y, q, ctrl),
            KernelKind::JacksonE if q.is_sub_one() => big_e_product(y, q, ctrl),
            KernelKind::JacksonE => q_exp(y, q, QExpKind::Big, ctrl),
        }
    }
}

/// `sum_i w_i K(lambda, t_i)`.
pub fn q_laplace(mu: &DiscreteMeasure, lam: f64, q: QParam, kernel: KernelKind, ctrl: &SeriesControl) -> Result<f64> {
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(QError::domain("q_laplace", format!("lambda must be >= 0, got {}", lam)));
    }
    let mut acc = NeumaierSum::new();
    for &(t, w) in mu.atoms() {
        acc += w * kernel.eval(lam, t, q, ctrl)?;
    }
    Ok(acc.sum())
}

/// q-convolution: atoms at all pairwise sums `t_i + s_j` with weights `w_i v_j`.
pub fn q_convolve(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> DiscreteMeasure {
    let mut v = Vec::with_capacity(mu.len() * nu.len());
    for &(t, w) in mu.atoms() {
        for &(s, u) in nu.atoms() {
            v.push((t + s, w * u));
        }
    }
    DiscreteMeasure::normalized(v)
}

/// `E_q^{-t f(lambda)}`, the transform value a convolution semigroup with
/// exponent `f` must produce at time `t`.
pub fn semigroup_transform<F: RealFunction + ?Sized>(
    f: &F,
    t: f64,
    lam: f64,
    q: QParam,
    ctrl: &SeriesControl,
) -> Result<f64> {
    let fl = f.eval(lam);
    if !fl.is_finite() {
        return Err(QError::NonFinite {
            op: "semigroup_transform",
            x: lam,
        });
    }
    eq_power(-t * fl, q, ctrl)
}

/// One comparison made by [`semigroup_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupRow {
    pub t: f64,
    pub s: f64,
    pub lam: f64,
    /// transform of `family(t) * family(s)`
    pub convolved: f64,
    /// transform of `family(t + s)`
    pub direct: f64,
}

impl SemigroupRow {
    pub fn deviation(&self) -> f64 {
        (self.convolved - self.direct).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    pub kernel: KernelKind,
    pub tol: f64,
    pub rows: Vec<SemigroupRow>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Checks `family(t) * family(s) = family(t + s)` through the transform at
/// every `(t, s)` pair from `ts` and every `lambda` in `lams`.
///
/// `family` returns `None` where it is not defined; every pairwise sum must
/// be defined.
pub fn semigroup_check<F>(
    family: F,
    ts: &[f64],
    lams: &[f64],
    q: QParam,
    kernel: KernelKind,
    tol: f64,
    ctrl: &SeriesControl,
) -> Result<SemigroupReport>
where
    F: Fn(f64) -> Option<DiscreteMeasure>,
{
    let member = |t: f64| family(t).ok_or_else(|| QError::Input(format!("semigroup family undefined at t = {}", t)));
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        for &s in &ts[i..] {
            let conv = q_convolve(&member(t)?, &member(s)?);
            let sum = member(t + s)?;
            for &lam in lams {
                let row = SemigroupRow {
                    t,
                    s,
                    lam,
                    convolved: q_laplace(&conv, lam, q, kernel, ctrl)?,
                    direct: q_laplace(&sum, lam, q, kernel, ctrl)?,
                };
                max_dev = max_dev.max(row.deviation());
                rows.push(row);
            }
        }
    }
    Ok(SemigroupReport {
        kernel,
        tol,
        rows,
        max_deviation: max_dev,
        passed: max_dev <= tol,
    })
}

/// Result of a truncated Jackson sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonSum {
    pub value: f64,
    /// term at the lowest exponent (largest abscissa)
    pub head_term: f64,
    /// term at the highest exponent (smallest abscissa)
    pub tail_term: f64,
    pub terms: usize,
}

impl JacksonSum {
    /// Both end terms are below `rel * |value|`.
    pub fn converged(&self, rel: f64) -> bool {
        let bound = rel * self.value.abs();
        self.head_term.abs() <= bound && self.tail_term.abs() <= bound
    }
}

/// Jackson sum `(1 - q) sum_{n = n_lo}^{n_hi} q^n f(q^n)` over the lattice `{q^n}`.
pub fn jackson_integral<F: RealFunction + ?Sized>(f: &F, q: QParam, n_lo: i32, n_hi: i32) -> Result<JacksonSum> {
    jackson_integral_scaled(f, q, 1.0, n_lo, n_hi)
}

/// Jackson sum over the lattice `{c q^n}`:
/// `c (1 - q) sum_{n = n_lo}^{n_hi} q^n f(c q^n)`.
pub fn jackson_integral_scaled<F: RealFunction + ?Sized>(
    f: &F,
    q: QParam,
    anchor: f64,
    n_lo: i32,
    n_hi: i32,
) -> Result<JacksonSum> {
    q.require_sub_one("jackson_integral")?;
    if n_lo > n_hi {
        return Err(QError::Input(format!("empty exponent range [{}, {}]", n_lo, n_hi)));
    }
    if !(anchor > 0.0) || !anchor.is_finite() {
        return Err(QError::Input(format!("lattice anchor must be > 0, got {}", anchor)));
    }
    let scale = anchor * (1.0 - q.q());
    let mut acc = NeumaierSum::new();
    let mut head = 0.0;
    let mut tail = 0.0;
    for n in n_lo..=n_hi {
        let qn = q.q().powi(n);
        let t = anchor * qn;
        let v = f.eval(t);
        if !v.is_finite() {
            return Err(QError::NonFinite {
                op: "jackson_integral",
                x: t,
            });
        }
        let term = scale * qn * v;
        if n == n_lo {
            head = term;
        }
        tail = term;
        acc += term;
    }
    Ok(JacksonSum {
        value: acc.sum(),
        head_term: head,
        tail_term: tail,
        terms: (n_hi - n_lo + 1) as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    #[test]
    fn normalization_sorts_and_merges() {
        let m = DiscreteMeasure::new([(2.0, 0.25), (1.0, 0.5), (2.0 + 1e-14, 0.25), (3.0, 0.0)]).unwrap();
        assert_eq!(m.atoms(), &[(1.0, 0.5), (2.0, 0.5)]);
        assert!(m.is_probability());
        assert!(DiscreteMeasure::new([(-1.0, 1.0)]).is_err());
        assert!(DiscreteMeasure::new([(1.0, -1.0)]).is_err());
        assert!(DiscreteMeasure::new([(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = DiscreteMeasure::new([(0.1, 1.0 / 3.0), (0.7, 2.0 / 3.0), (1e-300, 1e-17)]).unwrap();
        let text = m.to_text();
        assert!(text.lines().count() == 3);
        let back = DiscreteMeasure::from_text(&text).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.atoms().iter().zip(m.atoms()) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(
            DiscreteMeasure::from_text("1.0 0.5\n0.5 0.5\n"),
            Err(QError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            DiscreteMeasure::from_text("# header\n1.0\n"),
            Err(QError::Parse { line: 2, .. })
        ));
        assert!(DiscreteMeasure::from_text("1.0 abc\n").is_err());
        assert!(DiscreteMeasure::from_text("\n# only comments\n").unwrap().is_empty());
    }

    #[test]
    fn laplace_examples() {
        let c = SeriesControl::default();
        let q = qp(0.5);
        let d0 = DiscreteMeasure::delta(0.0).unwrap();
        for k in [KernelKind::JacksonE, KernelKind::PowerE] {
            for lam in [0.0, 0.3, 7.0] {
                assert_eq!(q_laplace(&d0, lam, q, k, &c).unwrap(), 1.0);
            }
        }
        let d1 = DiscreteMeasure::delta(1.0).unwrap();
        let v = q_laplace(&d1, 1.0, q, KernelKind::PowerE, &c).unwrap();
        let e1 = q_exp(1.0, q, QExpKind::Big, &c).unwrap();
        assert!((v - 1.0 / e1).abs() < 1e-15);
        assert!((v - 0.4194).abs() < 1e-3);

        let m = DiscreteMeasure::new([(1.0, 0.5), (0.5, 0.5)]).unwrap();
        let v = q_laplace(&m, 2.0, q, KernelKind::JacksonE, &c).unwrap();
        let expect =
            0.5 * q_exp(-2.0, q, QExpKind::Big, &c).unwrap() + 0.5 * q_exp(-1.0, q, QExpKind::Big, &c).unwrap();
        assert!((v - expect).abs() < 1e-14);
        assert!(q_laplace(&m, -1.0, q, KernelKind::PowerE, &c).is_err());
    }

    #[test]
    fn laplace_at_zero_is_mass() {
        let c = SeriesControl::default();
        let m = DiscreteMeasure::new([(0.3, 0.2), (1.7, 1.1), (4.0, 0.05)]).unwrap();
        for k in [KernelKind::JacksonE, KernelKind::PowerE] {
            assert_eq!(q_laplace(&m, 0.0, qp(0.7), k, &c).unwrap(), m.total_mass());
        }
    }

    #[test]
    fn convolution_examples() {
        let d1 = DiscreteMeasure::delta(1.0).unwrap();
        assert_eq!(q_convolve(&d1, &d1), DiscreteMeasure::delta(2.0).unwrap());
        let a = DiscreteMeasure::delta(0.3).unwrap();
        let b = DiscreteMeasure::delta(1.25).unwrap();
        assert_eq!(q_convolve(&a, &b).atoms(), &[(0.3 + 1.25, 1.0)]);
        let coin = DiscreteMeasure::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let two = q_convolve(&coin, &coin);
        assert_eq!(two.atoms(), &[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]);
        assert!(two.is_probability());
    }

    #[test]
    fn jackson_kernel_is_not_multiplicative() {
        let c = SeriesControl::default();
        let q = qp(0.5);
        let d1 = DiscreteMeasure::delta(1.0).unwrap();
        let d2 = q_convolve(&d1, &d1);
        let lam = 1.0;
        let lhs = q_laplace(&d2, lam, q, KernelKind::JacksonE, &c).unwrap();
        let one = q_laplace(&d1, lam, q, KernelKind::JacksonE, &c).unwrap();
        // E_q(-2) = (1; q)_inf = 0 at q = 1/2 while E_q(-1)^2 > 0
        assert_eq!(lhs, 0.0);
        assert!(one * one > 0.05);
    }

    #[test]
    fn semigroup_transform_examples() {
        let c = SeriesControl::default();
        let q = qp(0.5);
        let id = |x: f64| x;
        assert_eq!(semigroup_transform(&id, 0.0, 1.0, q, &c).unwrap(), 1.0);
        let v = semigroup_transform(&id, 1.0, 1.0, q, &c).unwrap();
        assert!((v - 0.4194).abs() < 1e-3);
        let f = |x: f64| x.sqrt();
        let v5 = semigroup_transform(&f, 5.0, 0.8, q, &c).unwrap();
        let v2 = semigroup_transform(&f, 2.0, 0.8, q, &c).unwrap();
        let v3 = semigroup_transform(&f, 3.0, 0.8, q, &c).unwrap();
        assert!((v5 - v2 * v3).abs() <= 1e-12 * v5);
    }

    #[test]
    fn semigroup_check_delta_family() {
        let c = SeriesControl::default();
        let ts = [0.5, 1.0, 2.0];
        let lams = [0.0, 0.5, 1.0, 3.0];
        for k in [KernelKind::JacksonE, KernelKind::PowerE] {
            let r = semigroup_check(
                |t| DiscreteMeasure::delta(0.7 * t).ok(),
                &ts,
                &lams,
                qp(0.5),
                k,
                1e-12,
                &c,
            )
            .unwrap();
            assert!(r.passed, "{:?}", k);
            assert_eq!(r.rows.len(), 6 * lams.len());
        }
    }

    #[test]
    fn semigroup_check_broken_and_missing() {
        let c = SeriesControl::default();
        let ts = [1.0, 2.0];
        let base = [1.0, 2.0];
        let broken = |t: f64| {
            let shift = if base.contains(&t) { 0.0 } else { 0.1 };
            DiscreteMeasure::delta(t + shift).ok()
        };
        let r = semigroup_check(broken, &ts, &[1.0], qp(0.5), KernelKind::PowerE, 1e-12, &c).unwrap();
        assert!(!r.passed);
        assert!(r.max_deviation > 0.0);

        let partial = |t: f64| if t < 3.5 { DiscreteMeasure::delta(t).ok() } else { None };
        assert!(matches!(
            semigroup_check(partial, &ts, &[1.0], qp(0.5), KernelKind::PowerE, 1e-12, &c),
            Err(QError::Input(_))
        ));
    }

    #[test]
    fn jackson_examples() {
        let q = qp(0.5);
        let s = jackson_integral(&|t: f64| t, q, 0, 200).unwrap();
        assert!((s.value - 2.0 / 3.0).abs() < 1e-12);
        let s = jackson_integral(&|_t: f64| 1.0, q, 0, 200).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(!s.converged(1e-14));
        let c = SeriesControl::default();
        let kern = |t: f64| big_e_product(-q.q() * t, q, &c).unwrap();
        let s = jackson_integral(&kern, q, -40, 200).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6);
        assert!(s.converged(1e-14));
        assert!(jackson_integral(&kern, qp(2.0), 0, 10).is_err());
        assert!(jackson_integral(&kern, q, 5, 1).is_err());
        assert!(jackson_integral(&|_t: f64| f64::NAN, q, 0, 3).is_err());
    }
}
