//! Falsifiable checks of the closure and characterization results: each
//! harness certifies the premises, certifies the conclusion, and reports
//! whether "premise consistent implies conclusion consistent" held.

use super::{certify, certify_log_cm_from_ln, CertReport, CertSpec, Execution, HarnessReport, Property};
use crate::error::{QError, Result};
use crate::qcore::{eq_power, log_q, QParam, SeriesControl};
use crate::qdiff::RealFunction;
use crate::qmeasure::{q_laplace, semigroup_check, DiscreteMeasure, KernelKind};
use crate::qspecial::{g_ab, ln_f_abq, ln_g_ratio, q_psi_k, GammaParams, RatioParams};

/// A function with a display name, as used by the corpus harnesses.
pub type Named<'a> = (&'a str, &'a dyn RealFunction);

/// Exponents `t` used by the divisibility checks.
pub const DIVISIBILITY_TS: [f64; 3] = [0.5, 1.0, 2.0];

fn run(f: &(impl RealFunction + ?Sized), q: QParam, spec: &CertSpec, p: Property) -> Result<CertReport> {
    certify(f, q, &spec.clone().with_property(p))
}

fn exp_neg(t: f64, v: f64, q: QParam, ctrl: &SeriesControl) -> f64 {
    eq_power(-t * v, q, ctrl).unwrap_or(f64::NAN)
}

/// `f` is q-Bernstein iff `E_q^{-t f}` is q-CM for every `t > 0`.
///
/// Passes when the Bernstein verdict on `f` agrees with the QCM verdicts
/// on all `E_q^{-t f}`; a disagreement is flagged in the notes.
pub fn bernstein_iff_check<F: RealFunction + ?Sized>(
    f: &F,
    ts: &[f64],
    q: QParam,
    spec: &CertSpec,
) -> Result<HarnessReport> {
    if ts.iter().any(|t| !(*t > 0.0)) {
        return Err(QError::Input("exponents t must be > 0".to_string()));
    }
    let ctrl = SeriesControl::default();
    let mut h = HarnessReport::new("bernstein-iff");
    let lhs = h
        .push("f:qbernstein", run(f, q, spec, Property::QBernstein)?)
        .is_consistent();
    let mut all_rhs = true;
    for &t in ts {
        let g = |x: f64| exp_neg(t, f.eval(x), q, &ctrl);
        let ok = h
            .push(format!("exp(-{}f):qcm", t), run(&g, q, spec, Property::QCM)?)
            .is_consistent();
        all_rhs &= ok;
        if ok != lhs {
            h.notes.push(format!(
                "t = {}: Bernstein side {} but E_q^(-tf) side {}; inspect",
                t,
                if lhs { "consistent" } else { "violated" },
                if ok { "consistent" } else { "violated" }
            ));
        }
    }
    h.passed = lhs == all_rhs && h.notes.is_empty();
    Ok(h)
}

/// For q-CM `f >= 0` and `a > 0`, `f(x) - f(x + a)` is q-CM.
///
/// Certifies the premise too; a violated premise is reported and the
/// implication is then vacuous.
pub fn difference_check<F: RealFunction + ?Sized>(f: &F, a: f64, q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(QError::Input(format!("shift a must be finite and > 0, got {}", a)));
    }
    let mut h = HarnessReport::new("difference");
    let premise = h.push("f:qcm", run(f, q, spec, Property::QCM)?).is_consistent();
    let d = |x: f64| f.eval(x) - f.eval(x + a);
    let concl = h
        .push("difference:qcm", run(&d, q, spec, Property::QCM)?)
        .is_consistent();
    if !premise {
        h.notes
            .push("premise f q-CM not confirmed; difference reported only".to_string());
    }
    h.passed = !premise || concl;
    Ok(h)
}

/// Over a corpus: every function certified QLogCM must also certify QCM.
/// Functions that are not positive on the sample set are skipped.
pub fn log_cm_implies_cm(fs: &[Named], q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    let mut h = HarnessReport::new("log-cm-implies-cm");
    log_cm_into(&mut h, fs, q, spec)?;
    Ok(h)
}

fn log_cm_into(h: &mut HarnessReport, fs: &[Named], q: QParam, spec: &CertSpec) -> Result<()> {
    for &(name, f) in fs {
        let lc = match run(f, q, spec, Property::QLogCM) {
            Ok(r) => r,
            Err(QError::Input(msg)) => {
                h.notes.push(format!("{}: QLogCM skipped ({})", name, msg));
                continue;
            }
            Err(e) => return Err(e),
        };
        let premise = h.push(format!("{}:qlogcm", name), lc).is_consistent();
        let concl = h
            .push(format!("{}:qcm", name), run(f, q, spec, Property::QCM)?)
            .is_consistent();
        if premise && !concl {
            h.passed = false;
            h.notes.push(format!("{}: QLogCM consistent but QCM violated", name));
        }
    }
    Ok(())
}

/// Bernstein verdicts for each corpus member, in corpus order.
fn bernstein_members<'a>(
    h: &mut HarnessReport,
    fs: &[Named<'a>],
    q: QParam,
    spec: &CertSpec,
) -> Result<Vec<Named<'a>>> {
    let mut ok = Vec::new();
    for &(name, f) in fs {
        let label = format!("{}:qbernstein", name);
        let r = match h.section(&label) {
            Some(r) => r.is_consistent(),
            None => h.push(label, run(f, q, spec, Property::QBernstein)?).is_consistent(),
        };
        if r {
            ok.push((name, f));
        }
    }
    Ok(ok)
}

/// For q-Bernstein `f` and `g`, `g o f` is q-Bernstein; every ordered pair
/// of Bernstein-certified corpus members is tested.
pub fn composition_closure(fs: &[Named], q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    let mut h = HarnessReport::new("composition");
    composition_into(&mut h, fs, q, spec)?;
    Ok(h)
}

fn composition_into(h: &mut HarnessReport, fs: &[Named], q: QParam, spec: &CertSpec) -> Result<()> {
    let members = bernstein_members(h, fs, q, spec)?;
    for &(fname, f) in &members {
        for &(gname, g) in &members {
            let comp = |x: f64| g.eval(f.eval(x));
            let label = format!("{}({}):qbernstein", gname, fname);
            if !h
                .push(label.clone(), run(&comp, q, spec, Property::QBernstein)?)
                .is_consistent()
            {
                h.passed = false;
                h.notes
                    .push(format!("{} violated although both factors are consistent", label));
            }
        }
    }
    Ok(())
}

/// For q-Bernstein `f`: `E_q^{-t f}` is q-CM for `t` in [`DIVISIBILITY_TS`]
/// and `E_q^{-f}` is q-log-CM.
pub fn infinite_divisibility(fs: &[Named], q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    let mut h = HarnessReport::new("infinite-divisibility");
    divisibility_into(&mut h, fs, q, spec)?;
    Ok(h)
}

fn divisibility_into(h: &mut HarnessReport, fs: &[Named], q: QParam, spec: &CertSpec) -> Result<()> {
    let ctrl = SeriesControl::default();
    let members = bernstein_members(h, fs, q, spec)?;
    for &(name, f) in &members {
        for t in DIVISIBILITY_TS {
            let g = |x: f64| exp_neg(t, f.eval(x), q, &ctrl);
            let label = format!("exp(-{}{}):qcm", t, name);
            if !h.push(label.clone(), run(&g, q, spec, Property::QCM)?).is_consistent() {
                h.passed = false;
                h.notes
                    .push(format!("{} violated for a Bernstein-consistent exponent", label));
            }
        }
        let g = |x: f64| exp_neg(1.0, f.eval(x), q, &ctrl);
        let label = format!("exp(-{}):qlogcm", name);
        if !h
            .push(label.clone(), run(&g, q, spec, Property::QLogCM)?)
            .is_consistent()
        {
            h.passed = false;
            h.notes
                .push(format!("{} violated for a Bernstein-consistent exponent", label));
        }
    }
    Ok(())
}

/// All corpus closure checks: QLogCM implies QCM, composition of
/// Bernstein functions, and infinite divisibility of `E_q^{-f}`.
pub fn closure_checks(fs: &[Named], q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    let mut h = HarnessReport::new("closure");
    log_cm_into(&mut h, fs, q, spec)?;
    composition_into(&mut h, fs, q, spec)?;
    divisibility_into(&mut h, fs, q, spec)?;
    Ok(h)
}

/// Default forward-difference step of the classical screen.
pub const CLASSICAL_STEP: f64 = 0.05;

/// Classical screen for log-complete monotonicity: the signs of the
/// forward differences `(-1)^n Delta_h^n ln f(x)`, `n = 1..N`, on the spec
/// grid. These are nonnegative for every classically log-CM `f`.
/// Returns the number of decisive violations.
pub fn classical_log_cm_violations<F: RealFunction + ?Sized>(f: &F, h: f64, spec: &CertSpec) -> Result<usize> {
    if !(h > 0.0) {
        return Err(QError::Input(format!("difference step must be > 0, got {}", h)));
    }
    let n_max = spec.max_order;
    let mut bad = 0;
    for &x in spec.grid.points() {
        let mut g = Vec::with_capacity(n_max + 1);
        for k in 0..=n_max {
            let t = x + k as f64 * h;
            let v = f.eval(t);
            if !(v > 0.0) || !v.is_finite() {
                return Err(QError::Input(format!(
                    "classical screen needs f > 0, but f({}) = {}",
                    t, v
                )));
            }
            g.push(v.ln());
        }
        // repeated forward differences, with the matching magnitude bound
        let mut d = g.clone();
        let mut b: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        for n in 1..=n_max {
            d = d.windows(2).map(|w| w[1] - w[0]).collect();
            b = b.windows(2).map(|w| w[1] + w[0]).collect();
            let hn = h.powi(n as i32);
            let value = if n % 2 == 0 { d[0] } else { -d[0] } / hn;
            let scale = b[0] / hn;
            if value.abs() > spec.tol_abs + spec.tol_rel * scale && value < 0.0 {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// Classical log-CM implies q-log-CM, asserted over a corpus: every
/// member that passes the classical screen must certify QLogCM.
pub fn classical_log_cm_harness(fs: &[Named], q: QParam, spec: &CertSpec, step: f64) -> Result<HarnessReport> {
    let mut h = HarnessReport::new("classical-log-cm");
    for &(name, f) in fs {
        let bad = classical_log_cm_violations(f, step, spec)?;
        h.values.push((format!("{}:classical_violations", name), bad as f64));
        if bad > 0 {
            h.notes
                .push(format!("{}: fails the classical screen; QLogCM not required", name));
        }
        let r = h.push(format!("{}:qlogcm", name), run(f, q, spec, Property::QLogCM)?);
        if bad == 0 && !r.is_consistent() {
            h.passed = false;
            h.notes
                .push(format!("{}: classical screen passed but QLogCM violated", name));
        }
    }
    Ok(h)
}

/// Convolution-semigroup link on the drift family `pi_t = delta_{rate t}`:
/// checks the semigroup property under the power kernel, then recovers
/// the exponent `f(lambda) = -Log_q L(pi_1)(lambda)` and certifies it as
/// q-Bernstein. The negative control shifts every member outside `ts`.
pub fn semigroup_harness(
    rate: f64,
    ts: &[f64],
    lams: &[f64],
    q: QParam,
    spec: &CertSpec,
    negative_control: bool,
) -> Result<HarnessReport> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(QError::Input(format!("rate must be finite and > 0, got {}", rate)));
    }
    let ctrl = SeriesControl::default();
    let family = |t: f64| {
        let shift = if negative_control && !ts.contains(&t) { 0.1 } else { 0.0 };
        DiscreteMeasure::delta(rate * t + shift).ok()
    };
    let tol = 1e-12;
    let power = semigroup_check(family, ts, lams, q, KernelKind::PowerE, tol, &ctrl)?;
    let jackson = semigroup_check(family, ts, lams, q, KernelKind::JacksonE, tol, &ctrl)?;
    let mut h = HarnessReport::new("semigroup");
    h.values
        .push(("power_kernel_max_deviation".to_string(), power.max_deviation));
    h.values
        .push(("jackson_kernel_max_deviation".to_string(), jackson.max_deviation));
    if !jackson.passed {
        h.notes
            .push("the E_q(-lambda t) kernel is not multiplicative; shown for reference".to_string());
    }
    let pi1 = family(1.0).ok_or_else(|| QError::Input("family has no member at t = 1".to_string()))?;
    let exponent = |lam: f64| {
        q_laplace(&pi1, lam, q, KernelKind::PowerE, &ctrl)
            .and_then(|v| log_q(v, q))
            .map(|v| -v)
            .unwrap_or(f64::NAN)
    };
    let bern = h
        .push("exponent:qbernstein", run(&exponent, q, spec, Property::QBernstein)?)
        .is_consistent();
    h.passed = power.passed && bern;
    Ok(h)
}

/// Parameters of the `g_{alpha,beta}` positivity sweep: 200 log-spaced
/// points on `[1e-3, 50]`.
pub const G_AB_T_MIN: f64 = 1e-3;
pub const G_AB_T_MAX: f64 = 50.0;
pub const G_AB_POINTS: usize = 200;

/// Smallest `g_{alpha,beta}(t)` over the positivity sweep, with its `t`.
pub fn g_ab_min(alpha: f64, beta: f64) -> (f64, f64) {
    let last = (G_AB_POINTS - 1) as f64;
    (0..G_AB_POINTS)
        .map(|i| {
            let t = G_AB_T_MIN * (G_AB_T_MAX / G_AB_T_MIN).powf(i as f64 / last);
            (t, g_ab(t, alpha, beta))
        })
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
}

/// `f_{alpha,beta,q}` is q-log-CM for `2 alpha <= 1 <= beta`, `0 < q < 1`;
/// also sweeps `g_{alpha,beta} > 0`. Parameters outside the hypothesis
/// are rejected unless `negative_control` is set.
pub fn gamma_log_cm_harness(p: &GammaParams, spec: &CertSpec, negative_control: bool) -> Result<HarnessReport> {
    if !p.hypothesis_holds() && !negative_control {
        return Err(QError::Input(format!(
            "need 2 alpha <= 1 <= beta and 0 < q < 1, got alpha = {}, beta = {}, q = {}",
            p.alpha,
            p.beta,
            p.q.q()
        )));
    }
    let ctrl = SeriesControl::default();
    let lnf = |x: f64| ln_f_abq(x, p, &ctrl).unwrap_or(f64::NAN);
    let mut h = HarnessReport::new("f-abq");
    let r = certify_log_cm_from_ln(&lnf, p.q, spec, Execution::Parallel)?;
    let ok = h.push("f_abq:qlogcm", r).is_consistent();
    let (t, g) = g_ab_min(p.alpha, p.beta);
    h.values.push(("g_ab_min".to_string(), g));
    h.values.push(("g_ab_argmin".to_string(), t));
    if !(g > 0.0) {
        h.notes.push(format!("g_ab({}) = {} is not positive", t, g));
    }
    if negative_control {
        h.notes.push("negative control: hypothesis not enforced".to_string());
    }
    h.passed = ok && g > 0.0;
    Ok(h)
}

/// `G_q(x) = prod Gamma_q(x + a_i) / Gamma_q(x + b_i)` is q-CM under the
/// ordering and prefix-sum hypothesis on `(a, b)`.
pub fn gamma_ratio_harness(
    rp: &RatioParams,
    q: QParam,
    spec: &CertSpec,
    negative_control: bool,
) -> Result<HarnessReport> {
    if !rp.hypothesis_holds() && !negative_control {
        return Err(QError::Input(
            "ratio parameters violate the ordering or prefix-sum hypothesis".to_string(),
        ));
    }
    let ctrl = SeriesControl::default();
    let g = |x: f64| ln_g_ratio(x, rp, q, &ctrl).map(f64::exp).unwrap_or(f64::NAN);
    let mut h = HarnessReport::new("gamma-ratio");
    let ok = h.push("g_ratio:qcm", run(&g, q, spec, Property::QCM)?).is_consistent();
    if negative_control {
        h.notes.push("negative control: hypothesis not enforced".to_string());
    }
    h.passed = ok;
    Ok(h)
}

/// The first derivative of q-psi is q-CM for `0 < q < 1`.
pub fn trigamma_cm_harness(q: QParam, spec: &CertSpec) -> Result<HarnessReport> {
    let ctrl = SeriesControl::default();
    let f = |x: f64| q_psi_k(x, q, 1, &ctrl).unwrap_or(f64::NAN);
    let mut h = HarnessReport::new("trigamma-cm");
    h.passed = h.push("psi1:qcm", run(&f, q, spec, Property::QCM)?).is_consistent();
    Ok(h)
}
