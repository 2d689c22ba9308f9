//! Named, parameterized builtin functions, so that certifications and
//! evaluations can be requested by name.

use std::collections::BTreeMap;

use crate::error::{QError, Result};
use crate::qcore::{eq_power, q_exp, q_number, QExpKind, QParam, SeriesControl};
use crate::qdiff::RealFunction;
use crate::qspecial::{
    f_abq, g_ab, g_ratio, h_aux, ln_f_abq, ln_q_gamma, polylog, q_gamma, q_psi, q_psi_k, GammaParams, RatioParams,
};

pub type BoxedFunction = Box<dyn RealFunction + Send>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Number,
    /// Comma-separated numbers.
    List,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub doc: &'static str,
}

/// Parsed parameter values, keyed by name.
#[derive(Debug, Clone, Default)]
pub struct Params(BTreeMap<&'static str, Vec<f64>>);

impl Params {
    pub fn num(&self, name: &str) -> f64 {
        self.0[name][0]
    }

    pub fn list(&self, name: &str) -> Vec<f64> {
        self.0[name].clone()
    }
}

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    build: fn(QParam, &Params) -> Result<BoxedFunction>,
}

impl std::fmt::Debug for Builtin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Builtin").field("name", &self.name).finish()
    }
}

impl Builtin {
    /// Parses `name=value` assignments against the schema, filling in
    /// defaults; unknown or malformed parameters are input errors.
    pub fn parse_params(&self, assignments: &[(String, String)]) -> Result<Params> {
        let mut raw: BTreeMap<&'static str, &str> = self.params.iter().map(|p| (p.name, p.default)).collect();
        for (k, v) in assignments {
            let spec = self.params.iter().find(|p| p.name == k).ok_or_else(|| {
                QError::Input(format!(
                    "{} has no parameter '{}' (expected: {})",
                    self.name,
                    k,
                    self.param_names()
                ))
            })?;
            raw.insert(spec.name, v.as_str());
        }
        let mut out = BTreeMap::new();
        for spec in self.params {
            let text = raw[spec.name];
            let vals = if text.trim().is_empty() {
                Vec::new()
            } else {
                text.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            QError::Input(format!(
                                "{}: cannot parse '{}' as a number for {}",
                                self.name, s, spec.name
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?
            };
            if spec.kind == ParamKind::Number && vals.len() != 1 {
                return Err(QError::Input(format!(
                    "{}: {} takes exactly one number",
                    self.name, spec.name
                )));
            }
            out.insert(spec.name, vals);
        }
        Ok(Params(out))
    }

    pub fn param_names(&self) -> String {
        if self.params.is_empty() {
            return "none".to_string();
        }
        self.params.iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
    }

    pub fn instantiate(&self, q: QParam, assignments: &[(String, String)]) -> Result<BoxedFunction> {
        let p = self.parse_params(assignments)?;
        (self.build)(q, &p)
    }
}

const fn num(name: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Number,
        default,
        doc,
    }
}

const fn list(name: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::List,
        default,
        doc,
    }
}

fn ok_or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn ctrl() -> SeriesControl {
    SeriesControl::default()
}

fn gamma_params(q: QParam, p: &Params) -> Result<GammaParams> {
    q.require_sub_one("f_abq")?;
    GammaParams::new(p.num("alpha"), p.num("beta"), q)
}

static BUILTINS: &[Builtin] = &[
    Builtin {
        name: "identity",
        summary: "x",
        params: &[],
        build: |_, _| Ok(Box::new(|x: f64| x)),
    },
    Builtin {
        name: "constant",
        summary: "c",
        params: &[num("c", "1", "value")],
        build: |_, p| {
            let c = p.num("c");
            Ok(Box::new(move |_x: f64| c))
        },
    },
    Builtin {
        name: "x_squared",
        summary: "x^2",
        params: &[],
        build: |_, _| Ok(Box::new(|x: f64| x * x)),
    },
    Builtin {
        name: "monomial",
        summary: "x^m",
        params: &[num("m", "3", "exponent")],
        build: |_, p| {
            let m = p.num("m");
            Ok(Box::new(move |x: f64| x.powf(m)))
        },
    },
    Builtin {
        name: "power_neg",
        summary: "x^(-p)",
        params: &[num("p", "1", "exponent")],
        build: |_, p| {
            let e = p.num("p");
            Ok(Box::new(move |x: f64| x.powf(-e)))
        },
    },
    Builtin {
        name: "reciprocal_shift",
        summary: "1/(x+c)",
        params: &[num("c", "1", "shift, > 0")],
        build: |_, p| {
            let c = p.num("c");
            if !(c > 0.0) {
                return Err(QError::Input("reciprocal_shift needs c > 0".to_string()));
            }
            Ok(Box::new(move |x: f64| 1.0 / (x + c)))
        },
    },
    Builtin {
        name: "exp_neg",
        summary: "exp(-a x)",
        params: &[num("a", "1", "rate")],
        build: |_, p| {
            let a = p.num("a");
            Ok(Box::new(move |x: f64| (-a * x).exp()))
        },
    },
    Builtin {
        name: "eq_power_neg",
        summary: "E_q^(-t x) = E_q(1)^(-t x)",
        params: &[num("t", "1", "exponent scale")],
        build: |q, p| {
            let t = p.num("t");
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(eq_power(-t * x, q, &c))))
        },
    },
    Builtin {
        name: "one_minus_eq_power",
        summary: "1 - E_q^(-t x)",
        params: &[num("t", "1", "exponent scale")],
        build: |q, p| {
            let t = p.num("t");
            let c = ctrl();
            Ok(Box::new(move |x: f64| {
                ok_or_nan(eq_power(-t * x, q, &c).map(|v| 1.0 - v))
            }))
        },
    },
    Builtin {
        name: "e_q",
        summary: "small q-exponential e_q(a x)",
        params: &[num("a", "1", "argument scale")],
        build: |q, p| {
            let a = p.num("a");
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(q_exp(a * x, q, QExpKind::Small, &c))))
        },
    },
    Builtin {
        name: "big_e_q",
        summary: "big q-exponential E_q(a x)",
        params: &[num("a", "1", "argument scale")],
        build: |q, p| {
            let a = p.num("a");
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(q_exp(a * x, q, QExpKind::Big, &c))))
        },
    },
    Builtin {
        name: "q_number",
        summary: "[x] = (1 - q^x)/(1 - q)",
        params: &[],
        build: |q, _| Ok(Box::new(move |x: f64| q_number(x, q))),
    },
    Builtin {
        name: "q_gamma",
        summary: "Gamma_q(x)",
        params: &[],
        build: |q, _| {
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(q_gamma(x, q, &c))))
        },
    },
    Builtin {
        name: "ln_q_gamma",
        summary: "ln Gamma_q(x)",
        params: &[],
        build: |q, _| {
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(ln_q_gamma(x, q, &c))))
        },
    },
    Builtin {
        name: "q_psi",
        summary: "psi_q(x), logarithmic derivative of Gamma_q",
        params: &[],
        build: |q, _| {
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(q_psi(x, q, &c))))
        },
    },
    Builtin {
        name: "q_psi_k",
        summary: "k-th derivative of psi_q",
        params: &[num("k", "1", "derivative order, >= 1")],
        build: |q, p| {
            let k = p.num("k");
            if !(k >= 1.0) || k.fract() != 0.0 || k > 32.0 {
                return Err(QError::Input(format!(
                    "q_psi_k needs an integer k in 1..=32, got {}",
                    k
                )));
            }
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(q_psi_k(x, q, k as u32, &c))))
        },
    },
    Builtin {
        name: "polylog",
        summary: "Li_s(x), |x| < 1",
        params: &[num("s", "2", "order")],
        build: |_, p| {
            let s = p.num("s");
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(polylog(s, x, &c))))
        },
    },
    Builtin {
        name: "h_aux",
        summary: "-(Li_2(q^x) + x ln q ln(1 - q^x))/ln q, 0 < q < 1",
        params: &[],
        build: |q, _| {
            q.require_sub_one("h_aux")?;
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(h_aux(x, q, &c))))
        },
    },
    Builtin {
        name: "f_abq",
        summary: "(1-q)^x e^h(x) Gamma_q(x+beta) / [x]^(x+beta-alpha), 0 < q < 1",
        params: &[num("alpha", "0.5", "alpha"), num("beta", "1", "beta, >= 0")],
        build: |q, p| {
            let gp = gamma_params(q, p)?;
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(f_abq(x, &gp, &c))))
        },
    },
    Builtin {
        name: "ln_f_abq",
        summary: "ln f_abq(x)",
        params: &[num("alpha", "0.5", "alpha"), num("beta", "1", "beta, >= 0")],
        build: |q, p| {
            let gp = gamma_params(q, p)?;
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(ln_f_abq(x, &gp, &c))))
        },
    },
    Builtin {
        name: "g_ab",
        summary: "t + ((beta-alpha) t - 1)(e^(beta t) - e^((beta-1) t))",
        params: &[num("alpha", "0.5", "alpha"), num("beta", "1", "beta")],
        build: |_, p| {
            let (a, b) = (p.num("alpha"), p.num("beta"));
            Ok(Box::new(move |t: f64| g_ab(t, a, b)))
        },
    },
    Builtin {
        name: "g_ratio",
        summary: "prod Gamma_q(x+a_i)/Gamma_q(x+b_i), 0 < q < 1",
        params: &[list("a", "1", "a_1,...,a_n"), list("b", "2", "b_1,...,b_n")],
        build: |q, p| {
            q.require_sub_one("g_ratio")?;
            let rp = RatioParams::unchecked(p.list("a"), p.list("b"))?;
            let c = ctrl();
            Ok(Box::new(move |x: f64| ok_or_nan(g_ratio(x, &rp, q, &c))))
        },
    },
];

/// All builtins, in a fixed order.
pub fn builtins() -> &'static [Builtin] {
    BUILTINS
}

pub fn lookup(name: &str) -> Result<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| {
        let names: Vec<&str> = BUILTINS.iter().map(|b| b.name).collect();
        QError::Input(format!("unknown function '{}'; known: {}", name, names.join(", ")))
    })
}

/// Builds a builtin with default parameters.
pub fn instantiate(name: &str, q: QParam) -> Result<BoxedFunction> {
    lookup(name)?.instantiate(q, &[])
}

/// Default corpus for the closure checks: Bernstein-type, CM-type and
/// negative-control members.
pub const CLOSURE_CORPUS: [&str; 7] = [
    "identity",
    "constant",
    "one_minus_eq_power",
    "reciprocal_shift",
    "exp_neg",
    "power_neg",
    "x_squared",
];

/// Default corpus for the classical log-CM screen.
pub const CLASSICAL_CORPUS: [&str; 6] = [
    "reciprocal_shift",
    "exp_neg",
    "power_neg",
    "eq_power_neg",
    "constant",
    "x_squared",
];

/// Instantiates a list of builtin names with default parameters.
pub fn corpus(names: &[&'static str], q: QParam) -> Result<Vec<(&'static str, BoxedFunction)>> {
    names.iter().map(|&n| Ok((n, instantiate(n, q)?))).collect()
}
