//! Explicit a-priori bound constants and the chained-ODE iteration lemma.
//!
//! For `1 <= alpha < alpha*` every nonnegative bounded solution satisfies
//! `||u(t)||_inf <= M = K max{1, (A/kappa)^e, ||u0||_inf}` once `mu` is small enough,
//! with `e = (s-2)/(s(beta+1-alpha) - 2 beta)` and `s = s*` the critical Sobolev exponent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("alpha = {alpha} is outside the bounded regime 1 <= alpha < alpha* = {alpha_star}")]
    OutsideRegime { alpha: f64, alpha_star: f64 },
    #[error("invalid input {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("bound overflows double precision: log2(bound) = {log2}")]
    Overflow { log2: f64 },
    #[error("lemma bound violated at level {k}, t = {t}: y_k / bound = {ratio}")]
    Violation { k: u32, t: f64, ratio: f64 },
}

/// Extended real used for `s*`: finite, or `+inf` for `N <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Text(t) if t == "+inf" || t == "inf" => Ok(ExtReal::PosInf),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"+inf\", got {t}"))),
        }
    }
}

/// `alpha* = 1 + beta` for `N <= 2`, `1 + 2 beta / N` otherwise.
pub fn critical_alpha(n: u32, beta: f64) -> f64 {
    if n <= 2 {
        1.0 + beta
    } else {
        // (N + 2 beta) / N rounds once, so N = 3, beta = 1 gives exactly 5/3
        (n as f64 + 2.0 * beta) / n as f64
    }
}

/// `s* = 2N/(N-2)` for `N > 2`, `+inf` otherwise.
pub fn critical_s(n: u32) -> ExtReal {
    if n <= 2 {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(2.0 * n as f64 / (n as f64 - 2.0))
    }
}

/// Inputs of the bound calculator. `g` is the Sobolev embedding constant
/// `G(s*, N)`; `m` and `poincare` are only used for `mu*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub delta0: f64,
    pub eta: f64,
    #[serde(rename = "G", default = "unit")]
    pub g: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub u0_sup: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default = "unit")]
    pub poincare: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha_star: f64,
    pub s_star: ExtReal,
    #[serde(rename = "A")]
    pub a: f64,
    pub exponent: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub mu_star: Option<f64>,
    pub mu_star_note: String,
    pub constants_note: String,
    pub inputs: BoundInputs,
}

fn positive(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::InvalidInput {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn validate(inp: &BoundInputs) -> Result<f64, BoundsError> {
    if inp.n == 0 {
        return Err(BoundsError::InvalidInput {
            name: "N",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    positive("beta", inp.beta)?;
    positive("kappa", inp.kappa)?;
    positive("delta0", inp.delta0)?;
    positive("eta", inp.eta)?;
    positive("G", inp.g)?;
    positive("poincare", inp.poincare)?;
    if !(inp.k > 1.0 && inp.k.is_finite()) {
        return Err(BoundsError::InvalidInput {
            name: "K",
            value: inp.k,
            reason: "must be > 1",
        });
    }
    if !(inp.u0_sup >= 0.0 && inp.u0_sup.is_finite()) {
        return Err(BoundsError::InvalidInput {
            name: "u0_sup",
            value: inp.u0_sup,
            reason: "must be >= 0",
        });
    }
    let alpha_star = critical_alpha(inp.n, inp.beta);
    if !(inp.alpha >= 1.0 && inp.alpha < alpha_star) {
        return Err(BoundsError::OutsideRegime {
            alpha: inp.alpha,
            alpha_star,
        });
    }
    Ok(alpha_star)
}

/// `(A, exponent)` for a Sobolev exponent `s`; `s = inf` uses the analytic limits.
fn constants(inp: &BoundInputs, s: ExtReal) -> (f64, f64) {
    let n = inp.n as f64;
    let base = 4.0 * std::f64::consts::SQRT_2 * (inp.delta0 * inp.g).max(1.0);
    let denom = inp.delta0.powf(n) * inp.eta;
    match s {
        ExtReal::PosInf => (4.0 * base / denom, 1.0 / (inp.beta + 1.0 - inp.alpha)),
        ExtReal::Finite(s) => (
            4.0 * base.powf(s / (s - 1.0)) / denom,
            (s - 2.0) / (s * (inp.beta + 1.0 - inp.alpha) - 2.0 * inp.beta),
        ),
    }
}

fn mu_star(inp: &BoundInputs, s: ExtReal) -> Option<f64> {
    let m = inp.m?;
    let n = inp.n as f64;
    let inv_s = match s {
        ExtReal::PosInf => 0.0,
        ExtReal::Finite(s) => 1.0 / s,
    };
    let delta = 0.5 * inp.delta0;
    let w = 2.0 * delta;
    let sob = std::f64::consts::SQRT_2 * w.powf(n * (inv_s - 0.5)).max(w.powf(1.0 - 0.5 * n + n * inv_s) * inp.g);
    let poincare = inp.poincare * delta;
    let c1 = 2.0 * sob * (1.0 + 2.0 * poincare);
    let h = match s {
        ExtReal::PosInf => 2.0 * (inp.alpha - 1.0),
        ExtReal::Finite(s) => 2.0 * (s - 1.0) * (inp.alpha - 1.0) / (s - 2.0),
    };
    let q = 2f64.powi(m as i32 - 1) + h;
    Some(1.0 / (2.0 * c1 * c1 * q * q))
}

fn report(inp: &BoundInputs, s: ExtReal, alpha_star: f64) -> BoundReport {
    let (a, exponent) = constants(inp, s);
    let m = inp.k * 1f64.max((a / inp.kappa).powf(exponent)).max(inp.u0_sup);
    let mu = mu_star(inp, s);
    BoundReport {
        alpha_star,
        s_star: s,
        a,
        exponent,
        m,
        mu_star: mu,
        mu_star_note: if mu.is_some() {
            "mu* evaluated from the supplied iteration anchor m; the bound holds for mu <= mu*".into()
        } else {
            "mu* is an existence threshold that depends on the iteration anchor m; supply m to evaluate it".into()
        },
        constants_note: format!(
            "G = {} and Poincare constant {} are user-supplied placeholders; M grows with G",
            inp.g, inp.poincare
        ),
        inputs: *inp,
    }
}

/// Evaluate `alpha*`, `s*`, `A`, the exponent and `M`.
pub fn bound_m(inp: &BoundInputs) -> Result<BoundReport, BoundsError> {
    let alpha_star = validate(inp)?;
    Ok(report(inp, critical_s(inp.n), alpha_star))
}

/// The general finite-`s` formulas at an arbitrary exponent `s > 2`; for `N <= 2`
/// large `s` approaches [`bound_m`].
pub fn bound_m_at_s(inp: &BoundInputs, s: f64) -> Result<BoundReport, BoundsError> {
    let alpha_star = validate(inp)?;
    if !(s > 2.0) {
        return Err(BoundsError::InvalidInput {
            name: "s",
            value: s,
            reason: "must be > 2",
        });
    }
    let r = report(inp, ExtReal::Finite(s), alpha_star);
    if !(r.exponent > 0.0) {
        return Err(BoundsError::OutsideRegime {
            alpha: inp.alpha,
            alpha_star: 1.0 + inp.beta - 2.0 * inp.beta / s,
        });
    }
    Ok(r)
}

/// `y_k' + c_k y_k <= c_k A_k max{1, sup y_{k-1}^2}` with `A_k = a_bar 2^{D k}`
/// and `y_k(0) <= K^{2^k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationProblem {
    /// `c[k]` for `k = 0, 1, ...`; levels beyond the end reuse the last entry.
    pub c: Vec<f64>,
    pub a_bar: f64,
    pub d_exp: f64,
    pub k_init: f64,
    pub m: u32,
    /// `sup_t y_{m-1}(t)`.
    pub y_sup: f64,
}

impl IterationProblem {
    fn validate(&self) -> Result<(), BoundsError> {
        positive("a_bar", self.a_bar)?;
        positive("K", self.k_init)?;
        if !(self.d_exp >= 0.0 && self.d_exp.is_finite()) {
            return Err(BoundsError::InvalidInput {
                name: "D",
                value: self.d_exp,
                reason: "must be >= 0",
            });
        }
        if self.m == 0 {
            return Err(BoundsError::InvalidInput {
                name: "m",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        if !(self.y_sup >= 0.0 && self.y_sup.is_finite()) {
            return Err(BoundsError::InvalidInput {
                name: "y_sup",
                value: self.y_sup,
                reason: "must be >= 0",
            });
        }
        if self.c.is_empty() || self.c.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(BoundsError::InvalidInput {
                name: "c",
                value: f64::NAN,
                reason: "needs at least one entry, all positive",
            });
        }
        Ok(())
    }

    pub fn c_k(&self, k: u32) -> f64 {
        self.c[(k as usize).min(self.c.len() - 1)]
    }

    pub fn a_k(&self, k: u32) -> f64 {
        self.a_bar * 2f64.powf(self.d_exp * k as f64)
    }
}

/// `log2` of the closed-form lemma bound for `y_k`,
/// `(2a)^(2^(n+1) - 1) 2^(D (2^(n+1) (m+1) - k - 2)) max{y_sup^(2^(n+1)), K^(2^k), 1}`
/// with `n = k - m`.
///
/// The middle exponent is `sum_{i=0}^{n} (k-i) 2^i` in closed form.
pub fn iteration_bound_log2(problem: &IterationProblem, k: u32) -> Result<f64, BoundsError> {
    problem.validate()?;
    if k < problem.m {
        return Err(BoundsError::InvalidInput {
            name: "k",
            value: k as f64,
            reason: "must be >= m",
        });
    }
    let n = (k - problem.m) as i32;
    let p = 2f64.powi(n + 1);
    let kk = k as f64;
    let growth = (p - 1.0) * (2.0 * problem.a_bar).log2();
    let shift = problem.d_exp * (p * (problem.m as f64 + 1.0) - kk - 2.0);
    let anchor = (p * problem.y_sup.log2())
        .max(2f64.powi(k as i32) * problem.k_init.log2())
        .max(0.0);
    Ok(growth + shift + anchor)
}

/// The lemma bound itself; errors with its `log2` when it exceeds `f64`.
pub fn iteration_bound(problem: &IterationProblem, k: u32) -> Result<f64, BoundsError> {
    let log2 = iteration_bound_log2(problem, k)?;
    if log2 >= 1024.0 {
        return Err(BoundsError::Overflow { log2 });
    }
    Ok(log2.exp2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// Largest `y_k(t) / bound_k` over all levels and samples.
    pub worst_ratio: f64,
    pub worst_level: u32,
    pub worst_time: f64,
    pub samples: usize,
}

/// Integrate the chained equations `y_k' + c_k y_k = c_k A_k max{1, S_{k-1}^2}`
/// (the extremal case of the hypothesis) with RK4 from `y_k(0) = K^{2^k}` and
/// `y_{m-1} = y_sup`, and check `y_k(t) <= bound_k` at every sample.
///
/// `S_k` is the supremum of `y_k` over `t >= 0`: the larger of its start value
/// and its equilibrium, since each level relaxes monotonically.
pub fn verify_lemma(problem: &IterationProblem, k_max: u32, t_max: f64) -> Result<LemmaReport, BoundsError> {
    problem.validate()?;
    for k in problem.m..=k_max {
        if problem.a_k(k) < 1.0 {
            return Err(BoundsError::InvalidInput {
                name: "a_bar",
                value: problem.a_bar,
                reason: "A_k = a_bar 2^(D k) must be >= 1 for all k >= m",
            });
        }
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(BoundsError::InvalidInput {
            name: "t_max",
            value: t_max,
            reason: "must be positive",
        });
    }
    let mut report = LemmaReport {
        worst_ratio: 0.0,
        worst_level: problem.m,
        worst_time: 0.0,
        samples: 0,
    };
    let mut prev_sup = problem.y_sup;
    for k in problem.m..=k_max {
        let c = problem.c_k(k);
        let forcing = problem.a_k(k) * prev_sup.powi(2).max(1.0);
        let y0 = problem.k_init.powf(2f64.powi(k as i32));
        let bound_log2 = iteration_bound_log2(problem, k)?;
        let steps = ((t_max * c / 0.05).ceil() as usize).max(200);
        let h = t_max / steps as f64;
        let f = |y: f64| c * (forcing - y);
        let mut y = y0;
        let mut sampled_max = y0;
        for i in 0..=steps {
            let t = i as f64 * h;
            if y > 0.0 {
                let ratio = (y.log2() - bound_log2).exp2();
                report.samples += 1;
                if ratio > report.worst_ratio {
                    report.worst_ratio = ratio;
                    report.worst_level = k;
                    report.worst_time = t;
                }
                if ratio > 1.0 {
                    return Err(BoundsError::Violation { k, t, ratio });
                }
            }
            sampled_max = sampled_max.max(y);
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        prev_sup = sampled_max.max(forcing);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> BoundInputs {
        BoundInputs {
            n: 1,
            alpha: 1.0,
            beta: 1.0,
            kappa: 1.0,
            delta0: 0.5,
            eta: 0.49,
            g: 1.0,
            k: 2.0,
            u0_sup: 1.0,
            m: None,
            poincare: 1.0,
        }
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_alpha(1, 1.0), 2.0);
        assert_eq!(critical_alpha(2, 0.1), 1.1);
        assert!((critical_alpha(3, 1.0) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(critical_s(3), ExtReal::Finite(6.0));
        assert_eq!(critical_s(2), ExtReal::PosInf);
    }

    #[test]
    fn one_dimensional_example() {
        let r = bound_m(&example()).unwrap();
        let a = 16.0 * std::f64::consts::SQRT_2 / (0.5 * 0.49);
        assert!((r.a - a).abs() < 1e-12);
        assert!((r.a - 92.3568).abs() < 1e-3);
        // 1/(beta + 1 - alpha) = 1 here, so M = K A
        assert_eq!(r.exponent, 1.0);
        assert!((r.m - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn square_root_exponent() {
        let r = bound_m(&BoundInputs { beta: 2.0, ..example() }).unwrap();
        assert_eq!(r.exponent, 0.5);
        assert!((r.m - 19.2205).abs() < 1e-3);
    }

    #[test]
    fn collapses_to_k() {
        let inp = BoundInputs {
            kappa: 1e4,
            u0_sup: 0.5,
            ..example()
        };
        assert_eq!(bound_m(&inp).unwrap().m, 2.0);
    }

    #[test]
    fn rejects_outside_regime() {
        let inp = BoundInputs { alpha: 2.0, ..example() };
        assert!(matches!(bound_m(&inp), Err(BoundsError::OutsideRegime { .. })));
        let inp = BoundInputs { k: 1.0, ..example() };
        assert!(bound_m(&inp).is_err());
    }

    #[test]
    fn s_star_serialization() {
        let r = bound_m(&example()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["s_star"], "+inf");
        let back: BoundReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.s_star, ExtReal::PosInf);
        let r3 = bound_m(&BoundInputs {
            n: 3,
            alpha: 1.2,
            ..example()
        })
        .unwrap();
        assert_eq!(serde_json::to_value(&r3).unwrap()["s_star"], 6.0);
    }

    #[test]
    fn mu_star_only_with_anchor() {
        assert!(bound_m(&example()).unwrap().mu_star.is_none());
        let r = bound_m(&BoundInputs { m: Some(1), ..example() }).unwrap();
        // delta = 1/4: S = sqrt2 * max{(1/2)^(-1/2), (1/2)^(1/2)} = 2, P = 1/4, C1 = 6, h = 0
        assert!((r.mu_star.unwrap() - 1.0 / 72.0).abs() < 1e-15);
    }

    fn problem(m: u32) -> IterationProblem {
        IterationProblem {
            c: (0..16).map(|k| k as f64 + 1.0).collect(),
            a_bar: 1.0,
            d_exp: 1.0,
            k_init: 1.0,
            m,
            y_sup: 1.0,
        }
    }

    #[test]
    fn closed_form_matches_sum() {
        for m in 1..5u32 {
            for k in m..m + 6 {
                let p = IterationProblem {
                    a_bar: 0.5,
                    k_init: 0.5,
                    y_sup: 0.0,
                    ..problem(m)
                };
                let sum: f64 = (0..=k - m).map(|i| (k - i) as f64 * 2f64.powi(i as i32)).sum();
                assert_eq!(iteration_bound_log2(&p, k).unwrap(), sum);
            }
        }
    }

    #[test]
    fn trivial_collapse() {
        let p = IterationProblem {
            a_bar: 0.5,
            d_exp: 0.0,
            k_init: 0.9,
            y_sup: 1.0,
            ..problem(2)
        };
        assert_eq!(iteration_bound(&p, 2).unwrap(), 1.0);
    }

    #[test]
    fn two_levels_by_hand() {
        let p = IterationProblem {
            a_bar: 1.5,
            d_exp: 0.7,
            k_init: 1.3,
            y_sup: 2.0,
            ..problem(2)
        };
        let (m, k) = (2u32, 3u32);
        // y_k <= 2A_k (2A_{k-1})^2 max{...}
        let direct = 2.0 * p.a_k(k) * (2.0 * p.a_k(k - 1)).powi(2);
        let anchor = 2f64.powi(4).max(1.3f64.powi(8)).max(1.0);
        let closed = (2.0 * 1.5f64).powi(3) * 2f64.powf(0.7 * (3 * m + 1) as f64);
        assert!((direct - closed).abs() < 1e-12 * closed);
        let b = iteration_bound(&p, k).unwrap();
        assert!((b - direct * anchor).abs() < 1e-12 * b);
    }

    #[test]
    fn overflow_reports_log2() {
        let p = IterationProblem {
            k_init: 4.0,
            ..problem(1)
        };
        match iteration_bound(&p, 12) {
            Err(BoundsError::Overflow { log2 }) => assert!(log2 > 1023.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verifier_examples() {
        let r = verify_lemma(&problem(1), 4, 10.0).unwrap();
        assert!(r.worst_ratio <= 1.0);
        let p = IterationProblem {
            y_sup: 0.0,
            k_init: 0.5,
            ..problem(1)
        };
        assert!(verify_lemma(&p, 5, 10.0).unwrap().worst_ratio <= 1.0);
        let p = IterationProblem { a_bar: 0.25, ..problem(1) };
        assert!(verify_lemma(&p, 3, 1.0).is_err());
    }
}
