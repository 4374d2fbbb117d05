//! Closed-form effect measures for either graph.
//!
//! Every quantity is computed from the parameters directly; nothing here
//! touches simulated data. The functions are generic over
//! [`CausalParams`], so proxy and driver parameterizations each use the
//! conditionals of their own factorization.

use serde::{Deserialize, Serialize};

use crate::model::{CausalParams, Params, ProxyParams};

/// A value at the named treatment level and at its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmPair {
    pub treated: f64,
    pub untreated: f64,
}

impl ArmPair {
    pub fn at(&self, a: bool) -> f64 {
        if a {
            self.treated
        } else {
            self.untreated
        }
    }

    pub fn difference(&self) -> f64 {
        self.treated - self.untreated
    }
}

/// All effect measures for one parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSummary {
    /// Difference of interventional means, standardized over `C`.
    pub rd_true: f64,
    /// Standardized over the observed `D`.
    pub rd_obs: f64,
    /// `E[Y|a] - E[Y|not a]`.
    pub rd_crude: f64,
    /// `(E[Y_a], E[Y_not_a])`.
    pub e_y_do: ArmPair,
    /// `(S_a, S_not_a)`, the `D`-standardized approximations of `e_y_do`.
    pub s: ArmPair,
}

/// Observable conditionals implied by a parameterization, indexed `[a][d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConditionals {
    pub p_c_given_ad: [[f64; 2]; 2],
    pub e_y_given_ad: [[f64; 2]; 2],
    pub p_d: f64,
    /// `P(D = d | A)` indexed by `a`.
    pub p_d_given_a: [f64; 2],
}

/// `P(c | A = a, D = d)` by direct Bayes, using `A ⊥ D | C`.
pub fn posterior_c<P: CausalParams + ?Sized>(params: &P, a: bool, d: bool) -> f64 {
    params.posterior_c(a, d)
}

/// Log posterior odds of `c` given `(a, d)` in the proxy factorization.
pub fn log_odds_c(params: &ProxyParams, a: bool, d: bool) -> f64 {
    params.p_a_given_c.prob(a, true).ln() + params.p_d_given_c.prob(d, true).ln() + params.p_c.ln()
        - params.p_a_given_c.prob(a, false).ln()
        - params.p_d_given_c.prob(d, false).ln()
        - (1.0 - params.p_c).ln()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Same value as [`posterior_c`], through the logistic sigmoid of the log odds.
pub fn posterior_c_sigmoid(params: &ProxyParams, a: bool, d: bool) -> f64 {
    sigmoid(log_odds_c(params, a, d))
}

/// `E[Y | a, d] = sum_c E[Y | a, c] P(c | a, d)`, using `Y ⊥ D | A, C`.
pub fn cond_mean_y_ad<P: CausalParams + ?Sized>(params: &P, a: bool, d: bool) -> f64 {
    let mu = params.mu();
    mu.get(a, false) + mu.c_gap(a) * params.posterior_c(a, d)
}

/// `E[Y | a, d] - E[Y | a, not d]`, evaluated in the factored form
/// `(E[Y|a,c] - E[Y|a,not c]) (P(c|a,d) - P(c|a,not d))` so that a
/// constant row yields an exact zero.
pub fn y_gap_in_d<P: CausalParams + ?Sized>(params: &P, a: bool) -> f64 {
    params.mu().c_gap(a) * (params.posterior_c(a, true) - params.posterior_c(a, false))
}

/// `P(c | a)`.
pub fn p_c_given_a<P: CausalParams + ?Sized>(params: &P, a: bool) -> f64 {
    let p_c = params.p_c();
    let on = params.p_a_given_c().prob(a, true) * p_c;
    let off = params.p_a_given_c().prob(a, false) * (1.0 - p_c);
    on / (on + off)
}

/// `P(D = d)`.
pub fn p_d<P: CausalParams + ?Sized>(params: &P) -> f64 {
    params.p_d()
}

/// `P(a)`.
pub fn p_a<P: CausalParams + ?Sized>(params: &P) -> f64 {
    let p_c = params.p_c();
    params.p_a_given_c().given * p_c + params.p_a_given_c().given_not * (1.0 - p_c)
}

/// `E[A | d] = P(a | d)`.
pub fn e_a_given_d<P: CausalParams + ?Sized>(params: &P, d: bool) -> f64 {
    let w = params.p_c_given_d(d);
    params.p_a_given_c().given * w + params.p_a_given_c().given_not * (1.0 - w)
}

/// `P(D = d | a)`.
pub fn p_d_given_a<P: CausalParams + ?Sized>(params: &P, a: bool) -> f64 {
    let p_d = params.p_d();
    let level = |d: bool| {
        let e = e_a_given_d(params, d);
        let pa = if a { e } else { 1.0 - e };
        pa * if d { p_d } else { 1.0 - p_d }
    };
    let on = level(true);
    on / (on + level(false))
}

/// `E[A | d] - E[A | not d]` in the factored form
/// `(P(a|c) - P(a|not c)) (P(c|d) - P(c|not d))`.
pub fn a_gap_in_d<P: CausalParams + ?Sized>(params: &P) -> f64 {
    let pa = params.p_a_given_c();
    (pa.given - pa.given_not) * (params.p_c_given_d(true) - params.p_c_given_d(false))
}

/// `E[Y | a] = sum_c E[Y | a, c] P(c | a)`.
pub fn cond_mean_y_a<P: CausalParams + ?Sized>(params: &P, a: bool) -> f64 {
    let mu = params.mu();
    mu.get(a, false) + mu.c_gap(a) * p_c_given_a(params, a)
}

/// Interventional means `(E[Y_a], E[Y_not_a])`, standardized over `C`.
pub fn e_y_do<P: CausalParams + ?Sized>(params: &P) -> ArmPair {
    let (mu, p_c) = (params.mu(), params.p_c());
    let arm = |a| mu.get(a, true) * p_c + mu.get(a, false) * (1.0 - p_c);
    ArmPair {
        treated: arm(true),
        untreated: arm(false),
    }
}

/// `(S_a, S_not_a)`: conditional means standardized over `D`.
pub fn s_values<P: CausalParams + ?Sized>(params: &P) -> ArmPair {
    let pd = params.p_d();
    let arm =
        |a| cond_mean_y_ad(params, a, true) * pd + cond_mean_y_ad(params, a, false) * (1.0 - pd);
    ArmPair {
        treated: arm(true),
        untreated: arm(false),
    }
}

pub fn rd_true<P: CausalParams + ?Sized>(params: &P) -> f64 {
    e_y_do(params).difference()
}

pub fn rd_obs<P: CausalParams + ?Sized>(params: &P) -> f64 {
    s_values(params).difference()
}

pub fn rd_crude<P: CausalParams + ?Sized>(params: &P) -> f64 {
    cond_mean_y_a(params, true) - cond_mean_y_a(params, false)
}

pub fn derived_conditionals<P: CausalParams + ?Sized>(params: &P) -> DerivedConditionals {
    let mut p_c_given_ad = [[0.0; 2]; 2];
    let mut e_y_given_ad = [[0.0; 2]; 2];
    for a in [false, true] {
        for d in [false, true] {
            p_c_given_ad[a as usize][d as usize] = params.posterior_c(a, d);
            e_y_given_ad[a as usize][d as usize] = cond_mean_y_ad(params, a, d);
        }
    }
    DerivedConditionals {
        p_c_given_ad,
        e_y_given_ad,
        p_d: params.p_d(),
        p_d_given_a: [p_d_given_a(params, false), p_d_given_a(params, true)],
    }
}

/// Effect summary computed in the parameters' own factorization.
pub fn summarize_graph<P: CausalParams + ?Sized>(params: &P) -> EffectSummary {
    let e_y_do = e_y_do(params);
    let s = s_values(params);
    EffectSummary {
        rd_true: e_y_do.difference(),
        rd_obs: s.difference(),
        rd_crude: rd_crude(params),
        e_y_do,
        s,
    }
}

pub fn summarize_proxy(params: &ProxyParams) -> EffectSummary {
    summarize_graph(params)
}

/// Effect summary for either graph. Driver parameters are evaluated with
/// driver-graph conditionals, not through
/// [`DriverParams::to_proxy`](crate::model::DriverParams::to_proxy).
pub fn summarize(params: &Params) -> EffectSummary {
    match params {
        Params::Proxy(p) => summarize_graph(p),
        Params::Driver(p) => summarize_graph(p),
    }
}
