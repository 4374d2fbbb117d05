//! Direction classification of conditional means and the preconditions
//! under which the effect measures are ordered.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::effects::{self, EffectSummary};
use crate::model::{
    rng_from_seed, BinaryConditional, CausalParams, OutcomeMeans, Params, ProxyParams,
};

/// Tolerance for exact-tie detection on hand-built inputs.
pub const CONSTANT_TOL: f64 = 1e-12;

/// Absolute tolerance for the equality preconditions of [`OrderingCase`].
pub const EQUALITY_TOL: f64 = 1e-9;

/// Direction of a conditional mean in a binary conditioning variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
    Constant,
    Neither,
}

impl Direction {
    pub fn is_monotone(self) -> bool {
        self != Direction::Neither
    }

    /// Row/column of the cross-classification table. A tie counts as
    /// nondecreasing since that relation is a weak inequality.
    pub fn table_index(self) -> usize {
        match self {
            Direction::NonDecreasing | Direction::Constant => 0,
            Direction::NonIncreasing => 1,
            Direction::Neither => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::NonDecreasing => "nondecreasing",
            Direction::NonIncreasing => "nonincreasing",
            Direction::Constant => "constant",
            Direction::Neither => "neither",
        }
    }

    /// Direction of a single difference `hi - lo`.
    pub fn of_gap(gap: f64, tol: f64) -> Direction {
        Self::of_gaps(gap, gap, tol)
    }

    /// Joint direction of two differences `hi - lo`, one per row.
    pub fn of_gaps(gap: f64, gap2: f64, tol: f64) -> Direction {
        let up = gap >= -tol && gap2 >= -tol;
        let down = gap <= tol && gap2 <= tol;
        match (up, down) {
            (true, true) => Direction::Constant,
            (true, false) => Direction::NonDecreasing,
            (false, true) => Direction::NonIncreasing,
            (false, false) => Direction::Neither,
        }
    }
}

/// Classifies two rows `(hi, lo)` and `(hi2, lo2)`.
pub fn direction_of(hi: f64, lo: f64, hi2: f64, lo2: f64, tol: f64) -> Direction {
    Direction::of_gaps(hi - lo, hi2 - lo2, tol)
}

/// Whether an outcome direction and a treatment direction agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Both nondecreasing or both nonincreasing.
    Same,
    /// One nondecreasing, the other nonincreasing.
    Opposite,
    /// The outcome direction is not monotone.
    Undetermined,
}

/// Alignment of `(E[Y|A,·], E[A|·])`; ties count as nondecreasing.
pub fn alignment(y: Direction, a: Direction) -> Alignment {
    if !y.is_monotone() || !a.is_monotone() {
        return Alignment::Undetermined;
    }
    if y.table_index() == a.table_index() {
        Alignment::Same
    } else {
        Alignment::Opposite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// `E[Y | A, D]` in `D`.
    pub y_in_d: Direction,
    /// `E[Y | A, C]` in `C`.
    pub y_in_c: Direction,
    /// `E[A | D]` in `D`.
    pub a_in_d: Direction,
    /// `E[A | C]` in `C`.
    pub a_in_c: Direction,
}

impl MonotonicityReport {
    pub fn alignment_in_d(&self) -> Alignment {
        alignment(self.y_in_d, self.a_in_d)
    }

    pub fn alignment_in_c(&self) -> Alignment {
        alignment(self.y_in_c, self.a_in_c)
    }
}

pub fn report_with_tol<P: CausalParams + ?Sized>(params: &P, tol: f64) -> MonotonicityReport {
    let pa = params.p_a_given_c();
    MonotonicityReport {
        y_in_d: Direction::of_gaps(
            effects::y_gap_in_d(params, true),
            effects::y_gap_in_d(params, false),
            tol,
        ),
        y_in_c: Direction::of_gaps(params.mu().c_gap(true), params.mu().c_gap(false), tol),
        a_in_d: Direction::of_gap(effects::a_gap_in_d(params), tol),
        a_in_c: Direction::of_gap(pa.given - pa.given_not, tol),
    }
}

/// Directions with zero tolerance: only exact ties are `Constant`.
pub fn report_proxy(params: &ProxyParams) -> MonotonicityReport {
    report_with_tol(params, 0.0)
}

/// Directions computed in the parameters' own factorization.
pub fn report(params: &Params) -> MonotonicityReport {
    match params {
        Params::Proxy(p) => report_with_tol(p, 0.0),
        Params::Driver(p) => report_with_tol(p, 0.0),
    }
}

/// Whether `rd_obs` lies in the closed interval spanned by `rd_true` and
/// `rd_crude`, widened by `tol` on each side.
pub fn in_between(summary: &EffectSummary, tol: f64) -> bool {
    let lo = summary.rd_true.min(summary.rd_crude);
    let hi = summary.rd_true.max(summary.rd_crude);
    lo - tol <= summary.rd_obs && summary.rd_obs <= hi + tol
}

/// Side of the interventional mean on which `S` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `S >= E[Y_do]`.
    Upper,
    /// `S <= E[Y_do]`.
    Lower,
}

impl Bound {
    /// Whether `s - e_y_do` is consistent with this verdict within `tol`.
    pub fn consistent_with(self, s: f64, e_y_do: f64, tol: f64) -> bool {
        match self {
            Bound::Upper => s - e_y_do >= -tol,
            Bound::Lower => s - e_y_do <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsVerdict {
    /// `S_a` relative to `E[Y_a]`.
    pub treated: Bound,
    /// `S_not_a` relative to `E[Y_not_a]`.
    pub untreated: Bound,
}

/// Decides, for each arm, whether `S` bounds `E[Y_do]` from above or below.
///
/// The arm's row `E[Y | a, D]` and `E[A | D]` moving together makes `S_a` an
/// upper bound; for the untreated arm the roles swap. A flat row or a flat
/// `E[A | D]` makes the two equal and is reported as `Upper`.
pub fn bounds_verdict(params: &Params) -> BoundsVerdict {
    match params {
        Params::Proxy(p) => bounds_verdict_graph(p),
        Params::Driver(p) => bounds_verdict_graph(p),
    }
}

pub fn bounds_verdict_proxy(params: &ProxyParams) -> BoundsVerdict {
    bounds_verdict_graph(params)
}

pub fn bounds_verdict_graph<P: CausalParams + ?Sized>(params: &P) -> BoundsVerdict {
    let a_gap = effects::a_gap_in_d(params);
    let arm = |a: bool| {
        let y_gap = effects::y_gap_in_d(params, a);
        if y_gap == 0.0 || a_gap == 0.0 {
            return Bound::Upper;
        }
        let aligned = (y_gap > 0.0) == (a_gap > 0.0);
        if aligned == a {
            Bound::Upper
        } else {
            Bound::Lower
        }
    };
    BoundsVerdict {
        treated: arm(true),
        untreated: arm(false),
    }
}

/// Nonmonotone configurations of the proxy graph in which the three risk
/// differences are still ordered.
///
/// All four fix `p(c) = 0.5` and a symmetric proxy
/// `p(d|c) = p(not d|not c) >= 0.5`, and constrain the outcome gaps
/// `g1 = E[Y|a,c] - E[Y|a,not c]`, `g0 = E[Y|not a,not c] - E[Y|not a,c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingCase {
    /// `p(a|c) = p(not a|not c) = p(d|c)`, `g1 >= g0 >= 0`;
    /// concludes `rd_crude >= rd_obs >= rd_true`.
    Chain,
    /// Same treatment/proxy symmetry, `g1 <= g0 <= 0`;
    /// concludes `rd_crude <= rd_obs <= rd_true`.
    ReversedChain,
    /// `p(not a|not c) >= p(a|c) >= 0.5`, `g1 >= g0 >= 0`;
    /// concludes `rd_crude >= rd_true` and `rd_obs >= rd_true`.
    Dominance,
    /// As `Dominance` with `g1 <= g0 <= 0`; both inequalities reversed.
    ReversedDominance,
}

impl OrderingCase {
    pub const ALL: [OrderingCase; 4] = [
        OrderingCase::Chain,
        OrderingCase::ReversedChain,
        OrderingCase::Dominance,
        OrderingCase::ReversedDominance,
    ];

    fn reversed(self) -> bool {
        matches!(
            self,
            OrderingCase::ReversedChain | OrderingCase::ReversedDominance
        )
    }

    fn symmetric_treatment(self) -> bool {
        matches!(self, OrderingCase::Chain | OrderingCase::ReversedChain)
    }

    /// Whether `params` satisfy the case's preconditions.
    pub fn preconditions_hold(self, params: &ProxyParams) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= EQUALITY_TOL;
        let slack = CONSTANT_TOL;
        let q = params.p_d_given_c.given;
        let proxy_ok = close(params.p_c, 0.5)
            && close(q, 1.0 - params.p_d_given_c.given_not)
            && q >= 0.5 - slack;
        let a_given = params.p_a_given_c.given;
        let not_a_given_not = 1.0 - params.p_a_given_c.given_not;
        let treatment_ok = if self.symmetric_treatment() {
            close(a_given, not_a_given_not) && close(a_given, q)
        } else {
            not_a_given_not >= a_given - slack && a_given >= 0.5 - slack
        };
        let g1 = params.mu.c_gap(true);
        let g0 = -params.mu.c_gap(false);
        let gaps_ok = if self.reversed() {
            g1 <= g0 + slack && g0 <= slack
        } else {
            g1 >= g0 - slack && g0 >= -slack
        };
        proxy_ok && treatment_ok && gaps_ok
    }

    /// Whether the case's conclusion holds for `summary` within `tol`.
    pub fn conclusion_holds(self, summary: &EffectSummary, tol: f64) -> bool {
        let (crude, obs, truth) = (summary.rd_crude, summary.rd_obs, summary.rd_true);
        match self {
            OrderingCase::Chain => crude >= obs - tol && obs >= truth - tol,
            OrderingCase::ReversedChain => crude <= obs + tol && obs <= truth + tol,
            OrderingCase::Dominance => crude >= truth - tol && obs >= truth - tol,
            OrderingCase::ReversedDominance => crude <= truth + tol && obs <= truth + tol,
        }
    }

    /// Draws parameters satisfying the preconditions. The shared proxy
    /// accuracy `q` is uniform on `(0.5, 1)`; the outcome means are uniform
    /// and resampled until the gap inequalities hold.
    pub fn sample_with<R: Rng + ?Sized>(self, rng: &mut R) -> ProxyParams {
        let q = draw_half_open(rng);
        let p_a_given_c = if self.symmetric_treatment() {
            BinaryConditional::new(q, 1.0 - q)
        } else {
            // p(a|c) <= p(not a|not c), both uniform on [0.5, 1) before ordering.
            loop {
                let a_given = 0.5 + 0.5 * rng.gen::<f64>();
                let not_a_given_not = 0.5 + 0.5 * rng.gen::<f64>();
                if not_a_given_not >= a_given {
                    break BinaryConditional::new(a_given, 1.0 - not_a_given_not);
                }
            }
        };
        let mu = loop {
            let mu = OutcomeMeans([
                [rng.gen::<f64>(), rng.gen::<f64>()],
                [rng.gen::<f64>(), rng.gen::<f64>()],
            ]);
            let g1 = mu.c_gap(true);
            let g0 = -mu.c_gap(false);
            let ok = if self.reversed() {
                g1 <= g0 && g0 <= 0.0
            } else {
                g1 >= g0 && g0 >= 0.0
            };
            if ok {
                break mu;
            }
        };
        ProxyParams {
            p_c: 0.5,
            p_d_given_c: BinaryConditional::new(q, 1.0 - q),
            p_a_given_c,
            mu,
        }
    }

    pub fn sample(self, seed: u64) -> ProxyParams {
        self.sample_with(&mut rng_from_seed(seed))
    }
}

/// Uniform on the open interval `(0.5, 1)`; `0.5` itself would make the
/// proxy uninformative.
fn draw_half_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let q = 0.5 + 0.5 * rng.gen::<f64>();
        if q > 0.5 && q < 1.0 {
            return q;
        }
    }
}

/// Constrained sampler for one ordering case, a pure function of `seed`.
pub fn sample_constrained(seed: u64, case: OrderingCase) -> ProxyParams {
    case.sample(seed)
}
