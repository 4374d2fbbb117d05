//! Parameterizations of the two causal graphs over binary treatment `A`,
//! binary unobserved confounder `C`, binary observed `D` and outcome `Y`.
//!
//! * Proxy graph: `C -> D`, `C -> A`, `C -> Y`, `A -> Y`, factorized as
//!   `p(C) p(D|C) p(A|C) p(Y|A,C)`.
//! * Driver graph: `D -> C`, `C -> A`, `C -> Y`, `A -> Y`, factorized as
//!   `p(D) p(C|D) p(A|C) p(Y|A,C)`.
//!
//! Levels are `bool`: `true` is the named level (`a`, `c`, `d`) and `false`
//! its complement. `Y` enters only through its conditional means
//! `E[Y | A, C]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `P(child = 1 | parent)` at both parent levels.
///
/// Serialized as `[P(child | parent), P(child | not parent)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct BinaryConditional {
    /// Probability when the parent is at its named level.
    pub given: f64,
    /// Probability when the parent is at its complement level.
    pub given_not: f64,
}

impl BinaryConditional {
    pub const fn new(given: f64, given_not: f64) -> Self {
        Self { given, given_not }
    }

    /// `P(child = 1 | parent)`.
    #[inline]
    pub fn at(&self, parent: bool) -> f64 {
        if parent {
            self.given
        } else {
            self.given_not
        }
    }

    /// `P(child = child_level | parent)`.
    #[inline]
    pub fn prob(&self, child: bool, parent: bool) -> f64 {
        let p = self.at(parent);
        if child {
            p
        } else {
            1.0 - p
        }
    }
}

impl From<[f64; 2]> for BinaryConditional {
    fn from([given, given_not]: [f64; 2]) -> Self {
        Self { given, given_not }
    }
}

impl From<BinaryConditional> for [f64; 2] {
    fn from(c: BinaryConditional) -> Self {
        [c.given, c.given_not]
    }
}

/// Conditional outcome means `E[Y | A, C]`, indexed `[a][c]` with index 1
/// for the named level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeMeans(pub [[f64; 2]; 2]);

impl OutcomeMeans {
    #[inline]
    pub fn get(&self, a: bool, c: bool) -> f64 {
        self.0[a as usize][c as usize]
    }

    /// `E[Y | a, c] - E[Y | a, not c]` for one treatment arm.
    #[inline]
    pub fn c_gap(&self, a: bool) -> f64 {
        let row = self.0[a as usize];
        row[1] - row[0]
    }

    fn validate(&self) -> Result<()> {
        for (a, row) in self.0.iter().enumerate() {
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::OutOfRange {
                        field: MU_FIELDS[a][c],
                        value,
                    });
                }
            }
        }
        Ok(())
    }

    /// Fails unless every entry is usable as a Bernoulli mean.
    pub fn check_bernoulli(&self) -> Result<()> {
        for (a, row) in self.0.iter().enumerate() {
            for (c, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::MuOutOfRange { a, c, value });
                }
            }
        }
        Ok(())
    }
}

const MU_FIELDS: [[&str; 2]; 2] = [["mu[0][0]", "mu[0][1]"], ["mu[1][0]", "mu[1][1]"]];

/// Parameters of the proxy graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyParams {
    pub p_c: f64,
    pub p_d_given_c: BinaryConditional,
    pub p_a_given_c: BinaryConditional,
    pub mu: OutcomeMeans,
}

/// Parameters of the driver graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverParams {
    pub p_d: f64,
    pub p_c_given_d: BinaryConditional,
    pub p_a_given_c: BinaryConditional,
    pub mu: OutcomeMeans,
}

/// Either parameterization, as read from a parameter document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "lowercase")]
pub enum Params {
    Proxy(ProxyParams),
    Driver(DriverParams),
}

fn check_open(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { field, value })
    }
}

fn check_informative(field: &'static str, cond: &BinaryConditional) -> Result<()> {
    if cond.given == cond.given_not {
        Err(Error::DegenerateProxy {
            field,
            value: cond.given,
        })
    } else {
        Ok(())
    }
}

impl ProxyParams {
    pub fn validate(&self) -> Result<()> {
        check_open("p_c", self.p_c)?;
        check_open("p_d_given_c[0]", self.p_d_given_c.given)?;
        check_open("p_d_given_c[1]", self.p_d_given_c.given_not)?;
        check_open("p_a_given_c[0]", self.p_a_given_c.given)?;
        check_open("p_a_given_c[1]", self.p_a_given_c.given_not)?;
        self.mu.validate()?;
        check_informative("p_d_given_c", &self.p_d_given_c)
    }

    /// `P(C = c_level)`.
    #[inline]
    pub fn prob_c(&self, c: bool) -> f64 {
        if c {
            self.p_c
        } else {
            1.0 - self.p_c
        }
    }

    pub fn joint_table(&self) -> JointTable {
        let mut p = [[[0.0; 2]; 2]; 2];
        for (a, c, d) in cells() {
            p[a as usize][c as usize][d as usize] =
                self.prob_c(c) * self.p_d_given_c.prob(d, c) * self.p_a_given_c.prob(a, c);
        }
        JointTable { p, mu: self.mu }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<()> {
        check_open("p_d", self.p_d)?;
        check_open("p_c_given_d[0]", self.p_c_given_d.given)?;
        check_open("p_c_given_d[1]", self.p_c_given_d.given_not)?;
        check_open("p_a_given_c[0]", self.p_a_given_c.given)?;
        check_open("p_a_given_c[1]", self.p_a_given_c.given_not)?;
        self.mu.validate()?;
        check_informative("p_c_given_d", &self.p_c_given_d)
    }

    #[inline]
    pub fn prob_d(&self, d: bool) -> f64 {
        if d {
            self.p_d
        } else {
            1.0 - self.p_d
        }
    }

    /// Re-expresses the joint distribution in proxy-graph form by Bayes
    /// inversion of `p(C|D) p(D)`; `p(A|C)` and `E[Y|A,C]` carry over.
    pub fn to_proxy(&self) -> ProxyParams {
        let pcd = self.p_c_given_d;
        let p_c = pcd.given * self.p_d + pcd.given_not * (1.0 - self.p_d);
        let p_d_given_c = BinaryConditional {
            given: pcd.given * self.p_d / p_c,
            given_not: (1.0 - pcd.given) * self.p_d / (1.0 - p_c),
        };
        ProxyParams {
            p_c,
            p_d_given_c,
            p_a_given_c: self.p_a_given_c,
            mu: self.mu,
        }
    }

    pub fn joint_table(&self) -> JointTable {
        let mut p = [[[0.0; 2]; 2]; 2];
        for (a, c, d) in cells() {
            p[a as usize][c as usize][d as usize] =
                self.prob_d(d) * self.p_c_given_d.prob(c, d) * self.p_a_given_c.prob(a, c);
        }
        JointTable { p, mu: self.mu }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        match self {
            Params::Proxy(p) => p.validate(),
            Params::Driver(p) => p.validate(),
        }
    }

    /// Proxy-graph form of the parameters; driver parameters are converted.
    pub fn to_proxy(&self) -> ProxyParams {
        match self {
            Params::Proxy(p) => *p,
            Params::Driver(p) => p.to_proxy(),
        }
    }

    pub fn joint_table(&self) -> JointTable {
        match self {
            Params::Proxy(p) => p.joint_table(),
            Params::Driver(p) => p.joint_table(),
        }
    }

    pub fn mu(&self) -> &OutcomeMeans {
        match self {
            Params::Proxy(p) => &p.mu,
            Params::Driver(p) => &p.mu,
        }
    }
}

impl From<ProxyParams> for Params {
    fn from(p: ProxyParams) -> Self {
        Params::Proxy(p)
    }
}

impl From<DriverParams> for Params {
    fn from(p: DriverParams) -> Self {
        Params::Driver(p)
    }
}

/// Conditionals every effect measure is built from, each computed in the
/// graph's own factorization.
pub trait CausalParams {
    /// `P(C = c)`.
    fn p_c(&self) -> f64;
    /// `P(D = d)`.
    fn p_d(&self) -> f64;
    /// `P(c | D = d_level)`.
    fn p_c_given_d(&self, d: bool) -> f64;
    /// `P(c | A = a, D = d)`.
    fn posterior_c(&self, a: bool, d: bool) -> f64;
    fn p_a_given_c(&self) -> &BinaryConditional;
    fn mu(&self) -> &OutcomeMeans;
}

impl CausalParams for ProxyParams {
    fn p_c(&self) -> f64 {
        self.p_c
    }

    fn p_d(&self) -> f64 {
        self.p_d_given_c.given * self.p_c + self.p_d_given_c.given_not * (1.0 - self.p_c)
    }

    fn p_c_given_d(&self, d: bool) -> f64 {
        let on = self.p_d_given_c.prob(d, true) * self.p_c;
        let off = self.p_d_given_c.prob(d, false) * (1.0 - self.p_c);
        on / (on + off)
    }

    fn posterior_c(&self, a: bool, d: bool) -> f64 {
        let on = self.p_a_given_c.prob(a, true) * self.p_d_given_c.prob(d, true) * self.p_c;
        let off =
            self.p_a_given_c.prob(a, false) * self.p_d_given_c.prob(d, false) * (1.0 - self.p_c);
        on / (on + off)
    }

    fn p_a_given_c(&self) -> &BinaryConditional {
        &self.p_a_given_c
    }

    fn mu(&self) -> &OutcomeMeans {
        &self.mu
    }
}

impl CausalParams for DriverParams {
    fn p_c(&self) -> f64 {
        self.p_c_given_d.given * self.p_d + self.p_c_given_d.given_not * (1.0 - self.p_d)
    }

    fn p_d(&self) -> f64 {
        self.p_d
    }

    fn p_c_given_d(&self, d: bool) -> f64 {
        self.p_c_given_d.at(d)
    }

    fn posterior_c(&self, a: bool, d: bool) -> f64 {
        let c_given_d = self.p_c_given_d.at(d);
        let on = self.p_a_given_c.prob(a, true) * c_given_d;
        let off = self.p_a_given_c.prob(a, false) * (1.0 - c_given_d);
        on / (on + off)
    }

    fn p_a_given_c(&self) -> &BinaryConditional {
        &self.p_a_given_c
    }

    fn mu(&self) -> &OutcomeMeans {
        &self.mu
    }
}

/// Iterates the eight `(a, c, d)` cells in index order.
pub fn cells() -> impl Iterator<Item = (bool, bool, bool)> {
    (0..8u8).map(|i| (i & 4 != 0, i & 2 != 0, i & 1 != 0))
}

/// Joint `P(A, C, D)` together with `E[Y | A, C]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable {
    /// `p[a][c][d]`.
    pub p: [[[f64; 2]; 2]; 2],
    pub mu: OutcomeMeans,
}

impl JointTable {
    #[inline]
    pub fn get(&self, a: bool, c: bool, d: bool) -> f64 {
        self.p[a as usize][c as usize][d as usize]
    }

    pub fn total(&self) -> f64 {
        cells().map(|(a, c, d)| self.get(a, c, d)).sum()
    }

    /// Sum of cells matching the given levels; `None` marginalizes.
    pub fn marginal(&self, a: Option<bool>, c: Option<bool>, d: Option<bool>) -> f64 {
        let keep = |want: Option<bool>, have: bool| want.is_none_or(|w| w == have);
        cells()
            .filter(|&(ca, cc, cd)| keep(a, ca) && keep(c, cc) && keep(d, cd))
            .map(|(ca, cc, cd)| self.get(ca, cc, cd))
            .sum()
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> f64 {
        cells()
            .map(|(a, c, d)| (self.get(a, c, d) - other.get(a, c, d)).abs())
            .fold(0.0, f64::max)
    }
}

/// How random parameterizations draw each binary probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// Each binary distribution is a pair of independent uniforms
    /// normalized to sum to one, `(u, v) -> u / (u + v)`. This reproduces
    /// the reference cross-classification rates.
    #[default]
    NormalizedPair,
    /// Each probability drawn directly as `Uniform(0, 1)`.
    Uniform,
}

impl SamplingScheme {
    /// Draws one probability strictly inside `(0, 1)`.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        loop {
            let p = match self {
                SamplingScheme::Uniform => rng.gen::<f64>(),
                SamplingScheme::NormalizedPair => {
                    let u = rng.gen::<f64>();
                    let v = rng.gen::<f64>();
                    u / (u + v)
                }
            };
            if p > 0.0 && p < 1.0 {
                return p;
            }
        }
    }

    fn draw_conditional<R: Rng + ?Sized>(self, rng: &mut R) -> BinaryConditional {
        BinaryConditional::new(self.draw(rng), self.draw(rng))
    }

    fn draw_means<R: Rng + ?Sized>(self, rng: &mut R) -> OutcomeMeans {
        let mut mu = [[0.0; 2]; 2];
        for row in &mut mu {
            for m in row.iter_mut() {
                *m = self.draw(rng);
            }
        }
        OutcomeMeans(mu)
    }
}

/// Deterministic generator for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th run under `master`: `mix64(master ^ mix64(index))`.
/// Independent of scheduling, so parallel batches reproduce serial ones.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

pub fn sample_proxy_with<R: Rng + ?Sized>(rng: &mut R, scheme: SamplingScheme) -> ProxyParams {
    loop {
        let params = ProxyParams {
            p_c: scheme.draw(rng),
            p_d_given_c: scheme.draw_conditional(rng),
            p_a_given_c: scheme.draw_conditional(rng),
            mu: scheme.draw_means(rng),
        };
        if params.validate().is_ok() {
            return params;
        }
    }
}

pub fn sample_driver_with<R: Rng + ?Sized>(rng: &mut R, scheme: SamplingScheme) -> DriverParams {
    loop {
        let params = DriverParams {
            p_d: scheme.draw(rng),
            p_c_given_d: scheme.draw_conditional(rng),
            p_a_given_c: scheme.draw_conditional(rng),
            mu: scheme.draw_means(rng),
        };
        if params.validate().is_ok() {
            return params;
        }
    }
}

/// Random proxy-graph parameterization, a pure function of `seed`.
pub fn sample_proxy(seed: u64) -> ProxyParams {
    sample_proxy_with(&mut rng_from_seed(seed), SamplingScheme::default())
}

/// Random driver-graph parameterization, a pure function of `seed`.
pub fn sample_driver(seed: u64) -> DriverParams {
    sample_driver_with(&mut rng_from_seed(seed), SamplingScheme::default())
}
