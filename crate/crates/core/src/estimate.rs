//! Plug-in estimation from observed `(A, D, Y)` rows, synthetic data
//! generation, and the two-population transport verdict.

use std::io::Read;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rng_from_seed, Params};
use crate::monotonicity::{alignment, Alignment, Direction};

/// One observation. `C` is never observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(with = "bit")]
    pub a: bool,
    #[serde(with = "bit")]
    pub d: bool,
    pub y: f64,
}

mod bit {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("expected 0 or 1, got {other}"))),
        }
    }
}

/// Counts and outcome sums per `(a, d)` stratum, indexed `[a][d]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleDataset {
    pub n: [[u64; 2]; 2],
    pub y_sum: [[f64; 2]; 2],
    pub n_total: u64,
}

impl SampleDataset {
    pub fn push(&mut self, row: Row) {
        let (a, d) = (row.a as usize, row.d as usize);
        self.n[a][d] += 1;
        self.y_sum[a][d] += row.y;
        self.n_total += 1;
    }

    pub fn empty_strata(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        for a in 0..2 {
            for d in 0..2 {
                if self.n[a][d] == 0 {
                    out.push((a as u8, d as u8));
                }
            }
        }
        out
    }

    /// Plug-in estimates; every stratum must be populated.
    pub fn estimate(&self) -> Result<PopulationEstimates> {
        estimate_population(self)
    }
}

/// Folds rows into stratum counts and sums.
pub fn ingest<I: IntoIterator<Item = Row>>(rows: I) -> Result<SampleDataset> {
    let mut ds = SampleDataset::default();
    for row in rows {
        if !row.y.is_finite() {
            return Err(Error::InvalidRow {
                row: ds.n_total + 1,
                message: format!("y = {} is not finite", row.y),
            });
        }
        ds.push(row);
    }
    if ds.n_total == 0 {
        return Err(Error::EmptyData);
    }
    Ok(ds)
}

/// Reads CSV with header `a,d,y`.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["a", "d", "y"] {
        return Err(Error::InvalidRow {
            row: 0,
            message: format!(
                "expected header a,d,y, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<Row>().enumerate() {
        rows.push(rec.map_err(|e| {
            if e.is_io_error() {
                Error::Csv(e)
            } else {
                Error::InvalidRow {
                    row: i as u64 + 1,
                    message: e.to_string(),
                }
            }
        })?);
    }
    Ok(rows)
}

/// Writes rows as CSV with header `a,d,y`.
pub fn write_rows<W: std::io::Write, I: IntoIterator<Item = Row>>(rows: I, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Observable quantities of one population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationEstimates {
    /// `E[Y | a, d]` indexed `[a][d]`.
    pub e_y_ad: [[f64; 2]; 2],
    /// `P(A = a | d)` indexed by `d`.
    pub e_a_d: [f64; 2],
    /// `P(D = d)`.
    pub p_d: f64,
    pub stratum_sizes: [[u64; 2]; 2],
}

impl PopulationEstimates {
    /// Direction of `E[Y | A, D]` in `D`.
    pub fn y_in_d(&self) -> Direction {
        let gap = |a: usize| self.e_y_ad[a][1] - self.e_y_ad[a][0];
        Direction::of_gaps(gap(1), gap(0), 0.0)
    }

    /// Direction of `E[A | D]` in `D`.
    pub fn a_in_d(&self) -> Direction {
        Direction::of_gap(self.e_a_d[1] - self.e_a_d[0], 0.0)
    }

    /// `P(D = d | A = a)` reconstructed from `P(a | D)` and `P(D)`.
    pub fn p_d_given_a(&self, a: bool) -> f64 {
        let pa = |d: usize| {
            if a {
                self.e_a_d[d]
            } else {
                1.0 - self.e_a_d[d]
            }
        };
        let on = pa(1) * self.p_d;
        let off = pa(0) * (1.0 - self.p_d);
        on / (on + off)
    }
}

pub fn estimate_population(ds: &SampleDataset) -> Result<PopulationEstimates> {
    let empty = ds.empty_strata();
    if !empty.is_empty() {
        return Err(Error::EmptyStratum(empty));
    }
    let e_y_ad =
        std::array::from_fn(|a| std::array::from_fn(|d| ds.y_sum[a][d] / ds.n[a][d] as f64));
    let n_d = |d: usize| ds.n[0][d] + ds.n[1][d];
    let e_a_d = [
        ds.n[1][0] as f64 / n_d(0) as f64,
        ds.n[1][1] as f64 / n_d(1) as f64,
    ];
    Ok(PopulationEstimates {
        e_y_ad,
        e_a_d,
        p_d: n_d(1) as f64 / ds.n_total as f64,
        stratum_sizes: ds.n,
    })
}

/// Conclusion about `rd_obs` relative to `rd_true`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "RD_obs >= RD_true")]
    ObsAtLeastTrue,
    #[serde(rename = "RD_obs <= RD_true")]
    ObsAtMostTrue,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ObsAtLeastTrue => "RD_obs >= RD_true",
            Verdict::ObsAtMostTrue => "RD_obs <= RD_true",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Whether the verdict agrees with `rd_obs - rd_true` within `tol`.
    pub fn consistent_with(self, rd_obs: f64, rd_true: f64, tol: f64) -> bool {
        match self {
            Verdict::ObsAtLeastTrue => rd_obs >= rd_true - tol,
            Verdict::ObsAtMostTrue => rd_obs <= rd_true + tol,
            Verdict::Inconclusive => true,
        }
    }

    /// Verdict implied by an outcome/treatment alignment.
    pub fn from_alignment(al: Alignment) -> Verdict {
        match al {
            Alignment::Same => Verdict::ObsAtLeastTrue,
            Alignment::Opposite => Verdict::ObsAtMostTrue,
            Alignment::Undetermined => Verdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRds {
    pub rd_obs: f64,
    pub rd_crude: f64,
}

pub fn empirical_rds(est: &PopulationEstimates) -> EmpiricalRds {
    let s = |a: usize| est.e_y_ad[a][1] * est.p_d + est.e_y_ad[a][0] * (1.0 - est.p_d);
    let crude_arm = |a: bool| {
        let w = est.p_d_given_a(a);
        let row = est.e_y_ad[a as usize];
        row[1] * w + row[0] * (1.0 - w)
    };
    EmpiricalRds {
        rd_obs: s(1) - s(0),
        rd_crude: crude_arm(true) - crude_arm(false),
    }
}

/// What a single population's data imply about `rd_true`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataReport {
    pub estimates: PopulationEstimates,
    pub rds: EmpiricalRds,
    pub y_in_d: Direction,
    pub a_in_d: Direction,
    pub verdict: Verdict,
}

/// When `E[Y|A,D]` is monotone in `D`, `rd_obs` lies between `rd_true` and
/// `rd_crude`, so `rd_obs` sits on the far side of `rd_crude` from
/// `rd_true`. Equal `rd_obs` and `rd_crude` fix nothing.
pub fn data_report(est: &PopulationEstimates) -> DataReport {
    let rds = empirical_rds(est);
    let y_in_d = est.y_in_d();
    let verdict = if !y_in_d.is_monotone() {
        Verdict::Inconclusive
    } else if rds.rd_crude < rds.rd_obs {
        Verdict::ObsAtMostTrue
    } else if rds.rd_crude > rds.rd_obs {
        Verdict::ObsAtLeastTrue
    } else {
        Verdict::Inconclusive
    };
    DataReport {
        estimates: *est,
        rds,
        y_in_d,
        a_in_d: est.a_in_d(),
        verdict,
    }
}

/// Conclusions for a third population that shares the outcome mechanism
/// with `pop1` and the treatment policy with `pop2` (and `p(C|D)` with both).
///
/// The directions of `E[Y|A,D]` and `E[A|D]` in `D` carry over from the
/// respective source population even when the values do not, because each
/// is the sign of a `C`-gap times the sign of the `C`-`D` association.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// `E[Y | A, D]` from the first population, indexed `[a][d]`.
    pub e_y_ad: [[f64; 2]; 2],
    /// `E[A | D]` from the second population, indexed by `d`.
    pub e_a_d: [f64; 2],
    pub y_in_d: Direction,
    pub a_in_d: Direction,
    pub alignment: Alignment,
    pub verdict: Verdict,
    pub pop1_strata: [[u64; 2]; 2],
    pub pop2_strata: [[u64; 2]; 2],
}

pub fn transport(pop1: &PopulationEstimates, pop2: &PopulationEstimates) -> TransportReport {
    let y_in_d = pop1.y_in_d();
    let a_in_d = pop2.a_in_d();
    let al = alignment(y_in_d, a_in_d);
    TransportReport {
        e_y_ad: pop1.e_y_ad,
        e_a_d: pop2.e_a_d,
        y_in_d,
        a_in_d,
        alignment: al,
        verdict: Verdict::from_alignment(al),
        pop1_strata: pop1.stratum_sizes,
        pop2_strata: pop2.stratum_sizes,
    }
}

/// Ancestral sampler of `(A, D, Y)` rows with `Y ~ Bernoulli(E[Y|A,C])`.
#[derive(Debug, Clone)]
pub struct Generator {
    params: Params,
    remaining: u64,
    rng: ChaCha8Rng,
}

/// `n` i.i.d. rows from the graph's own factorization, deterministic in
/// `seed`.
pub fn generate(params: &Params, n: u64, seed: u64) -> Result<Generator> {
    params.validate()?;
    params.mu().check_bernoulli()?;
    Ok(Generator {
        params: *params,
        remaining: n,
        rng: rng_from_seed(seed),
    })
}

impl Iterator for Generator {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let rng = &mut self.rng;
        let (c, d, a) = match &self.params {
            Params::Proxy(p) => {
                let c = rng.gen::<f64>() < p.p_c;
                let d = rng.gen::<f64>() < p.p_d_given_c.at(c);
                let a = rng.gen::<f64>() < p.p_a_given_c.at(c);
                (c, d, a)
            }
            Params::Driver(p) => {
                let d = rng.gen::<f64>() < p.p_d;
                let c = rng.gen::<f64>() < p.p_c_given_d.at(d);
                let a = rng.gen::<f64>() < p.p_a_given_c.at(c);
                (c, d, a)
            }
        };
        let y = if rng.gen::<f64>() < self.params.mu().get(a, c) {
            1.0
        } else {
            0.0
        };
        Some(Row { a, d, y })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}
