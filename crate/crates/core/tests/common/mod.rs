//! Brute-force oracle: enumerates the joint `P(A, C, D)` straight from a
//! graph's factorization and derives every quantity by summation over
//! cells. Shares nothing with the closed-form code beyond the parameter
//! structs.

#![allow(dead_code)]

use confounder_lab::{DriverParams, Params, ProxyParams};

pub struct Oracle {
    /// `joint[a][c][d]`.
    joint: [[[f64; 2]; 2]; 2],
    mu: [[f64; 2]; 2],
}

fn bern(p: f64) -> [f64; 2] {
    [1.0 - p, p]
}

impl Oracle {
    pub fn proxy(p: &ProxyParams) -> Oracle {
        let pc = bern(p.p_c);
        let pd = [bern(p.p_d_given_c.given_not), bern(p.p_d_given_c.given)];
        let pa = [bern(p.p_a_given_c.given_not), bern(p.p_a_given_c.given)];
        let mut joint = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    joint[a][c][d] = pc[c] * pd[c][d] * pa[c][a];
                }
            }
        }
        Oracle { joint, mu: p.mu.0 }
    }

    pub fn driver(p: &DriverParams) -> Oracle {
        let pd = bern(p.p_d);
        let pc = [bern(p.p_c_given_d.given_not), bern(p.p_c_given_d.given)];
        let pa = [bern(p.p_a_given_c.given_not), bern(p.p_a_given_c.given)];
        let mut joint = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    joint[a][c][d] = pd[d] * pc[d][c] * pa[c][a];
                }
            }
        }
        Oracle { joint, mu: p.mu.0 }
    }

    pub fn of(params: &Params) -> Oracle {
        match params {
            Params::Proxy(p) => Oracle::proxy(p),
            Params::Driver(p) => Oracle::driver(p),
        }
    }

    pub fn cell(&self, a: usize, c: usize, d: usize) -> f64 {
        self.joint[a][c][d]
    }

    /// Probability of the event where each `Some` pins a variable.
    pub fn prob(&self, a: Option<usize>, c: Option<usize>, d: Option<usize>) -> f64 {
        let mut total = 0.0;
        for ia in 0..2 {
            for ic in 0..2 {
                for id in 0..2 {
                    if a.is_none_or(|v| v == ia)
                        && c.is_none_or(|v| v == ic)
                        && d.is_none_or(|v| v == id)
                    {
                        total += self.joint[ia][ic][id];
                    }
                }
            }
        }
        total
    }

    /// Expectation of `Y` over the event, divided by its probability.
    fn mean_y(&self, a: Option<usize>, d: Option<usize>) -> f64 {
        let mut num = 0.0;
        for ia in 0..2 {
            for ic in 0..2 {
                for id in 0..2 {
                    if a.is_none_or(|v| v == ia) && d.is_none_or(|v| v == id) {
                        num += self.joint[ia][ic][id] * self.mu[ia][ic];
                    }
                }
            }
        }
        num / self.prob(a, None, d)
    }

    pub fn total(&self) -> f64 {
        self.prob(None, None, None)
    }

    pub fn p_c(&self) -> f64 {
        self.prob(None, Some(1), None)
    }

    pub fn p_d(&self) -> f64 {
        self.prob(None, None, Some(1))
    }

    pub fn posterior_c(&self, a: usize, d: usize) -> f64 {
        self.prob(Some(a), Some(1), Some(d)) / self.prob(Some(a), None, Some(d))
    }

    pub fn e_y_ad(&self, a: usize, d: usize) -> f64 {
        self.mean_y(Some(a), Some(d))
    }

    pub fn e_y_a(&self, a: usize) -> f64 {
        self.mean_y(Some(a), None)
    }

    pub fn e_a_d(&self, d: usize) -> f64 {
        self.prob(Some(1), None, Some(d)) / self.prob(None, None, Some(d))
    }

    pub fn p_d_given_a(&self, a: usize) -> f64 {
        self.prob(Some(a), None, Some(1)) / self.prob(Some(a), None, None)
    }

    /// Mean of `Y` after setting `A = a` in every unit: the joint of the
    /// mutilated graph is `P(C, D) * 1[A = a]`.
    pub fn e_y_do(&self, a: usize) -> f64 {
        let mut total = 0.0;
        for c in 0..2 {
            for d in 0..2 {
                let p_cd = self.joint[0][c][d] + self.joint[1][c][d];
                total += p_cd * self.mu[a][c];
            }
        }
        total
    }

    pub fn s(&self, a: usize) -> f64 {
        let pd = self.p_d();
        self.e_y_ad(a, 1) * pd + self.e_y_ad(a, 0) * (1.0 - pd)
    }

    pub fn rd_true(&self) -> f64 {
        self.e_y_do(1) - self.e_y_do(0)
    }

    pub fn rd_obs(&self) -> f64 {
        self.s(1) - self.s(0)
    }

    pub fn rd_crude(&self) -> f64 {
        self.e_y_a(1) - self.e_y_a(0)
    }

    /// Smallest absolute row difference of `E[Y | A, D]` across `D`.
    pub fn min_abs_y_gap_in_d(&self) -> f64 {
        (0..2)
            .map(|a| (self.e_y_ad(a, 1) - self.e_y_ad(a, 0)).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Monotone in `D` by direct comparison of the enumerated means.
    pub fn y_monotone_in_d(&self) -> bool {
        let g1 = self.e_y_ad(1, 1) - self.e_y_ad(1, 0);
        let g0 = self.e_y_ad(0, 1) - self.e_y_ad(0, 0);
        (g1 >= 0.0 && g0 >= 0.0) || (g1 <= 0.0 && g0 <= 0.0)
    }

    pub fn y_monotone_in_c(&self) -> bool {
        let g1 = self.mu[1][1] - self.mu[1][0];
        let g0 = self.mu[0][1] - self.mu[0][0];
        (g1 >= 0.0 && g0 >= 0.0) || (g1 <= 0.0 && g0 <= 0.0)
    }
}

pub fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}
