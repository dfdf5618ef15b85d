//! Summary statistics used by the benchmark: Cliff's δ, MCC, skewness, CCC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| x.is_nan()) {
        Err(Error::NanScore)
    } else {
        Ok(())
    }
}

/// Exact numerator of Cliff's δ: `Σ I(x > y) − I(x < y)` over all pairs.
pub fn cliffs_dominance(same: &[f64], separate: &[f64]) -> Result<i128> {
    check_finite(same)?;
    check_finite(separate)?;
    // `+ 0.0` folds -0.0 into 0.0 so the total order agrees with `<`.
    let mut sorted: Vec<f64> = separate.iter().map(|&y| y + 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as i128;
    Ok(same
        .iter()
        .map(|&x| {
            let x = x + 0.0;
            let below = sorted.partition_point(|&y| y < x) as i128;
            let not_above = sorted.partition_point(|&y| y <= x) as i128;
            below - (n - not_above)
        })
        .sum())
}

/// Cliff's δ between same-topic and separate-topic scores, in `[-1, 1]`.
pub fn cliffs_delta(same: &[f64], separate: &[f64]) -> Result<f64> {
    if same.is_empty() {
        return Err(Error::EmptyInput("same-topic scores"));
    }
    if separate.is_empty() {
        return Err(Error::EmptyInput("separate-topic scores"));
    }
    let num = cliffs_dominance(same, separate)?;
    Ok(num as f64 / (same.len() as f64 * separate.len() as f64))
}

/// Binary confusion counts; positive means RELEVANT.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mcc {
    pub value: f64,
    /// A denominator factor was zero and `value` was set to 0.
    pub degenerate: bool,
}

pub fn mcc(c: &Confusion) -> Mcc {
    let f = |x: u64| x as f64;
    let factors = [c.tp + c.fp, c.tp + c.fn_, c.tn + c.fp, c.tn + c.fn_];
    if factors.contains(&0) {
        return Mcc {
            value: 0.0,
            degenerate: true,
        };
    }
    let num = (c.tp as i128 * c.tn as i128 - c.fp as i128 * c.fn_ as i128) as f64;
    let den = (f(factors[0]) * f(factors[1])).sqrt() * (f(factors[2]) * f(factors[3])).sqrt();
    Mcc {
        value: (num / den).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("mean"));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Population central moment of order `k` about `mu`.
fn central_moment(xs: &[f64], mu: f64, k: i32) -> f64 {
    xs.iter().map(|x| (x - mu).powi(k)).sum::<f64>() / xs.len() as f64
}

/// Pearson's moment coefficient of skewness with population moments.
pub fn skewness(xs: &[f64]) -> Result<f64> {
    if xs.len() < 3 {
        return Err(Error::TooFewValues {
            what: "skewness",
            needed: 3,
            got: xs.len(),
        });
    }
    check_finite(xs)?;
    let mu = mean(xs)?;
    let m2 = central_moment(xs, mu, 2);
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance("skewness"));
    }
    Ok(central_moment(xs, mu, 3) / m2.powf(1.5))
}

struct Paired {
    mu_x: f64,
    mu_y: f64,
    sd_x: f64,
    sd_y: f64,
    cov: f64,
}

fn paired_moments(x: &[f64], y: &[f64]) -> Result<Paired> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewValues {
            what: "paired statistic",
            needed: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (mu_x, mu_y) = (mean(x)?, mean(y)?);
    let var_x = central_moment(x, mu_x, 2);
    let var_y = central_moment(y, mu_y, 2);
    if var_x <= 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if var_y <= 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mu_x) * (b - mu_y))
        .sum::<f64>()
        / x.len() as f64;
    Ok(Paired {
        mu_x,
        mu_y,
        sd_x: var_x.sqrt(),
        sd_y: var_y.sqrt(),
        cov,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = paired_moments(x, y)?;
    Ok((m.cov / (m.sd_x * m.sd_y)).clamp(-1.0, 1.0))
}

/// Lin's concordance correlation coefficient `ρ · C_b`, population moments.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = paired_moments(x, y)?;
    let rho = (m.cov / (m.sd_x * m.sd_y)).clamp(-1.0, 1.0);
    let shift = (m.mu_y - m.mu_x).powi(2) / (m.sd_x * m.sd_y);
    let c_b = 2.0 / (m.sd_y / m.sd_x + m.sd_x / m.sd_y + shift);
    Ok(rho * c_b)
}
