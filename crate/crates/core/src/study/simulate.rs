//! Synthetic study data.
//!
//! A log-cases driver follows an AR(1). The index's daily return has GARCH(1,1)
//! innovations scaled by `exp(loading * x_{t-lag} / sd(x))`, where `x` is the
//! driver's deviation from its mean, so cases shocks raise index volatility
//! when `loading > 0`. Rates, exchange rates and the stringency index are
//! independent AR(1) processes. Market series are published on weekdays only.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normals, substream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1 {
    pub mean: f64,
    pub phi: f64,
    pub sigma: f64,
}

impl Ar1 {
    fn check(&self, name: &str) -> Result<()> {
        if !(self.phi.abs() < 1.0) || !(self.sigma >= 0.0) || !self.mean.is_finite() {
            return Err(Error::Config(format!("`{name}` needs |phi| < 1 and sigma >= 0")));
        }
        Ok(())
    }

    fn stationary_sd(&self) -> f64 {
        self.sigma / (1.0 - self.phi * self.phi).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexDgp {
    pub start_level: f64,
    pub drift: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Log-variance response to a one-standard-deviation driver deviation.
    pub loading: f64,
    /// Delay in calendar days between the driver and the variance shift.
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub seed: u64,
    pub burn_in: usize,
    /// Log of daily cases.
    pub cases: Ar1,
    pub stringency: Ar1,
    pub rate: Ar1,
    /// Added to the rate's deviation on each event date.
    pub rate_event_jump: f64,
    pub event_dates: BTreeSet<NaiveDate>,
    /// Log of the exchange rates.
    pub exchange: Ar1,
    pub cny: Ar1,
    pub index: IndexDgp,
    /// Every-day file with columns `C` and `S`.
    pub daily_file: String,
    /// Weekday file with columns `R`, `E`, `CNY` and `SM`.
    pub trading_file: String,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.end < self.start {
            return Err(Error::Config("simulation ends before it starts".into()));
        }
        for (name, ar) in [
            ("cases", &self.cases),
            ("stringency", &self.stringency),
            ("rate", &self.rate),
            ("exchange", &self.exchange),
            ("cny", &self.cny),
        ] {
            ar.check(name)?;
        }
        let ix = &self.index;
        if !(ix.omega > 0.0) || !(ix.alpha >= 0.0) || !(ix.beta >= 0.0) || !(ix.alpha + ix.beta < 1.0) {
            return Err(Error::Config("index GARCH needs omega > 0, alpha, beta >= 0 and alpha + beta < 1".into()));
        }
        if !(ix.start_level > 0.0) || !ix.loading.is_finite() || !ix.drift.is_finite() {
            return Err(Error::Config("index needs a positive start level and finite loading".into()));
        }
        if self.daily_file == self.trading_file {
            return Err(Error::Config("daily and trading files must differ".into()));
        }
        Ok(())
    }
}

/// Generated files as `(file name, contents)`.
pub fn simulate_study_data(cfg: &SimConfig) -> Result<Vec<(String, String)>> {
    cfg.validate()?;
    let n_out = (cfg.end - cfg.start).num_days() as usize + 1;
    let n = n_out + cfg.burn_in;
    let first = cfg.start - Days::new(cfg.burn_in as u64);
    let date = |t: usize| first + Days::new(t as u64);

    let ar_path = |ar: &Ar1, stream: u64, jumps: Option<(f64, &BTreeSet<NaiveDate>)>| {
        let eta = standard_normals(&mut substream(cfg.seed, stream), n);
        let mut x = vec![0.0; n];
        for t in 0..n {
            let prev = if t == 0 { 0.0 } else { x[t - 1] };
            x[t] = ar.phi * prev + ar.sigma * eta[t];
            if let Some((jump, dates)) = jumps {
                if dates.contains(&date(t)) {
                    x[t] += jump;
                }
            }
        }
        x
    };
    let cases = ar_path(&cfg.cases, 0, None);
    let stringency = ar_path(&cfg.stringency, 1, None);
    let rate = ar_path(&cfg.rate, 2, Some((cfg.rate_event_jump, &cfg.event_dates)));
    let exchange = ar_path(&cfg.exchange, 3, None);
    let cny = ar_path(&cfg.cny, 4, None);

    let ix = &cfg.index;
    let z = standard_normals(&mut substream(cfg.seed, 5), n);
    let sd_x = cfg.cases.stationary_sd();
    let trading = |t: usize| t == cfg.burn_in || !matches!(date(t).weekday(), Weekday::Sat | Weekday::Sun);
    let mut g = ix.omega / (1.0 - ix.alpha - ix.beta);
    let mut u_prev = 0.0f64;
    let mut log_sm = ix.start_level.ln();
    let mut sm = vec![f64::NAN; n];
    for t in 0..n {
        if !trading(t) {
            continue;
        }
        if t > 0 {
            g = ix.omega + ix.alpha * u_prev * u_prev + ix.beta * g;
        }
        let u = g.sqrt() * z[t];
        let shift = if sd_x > 0.0 && t >= ix.lag { ix.loading * cases[t - ix.lag] / sd_x } else { 0.0 };
        let eps = (0.5 * shift).exp() * u;
        u_prev = u;
        if t >= cfg.burn_in {
            if t > cfg.burn_in {
                log_sm += ix.drift + eps;
            }
            sm[t] = log_sm.exp();
        }
    }

    let mut daily = String::from("date,C,S\n");
    let mut market = String::from("date,R,E,CNY,SM\n");
    for t in cfg.burn_in..n {
        let d = date(t);
        let c = (cfg.cases.mean + cases[t]).exp();
        let s = (cfg.stringency.mean + stringency[t]).clamp(1.0, 100.0);
        daily.push_str(&format!("{d},{},{}\n", num(c), num(s)));
        if trading(t) {
            let r = cfg.rate.mean + rate[t];
            let e = (cfg.exchange.mean + exchange[t]).exp();
            let y = (cfg.cny.mean + cny[t]).exp();
            market.push_str(&format!("{d},{},{},{},{}\n", num(r), num(e), num(y), num(sm[t])));
        }
    }
    Ok(vec![(cfg.daily_file.clone(), daily), (cfg.trading_file.clone(), market)])
}

fn num(v: f64) -> String {
    format!("{v:.9e}")
}

/// Writes the simulated files into `dir`.
pub fn write_study_data(cfg: &SimConfig, dir: &Path) -> Result<Vec<String>> {
    let files = simulate_study_data(cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut names = Vec::new();
    for (name, text) in files {
        let path = dir.join(&name);
        std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        names.push(name);
    }
    Ok(names)
}
