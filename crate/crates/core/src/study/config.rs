//! Study configuration. A single JSON document; unknown keys are rejected.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{AdfLags, AdfSpec};
use crate::error::{Error, Result};
use crate::irf::BandScheme;
use crate::volatility::GarchOrder;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub files: Vec<DataFile>,
    /// Columns that enter in natural logs.
    pub log_columns: Vec<String>,
    pub data_range: DateRange,
    /// Effective VAR sample. Lags are taken from the days before `start`.
    pub estimation_range: DateRange,
    pub dummies: Vec<Dummy>,
    pub volatility: VolatilityConfig,
    pub adf: AdfConfig,
    pub var: VarConfig,
    pub irf: IrfConfig,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    /// Relative to the data directory.
    pub path: String,
    pub date_column: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dummy {
    pub name: String,
    pub dates: BTreeSet<NaiveDate>,
}

/// How the two numbers of a GARCH order are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderConvention {
    /// `[arch, garch]`
    ArchFirst,
    /// `[garch, arch]`
    GarchFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolatilityConfig {
    /// Index column whose first difference feeds the mean model.
    pub source: String,
    pub ar_lags: Vec<usize>,
    pub garch_order: [usize; 2],
    pub order_convention: OrderConvention,
    /// Name of the published conditional-variance series.
    pub output: String,
    pub log_output: bool,
}

impl VolatilityConfig {
    pub fn order(&self) -> GarchOrder {
        let [a, b] = self.garch_order;
        match self.order_convention {
            OrderConvention::ArchFirst => GarchOrder::new(a, b),
            OrderConvention::GarchFirst => GarchOrder::new(b, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdfSetting {
    pub spec: AdfSpec,
    pub lags: AdfLags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdfConfig {
    pub default: AdfSetting,
    pub per_variable: BTreeMap<String, AdfSetting>,
}

impl AdfConfig {
    pub fn setting(&self, name: &str) -> AdfSetting {
        self.per_variable.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LagPolicy {
    Fixed(usize),
    /// Smallest `p` in `min..=max` whose equations all pass whiteness at `alpha`.
    Select { min: usize, max: usize, alpha: f64 },
}

impl LagPolicy {
    /// Largest lag the policy may use.
    pub fn max_lag(&self) -> usize {
        match *self {
            LagPolicy::Fixed(p) => p,
            LagPolicy::Select { max, .. } => max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarConfig {
    pub lags: LagPolicy,
    pub whiteness_lags: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrfConfig {
    pub horizon: usize,
    pub n_draws: usize,
    pub seed: u64,
    pub scheme: BandScheme,
    /// Pair whose significance is summarized and plotted.
    pub impulse: String,
    pub response: String,
    pub early_window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    /// Endogenous variables in identification order.
    pub ordering: Vec<String>,
    pub exogenous: Vec<String>,
    /// Overrides the study-wide lag policy.
    pub lags: Option<LagPolicy>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StudyConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Columns declared across all files.
    pub fn schema_columns(&self) -> Vec<String> {
        self.files.iter().flat_map(|f| f.columns.iter().cloned()).collect()
    }

    /// All names a variant may reference.
    pub fn known_names(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.schema_columns().into_iter().collect();
        names.insert(self.volatility.output.clone());
        names.extend(self.dummies.iter().map(|d| d.name.clone()));
        names
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let columns = self.schema_columns();
        if self.files.is_empty() {
            return bad("no data files".into());
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return bad(format!("column `{c}` declared in more than one file"));
            }
        }
        for f in &self.files {
            if f.columns.is_empty() {
                return bad(format!("file `{}` declares no columns", f.path));
            }
        }
        for c in &self.log_columns {
            if !seen.contains(c.as_str()) {
                return bad(format!("log column `{c}` is not in the schema"));
            }
        }
        let (d, e) = (self.data_range, self.estimation_range);
        if d.start > d.end || e.start > e.end {
            return bad("date range ends before it starts".into());
        }
        if e.start < d.start || e.end > d.end {
            return bad("estimation range must lie inside the data range".into());
        }
        let v = &self.volatility;
        if !seen.contains(v.source.as_str()) {
            return bad(format!("volatility source `{}` is not in the schema", v.source));
        }
        if seen.contains(v.output.as_str()) {
            return bad(format!("volatility output `{}` clashes with a data column", v.output));
        }
        if v.ar_lags.is_empty() || v.ar_lags.contains(&0) {
            return bad("AR lags must be positive and non-empty".into());
        }
        if v.order().arch == 0 {
            return bad("GARCH needs at least one ARCH lag".into());
        }
        for dm in &self.dummies {
            if seen.contains(dm.name.as_str()) || dm.name == v.output {
                return bad(format!("dummy `{}` clashes with another column", dm.name));
            }
            if let Some(x) = dm.dates.iter().find(|&&x| x < d.start || x > d.end) {
                return bad(format!("dummy `{}` date {x} outside the data range", dm.name));
            }
        }
        let known = self.known_names();
        for name in self.adf.per_variable.keys() {
            if !known.contains(name) {
                return bad(format!("ADF setting for unknown variable `{name}`"));
            }
        }
        check_lags(&self.var.lags)?;
        if self.var.whiteness_lags == 0 {
            return bad("whiteness lags must be positive".into());
        }
        let irf = &self.irf;
        if irf.horizon < 1 {
            return bad("IRF horizon must be at least 1".into());
        }
        if irf.n_draws < 2 {
            return bad("n_draws must be at least 2".into());
        }
        if irf.early_window < 1 || irf.early_window > irf.horizon {
            return bad("early window must lie in 1..=horizon".into());
        }
        for n in [&irf.impulse, &irf.response] {
            if !known.contains(n) {
                return bad(format!("IRF variable `{n}` is not a known column"));
            }
        }
        if self.variants.is_empty() {
            return bad("no variants".into());
        }
        let mut names = BTreeSet::new();
        for var in &self.variants {
            if !names.insert(var.name.as_str()) {
                return bad(format!("variant `{}` listed twice", var.name));
            }
            if var.name.is_empty() || !var.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("variant name `{}` must be alphanumeric, `_` or `-`", var.name));
            }
            if var.ordering.is_empty() {
                return bad(format!("variant `{}` has an empty ordering", var.name));
            }
            let mut used = BTreeSet::new();
            for n in var.ordering.iter().chain(&var.exogenous) {
                if !known.contains(n) {
                    return bad(format!("variant `{}` references unknown column `{n}`", var.name));
                }
                if !used.insert(n.as_str()) {
                    return bad(format!("variant `{}` lists `{n}` twice", var.name));
                }
            }
            if let Some(l) = &var.lags {
                check_lags(l)?;
            }
        }
        Ok(())
    }

    pub fn lag_policy(&self, variant: &Variant) -> LagPolicy {
        variant.lags.unwrap_or(self.var.lags)
    }
}

fn check_lags(l: &LagPolicy) -> Result<()> {
    match *l {
        LagPolicy::Fixed(0) => Err(Error::Config("VAR lag order must be positive".into())),
        LagPolicy::Select { min, max, alpha } if min == 0 || min > max || !(alpha > 0.0 && alpha < 1.0) => {
            Err(Error::Config("lag selection needs 1 <= min <= max and 0 < alpha < 1".into()))
        }
        _ => Ok(()),
    }
}
