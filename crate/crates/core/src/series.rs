//! Daily series ingestion, calendar alignment, transforms and panel assembly.
//!
//! Every [`TimeSeries`] lives on a contiguous daily calendar. Raw CSV input
//! may skip days (weekends, holidays); [`align_daily`] fills those by carrying
//! the most recent observation forward and records which entries were filled.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Reads a date in ISO-8601 `YYYY-MM-DD` form.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Number of calendar days in the closed range `[start, end]`.
pub fn days_inclusive(start: NaiveDate, end: NaiveDate) -> usize {
    if end < start {
        0
    } else {
        (end - start).num_days() as usize + 1
    }
}

fn add_days(d: NaiveDate, n: usize) -> NaiveDate {
    d.checked_add_days(Days::new(n as u64))
        .expect("date arithmetic overflow")
}

/// A column as read from disk: dated cells, `None` for empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    /// Sorted by date, no duplicates.
    pub observations: Vec<(NaiveDate, Option<f64>)>,
}

impl RawSeries {
    pub fn observed(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.observations
            .iter()
            .filter_map(|&(d, v)| v.map(|v| (d, v)))
    }
}

/// Which columns to take from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub date_column: String,
    /// Value columns to extract. Empty means every non-date column.
    pub value_columns: Vec<String>,
}

impl CsvSchema {
    pub fn new<S: Into<String>>(value_columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            date_column: "date".to_string(),
            value_columns: value_columns.into_iter().map(Into::into).collect(),
        }
    }

    pub fn all_columns() -> Self {
        Self::new(Vec::<String>::new())
    }
}

/// Parses comma-delimited UTF-8 text with a header row.
///
/// Row numbers in errors count the header as row 1.
pub fn parse_csv(text: &str, schema: &CsvSchema) -> Result<Vec<RawSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let date_idx = find(&schema.date_column).ok_or_else(|| Error::Parse {
        row: 1,
        message: format!("missing date column `{}`", schema.date_column),
    })?;

    let wanted: Vec<(String, usize)> = if schema.value_columns.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != date_idx)
            .map(|(i, h)| (h.to_string(), i))
            .collect()
    } else {
        schema
            .value_columns
            .iter()
            .map(|name| {
                find(name).map(|i| (name.clone(), i)).ok_or_else(|| Error::Parse {
                    row: 1,
                    message: format!("missing value column `{name}`"),
                })
            })
            .collect::<Result<_>>()?
    };

    let mut rows: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let date_cell = record.get(date_idx).unwrap_or("");
        let date = parse_date(date_cell).ok_or_else(|| Error::Parse {
            row,
            message: format!("invalid date `{date_cell}`"),
        })?;
        let mut values = Vec::with_capacity(wanted.len());
        for (name, idx) in &wanted {
            let cell = record.get(*idx).unwrap_or("");
            if cell.is_empty() {
                values.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                message: format!("invalid number `{cell}` in column `{name}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("non-finite value `{cell}` in column `{name}`"),
                });
            }
            values.push(Some(v));
        }
        if rows.insert(date, values).is_some() {
            return Err(Error::DuplicateDate { row, date });
        }
    }

    Ok(wanted
        .iter()
        .enumerate()
        .map(|(j, (name, _))| RawSeries {
            name: name.clone(),
            observations: rows.iter().map(|(&d, vals)| (d, vals[j])).collect(),
        })
        .collect())
}

/// Contiguous daily series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    start: NaiveDate,
    values: Vec<f64>,
    filled: Vec<bool>,
    log_transformed: bool,
}

impl TimeSeries {
    /// Builds a fully observed series starting at `start`.
    pub fn new(name: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Self {
        let filled = vec![false; values.len()];
        Self {
            name: name.into(),
            start,
            values,
            filled,
            log_transformed: false,
        }
    }

    pub fn with_mask(
        name: impl Into<String>,
        start: NaiveDate,
        values: Vec<f64>,
        filled: Vec<bool>,
    ) -> Result<Self> {
        if values.len() != filled.len() {
            return Err(Error::InvalidArgument(format!(
                "values ({}) and mask ({}) lengths differ",
                values.len(),
                filled.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            start,
            values,
            filled,
            log_transformed: false,
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last date. Panics on an empty series.
    pub fn end(&self) -> NaiveDate {
        assert!(!self.values.is_empty(), "empty series has no end date");
        add_days(self.start, self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn filled_mask(&self) -> &[bool] {
        &self.filled
    }

    pub fn is_log_transformed(&self) -> bool {
        self.log_transformed
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        add_days(self.start, i)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len()).map(|i| self.date_at(i)).collect()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        if date < self.start {
            return None;
        }
        let i = (date - self.start).num_days() as usize;
        (i < self.len()).then_some(i)
    }

    /// Restricts to `[start, end]`; errors if the range is not fully covered.
    pub fn slice(&self, start: NaiveDate, end: NaiveDate) -> Result<TimeSeries> {
        match (self.index_of(start), self.index_of(end)) {
            (Some(a), Some(b)) if a <= b => Ok(TimeSeries {
                name: self.name.clone(),
                start,
                values: self.values[a..=b].to_vec(),
                filled: self.filled[a..=b].to_vec(),
                log_transformed: self.log_transformed,
            }),
            _ => Err(Error::Alignment {
                series: self.name.clone(),
                message: format!(
                    "does not cover {start}..{end} (available {}..{})",
                    self.start,
                    if self.is_empty() {
                        self.start
                    } else {
                        self.end()
                    }
                ),
            }),
        }
    }

    /// Observed entries only; carried-forward days become missing.
    pub fn to_raw(&self) -> RawSeries {
        RawSeries {
            name: self.name.clone(),
            observations: self
                .values
                .iter()
                .zip(&self.filled)
                .enumerate()
                .map(|(i, (&v, &f))| (self.date_at(i), (!f).then_some(v)))
                .collect(),
        }
    }
}

/// Carries the last observation forward over every day of `[start, end]`.
pub fn align_daily(raw: &RawSeries, start: NaiveDate, end: NaiveDate) -> Result<TimeSeries> {
    let fail = |message: String| Error::Alignment {
        series: raw.name.clone(),
        message,
    };
    if end < start {
        return Err(fail(format!("empty range {start}..{end}")));
    }
    if raw.observed().next().is_none() {
        return Err(fail("no observed values".into()));
    }

    let mut obs = raw.observed().peekable();
    let mut last: Option<f64> = None;
    while let Some(&(d, v)) = obs.peek() {
        if d > start {
            break;
        }
        last = Some(v);
        obs.next();
    }
    let mut current = last.ok_or_else(|| fail(format!("no observation at or before {start}")))?;

    let n = days_inclusive(start, end);
    let mut values = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    // the first day counts as observed only if a cell exists on that exact date
    let observed_on_start = raw.observed().any(|(d, _)| d == start);
    values.push(current);
    filled.push(!observed_on_start);
    for i in 1..n {
        let day = add_days(start, i);
        match obs.peek() {
            Some(&(d, v)) if d == day => {
                current = v;
                values.push(v);
                filled.push(false);
                obs.next();
            }
            _ => {
                values.push(current);
                filled.push(true);
            }
        }
    }

    Ok(TimeSeries {
        name: raw.name.clone(),
        start,
        values,
        filled,
        log_transformed: false,
    })
}

/// Elementwise natural log.
pub fn log_transform(ts: &TimeSeries) -> Result<TimeSeries> {
    if let Some(i) = ts.values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain {
            series: ts.name.clone(),
            date: ts.date_at(i),
            value: ts.values[i],
        });
    }
    Ok(TimeSeries {
        values: ts.values.iter().map(|v| v.ln()).collect(),
        log_transformed: true,
        ..ts.clone()
    })
}

/// `out[t] = x[t] - x[t-1]`, dated from the second day.
pub fn first_difference(ts: &TimeSeries) -> Result<TimeSeries> {
    if ts.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: ts.len(),
        });
    }
    Ok(TimeSeries {
        name: ts.name.clone(),
        start: ts.date_at(1),
        values: ts.values.windows(2).map(|w| w[1] - w[0]).collect(),
        filled: ts.filled[1..].to_vec(),
        log_transformed: ts.log_transformed,
    })
}

/// Indicator series: 1.0 on each event date, 0.0 elsewhere.
pub fn make_dummy(
    name: impl Into<String>,
    start: NaiveDate,
    end: NaiveDate,
    events: &BTreeSet<NaiveDate>,
) -> Result<TimeSeries> {
    if end < start {
        return Err(Error::InvalidArgument(format!("empty range {start}..{end}")));
    }
    if let Some(d) = events.iter().find(|&&d| d < start || d > end) {
        return Err(Error::InvalidArgument(format!(
            "event date {d} outside {start}..{end}"
        )));
    }
    let n = days_inclusive(start, end);
    let values = (0..n)
        .map(|i| {
            if events.contains(&add_days(start, i)) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(TimeSeries::new(name, start, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Endogenous,
    Exogenous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub role: Role,
    pub series: TimeSeries,
}

impl Column {
    pub fn transform_log(&self) -> bool {
        self.series.log_transformed
    }
}

/// Aligned panel: endogenous columns in identification order, then exogenous.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub columns: Vec<Column>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        days_inclusive(self.start, self.end)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn endogenous(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.role == Role::Endogenous)
    }

    pub fn exogenous(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.role == Role::Exogenous)
    }

    pub fn endogenous_names(&self) -> Vec<String> {
        self.endogenous().map(|c| c.name.clone()).collect()
    }

    pub fn exogenous_names(&self) -> Vec<String> {
        self.exogenous().map(|c| c.name.clone()).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len()).map(|i| add_days(self.start, i)).collect()
    }

    /// Sub-panel over `[start, end]`.
    pub fn slice(&self, start: NaiveDate, end: NaiveDate) -> Result<Dataset> {
        Ok(Dataset {
            start,
            end,
            columns: self
                .columns
                .iter()
                .map(|c| {
                    Ok(Column {
                        name: c.name.clone(),
                        role: c.role,
                        series: c.series.slice(start, end)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// Builds the panel from named series: `ordering` gives the endogenous
/// columns in identification order, `exogenous` are appended after.
pub fn assemble_dataset(
    available: &[TimeSeries],
    ordering: &[String],
    exogenous: &[String],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Dataset> {
    if end < start {
        return Err(Error::InvalidArgument(format!("empty range {start}..{end}")));
    }
    let mut seen = BTreeSet::new();
    for name in available.iter().map(|s| &s.name) {
        if !seen.insert(name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate input series `{name}`"
            )));
        }
    }
    let mut used = BTreeSet::new();
    let mut columns = Vec::with_capacity(ordering.len() + exogenous.len());
    let roles = ordering
        .iter()
        .map(|n| (n, Role::Endogenous))
        .chain(exogenous.iter().map(|n| (n, Role::Exogenous)));
    for (name, role) in roles {
        if !used.insert(name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "column `{name}` listed more than once"
            )));
        }
        let series = available
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| Error::UnknownName(name.clone()))?;
        columns.push(Column {
            name: name.clone(),
            role,
            series: series.slice(start, end)?,
        });
    }
    if ordering.is_empty() {
        return Err(Error::InvalidArgument("no endogenous columns".into()));
    }
    Ok(Dataset {
        start,
        end,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn raw(name: &str, obs: &[(&str, Option<f64>)]) -> RawSeries {
        RawSeries {
            name: name.into(),
            observations: obs.iter().map(|&(s, v)| (d(s), v)).collect(),
        }
    }

    #[test]
    fn parse_simple_csv() {
        let out = parse_csv("date,c\n2020-02-25,4\n2020-02-26,5", &CsvSchema::new(["c"])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].name, "c");
        assert_eq!(
            out[0].observations,
            vec![(d("2020-02-25"), Some(4.0)), (d("2020-02-26"), Some(5.0))]
        );
    }

    #[test]
    fn parse_empty_cell_is_missing() {
        let out = parse_csv(
            "date,c,r\r\n2020-02-25,4,1\r\n2020-02-26,,2\r\n",
            &CsvSchema::all_columns(),
        )
        .unwrap();
        assert_eq!(out[0].observations[1], (d("2020-02-26"), None));
        assert_eq!(out[1].observations[1], (d("2020-02-26"), Some(2.0)));
    }

    #[test]
    fn parse_bad_date_names_row() {
        let err = parse_csv("date,c\n2020-13-40,1", &CsvSchema::new(["c"])).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_bad_number_and_duplicates() {
        let err = parse_csv("date,c\n2020-01-01,1\n2020-01-02,x", &CsvSchema::new(["c"])).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
        let err = parse_csv("date,c\n2020-01-01,1\n2020-01-01,2", &CsvSchema::new(["c"])).unwrap_err();
        assert!(matches!(err, Error::DuplicateDate { row: 3, .. }));
        let err = parse_csv("date,c\n2020-01-01,1", &CsvSchema::new(["z"])).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
    }

    #[test]
    fn parse_unsorted_rows_are_sorted() {
        let out = parse_csv("date,c\n2020-01-03,3\n2020-01-01,1", &CsvSchema::new(["c"])).unwrap();
        assert_eq!(out[0].observations[0].0, d("2020-01-01"));
    }

    #[test]
    fn align_weekend_carry() {
        // 2020-03-06 is a Friday
        let r = raw("e", &[("2020-03-06", Some(7.0))]);
        let ts = align_daily(&r, d("2020-03-06"), d("2020-03-08")).unwrap();
        assert_eq!(ts.values(), &[7.0, 7.0, 7.0]);
        assert_eq!(ts.filled_mask(), &[false, true, true]);
    }

    #[test]
    fn align_identity_and_gap() {
        let r = raw(
            "x",
            &[("2020-03-02", Some(1.0)), ("2020-03-03", Some(2.0)), ("2020-03-04", Some(3.0))],
        );
        let ts = align_daily(&r, d("2020-03-02"), d("2020-03-04")).unwrap();
        assert_eq!(ts.values(), &[1.0, 2.0, 3.0]);
        assert!(ts.filled_mask().iter().all(|f| !f));

        let r = raw("x", &[("2020-03-02", Some(1.0)), ("2020-03-03", None), ("2020-03-04", Some(3.0))]);
        let ts = align_daily(&r, d("2020-03-02"), d("2020-03-04")).unwrap();
        assert_eq!(ts.values(), &[1.0, 1.0, 3.0]);
        assert_eq!(ts.filled_mask(), &[false, true, false]);
    }

    #[test]
    fn align_uses_presample_observation() {
        let r = raw("x", &[("2020-03-01", Some(5.0)), ("2020-03-04", Some(6.0))]);
        let ts = align_daily(&r, d("2020-03-03"), d("2020-03-05")).unwrap();
        assert_eq!(ts.values(), &[5.0, 6.0, 6.0]);
        assert_eq!(ts.filled_mask(), &[true, false, true]);
    }

    #[test]
    fn align_errors() {
        let r = raw("x", &[("2020-03-04", Some(6.0))]);
        assert!(matches!(
            align_daily(&r, d("2020-03-03"), d("2020-03-05")),
            Err(Error::Alignment { .. })
        ));
        let r = raw("x", &[("2020-03-01", None), ("2020-03-02", None)]);
        assert!(align_daily(&r, d("2020-03-01"), d("2020-03-02")).is_err());
    }

    #[test]
    fn log_identities_and_domain() {
        let e = std::f64::consts::E;
        let ts = TimeSeries::new("x", d("2020-01-01"), vec![1.0, e, e * e]);
        let l = log_transform(&ts).unwrap();
        for (a, b) in l.values().iter().zip([0.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(l.is_log_transformed());

        let ts = TimeSeries::new("x", d("2020-01-01"), vec![1.0, 0.0, 2.0]);
        match log_transform(&ts).unwrap_err() {
            Error::Domain { date, .. } => assert_eq!(date, d("2020-01-02")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn differences() {
        let ts = TimeSeries::new("x", d("2020-01-01"), vec![5.0, 7.0, 4.0]);
        let df = first_difference(&ts).unwrap();
        assert_eq!(df.values(), &[2.0, -3.0]);
        assert_eq!(df.start(), d("2020-01-02"));
        let c = TimeSeries::new("x", d("2020-01-01"), vec![3.0; 5]);
        assert!(first_difference(&c).unwrap().values().iter().all(|&v| v == 0.0));
        let one = TimeSeries::new("x", d("2020-01-01"), vec![3.0]);
        assert!(first_difference(&one).is_err());
    }

    #[test]
    fn dummy_on_event_dates() {
        let events: BTreeSet<_> = [d("2020-03-17"), d("2020-04-01")].into_iter().collect();
        let ts = make_dummy("D", d("2020-02-25"), d("2020-12-07"), &events).unwrap();
        assert_eq!(ts.len(), 287);
        assert_eq!(ts.values().iter().sum::<f64>(), 2.0);
        assert_eq!(ts.values()[ts.index_of(d("2020-03-17")).unwrap()], 1.0);
        assert_eq!(ts.values()[ts.index_of(d("2020-04-01")).unwrap()], 1.0);
        assert_eq!(ts.values()[ts.index_of(d("2020-03-18")).unwrap()], 0.0);

        let empty = make_dummy("D", d("2020-02-25"), d("2020-03-01"), &BTreeSet::new()).unwrap();
        assert!(empty.values().iter().all(|&v| v == 0.0));

        let outside: BTreeSet<_> = [d("2021-01-01")].into_iter().collect();
        assert!(make_dummy("D", d("2020-02-25"), d("2020-03-01"), &outside).is_err());
    }

    fn panel() -> Vec<TimeSeries> {
        let start = d("2020-01-01");
        ["C", "R", "E", "SMV", "D"]
            .iter()
            .enumerate()
            .map(|(j, n)| TimeSeries::new(*n, start, (0..30).map(|i| (i * (j + 1)) as f64).collect()))
            .collect()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn assemble_base_and_bivariate() {
        let cols = panel();
        let ds = assemble_dataset(
            &cols,
            &names(&["C", "R", "E", "SMV"]),
            &names(&["D"]),
            d("2020-01-05"),
            d("2020-01-20"),
        )
        .unwrap();
        assert_eq!(ds.endogenous_names(), names(&["C", "R", "E", "SMV"]));
        assert_eq!(ds.exogenous_names(), names(&["D"]));
        assert_eq!(ds.len(), 16);
        assert_eq!(ds.column("R").unwrap().series.values()[0], 8.0);

        let bi = assemble_dataset(&cols, &names(&["SMV", "C"]), &[], d("2020-01-01"), d("2020-01-30")).unwrap();
        assert_eq!(bi.endogenous_names(), names(&["SMV", "C"]));
        assert_eq!(bi.columns.len(), 2);
    }

    #[test]
    fn assemble_errors() {
        let cols = panel();
        let r = (d("2020-01-01"), d("2020-01-10"));
        assert!(matches!(
            assemble_dataset(&cols, &names(&["C", "X"]), &[], r.0, r.1),
            Err(Error::UnknownName(_))
        ));
        assert!(assemble_dataset(&cols, &names(&["C", "C"]), &[], r.0, r.1).is_err());
        assert!(matches!(
            assemble_dataset(&cols, &names(&["C"]), &[], d("2019-12-01"), r.1),
            Err(Error::Alignment { .. })
        ));
        let mut dup = cols.clone();
        dup.push(cols[0].clone());
        assert!(assemble_dataset(&dup, &names(&["C"]), &[], r.0, r.1).is_err());
    }

    fn arb_raw() -> impl Strategy<Value = RawSeries> {
        proptest::collection::vec(proptest::option::weighted(0.6, -1e3f64..1e3), 1..60).prop_map(|cells| {
            let start = parse_date("2020-01-01").unwrap();
            let mut observations: Vec<_> =
                cells.into_iter().enumerate().map(|(i, v)| (add_days(start, i), v)).collect();
            // guarantee the first day is observed
            if observations[0].1.is_none() {
                observations[0].1 = Some(1.0);
            }
            RawSeries { name: "x".into(), observations }
        })
    }

    proptest! {
        #[test]
        fn alignment_is_idempotent(r in arb_raw()) {
            let start = r.observations[0].0;
            let end = r.observations.last().unwrap().0;
            let once = align_daily(&r, start, end).unwrap();
            let twice = align_daily(&once.to_raw(), start, end).unwrap();
            prop_assert_eq!(&once, &twice);
        }

        #[test]
        fn carry_forward_never_invents(r in arb_raw()) {
            let start = r.observations[0].0;
            let end = r.observations.last().unwrap().0;
            let ts = align_daily(&r, start, end).unwrap();
            for (i, &v) in ts.values().iter().enumerate() {
                let day = ts.date_at(i);
                prop_assert!(r.observed().any(|(dd, ov)| dd <= day && ov == v));
            }
        }

        #[test]
        fn transform_roundtrips(xs in proptest::collection::vec(1e-3f64..1e6, 2..80)) {
            let ts = TimeSeries::new("x", parse_date("2020-01-01").unwrap(), xs.clone());
            let back: Vec<f64> = log_transform(&ts).unwrap().values().iter().map(|v| v.exp()).collect();
            for (a, b) in back.iter().zip(&xs) {
                prop_assert!(((a - b) / b).abs() < 1e-12);
            }
            let diff = first_difference(&ts).unwrap();
            // summation error is bounded by the largest magnitude seen
            let scale = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut acc = xs[0];
            for (dv, &x) in diff.values().iter().zip(&xs[1..]) {
                acc += dv;
                prop_assert!((acc - x).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn dataset_order_follows_config(perm in Just(vec!["C", "R", "E", "SMV"]).prop_shuffle()) {
            let cols = panel();
            let order = names(&perm);
            let ds = assemble_dataset(&cols, &order, &names(&["D"]), parse_date("2020-01-01").unwrap(), parse_date("2020-01-30").unwrap()).unwrap();
            prop_assert_eq!(ds.endogenous_names(), order);
            prop_assert_eq!(ds.columns.len(), 5);
        }
    }
}
