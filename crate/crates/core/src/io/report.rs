//! Evaluation reports: one CSV row per shoe, then `#summary` lines.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metric::{aggregate, Category, EvalRecord, EvalSummary, MatchParams};
use crate::{Error, Result};

use super::correspondences::csv_error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub shoe_id: String,
    pub category: Category,
    pub iou: Option<f64>,
    pub s: Option<f64>,
    pub t_nc: Option<f64>,
    pub t_c: Option<f64>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn ok(shoe_id: &str, category: Category, iou: f64, params: MatchParams) -> Self {
        ReportRow {
            shoe_id: shoe_id.to_string(),
            category,
            iou: Some(iou),
            s: params.s,
            t_nc: params.t_nc,
            t_c: params.t_c,
            error: None,
        }
    }

    pub fn failed(shoe_id: &str, category: Category, error: impl ToString) -> Self {
        ReportRow {
            shoe_id: shoe_id.to_string(),
            category,
            iou: None,
            s: None,
            t_nc: None,
            t_c: None,
            error: Some(error.to_string()),
        }
    }

    pub fn record(&self) -> Option<EvalRecord> {
        let iou = self.iou?;
        let mut r = EvalRecord::new(self.shoe_id.clone(), self.category, iou);
        r.params = MatchParams {
            s: self.s,
            t_nc: self.t_nc,
            t_c: self.t_c,
        };
        Some(r)
    }
}

/// Summary over the rows without errors; `None` when every row failed.
pub fn summarize(rows: &[ReportRow]) -> Result<Option<EvalSummary>> {
    let records: Vec<EvalRecord> = rows.iter().filter_map(ReportRow::record).collect();
    if records.is_empty() {
        return Ok(None);
    }
    aggregate(&records).map(Some)
}

pub fn report_to_string(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::data(e.to_string()))?;
    }
    let mut out = String::from_utf8(w.into_inner().map_err(|e| Error::data(e.to_string()))?).expect("utf8 csv");
    if rows.is_empty() {
        out.push_str("shoe_id,category,iou,s,t_nc,t_c,error\n");
    }
    out.push_str("#summary,group,count,mean_iou\n");
    if let Some(s) = summarize(rows)? {
        for c in Category::ALL {
            match s.categories.get(&c) {
                Some(st) => writeln!(out, "#summary,{},{},{}", c.as_str(), st.count, st.mean_iou).unwrap(),
                None => writeln!(out, "#summary,{},0,", c.as_str()).unwrap(),
            }
        }
        writeln!(out, "#summary,overall,{},{}", s.count, s.mean_iou).unwrap();
    }
    Ok(out)
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    std::fs::write(path, report_to_string(rows)?).map_err(|e| Error::io(path, e))
}

/// Summary block of a report as `(group, count, mean)`.
pub type SummaryLine = (String, usize, Option<f64>);

pub fn parse_report(text: &str, origin: &Path) -> Result<(Vec<ReportRow>, Vec<SummaryLine>)> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = rdr
        .deserialize()
        .map(|r| r.map_err(|e| csv_error(origin, e)))
        .collect::<Result<Vec<ReportRow>>>()?;
    let mut summary = Vec::new();
    for line in text.lines().filter_map(|l| l.strip_prefix("#summary,")) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 || f[0] == "group" {
            continue;
        }
        let count = f[1].parse().map_err(|_| Error::format(origin, format!("bad summary count {:?}", f[1])))?;
        let mean = if f[2].is_empty() {
            None
        } else {
            Some(f[2].parse().map_err(|_| Error::format(origin, format!("bad summary mean {:?}", f[2])))?)
        };
        summary.push((f[0].to_string(), count, mean));
    }
    Ok((rows, summary))
}

pub fn read_report(path: &Path) -> Result<(Vec<ReportRow>, Vec<SummaryLine>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text, path)
}
