use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::PressureEstimate;

/// One estimate and what it was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub system: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(flatten)]
    pub estimate: PressureEstimate,
}

/// Everything a compute run writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub seed: u64,
    pub records: Vec<ResultRecord>,
}

impl ResultFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("line {} column {}: {e}", e.line(), e.column())))
    }
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// Stage values as rate curves, one CSV text per quantity name.
///
/// Records without stages contribute a single row holding the final value.
pub fn rate_curves(records: &[ResultRecord]) -> Result<BTreeMap<String, String>> {
    let mut writers: BTreeMap<String, csv::Writer<Vec<u8>>> = BTreeMap::new();
    for r in records {
        let name = r.estimate.quantity.name().to_string();
        let w = writers.entry(name).or_insert_with(|| {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["system", "set", "measure", "m", "delta", "n", "depth", "value", "bound_kind"]).expect("in-memory write");
            w
        });
        let set = r.set.clone().unwrap_or_default();
        let measure = r.measure.clone().unwrap_or_default();
        let kind = |k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let mut rows = Vec::new();
        if r.estimate.stages.is_empty() {
            rows.push(vec![
                r.system.clone(),
                set.clone(),
                measure.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                cell(r.estimate.value),
                kind(r.estimate.bound_kind),
            ]);
        }
        for s in &r.estimate.stages {
            rows.push(vec![
                r.system.clone(),
                set.clone(),
                measure.clone(),
                s.m.to_string(),
                s.delta.map(cell).unwrap_or_default(),
                s.n.to_string(),
                s.depth.to_string(),
                cell(s.value),
                kind(s.bound_kind),
            ]);
        }
        for row in rows {
            w.write_record(&row).map_err(|e| Error::Input(e.to_string()))?;
        }
    }
    writers
        .into_iter()
        .map(|(q, w)| {
            let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
            Ok((q, String::from_utf8(bytes).expect("csv is utf-8")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BoundKind;
    use crate::estimate::{Quantity, StageRecord};

    fn record(q: Quantity, stages: Vec<StageRecord>) -> ResultRecord {
        let mut e = PressureEstimate::empty_set(q, "test");
        e.stages = stages;
        ResultRecord { system: "s".into(), set: Some("Z".into()), measure: None, estimate: e }
    }

    #[test]
    fn json_round_trip_keeps_infinities() {
        let f = ResultFile { seed: 7, records: vec![record(Quantity::Packing, vec![])] };
        let text = f.to_json();
        assert!(text.contains("\"-inf\""));
        assert_eq!(ResultFile::from_json(&text).unwrap(), f);
    }

    #[test]
    fn one_csv_per_quantity() {
        let st = StageRecord { m: 2, delta: Some(0.5), n: 8, depth: 10, value: 0.7, bound_kind: BoundKind::Bracketed };
        let recs = vec![record(Quantity::Bowen, vec![st.clone(), st]), record(Quantity::Packing, vec![])];
        let csv = rate_curves(&recs).unwrap();
        assert_eq!(csv.len(), 2);
        assert_eq!(csv["bowen"].lines().count(), 3);
        assert!(csv["bowen"].lines().nth(1).unwrap().starts_with("s,Z,,2,0.5,8,10,0.7,"));
        assert!(csv["packing"].contains("-inf"));
    }
}
