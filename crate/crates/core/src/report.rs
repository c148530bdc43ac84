//! Versioned JSON run reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certifier::{ScanTable, StabilityCertificate};
use crate::error::{Error, Result};
use crate::oracle::SymbolAnalysis;
use crate::scalar::PNorm;
use crate::worked_example::WorkedExample;

pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PNorm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmin: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunResult {
    Certify {
        certificates: Vec<StabilityCertificate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<SymbolAnalysis>,
    },
    Scan {
        table: ScanTable,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<SymbolAnalysis>,
    },
    Oracle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<SymbolAnalysis>,
        /// `(N, lower bound)` of the finite sections at `p = 2`.
        trend: Vec<(u64, f64)>,
    },
    PaperExamples(WorkedExample),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Value>,
    pub params: Params,
    pub result: RunResult,
    pub verdict: String,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, spec: Option<Value>, params: Params, result: RunResult, verdict: &str) -> Self {
        RunReport {
            format: REPORT_FORMAT,
            tool: "stabilcert".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            spec,
            params,
            result,
            verdict: verdict.into(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        if r.format != REPORT_FORMAT {
            return Err(Error::parse("$.format", format!("unsupported report format {}", r.format)));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::certify_condition_iii;
    use crate::operator::OperatorSpec;
    use crate::oracle::certified_symbol_analysis;
    use crate::spec_io::spec_to_value;

    #[test]
    fn certify_report_round_trips() {
        let spec = OperatorSpec::toeplitz([(0, 4.0), (1, 1.0)]);
        let cert = certify_condition_iii(&spec, PNorm::Two, 8).unwrap();
        let symbol = certified_symbol_analysis(spec.coeffs().unwrap());
        let mut r = RunReport::new(
            "certify",
            Some(spec_to_value(&spec)),
            Params {
                p: Some(PNorm::Two),
                n0: Some(8),
                ..Params::default()
            },
            RunResult::Certify {
                certificates: vec![cert],
                symbol: Some(symbol),
            },
            "CertifiedStable",
        );
        r.elapsed_seconds = 0.123456789;
        let text = r.to_json().unwrap();
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), text);
        assert!(text.contains("\"format\": 1"));
    }

    #[test]
    fn wrong_format_is_rejected() {
        let r = RunReport::new("oracle", None, Params::default(), RunResult::Oracle { symbol: None, trend: vec![] }, "Inconclusive");
        let text = r.to_json().unwrap().replace("\"format\": 1", "\"format\": 2");
        assert!(matches!(RunReport::from_json(&text), Err(Error::Parse { .. })));
    }
}
