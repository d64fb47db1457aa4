//! Dataset ingestion, run configuration, model persistence and result export.
//!
//! Cohort files are UTF-8 CSV with header columns `time`, `status` (0/1),
//! `cause` (0/1/2) followed by numeric covariate columns; censored rows use
//! the `status=0, cause=0` sentinel pair. Model artifacts are versioned JSON
//! documents with trees encoded as nested node records and an integrity
//! checksum over the payload.

use crate::crisk::{CriskFitM1, CriskFitM2, FittedModel};
use crate::discrete::{CompetingRisksRecord, EventStatus, TimeGrid};
use crate::eval::{MetricTable, SEED_RULE};
use crate::probit::{McmcConfig, ProbitFit};
use crate::data::Matrix;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Current model artifact format version.
pub const ARTIFACT_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Cohort CSV
// ---------------------------------------------------------------------------

/// Parse a cohort CSV into records plus the covariate column names (column
/// order becomes covariate index order).
pub fn read_cohort_csv(path: &Path) -> Result<(Vec<CompetingRisksRecord>, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let required = ["time", "status", "cause"];
    for (i, name) in required.iter().enumerate() {
        if headers.get(i).map(String::as_str) != Some(*name) {
            return Err(Error::invalid(format!(
                "cohort file must start with columns time,status,cause; found {:?}",
                headers
            )));
        }
    }
    let covariate_names: Vec<String> = headers[3..].to_vec();
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row?;
        let line = idx + 2; // header is line 1
        let parse_num = |field: usize, name: &str| -> Result<f64> {
            row.get(field)
                .ok_or_else(|| Error::invalid(format!("row {line}: missing column {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| {
                    Error::invalid(format!(
                        "row {line}: non-numeric value '{}' in column {name}",
                        row.get(field).unwrap_or("")
                    ))
                })
        };
        let time = parse_num(0, "time")?;
        let status = parse_num(1, "status")?;
        let cause = parse_num(2, "cause")?;
        if status != 0.0 && status != 1.0 {
            return Err(Error::invalid(format!("row {line}: status must be 0 or 1")));
        }
        if ![0.0, 1.0, 2.0].contains(&cause) {
            return Err(Error::invalid(format!("row {line}: cause must be 0, 1 or 2")));
        }
        let status = EventStatus::from_status_cause(status as u8, cause as u8)
            .map_err(|e| Error::invalid(format!("row {line}: {e}")))?;
        let mut covariates = Vec::with_capacity(covariate_names.len());
        for (k, name) in covariate_names.iter().enumerate() {
            covariates.push(parse_num(3 + k, name)?);
        }
        records.push(
            CompetingRisksRecord::new(time, status, covariates)
                .map_err(|e| Error::invalid(format!("row {line}: {e}")))?,
        );
    }
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    Ok((records, covariate_names))
}

pub fn write_cohort_csv(
    path: &Path,
    records: &[CompetingRisksRecord],
    covariate_names: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "status".to_string(), "cause".to_string()];
    header.extend_from_slice(covariate_names);
    w.write_record(&header)?;
    for r in records {
        let (status, cause) = r.status.to_status_cause();
        let mut row = vec![format!("{}", r.time), status.to_string(), cause.to_string()];
        row.extend(r.covariates.iter().map(|v| format!("{v}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a covariate-only CSV (for prediction); when `expected` is given the
/// header must match the training covariate names exactly.
pub fn read_covariates_csv(path: &Path, expected: Option<&[String]>) -> Result<(Matrix, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if let Some(expected) = expected {
        if headers != expected {
            return Err(Error::invalid(format!(
                "covariate columns {:?} do not match the model's {:?}",
                headers, expected
            )));
        }
    }
    let mut rows = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row?;
        let line = idx + 2;
        let mut vals = Vec::with_capacity(headers.len());
        for (k, name) in headers.iter().enumerate() {
            let v = row
                .get(k)
                .ok_or_else(|| Error::invalid(format!("row {line}: missing column {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("row {line}: non-numeric {name}")))?;
            vals.push(v);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::invalid("no records"));
    }
    Ok((Matrix::from_rows(&rows)?, headers))
}

// ---------------------------------------------------------------------------
// Model artifact
// ---------------------------------------------------------------------------

/// Persisted model: both sub-fits, the grid, the config echo and data
/// provenance. `load(save(fit))` reproduces identical predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub method: String,
    pub grid: TimeGrid,
    /// Covariate names in training order (excluding the time coordinate).
    pub covariates: Vec<String>,
    pub config: McmcConfig,
    pub coarsen_unit: Option<f64>,
    /// SHA-256 of the training cohort file.
    pub data_sha256: String,
    pub first_fit: ProbitFit,
    pub second_fit: ProbitFit,
}

#[derive(Serialize, Deserialize)]
struct ArtifactEnvelope<'a> {
    format_version: u32,
    payload_sha256: String,
    #[serde(borrow)]
    payload: &'a serde_json::value::RawValue,
}

impl ModelArtifact {
    pub fn from_fit(
        fit: &FittedModel,
        covariates: Vec<String>,
        config: McmcConfig,
        coarsen_unit: Option<f64>,
        data_sha256: String,
    ) -> Self {
        let (method, first, second, grid) = match fit {
            FittedModel::M1(f) => ("m1", &f.fit_any, &f.fit_cause, f.grid.clone()),
            FittedModel::M2(f) => ("m2", &f.fit_cause1, &f.fit_cause2, f.grid.clone()),
        };
        ModelArtifact {
            method: method.to_string(),
            grid,
            covariates,
            config,
            coarsen_unit,
            data_sha256,
            first_fit: first.clone(),
            second_fit: second.clone(),
        }
    }

    pub fn to_fit(&self) -> Result<FittedModel> {
        match self.method.as_str() {
            "m1" => Ok(FittedModel::M1(CriskFitM1::new(
                self.first_fit.clone(),
                self.second_fit.clone(),
                self.grid.clone(),
            )?)),
            "m2" => Ok(FittedModel::M2(CriskFitM2::new(
                self.first_fit.clone(),
                self.second_fit.clone(),
                self.grid.clone(),
            )?)),
            other => Err(Error::Artifact(format!("unknown method '{other}'"))),
        }
    }
}

/// Serialize the artifact deterministically: a fixed-order envelope holding
/// the format version, a SHA-256 of the payload bytes, and the payload.
pub fn save_model(artifact: &ModelArtifact, path: &Path) -> Result<()> {
    let payload = serde_json::to_string(artifact)?;
    let digest = sha256_hex(payload.as_bytes());
    let document = format!(
        "{{\"format_version\":{ARTIFACT_VERSION},\"payload_sha256\":\"{digest}\",\"payload\":{payload}}}"
    );
    std::fs::write(path, document)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    let text = std::fs::read_to_string(path)?;
    let envelope: ArtifactEnvelope = serde_json::from_str(&text)
        .map_err(|e| Error::Artifact(format!("unreadable model file: {e}")))?;
    if envelope.format_version != ARTIFACT_VERSION {
        return Err(Error::Artifact(format!(
            "format version {} not supported (expected {ARTIFACT_VERSION})",
            envelope.format_version
        )));
    }
    let payload = envelope.payload.get();
    let digest = sha256_hex(payload.as_bytes());
    if digest != envelope.payload_sha256 {
        return Err(Error::Artifact(format!(
            "checksum failure: payload hashes to {digest}, file records {}",
            envelope.payload_sha256
        )));
    }
    Ok(serde_json::from_str(payload)?)
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Optional key=value config file (TOML syntax, `[mcmc]` and `[run]`
/// sections). Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub trees: Option<usize>,
    pub kappa: Option<f64>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub draws: Option<usize>,
    pub chains: Option<usize>,
    pub dart: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub method: Option<String>,
    pub coarsen: Option<f64>,
    pub credible_level: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overlay the file's MCMC settings onto defaults.
    pub fn mcmc_config(&self, base: McmcConfig) -> McmcConfig {
        McmcConfig {
            trees: self.mcmc.trees.unwrap_or(base.trees),
            kappa: self.mcmc.kappa.unwrap_or(base.kappa),
            burn_in: self.mcmc.burn_in.unwrap_or(base.burn_in),
            thin: self.mcmc.thin.unwrap_or(base.thin),
            draws: self.mcmc.draws.unwrap_or(base.draws),
            chains: self.mcmc.chains.unwrap_or(base.chains),
            seed: self.run.seed.unwrap_or(base.seed),
            dart: self.mcmc.dart.unwrap_or(base.dart),
        }
    }
}

// ---------------------------------------------------------------------------
// Result export
// ---------------------------------------------------------------------------

/// Write the metric table: one row per (method, group, quantile) cell with
/// `F_1` and `S` metrics as columns.
pub fn write_metric_csv(table: &MetricTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method",
        "group",
        "quantile",
        "eval_time",
        "truth_f1",
        "truth_s",
        "f1_bias",
        "f1_rmse",
        "f1_coverage",
        "f1_width",
        "s_bias",
        "s_rmse",
        "s_coverage",
        "s_width",
        "replicates",
        "failures",
        "master_seed",
        "seed_rule",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for row in &table.rows {
        let failures = table
            .failures
            .iter()
            .find(|(m, _)| *m == row.method)
            .map(|(_, c)| *c)
            .unwrap_or(0);
        w.write_record([
            row.method.label().to_string(),
            format!("{}", row.group),
            format!("{}", row.quantile),
            format!("{}", row.eval_time),
            format!("{}", row.truth_f1),
            format!("{}", row.truth_s),
            format!("{}", row.f1.bias),
            format!("{}", row.f1.rmse),
            opt(row.f1.coverage),
            opt(row.f1.width),
            format!("{}", row.s.bias),
            format!("{}", row.s.rmse),
            opt(row.s.coverage),
            opt(row.s.width),
            format!("{}", row.replicates),
            format!("{failures}"),
            format!("{}", table.master_seed),
            SEED_RULE.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready long format: quantile on x, metric value on y, method as
/// series, one row per (cell, functional, metric).
pub fn write_metric_long_csv(table: &MetricTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "group", "quantile", "target", "metric", "value"])?;
    for row in &table.rows {
        for (target, set) in [("f1", &row.f1), ("s", &row.s)] {
            let mut cells: Vec<(&str, f64)> =
                vec![("bias", set.bias), ("rmse", set.rmse)];
            if let Some(c) = set.coverage {
                cells.push(("coverage", c));
            }
            if let Some(wd) = set.width {
                cells.push(("width", wd));
            }
            for (metric, value) in cells {
                w.write_record([
                    row.method.label(),
                    &format!("{}", row.group),
                    &format!("{}", row.quantile),
                    target,
                    metric,
                    &format!("{value}"),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crisk::{cif, fit_m1, CompetingRisksFit};
    use crate::discrete::Cause;
    use crate::simgen::{generate, Scenario, ScenarioConfig};
    use tempfile::tempdir;

    fn toy_csv(dir: &Path) -> std::path::PathBuf {
        let path = dir.join("cohort.csv");
        std::fs::write(
            &path,
            "time,status,cause,age\n2.5,1,1,40\n1.5,1,2,50\n3,0,0,60\n",
        )
        .unwrap();
        path
    }

    #[test]
    fn cohort_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = toy_csv(dir.path());
        let (records, names) = read_cohort_csv(&path).unwrap();
        assert_eq!(names, vec!["age"]);
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].status, EventStatus::Event(Cause::Cause1));
        assert_eq!(records[1].status, EventStatus::Event(Cause::Cause2));
        assert_eq!(records[2].status, EventStatus::Censored);
        assert_eq!(records[2].covariates, vec![60.0]);

        let out = dir.path().join("back.csv");
        write_cohort_csv(&out, &records, &names).unwrap();
        let (again, names2) = read_cohort_csv(&out).unwrap();
        assert_eq!(records, again);
        assert_eq!(names, names2);
    }

    #[test]
    fn cohort_csv_errors_carry_row_numbers() {
        let dir = tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "time,status,cause\n").unwrap();
        let err = read_cohort_csv(&empty).unwrap_err();
        assert!(err.to_string().contains("no records"));

        let bad_cause = dir.path().join("bad.csv");
        std::fs::write(&bad_cause, "time,status,cause\n1.0,1,0\n").unwrap();
        let err = read_cohort_csv(&bad_cause).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");

        let non_numeric = dir.path().join("nn.csv");
        std::fs::write(&non_numeric, "time,status,cause,x\n1.0,1,1,abc\n").unwrap();
        let err = read_cohort_csv(&non_numeric).unwrap_err();
        assert!(err.to_string().contains("row 2") && err.to_string().contains('x'), "{err}");

        let missing = dir.path().join("missing.csv");
        std::fs::write(&missing, "time,cause,status\n1.0,1,1\n").unwrap();
        assert!(read_cohort_csv(&missing).is_err());
    }

    fn small_fit() -> (FittedModel, McmcConfig) {
        let cohort = generate(&ScenarioConfig {
            scenario: Scenario::WeibullShapes { beta1: 0.0, beta2: 0.0, p0: 0.5, gamma0: 2.0 },
            n: 50,
            censor_target: Some(0.2),
            seed: 4,
        })
        .unwrap();
        let cfg = McmcConfig {
            trees: 5,
            burn_in: 10,
            thin: 1,
            draws: 12,
            seed: 5,
            ..McmcConfig::default()
        };
        (FittedModel::M1(fit_m1(&cohort.records, &cfg).unwrap()), cfg)
    }

    #[test]
    fn model_artifact_round_trip_and_integrity() {
        let dir = tempdir().unwrap();
        let (fit, cfg) = small_fit();
        let artifact = ModelArtifact::from_fit(
            &fit,
            vec!["group".into()],
            cfg,
            None,
            "deadbeef".into(),
        );
        let path = dir.path().join("model.json");
        save_model(&artifact, &path).unwrap();
        let path2 = dir.path().join("model2.json");
        save_model(&artifact, &path2).unwrap();
        // Byte-identical serialization.
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());

        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, artifact);
        let model = loaded.to_fit().unwrap();
        let a = cif(&fit, &[1.0], Cause::Cause1).unwrap();
        let b = cif(&model, &[1.0], Cause::Cause1).unwrap();
        for d in 0..a.n_draws() {
            for j in 0..a.times.len() {
                assert_eq!(a.draws.get(d, j), b.draws.get(d, j));
            }
        }

        // Truncation breaks the load with no partial artifact.
        let bytes = std::fs::read(&path).unwrap();
        let truncated = dir.path().join("trunc.json");
        std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_model(&truncated), Err(Error::Artifact(_))));

        // Payload tampering is caught by the checksum.
        let text = String::from_utf8(bytes).unwrap();
        let tampered = text.replacen("\"m1\"", "\"m2\"", 1);
        let tpath = dir.path().join("tampered.json");
        std::fs::write(&tpath, tampered).unwrap();
        let err = load_model(&tpath).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");

        // A version bump is rejected with an explicit message.
        let futuristic = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        let vpath = dir.path().join("v2.json");
        std::fs::write(&vpath, futuristic).unwrap();
        let err = load_model(&vpath).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn artifact_grid_and_dims_survive() {
        let (fit, cfg) = small_fit();
        let artifact =
            ModelArtifact::from_fit(&fit, vec!["group".into()], cfg, Some(0.1), "x".into());
        let model = artifact.to_fit().unwrap();
        assert_eq!(model.n_covariates(), 1);
        assert_eq!(model.grid().times(), fit.grid().times());
        assert_eq!(model.method_label(), "m1");
    }

    #[test]
    fn config_file_parsing() {
        let cfg = ConfigFile::parse(
            "[mcmc]\ntrees = 50\ndraws = 100\n\n[run]\nseed = 7\nmethod = \"m2\"\n",
        )
        .unwrap();
        let mcmc = cfg.mcmc_config(McmcConfig::default());
        assert_eq!(mcmc.trees, 50);
        assert_eq!(mcmc.draws, 100);
        assert_eq!(mcmc.seed, 7);
        assert_eq!(mcmc.burn_in, 100);
        assert_eq!(cfg.run.method.as_deref(), Some("m2"));

        // Unknown keys are rejected.
        assert!(ConfigFile::parse("[mcmc]\ntrees = 50\nbanana = 1\n").is_err());
        assert!(ConfigFile::parse("[fruit]\nkind = \"kiwi\"\n").is_err());
    }

    #[test]
    fn metric_csv_parses_back() {
        use crate::eval::{run_replicates, BenchMethod, BenchSpec};
        let dir = tempdir().unwrap();
        let spec = BenchSpec {
            scenario: ScenarioConfig {
                scenario: Scenario::ProportionalCauseHazards {
                    lambda01: 1.0,
                    lambda02: 1.0,
                    beta1: 0.0,
                    beta2: 0.0,
                },
                n: 200,
                censor_target: None,
                seed: 3,
            },
            methods: vec![BenchMethod::AalenJohansen],
            replicates: 3,
            quantiles: vec![0.3, 0.5],
            ..BenchSpec::default()
        };
        let table = run_replicates(&spec).unwrap();
        let path = dir.path().join("metrics.csv");
        write_metric_csv(&table, &path).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), table.rows.len());
        // Numeric cells parse back.
        for row in &rows {
            row.get(6).unwrap().parse::<f64>().unwrap();
            assert_eq!(row.get(8).unwrap(), ""); // no coverage for AJ
        }
        let long = dir.path().join("long.csv");
        write_metric_long_csv(&table, &long).unwrap();
        let mut reader = csv::Reader::from_path(&long).unwrap();
        // 2 groups x 2 quantiles x 2 targets x 2 metrics (bias, rmse).
        assert_eq!(reader.records().count(), 16);
    }
}
