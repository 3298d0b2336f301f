use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};

use super::{validate_config, Artifact, PipelineConfig, Registry, StageKind};
use crate::error::IoContext;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRun {
    pub stage: StageKind,
    pub component: String,
    pub duration: Duration,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub started_at: DateTime<Utc>,
    pub config_digest: String,
    pub stages_run: Vec<StageRun>,
}

impl fmt::Display for RunManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "started_at = {}", self.started_at.to_rfc3339_opts(SecondsFormat::Micros, true))?;
        writeln!(f, "config_digest = {}", self.config_digest)?;
        for (i, run) in self.stages_run.iter().enumerate() {
            writeln!(f)?;
            writeln!(f, "[stage {}]", i + 1)?;
            writeln!(f, "kind = {}", run.stage)?;
            writeln!(f, "component = {}", run.component)?;
            writeln!(f, "duration_us = {}", run.duration.as_micros())?;
            for p in &run.inputs {
                writeln!(f, "input = {}", p.display())?;
            }
            for p in &run.outputs {
                writeln!(f, "output = {}", p.display())?;
            }
        }
        Ok(())
    }
}

/// Writes through a temporary sibling so readers never see a partial file.
fn persist(artifact: &Artifact) -> Result<()> {
    let path = &artifact.path;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).io_context(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, &artifact.bytes).io_context(&tmp)?;
    fs::rename(&tmp, path).io_context(path)
}

fn check_order(stages: &[StageKind]) -> Result<()> {
    for pair in stages.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::OrderViolation(format!(
                "{} requested after {}",
                pair[1], pair[0]
            )));
        }
    }
    Ok(())
}

/// Runs the requested stages with each stage's default component. Every
/// stage's artifacts are on disk before the next stage starts; the first
/// failure aborts the run and leaves earlier artifacts in place. The manifest
/// is written beside the report.
pub fn run_pipeline(config: &PipelineConfig, registry: &Registry, stages: &[StageKind]) -> Result<RunManifest> {
    check_order(stages)?;
    let problems = validate_config(config, stages);
    if !problems.is_empty() {
        let listed: Vec<String> = problems.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidConfig(listed.join("; ")));
    }
    let components = stages
        .iter()
        .map(|&s| registry.default_for(s).ok_or(Error::NoComponent(s)))
        .collect::<Result<Vec<_>>>()?;

    let mut manifest = RunManifest {
        started_at: Utc::now(),
        config_digest: config.digest(),
        stages_run: Vec::with_capacity(stages.len()),
    };
    for (&stage, component) in stages.iter().zip(&components) {
        let inputs = component.inputs(config);
        for input in &inputs {
            let Some(producer) = input.produced_by else { continue };
            let scheduled = stages.iter().any(|&s| s == producer && s < stage);
            if !scheduled && !input.path.exists() {
                return Err(Error::OrderViolation(format!(
                    "{stage} needs {} from {producer}, which is neither on disk nor requested",
                    input.path.display()
                )));
            }
        }
        let clock = Instant::now();
        let artifacts = component
            .run(config)
            .map_err(|cause| Error::StageFailure { stage, cause: Box::new(cause) })?;
        for artifact in &artifacts {
            persist(artifact).map_err(|cause| Error::StageFailure { stage, cause: Box::new(cause) })?;
        }
        manifest.stages_run.push(StageRun {
            stage,
            component: component.name().to_string(),
            duration: clock.elapsed().max(Duration::from_nanos(1)),
            inputs: inputs.into_iter().map(|i| i.path).collect(),
            outputs: artifacts.into_iter().map(|a| a.path).collect(),
        });
    }
    write_manifest(&manifest, &config.manifest_path())?;
    Ok(manifest)
}

pub(crate) fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut text = String::new();
    write!(text, "{manifest}").unwrap();
    persist(&Artifact::new(path, text))
}
