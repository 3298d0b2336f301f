use std::path::PathBuf;
use std::sync::Arc;

use super::{PipelineConfig, StageKind};
use crate::{Error, Result};

/// A file a stage produced, to be persisted by the controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) -> Self {
        Self { path: path.into(), bytes: bytes.into() }
    }
}

/// A file a stage reads. `produced_by` names the earlier stage that writes it;
/// `None` marks an external input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub path: PathBuf,
    pub produced_by: Option<StageKind>,
}

/// Engine side of a stage: reads its inputs and returns its outputs. It must
/// not write the outputs itself and must be deterministic in its inputs.
pub trait StageComponent: Send + Sync {
    fn name(&self) -> &str;

    fn inputs(&self, config: &PipelineConfig) -> Vec<Input>;

    fn run(&self, config: &PipelineConfig) -> Result<Vec<Artifact>>;
}

/// Components by stage, in registration order. Immutable once shared.
#[derive(Default, Clone)]
pub struct Registry {
    stages: [Vec<Arc<dyn StageComponent>>; 4],
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, stage: StageKind, component: Arc<dyn StageComponent>) -> Result<()> {
        let slot = &mut self.stages[stage.ordinal()];
        if slot.iter().any(|c| c.name() == component.name()) {
            return Err(Error::DuplicateName { stage, name: component.name().to_string() });
        }
        slot.push(component);
        Ok(())
    }

    /// Builder-style [`Registry::register`].
    pub fn with(mut self, stage: StageKind, component: Arc<dyn StageComponent>) -> Result<Self> {
        self.register(stage, component)?;
        Ok(self)
    }

    pub fn get(&self, stage: StageKind, name: &str) -> Option<Arc<dyn StageComponent>> {
        self.stages[stage.ordinal()].iter().find(|c| c.name() == name).cloned()
    }

    /// The first component registered for `stage`.
    pub fn default_for(&self, stage: StageKind) -> Option<Arc<dyn StageComponent>> {
        self.stages[stage.ordinal()].first().cloned()
    }

    pub fn names(&self, stage: StageKind) -> Vec<&str> {
        self.stages[stage.ordinal()].iter().map(|c| c.name()).collect()
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for stage in StageKind::ALL {
            m.entry(&stage, &self.names(stage));
        }
        m.finish()
    }
}
