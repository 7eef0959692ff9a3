use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::PromptError;

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/prompts/", $name, ".md")))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded![
    "intro",
    "frame",
    "workspace",
    "api_code",
    "api_numeric",
    "output_code",
    "output_numeric",
    "gripper_explicit_code",
    "gripper_binary_code",
    "gripper_explicit_numeric",
    "gripper_binary_numeric",
    "step_by_step_plan",
    "gripper_contact_step",
    "function_documentation",
    "reusable_functions",
    "numbered_step_variables",
    "collision_avoidance",
    "clear_objects_phrase",
    "trajectory_shape_description",
    "object_part_description",
    "success",
    "verdict_retry",
    "summary_request",
    "summary_section",
];

/// Prompt component texts keyed by file stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptLibrary {
    texts: BTreeMap<String, String>,
}

impl Default for PromptLibrary {
    fn default() -> Self {
        Self::embedded()
    }
}

impl PromptLibrary {
    /// The texts shipped in the crate's `prompts/` directory.
    pub fn embedded() -> Self {
        Self {
            texts: EMBEDDED
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Loads `<name>.md` for every component from `dir`; all must be present.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut texts = BTreeMap::new();
        for (name, _) in EMBEDDED {
            let path = dir.join(format!("{name}.md"));
            let text = fs::read_to_string(&path)
                .map_err(|e| PromptError::Missing(format!("{}: {e}", path.display())))?;
            texts.insert(name.to_string(), text);
        }
        Ok(Self { texts })
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        EMBEDDED.iter().map(|(k, _)| *k)
    }

    pub fn get(&self, name: &str) -> Result<&str, PromptError> {
        self.texts
            .get(name)
            .map(|s| s.trim())
            .ok_or_else(|| PromptError::Missing(name.to_string()))
    }
}
