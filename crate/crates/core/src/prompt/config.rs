use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::parser::{GripperMode, OutputMode};

/// Optional components of the main prompt, each removable on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    StepByStepPlan,
    GripperContactStep,
    FunctionDocumentation,
    ReusableFunctions,
    NumberedStepVariables,
    CollisionAvoidance,
    ClearObjectsPhrase,
    TrajectoryShapeDescription,
    ObjectPartDescription,
}

impl Flag {
    pub const ALL: [Flag; 9] = [
        Flag::StepByStepPlan,
        Flag::GripperContactStep,
        Flag::FunctionDocumentation,
        Flag::ReusableFunctions,
        Flag::NumberedStepVariables,
        Flag::CollisionAvoidance,
        Flag::ClearObjectsPhrase,
        Flag::TrajectoryShapeDescription,
        Flag::ObjectPartDescription,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flag::StepByStepPlan => "step_by_step_plan",
            Flag::GripperContactStep => "gripper_contact_step",
            Flag::FunctionDocumentation => "function_documentation",
            Flag::ReusableFunctions => "reusable_functions",
            Flag::NumberedStepVariables => "numbered_step_variables",
            Flag::CollisionAvoidance => "collision_avoidance",
            Flag::ClearObjectsPhrase => "clear_objects_phrase",
            Flag::TrajectoryShapeDescription => "trajectory_shape_description",
            Flag::ObjectPartDescription => "object_part_description",
        }
    }

    pub fn from_name(name: &str) -> Option<Flag> {
        Flag::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Components that only make sense when the model writes code.
    pub fn code_only(self) -> bool {
        matches!(
            self,
            Flag::FunctionDocumentation | Flag::ReusableFunctions | Flag::NumberedStepVariables
        )
    }

    /// Flags that cannot stay on when this one is off.
    pub fn dependents(self) -> &'static [Flag] {
        match self {
            Flag::CollisionAvoidance => &[Flag::ClearObjectsPhrase],
            _ => &[],
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the main prompt goes in the conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptPlacement {
    /// One user message holding the prompt followed by the instruction.
    #[default]
    User,
    /// The prompt as a system message, the instruction as the user message.
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptConfig {
    /// Components switched off; everything else is on.
    #[serde(default)]
    pub disabled: BTreeSet<Flag>,
    #[serde(default)]
    pub output_mode: OutputMode,
    #[serde(default)]
    pub gripper_mode: GripperMode,
    #[serde(default)]
    pub placement: PromptPlacement,
}

impl PromptConfig {
    /// Every component on.
    pub fn full(output_mode: OutputMode, gripper_mode: GripperMode) -> Self {
        Self {
            output_mode,
            gripper_mode,
            ..Self::default()
        }
    }

    pub fn is_on(&self, flag: Flag) -> bool {
        !self.disabled.contains(&flag)
    }

    /// Turns `flag` off together with any flag that depends on it.
    pub fn without(mut self, flag: Flag) -> Self {
        self.disabled.insert(flag);
        self.disabled.extend(flag.dependents().iter().copied());
        self
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for flag in Flag::ALL {
            if !self.is_on(flag) {
                if let Some(dep) = flag.dependents().iter().find(|d| self.is_on(**d)) {
                    return Err(PromptError::Config(format!("{dep} requires {flag}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in Flag::ALL {
            assert_eq!(Flag::from_name(f.name()), Some(f));
        }
        assert_eq!(Flag::from_name("nope"), None);
    }

    #[test]
    fn phrase_requires_collision_section() {
        let mut cfg = PromptConfig::default();
        cfg.disabled.insert(Flag::CollisionAvoidance);
        assert!(cfg.validate().is_err());
        assert!(PromptConfig::default().without(Flag::CollisionAvoidance).validate().is_ok());
    }
}
