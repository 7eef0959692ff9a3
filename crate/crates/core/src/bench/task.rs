use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::checker::CheckerSpec;
use super::BenchError;
use crate::sim::TaskScene;

/// A benchmark task: the scene the model acts in plus its success criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    #[serde(flatten)]
    pub scene: TaskScene,
    pub checker: CheckerSpec,
    /// How a rigid stand-in departs from the real object or criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_notes: Option<String>,
}

impl Task {
    pub fn id(&self) -> &str {
        &self.scene.id
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.scene.validate().map_err(|e| BenchError::Catalog(e.to_string()))?;
        self.checker.validate()
    }
}

macro_rules! embedded_tasks {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/tasks/", $id, ".json")))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded_tasks![
    "pick_left_chip_bag",
    "pick_rightmost_can",
    "pick_middle_fruit",
    "pick_chip_bag_right_of_can",
    "knock_over_left_bottle",
    "move_right_fruit_to_bottle",
    "move_banana_near_pear",
    "push_left_bottle_to_orange",
    "move_can_to_bottom",
    "move_lonely_object",
    "push_can_right",
    "clean_can_with_sponge",
    "place_apple_in_bowl",
    "apple_from_bowl_to_table",
    "wipe_plate",
    "shake_mustard_bottle",
    "stir_mug_with_spoon",
    "draw_star",
    "drop_ball_into_cup",
    "align_bottle_vertically",
    "open_bottle_cap",
    "insert_bread_into_toaster",
    "pick_up_bowl",
    "move_pan_left",
    "wipe_table_avoid_plate",
    "draw_circle",
    "unplug_charger",
    "take_out_tissue",
    "lower_lamp_brightness",
    "hang_towel",
];

/// Tasks used for prompt ablations.
pub const ABLATION_TASKS: [&str; 5] = [
    "pick_chip_bag_right_of_can",
    "place_apple_in_bowl",
    "shake_mustard_bottle",
    "open_bottle_cap",
    "move_pan_left",
];

/// Tasks used to compare output modes.
pub const OUTPUT_MODE_TASKS: [&str; 7] = [
    "pick_chip_bag_right_of_can",
    "place_apple_in_bowl",
    "shake_mustard_bottle",
    "open_bottle_cap",
    "move_pan_left",
    "draw_star",
    "draw_circle",
];

/// An ordered set of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    tasks: Vec<Task>,
}

impl Catalog {
    pub fn new(tasks: Vec<Task>) -> Result<Self, BenchError> {
        let mut seen = BTreeSet::new();
        for t in &tasks {
            t.validate()?;
            if !seen.insert(t.id().to_string()) {
                return Err(BenchError::Catalog(format!("duplicate task id {}", t.id())));
            }
        }
        Ok(Self { tasks })
    }

    fn parse(name: &str, text: &str) -> Result<Task, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Catalog(format!("{name}: {e}")))
    }

    /// The thirty shipped tasks.
    pub fn embedded() -> Self {
        let tasks = EMBEDDED
            .iter()
            .map(|(id, text)| Self::parse(id, text))
            .collect::<Result<Vec<_>, _>>()
            .expect("shipped tasks parse");
        Self::new(tasks).expect("shipped tasks are valid")
    }

    /// Loads every `*.json` in `dir`, ordered by file name.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, BenchError> {
        let mut paths: Vec<_> = fs::read_dir(dir.as_ref())
            .map_err(|e| BenchError::Catalog(e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let tasks = paths
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).map_err(|e| BenchError::Catalog(format!("{}: {e}", p.display())))?;
                Self::parse(&p.display().to_string(), &text)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(tasks)
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn get(&self, id: &str) -> Result<&Task, BenchError> {
        self.tasks
            .iter()
            .find(|t| t.id() == id)
            .ok_or_else(|| BenchError::UnknownTask(id.to_string()))
    }

    /// The tasks with the given ids, in the given order.
    pub fn subset(&self, ids: &[&str]) -> Result<Vec<Task>, BenchError> {
        ids.iter().map(|id| self.get(id).cloned()).collect()
    }

    /// Lower-cased words of every object and part name.
    pub fn object_vocabulary(&self) -> BTreeSet<String> {
        let mut words = BTreeSet::new();
        for t in &self.tasks {
            for o in &t.scene.objects {
                let names = std::iter::once(o.name.as_str()).chain(o.parts.iter().map(|p| p.name.as_str()));
                for n in names {
                    for w in n.split(|c: char| !c.is_ascii_alphabetic()).filter(|w| w.len() > 1) {
                        words.insert(w.to_ascii_lowercase());
                    }
                }
            }
        }
        words
    }
}

/// Evaluates task `task_id`'s checker on the last attempt of an episode log.
pub fn check_success(task_id: &str, log_bytes: &[u8]) -> Result<bool, BenchError> {
    Catalog::embedded().get(task_id)?.checker.check_log(log_bytes)
}
