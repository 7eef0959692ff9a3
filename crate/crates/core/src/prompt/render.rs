use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Flag, PromptConfig, PromptError, PromptLibrary, PromptPlacement};
use crate::chat::ChatMessage;
use crate::parser::{GripperMode, OutputMode};
use crate::sim::{ObjectTracks, WORKSPACE};

pub const VERDICT_PREFIX: &str = "TASK COMPLETED:";
pub const SUMMARY_MAX_WORDS: usize = 150;
pub const EMPTY_SUMMARY_PLACEHOLDER: &str = "previous attempt failed";

const PHRASE_SLOT: &str = "{clear_objects_phrase}";

/// Wraps `text` in the delimiter comments for `name`.
pub fn section(name: &str, text: &str) -> String {
    format!("<!-- section: {name} -->\n{text}\n<!-- /section: {name} -->")
}

fn fmt_bound(v: f64) -> String {
    format!("{v:.2}")
}

fn workspace_text(lib: &PromptLibrary) -> Result<String, PromptError> {
    let ws = WORKSPACE;
    Ok(lib
        .get("workspace")?
        .replace("{x_min}", &fmt_bound(ws.x[0]))
        .replace("{x_max}", &fmt_bound(ws.x[1]))
        .replace("{y_min}", &fmt_bound(ws.y[0]))
        .replace("{y_max}", &fmt_bound(ws.y[1]))
        .replace("{z_min}", &fmt_bound(ws.z[0]))
        .replace("{z_max}", &fmt_bound(ws.z[1])))
}

/// Flag sections in the order they appear after the fixed part.
const FLAG_ORDER: [Flag; 8] = [
    Flag::StepByStepPlan,
    Flag::GripperContactStep,
    Flag::TrajectoryShapeDescription,
    Flag::ObjectPartDescription,
    Flag::CollisionAvoidance,
    Flag::FunctionDocumentation,
    Flag::ReusableFunctions,
    Flag::NumberedStepVariables,
];

pub fn build_main_prompt(cfg: &PromptConfig) -> Result<String, PromptError> {
    build_main_prompt_with(&PromptLibrary::embedded(), cfg)
}

/// The task-agnostic main prompt `p`. Code-only components are skipped in numeric mode.
pub fn build_main_prompt_with(lib: &PromptLibrary, cfg: &PromptConfig) -> Result<String, PromptError> {
    cfg.validate()?;
    let (api, output) = match cfg.output_mode {
        OutputMode::Code => ("api_code", "output_code"),
        OutputMode::Numeric => ("api_numeric", "output_numeric"),
    };
    let gripper = match (cfg.gripper_mode, cfg.output_mode) {
        (GripperMode::Explicit, OutputMode::Code) => "gripper_explicit_code",
        (GripperMode::Binary, OutputMode::Code) => "gripper_binary_code",
        (GripperMode::Explicit, OutputMode::Numeric) => "gripper_explicit_numeric",
        (GripperMode::Binary, OutputMode::Numeric) => "gripper_binary_numeric",
    };
    let mut parts = vec![
        section("intro", lib.get("intro")?),
        section("frame", lib.get("frame")?),
        section("workspace", &workspace_text(lib)?),
        section("api", lib.get(api)?),
        section("output", lib.get(output)?),
        section("gripper", lib.get(gripper)?),
    ];
    for flag in FLAG_ORDER {
        if !cfg.is_on(flag) || (flag.code_only() && cfg.output_mode != OutputMode::Code) {
            continue;
        }
        let mut text = lib.get(flag.name())?.to_string();
        if flag == Flag::CollisionAvoidance {
            text = if cfg.is_on(Flag::ClearObjectsPhrase) {
                let nested = section(Flag::ClearObjectsPhrase.name(), lib.get(Flag::ClearObjectsPhrase.name())?);
                text.replace(PHRASE_SLOT, &nested)
            } else {
                text.replace(&format!("\n{PHRASE_SLOT}"), "").replace(PHRASE_SLOT, "")
            };
        }
        parts.push(section(flag.name(), &text));
    }
    Ok(parts.join("\n\n"))
}

/// Summary text wrapped as the section appended on a replan.
pub fn summary_section(lib: &PromptLibrary, summary: &str) -> Result<String, PromptError> {
    Ok(section(
        "replan_summary",
        &lib.get("summary_section")?.replace("{summary}", summary.trim()),
    ))
}

/// Main prompt `p`, instruction `l`, and the failure summary after a replan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub main_prompt: String,
    pub instruction: String,
    pub summary: Option<String>,
}

impl PromptBundle {
    pub fn new(main_prompt: String, instruction: &str) -> Self {
        Self {
            main_prompt,
            instruction: instruction.to_string(),
            summary: None,
        }
    }

    pub fn with_summary(mut self, summary: &str) -> Self {
        self.summary = Some(summary.to_string());
        self
    }

    /// `l`, followed by the summary section if any.
    fn tail(&self, lib: &PromptLibrary) -> Result<String, PromptError> {
        let mut out = self.instruction.clone();
        if let Some(s) = &self.summary {
            out.push_str("\n\n");
            out.push_str(&summary_section(lib, s)?);
        }
        Ok(out)
    }

    /// `p ⊕ l ⊕ summary` as a single text.
    pub fn compose(&self, lib: &PromptLibrary) -> Result<String, PromptError> {
        Ok(format!("{}\n\n{}", self.main_prompt, self.tail(lib)?))
    }

    /// Opening messages of an attempt.
    pub fn messages(
        &self,
        lib: &PromptLibrary,
        placement: PromptPlacement,
    ) -> Result<Vec<ChatMessage>, PromptError> {
        Ok(match placement {
            PromptPlacement::User => vec![ChatMessage::user(self.compose(lib)?)],
            PromptPlacement::System => vec![
                ChatMessage::system(self.main_prompt.clone()),
                ChatMessage::user(self.tail(lib)?),
            ],
        })
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn triple(v: [f64; 3]) -> String {
    format!("[{}, {}, {}]", num(v[0]), num(v[1]), num(v[2]))
}

/// Fixed-precision rendering of tracks: one block per object in name order,
/// then the gripper block.
pub fn format_tracks(tracks: &ObjectTracks) -> String {
    let mut out = String::new();
    for (name, series) in &tracks.objects {
        let _ = writeln!(out, "{name} (tick: position, orientation, dimensions):");
        for (tick, b) in series {
            let _ = writeln!(
                out,
                "  {tick}: {}, {}, {}",
                triple(b.position),
                num(b.orientation),
                triple(b.dimensions)
            );
        }
        out.push('\n');
    }
    if !tracks.gripper.is_empty() {
        out.push_str("gripper (tick: [x, y, z], yaw, fingers):\n");
        for g in &tracks.gripper {
            let _ = writeln!(
                out,
                "  {}: {}, {}, {}",
                g.tick,
                triple([g.pose.x, g.pose.y, g.pose.z]),
                num(g.pose.yaw),
                if g.open { "open" } else { "closed" }
            );
        }
    }
    out.trim_end().to_string()
}

pub fn build_success_prompt(instruction: &str, tracks: &ObjectTracks) -> Result<String, PromptError> {
    build_success_prompt_with(&PromptLibrary::embedded(), instruction, tracks)
}

pub fn build_success_prompt_with(
    lib: &PromptLibrary,
    instruction: &str,
    tracks: &ObjectTracks,
) -> Result<String, PromptError> {
    Ok(lib
        .get("success")?
        .replace("{instruction}", instruction)
        .replace("{tracks}", &format_tracks(tracks)))
}

pub fn verdict_retry(lib: &PromptLibrary) -> Result<String, PromptError> {
    lib.get("verdict_retry").map(str::to_string)
}

pub fn build_summary_request(instruction: &str, tracks: &ObjectTracks) -> Result<String, PromptError> {
    build_summary_request_with(&PromptLibrary::embedded(), instruction, tracks)
}

pub fn build_summary_request_with(
    lib: &PromptLibrary,
    instruction: &str,
    tracks: &ObjectTracks,
) -> Result<String, PromptError> {
    Ok(lib
        .get("summary_request")?
        .replace("{instruction}", instruction)
        .replace("{tracks}", &format_tracks(tracks))
        .replace("{max_words}", &SUMMARY_MAX_WORDS.to_string()))
}

/// The contract line for a verdict.
pub fn render_verdict(v: bool) -> String {
    format!("{VERDICT_PREFIX} {}", if v { "TRUE" } else { "FALSE" })
}

/// Reads the last `TASK COMPLETED: TRUE|FALSE` occurrence, ignoring case.
pub fn parse_success_verdict(text: &str) -> Result<bool, PromptError> {
    let lower = text.to_ascii_lowercase();
    let prefix = VERDICT_PREFIX.to_ascii_lowercase();
    let mut found = None;
    let mut from = 0;
    while let Some(i) = lower[from..].find(&prefix) {
        let start = from + i;
        let rest = lower[start + prefix.len()..].trim_start();
        if rest.starts_with("true") {
            found = Some(true);
        } else if rest.starts_with("false") {
            found = Some(false);
        }
        from = start + prefix.len();
    }
    found.ok_or(PromptError::VerdictUnparseable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BBox3D, Pose};
    use crate::sim::GripperSample;

    fn lib() -> PromptLibrary {
        PromptLibrary::embedded()
    }

    /// Removes the delimited block `name` (and the separator before it) from `text`.
    fn strip_section(text: &str, name: &str, sep: &str) -> Option<String> {
        let open = format!("<!-- section: {name} -->");
        let close = format!("<!-- /section: {name} -->");
        let s = text.find(&open)?;
        let e = text.find(&close)? + close.len();
        let s = if text[..s].ends_with(sep) { s - sep.len() } else { s };
        Some(format!("{}{}", &text[..s], &text[e..]))
    }

    #[test]
    fn deterministic() {
        for mode in [OutputMode::Code, OutputMode::Numeric] {
            let cfg = PromptConfig::full(mode, GripperMode::Explicit);
            assert_eq!(build_main_prompt(&cfg).unwrap(), build_main_prompt(&cfg).unwrap());
        }
    }

    #[test]
    fn every_flag_removes_one_section() {
        let base = build_main_prompt(&PromptConfig::default()).unwrap();
        for flag in Flag::ALL {
            let variant = build_main_prompt(&PromptConfig::default().without(flag)).unwrap();
            assert_ne!(base, variant, "{flag}");
            let sep = if flag == Flag::ClearObjectsPhrase { "\n" } else { "\n\n" };
            assert_eq!(strip_section(&base, flag.name(), sep).unwrap(), variant, "{flag}");
        }
    }

    #[test]
    fn collision_section_without_phrase() {
        let cfg = PromptConfig::default().without(Flag::ClearObjectsPhrase);
        let p = build_main_prompt(&cfg).unwrap();
        assert!(p.contains("<!-- section: collision_avoidance -->"));
        assert!(!p.contains("clear objects and the tabletop"));
        assert!(!p.contains("{clear_objects_phrase}"));
        let full = build_main_prompt(&PromptConfig::default()).unwrap();
        assert!(full.contains("clear objects and the tabletop"));
    }

    #[test]
    fn invalid_combination_rejected() {
        let mut cfg = PromptConfig::default();
        cfg.disabled.insert(Flag::CollisionAvoidance);
        assert!(matches!(build_main_prompt(&cfg), Err(PromptError::Config(_))));
    }

    #[test]
    fn numeric_mode_has_tags_and_no_code_sections() {
        let p = build_main_prompt(&PromptConfig::full(OutputMode::Numeric, GripperMode::Binary)).unwrap();
        assert!(p.contains("<trajectory>"));
        assert!(!p.contains("section: reusable_functions"));
        let c = build_main_prompt(&PromptConfig::default()).unwrap();
        assert!(c.contains("```python"));
        for f in ["detect_object", "execute_trajectory", "open_gripper", "close_gripper", "task_completed"] {
            assert!(c.contains(f), "{f}");
        }
    }

    #[test]
    fn workspace_bounds_rendered() {
        let p = build_main_prompt(&PromptConfig::default()).unwrap();
        assert!(p.contains("x from -0.40 to 0.40, y from 0.10 to 0.70, z from 0.00 to 0.50"));
        assert!(!p.contains('{'));
    }

    #[test]
    fn summary_section_comes_last() {
        let b = PromptBundle::new("P".into(), "do it").with_summary("grasped at centroid; try the rim");
        let text = b.compose(&lib()).unwrap();
        assert!(text.starts_with("P\n\ndo it\n\n"));
        assert!(text.ends_with("grasped at centroid; try the rim\n<!-- /section: replan_summary -->"));
        let msgs = b.messages(&lib(), PromptPlacement::System).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].content, "P");
    }

    fn tracks() -> ObjectTracks {
        let mut t = ObjectTracks::default();
        let b = BBox3D::canonical([0.123456, 0.4, 0.03], 0.0, 0.04, 0.04, 0.06);
        t.objects.insert("zeta".into(), vec![(0, b), (5, b), (9, b)]);
        let c = BBox3D::canonical([-0.00001, 0.5, 0.02], 0.0, 0.04, 0.04, 0.04);
        t.objects.insert("alpha".into(), vec![(0, c)]);
        t.gripper.push(GripperSample { tick: 0, pose: Pose::new(0.0, 0.3, 0.4, 0.0), open: true });
        t
    }

    #[test]
    fn success_prompt_rows() {
        let p = build_success_prompt("lift it", &tracks()).unwrap();
        assert!(p.contains("lift it"));
        assert!(p.contains("[0.1235, 0.4000, 0.0300]"));
        assert!(p.contains("[0.0000, 0.5000, 0.0200]"));
        assert!(!p.contains("-0.0000"));
        let a = p.find("alpha (").unwrap();
        let z = p.find("zeta (").unwrap();
        assert!(a < z);
        let zeta_rows = p[z..].lines().skip(1).take_while(|l| l.starts_with("  ")).count();
        assert_eq!(zeta_rows, 3);
        assert!(p.contains("TASK COMPLETED: TRUE"));
    }

    #[test]
    fn summary_request_has_cap() {
        let p = build_summary_request("lift it", &tracks()).unwrap();
        assert!(p.contains("150 words"));
        assert!(p.contains("zeta ("));
    }

    #[test]
    fn verdicts() {
        assert_eq!(parse_success_verdict("reasoning\nTASK COMPLETED: TRUE"), Ok(true));
        assert_eq!(parse_success_verdict("task completed: false"), Ok(false));
        assert_eq!(parse_success_verdict("maybe"), Err(PromptError::VerdictUnparseable));
        assert_eq!(
            parse_success_verdict("TASK COMPLETED: TRUE or TASK COMPLETED: FALSE?\nTask Completed: false"),
            Ok(false)
        );
        for v in [true, false] {
            assert_eq!(parse_success_verdict(&render_verdict(v)), Ok(v));
        }
    }

    #[test]
    fn library_from_dir_matches_embedded() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/prompts");
        assert_eq!(PromptLibrary::from_dir(dir).unwrap(), lib());
        assert!(PromptLibrary::from_dir("/nonexistent").is_err());
    }
}
