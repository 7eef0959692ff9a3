use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::{BBox3D, Pose};

/// Axis-aligned limits of reachable gripper poses, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

pub const WORKSPACE: Workspace = Workspace {
    x: [-0.4, 0.4],
    y: [0.1, 0.7],
    z: [0.0, 0.5],
};

impl Default for Workspace {
    fn default() -> Self {
        WORKSPACE
    }
}

impl Workspace {
    pub fn contains(&self, pose: &Pose) -> bool {
        (self.x[0]..=self.x[1]).contains(&pose.x)
            && (self.y[0]..=self.y[1]).contains(&pose.y)
            && (self.z[0]..=self.z[1]).contains(&pose.z)
    }

    pub fn clamp(&self, pose: &Pose) -> Pose {
        Pose {
            x: pose.x.clamp(self.x[0], self.x[1]),
            y: pose.y.clamp(self.y[0], self.y[1]),
            z: pose.z.clamp(self.z[0], self.z[1]),
            yaw: pose.yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Footprint `w × l` along the object's local x and y axes, height `h`.
    Box { size: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
}

impl Shape {
    pub fn height(&self) -> f64 {
        match *self {
            Shape::Box { size } => size[2],
            Shape::Cylinder { height, .. } => height,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Shape::Box { size } => size.iter().all(|d| *d > 0.0 && d.is_finite()),
            Shape::Cylinder { radius, height } => {
                radius > 0.0 && height > 0.0 && radius.is_finite() && height.is_finite()
            }
        }
    }
}

/// A named sub-box of an object, e.g. the rim of a bowl or the handle of a pan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub name: String,
    /// Box centre in the object frame.
    pub offset: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    pub size: [f64; 3],
}

/// Marks an object as hollow: things released over `part` (or the whole body)
/// settle at `floor` metres above the object's bottom instead of on its top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receptacle {
    #[serde(default)]
    pub part: Option<String>,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub shape: Shape,
    #[serde(default = "origin")]
    pub pose: Pose,
    #[serde(default = "yes")]
    pub graspable: bool,
    #[serde(default = "yes")]
    pub movable: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Part>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receptacle: Option<Receptacle>,
}

fn origin() -> Pose {
    Pose::new(0.0, 0.0, 0.0, 0.0)
}

fn yes() -> bool {
    true
}

impl SceneObject {
    pub fn height(&self) -> f64 {
        self.shape.height()
    }

    pub fn bbox(&self) -> BBox3D {
        let p = self.pose.position();
        match self.shape {
            Shape::Box { size } => BBox3D::canonical(p, self.pose.yaw, size[0], size[1], size[2]),
            Shape::Cylinder { radius, height } => {
                BBox3D::canonical(p, self.pose.yaw, 2.0 * radius, 2.0 * radius, height)
            }
        }
    }

    pub fn part(&self, name: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.name == name)
    }

    pub fn part_bbox(&self, part: &Part) -> BBox3D {
        let c = self.pose.compose(&Pose::new(
            part.offset[0],
            part.offset[1],
            part.offset[2],
            part.yaw,
        ));
        BBox3D::canonical(c.position(), c.yaw, part.size[0], part.size[1], part.size[2])
    }

    /// Footprint extent of the body along the horizontal direction `angle`.
    pub fn width_along(&self, angle: f64) -> f64 {
        match self.shape {
            Shape::Cylinder { radius, .. } => 2.0 * radius,
            Shape::Box { .. } => self.bbox().width_along(angle),
        }
    }

    /// Region whose interior catches released objects, if hollow.
    pub fn receptacle_region(&self) -> Option<(BBox3D, f64)> {
        let r = self.receptacle.as_ref()?;
        let region = match &r.part {
            Some(name) => self.part_bbox(self.part(name)?),
            None => self.bbox(),
        };
        Some((region, self.bbox().bottom() + r.floor))
    }
}

/// Sampling ranges for one object's placement at reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub yaw: [f64; 2],
    /// When set, `x`/`y` are offsets in this object's frame and the object
    /// rests on it (or inside it, for receptacles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_to: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScene {
    pub id: String,
    pub instruction: String,
    pub objects: Vec<SceneObject>,
    #[serde(default)]
    pub randomization: BTreeMap<String, Placement>,
}

impl TaskScene {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScene(format!("{}: {msg}", self.id)));
        if self.instruction.trim().is_empty() {
            return bad("empty instruction".into());
        }
        let mut seen = BTreeSet::new();
        for (i, obj) in self.objects.iter().enumerate() {
            if !seen.insert(obj.name.as_str()) {
                return bad(format!("duplicate object name {:?}", obj.name));
            }
            if !obj.shape.is_valid() {
                return bad(format!("object {:?} has non-positive dimensions", obj.name));
            }
            if let Some(r) = &obj.receptacle {
                if let Some(p) = &r.part {
                    if obj.part(p).is_none() {
                        return bad(format!("receptacle part {p:?} missing on {:?}", obj.name));
                    }
                }
            }
            if let Some(pl) = self.randomization.get(&obj.name) {
                if pl.x[0] > pl.x[1] || pl.y[0] > pl.y[1] || pl.yaw[0] > pl.yaw[1] {
                    return bad(format!("inverted range for {:?}", obj.name));
                }
                match &pl.relative_to {
                    Some(parent) => {
                        let earlier = self.objects[..i].iter().any(|o| &o.name == parent);
                        if !earlier {
                            return bad(format!(
                                "{:?} is placed relative to {parent:?}, which must be listed before it",
                                obj.name
                            ));
                        }
                    }
                    None => {
                        let ws = WORKSPACE;
                        let inside = ws.x[0] <= pl.x[0]
                            && pl.x[1] <= ws.x[1]
                            && ws.y[0] <= pl.y[0]
                            && pl.y[1] <= ws.y[1];
                        if !inside {
                            return bad(format!("placement of {:?} leaves the workspace", obj.name));
                        }
                    }
                }
            }
        }
        for name in self.randomization.keys() {
            if !seen.contains(name.as_str()) {
                return bad(format!("randomization names unknown object {name:?}"));
            }
        }
        Ok(())
    }

    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }
}
