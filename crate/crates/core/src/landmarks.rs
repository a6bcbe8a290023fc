//! The ten cephalometric landmarks and named landmark sets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Point3;

/// The closed set of landmark names handled by the toolkit.
///
/// `R`/`L` suffixes refer to the subject's anatomical right and left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LandmarkName {
    ExocanthionR,
    ExocanthionL,
    EndocanthionR,
    EndocanthionL,
    Nasion,
    NoseTip,
    AlareR,
    AlareL,
    CheilionR,
    CheilionL,
}

impl LandmarkName {
    /// All ten landmarks in canonical report order.
    pub const ALL: [LandmarkName; 10] = [
        LandmarkName::ExocanthionR,
        LandmarkName::ExocanthionL,
        LandmarkName::EndocanthionR,
        LandmarkName::EndocanthionL,
        LandmarkName::Nasion,
        LandmarkName::NoseTip,
        LandmarkName::AlareR,
        LandmarkName::AlareL,
        LandmarkName::CheilionR,
        LandmarkName::CheilionL,
    ];

    /// The name this landmark maps to under a left/right mirror.
    ///
    /// Midsagittal landmarks (nasion, nose tip) are fixed points.
    pub fn mirrored(self) -> LandmarkName {
        use LandmarkName::*;
        match self {
            ExocanthionR => ExocanthionL,
            ExocanthionL => ExocanthionR,
            EndocanthionR => EndocanthionL,
            EndocanthionL => EndocanthionR,
            Nasion => Nasion,
            NoseTip => NoseTip,
            AlareR => AlareL,
            AlareL => AlareR,
            CheilionR => CheilionL,
            CheilionL => CheilionR,
        }
    }

    /// True for the two landmarks lying on the midsagittal plane.
    pub fn is_midsagittal(self) -> bool {
        matches!(self, LandmarkName::Nasion | LandmarkName::NoseTip)
    }

    pub fn as_str(self) -> &'static str {
        use LandmarkName::*;
        match self {
            ExocanthionR => "ExocanthionR",
            ExocanthionL => "ExocanthionL",
            EndocanthionR => "EndocanthionR",
            EndocanthionL => "EndocanthionL",
            Nasion => "Nasion",
            NoseTip => "NoseTip",
            AlareR => "AlareR",
            AlareL => "AlareL",
            CheilionR => "CheilionR",
            CheilionL => "CheilionL",
        }
    }

    pub fn parse(s: &str) -> Option<LandmarkName> {
        LandmarkName::ALL.into_iter().find(|n| n.as_str() == s)
    }
}

impl fmt::Display for LandmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum LandmarkError {
    #[error("non-finite coordinates for landmark {0}")]
    NonFinite(LandmarkName),
    #[error("unknown landmark name {0:?}")]
    UnknownName(String),
    #[error("landmark file {path}: {msg}")]
    Format { path: String, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A set of named 3D points, at most one point per landmark name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LandmarkSet {
    points: BTreeMap<LandmarkName, Point3>,
}

impl LandmarkSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or replace a landmark. Errors on non-finite coordinates.
    pub fn insert(&mut self, name: LandmarkName, p: Point3) -> Result<(), LandmarkError> {
        if !p.coords.iter().all(|c| c.is_finite()) {
            return Err(LandmarkError::NonFinite(name));
        }
        self.points.insert(name, p);
        Ok(())
    }

    pub fn get(&self, name: LandmarkName) -> Option<Point3> {
        self.points.get(&name).copied()
    }

    pub fn contains(&self, name: LandmarkName) -> bool {
        self.points.contains_key(&name)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LandmarkName, Point3)> + '_ {
        self.points.iter().map(|(n, p)| (*n, *p))
    }

    /// Names of `LandmarkName::ALL` not present in this set.
    pub fn missing(&self) -> Vec<LandmarkName> {
        LandmarkName::ALL
            .into_iter()
            .filter(|n| !self.contains(*n))
            .collect()
    }

    /// Mirror over the YZ plane: negate x and swap R/L names.
    pub fn mirrored_yz(&self) -> LandmarkSet {
        let points = self
            .points
            .iter()
            .map(|(n, p)| (n.mirrored(), Point3::new(-p.x, p.y, p.z)))
            .collect();
        LandmarkSet { points }
    }

    /// Apply a point transform to every landmark.
    pub fn map_points(&self, mut f: impl FnMut(Point3) -> Point3) -> LandmarkSet {
        let points = self.points.iter().map(|(n, p)| (*n, f(*p))).collect();
        LandmarkSet { points }
    }

    /// Serialize to the canonical landmark interchange JSON.
    pub fn to_json(&self) -> serde_json::Value {
        let mut landmarks = serde_json::Map::new();
        for (name, p) in self.iter() {
            landmarks.insert(name.as_str().to_string(), serde_json::json!([p.x, p.y, p.z]));
        }
        let missing: Vec<&str> = self.missing().into_iter().map(|n| n.as_str()).collect();
        serde_json::json!({
            "landmarks": landmarks,
            "units": "mm",
            "missing": missing,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<LandmarkSet, LandmarkError> {
        let obj = value
            .get("landmarks")
            .and_then(|v| v.as_object())
            .ok_or_else(|| LandmarkError::Format {
                path: String::new(),
                msg: "missing \"landmarks\" object".into(),
            })?;
        let mut set = LandmarkSet::new();
        for (key, coords) in obj {
            let name = LandmarkName::parse(key)
                .ok_or_else(|| LandmarkError::UnknownName(key.clone()))?;
            let arr = coords.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                LandmarkError::Format {
                    path: String::new(),
                    msg: format!("landmark {key} is not a [x,y,z] array"),
                }
            })?;
            let mut c = [0.0; 3];
            for (i, v) in arr.iter().enumerate() {
                c[i] = v.as_f64().ok_or_else(|| LandmarkError::Format {
                    path: String::new(),
                    msg: format!("landmark {key} has a non-numeric coordinate"),
                })?;
            }
            set.insert(name, Point3::new(c[0], c[1], c[2]))?;
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<(), LandmarkError> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("landmark json");
        std::fs::write(path, text).map_err(|source| LandmarkError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<LandmarkSet, LandmarkError> {
        let text = std::fs::read_to_string(path).map_err(|source| LandmarkError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LandmarkError::Format {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?;
        Self::from_json(&value)
    }
}

impl FromIterator<(LandmarkName, Point3)> for LandmarkSet {
    fn from_iter<T: IntoIterator<Item = (LandmarkName, Point3)>>(iter: T) -> Self {
        let mut set = LandmarkSet::new();
        for (n, p) in iter {
            set.insert(n, p).expect("finite landmark");
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_swaps_sides_and_negates_x() {
        let mut set = LandmarkSet::new();
        set.insert(LandmarkName::ExocanthionR, Point3::new(30.0, 0.0, 0.0))
            .unwrap();
        set.insert(LandmarkName::Nasion, Point3::new(0.0, 10.0, 5.0))
            .unwrap();
        let m = set.mirrored_yz();
        assert_eq!(
            m.get(LandmarkName::ExocanthionL),
            Some(Point3::new(-30.0, 0.0, 0.0))
        );
        assert!(m.get(LandmarkName::ExocanthionR).is_none());
        assert_eq!(m.get(LandmarkName::Nasion), Some(Point3::new(0.0, 10.0, 5.0)));
    }

    #[test]
    fn mirror_is_involution() {
        let mut set = LandmarkSet::new();
        for (i, name) in LandmarkName::ALL.into_iter().enumerate() {
            set.insert(name, Point3::new(i as f64 - 4.0, i as f64, 2.0 * i as f64))
                .unwrap();
        }
        assert_eq!(set.mirrored_yz().mirrored_yz(), set);
    }

    #[test]
    fn json_round_trip_reports_missing() {
        let mut set = LandmarkSet::new();
        set.insert(LandmarkName::NoseTip, Point3::new(1.0, 2.0, 3.0))
            .unwrap();
        let value = set.to_json();
        assert_eq!(value["units"], "mm");
        assert_eq!(value["missing"].as_array().unwrap().len(), 9);
        let back = LandmarkSet::from_json(&value).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn rejects_non_finite() {
        let mut set = LandmarkSet::new();
        assert!(set
            .insert(LandmarkName::Nasion, Point3::new(f64::NAN, 0.0, 0.0))
            .is_err());
    }
}
