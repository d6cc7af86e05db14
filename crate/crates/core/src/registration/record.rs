use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RegistrationResult;
use crate::error::{Error, Result};
use crate::raster::write_atomic;
use crate::transform::{AffineTransform, ModelKind};

/// On-disk transform: `{"model", "matrix", "support", "inliers"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub model: ModelKind,
    pub matrix: [[f64; 3]; 2],
    #[serde(default)]
    pub support: usize,
    #[serde(default)]
    pub inliers: usize,
}

impl TransformRecord {
    pub fn from_transform(t: &AffineTransform) -> Self {
        TransformRecord {
            model: t.kind(),
            matrix: t.matrix(),
            support: 0,
            inliers: 0,
        }
    }

    pub fn from_result(r: &RegistrationResult) -> Self {
        TransformRecord {
            model: r.t3.kind(),
            matrix: r.t3.matrix(),
            support: r.support,
            inliers: r.inliers.len(),
        }
    }

    pub fn transform(&self) -> Result<AffineTransform> {
        AffineTransform::with_kind(self.matrix, self.model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transform record serializes") + "\n"
    }
}

pub fn write_transform_json(path: impl AsRef<Path>, record: &TransformRecord) -> Result<()> {
    write_atomic(path.as_ref(), record.to_json().as_bytes())
}

pub fn write_transform_text(path: impl AsRef<Path>, t: &AffineTransform) -> Result<()> {
    write_atomic(path.as_ref(), t.to_text().as_bytes())
}

/// Read a transform stored either as JSON or as two text rows.
pub fn read_transform(path: impl AsRef<Path>) -> Result<AffineTransform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str::<TransformRecord>(&text)
            .map_err(|e| Error::format(path, format!("bad transform JSON: {e}")))?
            .transform()
    } else {
        AffineTransform::from_text(&text)
    };
    parsed.map_err(|e| match e {
        Error::Parameter(msg) => Error::format(path, msg),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut r = TransformRecord::from_transform(&AffineTransform::translation(3.0, -4.5));
        r.support = 17;
        r.inliers = 17;
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["model"], "translation");
        assert_eq!(v["matrix"][0][2], 3.0);
        assert_eq!(v["matrix"][1][2], -4.5);
        assert_eq!(v["support"], 17);
        assert_eq!(v["inliers"], 17);
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let t = AffineTransform::scale_rotation(1.1, 0.2, 5.0, -3.0);
        let json = dir.path().join("t.json");
        write_transform_json(&json, &TransformRecord::from_transform(&t)).unwrap();
        assert_eq!(read_transform(&json).unwrap(), t);
        let txt = dir.path().join("t.txt");
        write_transform_text(&txt, &t).unwrap();
        assert!(read_transform(&txt).unwrap().max_abs_diff(&t) == 0.0);
    }

    #[test]
    fn inconsistent_model_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        std::fs::write(&p, r#"{"model":"translation","matrix":[[2,0,0],[0,1,0]]}"#).unwrap();
        assert!(matches!(read_transform(&p), Err(Error::Format { .. })));
    }
}
