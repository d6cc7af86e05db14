//! 2×3 geometric maps between image frames.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D point in pixel coordinates; pixel centers sit on integers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Family of geometric models a transform belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Translation,
    Similarity,
    Affine,
}

impl ModelKind {
    /// Number of free parameters `n`.
    pub fn parameter_count(self) -> usize {
        match self {
            ModelKind::Translation => 2,
            ModelKind::Similarity => 4,
            ModelKind::Affine => 6,
        }
    }

    /// `ceil(n / 2)`: each correspondence contributes two linear constraints.
    pub fn minimal_sample(self) -> usize {
        self.parameter_count().div_ceil(2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Translation => "translation",
            ModelKind::Similarity => "similarity",
            ModelKind::Affine => "affine",
        }
    }

    fn join(self, other: ModelKind) -> ModelKind {
        self.max(other)
    }
}

impl PartialOrd for ModelKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ModelKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.parameter_count().cmp(&other.parameter_count())
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "translation" => Ok(ModelKind::Translation),
            "similarity" => Ok(ModelKind::Similarity),
            "affine" => Ok(ModelKind::Affine),
            other => Err(Error::param(format!(
                "unknown model kind {other:?} (expected translation, similarity or affine)"
            ))),
        }
    }
}

/// Row-major `[a11 a12 tx; a21 a22 ty]` acting on column vectors `(x, y, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform {
    m: [[f64; 3]; 2],
    kind: ModelKind,
}

const SINGULAR_DET: f64 = 1e-12;

impl AffineTransform {
    pub fn identity() -> Self {
        Self::translation(0.0, 0.0)
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        AffineTransform {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty]],
            kind: ModelKind::Translation,
        }
    }

    /// `x' = a x - b y + tx`, `y' = b x + a y + ty`.
    pub fn similarity(a: f64, b: f64, tx: f64, ty: f64) -> Self {
        AffineTransform {
            m: [[a, -b, tx], [b, a, ty]],
            kind: ModelKind::Similarity,
        }
    }

    /// Uniform scale `s` and rotation `theta` (radians) followed by translation.
    pub fn scale_rotation(s: f64, theta: f64, tx: f64, ty: f64) -> Self {
        Self::similarity(s * theta.cos(), s * theta.sin(), tx, ty)
    }

    pub fn affine(m: [[f64; 3]; 2]) -> Self {
        AffineTransform {
            m,
            kind: ModelKind::Affine,
        }
    }

    /// Build from a matrix, checking that it satisfies the constraints of `kind`.
    pub fn with_kind(m: [[f64; 3]; 2], kind: ModelKind) -> Result<Self> {
        let tol = 1e-9;
        let ok = match kind {
            ModelKind::Affine => true,
            ModelKind::Similarity => {
                (m[0][0] - m[1][1]).abs() <= tol && (m[0][1] + m[1][0]).abs() <= tol
            }
            ModelKind::Translation => {
                (m[0][0] - 1.0).abs() <= tol
                    && (m[1][1] - 1.0).abs() <= tol
                    && m[0][1].abs() <= tol
                    && m[1][0].abs() <= tol
            }
        };
        if !ok {
            return Err(Error::param(format!("matrix {m:?} is not a {kind} transform")));
        }
        Ok(AffineTransform { m, kind })
    }

    /// Smallest model family whose constraints hold exactly.
    pub fn from_matrix(m: [[f64; 3]; 2]) -> Self {
        for kind in [ModelKind::Translation, ModelKind::Similarity] {
            if let Ok(t) = Self::with_kind(m, kind) {
                return t;
            }
        }
        Self::affine(m)
    }

    pub fn matrix(&self) -> [[f64; 3]; 2] {
        self.m
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn tx(&self) -> f64 {
        self.m[0][2]
    }

    pub fn ty(&self) -> f64 {
        self.m[1][2]
    }

    /// Determinant of the linear 2×2 part.
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Isotropic scale factor `sqrt(|det|)`; exact for similarity transforms.
    pub fn scale(&self) -> f64 {
        self.det().abs().sqrt()
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        let m = &self.m;
        Point {
            x: m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            y: m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &AffineTransform) -> AffineTransform {
        let a = &self.m;
        let b = &other.m;
        let mut m = [[0.0; 3]; 2];
        for r in 0..2 {
            for c in 0..3 {
                m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
            m[r][2] += a[r][2];
        }
        AffineTransform {
            m,
            kind: self.kind.join(other.kind),
        }
    }

    pub fn inverse(&self) -> Result<AffineTransform> {
        let det = self.det();
        if det.abs() <= SINGULAR_DET || !det.is_finite() {
            return Err(Error::SingularTransform { det });
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let (ia, ib, ic, id) = if self.kind == ModelKind::Translation {
            (1.0, 0.0, 0.0, 1.0)
        } else {
            (d / det, -b / det, -c / det, a / det)
        };
        let m = [
            [ia, ib, -(ia * tx + ib * ty)],
            [ic, id, -(ic * tx + id * ty)],
        ];
        Ok(AffineTransform { m, kind: self.kind })
    }

    /// Largest absolute entry-wise difference between two matrices.
    pub fn max_abs_diff(&self, other: &AffineTransform) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..3 {
                d = d.max((self.m[r][c] - other.m[r][c]).abs());
            }
        }
        d
    }

    /// Two rows of three whitespace-separated numbers.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.m {
            s.push_str(&format!("{} {} {}\n", row[0], row[1], row[2]));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::param(format!("bad number in transform text: {e}")))?;
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 3) {
            return Err(Error::param(
                "transform text must have two rows of three numbers",
            ));
        }
        Ok(Self::from_matrix([
            [rows[0][0], rows[0][1], rows[0][2]],
            [rows[1][0], rows[1][1], rows[1][2]],
        ]))
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_samples() {
        assert_eq!(ModelKind::Translation.minimal_sample(), 1);
        assert_eq!(ModelKind::Similarity.minimal_sample(), 2);
        assert_eq!(ModelKind::Affine.minimal_sample(), 3);
    }

    #[test]
    fn kind_constraints() {
        assert!(AffineTransform::with_kind([[1.0, 0.0, 2.0], [0.0, 1.0, 3.0]], ModelKind::Translation).is_ok());
        assert!(AffineTransform::with_kind([[1.1, 0.0, 2.0], [0.0, 1.0, 3.0]], ModelKind::Translation).is_err());
        assert!(AffineTransform::with_kind([[0.9, -0.2, 0.0], [0.2, 0.9, 0.0]], ModelKind::Similarity).is_ok());
        assert!(AffineTransform::with_kind([[0.9, 0.2, 0.0], [0.2, 0.9, 0.0]], ModelKind::Similarity).is_err());
        assert_eq!(AffineTransform::from_matrix([[1.0, 0.0, 5.0], [0.0, 1.0, 0.0]]).kind(), ModelKind::Translation);
    }

    #[test]
    fn singular_inverse_fails() {
        let t = AffineTransform::affine([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]);
        assert!(matches!(t.inverse(), Err(Error::SingularTransform { .. })));
    }

    #[test]
    fn translation_inverse_is_exact() {
        let t = AffineTransform::translation(3.0, 4.0).inverse().unwrap();
        assert_eq!(t.matrix(), [[1.0, 0.0, -3.0], [0.0, 1.0, -4.0]]);
        assert_eq!(t.kind(), ModelKind::Translation);
    }

    #[test]
    fn text_round_trip() {
        let t = AffineTransform::affine([[1.1, 0.02, 2.5], [-0.03, 0.9, -1.0]]);
        let back = AffineTransform::from_text(&t.to_text()).unwrap();
        assert_eq!(back.matrix(), t.matrix());
        assert!(AffineTransform::from_text("1 0 0\n").is_err());
    }

    fn any_transform() -> impl Strategy<Value = AffineTransform> {
        prop_oneof![
            (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| AffineTransform::translation(x, y)),
            (0.5..2.0f64, -3.0..3.0f64, -50.0..50.0f64, -50.0..50.0f64)
                .prop_map(|(s, r, x, y)| AffineTransform::scale_rotation(s, r, x, y)),
            (0.5..2.0f64, -0.3..0.3f64, -0.3..0.3f64, 0.5..2.0f64, -50.0..50.0f64, -50.0..50.0f64)
                .prop_map(|(a, b, c, d, x, y)| AffineTransform::affine([[a, b, x], [c, d, y]])),
        ]
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(t in any_transform()) {
            let id = t.compose(&t.inverse().unwrap());
            prop_assert!(id.max_abs_diff(&AffineTransform::identity()) < 1e-9);
            prop_assert_eq!(t.inverse().unwrap().kind(), t.kind());
        }

        #[test]
        fn composition_stays_in_kind(a in any_transform(), b in any_transform()) {
            let c = a.compose(&b);
            prop_assert_eq!(c.kind(), a.kind().max(b.kind()));
            prop_assert!(AffineTransform::with_kind(c.matrix(), c.kind()).is_ok());
            let p = Point::new(3.5, -7.25);
            let direct = a.apply(b.apply(p));
            prop_assert!(direct.distance(c.apply(p)) < 1e-9);
        }
    }
}
