//! Linear least-squares fitting of translation, similarity and affine models.

use crate::error::{Error, Result};
use crate::transform::{AffineTransform, ModelKind, Point};

use super::Match;

/// Pivot-ratio bound above which the normal matrix is treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Two constraint rows (one per output coordinate) for the source point `p`.
fn constraint_rows(kind: ModelKind, p: Point) -> [[f64; 6]; 2] {
    match kind {
        ModelKind::Translation => [[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]],
        // params (a, b, tx, ty): x' = a x - b y + tx, y' = b x + a y + ty
        ModelKind::Similarity => [[p.x, -p.y, 1.0, 0.0, 0.0, 0.0], [p.y, p.x, 0.0, 1.0, 0.0, 0.0]],
        // params (a11, a12, tx, a21, a22, ty)
        ModelKind::Affine => [[p.x, p.y, 1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, p.x, p.y, 1.0]],
    }
}

fn params_to_matrix(kind: ModelKind, v: &[f64]) -> [[f64; 3]; 2] {
    match kind {
        ModelKind::Translation => [[1.0, 0.0, v[0]], [0.0, 1.0, v[1]]],
        ModelKind::Similarity => [[v[0], -v[1], v[2]], [v[1], v[0], v[3]]],
        ModelKind::Affine => [[v[0], v[1], v[2]], [v[3], v[4], v[5]]],
    }
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// Fails when the ratio of largest to smallest pivot exceeds [`MAX_CONDITION`].
pub(crate) fn solve_dense(a: &mut [[f64; 6]; 6], b: &mut [f64; 6], n: usize) -> Result<[f64; 6]> {
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
        }
        let p = a[col][col];
        max_pivot = max_pivot.max(p.abs());
        min_pivot = min_pivot.min(p.abs());
        if p == 0.0 || !p.is_finite() {
            return Err(Error::DegenerateFit("singular normal matrix".into()));
        }
        for row in col + 1..n {
            let f = a[row][col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    if max_pivot / min_pivot > MAX_CONDITION {
        return Err(Error::DegenerateFit(format!(
            "normal matrix condition estimate {:.3e} exceeds {MAX_CONDITION:e}",
            max_pivot / min_pivot
        )));
    }
    let mut x = [0.0; 6];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

// Centroid and isotropic scale that bring mean distance from the centroid to 1.
fn normalization(points: impl Iterator<Item = Point> + Clone) -> (Point, f64) {
    let mut n = 0.0;
    let (mut sx, mut sy) = (0.0, 0.0);
    for p in points.clone() {
        sx += p.x;
        sy += p.y;
        n += 1.0;
    }
    let c = Point::new(sx / n, sy / n);
    let mean_dist = points.map(|p| p.distance(c)).sum::<f64>() / n;
    let scale = if mean_dist > 0.0 { 1.0 / mean_dist } else { 1.0 };
    (c, scale)
}

/// Least-squares fit of `kind` mapping source points onto destination points.
pub fn fit_points(src: &[Point], dst: &[Point], kind: ModelKind) -> Result<AffineTransform> {
    if src.len() != dst.len() {
        return Err(Error::param("source and destination point counts differ"));
    }
    let need = kind.minimal_sample();
    if src.len() < need {
        return Err(Error::DegenerateFit(format!(
            "{kind} fit needs at least {need} correspondences, got {}",
            src.len()
        )));
    }
    if kind == ModelKind::Translation {
        let n = src.len() as f64;
        let tx = src.iter().zip(dst).map(|(s, d)| d.x - s.x).sum::<f64>() / n;
        let ty = src.iter().zip(dst).map(|(s, d)| d.y - s.y).sum::<f64>() / n;
        return Ok(AffineTransform::translation(tx, ty));
    }

    // Conditioning: solve in coordinates centred on each cloud and scaled to unit spread.
    let (cs, ss) = normalization(src.iter().copied());
    let (cd, sd) = normalization(dst.iter().copied());
    let np = kind.parameter_count();
    let mut ata = [[0.0; 6]; 6];
    let mut atb = [0.0; 6];
    for (s, d) in src.iter().zip(dst) {
        let sn = Point::new((s.x - cs.x) * ss, (s.y - cs.y) * ss);
        let dn = [(d.x - cd.x) * sd, (d.y - cd.y) * sd];
        for (row, &target) in constraint_rows(kind, sn).iter().zip(&dn) {
            for i in 0..np {
                atb[i] += row[i] * target;
                for j in 0..np {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
    }
    let v = solve_dense(&mut ata, &mut atb, np)?;
    let mn = params_to_matrix(kind, &v);

    // dst = cd + (1/sd) * Mn * (ss * (src - cs))
    let k = ss / sd;
    let a = [[mn[0][0] * k, mn[0][1] * k], [mn[1][0] * k, mn[1][1] * k]];
    let t = [
        cd.x + mn[0][2] / sd - (a[0][0] * cs.x + a[0][1] * cs.y),
        cd.y + mn[1][2] / sd - (a[1][0] * cs.x + a[1][1] * cs.y),
    ];
    let m = [[a[0][0], a[0][1], t[0]], [a[1][0], a[1][1], t[1]]];
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite solution".into()));
    }
    Ok(match kind {
        ModelKind::Similarity => {
            // Re-symmetrize to remove rounding drift between the mirrored entries.
            let a = 0.5 * (m[0][0] + m[1][1]);
            let b = 0.5 * (m[1][0] - m[0][1]);
            AffineTransform::similarity(a, b, m[0][2], m[1][2])
        }
        _ => AffineTransform::affine(m),
    })
}

/// Least-squares fit over matched corner pairs.
pub fn fit_least_squares(
    matches: &[Match],
    points_v: &[Point],
    points_ir: &[Point],
    kind: ModelKind,
) -> Result<AffineTransform> {
    let (src, dst): (Vec<Point>, Vec<Point>) = matches
        .iter()
        .map(|m| (points_v[m.p], points_ir[m.q]))
        .unzip();
    fit_points(&src, &dst, kind)
}
