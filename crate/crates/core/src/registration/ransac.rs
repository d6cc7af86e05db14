use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fit::fit_least_squares;
use super::{residual, Match, RansacConfig};
use crate::error::{Error, Result};
use crate::transform::{AffineTransform, Point};

/// Outcome of one RANSAC round.
#[derive(Clone, Debug, PartialEq)]
pub struct RansacOutcome {
    pub transform: AffineTransform,
    pub support: usize,
    /// Indices into the input match list that agree with `transform`.
    pub inliers: Vec<usize>,
    /// Support of every sampled hypothesis, in sample order; `None` for degenerate samples.
    pub hypothesis_support: Vec<Option<usize>>,
}

impl RansacOutcome {
    pub fn best_hypothesis_support(&self) -> usize {
        self.hypothesis_support.iter().flatten().copied().max().unwrap_or(0)
    }
}

fn agreeing(t: &AffineTransform, matches: &[Match], pv: &[Point], pir: &[Point], dist: f64) -> Vec<usize> {
    matches
        .iter()
        .enumerate()
        .filter(|(_, m)| residual(t, m, pv, pir) <= dist)
        .map(|(i, _)| i)
        .collect()
}

fn count_agreeing(t: &AffineTransform, matches: &[Match], pv: &[Point], pir: &[Point], dist: f64) -> usize {
    matches.iter().filter(|m| residual(t, m, pv, pir) <= dist).count()
}

/// Hypothesize-and-verify over `cfg.samples_per_iter` minimal subsets.
///
/// Subsets are drawn with a ChaCha8 stream seeded by `seed`, so the outcome is
/// fixed for a given input regardless of thread count. The best hypothesis
/// (greatest support, earliest sample on ties) is refit by least squares on
/// its inliers; a refit is kept only while it does not lose support.
pub fn ransac_once(
    matches: &[Match],
    points_v: &[Point],
    points_ir: &[Point],
    cfg: &RansacConfig,
    ransac_distance: f64,
    seed: u64,
) -> Result<RansacOutcome> {
    let kind = cfg.model;
    let k = kind.minimal_sample();
    if matches.len() < k {
        return Err(Error::registration(
            "ransac",
            format!("{} matches, {kind} needs at least {k}", matches.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<usize>> = (0..cfg.samples_per_iter)
        .map(|_| rand::seq::index::sample(&mut rng, matches.len(), k).into_vec())
        .collect();

    let hypotheses: Vec<Option<(AffineTransform, usize)>> = samples
        .par_iter()
        .map(|idx| {
            let subset: Vec<Match> = idx.iter().map(|&i| matches[i]).collect();
            let t = fit_least_squares(&subset, points_v, points_ir, kind).ok()?;
            Some((t, count_agreeing(&t, matches, points_v, points_ir, ransac_distance)))
        })
        .collect();

    let mut best: Option<(AffineTransform, usize)> = None;
    for h in hypotheses.iter().flatten() {
        if best.is_none_or(|(_, s)| h.1 > s) {
            best = Some(*h);
        }
    }
    let (mut transform, mut support) = best.ok_or_else(|| {
        Error::registration("ransac", format!("all {} samples were degenerate", samples.len()))
    })?;

    let mut inliers = agreeing(&transform, matches, points_v, points_ir, ransac_distance);
    for _ in 0..3 {
        let subset: Vec<Match> = inliers.iter().map(|&i| matches[i]).collect();
        let Ok(refit) = fit_least_squares(&subset, points_v, points_ir, kind) else {
            break;
        };
        let refit_inliers = agreeing(&refit, matches, points_v, points_ir, ransac_distance);
        if refit_inliers.len() < support {
            break;
        }
        let converged = refit_inliers == inliers;
        transform = refit;
        support = refit_inliers.len();
        inliers = refit_inliers;
        if converged {
            break;
        }
    }

    Ok(RansacOutcome {
        transform,
        support,
        inliers,
        hypothesis_support: hypotheses.iter().map(|h| h.map(|(_, s)| s)).collect(),
    })
}

/// Convenience for callers holding plain correspondences rather than corner sets.
pub fn ransac_points(
    src: &[Point],
    dst: &[Point],
    cfg: &RansacConfig,
    ransac_distance: f64,
    seed: u64,
) -> Result<RansacOutcome> {
    if src.len() != dst.len() {
        return Err(Error::param("source and destination point counts differ"));
    }
    let matches: Vec<Match> = (0..src.len()).map(|i| Match { p: i, q: i, score: 1.0 }).collect();
    ransac_once(&matches, src, dst, cfg, ransac_distance, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::ModelKind;
    use rand::Rng;

    fn cfg(model: ModelKind) -> RansacConfig {
        RansacConfig {
            model,
            ..RansacConfig::default()
        }
    }

    #[test]
    fn consistent_translation() {
        let src: Vec<Point> = (0..20).map(|i| Point::new(i as f64 * 7.0, (i * i) as f64)).collect();
        let t = AffineTransform::translation(3.0, 4.0);
        let dst: Vec<Point> = src.iter().map(|&p| t.apply(p)).collect();
        let out = ransac_points(&src, &dst, &cfg(ModelKind::Translation), 2.0, 1).unwrap();
        assert_eq!(out.support, 20);
        assert!(out.transform.max_abs_diff(&t) < 1e-12);
    }

    #[test]
    fn translation_with_outliers_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let truth = AffineTransform::translation(5.0, 0.0);
        let mut src = Vec::new();
        let mut dst = Vec::new();
        for i in 0..200 {
            let p = Point::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0));
            src.push(p);
            if i % 10 < 7 {
                let q = truth.apply(p);
                dst.push(Point::new(q.x + rng.random_range(-0.5..0.5), q.y + rng.random_range(-0.5..0.5)));
            } else {
                dst.push(Point::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)));
            }
        }
        let out = ransac_points(&src, &dst, &cfg(ModelKind::Translation), 2.0, 7).unwrap();
        assert!((out.transform.tx() - 5.0).abs() < 0.5 && out.transform.ty().abs() < 0.5);

        // Exhaustive oracle: every single-match hypothesis is a candidate translation.
        let best_exhaustive = (0..200)
            .map(|i| {
                let t = AffineTransform::translation(dst[i].x - src[i].x, dst[i].y - src[i].y);
                (0..200).filter(|&j| t.apply(src[j]).distance(dst[j]) <= 2.0).count()
            })
            .max()
            .unwrap();
        assert!(out.best_hypothesis_support() <= best_exhaustive);
        assert!(out.support >= out.best_hypothesis_support());
    }

    #[test]
    fn two_match_hypotheses() {
        // Two matches disagreeing by 10 px: each single-match hypothesis has support 1.
        let src = [Point::new(0.0, 0.0), Point::new(50.0, 50.0)];
        let dst = [Point::new(1.0, 0.0), Point::new(61.0, 50.0)];
        let out = ransac_points(&src, &dst, &cfg(ModelKind::Translation), 2.0, 3).unwrap();
        assert_eq!(out.support, 1);
        // With a third match agreeing with the second, that hypothesis wins.
        let src3 = [src[0], src[1], Point::new(80.0, 10.0)];
        let dst3 = [dst[0], dst[1], Point::new(91.0, 10.0)];
        let out = ransac_points(&src3, &dst3, &cfg(ModelKind::Translation), 2.0, 3).unwrap();
        assert_eq!(out.support, 2);
        assert!((out.transform.tx() - 11.0).abs() < 1e-12);
        assert_eq!(out.inliers, vec![1, 2]);
    }

    #[test]
    fn too_few_matches() {
        let p = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let err = ransac_points(&p, &p, &cfg(ModelKind::Affine), 2.0, 0).unwrap_err();
        assert!(err.is_algorithmic());
    }

    #[test]
    fn all_degenerate_samples() {
        let p = [Point::new(3.0, 3.0); 5];
        let err = ransac_points(&p, &p, &cfg(ModelKind::Similarity), 2.0, 0).unwrap_err();
        assert!(matches!(err, Error::Registration { .. }), "{err}");
    }

    #[test]
    fn returned_support_is_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = AffineTransform::scale_rotation(1.05, 0.03, 4.0, -2.0);
        let src: Vec<Point> = (0..60).map(|_| Point::new(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0))).collect();
        let dst: Vec<Point> = src
            .iter()
            .enumerate()
            .map(|(i, &p)| if i % 3 == 0 { Point::new(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)) } else { truth.apply(p) })
            .collect();
        let out = ransac_points(&src, &dst, &cfg(ModelKind::Similarity), 2.0, 11).unwrap();
        assert!(out.hypothesis_support.iter().flatten().all(|&s| s <= out.support));
        assert_eq!(out.support, out.inliers.len());
    }
}
