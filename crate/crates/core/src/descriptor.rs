//! Edge descriptors around corners and the gradient-gated edge correlation
//! used to compare them across spectral bands.
//!
//! A descriptor holds the `w2`×`w2` windows of the binary edge raster and the
//! direction-bin raster centred on a corner. Similarity counts pixels that are
//! edges in both windows with directions at most one bin apart, normalized by
//! the square root of the second descriptor's edge count.

use crate::edges::EdgeMap;
use crate::error::{Error, Result};
use crate::features::Corner;
use crate::transform::{AffineTransform, Point};

/// Default descriptor window side.
pub const DEFAULT_WINDOW: usize = 31;

/// How two direction bins are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradTolerance {
    /// Circular bin distance `min(d, k1 - d) <= 1`; bins 0 and `k1 - 1` are adjacent.
    #[default]
    Circular,
    /// `|gp - gq| mod k1 <= 1` taken literally; no wrap-around adjacency.
    Literal,
}

/// Whether a descriptor pair may match with reversed gradient directions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Polarity {
    /// Directions are compared as-is.
    #[default]
    Signed,
    /// Score is the better of the direct comparison and the one with the second
    /// descriptor's directions rotated by half a turn (contrast reversal).
    Either,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchOptions {
    pub tolerance: GradTolerance,
    pub polarity: Polarity,
}

/// Circular-distance direction agreement.
#[inline]
pub fn same_grad(gp: usize, gq: usize, bins: usize) -> bool {
    let d = gp.abs_diff(gq) % bins;
    d.min(bins - d) <= 1
}

/// Literal `|gp - gq| mod k1 <= 1`.
#[inline]
pub fn same_grad_literal(gp: usize, gq: usize, bins: usize) -> bool {
    gp.abs_diff(gq) % bins <= 1
}

impl GradTolerance {
    #[inline]
    pub fn agrees(self, gp: usize, gq: usize, bins: usize) -> bool {
        match self {
            GradTolerance::Circular => same_grad(gp, gq, bins),
            GradTolerance::Literal => same_grad_literal(gp, gq, bins),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDescriptor {
    x: usize,
    y: usize,
    size: usize,
    bins: usize,
    edges: Vec<u8>,
    dirs: Vec<u8>,
    edge_count: usize,
    words: usize,
    // Per bin b: bitset of edge pixels whose direction is b.
    bin_masks: Vec<u64>,
    // Per bin b: bitset of edge pixels whose direction is within one bin of b (circular).
    near_masks: Vec<u64>,
}

impl EdgeDescriptor {
    /// Build from explicit windows; `edges` must be 0/1 and `dirs` below `bins`.
    pub fn from_windows(x: usize, y: usize, size: usize, bins: usize, edges: Vec<u8>, dirs: Vec<u8>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::param(format!("descriptor window must be odd, got {size}")));
        }
        if edges.len() != size * size || dirs.len() != size * size {
            return Err(Error::param("descriptor windows must be size x size"));
        }
        if !(2..=256).contains(&bins) || dirs.iter().any(|&g| g as usize >= bins) || edges.iter().any(|&e| e > 1) {
            return Err(Error::param("descriptor window values out of range"));
        }
        let words = (size * size).div_ceil(64);
        let mut bin_masks = vec![0u64; bins * words];
        let mut edge_count = 0;
        for (i, (&e, &g)) in edges.iter().zip(&dirs).enumerate() {
            if e != 0 {
                edge_count += 1;
                bin_masks[g as usize * words + i / 64] |= 1u64 << (i % 64);
            }
        }
        let mut near_masks = vec![0u64; bins * words];
        for b in 0..bins {
            for nb in [(b + bins - 1) % bins, b, (b + 1) % bins] {
                for w in 0..words {
                    near_masks[b * words + w] |= bin_masks[nb * words + w];
                }
            }
        }
        Ok(EdgeDescriptor {
            x,
            y,
            size,
            bins,
            edges,
            dirs,
            edge_count,
            words,
            bin_masks,
            near_masks,
        })
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn y(&self) -> usize {
        self.y
    }

    pub fn position(&self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }

    pub fn window_size(&self) -> usize {
        self.size
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn edges(&self) -> &[u8] {
        &self.edges
    }

    pub fn directions(&self) -> &[u8] {
        &self.dirs
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }
}

/// Copy the `w2`×`w2` windows around `corner` out of a full-image edge map.
///
/// Returns `Ok(None)` when the window would cross the image border.
pub fn build_descriptor(corner: &Corner, map: &EdgeMap, w2: usize) -> Result<Option<EdgeDescriptor>> {
    if w2 < 5 || w2.is_multiple_of(2) {
        return Err(Error::param(format!("descriptor window must be odd and >= 5, got {w2}")));
    }
    let r = w2 / 2;
    let (w, h) = (map.width(), map.height());
    if corner.x < r || corner.y < r || corner.x + r >= w || corner.y + r >= h {
        return Ok(None);
    }
    let mut edges = Vec::with_capacity(w2 * w2);
    let mut dirs = Vec::with_capacity(w2 * w2);
    for y in corner.y - r..=corner.y + r {
        let start = y * w + corner.x - r;
        edges.extend_from_slice(&map.edges()[start..start + w2]);
        dirs.extend_from_slice(&map.directions()[start..start + w2]);
    }
    EdgeDescriptor::from_windows(corner.x, corner.y, w2, map.bins(), edges, dirs).map(Some)
}

/// Descriptors for every corner whose window fits; border corners are skipped.
pub fn describe_corners(corners: &[Corner], map: &EdgeMap, w2: usize) -> Result<Vec<EdgeDescriptor>> {
    let mut out = Vec::with_capacity(corners.len());
    for c in corners {
        if let Some(d) = build_descriptor(c, map, w2)? {
            out.push(d);
        }
    }
    Ok(out)
}

fn check_compatible(dp: &EdgeDescriptor, dq: &EdgeDescriptor) -> Result<()> {
    if dp.size != dq.size || dp.bins != dq.bins {
        return Err(Error::param(format!(
            "descriptor mismatch: window {} / {} bins vs window {} / {} bins",
            dp.size, dp.bins, dq.size, dq.bins
        )));
    }
    Ok(())
}

// Count of pixels that are edges in both with agreeing directions, with q's bins
// rotated by `shift`.
fn agreement_count(dp: &EdgeDescriptor, dq: &EdgeDescriptor, tolerance: GradTolerance, shift: usize) -> usize {
    let bins = dp.bins;
    match tolerance {
        GradTolerance::Circular => {
            let words = dp.words;
            let mut n = 0u32;
            for b in 0..bins {
                let pm = &dp.bin_masks[b * words..(b + 1) * words];
                // gp = b agrees with gq + shift when gq is near b - shift.
                let qb = (b + bins - shift % bins) % bins;
                let qm = &dq.near_masks[qb * words..(qb + 1) * words];
                n += pm.iter().zip(qm).map(|(a, c)| (a & c).count_ones()).sum::<u32>();
            }
            n as usize
        }
        GradTolerance::Literal => dp
            .edges
            .iter()
            .zip(&dq.edges)
            .zip(dp.dirs.iter().zip(&dq.dirs))
            .filter(|((&ep, &eq), (&gp, &gq))| {
                ep != 0 && eq != 0 && same_grad_literal(gp as usize, (gq as usize + shift) % bins, bins)
            })
            .count(),
    }
}

/// Edge correlation normalized by `sqrt(sum E_q)`; 0 when `q` has no edges.
pub fn similarity(dp: &EdgeDescriptor, dq: &EdgeDescriptor) -> Result<f64> {
    similarity_with(dp, dq, &MatchOptions::default())
}

pub fn similarity_with(dp: &EdgeDescriptor, dq: &EdgeDescriptor, opts: &MatchOptions) -> Result<f64> {
    check_compatible(dp, dq)?;
    Ok(similarity_unchecked(dp, dq, opts))
}

#[inline]
fn similarity_unchecked(dp: &EdgeDescriptor, dq: &EdgeDescriptor, opts: &MatchOptions) -> f64 {
    if dq.edge_count == 0 || dp.edge_count == 0 {
        return 0.0;
    }
    let mut count = agreement_count(dp, dq, opts.tolerance, 0);
    if opts.polarity == Polarity::Either {
        count = count.max(agreement_count(dp, dq, opts.tolerance, dp.bins / 2));
    }
    normalized(count, dq.edge_count)
}

/// `c / sqrt(e)` evaluated as `sqrt(c^2 / e)`, which is exactly `sqrt(e)` when `c == e`.
#[inline]
fn normalized(c: usize, e: usize) -> f64 {
    let c = c as f64;
    (c * c / e as f64).sqrt()
}

/// Geometric gate: `q` is admissible for `p` only if `|T p - q| <= max_distance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub transform: AffineTransform,
    pub max_distance: f64,
}

impl Gate {
    pub fn new(transform: AffineTransform, max_distance: f64) -> Self {
        Gate {
            transform,
            max_distance,
        }
    }

    #[inline]
    pub fn admits(&self, p: Point, q: Point) -> bool {
        self.transform.apply(p).distance(q) <= self.max_distance
    }
}

/// Highest-similarity admissible candidate; ties go to the lowest index and
/// zero-similarity candidates never match.
pub fn best_match(
    dp: &EdgeDescriptor,
    candidates: &[EdgeDescriptor],
    gate: Option<&Gate>,
    opts: &MatchOptions,
) -> Result<Option<(usize, f64)>> {
    if candidates.is_empty() {
        return Err(Error::param("best_match needs at least one candidate"));
    }
    let mut best: Option<(usize, f64)> = None;
    let p = dp.position();
    for (i, dq) in candidates.iter().enumerate() {
        if let Some(g) = gate {
            if !g.admits(p, dq.position()) {
                continue;
            }
        }
        check_compatible(dp, dq)?;
        let s = similarity_unchecked(dp, dq, opts);
        if s > 0.0 && best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    Ok(best)
}
