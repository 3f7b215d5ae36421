//! Taut resynthesis of a tangent-arc path.
//!
//! The greedy walk can leave corners where it transfers along a disc-union
//! boundary or settles between near-tangent legs. Smoothing keeps only the
//! ordered wrap sequence (which disc, which rotation sense), rebuilds the
//! taut path of that sequence from common tangents, and then drops wraps
//! whose removal keeps the path collision-free while shortening it. Corners
//! in a union valley disappear because the rebuilt connector is the common
//! tangent across the outer discs.

use crate::geometry::{
    path_disc_clearance, path_length, point_tangents, self_intersects, tangent_lines,
    ArcDirection, Disc, GeometricPath, PathElement, GEOM_TOL,
};
use crate::{Point, Real};

use super::static_plan::PlanError;

const ANGLE_TOL: Real = 1e-9;

/// Clearance this negative is still "touching": tangent constructions sit
/// exactly on the boundary.
const CLEARANCE_SLACK: Real = 1e-9;

/// One wrapped disc with its rotation sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Wrap {
    pub disc: Disc<Real>,
    pub dir: ArcDirection,
}

/// Ordered wraps of a path, with immediately repeated wraps collapsed.
pub(crate) fn extract_wraps(path: &GeometricPath<Real>) -> Vec<Wrap> {
    let mut wraps: Vec<Wrap> = Vec::new();
    for element in path.elements() {
        if let PathElement::Arc { disc, .. } = *element {
            let dir = element.direction().expect("arcs have a direction");
            let wrap = Wrap { disc, dir };
            if wraps.last() != Some(&wrap) {
                wraps.push(wrap);
            }
        }
    }
    wraps
}

fn side_matches(travel: Point, to_center: Point, dir: ArcDirection) -> bool {
    match dir {
        ArcDirection::Cw => travel.cross(to_center) < 0.0,
        ArcDirection::Ccw => travel.cross(to_center) > 0.0,
    }
}

/// Common tangent leaving `a` (wrapped in `a.dir`) and arriving on `b`
/// (wrapped in `b.dir`): the external pair serves equal senses, the internal
/// pair crossing senses.
fn connecting_tangent(a: Wrap, b: Wrap) -> Option<(Point, Point)> {
    let lines = tangent_lines(a.disc, b.disc).ok()?;
    let candidates: &[(Point, Point)] = if a.dir == b.dir {
        lines.get(..2.min(lines.len()))?
    } else {
        lines.get(2..)?
    };
    candidates.iter().copied().find(|&(pa, pb)| {
        let travel = pb - pa;
        side_matches(travel, a.disc.center - pa, a.dir)
            && side_matches(travel, b.disc.center - pb, b.dir)
    })
}

fn entry_tangent(p: Point, wrap: Wrap) -> Option<Point> {
    point_tangents(p, wrap.disc).ok()?.into_iter().find_map(|(_, touch)| {
        side_matches(touch - p, wrap.disc.center - p, wrap.dir).then_some(touch)
    })
}

fn exit_tangent(wrap: Wrap, q: Point) -> Option<Point> {
    point_tangents(q, wrap.disc).ok()?.into_iter().find_map(|(_, touch)| {
        side_matches(q - touch, wrap.disc.center - touch, wrap.dir).then_some(touch)
    })
}

fn sweep_in_dir(from: Real, to: Real, dir: ArcDirection) -> Real {
    let tau = std::f64::consts::TAU;
    let raw = match dir {
        ArcDirection::Ccw => (to - from).rem_euclid(tau),
        ArcDirection::Cw => (from - to).rem_euclid(tau),
    };
    if raw <= 0.0 { tau } else { raw }
}

/// Rebuild the taut path realizing a wrap sequence. `Err(i)` blames the wrap
/// whose connector could not be built (containment, coincidence, or a
/// start/target point inside its disc).
fn synthesize(
    start: Point,
    target: Point,
    wraps: &[Wrap],
) -> Result<GeometricPath<Real>, usize> {
    let n = wraps.len();
    if n == 0 {
        if start.dist(target) <= GEOM_TOL {
            return Ok(GeometricPath::empty());
        }
        let segment = PathElement::segment(start, target).map_err(|_| 0usize)?;
        return GeometricPath::new(vec![segment]).map_err(|_| 0usize);
    }

    let mut entries = vec![Point::zero(); n];
    let mut exits = vec![Point::zero(); n];
    entries[0] = entry_tangent(start, wraps[0]).ok_or(0usize)?;
    for i in 0..n - 1 {
        let (exit, entry) = connecting_tangent(wraps[i], wraps[i + 1]).ok_or_else(|| {
            // Containment: drop the inner disc; otherwise blame the later wrap.
            let (a, b) = (wraps[i].disc, wraps[i + 1].disc);
            let d = a.center.dist(b.center);
            if d + a.radius <= b.radius { i } else { i + 1 }
        })?;
        exits[i] = exit;
        entries[i + 1] = entry;
    }
    exits[n - 1] = exit_tangent(wraps[n - 1], target).ok_or(n - 1)?;

    let mut elements: Vec<PathElement<Real>> = Vec::new();
    let mut cursor = start;
    for i in 0..n {
        if cursor.dist(entries[i]) > GEOM_TOL {
            elements.push(PathElement::segment(cursor, entries[i]).map_err(|_| i)?);
        }
        cursor = entries[i];
        let disc = wraps[i].disc;
        let entry_angle = (entries[i] - disc.center).angle();
        let exit_angle = (exits[i] - disc.center).angle();
        let sweep = sweep_in_dir(entry_angle, exit_angle, wraps[i].dir);
        // Near-zero and near-full sweeps both mean the wrap degenerated to a
        // touch point; pass straight through.
        if sweep > ANGLE_TOL && sweep < std::f64::consts::TAU - ANGLE_TOL {
            let signed_end = match wraps[i].dir {
                ArcDirection::Ccw => entry_angle + sweep,
                ArcDirection::Cw => entry_angle - sweep,
            };
            let arc = PathElement::arc(disc, entry_angle, signed_end, wraps[i].dir)
                .map_err(|_| i)?;
            cursor = arc.end_point();
            elements.push(arc);
        }
    }
    if cursor.dist(target) > GEOM_TOL {
        elements.push(PathElement::segment(cursor, target).map_err(|_| n - 1)?);
    }
    GeometricPath::new(elements).map_err(|_| n / 2)
}

fn is_clear(path: &GeometricPath<Real>, discs: &[Disc<Real>]) -> bool {
    discs
        .iter()
        .all(|disc| path_disc_clearance(path, *disc) >= -CLEARANCE_SLACK)
}

fn acceptable(path: &GeometricPath<Real>, discs: &[Disc<Real>]) -> bool {
    is_clear(path, discs) && self_intersects(path).is_none()
}

/// Largest corner angle between consecutive elements, in radians. Zero for
/// a path whose tangent is continuous; useful as a smoothness diagnostic.
pub fn path_max_kink(path: &GeometricPath<Real>) -> Real {
    let elements = path.elements();
    let mut worst: Real = 0.0;
    for pair in elements.windows(2) {
        let out_dir = pair[0].tangent_at_length(pair[0].length());
        let in_dir = pair[1].tangent_at_length(0.0);
        let angle = out_dir.dot(in_dir).clamp(-1.0, 1.0).acos();
        worst = worst.max(angle);
    }
    worst
}

/// Shorten and de-corner a greedy path while preserving clearance against
/// `discs`. Falls back to the input path when no taut rebuild is both
/// collision-free and simple.
pub fn smooth_path(
    path: GeometricPath<Real>,
    discs: &[Disc<Real>],
) -> Result<GeometricPath<Real>, PlanError> {
    let (Some(start), Some(target)) = (path.start_point(), path.end_point()) else {
        return Ok(path); // empty path: nothing to smooth
    };
    let mut best: Option<(Real, GeometricPath<Real>)> =
        acceptable(&path, discs).then(|| (path_length(&path), path.clone()));
    let mut wraps = extract_wraps(&path);

    let rounds = 10 + wraps.len();
    for _ in 0..rounds {
        match synthesize(start, target, &wraps) {
            Err(blamed) => {
                if wraps.is_empty() {
                    break;
                }
                wraps.remove(blamed.min(wraps.len() - 1));
            }
            Ok(candidate) => {
                let candidate_ok = acceptable(&candidate, discs);
                if candidate_ok {
                    let len = path_length(&candidate);
                    if best.as_ref().is_none_or(|(b, _)| len < *b) {
                        best = Some((len, candidate));
                    }
                    // Try dropping one wrap for a shorter acceptable path.
                    let improved = (0..wraps.len()).find(|&i| {
                        let mut fewer = wraps.clone();
                        fewer.remove(i);
                        synthesize(start, target, &fewer).is_ok_and(|p| {
                            acceptable(&p, discs) && path_length(&p) < len - 1e-12
                        })
                    });
                    match improved {
                        Some(i) => {
                            wraps.remove(i);
                        }
                        None => break, // fixed point
                    }
                } else {
                    // A rebuild that collides or self-crosses: look for any
                    // single removal that repairs it, else shed the middle
                    // wrap and retry.
                    let repaired = (0..wraps.len()).find(|&i| {
                        let mut fewer = wraps.clone();
                        fewer.remove(i);
                        synthesize(start, target, &fewer)
                            .is_ok_and(|p| acceptable(&p, discs))
                    });
                    match repaired {
                        Some(i) => {
                            wraps.remove(i);
                        }
                        None if !wraps.is_empty() => {
                            wraps.remove(wraps.len() / 2);
                        }
                        None => break,
                    }
                }
            }
        }
    }

    best.map(|(_, p)| p).ok_or(PlanError::NoTraversablePath)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::planner::static_plan::plan_among_discs;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn already_taut_paths_come_back_unchanged_in_length() {
        let discs = [Disc::new(Vec2::new(2.0, 0.0), 1.0)];
        let raw = plan_among_discs(
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            &discs,
            &mut rng(1),
        )
        .unwrap();
        let raw_len = path_length(&raw);
        let smooth = smooth_path(raw, &discs).unwrap();
        assert_relative_eq!(path_length(&smooth), raw_len, max_relative = 1e-9);
        // Idempotence.
        let again = smooth_path(smooth.clone(), &discs).unwrap();
        assert_relative_eq!(path_length(&again), path_length(&smooth), epsilon = 1e-12);
    }

    #[test]
    fn free_space_segment_is_a_fixed_point() {
        let raw = plan_among_discs(Vec2::new(0.0, 0.0), Vec2::new(3.0, 1.0), &[], &mut rng(1))
            .unwrap();
        let smooth = smooth_path(raw, &[]).unwrap();
        assert_eq!(smooth.elements().len(), 1);
        assert_relative_eq!(path_length(&smooth), 10.0_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn union_valley_corners_are_tautened_away() {
        // Two overlapping discs across the line force the greedy onto the
        // union boundary; the rebuilt path must be kink-free, no longer than
        // the raw one, and still clear of both discs.
        let discs = [
            Disc::new(Vec2::new(3.0, 0.0), 1.0),
            Disc::new(Vec2::new(4.2, 0.6), 1.0),
        ];
        let raw = plan_among_discs(
            Vec2::new(0.0, 0.0),
            Vec2::new(7.0, 0.0),
            &discs,
            &mut rng(2),
        )
        .unwrap();
        let raw_len = path_length(&raw);
        let smooth = smooth_path(raw, &discs).unwrap();
        assert!(path_max_kink(&smooth) <= 1e-6, "kink {}", path_max_kink(&smooth));
        assert!(path_length(&smooth) <= raw_len + 1e-9);
        for disc in &discs {
            assert!(path_disc_clearance(&smooth, *disc) >= -1e-9);
        }
        assert!(self_intersects(&smooth).is_none());
    }

    #[test]
    fn connector_segments_are_tangent_to_both_wrapped_discs() {
        let discs = [
            Disc::new(Vec2::new(2.0, 0.8), 1.0),
            Disc::new(Vec2::new(5.0, -0.8), 1.0),
        ];
        let raw = plan_among_discs(
            Vec2::new(0.0, 0.0),
            Vec2::new(7.0, 0.0),
            &discs,
            &mut rng(3),
        )
        .unwrap();
        let smooth = smooth_path(raw, &discs).unwrap();
        for element in smooth.elements() {
            if let PathElement::Segment { start, end } = *element {
                for disc in &discs {
                    // Segment endpoints on a disc boundary witness tangency.
                    for p in [start, end] {
                        let d = p.dist(disc.center);
                        if (d - disc.radius).abs() < 1e-6 {
                            assert_relative_eq!(d, disc.radius, max_relative = 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn self_crossing_input_collapses_to_the_straight_segment() {
        // A hand-built path that loops around a disc and crosses itself; the
        // disc does not separate start from end, so smoothing should shed
        // the wrap entirely.
        let disc = Disc::new(Vec2::new(3.0, 1.0), 1.0);
        let start = Vec2::new(0.0, 0.0);
        let approach = Vec2::new(3.0, 2.0); // top of the disc
        let elements = vec![
            PathElement::segment(start, approach).unwrap(),
            PathElement::arc(
                disc,
                std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2 - 1.5 * std::f64::consts::PI,
                ArcDirection::Cw,
            )
            .unwrap(),
            PathElement::segment(Vec2::new(2.0, 1.0), Vec2::new(0.2, 2.2)).unwrap(),
        ];
        let path = GeometricPath::new(elements).unwrap();
        assert!(self_intersects(&path).is_some());
        let smooth = smooth_path(path, &[disc]).unwrap();
        assert!(self_intersects(&smooth).is_none());
        assert!(path_disc_clearance(&smooth, disc) >= -1e-9);
        assert_eq!(smooth.elements().len(), 1);
        assert_relative_eq!(
            path_length(&smooth),
            start.dist(Vec2::new(0.2, 2.2)),
            max_relative = 1e-12
        );
    }

    #[test]
    fn max_kink_reports_corner_angles() {
        let corner = GeometricPath::new(vec![
            PathElement::segment(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap(),
            PathElement::segment(Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)).unwrap(),
        ])
        .unwrap();
        assert_relative_eq!(path_max_kink(&corner), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }
}
