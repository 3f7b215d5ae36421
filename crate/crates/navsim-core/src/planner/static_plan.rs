//! Greedy tangent-arc planning among inflated circular obstacles.
//!
//! Candidate paths are grown on both sides of the straight start-target
//! line: each side aims at the target, wraps the first disc that blocks the
//! way, and connects consecutive wraps with outer common tangents, keeping
//! one rotation sense per side. Overlapping discs are handled by walking the
//! union boundary, transferring at circle crossings; the corners this leaves
//! behind are the smoothing pass's job. The shorter side wins; exact ties
//! fall to a seeded coin flip.

use rand::Rng;

use crate::geometry::{
    circle_intersections, path_length, point_tangents, tangent_lines, ArcDirection, Disc,
    GeometricPath, GeometryError, PathElement, Vec2, GEOM_TOL,
};
use crate::world::PerceptionSnapshot;
use crate::{Point, Real};

/// Angular slack used when ordering events along an arc.
const ANGLE_TOL: Real = 1e-9;

/// Candidate lengths closer than this are an exact tie.
const TIE_TOL: Real = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    /// No collision-free tangent-arc path reaches the target under current
    /// perception.
    #[error("no traversable path to the target under current perception")]
    NoTraversablePath,
    /// Even the fallback search found no reachable endpoint.
    #[error("no reachable point anywhere near the target")]
    DeadEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl Side {
    /// A left detour keeps obstacles on the right, so it wraps clockwise.
    fn direction(self) -> ArcDirection {
        match self {
            Side::Left => ArcDirection::Cw,
            Side::Right => ArcDirection::Ccw,
        }
    }
}

/// Signed-area test: does `dir` keep `center` on the matching side of a
/// travel direction `travel`?
fn wrap_side_matches(travel: Point, to_center: Point, dir: ArcDirection) -> bool {
    let cross = travel.cross(to_center);
    match dir {
        ArcDirection::Cw => cross < 0.0,
        ArcDirection::Ccw => cross > 0.0,
    }
}

/// Touch point from `p` onto `disc` such that a wrap in `dir` continues the
/// incoming straight run smoothly.
fn approach_tangent(p: Point, disc: Disc<Real>, dir: ArcDirection) -> Result<Point, GeometryError> {
    let touches = point_tangents(p, disc)?;
    Ok(touches
        .into_iter()
        .map(|(_, touch)| touch)
        .find(|&touch| wrap_side_matches(touch - p, disc.center - p, dir))
        .expect("the two tangents lie on opposite sides"))
}

/// Touch point on `disc` from which the straight run to `q` leaves a wrap in
/// `dir` smoothly.
fn departure_tangent(disc: Disc<Real>, q: Point, dir: ArcDirection) -> Result<Point, GeometryError> {
    let touches = point_tangents(q, disc)?;
    Ok(touches
        .into_iter()
        .map(|(_, touch)| touch)
        .find(|&touch| wrap_side_matches(q - touch, disc.center - touch, dir))
        .expect("the two tangents lie on opposite sides"))
}

/// Outer common tangent from `a` to `b` compatible with wrapping both discs
/// in the same rotation sense.
pub(crate) fn outer_tangent(
    a: Disc<Real>,
    b: Disc<Real>,
    dir: ArcDirection,
) -> Result<(Point, Point), GeometryError> {
    let lines = tangent_lines(a, b)?;
    lines
        .iter()
        .take(2) // the external pair leads
        .copied()
        .find(|&(pa, pb)| wrap_side_matches(pb - pa, a.center - pa, dir))
        .ok_or(GeometryError::PointInsideDisc) // containment: no outer tangent
}

/// First disc strictly penetrated by the segment from `p` to `q`, by entry
/// parameter along the segment. Tangency does not count as blocking.
fn first_blocking(p: Point, q: Point, discs: &[Disc<Real>]) -> Option<(usize, Real)> {
    let d = q - p;
    let len_sq = d.norm_sq();
    if len_sq <= GEOM_TOL * GEOM_TOL {
        return None;
    }
    let mut best: Option<(usize, Real)> = None;
    for (i, disc) in discs.iter().enumerate() {
        let t_closest = ((disc.center - p).dot(d) / len_sq).clamp(0.0, 1.0);
        let closest = p + d.scale(t_closest);
        if closest.dist(disc.center) >= disc.radius - GEOM_TOL {
            continue;
        }
        // Entry parameter: smaller root of |p + t d - c|^2 = r^2.
        let pc = p - disc.center;
        let half_b = pc.dot(d);
        let c_term = pc.norm_sq() - disc.radius * disc.radius;
        let discriminant = half_b * half_b - len_sq * c_term;
        let t_enter = ((-half_b - discriminant.max(0.0).sqrt()) / len_sq).max(0.0);
        if best.is_none_or(|(_, t_best)| t_enter < t_best) {
            best = Some((i, t_enter));
        }
    }
    best
}

/// Angular distance from `from` to `to` walking in `dir`, in (0, 2pi].
fn sweep_in_dir(from: Real, to: Real, dir: ArcDirection) -> Real {
    let tau = std::f64::consts::TAU;
    let raw = match dir {
        ArcDirection::Ccw => (to - from).rem_euclid(tau),
        ArcDirection::Cw => (from - to).rem_euclid(tau),
    };
    if raw <= 0.0 { tau } else { raw }
}

fn push_segment(elements: &mut Vec<PathElement<Real>>, from: Point, to: Point) {
    if let Ok(segment) = PathElement::segment(from, to) {
        elements.push(segment);
    }
}

fn push_arc(
    elements: &mut Vec<PathElement<Real>>,
    disc: Disc<Real>,
    start_angle: Real,
    sweep: Real,
    dir: ArcDirection,
) {
    if sweep <= ANGLE_TOL {
        return;
    }
    let end_angle = match dir {
        ArcDirection::Ccw => start_angle + sweep,
        ArcDirection::Cw => start_angle - sweep,
    };
    if let Ok(arc) = PathElement::arc(disc, start_angle, end_angle, dir) {
        elements.push(arc);
    }
}

enum WalkState {
    FromPoint(Point),
    OnDisc { index: usize, angle: Real },
}

/// Where the current wrap should hand over next.
enum Handover {
    /// Leave toward the target; the run is already known clear.
    Depart(Point),
    /// Ride the outer tangent onto another wrapped disc.
    Transfer { exit: Point, entry: Point, index: usize },
}

/// Grow one side's candidate.
fn side_path(
    start: Point,
    target: Point,
    discs: &[Disc<Real>],
    side: Side,
) -> Result<GeometricPath<Real>, PlanError> {
    let dir = side.direction();
    let mut elements: Vec<PathElement<Real>> = Vec::new();
    let mut state = WalkState::FromPoint(start);
    let transitions = 8 + 6 * discs.len().max(1);

    for _ in 0..transitions {
        match state {
            WalkState::FromPoint(p) => {
                let Some((mut block, _)) = first_blocking(p, target, discs) else {
                    push_segment(&mut elements, p, target);
                    return GeometricPath::new(elements).map_err(|_| PlanError::NoTraversablePath);
                };
                // Settle on the disc whose tangent leg is itself clear.
                let mut touch = approach_tangent(p, discs[block], dir)
                    .map_err(|_| PlanError::NoTraversablePath)?;
                let mut settled = false;
                for _ in 0..=discs.len() {
                    match first_blocking(p, touch, discs) {
                        None => {
                            settled = true;
                            break;
                        }
                        Some((other, _)) => {
                            block = other;
                            touch = approach_tangent(p, discs[block], dir)
                                .map_err(|_| PlanError::NoTraversablePath)?;
                        }
                    }
                }
                if !settled {
                    return Err(PlanError::NoTraversablePath);
                }
                push_segment(&mut elements, p, touch);
                state = WalkState::OnDisc {
                    index: block,
                    angle: (touch - discs[block].center).angle(),
                };
            }
            WalkState::OnDisc { index, angle } => {
                let disc = discs[index];
                let depart_touch = departure_tangent(disc, target, dir)
                    .map_err(|_| PlanError::NoTraversablePath)?;
                let (exit_angle, handover) = match first_blocking(depart_touch, target, discs) {
                    None => ((depart_touch - disc.center).angle(), Handover::Depart(depart_touch)),
                    Some((mut block, _)) => {
                        let (mut exit, mut entry) = outer_tangent(disc, discs[block], dir)
                            .map_err(|_| PlanError::NoTraversablePath)?;
                        let mut settled = false;
                        for _ in 0..=discs.len() {
                            match first_blocking(exit, entry, discs) {
                                None => {
                                    settled = true;
                                    break;
                                }
                                Some((other, _)) if other != index => {
                                    block = other;
                                    (exit, entry) = outer_tangent(disc, discs[block], dir)
                                        .map_err(|_| PlanError::NoTraversablePath)?;
                                }
                                Some(_) => return Err(PlanError::NoTraversablePath),
                            }
                        }
                        if !settled {
                            return Err(PlanError::NoTraversablePath);
                        }
                        (
                            (exit - disc.center).angle(),
                            Handover::Transfer { exit, entry, index: block },
                        )
                    }
                };

                // Union boundaries: transfer at the first crossing into an
                // overlapping disc, if one comes before the planned exit.
                let exit_sweep = sweep_in_dir(angle, exit_angle, dir);
                let mut first_cross: Option<(Real, usize, Point)> = None;
                for (j, other) in discs.iter().enumerate() {
                    if j == index {
                        continue;
                    }
                    let Some((q1, q2)) = circle_intersections(disc, *other) else {
                        continue;
                    };
                    for q in [q1, q2] {
                        let s = sweep_in_dir(angle, (q - disc.center).angle(), dir);
                        if s <= ANGLE_TOL || s >= exit_sweep - ANGLE_TOL {
                            continue;
                        }
                        // Entering iff travel at q points into the other disc.
                        let q_angle = (q - disc.center).angle();
                        let travel = match dir {
                            ArcDirection::Ccw => Vec2::new(-q_angle.sin(), q_angle.cos()),
                            ArcDirection::Cw => Vec2::new(q_angle.sin(), -q_angle.cos()),
                        };
                        if travel.dot(q - other.center) >= 0.0 {
                            continue;
                        }
                        if first_cross.is_none_or(|(s_best, ..)| s < s_best) {
                            first_cross = Some((s, j, q));
                        }
                    }
                }

                match first_cross {
                    Some((s, j, q)) => {
                        push_arc(&mut elements, disc, angle, s, dir);
                        state = WalkState::OnDisc {
                            index: j,
                            angle: (q - discs[j].center).angle(),
                        };
                    }
                    None => {
                        push_arc(&mut elements, disc, angle, exit_sweep, dir);
                        match handover {
                            Handover::Depart(touch) => state = WalkState::FromPoint(touch),
                            Handover::Transfer { exit, entry, index: j } => {
                                push_segment(&mut elements, exit, entry);
                                state = WalkState::OnDisc {
                                    index: j,
                                    angle: (entry - discs[j].center).angle(),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    Err(PlanError::NoTraversablePath)
}

/// Shrink (or drop) discs so the start point lies strictly outside every one
/// of them, allowing escape from a region an obstacle has closed over.
pub(crate) fn escape_shrink(start: Point, discs: &[Disc<Real>]) -> Vec<Disc<Real>> {
    discs
        .iter()
        .filter_map(|disc| {
            let dist = start.dist(disc.center);
            if dist >= disc.radius + 1e-6 {
                Some(*disc)
            } else if dist > 2e-6 {
                Some(Disc::new(disc.center, dist - 1e-6))
            } else {
                None
            }
        })
        .collect()
}

/// Drop discs wholly contained in a kept disc. They add nothing to the
/// blocked region, while their degenerate tangent geometry breaks the union
/// walk. Larger discs are considered first; original order is preserved.
pub(crate) fn drop_contained(discs: Vec<Disc<Real>>) -> Vec<Disc<Real>> {
    let mut order: Vec<usize> = (0..discs.len()).collect();
    order.sort_by(|&a, &b| discs[b].radius.total_cmp(&discs[a].radius).then(a.cmp(&b)));
    let mut keep = vec![true; discs.len()];
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let swallowed = kept.iter().any(|&k| {
            discs[k].center.dist(discs[i].center) + discs[i].radius
                <= discs[k].radius + GEOM_TOL
        });
        if swallowed {
            keep[i] = false;
        } else {
            kept.push(i);
        }
    }
    discs
        .into_iter()
        .zip(keep)
        .filter_map(|(disc, kept)| kept.then_some(disc))
        .collect()
}

/// The disc set the walk actually plans against: shrunk so the start can
/// escape, with swallowed discs dropped. Smoothing must validate against
/// this same set, or a start inside an inflated disc rejects every path.
pub(crate) fn effective_discs(start: Point, inflated: &[Disc<Real>]) -> Vec<Disc<Real>> {
    drop_contained(escape_shrink(start, inflated))
}

/// Shortest greedy tangent-arc path among already-inflated discs, trying
/// both sides of the straight connecting line; equal lengths are settled by
/// a coin flip from `rng`.
pub fn plan_among_discs(
    start: Point,
    target: Point,
    inflated: &[Disc<Real>],
    rng: &mut impl Rng,
) -> Result<GeometricPath<Real>, PlanError> {
    if start.dist(target) <= GEOM_TOL {
        return Ok(GeometricPath::empty());
    }
    let discs = effective_discs(start, inflated);
    if discs
        .iter()
        .any(|disc| target.dist(disc.center) < disc.radius - GEOM_TOL)
    {
        return Err(PlanError::NoTraversablePath);
    }

    let left = side_path(start, target, &discs, Side::Left);
    let right = side_path(start, target, &discs, Side::Right);
    match (left, right) {
        (Ok(l), Ok(r)) => {
            let (len_l, len_r) = (path_length(&l), path_length(&r));
            if (len_l - len_r).abs() <= TIE_TOL {
                Ok(if rng.gen_bool(0.5) { l } else { r })
            } else if len_l < len_r {
                Ok(l)
            } else {
                Ok(r)
            }
        }
        (Ok(l), Err(_)) => Ok(l),
        (Err(_), Ok(r)) => Ok(r),
        (Err(_), Err(_)) => Err(PlanError::NoTraversablePath),
    }
}

/// Inflate the perceived static obstacles by the safety radius and plan
/// between `start` and `target`.
pub fn plan_static(
    snapshot: &PerceptionSnapshot,
    start: Point,
    target: Point,
    safety_radius: Real,
    rng: &mut impl Rng,
) -> Result<GeometricPath<Real>, PlanError> {
    let inflated: Vec<Disc<Real>> = snapshot
        .visible_static
        .iter()
        .map(|disc| Disc::new(disc.center, safety_radius))
        .collect();
    plan_among_discs(start, target, &inflated, rng)
}

/// Replacement endpoint when the requested target is unreachable under
/// current perception: the reachable candidate closest to the target,
/// searched over inflated-disc boundaries and the pulled-back perception
/// boundary.
pub fn fallback_target(
    snapshot: &PerceptionSnapshot,
    target: Point,
    safety_radius: Real,
    perception_radius: Real,
    extra_discs: &[Disc<Real>],
    rng: &mut impl Rng,
) -> Result<Point, PlanError> {
    let start = snapshot.robot.position;
    let mut discs: Vec<Disc<Real>> = snapshot
        .visible_static
        .iter()
        .map(|disc| Disc::new(disc.center, safety_radius))
        .collect();
    discs.extend_from_slice(extra_discs);

    let reach = (perception_radius - safety_radius).max(safety_radius);
    let mut candidates: Vec<Point> = Vec::new();
    // The ray toward the target, cut at the reachable boundary.
    if start.dist(target) > GEOM_TOL {
        let dir = (target - start).scale(1.0 / start.dist(target));
        candidates.push(start + dir.scale(reach.min(start.dist(target))));
    }
    let ring = |center: Point, radius: Real, count: usize, out: &mut Vec<Point>| {
        for i in 0..count {
            let angle = std::f64::consts::TAU * i as Real / count as Real;
            out.push(center + Vec2::unit(angle).scale(radius));
        }
    };
    ring(start, reach, 128, &mut candidates);
    for disc in &discs {
        ring(disc.center, disc.radius + 1e-6, 64, &mut candidates);
    }

    let mut viable: Vec<(Real, Point)> = candidates
        .into_iter()
        .filter(|p| p.dist(start) <= reach + 1e-6)
        .filter(|p| {
            discs
                .iter()
                .all(|disc| p.dist(disc.center) >= disc.radius - GEOM_TOL)
        })
        .map(|p| (p.dist(target), p))
        .collect();
    viable.sort_by(|a, b| a.0.total_cmp(&b.0));

    for (_, candidate) in viable {
        if plan_among_discs(start, candidate, &discs, rng).is_ok() {
            return Ok(candidate);
        }
    }
    Err(PlanError::DeadEnd)
}
