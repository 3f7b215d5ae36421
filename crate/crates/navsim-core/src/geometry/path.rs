//! Segment/arc paths: construction, length, clearance, and self-intersection.

use super::{normalize_angle, positive_angle, Disc, GeometryError, Vec2, GEOM_TOL};
use crate::scalar::Scalar;

/// Traversal direction of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcDirection {
    Ccw,
    Cw,
}

/// One path element. Arcs store a signed sweep (positive counterclockwise)
/// because start/end angles alone cannot distinguish a full circle from an
/// empty arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathElement<S> {
    Segment {
        start: Vec2<S>,
        end: Vec2<S>,
    },
    Arc {
        disc: Disc<S>,
        start_angle: S,
        sweep: S,
    },
}

impl<S: Scalar> PathElement<S> {
    /// Straight segment; endpoints must be distinct beyond tolerance.
    pub fn segment(start: Vec2<S>, end: Vec2<S>) -> Result<Self, GeometryError> {
        if start.dist(end) <= S::lit(GEOM_TOL) {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Self::Segment { start, end })
    }

    /// Arc between two boundary angles in the given direction. The sweep is
    /// normalized into (0, 2*pi); coincident angles are rejected (use
    /// [`PathElement::full_circle`] for a full turn).
    pub fn arc(
        disc: Disc<S>,
        start_angle: S,
        end_angle: S,
        direction: ArcDirection,
    ) -> Result<Self, GeometryError> {
        let magnitude = match direction {
            ArcDirection::Ccw => positive_angle(end_angle - start_angle),
            ArcDirection::Cw => positive_angle(start_angle - end_angle),
        };
        if magnitude <= S::lit(1e-12) {
            return Err(GeometryError::DegenerateArc);
        }
        let sweep = match direction {
            ArcDirection::Ccw => magnitude,
            ArcDirection::Cw => -magnitude,
        };
        Ok(Self::Arc {
            disc,
            start_angle: normalize_angle(start_angle),
            sweep,
        })
    }

    pub fn full_circle(disc: Disc<S>, start_angle: S, direction: ArcDirection) -> Self {
        let tau = S::lit(std::f64::consts::TAU);
        Self::Arc {
            disc,
            start_angle: normalize_angle(start_angle),
            sweep: match direction {
                ArcDirection::Ccw => tau,
                ArcDirection::Cw => -tau,
            },
        }
    }

    pub fn start_point(&self) -> Vec2<S> {
        match *self {
            Self::Segment { start, .. } => start,
            Self::Arc { disc, start_angle, .. } => disc.point_at(start_angle),
        }
    }

    pub fn end_point(&self) -> Vec2<S> {
        match *self {
            Self::Segment { end, .. } => end,
            Self::Arc { disc, start_angle, sweep } => disc.point_at(start_angle + sweep),
        }
    }

    pub fn end_angle(&self) -> Option<S> {
        match *self {
            Self::Segment { .. } => None,
            Self::Arc { start_angle, sweep, .. } => Some(normalize_angle(start_angle + sweep)),
        }
    }

    pub fn direction(&self) -> Option<ArcDirection> {
        match *self {
            Self::Segment { .. } => None,
            Self::Arc { sweep, .. } => Some(if sweep >= S::zero() {
                ArcDirection::Ccw
            } else {
                ArcDirection::Cw
            }),
        }
    }

    pub fn length(&self) -> S {
        match *self {
            Self::Segment { start, end } => start.dist(end),
            Self::Arc { disc, sweep, .. } => disc.radius * sweep.abs(),
        }
    }

    /// Point at curve parameter `t` in [0, length].
    pub fn point_at_length(&self, t: S) -> Vec2<S> {
        match *self {
            Self::Segment { start, end } => {
                let len = start.dist(end);
                start + (end - start).scale(t / len)
            }
            Self::Arc { disc, start_angle, sweep } => {
                let angle = start_angle + sweep.signum() * t / disc.radius;
                disc.point_at(angle)
            }
        }
    }

    /// Unit tangent (travel direction) at curve parameter `t`.
    pub fn tangent_at_length(&self, t: S) -> Vec2<S> {
        match *self {
            Self::Segment { start, end } => (end - start).scale(S::one() / start.dist(end)),
            Self::Arc { disc, start_angle, sweep } => {
                let angle = start_angle + sweep.signum() * t / disc.radius;
                let radial = Vec2::unit(angle);
                if sweep >= S::zero() {
                    radial.perp()
                } else {
                    -radial.perp()
                }
            }
        }
    }

    /// Minimum distance from the element to a point.
    pub fn distance_to_point(&self, p: Vec2<S>) -> S {
        match *self {
            Self::Segment { start, end } => segment_point_distance(start, end, p),
            Self::Arc { disc, start_angle, sweep } => {
                let offset = p - disc.center;
                let dist = offset.norm();
                if dist <= S::lit(GEOM_TOL) {
                    return disc.radius;
                }
                if arc_offset(start_angle, sweep, offset.angle()).is_some() {
                    (dist - disc.radius).abs()
                } else {
                    self.start_point().dist(p).min(self.end_point().dist(p))
                }
            }
        }
    }
}

/// Traversal offset of `angle` along an arc, if the angle lies on the arc.
/// Returned offset is the swept magnitude from the arc start, in [0, |sweep|].
fn arc_offset<S: Scalar>(start_angle: S, sweep: S, angle: S) -> Option<S> {
    let ang_tol = S::lit(1e-9);
    let rel = if sweep >= S::zero() {
        positive_angle(angle - start_angle)
    } else {
        positive_angle(start_angle - angle)
    };
    if rel <= sweep.abs() + ang_tol {
        Some(rel.min(sweep.abs()))
    } else if rel >= S::lit(std::f64::consts::TAU) - ang_tol {
        Some(S::zero())
    } else {
        None
    }
}

fn segment_point_distance<S: Scalar>(a: Vec2<S>, b: Vec2<S>, p: Vec2<S>) -> S {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).max(S::zero()).min(S::one());
    (a + ab.scale(t)).dist(p)
}

/// Connected chain of path elements.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricPath<S> {
    elements: Vec<PathElement<S>>,
}

impl<S: Scalar> GeometricPath<S> {
    /// Validates that consecutive elements share endpoints within tolerance.
    pub fn new(elements: Vec<PathElement<S>>) -> Result<Self, GeometryError> {
        for i in 1..elements.len() {
            let gap = elements[i - 1].end_point().dist(elements[i].start_point());
            if gap > S::lit(GEOM_TOL) {
                return Err(GeometryError::DisconnectedPath(i - 1, i));
            }
        }
        Ok(Self { elements })
    }

    pub fn empty() -> Self {
        Self { elements: Vec::new() }
    }

    pub fn elements(&self) -> &[PathElement<S>] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn start_point(&self) -> Option<Vec2<S>> {
        self.elements.first().map(PathElement::start_point)
    }

    pub fn end_point(&self) -> Option<Vec2<S>> {
        self.elements.last().map(PathElement::end_point)
    }

    /// Point at arc-length `s` from the path start, clamped to the endpoints.
    pub fn point_at_length(&self, s: S) -> Option<Vec2<S>> {
        let mut remaining = s.max(S::zero());
        for element in &self.elements {
            let len = element.length();
            if remaining <= len {
                return Some(element.point_at_length(remaining));
            }
            remaining = remaining - len;
        }
        self.end_point()
    }

    /// Unit travel direction at arc-length `s`, clamped to the endpoints.
    pub fn tangent_at_length(&self, s: S) -> Option<Vec2<S>> {
        let mut remaining = s.max(S::zero());
        for element in &self.elements {
            let len = element.length();
            if remaining <= len {
                return Some(element.tangent_at_length(remaining));
            }
            remaining = remaining - len;
        }
        self.elements.last().map(|e| e.tangent_at_length(e.length()))
    }
}

/// Total path length: sum of segment lengths and arc lengths.
pub fn path_length<S: Scalar>(path: &GeometricPath<S>) -> S {
    path.elements().iter().map(PathElement::length).fold(S::zero(), |a, b| a + b)
}

/// Minimum over the path of (distance to disc center) - disc radius.
/// Negative values are penetration depth.
pub fn path_disc_clearance<S: Scalar>(path: &GeometricPath<S>, d: Disc<S>) -> S {
    path.elements()
        .iter()
        .map(|e| e.distance_to_point(d.center) - d.radius)
        .fold(S::infinity(), |a, b| a.min(b))
}

/// Self-intersection test over non-adjacent element pairs; intersections at
/// endpoints shared by adjacent elements (and by the first/last element of a
/// closed path) are excluded. Returns the first intersection point in
/// traversal order.
pub fn self_intersects<S: Scalar>(path: &GeometricPath<S>) -> Option<Vec2<S>> {
    let elements = path.elements();
    let n = elements.len();
    let closed = n >= 2
        && elements[0]
            .start_point()
            .dist(elements[n - 1].end_point())
            <= S::lit(GEOM_TOL);
    let exclusion = S::lit(1e-6);
    for i in 0..n {
        let mut best: Option<(S, Vec2<S>)> = None;
        for j in (i + 1)..n {
            let mut shared: Vec<Vec2<S>> = Vec::new();
            if j == i + 1 {
                shared.push(elements[i].end_point());
            }
            if closed && i == 0 && j == n - 1 {
                shared.push(elements[0].start_point());
            }
            for (param, point) in element_intersections(&elements[i], &elements[j]) {
                if shared.iter().any(|s| s.dist(point) <= exclusion) {
                    continue;
                }
                if best.is_none_or(|(p, _)| param < p) {
                    best = Some((param, point));
                }
            }
        }
        if let Some((_, point)) = best {
            return Some(point);
        }
    }
    None
}

/// Intersection points between two elements, each tagged with its traversal
/// parameter (arc length) along the first element.
fn element_intersections<S: Scalar>(
    a: &PathElement<S>,
    b: &PathElement<S>,
) -> Vec<(S, Vec2<S>)> {
    use PathElement::*;
    match (a, b) {
        (Segment { start: a1, end: a2 }, Segment { start: b1, end: b2 }) => {
            segment_segment(*a1, *a2, *b1, *b2)
        }
        (Segment { start, end }, Arc { disc, start_angle, sweep }) => {
            segment_arc(*start, *end, *disc, *start_angle, *sweep)
        }
        (Arc { disc, start_angle, sweep }, Segment { start, end }) => {
            let hits = segment_arc(*start, *end, *disc, *start_angle, *sweep);
            hits.into_iter()
                .filter_map(|(_, p)| {
                    arc_offset(*start_angle, *sweep, (p - disc.center).angle())
                        .map(|off| (off * disc.radius, p))
                })
                .collect()
        }
        (
            Arc { disc: d1, start_angle: s1, sweep: w1 },
            Arc { disc: d2, start_angle: s2, sweep: w2 },
        ) => arc_arc(*d1, *s1, *w1, *d2, *s2, *w2),
    }
}

fn segment_segment<S: Scalar>(
    a1: Vec2<S>,
    a2: Vec2<S>,
    b1: Vec2<S>,
    b2: Vec2<S>,
) -> Vec<(S, Vec2<S>)> {
    let da = a2 - a1;
    let db = b2 - b1;
    let denom = da.cross(db);
    let len_a = da.norm();
    let scale = len_a * db.norm();
    if denom.abs() > S::lit(1e-12) * scale {
        let t = (b1 - a1).cross(db) / denom;
        let u = (b1 - a1).cross(da) / denom;
        let eps = S::lit(1e-12);
        if t >= -eps && t <= S::one() + eps && u >= -eps && u <= S::one() + eps {
            let t = t.max(S::zero()).min(S::one());
            return vec![(t * len_a, a1 + da.scale(t))];
        }
        return Vec::new();
    }
    // Parallel: collinear overlap counts when longer than tolerance.
    let offset = (b1 - a1).cross(da).abs() / len_a;
    if offset > S::lit(GEOM_TOL) {
        return Vec::new();
    }
    let proj = |p: Vec2<S>| (p - a1).dot(da) / len_a;
    let (mut lo, mut hi) = (proj(b1), proj(b2));
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let start = lo.max(S::zero());
    let end = hi.min(len_a);
    if end - start > S::lit(GEOM_TOL) {
        return vec![(start, a1 + da.scale(start / len_a))];
    }
    Vec::new()
}

/// Segment/arc intersections. Glancing contact is filtered: the segment must
/// penetrate the arc's circle deeper than tolerance, which keeps tangent
/// joints constructed by the planner from reading as crossings.
fn segment_arc<S: Scalar>(
    a1: Vec2<S>,
    a2: Vec2<S>,
    disc: Disc<S>,
    start_angle: S,
    sweep: S,
) -> Vec<(S, Vec2<S>)> {
    let min_dist = segment_point_distance(a1, a2, disc.center);
    if min_dist >= disc.radius - S::lit(GEOM_TOL) {
        return Vec::new();
    }
    let d = a2 - a1;
    let f = a1 - disc.center;
    let aa = d.norm_sq();
    let bb = f.dot(d) + f.dot(d);
    let cc = f.norm_sq() - disc.radius * disc.radius;
    let disc_val = bb * bb - S::lit(4.0) * aa * cc;
    if disc_val < S::zero() {
        return Vec::new();
    }
    let root = disc_val.sqrt();
    let two_a = aa + aa;
    let len = d.norm();
    let mut hits = Vec::new();
    let eps = S::lit(1e-12);
    for t in [(-bb - root) / two_a, (-bb + root) / two_a] {
        if t >= -eps && t <= S::one() + eps {
            let t = t.max(S::zero()).min(S::one());
            let p = a1 + d.scale(t);
            if arc_offset(start_angle, sweep, (p - disc.center).angle()).is_some() {
                hits.push((t * len, p));
            }
        }
    }
    hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    hits.dedup_by(|x, y| x.1.dist(y.1) <= S::lit(GEOM_TOL));
    hits
}

fn arc_arc<S: Scalar>(
    d1: Disc<S>,
    s1: S,
    w1: S,
    d2: Disc<S>,
    s2: S,
    w2: S,
) -> Vec<(S, Vec2<S>)> {
    let tol = S::lit(GEOM_TOL);
    let sep = d2.center - d1.center;
    let dist = sep.norm();
    if dist <= tol && (d1.radius - d2.radius).abs() <= tol {
        // Same circle: overlapping angular intervals intersect.
        return same_circle_overlap(d1, s1, w1, s2, w2);
    }
    if dist <= tol {
        return Vec::new(); // concentric, different radii
    }
    // Require genuine crossing, not grazing contact, mirroring segment_arc.
    if dist >= d1.radius + d2.radius - tol || dist <= (d1.radius - d2.radius).abs() + tol {
        return Vec::new();
    }
    let a = (dist * dist + d1.radius * d1.radius - d2.radius * d2.radius) / (dist + dist);
    let h_sq = d1.radius * d1.radius - a * a;
    if h_sq <= S::zero() {
        return Vec::new();
    }
    let h = h_sq.sqrt();
    let axis = sep.scale(S::one() / dist);
    let mid = d1.center + axis.scale(a);
    let mut hits = Vec::new();
    for p in [mid + axis.perp().scale(h), mid - axis.perp().scale(h)] {
        let on_first = arc_offset(s1, w1, (p - d1.center).angle());
        let on_second = arc_offset(s2, w2, (p - d2.center).angle());
        if let (Some(off), Some(_)) = (on_first, on_second) {
            hits.push((off * d1.radius, p));
        }
    }
    hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    hits
}

fn same_circle_overlap<S: Scalar>(d: Disc<S>, s1: S, w1: S, s2: S, w2: S) -> Vec<(S, Vec2<S>)> {
    // Walk the first arc's endpoints and the second arc's endpoints; any point
    // of one arc lying on the other indicates interval overlap.
    let candidates = [
        (S::zero(), s1),
        (w1.abs() * d.radius, s1 + w1),
        (S::nan(), s2),
        (S::nan(), s2 + w2),
    ];
    let mut hits = Vec::new();
    for (idx, (param, angle)) in candidates.into_iter().enumerate() {
        let on_first = arc_offset(s1, w1, angle);
        let on_second = arc_offset(s2, w2, angle);
        if let (Some(off1), Some(_)) = (on_first, on_second) {
            let param = if idx < 2 { param } else { off1 * d.radius };
            hits.push((param, d.point_at(angle)));
        }
    }
    hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    hits.dedup_by(|x, y| x.1.dist(y.1) <= S::lit(GEOM_TOL));
    hits
}
