//! Common tangent construction between points and circles.

use super::{Disc, GeometryError, Vec2, GEOM_TOL};
use crate::scalar::Scalar;

/// A tangent segment described by its two endpoints.
pub type TangentSegment<S> = (Vec2<S>, Vec2<S>);

/// Tangent segments from a point to a circle.
///
/// Returns exactly two `(point, touch)` pairs, the counterclockwise-side touch
/// point first. Errors when `p` is inside or on the circle (tangency counts as
/// inside: a path grazing a forbidden disc is rejected rather than threaded).
pub fn point_tangents<S: Scalar>(
    p: Vec2<S>,
    d: Disc<S>,
) -> Result<[TangentSegment<S>; 2], GeometryError> {
    let offset = p - d.center;
    let dist = offset.norm();
    if dist <= d.radius + S::lit(GEOM_TOL) {
        return Err(GeometryError::PointInsideDisc);
    }
    let base = offset.angle();
    let half = (d.radius / dist).acos();
    Ok([
        (p, d.point_at(base + half)),
        (p, d.point_at(base - half)),
    ])
}

/// All common tangent segments between two circles, as `(touch1, touch2)`
/// pairs with each endpoint on its circle.
///
/// Count by configuration: 4 (disjoint), 3 (externally tangent: the internal
/// pair collapses to one degenerate segment at the touch point), 2
/// (overlapping), 0 (one circle contains the other; internal tangency is
/// folded into containment). External tangents come first, counterclockwise
/// side leading.
pub fn tangent_lines<S: Scalar>(
    d1: Disc<S>,
    d2: Disc<S>,
) -> Result<Vec<TangentSegment<S>>, GeometryError> {
    let tol = S::lit(GEOM_TOL);
    let offset = d2.center - d1.center;
    let dist = offset.norm();
    if dist <= tol {
        return Err(GeometryError::CoincidentDiscs);
    }
    let mut tangents = Vec::with_capacity(4);
    if dist <= (d1.radius - d2.radius).abs() + tol {
        return Ok(tangents); // containment (or internal tangency)
    }

    let base = offset.angle();
    // External tangents touch both circles at the same boundary angle.
    let ext = ((d1.radius - d2.radius) / dist).acos();
    for touch_angle in [base + ext, base - ext] {
        tangents.push((d1.point_at(touch_angle), d2.point_at(touch_angle)));
    }

    // Internal tangents touch at opposite boundary angles; they exist only
    // outside the overlap region and collapse to a point at external tangency.
    let gap = dist - (d1.radius + d2.radius);
    if gap.abs() <= tol {
        let touch = d1.point_at(base);
        tangents.push((touch, touch));
    } else if gap > S::zero() {
        let int = ((d1.radius + d2.radius) / dist).acos();
        for touch_angle in [base + int, base - int] {
            tangents.push((d1.point_at(touch_angle), d2.point_at(touch_angle + S::lit(std::f64::consts::PI))));
        }
    }
    Ok(tangents)
}

/// Boundary crossing points of two circles, when they intersect
/// transversally. Returns `None` for separated, contained, (near-)tangent,
/// or coincident configurations: grazing contact is not a crossing.
pub fn circle_intersections<S: Scalar>(a: Disc<S>, b: Disc<S>) -> Option<(Vec2<S>, Vec2<S>)> {
    let tol = S::lit(GEOM_TOL);
    let offset = b.center - a.center;
    let dist = offset.norm();
    if dist <= tol
        || dist >= a.radius + b.radius - tol
        || dist <= (a.radius - b.radius).abs() + tol
    {
        return None;
    }
    // Offset of the chord midpoint from a's center, along the center line.
    let along = (dist * dist + a.radius * a.radius - b.radius * b.radius)
        / (S::lit(2.0) * dist);
    let across_sq = a.radius * a.radius - along * along;
    if across_sq <= S::zero() {
        return None;
    }
    let axis = offset.scale(S::one() / dist);
    let mid = a.center + axis.scale(along);
    let side = axis.perp().scale(across_sq.sqrt());
    Some((mid + side, mid - side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type V = Vec2<f64>;

    fn unit_disc(x: f64, y: f64) -> Disc<f64> {
        Disc::new(V::new(x, y), 1.0)
    }

    #[test]
    fn point_tangents_match_right_triangle_identity() {
        // Point at distance 2 from a unit circle: touch points 60 degrees off
        // the center-to-point axis, tangent length sqrt(3). The base angle is
        // pi, so the counterclockwise-first ordering yields the lower touch.
        let p = V::new(-2.0, 0.0);
        let [(_, down), (_, up)] = point_tangents(p, unit_disc(0.0, 0.0)).unwrap();
        assert_relative_eq!(up.x, -0.5, max_relative = 1e-12);
        assert_relative_eq!(up.y, 3.0_f64.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(down.y, -(3.0_f64.sqrt()) / 2.0, max_relative = 1e-12);
        for touch in [up, down] {
            assert_relative_eq!(p.dist(touch), 3.0_f64.sqrt(), max_relative = 1e-12);
            assert_relative_eq!(touch.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn point_tangent_length_identity_far_point() {
        let [(p, t), _] = point_tangents(V::new(0.0, 5.0), unit_disc(0.0, 0.0)).unwrap();
        assert_relative_eq!(p.dist(t), 24.0_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn point_on_or_inside_circle_is_rejected() {
        let d = unit_disc(0.0, 0.0);
        assert_eq!(point_tangents(V::new(1.0, 0.0), d), Err(GeometryError::PointInsideDisc));
        assert_eq!(point_tangents(V::new(0.2, 0.1), d), Err(GeometryError::PointInsideDisc));
    }

    #[test]
    fn disjoint_unit_discs_have_four_tangents() {
        let lines = tangent_lines(unit_disc(0.0, 0.0), unit_disc(4.0, 0.0)).unwrap();
        assert_eq!(lines.len(), 4);
        // External pair: horizontal lines y = +-1.
        assert_relative_eq!(lines[0].0.y, 1.0, max_relative = 1e-12);
        assert_relative_eq!(lines[0].1.y, 1.0, max_relative = 1e-12);
        assert_relative_eq!(lines[1].0.y, -1.0, max_relative = 1e-12);
        // Internal pair crosses at the midpoint (2, 0).
        for (a, b) in &lines[2..] {
            let dir = *b - *a;
            let to_mid = V::new(2.0, 0.0) - *a;
            assert_relative_eq!(dir.cross(to_mid), 0.0, epsilon = 1e-9);
        }
        // Every endpoint on its circle.
        for (a, b) in &lines {
            assert_relative_eq!(a.norm(), 1.0, max_relative = 1e-9);
            assert_relative_eq!(b.dist(V::new(4.0, 0.0)), 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn externally_tangent_discs_collapse_internal_pair() {
        let lines = tangent_lines(unit_disc(0.0, 0.0), unit_disc(2.0, 0.0)).unwrap();
        assert_eq!(lines.len(), 3);
        let (a, b) = lines[2];
        assert_eq!(a, b);
        assert_relative_eq!(a.x, 1.0, max_relative = 1e-12);
        assert_relative_eq!(a.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn overlapping_discs_keep_only_external_pair() {
        let lines = tangent_lines(unit_disc(0.0, 0.0), unit_disc(1.0, 0.0)).unwrap();
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn unit_circles_two_apart_in_x_cross_on_the_unit_y_chord() {
        // Centers (0,0) and (1,0), both radius 1: crossings at x = 1/2,
        // y = +-sqrt(3)/2.
        let (hi, lo) =
            circle_intersections(unit_disc(0.0, 0.0), unit_disc(1.0, 0.0)).unwrap();
        assert_relative_eq!(hi.x, 0.5, max_relative = 1e-12);
        assert_relative_eq!(hi.y, 3.0_f64.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(lo.y, -(3.0_f64.sqrt()) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn non_crossing_configurations_have_no_intersections() {
        let a = unit_disc(0.0, 0.0);
        assert_eq!(circle_intersections(a, unit_disc(3.0, 0.0)), None); // separate
        assert_eq!(circle_intersections(a, unit_disc(2.0, 0.0)), None); // tangent
        assert_eq!(
            circle_intersections(Disc::new(V::new(0.0, 0.0), 3.0), unit_disc(0.5, 0.0)),
            None // contained
        );
        assert_eq!(circle_intersections(a, a), None); // coincident
    }

    #[test]
    fn contained_disc_has_no_tangents() {
        let big = Disc::new(V::new(0.0, 0.0), 3.0);
        assert!(tangent_lines(big, unit_disc(0.5, 0.0)).unwrap().is_empty());
        // Internal tangency counts as containment.
        assert!(tangent_lines(big, unit_disc(2.0, 0.0)).unwrap().is_empty());
        assert_eq!(
            tangent_lines(big, Disc::new(V::new(0.0, 0.0), 1.0)),
            Err(GeometryError::CoincidentDiscs)
        );
    }
}
