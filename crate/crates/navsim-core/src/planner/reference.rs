//! Turning a geometric path into a trackable state/input sequence.
//!
//! Stations are sampled along the path one nominal step apart. From the
//! robot's pose the chain inverts the motion model exactly: when the bearing
//! change toward the next station fits the turn-rate bound, one step lands
//! on the station; otherwise the robot turns in place until it does. The
//! resulting sequence satisfies the discrete dynamics to machine precision,
//! which keeps the tracker's reference consistent with its own predictions.

use crate::geometry::{normalize_angle, path_length, GeometricPath};
use crate::kinematics::{step, Input, RobotState};
use crate::{Point, Real};

/// Nominal cruise speed: halfway through the admissible range, but at least
/// half the top speed so wide ranges do not crawl.
pub fn reference_speed(min_speed: Real, max_speed: Real) -> Real {
    (max_speed / 2.0).max((min_speed + max_speed) / 2.0)
}

/// Points one spacing apart along the path, ending with the exact endpoint.
/// At most `max_stations` are produced; a final sliver shorter than a tenth
/// of the spacing merges into the endpoint.
pub(crate) fn sample_stations(
    path: &GeometricPath<Real>,
    spacing: Real,
    max_stations: usize,
) -> Vec<Point> {
    let Some(end) = path.end_point() else {
        return Vec::new();
    };
    let total = path_length(path);
    let mut stations = Vec::new();
    for k in 1..=max_stations {
        let s = spacing * k as Real;
        if s >= total - 0.1 * spacing {
            break;
        }
        stations.push(path.point_at_length(s).expect("path is nonempty"));
    }
    if stations.len() < max_stations {
        stations.push(end);
    }
    stations
}

/// Inputs and the states they visit, following `stations` from `start`.
///
/// Produces exactly `input_count` inputs: forward steps that land on
/// consecutive stations, turn-in-place steps where the bearing change
/// exceeds what one step can turn, and stationary padding once the stations
/// are exhausted.
pub(crate) fn trace_stations(
    start: RobotState<Real>,
    stations: &[Point],
    input_count: usize,
    sampling_time: Real,
    max_speed: Real,
    max_turn_rate: Real,
) -> (Vec<RobotState<Real>>, Vec<Input<Real>>) {
    // Bearing change one step can absorb while inverting exactly; slightly
    // inside the bound so the computed turn rate never clips.
    let max_bearing_step = (0.999 * sampling_time * max_turn_rate).atan();

    let mut states = Vec::with_capacity(input_count + 1);
    let mut inputs = Vec::with_capacity(input_count);
    states.push(start);
    let mut current = start;
    let mut next_station = 0;

    while inputs.len() < input_count {
        let input = match stations.get(next_station) {
            None => Input::default(),
            Some(&station) => {
                let offset = station - current.position;
                if offset.norm() <= 1e-12 {
                    next_station += 1;
                    continue;
                }
                let bearing_change = normalize_angle(offset.angle() - current.heading);
                if bearing_change.abs() <= max_bearing_step {
                    // One forward step lands exactly on the station.
                    let turn_rate = bearing_change.tan() / sampling_time;
                    let speed = offset.norm()
                        / (sampling_time * (1.0 + (sampling_time * turn_rate).powi(2)).sqrt());
                    next_station += 1;
                    Input {
                        speed: speed.min(max_speed),
                        turn_rate,
                    }
                } else {
                    // Turn in place toward the station; it stays pending.
                    let turn_rate =
                        (bearing_change / sampling_time).clamp(-max_turn_rate, max_turn_rate);
                    Input { speed: 0.0, turn_rate }
                }
            }
        };
        current = step(current, input, sampling_time);
        states.push(current);
        inputs.push(input);
    }
    (states, inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArcDirection, Disc, PathElement, Vec2};
    use approx::assert_relative_eq;

    #[test]
    fn reference_speed_splits_the_admissible_range() {
        assert_relative_eq!(reference_speed(0.0, 1.0), 0.5);
        assert_relative_eq!(reference_speed(0.4, 1.0), 0.7);
        assert_relative_eq!(reference_speed(-1.0, 1.0), 0.5);
    }

    fn straight_path(length: Real) -> GeometricPath<Real> {
        GeometricPath::new(vec![
            PathElement::segment(Vec2::new(0.0, 0.0), Vec2::new(length, 0.0)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn stations_are_evenly_spaced_and_end_on_the_endpoint() {
        let path = straight_path(0.23);
        let stations = sample_stations(&path, 0.05, 20);
        assert_eq!(stations.len(), 5);
        for (k, p) in stations.iter().take(4).enumerate() {
            assert_relative_eq!(p.x, 0.05 * (k + 1) as Real, max_relative = 1e-12);
        }
        assert_relative_eq!(stations[4].x, 0.23, max_relative = 1e-12);
    }

    #[test]
    fn a_sliver_tail_merges_into_the_endpoint() {
        // 0.152 ends 2 mm past the third station, so that station merges
        // into the endpoint rather than leaving a 2 mm hop.
        let path = straight_path(0.152);
        let stations = sample_stations(&path, 0.05, 20);
        assert_eq!(stations.len(), 3);
        assert_relative_eq!(stations[2].x, 0.152, max_relative = 1e-12);
        assert!(stations[2].x - stations[1].x > 0.04);
    }

    #[test]
    fn station_cap_truncates_long_paths() {
        let path = straight_path(10.0);
        let stations = sample_stations(&path, 0.05, 10);
        assert_eq!(stations.len(), 10);
        assert_relative_eq!(stations[9].x, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn aligned_chain_is_exactly_consistent_with_the_motion_model() {
        let path = straight_path(0.5);
        let stations = sample_stations(&path, 0.05, 10);
        let start = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let (states, inputs) = trace_stations(start, &stations, 10, 0.1, 1.0, 1.0);
        assert_eq!(states.len(), 11);
        assert_eq!(inputs.len(), 10);
        for (k, input) in inputs.iter().enumerate() {
            let next = step(states[k], *input, 0.1);
            assert!(next.position.dist(states[k + 1].position) <= 1e-12);
            assert!((next.heading - states[k + 1].heading).abs() <= 1e-12);
            assert_relative_eq!(input.speed, 0.5, max_relative = 1e-12);
            assert_relative_eq!(input.turn_rate, 0.0, epsilon = 1e-12);
        }
        assert!(states[10].position.dist(Vec2::new(0.5, 0.0)) <= 1e-9);
    }

    #[test]
    fn a_kink_inserts_turn_in_place_steps() {
        // Robot facing +x, path heading +y: expect pure rotation first.
        let path = GeometricPath::new(vec![
            PathElement::segment(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.5)).unwrap(),
        ])
        .unwrap();
        let stations = sample_stations(&path, 0.05, 30);
        let start = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let (states, inputs) = trace_stations(start, &stations, 30, 0.1, 1.0, 1.0);
        // First steps are stationary rotations at the turn-rate bound.
        assert_relative_eq!(inputs[0].speed, 0.0);
        assert_relative_eq!(inputs[0].turn_rate, 1.0);
        assert!(states[1].position.dist(states[0].position) <= 1e-12);
        // About fifteen 0.1 rad steps reach pi/2; afterwards it cruises.
        let rotations = inputs.iter().take_while(|u| u.speed == 0.0).count();
        assert!((14..=16).contains(&rotations), "rotations {rotations}");
        let cruise = inputs[rotations];
        assert!(cruise.speed > 0.4);
        // Consistency still exact across the mode switch.
        for (k, input) in inputs.iter().enumerate() {
            let next = step(states[k], *input, 0.1);
            assert!(next.position.dist(states[k + 1].position) <= 1e-12);
        }
    }

    #[test]
    fn exhausted_stations_pad_with_stationary_inputs() {
        let path = straight_path(0.1);
        let stations = sample_stations(&path, 0.05, 10);
        assert_eq!(stations.len(), 2);
        let start = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let (states, inputs) = trace_stations(start, &stations, 6, 0.1, 1.0, 1.0);
        assert_eq!(inputs.len(), 6);
        for input in &inputs[2..] {
            assert_eq!(*input, Input::default());
        }
        for state in &states[2..] {
            assert!(state.position.dist(Vec2::new(0.1, 0.0)) <= 1e-9);
        }
    }

    #[test]
    fn arc_stations_respect_speed_and_turn_bounds() {
        let disc = Disc::new(Vec2::new(0.0, 0.0), 1.0);
        let path = GeometricPath::new(vec![
            PathElement::arc(disc, 0.0, std::f64::consts::PI, ArcDirection::Ccw).unwrap(),
        ])
        .unwrap();
        let stations = sample_stations(&path, 0.05, 40);
        let start = RobotState::new(Vec2::new(1.0, 0.0), std::f64::consts::FRAC_PI_2);
        let (states, inputs) = trace_stations(start, &stations, 40, 0.1, 1.0, 1.0);
        for input in &inputs {
            assert!(input.speed >= 0.0 && input.speed <= 1.0);
            assert!(input.turn_rate.abs() <= 1.0 + 1e-12);
        }
        for (k, input) in inputs.iter().enumerate() {
            let next = step(states[k], *input, 0.1);
            assert!(next.position.dist(states[k + 1].position) <= 1e-12);
        }
        // The chain hugs the unit circle.
        for state in &states {
            assert!((state.position.norm() - 1.0).abs() < 0.01);
        }
    }
}
