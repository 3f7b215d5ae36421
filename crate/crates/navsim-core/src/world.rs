//! Ground-truth world: oscillating obstacles, disturbed robot propagation,
//! and the robot's noisy, memoryless perception.
//!
//! The world is the only holder of true state. Controllers see it exclusively
//! through [`perceive`], which reports static obstacles exactly and dynamic
//! obstacles with a bounded position error; collision checking always uses
//! the truth.

use crate::geometry::{Disc, Vec2};
use crate::integrate::rk38_step;
use crate::kinematics::{self, Input, RobotState};
use crate::{Point, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum WorldError {
    /// The multiplier formula divides by span + initial offset.
    #[error("velocity span plus initial offset is zero on the {axis} axis")]
    DegenerateMultiplier { axis: char },
}

/// One oscillating obstacle: it accelerates toward its attraction point with
/// a per-axis rate proportional to the offset, so it orbits that point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObstacle {
    pub position: Point,
    pub velocity: Point,
    pub attraction: Point,
    /// Per-axis restoring rates (1/s^2): acceleration = rate * (attraction - position).
    pub stiffness: [Real; 2],
}

/// Per-axis robot velocity bounds used to scale obstacle restoring rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityBounds {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width: Real,
    pub height: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub arena: Arena,
    pub static_obstacles: Vec<Disc<Real>>,
    pub dynamic_obstacles: Vec<DynamicObstacle>,
    /// Body radius of every dynamic obstacle (static discs carry their own).
    pub obstacle_radius: Real,
    pub robot_radius: Real,
    pub perception_radius: Real,
    /// Bound on the robot's per-step position disturbance (m).
    pub disturbance_bound: Real,
    /// Bound on the perceived dynamic-obstacle position error (m).
    pub perception_error_bound: Real,
    /// Control sampling time c (s).
    pub sampling_time: Real,
    pub rng_seed: u64,
}

/// What the robot perceives in one scan: nothing is remembered between scans.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionSnapshot {
    /// The robot's own state, known exactly.
    pub robot: RobotState<Real>,
    pub visible_static: Vec<Disc<Real>>,
    pub visible_dynamic: Vec<PerceivedObstacle>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedObstacle {
    /// True position plus an error of norm at most the configured bound.
    pub position: Point,
    pub velocity: Point,
}

/// One integration step of an obstacle: both axes advance as independent
/// position/velocity pairs under the restoring acceleration.
pub fn step_dynamic_obstacle(obstacle: &DynamicObstacle, c: Real) -> DynamicObstacle {
    let axis = |pos: Real, vel: Real, att: Real, rate: Real| {
        let next = rk38_step([pos, vel], c, |s| [s[1], rate * (att - s[0])]);
        (next[0], next[1])
    };
    let (x, vx) = axis(
        obstacle.position.x,
        obstacle.velocity.x,
        obstacle.attraction.x,
        obstacle.stiffness[0],
    );
    let (y, vy) = axis(
        obstacle.position.y,
        obstacle.velocity.y,
        obstacle.attraction.y,
        obstacle.stiffness[1],
    );
    DynamicObstacle {
        position: Vec2::new(x, y),
        velocity: Vec2::new(vx, vy),
        ..*obstacle
    }
}

/// Restoring rates for an obstacle from its initial state: each axis gets
/// 0.2 * (1 + 4 * eta) divided by the robot's velocity span plus the initial
/// offset from the attraction point on that axis.
pub fn compute_multipliers(
    initial: &DynamicObstacle,
    robot_bounds: &VelocityBounds,
    eta: Real,
) -> Result<(Real, Real), WorldError> {
    debug_assert!((0.0..=1.0).contains(&eta));
    let numerator = 0.2 * (1.0 + 4.0 * eta);
    let axis = |span: Real, offset: Real, axis: char| {
        let denom = span + offset.abs();
        if denom <= 0.0 {
            Err(WorldError::DegenerateMultiplier { axis })
        } else {
            Ok(numerator / denom)
        }
    };
    let alpha = axis(
        robot_bounds.max.x - robot_bounds.min.x,
        initial.position.x - initial.attraction.x,
        'x',
    )?;
    let beta = axis(
        robot_bounds.max.y - robot_bounds.min.y,
        initial.position.y - initial.attraction.y,
        'y',
    )?;
    Ok((alpha, beta))
}

/// Nominal kinematic step plus a position disturbance drawn uniformly from
/// the disc of radius `bound`. The draw always consumes the same number of
/// random values so RNG streams stay aligned across configurations.
pub fn step_robot_truth(
    state: RobotState<Real>,
    input: Input<Real>,
    c: Real,
    bound: Real,
    rng: &mut impl Rng,
) -> RobotState<Real> {
    let nominal = kinematics::step(state, input, c);
    let radius = bound * rng.gen::<Real>().sqrt();
    let angle = rng.gen_range(0.0..TAU);
    RobotState {
        position: nominal.position + Vec2::unit(angle).scale(radius),
        heading: nominal.heading,
    }
}

/// One perception scan: static obstacles inside the perception field are
/// reported exactly; dynamic obstacles get a position error drawn uniformly
/// from the disc of the configured bound (drawn for every obstacle, visible
/// or not, to keep the stream aligned); the robot's own state is exact.
pub fn perceive(
    config: &WorldConfig,
    robot: RobotState<Real>,
    obstacles: &[DynamicObstacle],
    rng: &mut impl Rng,
) -> PerceptionSnapshot {
    let visible_static = config
        .static_obstacles
        .iter()
        .filter(|disc| {
            disc.center.dist(robot.position) <= config.perception_radius + disc.radius
        })
        .copied()
        .collect();
    let mut visible_dynamic = Vec::new();
    for obstacle in obstacles {
        let radius = config.perception_error_bound * rng.gen::<Real>().sqrt();
        let angle = rng.gen_range(0.0..TAU);
        let in_range = obstacle.position.dist(robot.position)
            <= config.perception_radius + config.obstacle_radius;
        if in_range {
            visible_dynamic.push(PerceivedObstacle {
                position: obstacle.position + Vec2::unit(angle).scale(radius),
                velocity: obstacle.velocity,
            });
        }
    }
    PerceptionSnapshot {
        robot,
        visible_static,
        visible_dynamic,
    }
}

/// Ground-truth collision: any obstacle center within the sum of body radii
/// of the robot center (closed condition: touching counts).
pub fn check_collision(
    robot_position: Point,
    config: &WorldConfig,
    obstacles: &[DynamicObstacle],
) -> bool {
    let hits_static = config
        .static_obstacles
        .iter()
        .any(|disc| disc.center.dist(robot_position) <= config.robot_radius + disc.radius);
    let hits_dynamic = obstacles.iter().any(|obstacle| {
        obstacle.position.dist(robot_position) <= config.robot_radius + config.obstacle_radius
    });
    hits_static || hits_dynamic
}

/// Mutable simulation state: the ground truth the harness advances each step.
#[derive(Debug, Clone)]
pub struct World {
    pub config: WorldConfig,
    pub robot: RobotState<Real>,
    pub obstacles: Vec<DynamicObstacle>,
    pub step_index: u64,
    rng: ChaCha8Rng,
}

impl World {
    pub fn new(config: WorldConfig, robot: RobotState<Real>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let obstacles = config.dynamic_obstacles.clone();
        Self {
            config,
            robot,
            obstacles,
            step_index: 0,
            rng,
        }
    }

    pub fn perceive(&mut self) -> PerceptionSnapshot {
        perceive(&self.config, self.robot, &self.obstacles, &mut self.rng)
    }

    /// Advance truth by one sampling interval under the applied input.
    pub fn advance(&mut self, input: Input<Real>) {
        self.robot = step_robot_truth(
            self.robot,
            input,
            self.config.sampling_time,
            self.config.disturbance_bound,
            &mut self.rng,
        );
        for obstacle in &mut self.obstacles {
            *obstacle = step_dynamic_obstacle(obstacle, self.config.sampling_time);
        }
        self.step_index += 1;
    }

    pub fn in_collision(&self) -> bool {
        check_collision(self.robot.position, &self.config, &self.obstacles)
    }

    /// Distance from the robot center to the nearest obstacle center minus
    /// both body radii (negative means overlap).
    pub fn min_obstacle_clearance(&self) -> Real {
        let from_static = self
            .config
            .static_obstacles
            .iter()
            .map(|d| d.center.dist(self.robot.position) - d.radius - self.config.robot_radius);
        let from_dynamic = self.obstacles.iter().map(|o| {
            o.position.dist(self.robot.position)
                - self.config.obstacle_radius
                - self.config.robot_radius
        });
        from_static
            .chain(from_dynamic)
            .fold(Real::INFINITY, Real::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn test_config() -> WorldConfig {
        WorldConfig {
            arena: Arena { width: 14.0, height: 14.0 },
            static_obstacles: vec![],
            dynamic_obstacles: vec![],
            obstacle_radius: 0.4,
            robot_radius: 0.3,
            perception_radius: 5.0,
            disturbance_bound: 0.02,
            perception_error_bound: 0.05,
            sampling_time: 0.1,
            rng_seed: 11,
        }
    }

    fn oscillator(offset: Real, speed: Real, rate: Real) -> DynamicObstacle {
        DynamicObstacle {
            position: Vec2::new(3.0 + offset, 2.0),
            velocity: Vec2::new(speed, 0.0),
            attraction: Vec2::new(3.0, 2.0),
            stiffness: [rate, rate],
        }
    }

    #[test]
    fn obstacle_at_attraction_point_stays_put() {
        let rest = oscillator(0.0, 0.0, 0.3);
        assert_eq!(step_dynamic_obstacle(&rest, 0.1), rest);
    }

    #[test]
    fn one_step_matches_fourth_order_taylor_of_the_oscillator() {
        // offset 1, rate 0.2, c = 0.1: position multiplier is the quartic
        // Taylor polynomial of cos(sqrt(rate) * c), velocity picks up
        // about -rate * offset * c.
        let next = step_dynamic_obstacle(&oscillator(1.0, 0.0, 0.2), 0.1);
        assert_relative_eq!(next.position.x - 3.0, 0.999_000_166_666_666_7, epsilon = 1e-15);
        assert_relative_eq!(next.velocity.x, -0.019_993_333_333_333_334, epsilon = 1e-15);
        assert_relative_eq!(next.position.y, 2.0);
        assert_relative_eq!(next.velocity.y, 0.0);
    }

    #[test]
    fn long_rollout_stays_within_the_initial_amplitude() {
        let mut obstacle = oscillator(1.0, 0.0, 0.2);
        let mut max_offset: Real = 0.0;
        for _ in 0..10_000 {
            obstacle = step_dynamic_obstacle(&obstacle, 0.1);
            max_offset = max_offset.max((obstacle.position.x - 3.0).abs());
        }
        assert!(max_offset <= 1.05, "max offset {max_offset}");
        // The orbit should genuinely oscillate, not decay away.
        assert!(max_offset > 0.9);
    }

    #[test]
    fn global_integration_error_shrinks_at_fourth_order() {
        // Stiffer oscillator keeps the measured errors well above roundoff.
        let rate: Real = 4.0;
        let span = 2.0;
        let error_at = |c: Real| {
            let steps = (span / c).round() as usize;
            let mut obstacle = oscillator(1.0, 0.0, rate);
            for _ in 0..steps {
                obstacle = step_dynamic_obstacle(&obstacle, c);
            }
            let exact = (rate.sqrt() * span).cos();
            (obstacle.position.x - 3.0 - exact).abs()
        };
        let errors: Vec<Real> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&c| error_at(c)).collect();
        for window in errors.windows(2) {
            let slope = (window[0] / window[1]).log2();
            assert!((3.7..=4.3).contains(&slope), "slope {slope}");
        }
    }

    #[test]
    fn multipliers_follow_the_span_plus_offset_formula() {
        let bounds = VelocityBounds {
            min: Vec2::new(-0.5, -1.0),
            max: Vec2::new(0.5, 1.0),
        };
        let obstacle = DynamicObstacle {
            position: Vec2::new(4.0, 2.0),
            velocity: Vec2::zero(),
            attraction: Vec2::new(3.0, 2.0),
            stiffness: [0.0, 0.0],
        };
        let (alpha, beta) = compute_multipliers(&obstacle, &bounds, 0.0).unwrap();
        assert_relative_eq!(alpha, 0.2 / (1.0 + 1.0));
        assert_relative_eq!(beta, 0.2 / (2.0 + 0.0));

        let (alpha5, beta5) = compute_multipliers(&obstacle, &bounds, 1.0).unwrap();
        assert_relative_eq!(alpha5, alpha * 5.0);
        assert_relative_eq!(beta5, beta * 5.0);
    }

    #[test]
    fn degenerate_multiplier_denominator_is_an_error() {
        let bounds = VelocityBounds {
            min: Vec2::zero(),
            max: Vec2::zero(),
        };
        let obstacle = DynamicObstacle {
            position: Vec2::new(3.0, 2.0),
            velocity: Vec2::zero(),
            attraction: Vec2::new(3.0, 2.0),
            stiffness: [0.0, 0.0],
        };
        assert_eq!(
            compute_multipliers(&obstacle, &bounds, 0.5),
            Err(WorldError::DegenerateMultiplier { axis: 'x' })
        );
    }

    #[test]
    fn undisturbed_truth_matches_the_kinematic_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = RobotState::new(Vec2::new(1.0, 2.0), FRAC_PI_2);
        let next = step_robot_truth(state, Input::new(1.0, 0.5), 0.1, 0.0, &mut rng);
        assert_relative_eq!(next.position.x, 1.0 - 0.005, max_relative = 1e-12);
        assert_relative_eq!(next.position.y, 2.1, max_relative = 1e-12);
        assert_relative_eq!(next.heading, FRAC_PI_2 + 0.05, max_relative = 1e-12);
    }

    #[test]
    fn disturbance_never_exceeds_its_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bound = 0.02;
        let state = RobotState::new(Vec2::zero(), 0.0);
        for _ in 0..10_000 {
            let next = step_robot_truth(state, Input::default(), 0.1, bound, &mut rng);
            assert!(next.position.norm() <= bound + 1e-15);
        }
    }

    #[test]
    fn perception_reports_only_obstacles_in_range() {
        let mut config = test_config();
        config.static_obstacles = vec![
            Disc::new(Vec2::new(3.0, 0.0), 0.4),
            Disc::new(Vec2::new(10.0, 0.0), 0.4),
        ];
        config.dynamic_obstacles = vec![oscillator(0.0, 0.0, 0.1)]; // at (3, 2)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let robot = RobotState::new(Vec2::zero(), 0.0);
        let snapshot = perceive(&config, robot, &config.dynamic_obstacles.clone(), &mut rng);
        assert_eq!(snapshot.visible_static.len(), 1);
        assert_relative_eq!(snapshot.visible_static[0].center.x, 3.0);
        assert_eq!(snapshot.visible_dynamic.len(), 1);
        assert_eq!(snapshot.robot, robot);
    }

    #[test]
    fn zero_noise_perception_is_exact_and_errors_respect_the_bound() {
        let mut config = test_config();
        config.dynamic_obstacles = vec![oscillator(0.5, 0.1, 0.1)];
        let robot = RobotState::new(Vec2::new(3.0, 2.0), 0.0);

        let mut exact = config.clone();
        exact.perception_error_bound = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let snapshot = perceive(&exact, robot, &exact.dynamic_obstacles.clone(), &mut rng);
        assert_eq!(snapshot.visible_dynamic[0].position, Vec2::new(3.5, 2.0));
        assert_eq!(snapshot.visible_dynamic[0].velocity, Vec2::new(0.1, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = config.dynamic_obstacles[0].position;
        for _ in 0..10_000 {
            let snap = perceive(&config, robot, &config.dynamic_obstacles.clone(), &mut rng);
            let err = snap.visible_dynamic[0].position.dist(truth);
            assert!(err <= config.perception_error_bound + 1e-15);
        }
    }

    #[test]
    fn collision_boundary_is_closed() {
        let mut config = test_config();
        let reach = config.robot_radius + config.obstacle_radius; // 0.7
        config.dynamic_obstacles = vec![DynamicObstacle {
            position: Vec2::new(reach, 0.0),
            velocity: Vec2::zero(),
            attraction: Vec2::new(reach, 0.0),
            stiffness: [0.1, 0.1],
        }];
        let obstacles = config.dynamic_obstacles.clone();
        assert!(check_collision(Vec2::zero(), &config, &obstacles));
        assert!(!check_collision(
            Vec2::new(-1e-6, 0.0),
            &config,
            &obstacles
        ));
        assert!(check_collision(Vec2::new(reach, 0.0), &config, &obstacles));
    }

    #[test]
    fn identical_seeds_reproduce_identical_rollouts() {
        let mut config = test_config();
        config.dynamic_obstacles = vec![oscillator(0.8, 0.2, 0.15)];
        let start = RobotState::new(Vec2::new(1.0, 1.0), 0.3);
        let run = || {
            let mut world = World::new(config.clone(), start);
            let mut log = Vec::new();
            for _ in 0..50 {
                let snap = world.perceive();
                log.push((snap.visible_dynamic.first().map(|o| o.position), world.robot));
                world.advance(Input::new(0.5, 0.1));
            }
            log
        };
        assert_eq!(run(), run());
    }
}
