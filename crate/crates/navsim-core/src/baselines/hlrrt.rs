//! Horizon-limited RRT*: a sampling tree grown inside the robot's sensing
//! horizon, biased toward the target and the horizon boundary.
//!
//! Growth never checks collisions; only the finally selected branch is
//! validated against the obstacles at their currently perceived positions.
//! When no validated branch improves on the current position the planner
//! returns nothing and the caller is expected to hold still.

use crate::geometry::{GeometricPath, PathElement};
use crate::kinematics::{Input, RobotState};
use crate::optim::Budget;
use crate::world::PerceptionSnapshot;
use crate::{Point, Real};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::time::Instant;

/// A cost improvement below this is treated as a tie and rejected, which
/// keeps rewiring acyclic under floating-point arithmetic.
const REWIRE_MARGIN: Real = 1e-12;

/// Spacing of the collision probes along a candidate branch (m).
const CHECK_SPACING: Real = 0.05;

/// Tuning knobs; recorded alongside each scenario so runs are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HlrrtParams {
    /// Maximum edge length when extending toward a sample (m).
    pub steer_step: Real,
    /// Radius searched for cheaper parents and rewiring candidates (m).
    pub neighbor_radius: Real,
    /// Probability of sampling the target itself.
    pub goal_bias: Real,
    /// Probability of sampling on the horizon boundary.
    pub horizon_bias: Real,
    /// Sensing-horizon radius the tree is confined to (m).
    pub horizon_radius: Real,
    /// Pure-pursuit aim distance along the selected branch (m).
    pub lookahead: Real,
}

impl Default for HlrrtParams {
    fn default() -> Self {
        Self {
            steer_step: 0.5,
            neighbor_radius: 1.0,
            goal_bias: 0.2,
            horizon_bias: 0.3,
            horizon_radius: 5.0,
            lookahead: 0.4,
        }
    }
}

/// Everything one planning decision needs.
#[derive(Debug, Clone, Copy)]
pub struct HlrrtRequest<'a> {
    pub snapshot: &'a PerceptionSnapshot,
    pub target: Point,
    pub robot_radius: Real,
    pub obstacle_radius: Real,
    pub params: &'a HlrrtParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtNode {
    pub position: Point,
    /// None only for the root.
    pub parent: Option<usize>,
    pub cost_to_come: Real,
}

/// Search tree rooted at the robot's current position. Children lists are
/// kept alongside the parent pointers so rewiring can repair the costs of a
/// whole subtree.
#[derive(Debug, Clone)]
pub struct RrtTree {
    pub nodes: Vec<RrtNode>,
    pub horizon_radius: Real,
    pub goal_bias: Real,
    children: Vec<Vec<usize>>,
}

impl RrtTree {
    pub fn new(root: Point, horizon_radius: Real, goal_bias: Real) -> Self {
        Self {
            nodes: vec![RrtNode { position: root, parent: None, cost_to_come: 0.0 }],
            horizon_radius,
            goal_bias,
            children: vec![Vec::new()],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn nearest(&self, point: Point) -> usize {
        let mut best = 0;
        let mut best_dist = Real::INFINITY;
        for (index, node) in self.nodes.iter().enumerate() {
            let d = (node.position - point).norm_sq();
            if d < best_dist {
                best_dist = d;
                best = index;
            }
        }
        best
    }

    fn neighbors_within(&self, point: Point, radius: Real) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| node.position.dist(point) <= radius)
            .map(|(index, _)| index)
            .collect()
    }

    fn insert(&mut self, position: Point, parent: usize) -> usize {
        let cost = self.nodes[parent].cost_to_come + self.nodes[parent].position.dist(position);
        let index = self.nodes.len();
        self.nodes.push(RrtNode { position, parent: Some(parent), cost_to_come: cost });
        self.children.push(Vec::new());
        self.children[parent].push(index);
        index
    }

    /// Reroute `node` through `parent`, then push the cost change down the
    /// subtree so every stored cost stays consistent with its parent chain.
    fn rewire(&mut self, node: usize, parent: usize) {
        let old_parent = self.nodes[node].parent.expect("the root is never rewired");
        let new_cost =
            self.nodes[parent].cost_to_come + self.nodes[parent].position.dist(self.nodes[node].position);
        let delta = new_cost - self.nodes[node].cost_to_come;
        self.children[old_parent].retain(|&child| child != node);
        self.children[parent].push(node);
        self.nodes[node].parent = Some(parent);
        let mut queue = vec![node];
        while let Some(current) = queue.pop() {
            self.nodes[current].cost_to_come += delta;
            queue.extend_from_slice(&self.children[current]);
        }
    }

    /// Positions from the root to `node`, root first.
    fn branch(&self, node: usize) -> Vec<Point> {
        let mut points = Vec::new();
        let mut cursor = Some(node);
        while let Some(index) = cursor {
            points.push(self.nodes[index].position);
            cursor = self.nodes[index].parent;
        }
        points.reverse();
        points
    }

    /// Largest mismatch between a stored cost and its parent chain; zero on
    /// a healthy tree. Exposed for tests and debug assertions.
    pub fn cost_inconsistency(&self) -> Real {
        self.nodes
            .iter()
            .filter_map(|node| {
                let parent = &self.nodes[node.parent?];
                let expected = parent.cost_to_come + parent.position.dist(node.position);
                Some((node.cost_to_come - expected).abs())
            })
            .fold(0.0, Real::max)
    }
}

fn sample(request: &HlrrtRequest, rng: &mut impl Rng) -> Point {
    let params = request.params;
    let center = request.snapshot.robot.position;
    let coin: Real = rng.gen();
    if coin < params.goal_bias {
        let offset = request.target - center;
        if offset.norm() <= params.horizon_radius {
            return request.target;
        }
        // Target beyond the horizon: aim at its projection onto the boundary.
        let toward = offset.normalized().expect("offset norm exceeds the horizon radius");
        return center + toward.scale(params.horizon_radius);
    }
    if coin < params.goal_bias + params.horizon_bias {
        let angle = rng.gen_range(0.0..TAU);
        return center + Point::unit(angle).scale(params.horizon_radius);
    }
    let angle = rng.gen_range(0.0..TAU);
    let radius = params.horizon_radius * rng.gen::<Real>().sqrt();
    center + Point::unit(angle).scale(radius)
}

/// Distance from a point to the nearest obstacle surface, using the
/// currently perceived positions and nothing else.
fn surface_clearance(point: Point, request: &HlrrtRequest) -> Real {
    let snapshot = request.snapshot;
    let from_static = snapshot
        .visible_static
        .iter()
        .map(|disc| point.dist(disc.center) - disc.radius);
    let from_dynamic = snapshot
        .visible_dynamic
        .iter()
        .map(|obstacle| point.dist(obstacle.position) - request.obstacle_radius);
    from_static.chain(from_dynamic).fold(Real::INFINITY, Real::min)
}

/// True when every probe along the polyline keeps the robot body off the
/// perceived obstacles. Probes are spaced at most [`CHECK_SPACING`] apart
/// and both endpoints of every edge are always probed.
fn branch_is_clear(points: &[Point], request: &HlrrtRequest) -> bool {
    let clear = |p: Point| surface_clearance(p, request) > request.robot_radius;
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let length = a.dist(b);
        let probes = (length / CHECK_SPACING).ceil().max(1.0) as usize;
        for i in 0..=probes {
            let t = i as Real / probes as Real;
            if !clear(a + (b - a).scale(t)) {
                return false;
            }
        }
    }
    true
}

fn polyline(points: &[Point]) -> GeometricPath<Real> {
    let elements: Vec<PathElement<Real>> = points
        .windows(2)
        .filter_map(|pair| PathElement::segment(pair[0], pair[1]).ok())
        .collect();
    GeometricPath::new(elements).expect("consecutive branch points share endpoints")
}

/// Grow a tree from the current position and return the cheapest validated
/// branch that ends closer to the target, or nothing when every candidate
/// fails (the caller should hold position).
pub fn hlrrt_plan(
    request: &HlrrtRequest,
    budget: Budget,
    rng: &mut impl Rng,
) -> Option<GeometricPath<Real>> {
    let params = request.params;
    let start = request.snapshot.robot.position;
    let mut tree = RrtTree::new(start, params.horizon_radius, params.goal_bias);

    let clock = Instant::now();
    let mut iteration: u64 = 0;
    loop {
        match budget {
            Budget::Iterations(limit) => {
                if iteration >= limit {
                    break;
                }
            }
            Budget::WallClock(limit) => {
                if clock.elapsed() >= limit {
                    break;
                }
            }
        }
        iteration += 1;

        let drawn = sample(request, rng);
        let nearest = tree.nearest(drawn);
        let from = tree.nodes[nearest].position;
        let offset = drawn - from;
        let distance = offset.norm();
        if distance <= REWIRE_MARGIN {
            continue;
        }
        let position = if distance <= params.steer_step {
            drawn
        } else {
            from + offset.scale(params.steer_step / distance)
        };

        let neighbors = tree.neighbors_within(position, params.neighbor_radius);
        let parent = neighbors
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let via = |i: usize| {
                    tree.nodes[i].cost_to_come + tree.nodes[i].position.dist(position)
                };
                via(a).total_cmp(&via(b))
            })
            .unwrap_or(nearest);
        let fresh = tree.insert(position, parent);

        for neighbor in neighbors {
            let through = tree.nodes[fresh].cost_to_come
                + tree.nodes[fresh].position.dist(tree.nodes[neighbor].position);
            if through < tree.nodes[neighbor].cost_to_come - REWIRE_MARGIN {
                tree.rewire(neighbor, fresh);
                debug_assert!(tree.cost_inconsistency() <= 1e-9);
            }
        }
    }

    // Candidates that actually improve on standing still, best first; the
    // first branch that survives the collision check wins.
    let start_distance = start.dist(request.target);
    let mut candidates: Vec<usize> = (1..tree.len())
        .filter(|&i| tree.nodes[i].position.dist(request.target) < start_distance - REWIRE_MARGIN)
        .collect();
    candidates
        .sort_by(|&a, &b| {
            let d = |i: usize| tree.nodes[i].position.dist(request.target);
            d(a).total_cmp(&d(b))
        });
    candidates.into_iter().find_map(|index| {
        let points = tree.branch(index);
        (branch_is_clear(&points, request) && points.len() > 1).then(|| polyline(&points))
    })
}

/// Pure pursuit along a branch that starts at the robot: aim at the point a
/// fixed lookahead down the path, turn toward it as fast as allowed, and
/// scale speed by how well the heading already agrees.
pub fn pursue(
    path: &GeometricPath<Real>,
    robot: RobotState<Real>,
    params: &HlrrtParams,
    sampling_time: Real,
    max_speed: Real,
    max_turn_rate: Real,
) -> Input<Real> {
    let total = crate::geometry::path_length(path);
    if total <= 0.0 {
        return Input::default();
    }
    let aim_distance = params.lookahead.min(total);
    let aim = path
        .point_at_length(aim_distance)
        .expect("aim distance is clamped to the path length");
    let offset = aim - robot.position;
    if offset.norm() <= 1e-9 {
        return Input::default();
    }
    let bearing_error = crate::geometry::normalize_angle(offset.angle() - robot.heading);
    let turn_rate = (bearing_error / sampling_time).clamp(-max_turn_rate, max_turn_rate);
    let alignment = bearing_error.cos().max(0.0);
    // Slow down at branch end so the robot does not overshoot the aim point.
    let reach = (total / sampling_time).min(max_speed);
    let speed = (max_speed * alignment).min(reach);
    Input::new(speed, turn_rate)
}
