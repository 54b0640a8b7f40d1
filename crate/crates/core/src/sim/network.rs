//! Synthetic road networks.
//!
//! Roads carry one lane per direction, 5 m wide, with right-hand traffic.
//! Every straight road ends in U-turn connectors so its two lanes form a
//! loop, and lanes of crossing roads are split at each crossing point so a
//! vehicle may continue straight or turn onto the crossing lane. Sidewalks
//! run 7 m either side of the road centre, each holding two walkways in
//! opposite directions.

use std::f64::consts::PI;

use crate::schema::{ActorClass, MapId};

pub type Point = (f64, f64);

pub const LANE_WIDTH: f64 = 5.0;
pub const SIDEWALK_OFFSET: f64 = 7.0;
pub const WALKWAY_HALF_GAP: f64 = 0.5;
pub const VEHICLE_SLOT_SPACING: f64 = 8.0;
pub const PEDESTRIAN_SLOT_SPACING: f64 = 2.0;
/// Pedestrian spawn points keep this far from any lane centreline.
pub const PEDESTRIAN_LANE_CLEARANCE: f64 = 3.0;

const ARC_STEPS: usize = 12;
const RING_STEPS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Lane,
    Connector,
    Walkway,
}

/// A directed polyline with the paths an agent may continue onto.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub kind: PathKind,
    pub successors: Vec<usize>,
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Path {
    pub fn new(kind: PathKind, points: Vec<Point>) -> Self {
        assert!(points.len() >= 2, "a path needs at least two points");
        let mut cumulative = Vec::with_capacity(points.len());
        let mut total = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            total += dist(w[0], w[1]);
            cumulative.push(total);
        }
        Self {
            kind,
            successors: Vec::new(),
            points,
            cumulative,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Position and heading at arc length `s`, clamped to the path.
    pub fn pose_at(&self, s: f64) -> (Point, f64) {
        let s = s.clamp(0.0, self.length());
        let i = match self.cumulative.partition_point(|&c| c <= s) {
            0 => 0,
            n => (n - 1).min(self.points.len() - 2),
        };
        let (a, b) = (self.points[i], self.points[i + 1]);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let t = if seg > 0.0 { (s - self.cumulative[i]) / seg } else { 0.0 };
        let p = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
        (p, normalize_heading((b.1 - a.1).atan2(b.0 - a.0)))
    }

    /// Shortest distance from `p` to the polyline.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.points
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Maps an angle into [-pi, pi).
pub fn normalize_heading(h: f64) -> f64 {
    let r = (h + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, (a.0 + dx * t, a.1 + dy * t))
}

/// Parameter along `a->b` where it properly crosses `c->d`.
fn crossing(a: Point, b: Point, c: Point, d: Point) -> Option<(f64, f64)> {
    let r = (b.0 - a.0, b.1 - a.1);
    let s = (d.0 - c.0, d.1 - c.1);
    let denom = r.0 * s.1 - r.1 * s.0;
    if denom.abs() < 1e-12 {
        return None;
    }
    let q = (c.0 - a.0, c.1 - a.1);
    let t = (q.0 * s.1 - q.1 * s.0) / denom;
    let u = (q.0 * r.1 - q.1 * r.0) / denom;
    let inside = |v: f64| v > 1e-9 && v < 1.0 - 1e-9;
    (inside(t) && inside(u)).then_some((t, u))
}

/// Half circle of radius `r` around `c`, from `c + r*a` through `c + r*b` to `c - r*a`.
fn half_arc(c: Point, r: f64, a: Point, b: Point) -> Vec<Point> {
    (0..=ARC_STEPS)
        .map(|k| {
            let th = PI * k as f64 / ARC_STEPS as f64;
            let (co, si) = (th.cos(), th.sin());
            (c.0 + r * (co * a.0 + si * b.0), c.1 + r * (co * a.1 + si * b.1))
        })
        .collect()
}

fn circle(c: Point, r: f64, ccw: bool) -> Vec<Point> {
    (0..=RING_STEPS)
        .map(|k| {
            let k = if k == RING_STEPS { 0 } else { k };
            let mut th = 2.0 * PI * k as f64 / RING_STEPS as f64;
            if !ccw {
                th = -th;
            }
            (c.0 + r * th.cos(), c.1 + r * th.sin())
        })
        .collect()
}

/// A place an agent can be spawned: a path and an arc length on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpawnPoint {
    pub path: usize,
    pub s: f64,
    pub position: Point,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    pub map: Option<MapId>,
    pub paths: Vec<Path>,
    pub lane_width: f64,
    /// Sidewalk centrelines, for reference and rendering.
    pub sidewalks: Vec<Vec<Point>>,
    vehicle_spawns: Vec<SpawnPoint>,
    bicycle_spawns: Vec<SpawnPoint>,
    pedestrian_spawns: Vec<SpawnPoint>,
}

impl RoadNetwork {
    /// A network from hand-built paths; spawn points are computed the same way as for shipped maps.
    pub fn from_paths(paths: Vec<Path>, sidewalks: Vec<Vec<Point>>) -> Self {
        let mut net = Self {
            map: None,
            paths,
            lane_width: LANE_WIDTH,
            sidewalks,
            vehicle_spawns: Vec::new(),
            bicycle_spawns: Vec::new(),
            pedestrian_spawns: Vec::new(),
        };
        net.compute_spawns();
        net
    }

    pub fn for_map(map: MapId) -> Self {
        let mut b = Builder::default();
        match map {
            MapId::Town01 => b.road((0.0, 0.0), (500.0, 0.0)),
            MapId::Town02 => {
                b.road((0.0, 0.0), (400.0, 0.0));
                b.road((0.0, 60.0), (400.0, 60.0));
            }
            MapId::Town03 => b.grid(&[75.0, 225.0], 300.0),
            MapId::Town04 => b.ring((150.0, 150.0), 80.0),
            MapId::Town05 => b.grid(&[50.0, 200.0, 350.0], 400.0),
        }
        let mut net = b.finish();
        net.map = Some(map);
        net
    }

    pub fn spawn_points(&self, class: ActorClass) -> &[SpawnPoint] {
        match class {
            ActorClass::Vehicle => &self.vehicle_spawns,
            ActorClass::Bicycle => &self.bicycle_spawns,
            ActorClass::Pedestrian => &self.pedestrian_spawns,
        }
    }

    fn lane_paths(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter().filter(|p| p.kind != PathKind::Walkway)
    }

    fn compute_spawns(&mut self) {
        // Lane slots: greedy, globally spaced; even slots for vehicles, odd for bicycles.
        let mut lane_slots: Vec<SpawnPoint> = Vec::new();
        for (i, path) in self.paths.iter().enumerate() {
            if path.kind != PathKind::Lane {
                continue;
            }
            let mut s = 1.0;
            while s < path.length() - 1.0 {
                let (position, heading) = path.pose_at(s);
                if lane_slots.iter().all(|q| dist(q.position, position) >= VEHICLE_SLOT_SPACING) {
                    lane_slots.push(SpawnPoint { path: i, s, position, heading });
                }
                s += 2.0;
            }
        }
        self.vehicle_spawns = lane_slots.iter().step_by(2).copied().collect();
        self.bicycle_spawns = lane_slots.iter().skip(1).step_by(2).copied().collect();

        let mut ped_slots: Vec<SpawnPoint> = Vec::new();
        for (i, path) in self.paths.iter().enumerate() {
            if path.kind != PathKind::Walkway {
                continue;
            }
            let mut s = 0.5;
            while s < path.length() - 0.5 {
                let (position, heading) = path.pose_at(s);
                let clear_of_lanes = self
                    .lane_paths()
                    .all(|l| l.distance_to(position) >= PEDESTRIAN_LANE_CLEARANCE);
                if clear_of_lanes
                    && ped_slots
                        .iter()
                        .all(|q| dist(q.position, position) >= PEDESTRIAN_SLOT_SPACING)
                {
                    ped_slots.push(SpawnPoint { path: i, s, position, heading });
                }
                s += 1.0;
            }
        }
        self.pedestrian_spawns = ped_slots;
    }
}

#[derive(Default)]
struct Builder {
    /// Straight lanes as (start, end, index of the opposite lane).
    lanes: Vec<(Point, Point, usize)>,
    loops: Vec<Path>,
    walkways: Vec<Path>,
    sidewalks: Vec<Vec<Point>>,
}

impl Builder {
    fn road(&mut self, a: Point, b: Point) {
        let len = dist(a, b);
        let u = ((b.0 - a.0) / len, (b.1 - a.1) / len);
        let n = (-u.1, u.0);
        let off = |p: Point, k: f64| (p.0 + n.0 * k, p.1 + n.1 * k);
        let h = LANE_WIDTH / 2.0;
        let fwd = self.lanes.len();
        self.lanes.push((off(a, -h), off(b, -h), fwd + 1));
        self.lanes.push((off(b, h), off(a, h), fwd));

        for side in [-1.0, 1.0] {
            let centre = side * SIDEWALK_OFFSET;
            self.sidewalks.push(vec![off(a, centre), off(b, centre)]);
            // Two walkways in opposite directions; each ends where the other starts.
            let inner = centre - side * WALKWAY_HALF_GAP;
            let outer = centre + side * WALKWAY_HALF_GAP;
            let (from, to) = if side < 0.0 { (a, b) } else { (b, a) };
            let start = self.walkways.len();
            let mut out = Path::new(PathKind::Walkway, vec![off(from, inner), off(to, inner), off(to, outer)]);
            let mut back = Path::new(PathKind::Walkway, vec![off(to, outer), off(from, outer), off(from, inner)]);
            out.successors = vec![start + 1];
            back.successors = vec![start];
            self.walkways.push(out);
            self.walkways.push(back);
        }
    }

    fn grid(&mut self, at: &[f64], extent: f64) {
        for &c in at {
            self.road((0.0, c), (extent, c));
        }
        for &c in at {
            self.road((c, 0.0), (c, extent));
        }
    }

    fn ring(&mut self, c: Point, r: f64) {
        let h = LANE_WIDTH / 2.0;
        let mut outer = Path::new(PathKind::Lane, circle(c, r + h, true));
        let mut inner = Path::new(PathKind::Lane, circle(c, r - h, false));
        outer.successors = vec![0];
        inner.successors = vec![1];
        self.loops.push(outer);
        self.loops.push(inner);
        for centre in [r - SIDEWALK_OFFSET, r + SIDEWALK_OFFSET] {
            self.sidewalks.push(circle(c, centre, true));
            let start = self.walkways.len();
            let mut a = Path::new(PathKind::Walkway, circle(c, centre - WALKWAY_HALF_GAP, true));
            let mut b = Path::new(PathKind::Walkway, circle(c, centre + WALKWAY_HALF_GAP, false));
            a.successors = vec![start];
            b.successors = vec![start + 1];
            self.walkways.push(a);
            self.walkways.push(b);
        }
    }

    fn finish(self) -> RoadNetwork {
        let mut paths: Vec<Path> = self.loops;

        // Crossing parameters per lane, as (t on this lane, other lane, t on other lane).
        let n = self.lanes.len();
        let mut cuts: Vec<Vec<(f64, usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                let (a, b, _) = self.lanes[i];
                let (c, d, _) = self.lanes[j];
                if let Some((t, u)) = crossing(a, b, c, d) {
                    cuts[i].push((t, j, u));
                    cuts[j].push((u, i, t));
                }
            }
        }
        for c in &mut cuts {
            c.sort_by(|x, y| x.0.total_cmp(&y.0));
        }

        // Segment ids: lane i, piece k covers [cut k-1, cut k].
        let base = paths.len();
        let mut first_seg = Vec::with_capacity(n);
        let mut next_id = base;
        for c in &cuts {
            first_seg.push(next_id);
            next_id += c.len() + 1;
        }
        let connector_base = next_id;
        let seg_starting_at = |lane: usize, t: f64| -> usize {
            let k = cuts[lane].iter().position(|c| (c.0 - t).abs() < 1e-12).unwrap();
            first_seg[lane] + k + 1
        };

        for i in 0..n {
            let (a, b, _) = self.lanes[i];
            let at = |t: f64| (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            let mut ts: Vec<f64> = vec![0.0];
            ts.extend(cuts[i].iter().map(|c| c.0));
            ts.push(1.0);
            for k in 0..ts.len() - 1 {
                let mut p = Path::new(PathKind::Lane, vec![at(ts[k]), at(ts[k + 1])]);
                p.successors = if k < cuts[i].len() {
                    let (_, other, u) = cuts[i][k];
                    vec![first_seg[i] + k + 1, seg_starting_at(other, u)]
                } else {
                    vec![connector_base + i]
                };
                paths.push(p);
            }
        }
        for i in 0..n {
            let (a, b, opp) = self.lanes[i];
            let len = dist(a, b);
            let u = ((b.0 - a.0) / len, (b.1 - a.1) / len);
            let (oa, _, _) = self.lanes[opp];
            let centre = ((b.0 + oa.0) / 2.0, (b.1 + oa.1) / 2.0);
            let r = dist(b, oa) / 2.0;
            let radial = ((b.0 - centre.0) / r, (b.1 - centre.1) / r);
            let mut p = Path::new(PathKind::Connector, half_arc(centre, r, radial, u));
            p.successors = vec![first_seg[opp]];
            paths.push(p);
        }

        let walk_base = paths.len();
        for mut w in self.walkways {
            for s in &mut w.successors {
                *s += walk_base;
            }
            paths.push(w);
        }
        RoadNetwork::from_paths(paths, self.sidewalks)
    }
}
