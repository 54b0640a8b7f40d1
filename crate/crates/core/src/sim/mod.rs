//! Deterministic kinematic traffic simulator.
//!
//! One run is single-threaded and draws all randomness from one
//! [`SplitMix64`](crate::rng::SplitMix64) stream seeded by the config, so a
//! config always produces the same trace.

pub mod network;
mod world;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::schema::{ActorClass, ScenarioConfig};
pub use network::{Path, PathKind, Point, RoadNetwork, SpawnPoint};
pub use world::{build_world, weather_factor, Agent, World, HEADWAY_M, RUN_SPEED, WALK_SPEED};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cannot spawn {requested} {class}: the map has {available} spawn points")]
    SpawnOverflow {
        class: ActorClass,
        requested: usize,
        available: usize,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AgentFlags {
    pub stationary: bool,
    pub doors_open: bool,
    pub running: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub agent_id: u32,
    pub class: ActorClass,
    pub position: [f64; 3],
    /// Radians in [-pi, pi).
    pub heading: f64,
    pub speed: f64,
    pub flags: AgentFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub timestamp_s: f64,
    pub agents: Vec<AgentState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collision {
    pub frame: usize,
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub config: ScenarioConfig,
    pub frames: Vec<Frame>,
    pub collisions: Vec<Collision>,
}

/// Disc radius used for collision checks.
pub fn collision_radius(class: ActorClass, flags: AgentFlags) -> f64 {
    match class {
        ActorClass::Vehicle if flags.doors_open => 2.3,
        ActorClass::Vehicle => 2.0,
        ActorClass::Bicycle => 0.8,
        ActorClass::Pedestrian => 0.4,
    }
}

/// Records a collision once per contiguous run of frames in contact.
#[derive(Debug, Default)]
pub struct CollisionTracker {
    touching: BTreeSet<(u32, u32)>,
    pub events: Vec<Collision>,
}

impl CollisionTracker {
    pub fn observe(&mut self, frame: usize, agents: &[AgentState]) {
        let mut now = BTreeSet::new();
        for (i, a) in agents.iter().enumerate() {
            for b in &agents[i + 1..] {
                let d = network::dist((a.position[0], a.position[1]), (b.position[0], b.position[1]));
                if d < collision_radius(a.class, a.flags) + collision_radius(b.class, b.flags) {
                    let key = (a.agent_id.min(b.agent_id), a.agent_id.max(b.agent_id));
                    if !self.touching.contains(&key) {
                        self.events.push(Collision {
                            frame,
                            a: key.0,
                            b: key.1,
                        });
                    }
                    now.insert(key);
                }
            }
        }
        self.touching = now;
    }
}

/// Steps `world` until `frame_count` frames are recorded, frame 0 being the initial state.
pub fn run_world(mut world: World, config: ScenarioConfig, frame_count: usize) -> SimulationTrace {
    let mut frames = Vec::with_capacity(frame_count);
    let mut tracker = CollisionTracker::default();
    for index in 0..frame_count {
        if index > 0 {
            world.step();
        }
        let agents = world.states();
        tracker.observe(index, &agents);
        frames.push(Frame {
            index,
            timestamp_s: index as f64 * config.timestep_s,
            agents,
        });
    }
    SimulationTrace {
        config,
        frames,
        collisions: tracker.events,
    }
}

pub fn run(cfg: &ScenarioConfig) -> Result<SimulationTrace, SimError> {
    let world = build_world(cfg)?;
    Ok(run_world(world, cfg.clone(), cfg.frame_count()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::schema::{ActorGroup, Malfunction, MapId, Weather};

    fn cfg_with(groups: &[(ActorClass, u32)]) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new("t");
        for &(c, n) in groups {
            cfg.set_group(ActorGroup::new(c, n));
        }
        cfg
    }

    fn straight(len: f64) -> RoadNetwork {
        RoadNetwork::from_paths(vec![Path::new(PathKind::Lane, vec![(0.0, 0.0), (len, 0.0)])], vec![])
    }

    fn single_vehicle_advance(weather: Weather) -> f64 {
        let mut a = Agent::new(0, ActorClass::Vehicle, 0, 10.0, 10.0 * weather_factor(weather));
        a.obeys_rules = true;
        let mut w = World::from_parts(straight(100.0), vec![a], 0.1, SplitMix64::new(0));
        let before = w.agents()[0].position().0;
        w.step();
        w.agents()[0].position().0 - before
    }

    #[test]
    fn clear_weather_advances_one_metre() {
        assert!((single_vehicle_advance(Weather::Clear) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rain_advances_point_eight() {
        assert!((single_vehicle_advance(Weather::Rain) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn headway_stops_behind_stationary_vehicle() {
        let mut stalled = Agent::new(1, ActorClass::Vehicle, 0, 25.0, 10.0);
        stalled.flags.stationary = true;
        let follower = Agent::new(0, ActorClass::Vehicle, 0, 20.0, 10.0);
        let mut w = World::from_parts(straight(100.0), vec![follower, stalled], 0.1, SplitMix64::new(0));
        w.step();
        let f = &w.agents()[0];
        assert_eq!(f.state().speed, 0.0);
        assert_eq!(f.position(), (20.0, 0.0));
    }

    #[test]
    fn frame_count_and_empty_world() {
        let trace = run(&ScenarioConfig::new("empty")).unwrap();
        assert_eq!(trace.frames.len(), 601);
        assert!(trace.frames.iter().all(|f| f.agents.is_empty()));
        assert!(trace.collisions.is_empty());
    }

    #[test]
    fn exactly_half_of_ten_pedestrians_run() {
        let mut cfg = cfg_with(&[(ActorClass::Pedestrian, 10)]);
        cfg.group_mut(ActorClass::Pedestrian).unwrap().running_fraction = 0.5;
        let w = build_world(&cfg).unwrap();
        assert_eq!(w.agents().iter().filter(|a| a.flags.running).count(), 5);
    }

    #[test]
    fn same_seed_same_initial_state() {
        let cfg = cfg_with(&[(ActorClass::Vehicle, 6), (ActorClass::Pedestrian, 4), (ActorClass::Bicycle, 2)]);
        assert_eq!(build_world(&cfg).unwrap().states(), build_world(&cfg).unwrap().states());
        let mut other = cfg.clone();
        other.seed = 99;
        assert_ne!(build_world(&cfg).unwrap().states(), build_world(&other).unwrap().states());
    }

    #[test]
    fn overflow_is_reported() {
        let mut cfg = cfg_with(&[(ActorClass::Vehicle, 10_000)]);
        cfg.map = MapId::Town01;
        assert!(matches!(run(&cfg), Err(SimError::SpawnOverflow { class: ActorClass::Vehicle, .. })));
    }

    #[test]
    fn stationary_vehicles_never_move() {
        let mut cfg = cfg_with(&[(ActorClass::Vehicle, 4), (ActorClass::Pedestrian, 3)]);
        cfg.duration_s = 10.0;
        cfg.group_mut(ActorClass::Vehicle).unwrap().malfunction.insert(Malfunction::Stationary);
        let trace = run(&cfg).unwrap();
        let first = &trace.frames[0].agents;
        for f in &trace.frames {
            for (a, b) in f.agents.iter().zip(first) {
                if a.class == ActorClass::Vehicle {
                    assert_eq!(a.position, b.position);
                }
            }
        }
    }

    #[test]
    fn collision_recorded_once_per_episode() {
        let s = |id, x: f64| AgentState {
            agent_id: id,
            class: ActorClass::Pedestrian,
            position: [x, 0.0, 0.0],
            heading: 0.0,
            speed: 0.0,
            flags: AgentFlags::default(),
        };
        let mut t = CollisionTracker::default();
        t.observe(0, &[s(0, 0.0), s(1, 0.5)]);
        t.observe(1, &[s(0, 0.0), s(1, 0.5)]);
        t.observe(2, &[s(0, 0.0), s(1, 5.0)]);
        t.observe(3, &[s(0, 0.0), s(1, 0.1)]);
        assert_eq!(
            t.events,
            vec![Collision { frame: 0, a: 0, b: 1 }, Collision { frame: 3, a: 0, b: 1 }]
        );
    }
}
