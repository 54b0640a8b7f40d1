use super::network::{dist, normalize_heading, Point, RoadNetwork, LANE_WIDTH};
use super::{collision_radius, AgentFlags, AgentState, SimError};
use crate::rng::SplitMix64;
use crate::schema::{ActorClass, Malfunction, ScenarioConfig, Weather};

/// Obeying lane users stop when an aligned agent ahead is this close.
pub const HEADWAY_M: f64 = 6.0;
pub const WALK_SPEED: f64 = 1.4;
pub const RUN_SPEED: f64 = 3.0;

/// Vehicle speed multiplier for each weather condition.
pub fn weather_factor(weather: Weather) -> f64 {
    match weather {
        Weather::Clear | Weather::Cloudy => 1.0,
        Weather::Drizzle => 0.9,
        Weather::Rain => 0.8,
        Weather::Fog => 0.7,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: u32,
    pub class: ActorClass,
    pub path: usize,
    pub s: f64,
    /// Speed the agent moves at when nothing blocks it.
    pub cruise_speed: f64,
    pub obeys_rules: bool,
    pub flags: AgentFlags,
    position: Point,
    heading: f64,
    speed: f64,
}

impl Agent {
    pub fn new(id: u32, class: ActorClass, path: usize, s: f64, cruise_speed: f64) -> Self {
        Self {
            id,
            class,
            path,
            s,
            cruise_speed: cruise_speed.clamp(0.0, class.max_speed()),
            obeys_rules: true,
            flags: AgentFlags::default(),
            position: (0.0, 0.0),
            heading: 0.0,
            speed: 0.0,
        }
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn state(&self) -> AgentState {
        AgentState {
            agent_id: self.id,
            class: self.class,
            position: [self.position.0, self.position.1, 0.0],
            heading: self.heading,
            speed: self.speed,
            flags: self.flags,
        }
    }

    fn radius(&self) -> f64 {
        collision_radius(self.class, self.flags)
    }
}

/// Where an agent would be after one unobstructed step.
struct Proposal {
    path: usize,
    s: f64,
    position: Point,
    heading: f64,
    speed: f64,
}

pub struct World {
    pub network: RoadNetwork,
    agents: Vec<Agent>,
    rng: SplitMix64,
    timestep_s: f64,
}

/// Spawns the agents of `cfg` on the network for its map.
///
/// Draw order on the seeded stream: one shuffle of the spawn points of each
/// class (vehicles, pedestrians, bicycles), then one shuffle choosing the
/// running pedestrians. Agent ids follow class order.
pub fn build_world(cfg: &ScenarioConfig) -> Result<World, SimError> {
    cfg.check().map_err(SimError::InvalidConfig)?;
    let network = RoadNetwork::for_map(cfg.map);
    let mut rng = SplitMix64::new(cfg.seed);
    let mut agents = Vec::new();
    let mut next_id = 0u32;

    let mut slots = Vec::new();
    for class in [ActorClass::Vehicle, ActorClass::Pedestrian, ActorClass::Bicycle] {
        let mut pts = network.spawn_points(class).to_vec();
        rng.shuffle(&mut pts);
        slots.push((class, pts));
    }
    for (class, pts) in &slots {
        let Some(group) = cfg.group(*class) else { continue };
        let count = group.count as usize;
        if count > pts.len() {
            return Err(SimError::SpawnOverflow {
                class: *class,
                requested: count,
                available: pts.len(),
            });
        }
        let cruise = match class {
            ActorClass::Vehicle => group.target_speed_mps.min(class.max_speed()) * weather_factor(cfg.weather),
            _ => group.target_speed_mps.min(class.max_speed()),
        };
        for sp in &pts[..count] {
            let mut a = Agent::new(next_id, *class, sp.path, sp.s, cruise);
            a.obeys_rules = group.obeys_rules;
            if *class == ActorClass::Vehicle {
                a.flags.stationary = group.malfunction.contains(&Malfunction::Stationary);
                a.flags.doors_open = group.malfunction.contains(&Malfunction::DoorsOpen);
            }
            agents.push(a);
            next_id += 1;
        }
    }

    if let Some(group) = cfg.group(ActorClass::Pedestrian) {
        let mut order: Vec<usize> = agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.class == ActorClass::Pedestrian)
            .map(|(i, _)| i)
            .collect();
        let running = (group.count as f64 * group.running_fraction).round() as usize;
        rng.shuffle(&mut order);
        for &i in &order[..running.min(order.len())] {
            agents[i].flags.running = true;
            agents[i].cruise_speed = RUN_SPEED;
        }
    }

    Ok(World::from_parts(network, agents, cfg.timestep_s, rng))
}

impl World {
    /// Assembles a world from explicit parts; agents are ordered by id.
    pub fn from_parts(network: RoadNetwork, mut agents: Vec<Agent>, timestep_s: f64, rng: SplitMix64) -> Self {
        agents.sort_by_key(|a| a.id);
        for a in &mut agents {
            let (p, h) = network.paths[a.path].pose_at(a.s);
            a.position = p;
            a.heading = h;
            a.speed = 0.0;
        }
        Self {
            network,
            agents,
            rng,
            timestep_s,
        }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn states(&self) -> Vec<AgentState> {
        self.agents.iter().map(Agent::state).collect()
    }

    fn propose(&mut self, i: usize) -> Proposal {
        let a = &self.agents[i];
        let (mut path, mut s) = (a.path, a.s);
        let want = a.cruise_speed * self.timestep_s;
        let mut left = want;
        loop {
            let p = &self.network.paths[path];
            if s + left <= p.length() {
                s += left;
                left = 0.0;
                break;
            }
            if p.successors.is_empty() {
                left -= p.length() - s;
                s = p.length();
                break;
            }
            left -= p.length() - s;
            let k = if p.successors.len() > 1 {
                self.rng.below(p.successors.len())
            } else {
                0
            };
            path = p.successors[k];
            s = 0.0;
        }
        let (position, heading) = self.network.paths[path].pose_at(s);
        Proposal {
            path,
            s,
            position,
            heading,
            speed: (want - left) / self.timestep_s,
        }
    }

    /// An aligned agent ahead, inside half a lane laterally and within the headway.
    fn headway_blocked(&self, i: usize) -> bool {
        let a = &self.agents[i];
        let (c, s) = (a.heading.cos(), a.heading.sin());
        self.agents.iter().enumerate().any(|(j, o)| {
            if j == i {
                return false;
            }
            let rel = (o.position.0 - a.position.0, o.position.1 - a.position.1);
            let lon = rel.0 * c + rel.1 * s;
            let lat = (rel.1 * c - rel.0 * s).abs();
            let aligned = (o.heading - a.heading).cos() > 0.5;
            aligned && lon > 0.0 && lat < LANE_WIDTH / 2.0 && dist(o.position, a.position) <= HEADWAY_M
        })
    }

    /// Advances every agent by one timestep.
    ///
    /// Proposals are drawn in id order. Agents that ignore the rules take
    /// theirs unconditionally. Rule-obeying agents then decide in id order:
    /// lane users stop for the headway rule, and any agent stops when its
    /// proposal would overlap another agent's decided next position, or the
    /// current position of one still undecided. The second check keeps
    /// obeying agents from ever overlapping each other.
    pub fn step(&mut self) {
        let n = self.agents.len();
        let mut proposals = Vec::with_capacity(n);
        for i in 0..n {
            proposals.push((!self.agents[i].flags.stationary).then(|| self.propose(i)));
        }

        let mut next: Vec<Option<Point>> = vec![None; n];
        for i in 0..n {
            let a = &self.agents[i];
            if a.flags.stationary {
                next[i] = Some(a.position);
            } else if !a.obeys_rules {
                next[i] = proposals[i].as_ref().map(|p| p.position);
            }
        }
        let mut moves = vec![true; n];
        for i in 0..n {
            let a = &self.agents[i];
            if a.flags.stationary {
                moves[i] = false;
                continue;
            }
            if !a.obeys_rules {
                continue;
            }
            let target = proposals[i].as_ref().unwrap().position;
            let lane_user = a.class != ActorClass::Pedestrian;
            let blocked = (lane_user && self.headway_blocked(i))
                || (0..n).any(|j| {
                    j != i && {
                        let other = next[j].unwrap_or(self.agents[j].position);
                        dist(target, other) < a.radius() + self.agents[j].radius()
                    }
                });
            moves[i] = !blocked;
            next[i] = Some(if blocked { a.position } else { target });
        }

        for (i, prop) in proposals.into_iter().enumerate() {
            let a = &mut self.agents[i];
            match prop {
                Some(p) if moves[i] => {
                    a.path = p.path;
                    a.s = p.s;
                    a.position = p.position;
                    a.heading = normalize_heading(p.heading);
                    a.speed = p.speed.min(a.class.max_speed());
                }
                _ => a.speed = 0.0,
            }
        }
    }
}
