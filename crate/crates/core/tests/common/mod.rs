#![allow(dead_code)]

use scenegen::rng::SplitMix64;
use scenegen::schema::{ActorClass, ActorGroup, Malfunction, MapId, ScenarioConfig, TimeOfDay, Weather};

fn pick<T: Copy>(rng: &mut SplitMix64, items: &[T]) -> T {
    items[rng.below(items.len())]
}

/// A config with random map, environment, counts, speeds and malfunctions.
/// Counts stay within the smallest map's spawn capacity.
pub fn random_config(rng: &mut SplitMix64, name: &str, all_obey: bool) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(name);
    cfg.map = pick(rng, MapId::ALL);
    cfg.weather = pick(rng, Weather::ALL);
    cfg.time_of_day = pick(rng, TimeOfDay::ALL);
    cfg.seed = rng.next_u64();

    let mut vehicles = ActorGroup::new(ActorClass::Vehicle, rng.below(21) as u32);
    vehicles.target_speed_mps = 2.0 + 18.0 * rng.next_f64();
    for &m in Malfunction::ALL {
        if rng.below(4) == 0 {
            vehicles.malfunction.insert(m);
        }
    }
    let mut pedestrians = ActorGroup::new(ActorClass::Pedestrian, rng.below(26) as u32);
    pedestrians.running_fraction = pick(rng, &[0.0, 0.25, 0.5, 1.0]);
    let mut bicycles = ActorGroup::new(ActorClass::Bicycle, rng.below(9) as u32);
    bicycles.target_speed_mps = 1.0 + 7.0 * rng.next_f64();

    for mut g in [vehicles, pedestrians, bicycles] {
        g.obeys_rules = all_obey || rng.below(2) == 0;
        cfg.set_group(g);
    }
    cfg
}
