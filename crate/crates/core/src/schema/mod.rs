//! Declarative scenario configuration language.
//!
//! ```text
//! scenario "downtown drizzle" {
//!   map: town03
//!   weather: drizzle
//!   time_of_day: noon
//!   duration_s: 60
//!   timestep_s: 0.1
//!   seed: 0
//!   tags: [drizzle, noon]
//!   actors {
//!     vehicles: 5 {
//!       target_speed_mps: 10
//!       malfunction: [wipers, doors_open]
//!       obeys_rules: true
//!     }
//!     pedestrians: 10 {
//!       target_speed_mps: 1.4
//!       running_fraction: 0.5
//!       obeys_rules: true
//!     }
//!   }
//! }
//! ```
//!
//! Every field except the scenario name is optional and falls back to the
//! defaults on [`ScenarioConfig`] and [`ActorGroup::new`].

mod categorize;
pub mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

pub use categorize::categorize;
pub use parser::parse_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Range,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lexical => "lexical error",
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Range => "range violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at {line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "`{}` is not one of {}",
                        other,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(MapId {
    Town01 => "town01",
    Town02 => "town02",
    Town03 => "town03",
    Town04 => "town04",
    Town05 => "town05",
});

keyword_enum!(Weather {
    Clear => "clear",
    Rain => "rain",
    Drizzle => "drizzle",
    Fog => "fog",
    Cloudy => "cloudy",
});

keyword_enum!(TimeOfDay {
    Morning => "morning",
    Noon => "noon",
    Sunset => "sunset",
    Night => "night",
});

keyword_enum!(Malfunction {
    Wipers => "wipers",
    DoorsOpen => "doors_open",
    Stationary => "stationary",
});

keyword_enum!(
    /// Participant class; the DSL names groups by the plural form.
    ActorClass {
        Vehicle => "vehicles",
        Pedestrian => "pedestrians",
        Bicycle => "bicycles",
    }
);

impl ActorClass {
    /// Column value in trajectory files.
    pub fn code(self) -> u8 {
        match self {
            ActorClass::Vehicle => 1,
            ActorClass::Pedestrian => 2,
            ActorClass::Bicycle => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ActorClass::Vehicle),
            2 => Some(ActorClass::Pedestrian),
            3 => Some(ActorClass::Bicycle),
            _ => None,
        }
    }

    /// Speed ceiling in m/s.
    pub fn max_speed(self) -> f64 {
        match self {
            ActorClass::Vehicle => 20.0,
            ActorClass::Pedestrian => 4.0,
            ActorClass::Bicycle => 8.0,
        }
    }

    pub fn default_speed(self) -> f64 {
        match self {
            ActorClass::Vehicle => 10.0,
            ActorClass::Pedestrian => 1.4,
            ActorClass::Bicycle => 5.0,
        }
    }
}

/// Lexicon namespaces for the DSL positions that hold controlled vocabulary.
pub mod namespace {
    pub const MAP: &str = "map";
    pub const WEATHER: &str = "weather";
    pub const TIME: &str = "time";
    pub const MALFUNCTION: &str = "malfunction";
    pub const ACTOR: &str = "actor";
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorGroup {
    pub class: ActorClass,
    pub count: u32,
    pub target_speed_mps: f64,
    /// Share of pedestrians that run; always 0 for other classes.
    pub running_fraction: f64,
    /// Only vehicles may carry malfunctions.
    pub malfunction: BTreeSet<Malfunction>,
    pub obeys_rules: bool,
}

impl ActorGroup {
    pub fn new(class: ActorClass, count: u32) -> Self {
        Self {
            class,
            count,
            target_speed_mps: class.default_speed(),
            running_fraction: 0.0,
            malfunction: BTreeSet::new(),
            obeys_rules: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub map: MapId,
    pub weather: Weather,
    pub time_of_day: TimeOfDay,
    pub duration_s: f64,
    pub timestep_s: f64,
    pub seed: u64,
    /// Sorted by class, at most one group per class.
    pub actor_groups: Vec<ActorGroup>,
    pub tags: Vec<String>,
}

impl ScenarioConfig {
    pub const DEFAULT_MAP: MapId = MapId::Town03;
    pub const DEFAULT_DURATION_S: f64 = 60.0;
    pub const DEFAULT_TIMESTEP_S: f64 = 0.1;

    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            map: Self::DEFAULT_MAP,
            weather: Weather::Clear,
            time_of_day: TimeOfDay::Noon,
            duration_s: Self::DEFAULT_DURATION_S,
            timestep_s: Self::DEFAULT_TIMESTEP_S,
            seed: 0,
            actor_groups: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn group(&self, class: ActorClass) -> Option<&ActorGroup> {
        self.actor_groups.iter().find(|g| g.class == class)
    }

    pub fn group_mut(&mut self, class: ActorClass) -> Option<&mut ActorGroup> {
        self.actor_groups.iter_mut().find(|g| g.class == class)
    }

    pub fn count(&self, class: ActorClass) -> u32 {
        self.group(class).map_or(0, |g| g.count)
    }

    /// Replace or insert the group for `class`, keeping class order.
    pub fn set_group(&mut self, group: ActorGroup) {
        self.actor_groups.retain(|g| g.class != group.class);
        self.actor_groups.push(group);
        self.actor_groups.sort_by_key(|g| g.class);
    }

    /// Number of recorded frames: `floor(duration / timestep) + 1`.
    pub fn frame_count(&self) -> usize {
        // The epsilon absorbs representation error such as 60 / 0.1.
        (self.duration_s / self.timestep_s + 1e-9).floor() as usize + 1
    }

    /// Checks every invariant a parsed config satisfies.
    pub fn check(&self) -> Result<(), String> {
        if !(self.timestep_s > 0.0 && self.timestep_s <= 1.0) {
            return Err(format!("timestep_s {} outside (0, 1]", self.timestep_s));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(format!("duration_s {} must be positive", self.duration_s));
        }
        if self.duration_s < self.timestep_s {
            return Err("duration_s must be at least timestep_s".into());
        }
        let mut seen = BTreeSet::new();
        for g in &self.actor_groups {
            if !seen.insert(g.class) {
                return Err(format!("more than one `{}` group", g.class));
            }
            if !(g.target_speed_mps >= 0.0 && g.target_speed_mps.is_finite()) {
                return Err(format!("{} target_speed_mps must be >= 0", g.class));
            }
            if !(0.0..=1.0).contains(&g.running_fraction) {
                return Err(format!("{} running_fraction outside [0, 1]", g.class));
            }
            if g.running_fraction != 0.0 && g.class != ActorClass::Pedestrian {
                return Err(format!("running_fraction is only valid for pedestrians, not {}", g.class));
            }
            if !g.malfunction.is_empty() && g.class != ActorClass::Vehicle {
                return Err(format!("malfunction is only valid for vehicles, not {}", g.class));
            }
        }
        let mut tags = BTreeSet::new();
        for t in &self.tags {
            if t.is_empty() || !t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(format!("tag `{t}` must be a lowercase identifier"));
            }
            if !tags.insert(t) {
                return Err(format!("duplicate tag `{t}`"));
            }
        }
        Ok(())
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn list<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    let parts: Vec<String> = items.into_iter().map(|s| s.as_ref().to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Canonical text: fixed field order, two-space indent, nothing elided.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} {{", quote(&cfg.name));
    let _ = writeln!(out, "  map: {}", cfg.map);
    let _ = writeln!(out, "  weather: {}", cfg.weather);
    let _ = writeln!(out, "  time_of_day: {}", cfg.time_of_day);
    let _ = writeln!(out, "  duration_s: {}", cfg.duration_s);
    let _ = writeln!(out, "  timestep_s: {}", cfg.timestep_s);
    let _ = writeln!(out, "  seed: {}", cfg.seed);
    let _ = writeln!(out, "  tags: {}", list(&cfg.tags));
    let _ = writeln!(out, "  actors {{");
    for g in &cfg.actor_groups {
        let _ = writeln!(out, "    {}: {} {{", g.class, g.count);
        let _ = writeln!(out, "      target_speed_mps: {}", g.target_speed_mps);
        if g.class == ActorClass::Pedestrian {
            let _ = writeln!(out, "      running_fraction: {}", g.running_fraction);
        }
        if g.class == ActorClass::Vehicle {
            let _ = writeln!(out, "      malfunction: {}", list(g.malfunction.iter().map(|m| m.as_str())));
        }
        let _ = writeln!(out, "      obeys_rules: {}", g.obeys_rules);
        let _ = writeln!(out, "    }}");
    }
    let _ = writeln!(out, "  }}");
    out.push_str("}\n");
    out
}
