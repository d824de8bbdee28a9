use std::fmt;

/// Total number of label codes, `empty` included.
pub const NUM_LABELS: usize = 24;

const NAMES: [&str; NUM_LABELS] = [
    "empty",
    "buildings",
    "fences",
    "other",
    "poles",
    "roadlines",
    "roads",
    "sidewalks",
    "vegetation",
    "vehicles",
    "walls",
    "trafficsigns",
    "ground",
    "bridge",
    "guardrail",
    "trafficlight",
    "terrain",
    "reserved_17",
    "reserved_18",
    "reserved_19",
    "reserved_20",
    "reserved_21",
    "reserved_22",
    "reserved_23",
];

/// Per-voxel semantic category. Code 0 is `empty`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SemanticLabel(u8);

impl SemanticLabel {
    pub const EMPTY: Self = Self(0);
    pub const BUILDINGS: Self = Self(1);
    pub const FENCES: Self = Self(2);
    pub const OTHER: Self = Self(3);
    pub const POLES: Self = Self(4);
    pub const ROADLINES: Self = Self(5);
    pub const ROADS: Self = Self(6);
    pub const SIDEWALKS: Self = Self(7);
    pub const VEGETATION: Self = Self(8);
    pub const VEHICLES: Self = Self(9);
    pub const WALLS: Self = Self(10);
    pub const TRAFFICSIGNS: Self = Self(11);
    pub const GROUND: Self = Self(12);
    pub const BRIDGE: Self = Self(13);
    pub const GUARDRAIL: Self = Self(14);
    pub const TRAFFICLIGHT: Self = Self(15);
    pub const TERRAIN: Self = Self(16);

    pub fn new(code: u8) -> Option<Self> {
        ((code as usize) < NUM_LABELS).then_some(Self(code))
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }

    /// Resolves a registry name (case-insensitive) or a decimal code.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(code) = s.parse::<u8>() {
            return Self::new(code);
        }
        NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(s))
            .map(|i| Self(i as u8))
    }

    pub fn all() -> impl Iterator<Item = SemanticLabel> {
        (0..NUM_LABELS as u8).map(SemanticLabel)
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for SemanticLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for SemanticLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Code(u64),
            Name(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Code(c) => u8::try_from(c).ok().and_then(Self::new),
            Raw::Name(n) => Self::parse(&n),
        };
        parsed.ok_or_else(|| serde::de::Error::custom("unknown semantic label"))
    }
}

/// The 16 classes scored by default, in reporting order.
pub fn evaluated_classes() -> Vec<SemanticLabel> {
    (1..=16).map(SemanticLabel).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names() {
        assert_eq!(SemanticLabel::parse("vehicles"), Some(SemanticLabel::VEHICLES));
        assert_eq!(SemanticLabel::parse("Poles"), Some(SemanticLabel::POLES));
        assert_eq!(SemanticLabel::parse("9"), Some(SemanticLabel::VEHICLES));
        assert_eq!(SemanticLabel::parse("reserved_20").map(|l| l.code()), Some(20));
        assert_eq!(SemanticLabel::parse("spaceship"), None);
        assert_eq!(SemanticLabel::parse("24"), None);
    }

    #[test]
    fn twenty_four_codes() {
        assert_eq!(SemanticLabel::all().count(), 24);
        assert!(SemanticLabel::new(23).is_some());
        assert!(SemanticLabel::new(24).is_none());
        let eval = evaluated_classes();
        assert_eq!(eval.len(), 16);
        assert!(!eval.contains(&SemanticLabel::EMPTY));
        assert_eq!(eval.last().unwrap().name(), "terrain");
    }
}
