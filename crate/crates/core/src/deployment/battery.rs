use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Battery capacity in joules.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Capacity {
    Finite(f64),
    #[default]
    Unbounded,
}

impl Capacity {
    pub fn from_joules(j: f64) -> Self {
        if j.is_infinite() {
            Self::Unbounded
        } else {
            Self::Finite(j)
        }
    }

    pub fn joules(&self) -> f64 {
        match self {
            Self::Finite(j) => *j,
            Self::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Self::Finite(j) => j.is_finite() && *j >= 0.0,
            Self::Unbounded => true,
        }
    }

    /// Splits `energy` into the stored part and the part that overflows.
    pub fn clip(&self, energy: f64) -> (f64, f64) {
        match self {
            Self::Finite(c) if energy > *c => (*c, energy - c),
            _ => (energy, 0.0),
        }
    }
}

// Serialized as a number of joules, or the string "inf".
impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(j) => s.serialize_f64(*j),
            Self::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct CapVisitor;
        impl Visitor<'_> for CapVisitor {
            type Value = Capacity;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a nonnegative number of joules or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Capacity, E> {
                let c = Capacity::from_joules(v);
                if c.is_valid() {
                    Ok(c)
                } else {
                    Err(E::custom(format!("capacity {v} must be nonnegative")))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Capacity, E> {
                self.visit_f64(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Capacity, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Capacity, E> {
                match v.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" | "unbounded" => Ok(Capacity::Unbounded),
                    other => other
                        .parse::<f64>()
                        .map_err(|_| E::custom(format!("bad capacity {v:?}")))
                        .and_then(|j| self.visit_f64(j)),
                }
            }
        }
        d.deserialize_any(CapVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub capacity: Capacity,
    pub level_j: f64,
}

impl BatteryState {
    pub fn empty(capacity: Capacity) -> Self {
        Self { capacity, level_j: 0.0 }
    }

    pub fn new(capacity: Capacity, level_j: f64) -> Option<Self> {
        (capacity.is_valid() && level_j >= 0.0 && level_j <= capacity.joules()).then_some(Self { capacity, level_j })
    }
}
