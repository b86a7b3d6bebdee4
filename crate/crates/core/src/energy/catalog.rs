//! Reference figures for common energy-harvesting techniques.
//!
//! These are documentation constants only; the simulator models solar and
//! wind through traces and does not use any per-technique physics.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvesterTechnique {
    pub source: &'static str,
    pub controllable: bool,
    pub predictable: bool,
    pub implementation: &'static str,
    pub harvested: &'static str,
    pub applications: &'static str,
}

pub const CATALOG: &[HarvesterTechnique] = &[
    HarvesterTechnique {
        source: "solar",
        controllable: false,
        predictable: true,
        implementation: "photovoltaic cells",
        harvested: "15 mW/cm^2",
        applications: "wireless sensor, household appliances",
    },
    HarvesterTechnique {
        source: "wind",
        controllable: false,
        predictable: true,
        implementation: "anemometer",
        harvested: "85 W (rotor diameter 1 m, wind speed 8 m/s)",
        applications: "wireless sensor, household appliances",
    },
    HarvesterTechnique {
        source: "environmental vibration",
        controllable: false,
        predictable: false,
        implementation: "electromagnetic induction",
        harvested: "0.2 mW/cm^2",
        applications: "wireless sensor, consumer electronic",
    },
    HarvesterTechnique {
        source: "human motion",
        controllable: true,
        predictable: true,
        implementation: "piezoelectric",
        harvested: "finger motion: 2.1 mW; footfalls: 5 W",
        applications: "on-body monitoring, portable devices",
    },
    HarvesterTechnique {
        source: "thermal",
        controllable: false,
        predictable: false,
        implementation: "thermopiles",
        harvested: "~40 mW",
        applications: "wireless sensor",
    },
    HarvesterTechnique {
        source: "ambient RF signal",
        controllable: false,
        predictable: false,
        implementation: "rectification & filtering",
        harvested: "<0.2 mW",
        applications: "RFID, low power device",
    },
    HarvesterTechnique {
        source: "biomass",
        controllable: true,
        predictable: true,
        implementation: "microbial fuel cells",
        harvested: "153 mW/m^2",
        applications: "underwater sensor",
    },
];

pub fn lookup(source: &str) -> Option<&'static HarvesterTechnique> {
    CATALOG.iter().find(|t| t.source.eq_ignore_ascii_case(source))
}

/// Typical femto-cell maximum transmit power, 17 dBm.
pub const FEMTO_MAX_TX_POWER_W: f64 = 0.050_118_723_362_727_23;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lookup() {
        assert_eq!(CATALOG.len(), 7);
        assert_eq!(lookup("Solar").unwrap().implementation, "photovoltaic cells");
        assert!(lookup("tidal").is_none());
        assert!((FEMTO_MAX_TX_POWER_W - 10f64.powf(1.7) * 1e-3).abs() < 1e-15);
    }
}
