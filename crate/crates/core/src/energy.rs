//! First-order radio energy model.
//!
//! Transmitting `k` bits over distance `d` costs the transmitter electronics
//! plus an amplifier term that grows with d^2; receiving costs electronics
//! only. All energies are in joules, distances in meters, sizes in bits.

/// Radio energy constants plus the per-node initial budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Transmitter electronics, J/bit.
    pub e_tx_elec: f64,
    /// Receiver electronics, J/bit.
    pub e_rx_elec: f64,
    /// Transmit amplifier, J/bit/m^2.
    pub eps_amp: f64,
    /// Data packet size in bits (k).
    pub packet_bits: u64,
    /// Initial energy of each node, J.
    pub e_init: f64,
}

impl EnergyModel {
    /// Defaults: 50 nJ/bit electronics, 100 pJ/bit/m^2 amplifier, 4098-bit
    /// packets, 10 J per node.
    ///
    /// The amplifier constant is the standard first-order value. The source
    /// material prints an amplifier figure that would make a single packet at
    /// 10 m cost megajoules; `paper_literal()` selects that figure for audit.
    pub fn standard() -> Self {
        Self {
            e_tx_elec: 50e-9,
            e_rx_elec: 50e-9,
            eps_amp: 100e-12,
            packet_bits: 4098,
            e_init: 10.0,
        }
    }

    /// Audit variant with the literal printed amplifier constant (100 J/bit/m^2).
    pub fn paper_literal() -> Self {
        Self {
            eps_amp: 100.0,
            ..Self::standard()
        }
    }

    /// Energy to transmit `bits` over distance `d` meters:
    /// `e_tx_elec * bits + eps_amp * bits * d^2`. `d = 0` is allowed.
    pub fn tx_cost(&self, bits: u64, d: f64) -> f64 {
        debug_assert!(bits > 0);
        debug_assert!(d >= 0.0);
        let k = bits as f64;
        self.e_tx_elec * k + self.eps_amp * k * d * d
    }

    /// Energy to receive `bits`: `e_rx_elec * bits`. Independent of distance.
    pub fn rx_cost(&self, bits: u64) -> f64 {
        debug_assert!(bits > 0);
        self.e_rx_elec * bits as f64
    }

    /// Cheapest possible radio action for a data packet; a node that cannot
    /// afford this is dead.
    pub fn death_threshold(&self) -> f64 {
        self.rx_cost(self.packet_bits)
            .min(self.tx_cost(self.packet_bits, 0.0))
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("e_tx_elec", self.e_tx_elec),
            ("e_rx_elec", self.e_rx_elec),
            ("eps_amp", self.eps_amp),
            ("e_init", self.e_init),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be strictly positive, got {v}"));
            }
        }
        if self.packet_bits == 0 {
            return Err("packet_bits must be strictly positive".into());
        }
        Ok(())
    }
}
