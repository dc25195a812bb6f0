//! Link adaptation: MCS table, numerology constants, PRB capacity, BER.

use std::path::Path;

use crate::error::ConfigError;

/// Subcarriers per PRB at 15 kHz spacing.
pub const SUBCARRIERS_PER_PRB: u32 = 12;
/// OFDM symbols per slot.
pub const SYMBOLS_PER_SLOT: u32 = 14;
/// Resource elements per PRB per TTI (12 subcarriers x 14 symbols).
pub const RE_PER_PRB: u32 = SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT;
/// PRB bandwidth, Hz.
pub const PRB_BANDWIDTH_HZ: f64 = 180_000.0;
/// TTI length at numerology 0 (one slot), ms.
pub const TTI_MS: f64 = 1.0;
/// OFDM symbol duration, ms.
pub const SYMBOL_MS: f64 = TTI_MS / SYMBOLS_PER_SLOT as f64;
/// Fixed per-packet processing delay: two symbol durations, ms.
pub const PROCESSING_DELAY_MS: f64 = 2.0 * SYMBOL_MS;

const LUT_HEADER: &str = "# mcs-lut v1";

/// Modulation order of an MCS entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    /// Constellation size M.
    pub fn order(self) -> u32 {
        1 << self.bits_per_symbol()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Some(Modulation::Qpsk),
            "qam16" | "16qam" => Some(Modulation::Qam16),
            "qam64" | "64qam" => Some(Modulation::Qam64),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
            Modulation::Qam64 => "qam64",
        }
    }
}

/// One row of the link-adaptation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    /// Lowest SINR (dB) at which this entry applies. `-inf` marks the floor row.
    pub min_sinr_db: f64,
    pub modulation: Modulation,
    /// Code rate numerator/denominator, kept exact so PRB capacities are exact.
    pub code_num: u32,
    pub code_den: u32,
}

impl McsEntry {
    pub fn code_rate(&self) -> f64 {
        self.code_num as f64 / self.code_den as f64
    }

    /// Information bits per resource element.
    pub fn bits_per_re(&self) -> f64 {
        self.modulation.bits_per_symbol() as f64 * self.code_rate()
    }
}

/// Information bits one PRB carries in one TTI under `entry`:
/// `floor(RE_PER_PRB * bits_per_symbol * code_rate)`, evaluated in integers.
pub fn bits_per_prb(entry: &McsEntry) -> u32 {
    let num = RE_PER_PRB as u64 * entry.modulation.bits_per_symbol() as u64 * entry.code_num as u64;
    (num / entry.code_den as u64) as u32
}

/// PRBs needed to carry `demand_bits` at `prb_bits` per PRB (ceiling division;
/// zero demand needs zero PRBs).
pub fn prbs_required(demand_bits: u64, prb_bits: u32) -> u32 {
    assert!(prb_bits > 0, "PRB capacity must be positive");
    demand_bits.div_ceil(prb_bits as u64) as u32
}

/// Link-adaptation table: rows sorted by ascending SINR threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct McsLut {
    entries: Vec<McsEntry>,
}

impl McsLut {
    /// Built-in six-row table (QPSK 3/10 .. 64QAM 5/6).
    pub fn builtin() -> Self {
        let entries = vec![
            McsEntry {
                min_sinr_db: f64::NEG_INFINITY,
                modulation: Modulation::Qpsk,
                code_num: 3,
                code_den: 10,
            },
            McsEntry {
                min_sinr_db: 1.0,
                modulation: Modulation::Qpsk,
                code_num: 3,
                code_den: 5,
            },
            McsEntry {
                min_sinr_db: 6.0,
                modulation: Modulation::Qam16,
                code_num: 1,
                code_den: 2,
            },
            McsEntry {
                min_sinr_db: 12.0,
                modulation: Modulation::Qam16,
                code_num: 3,
                code_den: 4,
            },
            McsEntry {
                min_sinr_db: 18.0,
                modulation: Modulation::Qam64,
                code_num: 2,
                code_den: 3,
            },
            McsEntry {
                min_sinr_db: 24.0,
                modulation: Modulation::Qam64,
                code_num: 5,
                code_den: 6,
            },
        ];
        let lut = McsLut { entries };
        lut.validate("<builtin>").expect("builtin table is valid");
        lut
    }

    /// Parse the versioned CSV format:
    ///
    /// ```text
    /// # mcs-lut v1
    /// # min_sinr_db,modulation,code_rate
    /// -inf,qpsk,3/10
    /// 1,qpsk,3/5
    /// ```
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let err = |reason: String| ConfigError::Lut {
            path: origin.to_string(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first.trim() == LUT_HEADER => {}
            other => {
                return Err(err(format!(
                    "first line must be `{LUT_HEADER}`, found {other:?}"
                )))
            }
        }
        let mut entries = Vec::new();
        for (lineno, raw) in lines.enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!(
                    "line {}: expected 3 comma-separated fields, found {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let min_sinr_db = match fields[0] {
                "-inf" => f64::NEG_INFINITY,
                s => s.parse::<f64>().map_err(|_| {
                    err(format!("line {}: bad SINR threshold `{s}`", lineno + 2))
                })?,
            };
            let modulation = Modulation::parse(fields[1]).ok_or_else(|| {
                err(format!("line {}: unknown modulation `{}`", lineno + 2, fields[1]))
            })?;
            let (code_num, code_den) = parse_rate(fields[2]).ok_or_else(|| {
                err(format!("line {}: bad code rate `{}`", lineno + 2, fields[2]))
            })?;
            entries.push(McsEntry {
                min_sinr_db,
                modulation,
                code_num,
                code_den,
            });
        }
        let lut = McsLut { entries };
        lut.validate(origin)?;
        Ok(lut)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let err = |reason: String| ConfigError::Lut {
            path: origin.to_string(),
            reason,
        };
        if self.entries.is_empty() {
            return Err(err("table has no rows".into()));
        }
        if self.entries[0].min_sinr_db != f64::NEG_INFINITY {
            return Err(err(
                "first row must have threshold -inf so every SINR maps to an entry".into(),
            ));
        }
        for w in self.entries.windows(2) {
            if !(w[0].min_sinr_db < w[1].min_sinr_db) {
                return Err(err(format!(
                    "SINR thresholds must be strictly increasing ({} then {})",
                    w[0].min_sinr_db, w[1].min_sinr_db
                )));
            }
            if w[0].bits_per_re() >= w[1].bits_per_re() {
                return Err(err(format!(
                    "spectral efficiency must be strictly increasing ({} then {})",
                    w[0].bits_per_re(),
                    w[1].bits_per_re()
                )));
            }
        }
        for e in &self.entries {
            if e.code_num == 0 || e.code_den == 0 || e.code_num >= e.code_den {
                return Err(err(format!(
                    "code rate {}/{} must lie strictly in (0, 1)",
                    e.code_num, e.code_den
                )));
            }
            if bits_per_prb(e) == 0 {
                return Err(err("entry carries zero bits per PRB".into()));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Highest entry whose threshold does not exceed `sinr_db`. The floor row
    /// catches any finite SINR, so selection never fails.
    pub fn select(&self, sinr_db: f64) -> &McsEntry {
        let mut chosen = &self.entries[0];
        for e in &self.entries {
            if e.min_sinr_db <= sinr_db {
                chosen = e;
            } else {
                break;
            }
        }
        chosen
    }

    /// Largest per-PRB capacity in the table (top row).
    pub fn max_bits_per_prb(&self) -> u32 {
        self.entries.iter().map(bits_per_prb).max().unwrap()
    }
}

fn parse_rate(s: &str) -> Option<(u32, u32)> {
    let (num, den) = s.split_once('/')?;
    let num = num.trim().parse::<u32>().ok()?;
    let den = den.trim().parse::<u32>().ok()?;
    Some((num, den))
}

/// Uncoded BER approximation for square-QAM over a fading-averaged channel:
///
/// `BER = 2/log2(M) * (1 - 1/sqrt(M)) * (1 - sqrt(c/(1+c)))`,
/// `c = 1.5 * sinr / (M - 1)`, with `sinr` the mean SINR in linear scale.
pub fn ber(mean_sinr_linear: f64, modulation: Modulation) -> f64 {
    assert!(mean_sinr_linear >= 0.0, "mean SINR must be non-negative");
    let m = modulation.order() as f64;
    let c = 1.5 * mean_sinr_linear / (m - 1.0);
    (2.0 / m.log2()) * (1.0 - 1.0 / m.sqrt()) * (1.0 - (c / (1.0 + c)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn numerology_constants() {
        assert_eq!(RE_PER_PRB, 168);
        assert_relative_eq!(SYMBOL_MS, 1.0 / 14.0, max_relative = 1e-15);
        assert_relative_eq!(PROCESSING_DELAY_MS, 2.0 / 14.0, max_relative = 1e-15);
    }

    #[test]
    fn builtin_prb_capacities_are_exact() {
        let lut = McsLut::builtin();
        let caps: Vec<u32> = lut.entries().iter().map(bits_per_prb).collect();
        assert_eq!(caps, vec![100, 201, 336, 504, 672, 840]);
        assert_eq!(lut.max_bits_per_prb(), 840);
    }

    #[test]
    fn selection_picks_highest_supported_row() {
        let lut = McsLut::builtin();
        // Exactly on a threshold: that row applies.
        assert_eq!(bits_per_prb(lut.select(6.0)), 336);
        // Just below: previous row.
        assert_eq!(bits_per_prb(lut.select(5.999)), 201);
        // Below every finite threshold: floor row, never an outage.
        assert_eq!(bits_per_prb(lut.select(-40.0)), 100);
        // Above the top threshold: top row.
        assert_eq!(bits_per_prb(lut.select(80.0)), 840);
    }

    #[test]
    fn prbs_required_examples() {
        // 3840-bit packet at 16QAM 1/2 (336 bits/PRB) needs 12 PRBs.
        assert_eq!(prbs_required(3840, 336), 12);
        assert_eq!(prbs_required(0, 336), 0);
        assert_eq!(prbs_required(1, 336), 1);
        assert_eq!(prbs_required(336, 336), 1);
        assert_eq!(prbs_required(337, 336), 2);
    }

    #[test]
    fn ber_closed_form_qpsk() {
        // QPSK: M = 4, c = 0.5 * sinr. At sinr = 2 (linear): c = 1,
        // BER = 1 * (1 - 1/2) * (1 - sqrt(1/2)) = 0.5 * (1 - 0.70710678) .
        let expected = 0.5 * (1.0 - (0.5f64).sqrt());
        assert_relative_eq!(ber(2.0, Modulation::Qpsk), expected, max_relative = 1e-12);
        // Zero SINR: sqrt(c/(1+c)) = 0, QPSK BER = 0.5.
        assert_relative_eq!(ber(0.0, Modulation::Qpsk), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn ber_decreases_with_sinr_and_increases_with_order() {
        for pair in [0.1f64, 1.0, 5.0, 20.0, 100.0].windows(2) {
            assert!(ber(pair[1], Modulation::Qam16) < ber(pair[0], Modulation::Qam16));
        }
        // Once past the very-low-SNR regime, denser constellations err more.
        for snr in [10.0f64, 50.0, 200.0] {
            assert!(ber(snr, Modulation::Qpsk) < ber(snr, Modulation::Qam16));
            assert!(ber(snr, Modulation::Qam16) < ber(snr, Modulation::Qam64));
        }
    }

    #[test]
    fn parse_round_trips_builtin() {
        let text = "\
# mcs-lut v1
# min_sinr_db,modulation,code_rate
-inf,qpsk,3/10
1,qpsk,3/5
6,qam16,1/2
12,qam16,3/4
18,qam64,2/3
24,qam64,5/6
";
        let parsed = McsLut::parse(text, "<test>").unwrap();
        assert_eq!(parsed, McsLut::builtin());
    }

    #[test]
    fn parse_rejects_bad_tables() {
        // Missing version header.
        assert!(McsLut::parse("-inf,qpsk,3/10\n", "<t>").is_err());
        // No floor row.
        assert!(McsLut::parse("# mcs-lut v1\n1,qpsk,3/5\n", "<t>").is_err());
        // Non-increasing thresholds.
        assert!(
            McsLut::parse("# mcs-lut v1\n-inf,qpsk,3/10\n-inf,qpsk,3/5\n", "<t>").is_err()
        );
        // Efficiency not increasing.
        assert!(
            McsLut::parse("# mcs-lut v1\n-inf,qpsk,3/5\n5,qpsk,3/10\n", "<t>").is_err()
        );
        // Code rate of 1 is rejected.
        assert!(McsLut::parse("# mcs-lut v1\n-inf,qpsk,1/1\n", "<t>").is_err());
    }

    proptest! {
        /// Selection is monotone: more SINR never selects a slower entry.
        #[test]
        fn selection_is_monotone(a in -50.0f64..80.0, b in -50.0f64..80.0) {
            let lut = McsLut::builtin();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bits_per_prb(lut.select(lo)) <= bits_per_prb(lut.select(hi)));
        }

        /// Ceiling division is tight: required PRBs carry the demand, one fewer does not.
        #[test]
        fn prbs_required_is_tight(demand in 1u64..1_000_000, prb_bits in 1u32..2000) {
            let n = prbs_required(demand, prb_bits);
            prop_assert!(n as u64 * prb_bits as u64 >= demand);
            prop_assert!((n as u64 - 1) * (prb_bits as u64) < demand);
        }

        /// BER stays in (0, 0.5] for all modulations and non-negative SINR.
        #[test]
        fn ber_is_bounded(snr in 0.0f64..1e6) {
            for m in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
                let b = ber(snr, m);
                prop_assert!(b > 0.0 && b <= 0.5, "ber = {b}");
            }
        }
    }
}
