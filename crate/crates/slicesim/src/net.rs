//! Network topology types: slices, users, radio units, association matrices.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SimError};

/// Hard ceiling on the number of association candidates the exhaustive
/// selector will enumerate.
pub const ENUMERATION_CAP: u64 = 50_000;

/// Service class of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SliceId {
    /// Enhanced mobile broadband: throughput-driven, relaxed deadline.
    Embb,
    /// Ultra-reliable low-latency: small packets, tight deadline.
    Urllc,
}

impl SliceId {
    pub const ALL: [SliceId; 2] = [SliceId::Embb, SliceId::Urllc];

    pub fn as_char(self) -> char {
        match self {
            SliceId::Embb => 'E',
            SliceId::Urllc => 'U',
        }
    }

    pub fn index(self) -> usize {
        match self {
            SliceId::Embb => 0,
            SliceId::Urllc => 1,
        }
    }
}

impl std::fmt::Display for SliceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SliceId::Embb => write!(f, "embb"),
            SliceId::Urllc => write!(f, "urllc"),
        }
    }
}

/// One user terminal and its service contract.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    /// Global user id, unique across slices.
    pub id: usize,
    pub slice: SliceId,
    /// Minimum acceptable mean rate, bit/s.
    pub r_min_bps: f64,
    /// Packet deadline, ms. Packets older than this at a step boundary are dropped.
    pub d_max_ms: f64,
    /// Fixed packet size, bits.
    pub packet_bits: u64,
    /// Packet inter-arrival time, microseconds.
    pub arrival_interval_us: u64,
    /// Movement speed, m/s.
    pub speed_mps: f64,
}

/// One radio unit.
#[derive(Debug, Clone, PartialEq)]
pub struct OruSpec {
    pub id: usize,
    /// Ground-plane position, metres.
    pub pos_m: [f64; 2],
    /// Antenna height, metres.
    pub height_m: f64,
    /// Transmit power, mW. Every unit transmits at this level continuously,
    /// so all non-serving units contribute interference at full power.
    pub tx_power_mw: f64,
}

/// Per-slice radio budget at each radio unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceBudget {
    pub slice: SliceId,
    /// PRBs available to this slice per unit per TTI.
    pub prb_count: u32,
    /// Optional fronthaul byte-rate ceiling per unit, bit/s. `None` = uncapped.
    pub fronthaul_cap_bps: Option<f64>,
}

/// User-to-unit association for one slice, stored as the serving-unit index of
/// each user. Rows of the equivalent 0/1 matrix are one-hot by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMatrix {
    num_orus: usize,
    serving: Vec<usize>,
}

impl AssociationMatrix {
    /// Build from a serving-unit vector. Fails if any entry is out of range.
    pub fn from_vector(serving: Vec<usize>, num_orus: usize) -> Result<Self, SimError> {
        if num_orus == 0 {
            return Err(ConfigError::Field {
                field: "association.num_orus".into(),
                reason: "must be at least 1".into(),
            }
            .into());
        }
        if let Some((k, &m)) = serving.iter().enumerate().find(|(_, &m)| m >= num_orus) {
            return Err(ConfigError::Field {
                field: format!("association.serving[{k}]"),
                reason: format!("unit index {m} out of range (have {num_orus} units)"),
            }
            .into());
        }
        Ok(AssociationMatrix { num_orus, serving })
    }

    pub fn num_users(&self) -> usize {
        self.serving.len()
    }

    pub fn num_orus(&self) -> usize {
        self.num_orus
    }

    /// Serving unit of user `k`.
    pub fn serving_oru(&self, k: usize) -> usize {
        self.serving[k]
    }

    pub fn serving_vector(&self) -> &[usize] {
        &self.serving
    }

    /// Entry of the 0/1 association matrix.
    pub fn get(&self, k: usize, m: usize) -> u8 {
        u8::from(self.serving[k] == m)
    }

    /// Users attached to unit `m`, in ascending user order.
    pub fn users_of(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.serving
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == m)
            .map(|(k, _)| k)
    }

    /// Number of users attached to unit `m`.
    pub fn load_of(&self, m: usize) -> usize {
        self.serving.iter().filter(|&&s| s == m).count()
    }
}

/// Number of association candidates for `num_users` users over `num_orus`
/// units, i.e. `num_orus^num_users`, without overflow.
pub fn candidate_count(num_users: usize, num_orus: usize) -> u128 {
    (num_orus as u128).pow(num_users as u32)
}

/// Enumerate every serving-unit vector in lexicographic order (last user
/// varies fastest). Errors when the candidate count exceeds `cap`.
pub fn enumerate_associations(
    num_users: usize,
    num_orus: usize,
    cap: u64,
) -> Result<Vec<Vec<usize>>, SimError> {
    assert!(num_orus > 0, "need at least one radio unit");
    let total = candidate_count(num_users, num_orus);
    if total > cap as u128 {
        return Err(SimError::EnumerationCap {
            total,
            orus: num_orus,
            users: num_users,
            cap,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut current = vec![0usize; num_users];
    loop {
        out.push(current.clone());
        // Odometer increment from the last position.
        let mut pos = num_users;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < num_orus {
                break;
            }
            current[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_count(5, 4), 1024);
        assert_eq!(candidate_count(0, 4), 1);
        assert_eq!(candidate_count(10, 4), 1_048_576);
    }

    #[test]
    fn enumeration_is_exhaustive_and_ordered() {
        let all = enumerate_associations(3, 2, ENUMERATION_CAP).unwrap();
        assert_eq!(
            all,
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 1, 1],
                vec![1, 0, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![1, 1, 1],
            ]
        );
    }

    #[test]
    fn enumeration_matches_count_for_small_sizes() {
        for num_orus in 1..=3 {
            for num_users in 0..=4 {
                let all = enumerate_associations(num_users, num_orus, ENUMERATION_CAP).unwrap();
                assert_eq!(all.len() as u128, candidate_count(num_users, num_orus));
                let mut dedup = all.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), all.len(), "no duplicates expected");
            }
        }
    }

    #[test]
    fn enumeration_cap_reports_scale() {
        let err = enumerate_associations(10, 4, ENUMERATION_CAP).unwrap_err();
        match err {
            SimError::EnumerationCap {
                total,
                orus,
                users,
                cap,
            } => {
                assert_eq!(total, 1_048_576);
                assert_eq!(orus, 4);
                assert_eq!(users, 10);
                assert_eq!(cap, ENUMERATION_CAP);
            }
            other => panic!("unexpected error: {other}"),
        }
        let msg = format!(
            "{}",
            enumerate_associations(10, 4, ENUMERATION_CAP).unwrap_err()
        );
        assert!(msg.contains("1048576"), "message should name the total: {msg}");
        assert!(msg.contains("4^10"), "message should name the scale: {msg}");
    }

    #[test]
    fn matrix_round_trip_and_accessors() {
        let m = AssociationMatrix::from_vector(vec![2, 0, 2], 3).unwrap();
        assert_eq!(m.num_users(), 3);
        assert_eq!(m.num_orus(), 3);
        assert_eq!(m.serving_oru(0), 2);
        assert_eq!(m.get(0, 2), 1);
        assert_eq!(m.get(0, 0), 0);
        assert_eq!(m.users_of(2).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(m.load_of(2), 2);
        assert_eq!(m.load_of(1), 0);
        assert_eq!(m.serving_vector(), &[2, 0, 2]);
    }

    #[test]
    fn matrix_rejects_out_of_range() {
        assert!(AssociationMatrix::from_vector(vec![0, 3], 3).is_err());
        assert!(AssociationMatrix::from_vector(vec![0], 0).is_err());
    }

    proptest! {
        /// Rows of the expanded 0/1 matrix are always one-hot.
        #[test]
        fn rows_are_one_hot(serving in proptest::collection::vec(0usize..5, 0..12)) {
            let m = AssociationMatrix::from_vector(serving, 5).unwrap();
            for k in 0..m.num_users() {
                let row_sum: u32 = (0..5).map(|j| m.get(k, j) as u32).sum();
                prop_assert_eq!(row_sum, 1);
            }
        }

        /// Every enumerated candidate is valid and loads sum to the user count.
        #[test]
        fn enumerated_candidates_are_valid(num_users in 0usize..5, num_orus in 1usize..4) {
            for v in enumerate_associations(num_users, num_orus, ENUMERATION_CAP).unwrap() {
                let m = AssociationMatrix::from_vector(v, num_orus).unwrap();
                let total: usize = (0..num_orus).map(|j| m.load_of(j)).sum();
                prop_assert_eq!(total, num_users);
            }
        }
    }
}
