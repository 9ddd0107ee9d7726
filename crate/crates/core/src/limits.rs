/// Size caps for the exhaustive oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest exponent `k` for which `2^k` edge subsets (or cycle-space
    /// combinations) may be enumerated.
    pub enumeration_exponent: u32,
    /// Largest number of unconstrained spins in a Gibbs enumeration.
    pub free_spins: u32,
}

pub const MAX_EDGES_ENV: &str = "SLISING_MAX_EDGES";

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration_exponent: 24, free_spins: 20 }
    }
}

impl Limits {
    /// Defaults, with the enumeration cap replaced by `SLISING_MAX_EDGES`
    /// when that variable holds a nonnegative integer.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(MAX_EDGES_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            limits.enumeration_exponent = cap;
        }
        limits
    }
}
