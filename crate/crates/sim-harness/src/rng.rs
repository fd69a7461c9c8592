use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent named randomness streams derived from the scenario seed, so
/// that draws on one code path never shift another's sequence.
pub(crate) mod streams {
    pub const ARRIVALS: u64 = 1;
    pub const ISSUER_PICK: u64 = 2;
    pub const LATENCY: u64 = 3;
    pub const SELECTION: u64 = 4;
    pub const POW: u64 = 5;
    pub const COORDINATOR: u64 = 6;
    pub const ATTACKER: u64 = 7;
    pub const GOSSIP: u64 = 8;
}

pub(crate) fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
