//! Seeded random streams.
//!
//! Every replication gets its own block of ChaCha8 streams derived from the
//! master seed: the key is the master seed and the stream number is
//! `replication * STREAMS_PER_REPLICATION + id`. ChaCha streams with distinct
//! numbers are independent, so each primitive process (A¹, A², D¹, D²) and the
//! initial-state draw consume their own stream and can be re-associated
//! without re-drawing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Convention, ModelParams, Primitives};

pub const STREAMS_PER_REPLICATION: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamId {
    Arrival1 = 0,
    Arrival2 = 1,
    Departure1 = 2,
    Departure2 = 3,
    Initial = 4,
    /// Offset of a second, independent block used for comparison processes
    /// (e.g. an uncoupled `g₀` system simulated next to a coupled one).
    Shadow = 8,
}

pub fn stream(master_seed: u64, replication: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication * STREAMS_PER_REPLICATION + id);
    rng
}

/// The four per-process streams of one replication.
#[derive(Debug, Clone)]
pub struct PrimitiveStreams {
    arrivals: [ChaCha8Rng; 2],
    departures: [ChaCha8Rng; 2],
}

impl PrimitiveStreams {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self::with_offset(master_seed, replication, 0)
    }

    /// Same layout as [`PrimitiveStreams::new`], shifted by `offset` stream ids.
    pub fn with_offset(master_seed: u64, replication: u64, offset: u64) -> Self {
        let s = |id: StreamId| stream(master_seed, replication, offset + id as u64);
        PrimitiveStreams {
            arrivals: [s(StreamId::Arrival1), s(StreamId::Arrival2)],
            departures: [s(StreamId::Departure1), s(StreamId::Departure2)],
        }
    }

    /// Draws one slot of primitives. Under the exclusive convention both
    /// indicators of a queue come from one uniform on that queue's arrival
    /// stream and the departure streams are left untouched.
    pub fn sample(&mut self, params: &ModelParams) -> Primitives {
        let mut p = Primitives::default();
        for i in 0..2 {
            match params.convention {
                Convention::Independent => {
                    p.arrivals[i] = self.arrivals[i].gen::<f64>() < params.lambda;
                    p.departures[i] = self.departures[i].gen::<f64>() < params.mu;
                }
                Convention::Exclusive => {
                    let u = self.arrivals[i].gen::<f64>();
                    p.arrivals[i] = u < params.lambda;
                    p.departures[i] = !p.arrivals[i] && u < params.lambda + params.mu;
                }
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_parameters() {
        let mut s = PrimitiveStreams::new(7, 0);
        let zero = ModelParams::new(0.0, 0.0).unwrap();
        let one = ModelParams::new(1.0, 1.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(s.sample(&zero), Primitives::new(false, false, false, false));
            assert_eq!(s.sample(&one), Primitives::new(true, true, true, true));
        }
    }

    #[test]
    fn empirical_means_at_one_half() {
        // 3σ for a Bernoulli(0.5) mean over 10⁶ draws is 0.0015.
        let p = ModelParams::new(0.5, 0.5).unwrap();
        let mut s = PrimitiveStreams::new(2024, 3);
        let n = 1_000_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let prim = s.sample(&p);
            for (c, b) in counts.iter_mut().zip([
                prim.arrivals[0],
                prim.arrivals[1],
                prim.departures[0],
                prim.departures[1],
            ]) {
                *c += u64::from(b);
            }
        }
        for c in counts {
            let mean = c as f64 / n as f64;
            assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
        }
    }

    #[test]
    fn exclusive_never_draws_both_events() {
        let p = ModelParams::with_convention(0.4, 0.6, Convention::Exclusive).unwrap();
        let mut s = PrimitiveStreams::new(1, 1);
        for _ in 0..10_000 {
            let prim = s.sample(&p);
            for i in 0..2 {
                assert!(!(prim.arrivals[i] && prim.departures[i]));
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let p = ModelParams::new(0.5, 0.5).unwrap();
        let draw = |seed, rep| {
            let mut s = PrimitiveStreams::new(seed, rep);
            (0..64).map(|_| s.sample(&p)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11, 4), draw(11, 4));
        assert_ne!(draw(11, 4), draw(11, 5));
        assert_ne!(draw(11, 4), draw(12, 4));
    }
}
