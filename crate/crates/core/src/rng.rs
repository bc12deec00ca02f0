use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seed-derivable random stream. Streams with the same seed and different
/// stream ids are independent, so every run of an ensemble can own one
/// without coordination.
#[derive(Clone, Debug)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomStream(rng)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

/// The pair of streams a single run consumes: measurement outcomes draw
/// from one, noise kicks from the other. Keeping them apart means toggling
/// the measurement leaves the noise realization untouched.
#[derive(Clone, Debug)]
pub struct RunStreams {
    pub measurement: RandomStream,
    pub noise: RandomStream,
}

impl RunStreams {
    pub fn for_run(master_seed: u64, run: usize) -> Self {
        let run = run as u64;
        RunStreams {
            measurement: RandomStream::new(master_seed, 2 * run),
            noise: RandomStream::new(master_seed, 2 * run + 1),
        }
    }
}
