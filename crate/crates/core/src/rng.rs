//! Deterministic pseudo-random streams for simulation.
//!
//! SplitMix64 core: fast, bit-stable across platforms, and trivially
//! splittable into independent substreams. Not cryptographically secure
//! and must never be used for key material.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG with a single 64-bit state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRng {
    state: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent substream `index` of a master seed.
    ///
    /// This is the seed-splitting rule used everywhere in the simulator:
    /// `substream(master, k) = SimRng::new(mix(master ^ (k + 1) * GOLDEN))`.
    /// Substreams with distinct indices never share state with each other
    /// or with the master stream.
    pub fn substream(master: u64, index: u64) -> Self {
        Self::new(mix(master ^ index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`; safe to pass to `ln`.
    #[inline]
    pub fn f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Standard normal deviate (Box-Muller, no cached spare).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.f64_open();
        let u2 = self.f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Poisson deviate by inversion; intended for small means (photon
    /// numbers per pulse).
    pub fn poisson(&mut self, mean: f64) -> u32 {
        if mean <= 0.0 {
            return 0;
        }
        let u = self.f64();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u32;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    }

    /// Isotropic random unit 3-vector.
    pub fn unit_vector(&mut self) -> [f64; 3] {
        loop {
            let v = [self.normal(), self.normal(), self.normal()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let mut a = SimRng::new(42);
        let mut b = SimRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_diverge() {
        let mut a = SimRng::substream(42, 0);
        let mut b = SimRng::substream(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_range() {
        let mut rng = SimRng::new(1);
        for _ in 0..10_000 {
            let x = rng.f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = SimRng::new(2);
        let n = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.normal();
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn poisson_mean() {
        let mut rng = SimRng::new(3);
        let n = 200_000;
        let mut sum = 0u64;
        let mut vacuum = 0u64;
        for _ in 0..n {
            let k = rng.poisson(0.1);
            sum += k as u64;
            if k == 0 {
                vacuum += 1;
            }
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 0.1).abs() < 0.005, "mean {mean}");
        // P(n >= 1) = 1 - exp(-0.1)
        let p_click = 1.0 - vacuum as f64 / n as f64;
        assert!((p_click - 0.09516).abs() < 0.003, "p_click {p_click}");
    }

    #[test]
    fn poisson_zero_mean_is_vacuum() {
        let mut rng = SimRng::new(4);
        for _ in 0..100 {
            assert_eq!(rng.poisson(0.0), 0);
        }
    }

    #[test]
    fn unit_vectors_are_unit_and_isotropic() {
        let mut rng = SimRng::new(5);
        let mut sum = [0.0f64; 3];
        let n = 20_000;
        for _ in 0..n {
            let v = rng.unit_vector();
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for i in 0..3 {
                sum[i] += v[i];
            }
        }
        for s in sum {
            assert!((s / n as f64).abs() < 0.02);
        }
    }
}
