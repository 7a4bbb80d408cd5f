//! xorshift64* pseudo-random generator (Vigna 2016) used for reproducible
//! random boundary data.
//!
//! State update: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`, output
//! `x * 0x2545F4914F6CDD1D`. Doubles take the top 53 bits.

#[derive(Clone, Debug)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    /// A zero seed is replaced by a fixed odd constant.
    pub fn new(seed: u64) -> Self {
        XorShift64Star { state: if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Vector with entries uniform in `[-1, 1)`, rescaled to sup norm 1.
    pub fn unit_sup_vector(&mut self, n: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| self.uniform(-1.0, 1.0)).collect();
        let m = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        v.into_iter().map(|x| x / m).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sequence() {
        // Reference value from an independent big-integer evaluation.
        let mut r = XorShift64Star::new(1);
        assert_eq!(r.next_u64(), 0x47E4_CE4B_896C_DD1D);
    }

    #[test]
    fn unit_interval() {
        let mut r = XorShift64Star::new(42);
        for _ in 0..1000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
        let v = r.unit_sup_vector(17);
        assert_eq!(v.iter().fold(0.0f64, |a, b| a.max(b.abs())), 1.0);
    }
}
