use serde::Serialize;

/// Summary of a sample of one scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStats {
    /// Signed distance of `mean` from `expected`, in standard errors.
    pub fn sigmas_from(&self, expected: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == expected {
                0.0
            } else {
                f64::INFINITY.copysign(self.mean - expected)
            }
        } else {
            (self.mean - expected) / self.std_error
        }
    }

    pub fn within_sigmas(&self, expected: f64, k: f64) -> bool {
        self.sigmas_from(expected).abs() <= k
    }
}

/// Welford accumulator, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    pub fn finish(&self) -> SampleStats {
        let variance = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        let std_error = if self.count > 0 {
            (variance / self.count as f64).sqrt()
        } else {
            0.0
        };
        SampleStats {
            count: self.count,
            mean: self.mean,
            variance,
            std_error,
        }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}
