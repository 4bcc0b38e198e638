//! Running moments.

/// Welford running mean and variance. The mean of identical values is that
/// value exactly, which keeps degenerate Monte Carlo runs bit-identical to
/// their closed-form counterparts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    /// Standard error of the mean, using the unbiased variance.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<Moments>().mean()
}

pub fn std_dev(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<Moments>().variance().sqrt()
}
