//! Finite mixtures with fixed component densities.
//!
//! Only the mixing proportions are free, so the log-likelihood is concave in
//! them and EM climbs to the global maximum on the simplex.

/// Component densities of distinct observations with their multiplicities.
#[derive(Debug, Clone)]
pub(crate) struct MixtureData {
    ranks: usize,
    /// Row-major: `densities[i * ranks + k]` is rank k's density at row i.
    densities: Vec<f64>,
    counts: Vec<f64>,
}

const EM_MAX_ITER: usize = 100_000;
const EM_TOL: f64 = 1e-13;

impl MixtureData {
    pub fn new(ranks: usize) -> Self {
        Self { ranks, densities: Vec::new(), counts: Vec::new() }
    }

    pub fn push(&mut self, densities: &[f64], count: f64) {
        debug_assert_eq!(densities.len(), self.ranks);
        self.densities.extend_from_slice(densities);
        self.counts.push(count);
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.densities[i * self.ranks..(i + 1) * self.ranks]
    }

    pub fn loglik(&self, weights: &[f64]) -> f64 {
        (0..self.rows())
            .map(|i| {
                let mix: f64 = self.row(i).iter().zip(weights).map(|(h, w)| h * w).sum();
                self.counts[i] * mix.ln()
            })
            .sum()
    }

    /// Maximizes over the simplex starting from equal weights. Returns the
    /// weights and the log-likelihood they attain.
    pub fn fit(&self) -> (Vec<f64>, f64) {
        let k = self.ranks;
        let total: f64 = self.counts.iter().sum();
        // Ranks with no support anywhere can never gain weight.
        let live: Vec<bool> = (0..k).map(|j| (0..self.rows()).any(|i| self.row(i)[j] > 0.0)).collect();
        let n_live = live.iter().filter(|&&b| b).count().max(1);
        let mut w: Vec<f64> = live.iter().map(|&b| if b { 1.0 / n_live as f64 } else { 0.0 }).collect();
        let mut next = vec![0.0; k];
        let mut ll = self.loglik(&w);
        for _ in 0..EM_MAX_ITER {
            next.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..self.rows() {
                let row = self.row(i);
                let mix: f64 = row.iter().zip(&w).map(|(h, w)| h * w).sum();
                if mix <= 0.0 {
                    continue;
                }
                let scale = self.counts[i] / mix;
                for j in 0..k {
                    next[j] += w[j] * row[j] * scale;
                }
            }
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s.max(f64::MIN_POSITIVE));
            let change = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut w, &mut next);
            let new_ll = self.loglik(&w);
            let gain = new_ll - ll;
            ll = new_ll;
            if change < EM_TOL || (gain.abs() < EM_TOL * total.max(1.0) && change < 1e-9) {
                break;
            }
        }
        (w, ll)
    }
}
