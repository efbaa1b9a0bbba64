use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty on the (standardized) weights; the intercept is not penalized.
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 1e-3,
            learning_rate: 0.5,
            max_iter: 20_000,
            tol: 1e-6,
        }
    }
}

/// L2-regularized logistic regression fitted by full-batch gradient descent
/// on standardized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LogisticModel {
    pub fn fit(rows: &[Vec<f64>], targets: &[f64], params: &LogisticParams) -> LogisticModel {
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut scales = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                scales[j] += (r[j] - means[j]).powi(2) / n;
            }
        }
        for s in &mut scales {
            *s = if *s > 1e-12 { s.sqrt() } else { 1.0 };
        }
        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| (0..d).map(|j| (r[j] - means[j]) / scales[j]).collect())
            .collect();

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut iterations = 0;
        while iterations < params.max_iter {
            iterations += 1;
            let mut gw: Vec<f64> = w.iter().map(|wj| params.l2 * wj).collect();
            let mut gb = 0.0;
            for (x, &y) in z.iter().zip(targets) {
                let p = sigmoid(b + x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
                let err = (p - y) / n;
                gb += err;
                for (g, xj) in gw.iter_mut().zip(x) {
                    *g += err * xj;
                }
            }
            let norm = (gb * gb + gw.iter().map(|g| g * g).sum::<f64>()).sqrt();
            b -= params.learning_rate * gb;
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj -= params.learning_rate * g;
            }
            if norm < params.tol {
                break;
            }
        }
        LogisticModel {
            params: params.clone(),
            means,
            scales,
            weights: w,
            intercept: b,
            iterations,
        }
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        let z: f64 = row
            .iter()
            .zip(&self.means)
            .zip(&self.scales)
            .zip(&self.weights)
            .map(|(((x, m), s), w)| (x - m) / s * w)
            .sum();
        sigmoid(self.intercept + z)
    }
}
