/// Natural cubic spline through knots at evenly spaced parameters in
/// `[0, 1]`, interpolating each coordinate independently.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    knots: Vec<Vec<f64>>,
    /// Second derivatives at the knots, per knot then coordinate.
    moments: Vec<Vec<f64>>,
}

impl NaturalSpline {
    /// Needs at least two knots of equal dimension.
    pub fn uniform(knots: &[Vec<f64>]) -> Self {
        assert!(knots.len() >= 2, "spline needs at least two knots");
        let n = knots.len();
        let d = knots[0].len();
        let h = 1.0 / (n - 1) as f64;
        let mut moments = vec![vec![0.0; d]; n];
        if n > 2 {
            for axis in 0..d {
                // tridiagonal system h M[i-1] + 4h M[i] + h M[i+1] = 6 (y[i+1] - 2y[i] + y[i-1]) / h
                let m = n - 2;
                let rhs: Vec<f64> = (1..n - 1)
                    .map(|i| 6.0 * (knots[i + 1][axis] - 2.0 * knots[i][axis] + knots[i - 1][axis]) / (h * h))
                    .collect();
                let (mut c, mut r) = (vec![0.0; m], vec![0.0; m]);
                for i in 0..m {
                    let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
                    c[i] = 1.0 / denom;
                    r[i] = (rhs[i] - if i > 0 { r[i - 1] } else { 0.0 }) / denom;
                }
                for i in (0..m).rev() {
                    let next = if i + 1 < m { moments[i + 2][axis] } else { 0.0 };
                    moments[i + 1][axis] = r[i] - c[i] * next;
                }
            }
        }
        NaturalSpline {
            knots: knots.to_vec(),
            moments,
        }
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        let segs = self.knots.len() - 1;
        let h = 1.0 / segs as f64;
        let s = (u * segs as f64).clamp(0.0, segs as f64);
        let i = (s.floor() as usize).min(segs - 1);
        let t = s - i as f64;
        let (a, b) = (1.0 - t, t);
        (0..self.knots[0].len())
            .map(|k| {
                let (y0, y1) = (self.knots[i][k], self.knots[i + 1][k]);
                let (m0, m1) = (self.moments[i][k], self.moments[i + 1][k]);
                a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
            })
            .collect()
    }
}
