//! Dense rank-3 and rank-4 tensors at a point, flat-stored.

/// T[a][i][j], dims n^3. Connections are stored here with the contravariant
/// index first: gamma.get(k, i, j) = Γ^k_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> f64 {
        self.data[(a * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, v: f64) {
        self.data[(a * self.n + i) * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Max over the off-diagonal lower-index swap: |T^a_ij - T^a_ji|.
    pub fn lower_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.n {
            for i in 0..self.n {
                for j in 0..i {
                    m = m.max((self.get(a, i, j) - self.get(a, j, i)).abs());
                }
            }
        }
        m
    }

    /// Max deviation from total symmetry across all index permutations.
    pub fn total_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    let v = self.get(a, i, j);
                    for w in [
                        self.get(a, j, i),
                        self.get(i, a, j),
                        self.get(i, j, a),
                        self.get(j, a, i),
                        self.get(j, i, a),
                    ] {
                        m = m.max((v - w).abs());
                    }
                }
            }
        }
        m
    }
}

/// T[l][k][i][j], dims n^4. Curvature-like tensors: riemann.get(l, k, i, j)
/// = R^l_kij with R(∂_i, ∂_j)∂_k = R^l_kij ∂_l.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Tensor4 {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.data[((l * self.n + k) * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, l: usize, k: usize, i: usize, j: usize, v: f64) {
        self.data[((l * self.n + k) * self.n + i) * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Max |T^l_kij + T^l_kji|: zero for curvature-like tensors.
    pub fn last_pair_symmetry_violation(&self) -> f64 {
        let mut m: f64 = 0.0;
        for l in 0..self.n {
            for k in 0..self.n {
                for i in 0..self.n {
                    for j in 0..self.n {
                        m = m.max((self.get(l, k, i, j) + self.get(l, k, j, i)).abs());
                    }
                }
            }
        }
        m
    }
}
