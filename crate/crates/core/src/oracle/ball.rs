use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::tree::{enumerate_ball, TreeParams, VertexWord};

/// Dense operator model on a ball of the tree with Dirichlet truncation.
#[derive(Debug, Clone)]
pub struct BallModel {
    p: TreeParams,
    pub center: VertexWord,
    pub radius: u32,
    pub vertices: Vec<VertexWord>,
    index: HashMap<VertexWord, usize>,
    /// Distance of each vertex to the center.
    pub dist: Vec<u32>,
}

impl BallModel {
    pub fn new(center: &VertexWord, radius: u32, p: &TreeParams, limit: usize) -> Result<Self> {
        let vertices = enumerate_ball(center, radius, p, limit)?;
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let dist = vertices
            .iter()
            .map(|v| v.distance(center))
            .collect::<Result<_>>()?;
        Ok(Self {
            p: *p,
            center: center.clone(),
            radius,
            vertices,
            index,
            dist,
        })
    }

    /// Ball around a center of depth `radius` below an apex at level 0.
    pub fn standard(radius: u32, p: &TreeParams, limit: usize) -> Result<Self> {
        let center = VertexWord::new(0, vec![0; radius as usize]);
        Self::new(&center, radius, p, limit)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &VertexWord) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Strictly inside the ball: every neighbour is present.
    pub fn is_interior(&self, i: usize) -> bool {
        self.dist[i] < self.radius
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.p.pow(self.vertices[i].level() as f64)
    }

    fn predecessor(&self, i: usize) -> Option<usize> {
        self.vertices[i]
            .predecessor()
            .and_then(|v| self.index_of(&v))
    }

    fn successors(&self, i: usize) -> Vec<usize> {
        self.vertices[i]
            .successors(&self.p)
            .filter_map(|v| self.index_of(&v))
            .collect()
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            if let Some(j) = self.predecessor(i) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
        a
    }

    /// `I - A / (2 sqrt q)`: the flow Laplacian in the basis `mu^{-1/2} e_x`.
    pub fn flow_laplacian_orthonormal(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::identity(n, n) - self.adjacency() / (2.0 * self.p.qf().sqrt())
    }

    /// The flow Laplacian acting on functions:
    /// `L f(x) = f(x) - f(p(x))/2 - (1/(2q)) sum_{c in s(x)} f(c)`.
    pub fn flow_laplacian(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::identity(n, n);
        for i in 0..n {
            if let Some(j) = self.predecessor(i) {
                m[(i, j)] -= 0.5;
            }
            for c in self.successors(i) {
                m[(i, c)] -= 0.5 / self.p.qf();
            }
        }
        m
    }

    /// `I - A / (q + 1)`.
    pub fn combinatorial_laplacian(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::identity(n, n) - self.adjacency() / (self.p.qf() + 1.0)
    }

    /// `grad f(x) = f(x) - f(p(x))`.
    pub fn gradient(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::identity(n, n);
        for i in 0..n {
            if let Some(j) = self.predecessor(i) {
                m[(i, j)] -= 1.0;
            }
        }
        m
    }

    /// `grad^* g(x) = g(x) - (1/q) sum_{c in s(x)} g(c)`.
    pub fn gradient_adjoint(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::identity(n, n);
        for i in 0..n {
            for c in self.successors(i) {
                m[(i, c)] -= 1.0 / self.p.qf();
            }
        }
        m
    }

    pub fn mu_diag(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.mu(i)).collect()
    }

    /// Eigenvalues of the flow Laplacian, ascending.
    pub fn flow_spectrum(&self) -> Vec<f64> {
        sorted(SymmetricEigen::new(self.flow_laplacian_orthonormal()).eigenvalues.iter().copied())
    }

    /// Eigenvalues of the combinatorial Laplacian, ascending.
    pub fn combinatorial_spectrum(&self) -> Vec<f64> {
        sorted(SymmetricEigen::new(self.combinatorial_laplacian()).eigenvalues.iter().copied())
    }

    /// `H_t(x, y)` of the truncated operator, in kernel normalization.
    pub fn heat_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("time must be nonnegative, got {t}")));
        }
        let eig = SymmetricEigen::new(self.flow_laplacian_orthonormal());
        let v = &eig.eigenvectors;
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-t * l).exp()));
        let mut m = v * d * v.transpose();
        let s: Vec<f64> = self.mu_diag().iter().map(|m| m.sqrt()).collect();
        for i in 0..self.len() {
            for j in 0..self.len() {
                m[(i, j)] /= s[i] * s[j];
            }
        }
        Ok(m)
    }
}

fn sorted(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}
