//! Shared fixtures and reference solvers for the integration tests. Nothing
//! here calls into the integrator or fixed-point code under test.

#![allow(dead_code)]

use netepi::Graph;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strongly connected digraph: a directed Hamiltonian cycle through a
/// random permutation plus extra edges with probability `p`, weights
/// uniform in `[lo, hi]`.
pub fn random_irreducible(rng: &mut ChaCha8Rng, n: usize, p: f64, lo: f64, hi: f64) -> Graph {
    let mut rows = vec![vec![0.0; n]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    for k in 0..n {
        let (from, to) = (perm[k], perm[(k + 1) % n]);
        rows[to][from] = rng.gen_range(lo..=hi);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rows[i][j] == 0.0 && rng.gen_bool(p) {
                rows[i][j] = rng.gen_range(lo..=hi);
            }
        }
    }
    let g = Graph::from_rows(&rows).unwrap();
    assert!(g.is_strongly_connected());
    g
}

/// Undirected ring where each node links to its `k/2` nearest neighbours on
/// either side (k-regular, k even).
pub fn circulant(n: usize, k: usize) -> Graph {
    assert!(k % 2 == 0 && k < n);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = (i as isize - j as isize).rem_euclid(n as isize) as usize;
                    let d = d.min(n - d);
                    if d >= 1 && d <= k / 2 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Graph::from_rows(&rows).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    Graph::from_rows(&rows).unwrap()
}

pub fn bipartite_pair() -> Graph {
    Graph::from_rows(&[vec![0.0, 2.0], vec![8.0, 0.0]]).unwrap()
}

pub fn swap_pair() -> Graph {
    Graph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

pub fn graph20() -> Graph {
    Graph::from_edge_list(include_str!("../data/graph20.txt")).unwrap()
}

/// Classic RK4 for a scalar or small vector ODE, returning the state at
/// each multiple of `h` up to `t_end`.
pub fn rk4<F>(f: F, y0: &[f64], h: f64, t_end: f64) -> Vec<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let steps = (t_end / h).round() as usize;
    let mut y = y0.to_vec();
    let mut out = vec![(0.0, y.clone())];
    let add = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    for step in 1..=steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, h / 2.0));
        let k3 = f(&add(&y, &k2, h / 2.0));
        let k4 = f(&add(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((step as f64 * h, y.clone()));
    }
    out
}

/// Scalar SIR `(s, x, r)` vector field.
pub fn scalar_sir(beta: f64, gamma: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |y| {
        let inf = beta * y[0] * y[1];
        vec![-inf, inf - gamma * y[1], gamma * y[1]]
    }
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn to_nalgebra(g: &Graph) -> nalgebra::DMatrix<f64> {
    let n = g.n();
    nalgebra::DMatrix::from_fn(n, n, |i, j| g.adjacency().get(i, j))
}

/// Spectral radius from a full (complex) eigendecomposition.
pub fn reference_spectral_radius(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Whether the sequence rises (weakly) to a single peak and then falls
/// (weakly).
pub fn is_unimodal(values: &[f64]) -> bool {
    let peak = values
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0;
    values[..=peak].windows(2).all(|w| w[1] >= w[0]) && values[peak..].windows(2).all(|w| w[1] <= w[0])
}
