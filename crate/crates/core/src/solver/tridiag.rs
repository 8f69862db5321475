//! Constant-coefficient tridiagonal solves for the implicit diffusion stage.

/// Solve `off x_{i-1} + diag x_i + off x_{i+1} = rhs_i` with `x_{-1} = x_n = 0`
/// (Thomas algorithm).
pub fn solve_tridiagonal(diag: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag;
    c[0] = off / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag - off * c[i - 1];
        c[i] = off / denom;
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Same system with periodic wrap (`x_{-1} = x_{n-1}`, `x_n = x_0`), solved by
/// Sherman-Morrison on top of the Thomas algorithm. Needs `n >= 3`.
pub fn solve_cyclic(diag: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    assert!(n >= 3);
    // A = T + u v^T with u = (g, 0.., off), v = (1, 0.., off/g)
    let g = -diag;
    let mut tdiag = vec![diag; n];
    tdiag[0] = diag - g;
    tdiag[n - 1] = diag - off * off / g;
    let x = thomas_general(&tdiag, off, rhs);
    let mut u = vec![0.0; n];
    u[0] = g;
    u[n - 1] = off;
    let z = thomas_general(&tdiag, off, &u);
    let factor = (x[0] + off * x[n - 1] / g) / (1.0 + z[0] + off * z[n - 1] / g);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

fn thomas_general(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = off / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        c[i] = off / denom;
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}
