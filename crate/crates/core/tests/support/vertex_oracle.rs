use nalgebra::{DMatrix, DVector};
use pais_core::Points;

/// Minimum transport cost by enumerating every basic solution of the
/// transportation polytope: choose `2M − 1` cells, solve the marginal
/// equations restricted to them and keep the feasible ones.
pub fn vertex_minimum(w: &[f64], y: &Points) -> f64 {
    let m = w.len();
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let rank = 2 * m - 1;
    // Rows: m supply equations, then the first m − 1 demand equations.
    let mut rhs = DVector::<f64>::zeros(rank);
    for i in 0..m {
        rhs[i] = w[i];
    }
    for j in 0..m - 1 {
        rhs[m + j] = 1.0 / m as f64;
    }
    let cost = |i: usize, j: usize| -> f64 {
        y.row(i)
            .iter()
            .zip(y.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(rank);
    fn visit(
        start: usize,
        cells: &[(usize, usize)],
        chosen: &mut Vec<usize>,
        rank: usize,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == rank {
            f(chosen);
            return;
        }
        for c in start..cells.len() {
            chosen.push(c);
            visit(c + 1, cells, chosen, rank, f);
            chosen.pop();
        }
    }
    let mut evaluate = |basis: &[usize]| {
        let mut a = DMatrix::<f64>::zeros(rank, rank);
        for (col, &c) in basis.iter().enumerate() {
            let (i, j) = cells[c];
            a[(i, col)] = 1.0;
            if j < m - 1 {
                a[(m + j, col)] = 1.0;
            }
        }
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            return;
        }
        let x = lu.solve(&rhs).expect("nonsingular");
        if x.iter().any(|v| *v < -1e-12) {
            return;
        }
        // The dropped demand equation holds automatically.
        let total: f64 = basis
            .iter()
            .zip(x.iter())
            .map(|(&c, t)| t * cost(cells[c].0, cells[c].1))
            .sum();
        best = best.min(total);
    };
    visit(0, &cells, &mut chosen, rank, &mut evaluate);
    best
}
