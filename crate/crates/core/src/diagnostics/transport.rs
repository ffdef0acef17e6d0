//! Wasserstein-1 estimators between equally weighted sample sets.

use serde::Serialize;

use crate::error::{shape, Error, Result};
use crate::linalg::{distance, dot};
use crate::rng::{rng_from_seed, unit_vector};

/// Largest sample count accepted by [`assignment_w1`].
pub const ASSIGNMENT_CAP: usize = 512;

/// Uniformly weighted samples, one per row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    samples: Vec<Vec<f64>>,
}

impl EmpiricalDistribution {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        let dim = samples
            .first()
            .ok_or_else(|| shape("empirical distribution needs at least one sample"))?
            .len();
        if samples.iter().any(|s| s.len() != dim) {
            return Err(shape("samples differ in dimension"));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(shape("samples must be finite"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for s in &self.samples {
            for (a, b) in m.iter_mut().zip(s) {
                *a += b;
            }
        }
        let n = self.count() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

fn same_count(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::CountMismatch(a, b));
    }
    Ok(())
}

/// Exact 1-D W1: mean absolute difference of order statistics.
pub fn w1_exact_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    same_count(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Ok(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum::<f64>() / a.len() as f64)
}

/// Mean of 1-D W1 over `projections` random directions.
pub fn sliced_w1(a: &[Vec<f64>], b: &[Vec<f64>], projections: usize, seed: u64) -> Result<f64> {
    same_count(a.len(), b.len())?;
    let dim = a.first().map_or(0, Vec::len);
    if a.iter().chain(b).any(|s| s.len() != dim) {
        return Err(shape("sample sets differ in dimension"));
    }
    if dim == 1 {
        let x: Vec<f64> = a.iter().map(|s| s[0]).collect();
        let y: Vec<f64> = b.iter().map(|s| s[0]).collect();
        return w1_exact_1d(&x, &y);
    }
    if projections == 0 {
        return Err(shape("sliced W1 needs at least one projection"));
    }
    let mut rng = rng_from_seed(seed);
    let mut total = 0.0;
    for _ in 0..projections {
        let dir = unit_vector(&mut rng, dim);
        let x: Vec<f64> = a.iter().map(|s| dot(s, &dir)).collect();
        let y: Vec<f64> = b.iter().map(|s| dot(s, &dir)).collect();
        total += w1_exact_1d(&x, &y)?;
    }
    Ok(total / projections as f64)
}

/// Exact W1 by minimum-cost perfect matching on Euclidean distances.
pub fn assignment_w1(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    same_count(a.len(), b.len())?;
    let n = a.len();
    if n > ASSIGNMENT_CAP {
        return Err(Error::Size {
            size: n,
            cap: ASSIGNMENT_CAP,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let cost: Vec<f64> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| distance(p, q)))
        .collect();
    let matching = min_cost_assignment(&cost, n);
    Ok(matching
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum::<f64>()
        / n as f64)
}

/// Shortest augmenting path assignment (Hungarian method with row and
/// column potentials). Returns the column matched to each row.
fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based arrays; column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_vec;

    #[test]
    fn one_dimensional_reference_values() {
        assert_eq!(w1_exact_1d(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(w1_exact_1d(&[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            w1_exact_1d(&[1.0, 2.0], &[1.0]),
            Err(Error::CountMismatch(2, 1))
        ));
    }

    #[test]
    fn crossed_pairs() {
        let a = vec![vec![0.0, 0.0], vec![10.0, 0.0]];
        let b = vec![vec![10.0, 1.0], vec![0.0, 1.0]];
        assert!((assignment_w1(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_permutation_enumeration() {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for k in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(k, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let perms = permutations(6);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let a: Vec<Vec<f64>> = (0..6).map(|_| gaussian_vec(&mut rng, 3)).collect();
            let b: Vec<Vec<f64>> = (0..6).map(|_| gaussian_vec(&mut rng, 3)).collect();
            let brute = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| distance(&a[i], &b[j])).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                / 6.0;
            assert!((assignment_w1(&a, &b).unwrap() - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn size_cap() {
        let a = vec![vec![0.0]; ASSIGNMENT_CAP + 1];
        assert!(matches!(assignment_w1(&a, &a), Err(Error::Size { .. })));
    }

    #[test]
    fn sliced_in_one_dimension_is_exact() {
        let a: Vec<Vec<f64>> = [0.3, -1.0, 2.0].iter().map(|v| vec![*v]).collect();
        let b: Vec<Vec<f64>> = [1.3, 0.0, 0.5].iter().map(|v| vec![*v]).collect();
        assert_eq!(
            sliced_w1(&a, &b, 10, 0).unwrap(),
            w1_exact_1d(&[0.3, -1.0, 2.0], &[1.3, 0.0, 0.5]).unwrap()
        );
        assert_eq!(sliced_w1(&a, &a, 10, 0).unwrap(), 0.0);
    }
}
