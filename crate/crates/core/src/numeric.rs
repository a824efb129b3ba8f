//! Scalar-generic kernels behind imputation: summary statistics, gap
//! filling along an axis, and least-squares polynomial fitting.
//!
//! Everything here works on `&[Option<S>]` series where `None` marks a
//! missing value. `S` is any [`Scalar`]; the crate uses `f64`, the tests
//! also run the same code over exact rationals.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// The arithmetic the kernels need: a signed, ordered field.
pub trait Scalar: Num + Signed + PartialOrd + Clone + FromPrimitive + ToPrimitive + Debug {}

impl<T> Scalar for T where T: Num + Signed + PartialOrd + Clone + FromPrimitive + ToPrimitive + Debug {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("degree {degree} fit needs at least {needed} known points, found {found}")]
    TooFewPoints { degree: usize, needed: usize, found: usize },
    #[error("x positions are not distinct enough for a degree {0} fit")]
    Singular(usize),
}

fn known<S: Clone>(values: &[Option<S>]) -> impl Iterator<Item = S> + '_ {
    values.iter().filter_map(Clone::clone)
}

pub fn mean<S: Scalar>(values: &[Option<S>]) -> Option<S> {
    let (sum, count) = known(values).fold((S::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    if count == 0 {
        return None;
    }
    Some(sum / S::from_usize(count)?)
}

/// Middle value of the known values; the average of the two middle values
/// when their count is even.
pub fn median<S: Scalar>(values: &[Option<S>]) -> Option<S> {
    let mut sorted: Vec<S> = known(values).collect();
    if sorted.is_empty() {
        return None;
    }
    // known values are never NaN, so the order is total
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("unordered value in median"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        Some(sorted.swap_remove(mid))
    } else {
        let two = S::one() + S::one();
        Some((sorted[mid - 1].clone() + sorted[mid].clone()) / two)
    }
}

/// Copies the nearest earlier known value into each gap. Leading gaps stay.
pub fn forward_fill<T: Clone>(values: &[Option<T>]) -> Vec<Option<T>> {
    let mut last = None;
    values
        .iter()
        .map(|v| {
            if v.is_some() {
                last = v.clone();
            }
            v.clone().or_else(|| last.clone())
        })
        .collect()
}

/// Copies the nearest later known value into each gap. Trailing gaps stay.
pub fn back_fill<T: Clone>(values: &[Option<T>]) -> Vec<Option<T>> {
    let rev: Vec<Option<T>> = values.iter().rev().cloned().collect();
    let mut filled = forward_fill(&rev);
    filled.reverse();
    filled
}

/// Linear interpolation between the nearest known neighbours on `xs`.
/// Gaps before the first or after the last known value stay missing.
pub fn linear_fill<S: Scalar>(xs: &[S], values: &[Option<S>]) -> Vec<Option<S>> {
    assert_eq!(xs.len(), values.len(), "axis and series lengths differ");
    let mut out = values.to_vec();
    let mut prev: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_none() {
            continue;
        }
        if let Some(p) = prev {
            if i > p + 1 {
                let (x0, y0) = (xs[p].clone(), values[p].clone().unwrap());
                let (x1, y1) = (xs[i].clone(), values[i].clone().unwrap());
                let slope = (y1 - y0.clone()) / (x1 - x0.clone());
                for k in p + 1..i {
                    out[k] = Some(slope.clone() * (xs[k].clone() - x0.clone()) + y0.clone());
                }
            }
        }
        prev = Some(i);
    }
    out
}

/// A polynomial in a centred and scaled variable `u = (x - centre) / scale`.
///
/// Fitting in `u` keeps the normal equations well conditioned when `x` is a
/// row index in the thousands.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<S> {
    /// Coefficients in ascending powers of `u`.
    pub coefficients: Vec<S>,
    pub centre: S,
    pub scale: S,
}

impl<S: Scalar> Polynomial<S> {
    /// Least-squares fit of the given degree through `(x, y)` points.
    pub fn fit(points: &[(S, S)], degree: usize) -> Result<Self, FitError> {
        let needed = degree + 1;
        if points.len() < needed {
            return Err(FitError::TooFewPoints { degree, needed, found: points.len() });
        }
        let (mut lo, mut hi) = (points[0].0.clone(), points[0].0.clone());
        for (x, _) in points {
            if *x < lo {
                lo = x.clone();
            }
            if *x > hi {
                hi = x.clone();
            }
        }
        let two = S::one() + S::one();
        let centre = (lo.clone() + hi.clone()) / two.clone();
        let mut scale = (hi - lo) / two;
        if scale.is_zero() {
            scale = S::one();
        }

        // normal equations: (VᵀV) c = Vᵀy over powers of u
        let mut power_sums = vec![S::zero(); 2 * degree + 1];
        let mut rhs = vec![S::zero(); needed];
        for (x, y) in points {
            let u = (x.clone() - centre.clone()) / scale.clone();
            let mut p = S::one();
            for k in 0..=2 * degree {
                if k < needed {
                    rhs[k] = rhs[k].clone() + p.clone() * y.clone();
                }
                power_sums[k] = power_sums[k].clone() + p.clone();
                p = p * u.clone();
            }
        }
        let mut matrix: Vec<Vec<S>> =
            (0..needed).map(|r| (0..needed).map(|c| power_sums[r + c].clone()).collect()).collect();
        let coefficients = solve(&mut matrix, rhs).ok_or(FitError::Singular(degree))?;
        Ok(Polynomial { coefficients, centre, scale })
    }

    pub fn eval(&self, x: S) -> S {
        let u = (x - self.centre.clone()) / self.scale.clone();
        self.coefficients.iter().rev().fold(S::zero(), |acc, c| acc * u.clone() + c.clone())
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve<S: Scalar>(matrix: &mut [Vec<S>], mut rhs: Vec<S>) -> Option<Vec<S>> {
    let n = rhs.len();
    let magnitude = matrix.iter().flatten().fold(S::zero(), |m, v| if v.abs() > m { v.abs() } else { m });
    let tolerance = magnitude * S::from_f64(1e-13).unwrap_or_else(S::zero);
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            matrix[a][col].abs().partial_cmp(&matrix[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if matrix[pivot][col].abs() <= tolerance || matrix[pivot][col].is_zero() {
            return None;
        }
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = matrix[row][col].clone() / matrix[col][col].clone();
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                matrix[row][k] = matrix[row][k].clone() - factor.clone() * matrix[col][k].clone();
            }
            rhs[row] = rhs[row].clone() - factor * rhs[col].clone();
        }
    }
    let mut solution = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..n {
            acc = acc - matrix[row][k].clone() * solution[k].clone();
        }
        solution[row] = acc / matrix[row][row].clone();
    }
    Some(solution)
}

/// Fits one global polynomial through the known points and evaluates it at
/// every missing position.
pub fn polynomial_fill<S: Scalar>(xs: &[S], values: &[Option<S>], degree: usize) -> Result<Vec<Option<S>>, FitError> {
    assert_eq!(xs.len(), values.len(), "axis and series lengths differ");
    let points: Vec<(S, S)> = xs
        .iter()
        .zip(values)
        .filter_map(|(x, v)| v.clone().map(|v| (x.clone(), v)))
        .collect();
    if points.len() == values.len() {
        return Ok(values.to_vec());
    }
    let poly = Polynomial::fit(&points, degree)?;
    Ok(xs
        .iter()
        .zip(values)
        .map(|(x, v)| v.clone().or_else(|| Some(poly.eval(x.clone()))))
        .collect())
}

/// `0, 1, 2, ...` as scalars.
pub fn index_axis<S: Scalar>(len: usize) -> Vec<S> {
    (0..len).map(|i| S::from_usize(i).expect("row index not representable")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_median() {
        assert_eq!(mean(&[Some(1.0), None, Some(3.0)]), Some(2.0));
        assert_eq!(median(&[Some(5.0), None, Some(1.0), Some(3.0)]), Some(3.0));
        assert_eq!(median(&[Some(4.0), Some(1.0)]), Some(2.5));
        assert_eq!(mean::<f64>(&[None, None]), None);
        assert_eq!(median::<f64>(&[]), None);
    }

    #[test]
    fn fills_leave_edges() {
        assert_eq!(forward_fill(&[None, Some(5), None]), vec![None, Some(5), Some(5)]);
        assert_eq!(back_fill(&[None, Some(5), None]), vec![Some(5), Some(5), None]);
    }

    #[test]
    fn linear_on_index_axis() {
        let values = [Some(1.0), None, None, Some(4.0)];
        assert_eq!(linear_fill(&index_axis(4), &values), vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0)]);
        let edges = [None, Some(1.0), None, Some(3.0), None];
        assert_eq!(linear_fill(&index_axis(5), &edges), vec![None, Some(1.0), Some(2.0), Some(3.0), None]);
    }

    #[test]
    fn polynomial_recovers_quadratic() {
        let xs: Vec<f64> = index_axis(8);
        let values: Vec<Option<f64>> =
            xs.iter().map(|&x| if x == 3.0 || x == 7.0 { None } else { Some(2.0 * x * x - x + 1.0) }).collect();
        let filled = polynomial_fill(&xs, &values, 2).unwrap();
        assert!((filled[3].unwrap() - 16.0).abs() < 1e-9);
        assert!((filled[7].unwrap() - 92.0).abs() < 1e-9);
    }

    #[test]
    fn polynomial_needs_enough_points() {
        let err = polynomial_fill(&index_axis::<f64>(3), &[Some(1.0), None, Some(2.0)], 2).unwrap_err();
        assert_eq!(err, FitError::TooFewPoints { degree: 2, needed: 3, found: 2 });
    }

    #[test]
    fn constant_fit_is_mean() {
        let poly = Polynomial::fit(&[(0.0, 1.0), (1.0, 2.0), (5.0, 6.0)], 0).unwrap();
        assert!((poly.eval(10.0) - 3.0).abs() < 1e-12);
        assert_eq!(poly.degree(), 0);
    }
}
