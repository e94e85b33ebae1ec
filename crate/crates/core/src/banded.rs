//! Banded matrices and their LU factorization without pivoting.
//!
//! Used for the radial resolvents `(c - kappa Delta)^{-1}` and the
//! implicit steps of the radial linear flow. Both matrices are shifted
//! discrete Laplacians with a positive (or imaginary) diagonal shift, so the
//! elimination runs without row exchanges.

use std::ops::{Add, Div, Mul, Sub};

use num_traits::Zero;

/// Scalars the banded solver works over (real or complex).
pub trait BandScalar:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
}

impl<S> BandScalar for S where
    S: Copy + Zero + Add<Output = S> + Sub<Output = S> + Mul<Output = S> + Div<Output = S>
{
}

/// Square matrix with `b` sub- and super-diagonals. Row `j` stores columns
/// `j-b ..= j+b`; entries falling outside the matrix are ignored.
#[derive(Debug, Clone)]
pub struct Banded<S> {
    b: usize,
    rows: Vec<Vec<S>>,
}

impl<S: BandScalar> Banded<S> {
    pub fn from_rows(b: usize, rows: Vec<Vec<S>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == 2 * b + 1), "row width must be 2b+1");
        Self { b, rows }
    }

    pub fn half_bandwidth(&self) -> usize {
        self.b
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Entry `(j, col)`, zero outside the band.
    pub fn get(&self, j: usize, col: usize) -> S {
        let off = col as isize - j as isize + self.b as isize;
        if off < 0 || off as usize > 2 * self.b {
            S::zero()
        } else {
            self.rows[j][off as usize]
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let n = self.rows.len();
        let b = self.b as isize;
        (0..n)
            .map(|j| {
                let mut acc = S::zero();
                for (m, &c) in self.rows[j].iter().enumerate() {
                    let col = j as isize + m as isize - b;
                    if col >= 0 && (col as usize) < n {
                        acc = acc + c * x[col as usize];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn map<R: BandScalar>(&self, f: impl Fn(S) -> R) -> Banded<R> {
        Banded {
            b: self.b,
            rows: self.rows.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
        }
    }

    pub fn factor(&self) -> BandedLu<S> {
        BandedLu::new(self)
    }
}

/// Doolittle LU: `L` unit lower and `U` upper, both with bandwidth `b`.
#[derive(Debug, Clone)]
pub struct BandedLu<S> {
    b: usize,
    // lower[j][k] = l_{j, j-b+k} for k < b; upper[j][k] = u_{j, j+k} for k <= b
    lower: Vec<Vec<S>>,
    upper: Vec<Vec<S>>,
}

impl<S: BandScalar> BandedLu<S> {
    fn new(a: &Banded<S>) -> Self {
        let n = a.len();
        let b = a.b;
        let z = S::zero();
        let mut lower = vec![vec![z; b]; n];
        let mut upper = vec![vec![z; b + 1]; n];
        let u = |upper: &Vec<Vec<S>>, i: usize, col: usize| -> S {
            if col < i || col > i + b {
                z
            } else {
                upper[i][col - i]
            }
        };
        for j in 0..n {
            let lo = j.saturating_sub(b);
            // l_{j,k} for k in lo..j
            for k in lo..j {
                let mut v = a.get(j, k);
                for m in k.saturating_sub(b).max(lo)..k {
                    v = v - lower[j][m + b - j] * u(&upper, m, k);
                }
                lower[j][k + b - j] = v / upper[k][0];
            }
            // u_{j,c} for c in j..=j+b
            for c in j..(j + b + 1).min(n) {
                let mut v = a.get(j, c);
                for m in lo.max(c.saturating_sub(b))..j {
                    v = v - lower[j][m + b - j] * u(&upper, m, c);
                }
                upper[j][c - j] = v;
            }
        }
        Self { b, lower, upper }
    }

    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [S]) {
        let n = self.upper.len();
        let b = self.b;
        assert_eq!(x.len(), n);
        for j in 0..n {
            let mut v = x[j];
            for k in j.saturating_sub(b)..j {
                v = v - self.lower[j][k + b - j] * x[k];
            }
            x[j] = v;
        }
        for j in (0..n).rev() {
            let mut v = x[j];
            for c in j + 1..(j + b + 1).min(n) {
                v = v - self.upper[j][c - j] * x[c];
            }
            x[j] = v / self.upper[j][0];
        }
    }
}
