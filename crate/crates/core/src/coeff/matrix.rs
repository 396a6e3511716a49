use super::{Chart, PolySeries};
use crate::error::{KernelError, Result};

/// A square matrix over the coefficient ring, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMatrix {
    chart: Chart,
    size: usize,
    entries: Vec<PolySeries>,
}

impl SeriesMatrix {
    pub fn zero(chart: Chart, size: usize) -> Self {
        SeriesMatrix { chart, size, entries: vec![PolySeries::zero(chart); size * size] }
    }

    pub fn identity(chart: Chart, size: usize) -> Self {
        let mut m = Self::zero(chart, size);
        for i in 0..size {
            m.entries[i * size + i] = PolySeries::one(chart);
        }
        m
    }

    /// Builds from rows; every row must have `rows.len()` entries.
    pub fn from_rows(chart: Chart, rows: Vec<Vec<PolySeries>>) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(KernelError::RankMismatch(format!(
                    "row of length {} in a {size}x{size} matrix",
                    row.len()
                )));
            }
            for e in row {
                chart.check(e.chart())?;
                entries.push(e);
            }
        }
        Ok(SeriesMatrix { chart, size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn get(&self, row: usize, col: usize) -> &PolySeries {
        &self.entries[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: PolySeries) {
        self.chart.assert_same(v.chart());
        self.entries[row * self.size + col] = v;
    }

    pub fn rows(&self) -> Vec<Vec<PolySeries>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut out = Self::zero(self.chart, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = PolySeries::zero(self.chart);
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.entries[i * n + j] = acc;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        SeriesMatrix {
            chart: self.chart,
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        SeriesMatrix {
            chart: self.chart,
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.size;
        let mut out = Self::zero(self.chart, n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&PolySeries) -> PolySeries) -> Self {
        SeriesMatrix { chart: self.chart, size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn is_identity_at_t0(&self) -> bool {
        let n = self.size;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let e = self.get(i, j).t_coeff(0);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Inverse of a matrix equal to the identity at `t = 0`, computed as the
    /// terminating Neumann series `sum_k (I - M)^k` (the deviation from the
    /// identity is nilpotent modulo `t^{N+1}`).
    pub fn inverse_unipotent(&self) -> Result<Self> {
        if !self.is_identity_at_t0() {
            return Err(KernelError::NotUnipotent);
        }
        let id = Self::identity(self.chart, self.size);
        let dev = id.sub(self);
        let mut acc = id.clone();
        let mut power = id;
        for _ in 0..self.chart.order {
            power = power.mul(&dev);
            acc = acc.add(&power);
        }
        Ok(acc)
    }
}
