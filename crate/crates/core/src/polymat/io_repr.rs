use super::matrix::{is_coprime, PolyMatrix, DEFAULT_COPRIME_TOL};
use super::poly::{poly_lcm, Poly, DEFAULT_GCD_TOL};
use super::rational::{RationalFn, RationalMatrix};
use crate::error::{Error, Result};

/// A named signal partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub dim: usize,
}

impl Channel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

/// Offset of `name` within a partition.
pub fn channel_range(channels: &[Channel], name: &str) -> Option<std::ops::Range<usize>> {
    let mut off = 0;
    for c in channels {
        if c.name == name {
            return Some(off..off + c.dim);
        }
        off += c.dim;
    }
    None
}

fn total(channels: &[Channel]) -> usize {
    channels.iter().map(|c| c.dim).sum()
}

/// Kernel representation `D(q) out = N(q) in` with named channel partitions.
///
/// `D` is block-diagonal over the output channels.
#[derive(Debug, Clone, PartialEq)]
pub struct IoRepresentation {
    pub den: PolyMatrix,
    pub num: PolyMatrix,
    pub outputs: Vec<Channel>,
    pub inputs: Vec<Channel>,
}

impl IoRepresentation {
    pub fn new(
        den: PolyMatrix,
        num: PolyMatrix,
        outputs: Vec<Channel>,
        inputs: Vec<Channel>,
    ) -> Result<Self> {
        let n_out = total(&outputs);
        let n_in = total(&inputs);
        if den.nrows() != n_out || den.ncols() != n_out {
            return Err(Error::dims(
                "IO representation",
                format!(
                    "D is {}x{}, outputs have {n_out} rows",
                    den.nrows(),
                    den.ncols()
                ),
            ));
        }
        if num.nrows() != n_out || num.ncols() != n_in {
            return Err(Error::dims(
                "IO representation",
                format!(
                    "N is {}x{}, expected {n_out}x{n_in}",
                    num.nrows(),
                    num.ncols()
                ),
            ));
        }
        let rep = Self {
            den,
            num,
            outputs,
            inputs,
        };
        for (i, c) in rep.outputs.iter().enumerate() {
            let r = channel_range(&rep.outputs, &c.name).expect("own channel");
            for row in r.clone() {
                for col in 0..n_out {
                    if !r.contains(&col) && !rep.den.entry(row, col).is_zero() {
                        return Err(Error::dims(
                            "IO representation",
                            format!(
                                "D couples output channel {i} (\"{}\") to another channel",
                                c.name
                            ),
                        ));
                    }
                }
            }
            if rep.den_block(i).det()?.is_zero() {
                return Err(Error::SingularDenominator);
            }
        }
        Ok(rep)
    }

    pub fn n_outputs(&self) -> usize {
        self.den.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.num.ncols()
    }

    /// Diagonal block of `D` for output channel `i`.
    pub fn den_block(&self, i: usize) -> PolyMatrix {
        let r = channel_range(&self.outputs, &self.outputs[i].name).expect("valid index");
        self.den
            .rows_range(r.start, r.len())
            .cols_range(r.start, r.len())
    }

    pub fn output_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        channel_range(&self.outputs, name)
    }

    pub fn input_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        channel_range(&self.inputs, name)
    }

    /// Lag of `[D N]`.
    pub fn lag(&self) -> usize {
        (0..self.n_outputs())
            .filter_map(|r| self.row_lag(r))
            .max()
            .unwrap_or(0)
    }

    /// Lag of a single scalar row of `[D N]`.
    pub fn row_lag(&self, r: usize) -> Option<usize> {
        self.den.row_lag(r).max(self.num.row_lag(r))
    }

    /// Input channels whose pair `(D, N_channel)` fails the coprimeness test.
    pub fn coprimeness_warnings(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for c in &self.inputs {
            let r = channel_range(&self.inputs, &c.name).expect("own channel");
            let n = self.num.cols_range(r.start, r.len());
            if !is_coprime(&self.den, &n, DEFAULT_COPRIME_TOL)? {
                out.push(format!("(D, N_{}) is not coprime", c.name));
            }
        }
        Ok(out)
    }

    /// Transfer matrix `D^{-1} N`.
    pub fn to_rational(&self) -> Result<RationalMatrix> {
        let d = RationalMatrix::from_fn(self.n_outputs(), self.n_outputs(), |i, j| {
            RationalFn::from_poly(self.den.entry(i, j))
        });
        let n = RationalMatrix::from_fn(self.n_outputs(), self.n_inputs(), |i, j| {
            RationalFn::from_poly(self.num.entry(i, j))
        });
        d.inverse()?.mul(&n)
    }
}

/// Convert a transfer matrix to IO form: each row gets the LCM of its
/// denominators, so `D` is diagonal.
pub fn rational_to_io(
    m: &RationalMatrix,
    outputs: Vec<Channel>,
    inputs: Vec<Channel>,
) -> Result<IoRepresentation> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut d_entries = Vec::with_capacity(rows);
    let mut n_rows = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut l = Poly::one();
        for j in 0..cols {
            l = poly_lcm(&l, m.entry(i, j).den(), DEFAULT_GCD_TOL)?;
        }
        let row: Vec<Poly> = (0..cols)
            .map(|j| {
                let e = m.entry(i, j);
                let (q, _) = l.div_rem(e.den()).expect("denominator is nonzero");
                &q * e.num()
            })
            .collect();
        d_entries.push(l);
        n_rows.push(row);
    }
    let den = PolyMatrix::from_entries(rows, rows, |i, j| {
        if i == j {
            d_entries[i].clone()
        } else {
            Poly::zero()
        }
    });
    let num = PolyMatrix::from_entries(rows, cols, |i, j| n_rows[i][j].clone());
    IoRepresentation::new(den, num, outputs, inputs)
}
