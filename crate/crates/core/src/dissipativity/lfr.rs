use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::polymat::{channel_range, toeplitz_lift_with_lag, Channel, IoRepresentation};
use crate::signals::{build_hankel, zero_prefix_selector, DataDictionary};

/// Homogeneous constraint `B x = 0` over unknowns laid out as
/// `[g | ... ]` with the supply channels at `w_cols` and `z_cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub b: DMatrix<f64>,
    pub g_cols: usize,
    pub w_cols: Range<usize>,
    pub z_cols: Range<usize>,
    pub horizon: usize,
    pub prefix: usize,
}

impl ConstraintSystem {
    pub fn ncols(&self) -> usize {
        self.b.ncols()
    }

    /// Matrix mapping the unknowns to the stacked supply vector `[w|_L; z|_L]`.
    pub fn supply_map(&self) -> DMatrix<f64> {
        let (nw, nz) = (self.w_cols.len(), self.z_cols.len());
        let mut e = DMatrix::zeros(nw + nz, self.ncols());
        for (i, c) in self.w_cols.clone().chain(self.z_cols.clone()).enumerate() {
            e[(i, c)] = 1.0;
        }
        e
    }
}

/// Per-row Toeplitz lifts of an IO representation: `d[o]` acts on output
/// channel `o`, `n[o][i]` on input channel `i`; row `r` uses its own lag.
#[derive(Debug, Clone)]
struct LiftedIo {
    d: Vec<DMatrix<f64>>,
    n: Vec<Vec<DMatrix<f64>>>,
}

fn lift_io(m: &IoRepresentation, horizon: usize) -> Result<LiftedIo> {
    let lags: Vec<usize> = (0..m.n_outputs())
        .map(|r| m.row_lag(r).unwrap_or(0))
        .collect();
    if let Some(&lag) = lags.iter().find(|&&l| horizon <= l) {
        return Err(Error::HorizonTooShort { horizon, lag });
    }
    let lift = |p: &crate::polymat::PolyMatrix,
                rows: Range<usize>,
                cols: Range<usize>|
     -> Result<DMatrix<f64>> {
        let mut blocks = Vec::new();
        for r in rows {
            let sub = p.rows_range(r, 1).cols_range(cols.start, cols.len());
            blocks.push(toeplitz_lift_with_lag(&sub, horizon, lags[r])?);
        }
        let cols_total = horizon * cols.len();
        if blocks.is_empty() {
            return Ok(DMatrix::zeros(0, cols_total));
        }
        Ok(linalg::vstack(&blocks.iter().collect::<Vec<_>>()))
    };
    let mut d = Vec::new();
    let mut n = Vec::new();
    for o in &m.outputs {
        let rows = channel_range(&m.outputs, &o.name).expect("own channel");
        d.push(lift(&m.den, rows.clone(), rows.clone())?);
        let mut row_n = Vec::new();
        for i in &m.inputs {
            let cols = channel_range(&m.inputs, &i.name).expect("own channel");
            row_n.push(lift(&m.num, rows.clone(), cols)?);
        }
        n.push(row_n);
    }
    Ok(LiftedIo { d, n })
}

fn check_prefix(nu: usize, lag_bound: usize, model_lag: usize) -> Result<()> {
    if nu < lag_bound.max(model_lag + 1) {
        return Err(Error::PrefixPolicy {
            nu,
            lag_bound,
            model_lag_plus_one: model_lag + 1,
        });
    }
    Ok(())
}

fn split_channels(channels: &[Channel], first_dim: usize, what: &str) -> Result<usize> {
    let first = channels
        .first()
        .ok_or_else(|| Error::dims(what, "no channels"))?;
    if first.dim != first_dim {
        return Err(Error::dims(
            what,
            format!(
                "channel \"{}\" has dimension {}, data has {first_dim}",
                first.name, first.dim
            ),
        ));
    }
    Ok(channels.iter().skip(1).map(|c| c.dim).sum())
}

/// Lifted plant-data and model blocks of a closed loop `G` with `M`.
///
/// `M` maps `(y, w)` to `(u, z)`: its first output channel is the plant input
/// `u`, its first input channel the plant output `y`; the remaining channels
/// form `z` and `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHorizonLfr {
    pub t_du: DMatrix<f64>,
    pub t_uy: DMatrix<f64>,
    pub t_uw: DMatrix<f64>,
    pub t_dz: DMatrix<f64>,
    pub t_zy: DMatrix<f64>,
    pub t_zw: DMatrix<f64>,
    pub h_u: DMatrix<f64>,
    pub h_y: DMatrix<f64>,
    pub horizon: usize,
    pub prefix: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_w: usize,
    pub n_z: usize,
}

impl FiniteHorizonLfr {
    /// Build with the prefix policy `nu >= max(lag_bound, lag(M) + 1)` enforced.
    pub fn from_io(
        m: &IoRepresentation,
        data: &DataDictionary,
        horizon: usize,
        nu: usize,
        lag_bound: usize,
    ) -> Result<Self> {
        check_prefix(nu, lag_bound, m.lag())?;
        Self::build(m, data, horizon, nu)
    }

    /// Build without the prefix policy.
    pub fn build(
        m: &IoRepresentation,
        data: &DataDictionary,
        horizon: usize,
        nu: usize,
    ) -> Result<Self> {
        if nu > horizon {
            return Err(Error::PrefixExceedsHorizon {
                prefix: nu,
                horizon,
            });
        }
        let n_z = split_channels(&m.outputs, data.n_u(), "model outputs")?;
        let n_w = split_channels(&m.inputs, data.n_y(), "model inputs")?;
        if m.outputs.len() > 2 || m.inputs.len() > 2 {
            // Merge trailing channels into a single z / w block.
            let outputs = vec![m.outputs[0].clone(), Channel::new("z", n_z)];
            let inputs = vec![m.inputs[0].clone(), Channel::new("w", n_w)];
            let merged = IoRepresentation {
                den: m.den.clone(),
                num: m.num.clone(),
                outputs,
                inputs,
            };
            return Self::build(&merged, data, horizon, nu);
        }
        let h_u = build_hankel(&data.u, horizon)?;
        let h_y = build_hankel(&data.y, horizon)?;
        let lifted = lift_io(m, horizon)?;
        let empty = |rows: usize, cols: usize| DMatrix::<f64>::zeros(rows, cols);
        let (t_dz, t_zy, t_zw) = if m.outputs.len() > 1 {
            let t_zw = lifted.n[1]
                .get(1)
                .cloned()
                .unwrap_or_else(|| empty(lifted.d[1].nrows(), 0));
            (lifted.d[1].clone(), lifted.n[1][0].clone(), t_zw)
        } else {
            (
                empty(0, 0),
                empty(0, horizon * data.n_y()),
                empty(0, horizon * n_w),
            )
        };
        let t_uw = lifted.n[0]
            .get(1)
            .cloned()
            .unwrap_or_else(|| empty(lifted.d[0].nrows(), 0));
        Ok(Self {
            t_du: lifted.d[0].clone(),
            t_uy: lifted.n[0][0].clone(),
            t_uw,
            t_dz,
            t_zy,
            t_zw,
            h_u,
            h_y,
            horizon,
            prefix: nu,
            n_u: data.n_u(),
            n_y: data.n_y(),
            n_w,
            n_z,
        })
    }

    pub fn n_g(&self) -> usize {
        self.h_u.ncols()
    }
}

fn expect_shape(m: &DMatrix<f64>, rows: Option<usize>, cols: usize, name: &str) -> Result<()> {
    if m.ncols() != cols || rows.is_some_and(|r| m.nrows() != r) {
        return Err(Error::dims(
            name,
            format!(
                "is {}x{}, expected {}x{cols}",
                m.nrows(),
                m.ncols(),
                rows.map_or("*".into(), |r| r.to_string())
            ),
        ));
    }
    Ok(())
}

/// `B` over `[g | w|_L | z|_L]`: the lifted `u`- and `z`-equations of `M`
/// with the plant signals replaced by Hankel data, plus zero-prefix rows on `w` and `z`.
pub fn assemble_closed_loop_b(lfr: &FiniteHorizonLfr) -> Result<ConstraintSystem> {
    let l = lfr.horizon;
    let ng = lfr.n_g();
    expect_shape(&lfr.h_u, Some(l * lfr.n_u), ng, "H_L(u)")?;
    expect_shape(&lfr.h_y, Some(l * lfr.n_y), ng, "H_L(y)")?;
    let ru = lfr.t_du.nrows();
    let rz = lfr.t_dz.nrows();
    expect_shape(&lfr.t_du, None, l * lfr.n_u, "T^D_u")?;
    expect_shape(&lfr.t_uy, Some(ru), l * lfr.n_y, "T^N_uy")?;
    expect_shape(&lfr.t_uw, Some(ru), l * lfr.n_w, "T^N_uw")?;
    expect_shape(&lfr.t_dz, None, l * lfr.n_z, "T^D_z")?;
    expect_shape(&lfr.t_zy, Some(rz), l * lfr.n_y, "T^N_zy")?;
    expect_shape(&lfr.t_zw, Some(rz), l * lfr.n_w, "T^N_zw")?;

    let (nw, nz) = (l * lfr.n_w, l * lfr.n_z);
    let u_rows = linalg::hstack(&[
        &(&lfr.t_uy * &lfr.h_y - &lfr.t_du * &lfr.h_u),
        &lfr.t_uw,
        &DMatrix::zeros(ru, nz),
    ]);
    let z_rows = linalg::hstack(&[&(&lfr.t_zy * &lfr.h_y), &lfr.t_zw, &(-&lfr.t_dz)]);
    let vw = zero_prefix_selector(l, lfr.prefix, lfr.n_w)?.matrix;
    let vz = zero_prefix_selector(l, lfr.prefix, lfr.n_z)?.matrix;
    let w_sel = linalg::hstack(&[
        &DMatrix::zeros(vw.nrows(), ng),
        &vw,
        &DMatrix::zeros(vw.nrows(), nz),
    ]);
    let z_sel = linalg::hstack(&[&DMatrix::zeros(vz.nrows(), ng + nw), &vz]);
    Ok(ConstraintSystem {
        b: linalg::vstack(&[&u_rows, &z_rows, &w_sel, &z_sel]),
        g_cols: ng,
        w_cols: ng..ng + nw,
        z_cols: ng + nw..ng + nw + nz,
        horizon: l,
        prefix: lfr.prefix,
    })
}

/// Three-channel generalized plant `F: (y, w, f) -> (u, z, e)` lifted over data.
///
/// Channel order is fixed: outputs `[u, z, e]`, inputs `[y, w, f]`.
#[derive(Debug, Clone)]
pub struct GeneralizedPlantLfr {
    lifted: LiftedIo,
    h_u: DMatrix<f64>,
    h_y: DMatrix<f64>,
    pub horizon: usize,
    pub prefix: usize,
    /// `(n_u, n_z, n_e)`.
    pub out_dims: [usize; 3],
    /// `(n_y, n_w, n_f)`.
    pub in_dims: [usize; 3],
}

impl GeneralizedPlantLfr {
    pub fn from_io(
        f: &IoRepresentation,
        data: &DataDictionary,
        horizon: usize,
        nu: usize,
        lag_bound: usize,
    ) -> Result<Self> {
        check_prefix(nu, lag_bound, f.lag())?;
        Self::build(f, data, horizon, nu)
    }

    pub fn build(
        f: &IoRepresentation,
        data: &DataDictionary,
        horizon: usize,
        nu: usize,
    ) -> Result<Self> {
        if f.outputs.len() != 3 || f.inputs.len() != 3 {
            return Err(Error::dims(
                "generalized plant",
                "expects outputs (u, z, e) and inputs (y, w, f)",
            ));
        }
        if nu > horizon {
            return Err(Error::PrefixExceedsHorizon {
                prefix: nu,
                horizon,
            });
        }
        split_channels(&f.outputs, data.n_u(), "generalized plant outputs")?;
        split_channels(&f.inputs, data.n_y(), "generalized plant inputs")?;
        let out_dims = [f.outputs[0].dim, f.outputs[1].dim, f.outputs[2].dim];
        let in_dims = [f.inputs[0].dim, f.inputs[1].dim, f.inputs[2].dim];
        Ok(Self {
            lifted: lift_io(f, horizon)?,
            h_u: build_hankel(&data.u, horizon)?,
            h_y: build_hankel(&data.y, horizon)?,
            horizon,
            prefix: nu,
            out_dims,
            in_dims,
        })
    }

    fn layout(&self) -> (usize, [Range<usize>; 4]) {
        let l = self.horizon;
        let ng = self.h_u.ncols();
        let w = ng..ng + l * self.in_dims[1];
        let f = w.end..w.end + l * self.in_dims[2];
        let z = f.end..f.end + l * self.out_dims[1];
        let e = z.end..z.end + l * self.out_dims[2];
        (ng, [w, f, z, e])
    }

    /// Open constraint over `[g | w | f | z | e]` with zero-prefix rows on `w` and `z`.
    pub fn assemble(&self) -> Result<ConstraintSystem> {
        let l = self.horizon;
        let (ng, [w, f, z, e]) = self.layout();
        let ncols = e.end;
        let lf = &self.lifted;
        let mut blocks = Vec::new();
        for o in 0..3 {
            let rows = lf.d[o].nrows();
            let mut row = DMatrix::zeros(rows, ncols);
            let mut g_part = &lf.n[o][0] * &self.h_y;
            if o == 0 {
                g_part -= &lf.d[0] * &self.h_u;
            }
            row.view_mut((0, 0), (rows, ng)).copy_from(&g_part);
            row.view_mut((0, w.start), (rows, w.len()))
                .copy_from(&lf.n[o][1]);
            row.view_mut((0, f.start), (rows, f.len()))
                .copy_from(&lf.n[o][2]);
            if o == 1 {
                row.view_mut((0, z.start), (rows, z.len()))
                    .copy_from(&(-&lf.d[1]));
            }
            if o == 2 {
                row.view_mut((0, e.start), (rows, e.len()))
                    .copy_from(&(-&lf.d[2]));
            }
            blocks.push(row);
        }
        let vw = zero_prefix_selector(l, self.prefix, self.in_dims[1])?.matrix;
        let vz = zero_prefix_selector(l, self.prefix, self.out_dims[1])?.matrix;
        let mut sel = DMatrix::zeros(vw.nrows() + vz.nrows(), ncols);
        sel.view_mut((0, w.start), vw.shape()).copy_from(&vw);
        sel.view_mut((vw.nrows(), z.start), vz.shape())
            .copy_from(&vz);
        blocks.push(sel);
        Ok(ConstraintSystem {
            b: linalg::vstack(&blocks.iter().collect::<Vec<_>>()),
            g_cols: ng,
            w_cols: w,
            z_cols: z,
            horizon: l,
            prefix: self.prefix,
        })
    }

    /// Append `T_L(D_k) f|_L - T_L(N_k) e|_L = 0` for a controller `K: e -> f`.
    pub fn close_with_controller(&self, k: &IoRepresentation) -> Result<ConstraintSystem> {
        if k.n_outputs() != self.in_dims[2] || k.n_inputs() != self.out_dims[2] {
            return Err(Error::dims(
                "controller",
                format!(
                    "K is {}x{}, generalized plant expects {}x{}",
                    k.n_outputs(),
                    k.n_inputs(),
                    self.in_dims[2],
                    self.out_dims[2]
                ),
            ));
        }
        check_prefix(self.prefix, 0, k.lag())?;
        let open = self.assemble()?;
        let (_, [_, f, _, e]) = self.layout();
        let lk = lift_io(
            &IoRepresentation {
                outputs: vec![Channel::new("f", k.n_outputs())],
                inputs: vec![Channel::new("e", k.n_inputs())],
                ..k.clone()
            },
            self.horizon,
        )?;
        let rows = lk.d[0].nrows();
        let mut kb = DMatrix::zeros(rows, open.ncols());
        kb.view_mut((0, f.start), (rows, f.len()))
            .copy_from(&lk.d[0]);
        kb.view_mut((0, e.start), (rows, e.len()))
            .copy_from(&(-&lk.n[0][0]));
        Ok(ConstraintSystem {
            b: linalg::vstack(&[&open.b, &kb]),
            ..open
        })
    }
}
