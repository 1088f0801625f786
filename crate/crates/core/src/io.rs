//! Binary checkpoints and the energy time-series CSV.
//!
//! # Checkpoint layout
//!
//! All integers and floats are little-endian.
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `JMGTCKPT` |
//! | 4 | `u32` format version ([`CHECKPOINT_VERSION`]) |
//! | 4 + ℓ | `u32` length ℓ and ℓ bytes of UTF-8 provenance note |
//! | 4 | `u32` dimension `n` |
//! | 4 | `u32` points per axis `N` |
//! | 8·n | `f64` box lengths |
//! | 1 | history tag: 0 resolved, 1 closure moment |
//! | 4 | `u32` `N_s` (0 for closure) |
//! | 8 | `f64` `S_max` (0 for closure) |
//! | 8·6 | `f64` `t, τ, b, c², k`, kernel mass |
//! | 8·2 | `f64` closure mass and rate (0 for resolved history) |
//! | 8·Nⁿ ×3 | `ψ, v, w` in row-major node order |
//! | 8·N_s·Nⁿ or 8·Nⁿ | `η(s_1..s_{N_s})` node-major, or the moment `M` |

use std::io::{Read, Write};
use std::sync::Arc;

use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};
use crate::state::{ClosureMoment, History, HistoryField, HistoryGrid, HistoryWeights, StateVector, SystemParams};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"JMGTCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Header fields of a checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointHeader {
    pub note: String,
    pub dim: usize,
    pub points: usize,
    pub lengths: Vec<f64>,
    /// `(N_s, S_max)` for a resolved history.
    pub history: Option<(usize, f64)>,
    pub t: f64,
    pub tau: f64,
    pub b: f64,
    pub c2: f64,
    pub k: f64,
    pub kernel_mass: f64,
    pub closure_mass: f64,
    pub closure_rate: f64,
}

fn put_f64s(out: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint(
    out: &mut impl Write,
    state: &StateVector,
    params: &SystemParams,
    t: f64,
    note: &str,
) -> Result<()> {
    let grid = state.grid();
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&(note.len() as u32).to_le_bytes())?;
    out.write_all(note.as_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.points_per_axis() as u32).to_le_bytes())?;
    put_f64s(out, grid.box_lengths())?;
    let (tag, n_s, s_max, c_mass, c_rate) = match &state.history {
        History::Dafermos(h) => {
            let hg = h.weights().grid();
            (0u8, hg.n_s() as u32, hg.s_max(), 0.0, 0.0)
        }
        History::Closure(c) => (1u8, 0, 0.0, c.mass, c.rate),
    };
    out.write_all(&[tag])?;
    out.write_all(&n_s.to_le_bytes())?;
    put_f64s(out, &[s_max, t, params.tau(), params.b(), params.c2(), params.k(), params.mass()])?;
    put_f64s(out, &[c_mass, c_rate])?;
    put_f64s(out, state.psi.values())?;
    put_f64s(out, state.v.values())?;
    put_f64s(out, state.w.values())?;
    match &state.history {
        History::Dafermos(h) => put_f64s(out, h.values())?,
        History::Closure(c) => put_f64s(out, c.moment.values())?,
    }
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("checkpoint truncated in {what}: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes::<4>(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>(what)?))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64(what)).collect()
    }
}

fn read_header<R: Read>(c: &mut Cursor<R>) -> Result<CheckpointHeader> {
    if &c.bytes::<8>("magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a checkpoint (bad magic)".into()));
    }
    let version = c.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let note_len = c.u32("note length")? as usize;
    if note_len > 1 << 16 {
        return Err(Error::Format(format!("note length {note_len}")));
    }
    let mut note = vec![0u8; note_len];
    c.inner
        .read_exact(&mut note)
        .map_err(|e| Error::Format(format!("checkpoint truncated in note: {e}")))?;
    let note = String::from_utf8(note).map_err(|_| Error::Format("note is not UTF-8".into()))?;
    let dim = c.u32("dimension")? as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("dimension {dim}")));
    }
    let points = c.u32("points")? as usize;
    let lengths = c.f64s(dim, "box lengths")?;
    let tag = c.bytes::<1>("history tag")?[0];
    let n_s = c.u32("N_s")? as usize;
    let s_max = c.f64("S_max")?;
    let history = match tag {
        0 => Some((n_s, s_max)),
        1 => None,
        other => return Err(Error::Format(format!("history tag {other}"))),
    };
    let v = c.f64s(8, "parameters")?;
    Ok(CheckpointHeader {
        note,
        dim,
        points,
        lengths,
        history,
        t: v[0],
        tau: v[1],
        b: v[2],
        c2: v[3],
        k: v[4],
        kernel_mass: v[5],
        closure_mass: v[6],
        closure_rate: v[7],
    })
}

/// Reads a checkpoint written for `params`; the stored parameters must match
/// to relative precision `1e−12`.
pub fn read_checkpoint(input: impl Read, params: &SystemParams) -> Result<(CheckpointHeader, StateVector)> {
    let mut c = Cursor { inner: input };
    let header = read_header(&mut c)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    let stored = [header.tau, header.b, header.c2, header.k, header.kernel_mass];
    let wanted = [params.tau(), params.b(), params.c2(), params.k(), params.mass()];
    if !stored.iter().zip(&wanted).all(|(a, b)| close(*a, *b)) {
        return Err(Error::Format(format!(
            "checkpoint parameters (τ, b, c², k, mass) = {stored:?} differ from the configured {wanted:?}"
        )));
    }
    let grid = Grid::new(header.dim, header.points, &header.lengths)?;
    let n = grid.len();
    let field = |c: &mut Cursor<_>, what: &str| -> Result<Field> {
        let values = c.f64s(n, what)?;
        Field::from_values(&grid, values)
    };
    let psi = field(&mut c, "ψ")?;
    let v = field(&mut c, "v")?;
    let w = field(&mut c, "w")?;
    let history = match header.history {
        Some((n_s, s_max)) => {
            let weights = Arc::new(HistoryWeights::new(params.kernel(), HistoryGrid::new(n_s, s_max)?)?);
            let values = c.f64s(n * n_s, "history")?;
            History::Dafermos(HistoryField::from_values(&grid, &weights, values)?)
        }
        None => History::Closure(ClosureMoment {
            moment: field(&mut c, "moment")?,
            mass: header.closure_mass,
            rate: header.closure_rate,
        }),
    };
    let mut rest = [0u8; 1];
    if c.inner.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after checkpoint".into()));
    }
    Ok((header, StateVector { psi, v, w, history }))
}

/// Column names of the time-series CSV for levels `0..=p`.
pub fn energy_columns(p: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "E1_0", "E2_0", "F1_0", "F2_0", "Lyap_0"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((0..=p).map(|k| format!("scriptE_{k}")));
    cols.extend((0..=p).map(|k| format!("scriptD_rate_{k}")));
    cols.extend(["Lambda", "L2_psi", "L2_v", "L2_w"].iter().map(|s| s.to_string()));
    cols
}

/// Writes `# <comment>` followed by the energy table.
pub fn write_energy_csv(out: &mut impl Write, report: &EnergyReport, comment: &str) -> Result<()> {
    writeln!(out, "# {comment}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(energy_columns(report.p))?;
    for s in &report.samples {
        let k0 = &s.kappa[0];
        let mut row = vec![s.t, k0.e1, k0.e2, k0.f1, k0.f2, k0.lyap];
        row.extend(s.kappa.iter().map(|k| k.script_e));
        row.extend(s.kappa.iter().map(|k| k.script_d));
        row.extend([s.lambda, s.l2_psi, s.l2_v, s.l2_w]);
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Observer as _;
    use crate::energy::EnergyObserver;
    use crate::kernel::MemoryKernel;
    use crate::state::{init_state, HistoryConfig};
    use std::f64::consts::PI;

    fn params() -> SystemParams {
        SystemParams::new(1.0, 1.5, 1.0, 1.0, MemoryKernel::exponential(0.2, 1.0, 1.0).unwrap()).unwrap()
    }

    fn state(history: &HistoryConfig) -> StateVector {
        let g = Grid::new(2, 8, &[2.0 * PI, 3.0]).unwrap();
        let psi = Field::from_fn(&g, |x| x[0].sin() + x[1]);
        let v = Field::from_fn(&g, |x| x[0].cos() * x[1]);
        let w = Field::from_fn(&g, |x| 0.5 - x[1]);
        init_state(&params(), &psi, &v, &w, history).unwrap()
    }

    fn roundtrip(s: &StateVector) -> (CheckpointHeader, StateVector, Vec<u8>) {
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, s, &params(), 1.25, "hash abc").unwrap();
        let (h, back) = read_checkpoint(buf.as_slice(), &params()).unwrap();
        (h, back, buf)
    }

    #[test]
    fn resolved_checkpoint_roundtrips_bitwise() {
        let s = state(&HistoryConfig::Dafermos { n_s: 4, s_max: 2.0 });
        let (h, back, buf) = roundtrip(&s);
        assert_eq!(h.t, 1.25);
        assert_eq!(h.note, "hash abc");
        assert_eq!(h.history, Some((4, 2.0)));
        assert_eq!(back.psi.values(), s.psi.values());
        assert_eq!(back.w.values(), s.w.values());
        assert_eq!(back.dafermos().unwrap().values(), s.dafermos().unwrap().values());
        let header_len = 8 + 4 + 4 + 8 + 4 + 4 + 16 + 1 + 4 + 8 + 48 + 16;
        assert_eq!(buf.len(), header_len + 8 * 64 * (3 + 4));
        assert_eq!(&buf[..8], b"JMGTCKPT");
    }

    #[test]
    fn closure_checkpoint_roundtrips() {
        let s = state(&HistoryConfig::Closure);
        let (h, back, _) = roundtrip(&s);
        assert!(h.history.is_none());
        assert_eq!(back.memory_moment().values(), s.memory_moment().values());
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let s = state(&HistoryConfig::Closure);
        let (_, _, mut buf) = roundtrip(&s);
        assert!(read_checkpoint(&buf[..buf.len() - 3], &params()).is_err());
        let mut longer = buf.clone();
        longer.push(0);
        assert!(read_checkpoint(longer.as_slice(), &params()).is_err());
        buf[0] = b'X';
        assert!(matches!(read_checkpoint(buf.as_slice(), &params()), Err(Error::Format(_))));
        let (_, _, good) = roundtrip(&s);
        let other = params().with_k(2.0);
        assert!(read_checkpoint(good.as_slice(), &other).is_err());
    }

    #[test]
    fn csv_has_documented_columns() {
        let p = params();
        let s = state(&HistoryConfig::Dafermos { n_s: 4, s_max: 2.0 });
        let mut obs = EnergyObserver::new(&p, 1, false);
        obs.observe(0.0, &s).unwrap();
        let mut buf = Vec::new();
        write_energy_csv(&mut buf, &obs.report, "jmgt 0.1.0 config abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# jmgt 0.1.0 config abc"));
        assert_eq!(
            lines.next(),
            Some("t,E1_0,E2_0,F1_0,F2_0,Lyap_0,scriptE_0,scriptE_1,scriptD_rate_0,scriptD_rate_1,Lambda,L2_psi,L2_v,L2_w")
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 14);
    }
}
