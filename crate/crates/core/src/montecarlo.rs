//! Replicate engine: runs the algorithm on `m` independent training samples and
//! records in-sample (joint coupling) and fresh-data (product coupling) losses.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::mi::Points;
use crate::risk::{resolved_optimum, LearningProblem};
use crate::{Error, Result};

/// How the product coupling `P_W ⊗ μ` is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProductCoupling {
    /// `n` fresh points per replicate from a dedicated stream.
    #[default]
    Fresh,
    /// The training sample of replicate `(j + 1) mod m`.
    CrossReplicate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicateOptions {
    pub product: ProductCoupling,
    /// Keep the training points (needed for per-index MI estimation).
    pub store_points: bool,
}

impl Default for ReplicateOptions {
    fn default() -> Self {
        Self {
            product: ProductCoupling::Fresh,
            store_points: true,
        }
    }
}

/// Training data of replicate `j` comes from stream `2j`, fresh data from `2j + 1`.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Row-major `m × n` matrices of losses plus the hypotheses and training points.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateSet {
    problem_id: String,
    n: usize,
    seed: u64,
    hyp_dim: usize,
    point_dim: usize,
    labelled: bool,
    w_star: Vec<f64>,
    /// Original replicate index of each retained row.
    replicate_ids: Vec<usize>,
    hypotheses: Vec<f64>,
    points: Vec<f64>,
    labels: Vec<u32>,
    joint_r: Vec<f64>,
    product_r: Vec<f64>,
    joint_loss: Vec<f64>,
    product_loss: Vec<f64>,
    failed: Vec<usize>,
    nonconverged: usize,
}

struct Row {
    w: Vec<f64>,
    points: Vec<f64>,
    labels: Vec<u32>,
    joint_r: Vec<f64>,
    product_r: Vec<f64>,
    joint_loss: Vec<f64>,
    product_loss: Vec<f64>,
    converged: bool,
}

fn run_row<P: LearningProblem>(
    problem: &P,
    w_star: &P::Hypothesis,
    n: usize,
    m: usize,
    seed: u64,
    j: usize,
    opts: &ReplicateOptions,
) -> Result<Row> {
    let sample = problem.sample_z(n, &mut stream(seed, 2 * j as u64));
    let fit = problem.run_algorithm(&sample)?;
    let w = fit.hypothesis;
    let fresh = match opts.product {
        ProductCoupling::Fresh => problem.sample_z(n, &mut stream(seed, 2 * j as u64 + 1)),
        ProductCoupling::CrossReplicate => {
            problem.sample_z(n, &mut stream(seed, 2 * ((j + 1) % m) as u64))
        }
    };
    let mut row = Row {
        w: Vec::with_capacity(problem.hypothesis_dim()),
        points: Vec::new(),
        labels: Vec::new(),
        joint_r: Vec::with_capacity(n),
        product_r: Vec::with_capacity(n),
        joint_loss: Vec::with_capacity(n),
        product_loss: Vec::with_capacity(n),
        converged: fit.converged,
    };
    problem.hypothesis_coords(&w, &mut row.w);
    for z in &sample {
        let l = problem.loss(&w, z);
        row.joint_loss.push(l);
        row.joint_r.push(l - problem.loss(w_star, z));
        if opts.store_points {
            if let Some(y) = problem.point_coords(z, &mut row.points) {
                row.labels.push(y);
            }
        }
    }
    for z in &fresh {
        let l = problem.loss(&w, z);
        row.product_loss.push(l);
        row.product_r.push(l - problem.loss(w_star, z));
    }
    Ok(row)
}

/// Runs `m` independent replicates of size `n`. Replicates whose algorithm returns an
/// error are excluded and listed in [`ReplicateSet::failed`].
pub fn run_replicates<P: LearningProblem>(
    problem: &P,
    n: usize,
    m: usize,
    seed: u64,
    opts: &ReplicateOptions,
) -> Result<ReplicateSet> {
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "sample size",
            needed: 2,
            got: n,
        });
    }
    if m < 2 {
        return Err(Error::InsufficientData {
            what: "replicates",
            needed: 2,
            got: m,
        });
    }
    let w_star = resolved_optimum(problem)?;
    let rows: Vec<Result<Row>> = (0..m)
        .into_par_iter()
        .map(|j| run_row(problem, w_star, n, m, seed, j, opts))
        .collect();

    let mut star = Vec::new();
    problem.hypothesis_coords(w_star, &mut star);
    let mut rs = ReplicateSet {
        problem_id: problem.id(),
        n,
        seed,
        hyp_dim: problem.hypothesis_dim(),
        point_dim: problem.point_dim(),
        labelled: problem.is_labelled(),
        w_star: star,
        replicate_ids: Vec::with_capacity(m),
        hypotheses: Vec::with_capacity(m * problem.hypothesis_dim()),
        points: Vec::new(),
        labels: Vec::new(),
        joint_r: Vec::with_capacity(m * n),
        product_r: Vec::with_capacity(m * n),
        joint_loss: Vec::with_capacity(m * n),
        product_loss: Vec::with_capacity(m * n),
        failed: Vec::new(),
        nonconverged: 0,
    };
    for (j, row) in rows.into_iter().enumerate() {
        match row {
            Ok(row) => {
                rs.replicate_ids.push(j);
                rs.hypotheses.extend(row.w);
                rs.points.extend(row.points);
                rs.labels.extend(row.labels);
                rs.joint_r.extend(row.joint_r);
                rs.product_r.extend(row.product_r);
                rs.joint_loss.extend(row.joint_loss);
                rs.product_loss.extend(row.product_loss);
                rs.nonconverged += usize::from(!row.converged);
            }
            Err(_) => rs.failed.push(j),
        }
    }
    Ok(rs)
}

/// One product-coupled excess loss per replicate, `r(W_j, Z'_j)`, with the same
/// streams as [`run_replicates`] (so draw `j` equals `product_r_row(j)[0]` there).
/// Memory is `O(m)`; failed replicates are skipped.
pub fn product_excess_draws<P: LearningProblem>(
    problem: &P,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "sample size",
            needed: 2,
            got: n,
        });
    }
    let w_star = resolved_optimum(problem)?;
    let draws: Vec<Option<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let sample = problem.sample_z(n, &mut stream(seed, 2 * j as u64));
            let w = problem.run_algorithm(&sample).ok()?.hypothesis;
            let z = problem.sample_z(1, &mut stream(seed, 2 * j as u64 + 1));
            Some(problem.loss(&w, &z[0]) - problem.loss(w_star, &z[0]))
        })
        .collect();
    Ok(draws.into_iter().flatten().collect())
}

/// `(W_j, Z_{j,i})` pairs for a fixed sample index `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexPairs {
    pub w: Points,
    pub z: Points,
    /// Labels of `Z_{j,i}` for labelled problems.
    pub labels: Option<Vec<u32>>,
}

/// The `m` pairs `(W_j, Z_{j,i})`, distributed as `P_{W Z_i}`.
pub fn hypothesis_data_pairs(rs: &ReplicateSet, i: usize) -> Result<IndexPairs> {
    if i >= rs.n {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: rs.n,
        });
    }
    if rs.points.is_empty() && rs.m() > 0 {
        return Err(Error::Precondition(
            "replicate set was generated without stored points".into(),
        ));
    }
    let m = rs.m();
    let pd = rs.point_dim;
    let mut z = Vec::with_capacity(m * pd);
    let mut labels = rs.labelled.then(|| Vec::with_capacity(m));
    for j in 0..m {
        let at = j * rs.n + i;
        z.extend_from_slice(&rs.points[at * pd..(at + 1) * pd]);
        if let Some(l) = labels.as_mut() {
            l.push(rs.labels[at]);
        }
    }
    Ok(IndexPairs {
        w: Points::new(rs.hypotheses.clone(), rs.hyp_dim)?,
        z: Points::new(z, pd)?,
        labels,
    })
}

impl ReplicateSet {
    pub fn problem_id(&self) -> &str {
        &self.problem_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of retained replicates.
    pub fn m(&self) -> usize {
        self.replicate_ids.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hypothesis_dim(&self) -> usize {
        self.hyp_dim
    }

    pub fn point_dim(&self) -> usize {
        self.point_dim
    }

    pub fn is_labelled(&self) -> bool {
        self.labelled
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn replicate_ids(&self) -> &[usize] {
        &self.replicate_ids
    }

    /// Indices of replicates whose algorithm failed.
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    /// Retained replicates whose optimizer hit its step budget.
    pub fn nonconverged(&self) -> usize {
        self.nonconverged
    }

    pub fn hypothesis(&self, j: usize) -> &[f64] {
        &self.hypotheses[j * self.hyp_dim..(j + 1) * self.hyp_dim]
    }

    pub fn hypotheses(&self) -> &[f64] {
        &self.hypotheses
    }

    pub fn joint_r(&self) -> &[f64] {
        &self.joint_r
    }

    pub fn product_r(&self) -> &[f64] {
        &self.product_r
    }

    pub fn joint_loss(&self) -> &[f64] {
        &self.joint_loss
    }

    pub fn product_loss(&self) -> &[f64] {
        &self.product_loss
    }

    pub fn joint_r_row(&self, j: usize) -> &[f64] {
        &self.joint_r[j * self.n..(j + 1) * self.n]
    }

    pub fn product_r_row(&self, j: usize) -> &[f64] {
        &self.product_r[j * self.n..(j + 1) * self.n]
    }

    pub fn joint_loss_row(&self, j: usize) -> &[f64] {
        &self.joint_loss[j * self.n..(j + 1) * self.n]
    }

    pub fn product_loss_row(&self, j: usize) -> &[f64] {
        &self.product_loss[j * self.n..(j + 1) * self.n]
    }

    /// Column `i` of the in-sample excess-loss matrix.
    pub fn joint_r_column(&self, i: usize) -> Vec<f64> {
        (0..self.m())
            .map(|j| self.joint_r[j * self.n + i])
            .collect()
    }

    /// Subset of rows, in the given order.
    pub fn retain_rows(&self, rows: &[usize]) -> ReplicateSet {
        let (n, hd, pd) = (self.n, self.hyp_dim, self.point_dim);
        let pick = |v: &[f64], width: usize| -> Vec<f64> {
            rows.iter()
                .flat_map(|&j| v[j * width..(j + 1) * width].iter().copied())
                .collect()
        };
        ReplicateSet {
            problem_id: self.problem_id.clone(),
            n,
            seed: self.seed,
            hyp_dim: hd,
            point_dim: pd,
            labelled: self.labelled,
            w_star: self.w_star.clone(),
            replicate_ids: rows.iter().map(|&j| self.replicate_ids[j]).collect(),
            hypotheses: pick(&self.hypotheses, hd),
            points: if self.points.is_empty() {
                Vec::new()
            } else {
                pick(&self.points, n * pd)
            },
            labels: rows
                .iter()
                .flat_map(|&j| {
                    let r = if self.labels.is_empty() {
                        0..0
                    } else {
                        j * n..(j + 1) * n
                    };
                    self.labels[r].iter().copied()
                })
                .collect(),
            joint_r: pick(&self.joint_r, n),
            product_r: pick(&self.product_r, n),
            joint_loss: pick(&self.joint_loss, n),
            product_loss: pick(&self.product_loss, n),
            failed: self.failed.clone(),
            nonconverged: self.nonconverged,
        }
    }
}

const MAGIC: &[u8; 8] = b"IBREPSET";
const VERSION: u32 = 1;

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64s(w: &mut impl Write, v: &[f64]) -> std::io::Result<()> {
    put_u64(w, v.len() as u64)?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_len(r: &mut impl Read, limit: u64) -> Result<usize> {
    let len = get_u64(r)?;
    if len > limit {
        return Err(Error::Format(format!("array length {len} exceeds {limit}")));
    }
    Ok(len as usize)
}

fn get_f64s(r: &mut impl Read, limit: u64) -> Result<Vec<f64>> {
    let len = get_len(r, limit)?;
    let mut out = Vec::with_capacity(len);
    let mut b = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

fn get_u64s(r: &mut impl Read, limit: u64) -> Result<Vec<u64>> {
    let len = get_len(r, limit)?;
    (0..len).map(|_| get_u64(r)).collect()
}

impl ReplicateSet {
    /// Writes the versioned little-endian binary format.
    pub fn dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let id = self.problem_id.as_bytes();
        put_u64(w, id.len() as u64)?;
        w.write_all(id)?;
        for v in [
            self.n as u64,
            self.m() as u64,
            self.seed,
            self.hyp_dim as u64,
            self.point_dim as u64,
            u64::from(self.labelled),
            self.nonconverged as u64,
        ] {
            put_u64(w, v)?;
        }
        put_f64s(w, &self.w_star)?;
        for list in [&self.replicate_ids, &self.failed] {
            put_u64(w, list.len() as u64)?;
            for &v in list.iter() {
                put_u64(w, v as u64)?;
            }
        }
        put_u64(w, self.labels.len() as u64)?;
        for &l in &self.labels {
            put_u64(w, u64::from(l))?;
        }
        for v in [
            &self.hypotheses,
            &self.points,
            &self.joint_r,
            &self.product_r,
            &self.joint_loss,
            &self.product_loss,
        ] {
            put_f64s(w, v)?;
        }
        Ok(())
    }

    pub fn load(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a replicate-set dump".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported dump version {version}, expected {VERSION}"
            )));
        }
        let id_len = get_len(r, 1 << 16)?;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id)?;
        let problem_id = String::from_utf8(id).map_err(|e| Error::Format(e.to_string()))?;
        let n = get_u64(r)? as usize;
        let m = get_u64(r)? as usize;
        let seed = get_u64(r)?;
        let hyp_dim = get_u64(r)? as usize;
        let point_dim = get_u64(r)? as usize;
        let labelled = get_u64(r)? != 0;
        let nonconverged = get_u64(r)? as usize;
        let limit = 1u64 << 36;
        let w_star = get_f64s(r, 1 << 16)?;
        let replicate_ids: Vec<usize> = get_u64s(r, limit)?
            .into_iter()
            .map(|v| v as usize)
            .collect();
        let failed: Vec<usize> = get_u64s(r, limit)?
            .into_iter()
            .map(|v| v as usize)
            .collect();
        let labels = get_u64s(r, limit)?
            .into_iter()
            .map(|v| u32::try_from(v).map_err(|_| Error::Format("label out of range".into())))
            .collect::<Result<Vec<u32>>>()?;
        let hypotheses = get_f64s(r, limit)?;
        let points = get_f64s(r, limit)?;
        let joint_r = get_f64s(r, limit)?;
        let product_r = get_f64s(r, limit)?;
        let joint_loss = get_f64s(r, limit)?;
        let product_loss = get_f64s(r, limit)?;

        let shape_ok = replicate_ids.len() == m
            && w_star.len() == hyp_dim
            && hypotheses.len() == m * hyp_dim
            && (points.is_empty() || points.len() == m * n * point_dim)
            && (labels.is_empty() || (labelled && labels.len() == m * n))
            && [&joint_r, &product_r, &joint_loss, &product_loss]
                .iter()
                .all(|v| v.len() == m * n);
        if !shape_ok {
            return Err(Error::Format(
                "array shapes inconsistent with header".into(),
            ));
        }
        Ok(Self {
            problem_id,
            n,
            seed,
            hyp_dim,
            point_dim,
            labelled,
            w_star,
            replicate_ids,
            hypotheses,
            points,
            labels,
            joint_r,
            product_r,
            joint_loss,
            product_loss,
            failed,
            nonconverged,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.dump(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::load(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
