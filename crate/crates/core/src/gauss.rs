//! Labeled zero-mean Gaussian random vectors.
//!
//! Every matrix here is a classical covariance matrix (CCM) in the doubled
//! convention, `ccm = 2 · Cov`. Group mutual informations and Schur
//! complements are scale invariant, so only sampling and density evaluation
//! convert to the standard scale.
//!
//! Sampling uses ChaCha20 seeded with `seed_from_u64(seed)` and standard
//! normals from `rand_distr::StandardNormal`. Parallel users take substream
//! `k` of the same seed (`set_stream(k)`), see [`substream_rng`]; the
//! decomposition into substreams is fixed by the caller, never by the
//! thread count.

use std::collections::HashSet;
use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{GbiError, Result};

/// Relative symmetry tolerance for every stored matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Pivot threshold of the positive-definiteness test, relative to the
/// largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-12;
/// Negative information above this floor is treated as rounding noise.
pub const NEGATIVE_MI_FLOOR: f64 = -1e-10;

/// Maximum asymmetry relative to the largest entry (absolute for tiny matrices).
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(1.0);
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(GbiError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL || m.iter().any(|v| !v.is_finite()) {
        return Err(GbiError::NotSymmetric(asym));
    }
    Ok(())
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Lower Cholesky factor `L` with `L Lᵀ = m`.
///
/// Fails if any pivot drops below `PIVOT_TOL` times the largest diagonal
/// entry.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(GbiError::Dimension(
            "cholesky of a non-square matrix".into(),
        ));
    }
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
    let threshold = PIVOT_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > threshold) {
            return Err(GbiError::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    cholesky(m).is_ok()
}

/// Natural log-determinant of a positive definite matrix.
pub fn ln_det(m: &DMatrix<f64>) -> Result<f64> {
    let l = cholesky(m)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Solve `m · out = rhs` for positive definite `m`.
pub(crate) fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let l = cholesky(m)?;
    let n = l.nrows();
    let mut out = rhs.clone();
    for col in 0..out.ncols() {
        for i in 0..n {
            let mut s = out[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * out[(k, col)];
            }
            out[(i, col)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = out[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * out[(k, col)];
            }
            out[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(out)
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// A resolved subset of a vector's labels, order preserving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexGroup {
    names: Vec<String>,
    indices: Vec<usize>,
}

impl IndexGroup {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn ensure_disjoint(groups: &[&IndexGroup]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        for (name, idx) in g.names.iter().zip(&g.indices) {
            if !seen.insert(*idx) {
                return Err(GbiError::OverlappingGroups(name.clone()));
            }
        }
    }
    Ok(())
}

/// Conditional mutual information together with the clamping flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoValue {
    pub bits: f64,
    /// Set when a slightly negative value (above the numerical floor) was
    /// clamped to zero.
    pub clamped: bool,
}

fn clamp_information(raw: f64) -> Result<InfoValue> {
    if raw >= 0.0 {
        Ok(InfoValue {
            bits: raw,
            clamped: false,
        })
    } else if raw >= NEGATIVE_MI_FLOOR {
        Ok(InfoValue {
            bits: 0.0,
            clamped: true,
        })
    } else {
        Err(GbiError::NegativeInformation(raw))
    }
}

/// Zero-mean multivariate Gaussian with named components.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVector {
    labels: Vec<String>,
    ccm: DMatrix<f64>,
}

impl GaussianVector {
    /// Validates label uniqueness, symmetry and positive semidefiniteness.
    /// The stored matrix is exactly symmetrized.
    pub fn new<S: AsRef<str>>(labels: &[S], ccm: DMatrix<f64>) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_owned()).collect();
        if labels.len() != ccm.nrows() {
            return Err(GbiError::Dimension(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                ccm.nrows(),
                ccm.ncols()
            )));
        }
        check_symmetric(&ccm)?;
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(GbiError::DuplicateLabel(l.clone()));
            }
        }
        let ccm = symmetrize(&ccm);
        if !labels.is_empty() {
            let min_eig = ccm.clone().symmetric_eigenvalues().min();
            let scale = ccm.amax().max(1.0);
            if min_eig < -PIVOT_TOL * scale {
                return Err(GbiError::NotPositiveSemidefinite(min_eig));
            }
        }
        Ok(Self { labels, ccm })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ccm(&self) -> &DMatrix<f64> {
        &self.ccm
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Standard-scale covariance, `ccm / 2`.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.ccm * 0.5
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GbiError::UnknownLabel(label.to_owned()))
    }

    /// CCM entry addressed by labels.
    pub fn entry(&self, row: &str, col: &str) -> Result<f64> {
        Ok(self.ccm[(self.index_of(row)?, self.index_of(col)?)])
    }

    /// Resolve a nonempty list of labels.
    pub fn group<S: AsRef<str>>(&self, names: &[S]) -> Result<IndexGroup> {
        if names.is_empty() {
            return Err(GbiError::EmptyGroup);
        }
        self.group_or_empty(names)
    }

    fn group_or_empty<S: AsRef<str>>(&self, names: &[S]) -> Result<IndexGroup> {
        let mut out = IndexGroup {
            names: Vec::new(),
            indices: Vec::new(),
        };
        for n in names {
            let n = n.as_ref();
            let idx = self.index_of(n)?;
            if out.indices.contains(&idx) {
                return Err(GbiError::DuplicateLabel(n.to_owned()));
            }
            out.names.push(n.to_owned());
            out.indices.push(idx);
        }
        Ok(out)
    }

    fn block(&self, g: &IndexGroup) -> DMatrix<f64> {
        submatrix(&self.ccm, &g.indices, &g.indices)
    }

    /// Principal submatrix on `keep`, in the order given.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<GaussianVector> {
        let g = self.group(keep)?;
        Ok(GaussianVector {
            labels: g.names.clone(),
            ccm: self.block(&g),
        })
    }

    /// Drop the named variables, keeping the rest in their original order.
    pub fn discard<S: AsRef<str>>(&self, drop: &[S]) -> Result<GaussianVector> {
        let d = self.group_or_empty(drop)?;
        let keep: Vec<&str> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !d.indices.contains(i))
            .map(|(_, l)| l.as_str())
            .collect();
        self.marginalize(&keep)
    }

    /// Gaussian of the remaining variables given the ones in `on`.
    ///
    /// The conditional covariance of a Gaussian does not depend on the
    /// conditioning values, so only the Schur complement is returned.
    pub fn condition<S: AsRef<str>>(&self, on: &[S]) -> Result<GaussianVector> {
        let w = self.group(on)?;
        let rest: Vec<usize> = (0..self.dim()).filter(|i| !w.indices.contains(i)).collect();
        let s_ww = self.block(&w);
        let s_kw = submatrix(&self.ccm, &rest, &w.indices);
        let s_kk = submatrix(&self.ccm, &rest, &rest);
        let solved = spd_solve(&s_ww, &s_kw.transpose())?;
        let schur = symmetrize(&(s_kk - &s_kw * solved));
        Ok(GaussianVector {
            labels: rest.iter().map(|&i| self.labels[i].clone()).collect(),
            ccm: schur,
        })
    }

    /// Image under `t` (m×n), relabelled with `new_labels`.
    pub fn linear_transform<S: AsRef<str>>(
        &self,
        t: &DMatrix<f64>,
        new_labels: &[S],
    ) -> Result<GaussianVector> {
        if t.ncols() != self.dim() || t.nrows() != new_labels.len() {
            return Err(GbiError::Dimension(format!(
                "transform is {}x{}, vector has {} components and {} new labels",
                t.nrows(),
                t.ncols(),
                self.dim(),
                new_labels.len()
            )));
        }
        let ccm = symmetrize(&(t * &self.ccm * t.transpose()));
        GaussianVector::new(new_labels, ccm)
    }

    /// Group mutual information `I(U;V)` in bits.
    pub fn mutual_information<S: AsRef<str>, T: AsRef<str>>(
        &self,
        u: &[S],
        v: &[T],
    ) -> Result<f64> {
        let u = self.group(u)?;
        let v = self.group(v)?;
        ensure_disjoint(&[&u, &v])?;
        Ok(clamp_information(self.raw_mi(&u, &v)?)?.bits)
    }

    fn raw_mi(&self, u: &IndexGroup, v: &IndexGroup) -> Result<f64> {
        let mut uv = u.clone();
        uv.indices.extend_from_slice(&v.indices);
        uv.names.extend_from_slice(&v.names);
        let nats =
            0.5 * (ln_det(&self.block(u))? + ln_det(&self.block(v))? - ln_det(&self.block(&uv))?);
        Ok(nats / LN_2)
    }

    /// `I(U;V|W)` in bits; an empty `w` falls back to the unconditional path.
    pub fn conditional_mi<S, T, W>(&self, u: &[S], v: &[T], w: &[W]) -> Result<f64>
    where
        S: AsRef<str>,
        T: AsRef<str>,
        W: AsRef<str>,
    {
        Ok(self.conditional_mi_flagged(u, v, w)?.bits)
    }

    /// As [`conditional_mi`](Self::conditional_mi), reporting whether the
    /// value was clamped.
    pub fn conditional_mi_flagged<S, T, W>(&self, u: &[S], v: &[T], w: &[W]) -> Result<InfoValue>
    where
        S: AsRef<str>,
        T: AsRef<str>,
        W: AsRef<str>,
    {
        let ug = self.group(u)?;
        let vg = self.group(v)?;
        let wg = self.group_or_empty(w)?;
        ensure_disjoint(&[&ug, &vg, &wg])?;
        if wg.is_empty() {
            return clamp_information(self.raw_mi(&ug, &vg)?);
        }
        let cond = self.condition(w)?;
        let ug = cond.group(u)?;
        let vg = cond.group(v)?;
        clamp_information(cond.raw_mi(&ug, &vg)?)
    }

    /// Log-density at `point`, using the full normalizer
    /// `π^{-n/2} det(X)^{-1/2}`.
    pub fn ln_density(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim() {
            return Err(GbiError::Dimension("point has wrong length".into()));
        }
        let eta = DMatrix::from_column_slice(point.len(), 1, point);
        let quad = (eta.transpose() * spd_solve(&self.ccm, &eta)?)[(0, 0)];
        Ok(-quad - 0.5 * self.dim() as f64 * PI.ln() - 0.5 * ln_det(&self.ccm)?)
    }

    /// A reusable sampler drawing from `N(0, ccm / 2)`.
    pub fn sampler(&self) -> Result<GaussianSampler> {
        GaussianSampler::new(&self.ccm)
    }

    /// `n` draws (rows) from `N(0, ccm / 2)` using substream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<DMatrix<f64>> {
        if n == 0 {
            return Err(GbiError::Domain("sample count must be at least 1".into()));
        }
        let sampler = self.sampler()?;
        let mut rng = substream_rng(seed, 0);
        let d = self.dim();
        let mut out = DMatrix::zeros(n, d);
        let mut row = vec![0.0; d];
        for i in 0..n {
            sampler.draw_into(&mut rng, &mut row);
            for j in 0..d {
                out[(i, j)] = row[j];
            }
        }
        Ok(out)
    }
}

/// RNG for substream `stream` of `seed`.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Cholesky factor of the standard-scale covariance, ready for sampling.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dim: usize,
    // row-major lower triangle
    factor: Vec<f64>,
}

impl GaussianSampler {
    pub fn new(ccm: &DMatrix<f64>) -> Result<Self> {
        check_symmetric(ccm)?;
        let l = cholesky(&(ccm * 0.5))?;
        let dim = l.nrows();
        let mut factor = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                factor[i * dim + j] = l[(i, j)];
            }
        }
        Ok(Self { dim, factor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fill `out` (length `dim`) with one draw.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        let mut z = [0.0_f64; 16];
        let mut z_heap;
        let z: &mut [f64] = if d <= 16 {
            &mut z[..d]
        } else {
            z_heap = vec![0.0; d];
            &mut z_heap
        };
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let row = &self.factor[i * d..i * d + i + 1];
            out[i] = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let mut out = vec![0.0; self.dim];
        self.draw_into(rng, &mut out);
        DVector::from_vec(out)
    }
}

/// `2 · (1/n) Σ sᵢ sᵢᵀ`, the CCM estimate about a known zero mean.
pub fn empirical_ccm(samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = samples.nrows();
    if n < 2 {
        return Err(GbiError::Domain(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let gram = samples.transpose() * samples;
    Ok(symmetrize(&(gram * (2.0 / n as f64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{purification_x_matrix, tmsv_omega};
    use crate::PI_LABELS;
    use proptest::prelude::*;

    fn pi(r: f64) -> GaussianVector {
        GaussianVector::new(&PI_LABELS, purification_x_matrix(r).unwrap()).unwrap()
    }

    fn random_pd(n: usize, entries: &[f64]) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |i, j| entries[(i * n + j) % entries.len()]);
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            GaussianVector::new(&["a", "b"], m),
            Err(GbiError::NotSymmetric(_))
        ));
        let m = DMatrix::identity(2, 2);
        assert!(matches!(
            GaussianVector::new(&["a", "a"], m.clone()),
            Err(GbiError::DuplicateLabel(_))
        ));
        assert!(matches!(
            GaussianVector::new(&["a"], m),
            Err(GbiError::Dimension(_))
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianVector::new(&["a", "b"], m),
            Err(GbiError::NotPositiveSemidefinite(_))
        ));
    }

    #[test]
    fn marginal_is_principal_submatrix() {
        let g = pi(0.5);
        let abc = g.marginalize(&["A", "B", "C"]).unwrap();
        assert_eq!(abc.ccm(), &g.ccm().view((0, 0), (3, 3)).clone_owned());
        let a = g.marginalize(&["A"]).unwrap();
        let expected = 1f64.cosh() + 1f64.exp_m1() / 2.0;
        assert!((a.ccm()[(0, 0)] - expected).abs() < 1e-14);
        assert!((expected - 2.40222).abs() < 1e-5);
        assert_eq!(g.marginalize(&PI_LABELS).unwrap(), g);
        let swapped = g.marginalize(&["C", "A"]).unwrap();
        assert_eq!(swapped.entry("C", "A").unwrap(), g.entry("A", "C").unwrap());
        assert_eq!(swapped.labels(), &["C", "A"]);
        assert!(matches!(
            g.marginalize(&["Z"]),
            Err(GbiError::UnknownLabel(_))
        ));
    }

    #[test]
    fn conditioning_on_e1_decouples_b() {
        for k in 1..=40 {
            let r = 0.05 * k as f64;
            let c = pi(r).condition(&["E1"]).unwrap();
            assert!(c.entry("B", "A").unwrap().abs() < 1e-10, "r = {r}");
            assert!(c.entry("B", "C").unwrap().abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn conditioning_on_e2_decouples_c() {
        let c = pi(0.5).condition(&["E2"]).unwrap();
        assert!(c.entry("C", "A").unwrap().abs() < 1e-10);
        assert!(c.entry("C", "B").unwrap().abs() < 1e-10);
        assert_eq!(c.labels(), &["A", "B", "C", "E1"]);
    }

    #[test]
    fn conditioning_on_independent_block() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = 2.0;
        m[(0, 1)] = 0.7;
        m[(1, 0)] = 0.7;
        m[(1, 1)] = 1.5;
        m[(2, 2)] = 3.0;
        let g = GaussianVector::new(&["u", "v", "w"], m.clone()).unwrap();
        let c = g.condition(&["w"]).unwrap();
        assert_eq!(c.ccm(), &m.view((0, 0), (2, 2)).clone_owned());
    }

    #[test]
    fn singular_conditioning_block() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let g = GaussianVector::new(&["u", "v", "w"], m).unwrap();
        assert!(matches!(
            g.condition(&["u", "v"]),
            Err(GbiError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn transform_examples() {
        let g = pi(0.5);
        let same = g
            .linear_transform(&DMatrix::identity(5, 5), &PI_LABELS)
            .unwrap();
        assert_eq!(same.ccm(), g.ccm());

        let r = 0.5_f64;
        let m = (2.0 * r).cosh();
        let w = GaussianVector::new(&["A", "B"], tmsv_omega(m).unwrap()).unwrap();
        let diff = w
            .linear_transform(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), &["d"])
            .unwrap();
        let analytic = 2.0 * (m - (m * m - 1.0).sqrt());
        assert!((diff.ccm()[(0, 0)] - analytic).abs() < 1e-12);
        assert!((analytic - 2.0 * (-2.0 * r).exp()).abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bc = g.marginalize(&["B", "C"]).unwrap();
        let rot = bc
            .linear_transform(&DMatrix::from_row_slice(2, 2, &[s, s, s, -s]), &["p", "q"])
            .unwrap();
        assert!((rot.ccm().determinant() - bc.ccm().determinant()).abs() < 1e-12);

        assert!(matches!(
            g.linear_transform(&DMatrix::identity(2, 3), &["p", "q"]),
            Err(GbiError::Dimension(_))
        ));
    }

    #[test]
    fn tmsv_information() {
        let m = 1f64.cosh();
        let w = GaussianVector::new(&["A", "B"], tmsv_omega(m).unwrap()).unwrap();
        let i = w.mutual_information(&["A"], &["B"]).unwrap();
        assert!((i - m.log2()).abs() < 1e-12);
        assert!((i - 0.62581).abs() < 1e-5);
    }

    #[test]
    fn information_of_independent_blocks() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let g = GaussianVector::new(&["u", "v", "w"], m).unwrap();
        assert_eq!(g.mutual_information(&["u"], &["v", "w"]).unwrap(), 0.0);
    }

    #[test]
    fn information_matches_determinant_oracle() {
        let g = pi(0.5);
        let x = g.ccm();
        // direct LU determinants, independent of the Cholesky path
        let det = |idx: &[usize]| submatrix(x, idx, idx).determinant();
        let oracle = 0.5 * (det(&[0]) * det(&[1, 2]) / det(&[0, 1, 2])).log2();
        let i = g.mutual_information(&["A"], &["B", "C"]).unwrap();
        assert!((i - oracle).abs() < 1e-12);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let g = pi(0.5);
        assert!(matches!(
            g.mutual_information(&["A", "B"], &["B"]),
            Err(GbiError::OverlappingGroups(_))
        ));
        assert!(matches!(
            g.conditional_mi(&["A"], &["B"], &["A"]),
            Err(GbiError::OverlappingGroups(_))
        ));
        assert!(matches!(
            g.mutual_information::<&str, &str>(&[], &["B"]),
            Err(GbiError::EmptyGroup)
        ));
    }

    #[test]
    fn conditional_zeros() {
        for k in 1..=40 {
            let g = pi(0.05 * k as f64);
            let b = g
                .conditional_mi_flagged(&["B"], &["A", "C"], &["E1"])
                .unwrap();
            let c = g
                .conditional_mi_flagged(&["C"], &["A", "B"], &["E2"])
                .unwrap();
            assert!(b.bits <= 1e-10 && c.bits <= 1e-10);
        }
    }

    #[test]
    fn conditioning_on_independent_variable_is_noop() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.9, 0.0, 0.9, 1.0, 0.0, 0.0, 0.0, 4.0]);
        let g = GaussianVector::new(&["u", "v", "w"], m).unwrap();
        let a = g.mutual_information(&["u"], &["v"]).unwrap();
        let b = g.conditional_mi(&["u"], &["v"], &["w"]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn clamping() {
        assert_eq!(
            clamp_information(-1e-12).unwrap(),
            InfoValue {
                bits: 0.0,
                clamped: true
            }
        );
        assert!(!clamp_information(0.3).unwrap().clamped);
        assert!(matches!(
            clamp_information(-1e-6),
            Err(GbiError::NegativeInformation(_))
        ));
    }

    #[test]
    fn density_is_normalized() {
        // 2-d midpoint quadrature over a box of ±8 standard deviations
        let g = GaussianVector::new(
            &["u", "v"],
            DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]),
        )
        .unwrap();
        let h = 0.02;
        let mut total = 0.0;
        let mut x = -8.0 + h / 2.0;
        while x < 8.0 {
            let mut y = -8.0 + h / 2.0;
            while y < 8.0 {
                total += g.ln_density(&[x, y]).unwrap().exp() * h * h;
                y += h;
            }
            x += h;
        }
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = pi(0.5);
        let a = g.sample(1000, 7).unwrap();
        let b = g.sample(1000, 7).unwrap();
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = g.sample(1000, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_variance_unit() {
        let g = GaussianVector::new(&["z"], DMatrix::from_element(1, 1, 2.0)).unwrap();
        let s = g.sample(1_000_000, 11).unwrap();
        let var = s.iter().map(|v| v * v).sum::<f64>() / s.nrows() as f64;
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn sample_tmsv_correlation() {
        let m = 1f64.cosh();
        let g = GaussianVector::new(&["A", "B"], tmsv_omega(m).unwrap()).unwrap();
        let s = g.sample(1_000_000, 3).unwrap();
        let c = empirical_ccm(&s).unwrap();
        let rho = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        let expected = (m * m - 1.0).sqrt() / m;
        assert!((expected - 0.76159).abs() < 1e-5);
        assert!((rho - expected).abs() < 0.005, "{rho}");
    }

    #[test]
    fn empirical_matches_analytic_within_five_se() {
        let g = pi(0.5);
        let n = 1_000_000;
        let emp = empirical_ccm(&g.sample(n, 2024).unwrap()).unwrap();
        let x = g.ccm();
        for i in 0..5 {
            for j in 0..5 {
                let se = ((x[(i, i)] * x[(j, j)] + x[(i, j)].powi(2)) / n as f64).sqrt();
                assert!((emp[(i, j)] - x[(i, j)]).abs() <= 5.0 * se, "({i},{j})");
            }
        }
    }

    #[test]
    fn empirical_of_repeated_row() {
        let row = [0.3, -1.2, 2.0];
        let s = DMatrix::from_fn(4, 3, |_, j| row[j]);
        let c = empirical_ccm(&s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((c[(i, j)] - 2.0 * row[i] * row[j]).abs() < 1e-14);
            }
        }
        assert!(empirical_ccm(&DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn non_pd_sampling_fails() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let g = GaussianVector::new(&["u", "v"], m).unwrap();
        assert!(matches!(
            g.sample(10, 1),
            Err(GbiError::NotPositiveDefinite { .. })
        ));
    }

    proptest! {
        #[test]
        fn operations_preserve_symmetry(entries in prop::collection::vec(-2.0f64..2.0, 25)) {
            let m = random_pd(5, &entries);
            let g = GaussianVector::new(&PI_LABELS, m).unwrap();
            let c = g.condition(&["E1", "B"]).unwrap();
            prop_assert!(asymmetry(c.ccm()) <= SYMMETRY_TOL);
            let t = DMatrix::from_fn(3, 5, |i, j| entries[(7 * i + j) % 25]);
            let h = g.linear_transform(&t, &["p", "q", "s"]);
            if let Ok(h) = h {
                prop_assert!(asymmetry(h.ccm()) <= SYMMETRY_TOL);
            }
        }

        #[test]
        fn discarding_never_increases_information(entries in prop::collection::vec(-2.0f64..2.0, 25)) {
            let g = GaussianVector::new(&PI_LABELS, random_pd(5, &entries)).unwrap();
            let big = g.mutual_information(&["A"], &["B", "C"]).unwrap();
            let small = g.mutual_information(&["A"], &["B"]).unwrap();
            prop_assert!(big >= small - 1e-10);
        }

        #[test]
        fn empty_conditioning_matches_unconditional(entries in prop::collection::vec(-2.0f64..2.0, 25)) {
            let g = GaussianVector::new(&PI_LABELS, random_pd(5, &entries)).unwrap();
            let a = g.mutual_information(&["A", "E2"], &["C"]).unwrap();
            let b = g.conditional_mi::<_, _, &str>(&["A", "E2"], &["C"], &[]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn marginal_commutes_with_transform(
            entries in prop::collection::vec(-2.0f64..2.0, 25),
            t in prop::collection::vec(-1.0f64..1.0, 15),
        ) {
            let g = GaussianVector::new(&PI_LABELS, random_pd(5, &entries)).unwrap();
            let t = DMatrix::from_row_slice(3, 5, &t);
            let full = g.linear_transform(&t, &["p", "q", "s"]).unwrap().marginalize(&["p", "s"]).unwrap();
            let rows = DMatrix::from_fn(2, 5, |i, j| t[([0, 2][i], j)]);
            let direct = g.linear_transform(&rows, &["p", "s"]).unwrap();
            let scale = full.ccm().amax().max(1.0);
            prop_assert!((full.ccm() - direct.ccm()).amax() <= 1e-12 * scale);
        }

        #[test]
        fn empirical_is_symmetric_psd(rows in prop::collection::vec(-3.0f64..3.0, 12)) {
            let s = DMatrix::from_row_slice(4, 3, &rows);
            let c = empirical_ccm(&s).unwrap();
            prop_assert_eq!(asymmetry(&c), 0.0);
            prop_assert!(c.symmetric_eigenvalues().min() >= -1e-12);
        }
    }
}
