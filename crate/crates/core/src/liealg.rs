//! Exact matrix models of `g = n̄ ⊕ l ⊕ n`.
//!
//! Two real split families are modelled:
//!
//! * `O(2n,2n)`, as `4n × 4n` matrices `[[A, B], [C, −Aᵀ]]` with `B`, `C`
//!   skew. `l ≅ gl(2n)` is the block diagonal, `n̄` the upper-right block and
//!   `n` the lower-left block.
//! * `GL(2n,R)`, as `2n × 2n` matrices with `l = gl(n) ⊕ gl(n)` the diagonal
//!   blocks, `n` upper-right and `n̄` lower-left.
//!
//! Elements are coordinate vectors in a fixed basis of sparse matrices. Each
//! basis matrix has a *pivot* entry equal to 1 where every other basis matrix
//! vanishes, so coordinates of a matrix are read off the pivots and then
//! confirmed by reconstruction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::catalog::{Family, GroupClass};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::rational::{format_q, q, qr, to_f64, Q};
use crate::report::{CheckOutcome, ExactTally, VerificationReport};

pub type Element = Vec<Q>;

pub const MIN_RANK: usize = 2;
pub const MAX_RANK: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub entries: Vec<(usize, usize, Q)>,
}

impl SparseMatrix {
    fn from_map(map: BTreeMap<(usize, usize), Q>) -> Self {
        SparseMatrix {
            entries: map
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((i, j), v)| (i, j, v))
                .collect(),
        }
    }

    fn get(&self, i: usize, j: usize) -> Q {
        self.entries
            .iter()
            .find(|(a, b, _)| *a == i && *b == j)
            .map(|(_, _, v)| v.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn to_dense(&self, size: usize) -> Matrix {
        let mut m = linalg::zero_matrix(size, size);
        for (i, j, v) in &self.entries {
            m[*i][*j] += v;
        }
        m
    }
}

fn sparse_product(a: &SparseMatrix, b: &SparseMatrix) -> BTreeMap<(usize, usize), Q> {
    let mut out = BTreeMap::new();
    for (i, k, x) in &a.entries {
        for (k2, j, y) in &b.entries {
            if k == k2 {
                *out.entry((*i, *j)).or_insert_with(Q::zero) += x * y;
            }
        }
    }
    out
}

/// An `sl₂` triple `[h,x] = 2x`, `[h,y] = −2y`, `[x,y] = h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Triple {
    pub x: Element,
    pub y: Element,
    pub h: Element,
}

#[derive(Clone, Debug)]
pub struct GradedModel {
    family: Family,
    n: usize,
    size: usize,
    basis: Vec<SparseMatrix>,
    grades: Vec<i8>,
    pivots: Vec<(usize, usize)>,
    theta_images: Vec<Vec<(usize, Q)>>,
    form_scale: Q,
    /// `tr(B_a B_b)`, sparse by rows.
    trace_form: Vec<Vec<(usize, Q)>>,
    /// `[B_a, B_b]` in coordinates, at index `a * dim + b`.
    structure: Vec<Vec<(usize, Q)>>,
    triples: Vec<Sl2Triple>,
    nu: Vector,
    center: Vec<Element>,
    nbar: Range<usize>,
    l: Range<usize>,
    n_pos: Range<usize>,
}

/// Builds the model of the given family at Jordan rank `n`.
pub fn build_model(family: Family, n: usize) -> Result<GradedModel> {
    if !family.has_matrix_model() {
        return Err(Error::UnsupportedFamily {
            family: family.tag().into(),
        });
    }
    if !(MIN_RANK..=MAX_RANK).contains(&n) {
        return Err(Error::RankOutOfRange {
            n,
            min: MIN_RANK,
            max: MAX_RANK,
        });
    }
    let (size, basis, grades, pivots) = match family {
        Family::OSplit => orthogonal_basis(n),
        _ => general_linear_basis(n),
    };
    let dim = basis.len();
    let nbar = 0..grades.iter().filter(|&&g| g == -1).count();
    let l = nbar.end..nbar.end + grades.iter().filter(|&&g| g == 0).count();
    let n_pos = l.end..dim;

    let mut model = GradedModel {
        family,
        n,
        size,
        basis,
        grades,
        pivots,
        theta_images: Vec::new(),
        form_scale: Q::one(),
        trace_form: Vec::new(),
        structure: Vec::new(),
        triples: Vec::new(),
        nu: Vec::new(),
        center: Vec::new(),
        nbar,
        l,
        n_pos,
    };

    let mut structure = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut comm = sparse_product(&model.basis[a], &model.basis[b]);
            for (key, v) in sparse_product(&model.basis[b], &model.basis[a]) {
                *comm.entry(key).or_insert_with(Q::zero) -= v;
            }
            let coords = model.coords_of_sparse(&SparseMatrix::from_map(comm))?;
            structure.push(sparse_vec(&coords));
        }
    }
    model.structure = structure;

    let mut theta_images = Vec::with_capacity(dim);
    for b in &model.basis {
        let t = SparseMatrix {
            entries: b.entries.iter().map(|(i, j, v)| (*j, *i, -v.clone())).collect(),
        };
        theta_images.push(sparse_vec(&model.coords_of_sparse(&t)?));
    }
    model.theta_images = theta_images;

    model.trace_form = (0..dim)
        .map(|a| {
            let row: Vec<Q> = (0..dim)
                .map(|b| {
                    sparse_product(&model.basis[a], &model.basis[b])
                        .into_iter()
                        .filter(|((i, j), _)| i == j)
                        .fold(Q::zero(), |s, (_, v)| s + v)
                })
                .collect();
            sparse_vec(&row)
        })
        .collect();

    let ys: Vec<Element> = (0..n).map(|j| model.distinguished_y(j)).collect();
    let mut triples = Vec::with_capacity(n);
    for y in ys {
        let x = linalg::scale(&q(-1), &model.theta(&y));
        let h = model.bracket(&x, &y);
        triples.push(Sl2Triple { x, y, h });
    }
    let t = model.trace_pair(&triples[0].x, &triples[0].y);
    if t.is_zero() {
        return Err(Error::Invariant("tr(x1 y1) vanishes".into()));
    }
    model.form_scale = t.recip();
    model.triples = triples;
    model.center = model.compute_center();
    model.nu = model.compute_nu()?;
    Ok(model)
}

fn sparse_vec(v: &[Q]) -> Vec<(usize, Q)> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

type BasisData = (usize, Vec<SparseMatrix>, Vec<i8>, Vec<(usize, usize)>);

fn orthogonal_basis(n: usize) -> BasisData {
    let m = 2 * n;
    let mut basis = Vec::new();
    let mut grades = Vec::new();
    let mut pivots = Vec::new();
    // n̄: upper-right skew block E_ji − E_ij.
    for i in 0..m {
        for j in i + 1..m {
            basis.push(SparseMatrix {
                entries: vec![(j, m + i, q(1)), (i, m + j, q(-1))],
            });
            grades.push(-1);
            pivots.push((j, m + i));
        }
    }
    // l: diag(E_ij, −E_ji).
    for i in 0..m {
        for j in 0..m {
            basis.push(SparseMatrix {
                entries: vec![(i, j, q(1)), (m + j, m + i, q(-1))],
            });
            grades.push(0);
            pivots.push((i, j));
        }
    }
    // n: lower-left skew block, the transpose of the n̄ basis.
    for i in 0..m {
        for j in i + 1..m {
            basis.push(SparseMatrix {
                entries: vec![(m + i, j, q(1)), (m + j, i, q(-1))],
            });
            grades.push(1);
            pivots.push((m + i, j));
        }
    }
    (2 * m, basis, grades, pivots)
}

fn general_linear_basis(n: usize) -> BasisData {
    let mut basis = Vec::new();
    let mut grades = Vec::new();
    let mut pivots = Vec::new();
    let mut push = |i: usize, j: usize, g: i8| {
        basis.push(SparseMatrix {
            entries: vec![(i, j, q(1))],
        });
        grades.push(g);
        pivots.push((i, j));
    };
    for i in n..2 * n {
        for j in 0..n {
            push(i, j, -1);
        }
    }
    for i in 0..2 * n {
        for j in 0..2 * n {
            if (i < n) == (j < n) {
                push(i, j, 0);
            }
        }
    }
    for i in 0..n {
        for j in n..2 * n {
            push(i, j, 1);
        }
    }
    (2 * n, basis, grades, pivots)
}

impl GradedModel {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> GroupClass {
        GroupClass::new(self.family, self.n as u32).expect("model families are table rows")
    }

    pub fn d(&self) -> u32 {
        self.class().d
    }

    pub fn e(&self) -> u32 {
        self.class().e
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::OSplit => format!("O_{m},{m}", m = 2 * self.n),
            _ => format!("GL_{}(R)", 2 * self.n),
        }
    }

    /// Matrix size.
    pub fn dim_ambient(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseMatrix] {
        &self.basis
    }

    pub fn grades(&self) -> &[i8] {
        &self.grades
    }

    pub fn pivots(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    pub fn nbar_range(&self) -> Range<usize> {
        self.nbar.clone()
    }

    pub fn l_range(&self) -> Range<usize> {
        self.l.clone()
    }

    pub fn n_range(&self) -> Range<usize> {
        self.n_pos.clone()
    }

    pub fn range_of_grade(&self, g: i8) -> Range<usize> {
        match g {
            -1 => self.nbar_range(),
            0 => self.l_range(),
            _ => self.n_range(),
        }
    }

    pub fn form_scale(&self) -> &Q {
        &self.form_scale
    }

    pub fn triples(&self) -> &[Sl2Triple] {
        &self.triples
    }

    pub fn x(&self, j: usize) -> &Element {
        &self.triples[j].x
    }

    pub fn y(&self, j: usize) -> &Element {
        &self.triples[j].y
    }

    pub fn h(&self, j: usize) -> &Element {
        &self.triples[j].h
    }

    /// `h = h_1 + … + h_n`, the grading element.
    pub fn h_total(&self) -> Element {
        let mut s = self.zero();
        for t in &self.triples {
            linalg::axpy(&mut s, &Q::one(), &t.h);
        }
        s
    }

    pub fn zero(&self) -> Element {
        linalg::zeros(self.dim())
    }

    pub fn basis_vector(&self, a: usize) -> Element {
        let mut v = self.zero();
        v[a] = Q::one();
        v
    }

    pub fn center(&self) -> &[Element] {
        &self.center
    }

    fn distinguished_y(&self, j: usize) -> Element {
        match self.family {
            Family::OSplit => {
                // The skew pair at rows 2j, 2j+1 of the upper-right block.
                let m = 2 * self.n;
                let (a, b) = (2 * j, 2 * j + 1);
                let idx = (0..self.nbar.end)
                    .find(|&k| self.pivots[k] == (b, m + a))
                    .expect("basis contains every skew pair");
                self.basis_vector(idx)
            }
            _ => {
                let idx = (0..self.nbar.end)
                    .find(|&k| self.pivots[k] == (self.n + j, j))
                    .expect("basis contains every lower-left unit");
                self.basis_vector(idx)
            }
        }
    }

    fn coords_of_sparse(&self, m: &SparseMatrix) -> Result<Element> {
        let coords: Element = self.pivots.iter().map(|&(i, j)| m.get(i, j)).collect();
        let mut rebuilt: BTreeMap<(usize, usize), Q> = BTreeMap::new();
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (i, j, v) in &b.entries {
                *rebuilt.entry((*i, *j)).or_insert_with(Q::zero) += c * v;
            }
        }
        let rebuilt = SparseMatrix::from_map(rebuilt);
        let original = SparseMatrix::from_map(
            m.entries
                .iter()
                .fold(BTreeMap::new(), |mut acc, (i, j, v)| {
                    *acc.entry((*i, *j)).or_insert_with(Q::zero) += v;
                    acc
                }),
        );
        if rebuilt != original {
            return Err(Error::NotInSpan);
        }
        Ok(coords)
    }

    /// Coordinates of a dense matrix in the model basis.
    pub fn from_matrix(&self, m: &[Vec<Q>]) -> Result<Element> {
        if m.len() != self.size || m.iter().any(|r| r.len() != self.size) {
            return Err(Error::NotInSpan);
        }
        let mut entries = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    entries.push((i, j, v.clone()));
                }
            }
        }
        self.coords_of_sparse(&SparseMatrix { entries })
    }

    pub fn to_matrix(&self, x: &[Q]) -> Matrix {
        let mut m = linalg::zero_matrix(self.size, self.size);
        for (c, b) in x.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (i, j, v) in &b.entries {
                m[*i][*j] += c * v;
            }
        }
        m
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Element {
        let dim = self.dim();
        let mut out = self.zero();
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let c = xa * yb;
                for (k, v) in &self.structure[a * dim + b] {
                    out[*k] += &c * v;
                }
            }
        }
        out
    }

    /// The commutator of two matrices, expressed in the basis.
    pub fn bracket_matrices(&self, x: &[Vec<Q>], y: &[Vec<Q>]) -> Result<Element> {
        let xy = linalg::mat_mul(x, y);
        let yx = linalg::mat_mul(y, x);
        let c: Matrix = xy
            .iter()
            .zip(&yx)
            .map(|(a, b)| linalg::sub(a, b))
            .collect();
        self.from_matrix(&c)
    }

    /// `θ(X) = −Xᵀ`.
    pub fn theta(&self, x: &[Q]) -> Element {
        let mut out = self.zero();
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (k, v) in &self.theta_images[a] {
                out[*k] += xa * v;
            }
        }
        out
    }

    fn trace_pair(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, t) in &self.trace_form[a] {
                if !y[*b].is_zero() {
                    s += xa * &y[*b] * t;
                }
            }
        }
        s
    }

    /// `⟨X, Y⟩ = λ·tr(XY)` with `λ` fixed by `⟨x₁, y₁⟩ = 1`.
    pub fn pair(&self, x: &[Q], y: &[Q]) -> Q {
        &self.form_scale * self.trace_pair(x, y)
    }

    /// Gram matrix of `⟨·,·⟩` on the whole basis.
    pub fn pair_matrix(&self) -> Matrix {
        let dim = self.dim();
        let mut g = linalg::zero_matrix(dim, dim);
        for (a, row) in self.trace_form.iter().enumerate() {
            for (b, t) in row {
                g[a][*b] = &self.form_scale * t;
            }
        }
        g
    }

    pub fn grade_of(&self, x: &[Q]) -> Option<i8> {
        let mut g = None;
        for (a, v) in x.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match g {
                None => g = Some(self.grades[a]),
                Some(h) if h != self.grades[a] => return None,
                _ => {}
            }
        }
        g
    }

    /// Fails unless `x` has components only in grade `g` (zero is allowed).
    pub fn require_grade(&self, x: &[Q], g: i8) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::NotInSpan);
        }
        let r = self.range_of_grade(g);
        if x
            .iter()
            .enumerate()
            .any(|(a, v)| !v.is_zero() && !r.contains(&a))
        {
            return Err(Error::WrongGrade { expected: g });
        }
        Ok(())
    }

    /// `−⟨y, θy⟩ = |y|²`.
    pub fn norm_sq_nbar(&self, y: &[Q]) -> Result<Q> {
        self.require_grade(y, -1)?;
        let r = -self.pair(y, &self.theta(y));
        if r.is_negative() || (r.is_zero() && !linalg::is_zero(y)) {
            return Err(Error::Invariant(format!(
                "-<y, theta y> = {} is not positive",
                format_q(&r)
            )));
        }
        Ok(r)
    }

    pub fn norm_nbar(&self, y: &[Q]) -> Result<f64> {
        Ok(crate::fmath::sqrt(to_f64(&self.norm_sq_nbar(y)?)))
    }

    /// The character `ν` as a covector on the full basis (zero off `l`).
    pub fn nu_covector(&self) -> &[Q] {
        &self.nu
    }

    pub fn nu(&self, x: &[Q]) -> Result<Q> {
        self.require_grade(x, 0)?;
        Ok(linalg::dot(&self.nu, x))
    }

    /// The identity of the `gl` block through which `l` acts on `n̄`.
    ///
    /// For `O(2n,2n)` this is the lower-right identity, i.e. `diag(−I, I)`
    /// in `l`, which coincides with `h = Σ h_j`.
    pub fn gl_block_identity(&self) -> Element {
        match self.family {
            Family::OSplit => {
                let m = 2 * self.n;
                let mut x = self.zero();
                for i in 0..m {
                    let idx = self.index_of_pivot((i, i)).expect("diagonal of l");
                    x[idx] = q(-1);
                }
                x
            }
            _ => {
                let mut x = self.zero();
                for i in self.n..2 * self.n {
                    let idx = self.index_of_pivot((i, i)).expect("diagonal of l");
                    x[idx] = q(-1);
                }
                for i in 0..self.n {
                    let idx = self.index_of_pivot((i, i)).expect("diagonal of l");
                    x[idx] = q(1);
                }
                x
            }
        }
    }

    pub fn index_of_pivot(&self, p: (usize, usize)) -> Option<usize> {
        self.pivots.iter().position(|&x| x == p)
    }

    /// Restriction of `x` to the coordinates of the given grade.
    pub fn restrict(&self, x: &[Q], g: i8) -> Vector {
        x[self.range_of_grade(g)].to_vec()
    }

    /// Embeds coordinates of one graded piece back into the full basis.
    pub fn embed(&self, v: &[Q], g: i8) -> Element {
        let mut x = self.zero();
        for (k, c) in self.range_of_grade(g).zip(v) {
            x[k] = c.clone();
        }
        x
    }

    fn compute_center(&self) -> Vec<Element> {
        // The center lies in grade 0 and is cut out by commuting with the
        // generators n ∪ n̄.
        let lr = self.l_range();
        let mut rows: Vec<Vector> = Vec::new();
        for b in self.nbar_range().chain(self.n_range()) {
            let eb = self.basis_vector(b);
            let images: Vec<Element> = lr
                .clone()
                .map(|a| self.bracket(&self.basis_vector(a), &eb))
                .collect();
            for r in 0..self.dim() {
                let row: Vector = images.iter().map(|im| im[r].clone()).collect();
                if !linalg::is_zero(&row) {
                    rows.push(row);
                }
            }
        }
        linalg::kernel(&rows, lr.len())
            .iter()
            .map(|v| self.embed(v, 0))
            .collect()
    }

    fn compute_nu(&self) -> Result<Vector> {
        let lr = self.l_range();
        let dl = lr.len();
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vec<Q> = Vec::new();
        let mut derived: Vec<Vector> = Vec::new();
        for a in lr.clone() {
            for b in a + 1..lr.end {
                let c = self.restrict(&self.bracket(&self.basis_vector(a), &self.basis_vector(b)), 0);
                if !linalg::is_zero(&c) {
                    derived.push(c);
                }
            }
        }
        for c in linalg::independent(&derived) {
            rows.push(c);
            rhs.push(Q::zero());
        }
        for t in &self.triples {
            rows.push(self.restrict(&t.h, 0));
            rhs.push(Q::one());
        }
        for z in &self.center {
            rows.push(self.restrict(z, 0));
            rhs.push(Q::zero());
        }
        let sol = linalg::solve(&rows, &rhs)
            .ok_or_else(|| Error::Invariant("no character with nu(h_j) = 1".into()))?;
        if linalg::rank(&rows) != dl {
            return Err(Error::Invariant("character nu is not unique".into()));
        }
        Ok(self.embed(&sol, 0))
    }

    /// Matrix of `ad(x)` on the full basis (columns are images).
    pub fn ad_matrix(&self, x: &[Q]) -> Matrix {
        let cols: Vec<Element> = (0..self.dim())
            .map(|b| self.bracket(x, &self.basis_vector(b)))
            .collect();
        linalg::transpose(&cols)
    }

    /// A basis of `l` made of `θ`-eigenvectors.
    pub fn theta_eigenbasis_l(&self) -> Vec<Element> {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for a in self.l_range() {
            let e = self.basis_vector(a);
            let t = self.theta(&e);
            plus.push(linalg::add(&e, &t));
            minus.push(linalg::sub(&e, &t));
        }
        let mut out = sorted_independent(&plus);
        out.extend(sorted_independent(&minus));
        out
    }

    /// `Ω = Σ_j ad(θ b_j) ad(θ b̃_j)`, where `b̃` is the basis dual to `b`
    /// under `⟨X, −θY⟩`. For an orthonormal `θ`-eigenbasis this is
    /// `Σ_j ad(θ l_j)²`.
    pub fn casimir_omega(&self, x: &[Q]) -> Result<Element> {
        let b = self.theta_eigenbasis_l();
        let k = b.len();
        let theta_b: Vec<Element> = b.iter().map(|v| self.theta(v)).collect();
        let gram: Matrix = b
            .iter()
            .map(|bj| {
                theta_b
                    .iter()
                    .map(|tbk| -self.pair(bj, tbk))
                    .collect()
            })
            .collect();
        let inv = linalg::inverse(&gram)
            .ok_or_else(|| Error::Degenerate("<X, -theta Y> is singular on l".into()))?;
        let mut out = self.zero();
        for j in 0..k {
            let mut dual = self.zero();
            for i in 0..k {
                linalg::axpy(&mut dual, &inv[i][j], &b[i]);
            }
            let inner = self.bracket(&self.theta(&dual), x);
            let outer = self.bracket(&theta_b[j], &inner);
            linalg::axpy(&mut out, &Q::one(), &outer);
        }
        Ok(out)
    }

    /// The scalar by which `Ω` acts on `n`, checked on every basis vector.
    pub fn casimir_omega_scalar(&self) -> Result<Q> {
        let mut scalar: Option<Q> = None;
        for c in self.n_range() {
            let e = self.basis_vector(c);
            let w = self.casimir_omega(&e)?;
            let s = w[c].clone();
            if linalg::sub(&w, &linalg::scale(&s, &e)).iter().any(|v| !v.is_zero()) {
                return Err(Error::Invariant(format!(
                    "Omega does not preserve the line of n-basis vector {c}"
                )));
            }
            match &scalar {
                None => scalar = Some(s),
                Some(prev) if *prev != s => {
                    return Err(Error::Invariant(format!(
                        "Omega acts on n by {} and {}",
                        format_q(prev),
                        format_q(&s)
                    )))
                }
                _ => {}
            }
        }
        scalar.ok_or_else(|| Error::Invariant("n is empty".into()))
    }

    /// `{h ∈ l : [h, y] = 0}`.
    pub fn stabilizer_algebra(&self, y: &[Q]) -> Result<Vec<Element>> {
        self.require_grade(y, -1)?;
        self.centralizer_in_l(&[y.to_vec()])
    }

    /// `{h ∈ l : [h, v] = 0 for every v}`.
    pub fn centralizer_in_l(&self, vs: &[Element]) -> Result<Vec<Element>> {
        let lr = self.l_range();
        let mut rows = Vec::new();
        for v in vs {
            let images: Vec<Element> = lr
                .clone()
                .map(|a| self.bracket(&self.basis_vector(a), v))
                .collect();
            for r in 0..self.dim() {
                let row: Vector = images.iter().map(|im| im[r].clone()).collect();
                if !linalg::is_zero(&row) {
                    rows.push(row);
                }
            }
        }
        Ok(linalg::kernel(&rows, lr.len())
            .iter()
            .map(|v| self.embed(v, 0))
            .collect())
    }

    /// Trace of `ad(x)` restricted to the subalgebra spanned by `sub`.
    pub fn trace_ad_on(&self, x: &[Q], sub: &[Element]) -> Result<Q> {
        let mut t = Q::zero();
        for (i, s) in sub.iter().enumerate() {
            let img = self.bracket(x, s);
            let c = linalg::coordinates(sub, &img).ok_or_else(|| {
                Error::Invariant("subspace is not stable under the given element".into())
            })?;
            t += &c[i];
        }
        Ok(t)
    }

    /// A random element of `L` with small rational entries, together with
    /// its inverse, as full matrices.
    pub fn random_levi<R: Rng + ?Sized>(&self, rng: &mut R, factors: usize) -> (Matrix, Matrix) {
        let block = match self.family {
            Family::OSplit => 2 * self.n,
            _ => self.n,
        };
        let (a, ainv) = random_gl(rng, block, factors);
        match self.family {
            Family::OSplit => {
                let ait = linalg::transpose(&ainv);
                let at = linalg::transpose(&a);
                (block_diag(&a, &ait), block_diag(&ainv, &at))
            }
            _ => {
                let (d, dinv) = random_gl(rng, block, factors);
                (block_diag(&a, &d), block_diag(&ainv, &dinv))
            }
        }
    }

    /// `Ad(l) x = l x l⁻¹`.
    pub fn conjugate(&self, l: &[Vec<Q>], linv: &[Vec<Q>], x: &[Q]) -> Result<Element> {
        let m = linalg::mat_mul(&linalg::mat_mul(l, &self.to_matrix(x)), linv);
        self.from_matrix(&m)
    }

    /// Indices of the `l` basis vectors that are diagonal matrices.
    pub fn diagonal_l_indices(&self) -> Vec<usize> {
        self.l_range()
            .filter(|&a| self.basis[a].entries.iter().all(|(i, j, _)| i == j))
            .collect()
    }

    /// Sizes of the orthogonal blocks making up `M = K ∩ L`, and whether the
    /// first block is repeated along the diagonal (`O(2n,2n)`) or the blocks
    /// are independent (`GL(2n,R)`).
    pub fn compact_levi_shape(&self) -> (Vec<usize>, bool) {
        match self.family {
            Family::OSplit => (vec![2 * self.n], true),
            _ => (vec![self.n, self.n], false),
        }
    }

    /// Assembles the element of `M` from its orthogonal blocks.
    pub fn compact_levi_matrix(&self, blocks: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.size]; self.size];
        let (_, repeated) = self.compact_levi_shape();
        let placed: Vec<&Vec<Vec<f64>>> = if repeated {
            vec![&blocks[0], &blocks[0]]
        } else {
            blocks.iter().collect()
        };
        let mut off = 0;
        for b in placed {
            for (i, row) in b.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[off + i][off + j] = *v;
                }
            }
            off += b.len();
        }
        m
    }

    pub fn to_f64(&self, x: &[Q]) -> Vec<f64> {
        x.iter().map(to_f64).collect()
    }

    /// Structural suite: closure, grading, θ, invariance of the form, `sl₂`
    /// relations and the normalization of the form. All exact.
    pub fn structural_suite(&self, seed: u64) -> VerificationReport {
        let mut rep = VerificationReport::new("structural", self.name());
        let dim = self.dim();
        rep.note(format!(
            "dim g = {dim}, dim l = {}, dim n = {}, form scale {}",
            self.l_range().len(),
            self.n_range().len(),
            format_q(&self.form_scale)
        ));

        let mut t = ExactTally::new();
        t.count = (dim * dim) as u64;
        rep.push(CheckOutcome::exact(
            "closure",
            &t,
            "every basis commutator reconstructed in the span",
        ));

        let mut jac = ExactTally::new();
        let jacobi = |jac: &mut ExactTally, a: usize, b: usize, c: usize| {
            let (ea, eb, ec) = (
                self.basis_vector(a),
                self.basis_vector(b),
                self.basis_vector(c),
            );
            let mut s = self.bracket(&ea, &self.bracket(&eb, &ec));
            linalg::axpy(&mut s, &Q::one(), &self.bracket(&eb, &self.bracket(&ec, &ea)));
            linalg::axpy(&mut s, &Q::one(), &self.bracket(&ec, &self.bracket(&ea, &eb)));
            jac.record_vec(&s);
        };
        if dim <= 40 {
            for a in 0..dim {
                for b in a + 1..dim {
                    for c in b + 1..dim {
                        jacobi(&mut jac, a, b, c);
                    }
                }
            }
        } else {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                let a = rng.random_range(0..dim);
                let b = rng.random_range(0..dim);
                let c = rng.random_range(0..dim);
                jacobi(&mut jac, a, b, c);
            }
        }
        rep.push(CheckOutcome::exact(
            "jacobi",
            &jac,
            if dim <= 40 {
                "all basis triples"
            } else {
                "10000 random basis triples"
            },
        ));

        let mut grading = ExactTally::new();
        for a in 0..dim {
            for b in 0..dim {
                let c = &self.structure[a * dim + b];
                let g = self.grades[a] + self.grades[b];
                for (k, _) in c {
                    grading.record_bool(g.abs() <= 1 && self.grades[*k] == g);
                }
                if c.is_empty() {
                    grading.record_bool(true);
                }
            }
        }
        rep.push(CheckOutcome::exact(
            "grading",
            &grading,
            "[g_a, g_b] in g_(a+b), with n and n-bar abelian",
        ));

        let mut hgrade = ExactTally::new();
        let h = self.h_total();
        for a in 0..dim {
            let e = self.basis_vector(a);
            let want = linalg::scale(&q(2 * self.grades[a] as i64), &e);
            hgrade.record_vec(&linalg::sub(&self.bracket(&h, &e), &want));
        }
        rep.push(CheckOutcome::exact(
            "ad_h_grading",
            &hgrade,
            "[h, X] = 2 grade(X) X; in particular (ad h) y = -2y on n-bar",
        ));

        let mut th = ExactTally::new();
        for a in 0..dim {
            let e = self.basis_vector(a);
            let te = self.theta(&e);
            th.record_vec(&linalg::sub(&self.theta(&te), &e));
            th.record_bool(self.grade_of(&te) == Some(-self.grades[a]));
            for b in 0..dim {
                let f = self.basis_vector(b);
                let lhs = self.theta(&self.bracket(&e, &f));
                let rhs = self.bracket(&te, &self.theta(&f));
                th.record_vec(&linalg::sub(&lhs, &rhs));
            }
        }
        rep.push(CheckOutcome::exact(
            "theta_automorphism",
            &th,
            "theta^2 = 1, theta flips grades, theta[X,Y] = [theta X, theta Y]",
        ));

        let mut inv = ExactTally::new();
        let g = self.pair_matrix();
        for z in 0..dim {
            let ez = self.basis_vector(z);
            let adz: Vec<Element> = (0..dim)
                .map(|x| self.bracket(&ez, &self.basis_vector(x)))
                .collect();
            for x in 0..dim {
                for y in x..dim {
                    let a = linalg::dot(&adz[x], &g[y]);
                    let b = linalg::dot(&adz[y], &g[x]);
                    inv.record(&(a + b));
                }
            }
        }
        rep.push(CheckOutcome::exact(
            "form_invariance",
            &inv,
            "<[Z,X],Y> + <X,[Z,Y]> = 0 on all basis triples",
        ));

        let mut orth = ExactTally::new();
        for a in 0..dim {
            for b in 0..dim {
                if self.grades[a] + self.grades[b] != 0 {
                    orth.record(&g[a][b]);
                }
            }
        }
        let cross: Matrix = self
            .n_range()
            .map(|a| self.nbar_range().map(|b| g[a][b].clone()).collect())
            .collect();
        orth.record_bool(linalg::rank(&cross) == self.n_range().len());
        rep.push(CheckOutcome::exact(
            "grading_orthogonality",
            &orth,
            "<n,n> = <n-bar,n-bar> = <l,n> = <l,n-bar> = 0, n x n-bar nondegenerate",
        ));

        let mut pos = ExactTally::new();
        let nb = self.nbar_range();
        let gram: Matrix = nb
            .clone()
            .map(|a| {
                let ta = self.theta(&self.basis_vector(a));
                nb.clone().map(|b| -linalg::dot(&ta, &g[b])).collect()
            })
            .collect();
        pos.record_bool(is_positive_definite(&gram));
        rep.push(CheckOutcome::exact(
            "nbar_positivity",
            &pos,
            "-<y, theta y> positive definite on n-bar",
        ));

        let mut sl2 = ExactTally::new();
        for (i, t) in self.triples.iter().enumerate() {
            sl2.record_vec(&linalg::sub(&self.bracket(&t.h, &t.x), &linalg::scale(&q(2), &t.x)));
            sl2.record_vec(&linalg::sub(&self.bracket(&t.h, &t.y), &linalg::scale(&q(-2), &t.y)));
            sl2.record_vec(&linalg::sub(&self.bracket(&t.x, &t.y), &t.h));
            for (j, s) in self.triples.iter().enumerate() {
                if i == j {
                    continue;
                }
                for u in [&t.x, &t.y, &t.h] {
                    for v in [&s.x, &s.y, &s.h] {
                        sl2.record_vec(&self.bracket(u, v));
                    }
                }
            }
            sl2.record(&(self.nu(&t.h).unwrap_or_else(|_| q(99)) - q(1)));
        }
        rep.push(CheckOutcome::exact(
            "sl2_triples",
            &sl2,
            "sl2 relations, distinct triples commute, nu(h_j) = 1",
        ));

        let mut norm = ExactTally::new();
        let (x1, y1) = (self.x(0), self.y(0));
        norm.record(&(self.pair(x1, y1) - q(1)));
        norm.record(&(self.pair(y1, &self.theta(y1)) + q(1)));
        norm.record_vec(&linalg::add(&self.theta(y1), x1));
        rep.push(CheckOutcome::exact(
            "form_normalization",
            &norm,
            "<x1,y1> = 1, <y1, theta y1> = -1, theta y1 = -x1",
        ));

        let mut nu_chk = ExactTally::new();
        for a in self.l_range() {
            for b in a + 1..self.l_range().end {
                let c = self.bracket(&self.basis_vector(a), &self.basis_vector(b));
                nu_chk.record(&linalg::dot(&self.nu, &c));
            }
        }
        rep.push(CheckOutcome::exact(
            "nu_character",
            &nu_chk,
            "nu vanishes on [l, l]",
        ));
        rep
    }

    /// `tr ad_{s₁} = 2d·ν` on `a ∩ s₁`, and on all of `s₁` as a stronger
    /// form of the same statement.
    pub fn modular_character_check(&self) -> VerificationReport {
        let mut rep = VerificationReport::new("modular", self.name());
        let d = q(self.d() as i64);
        let s1 = match self.stabilizer_algebra(self.y(0)) {
            Ok(s) => s,
            Err(e) => {
                rep.push(CheckOutcome::exact(
                    "stabilizer",
                    &failed_tally(),
                    format!("{e}"),
                ));
                return rep;
            }
        };
        let a: Vec<Element> = self.triples.iter().map(|t| t.h.clone()).collect();
        let a_s1 = linalg::intersection(&a, &s1);
        rep.note(format!(
            "dim s1 = {}, dim (a ∩ s1) = {}",
            s1.len(),
            a_s1.len()
        ));
        for (label, sub) in [("a_cap_s1", &a_s1), ("s1", &s1)] {
            let mut t = ExactTally::new();
            for x in sub.iter() {
                match (self.trace_ad_on(x, &s1), self.nu(x)) {
                    (Ok(tr), Ok(nu)) => t.record(&(tr - &d * q(2) * nu)),
                    _ => t.record_bool(false),
                }
            }
            rep.push(CheckOutcome::exact(
                format!("trace_ad_{label}"),
                &t,
                format!("tr ad_s1(X) = 2d nu(X) on a basis of {label}"),
            ));
        }
        let mut shape = ExactTally::new();
        shape.record(&q(s1.len() as i64 - self.expected_s1_dim() as i64));
        for x in &s1 {
            shape.record_bool(self.in_s1_block_description(x));
        }
        rep.push(CheckOutcome::exact(
            "s1_block_shape",
            &shape,
            format!(
                "s1 has dimension {} and matches the block description",
                self.expected_s1_dim()
            ),
        ));
        rep
    }

    /// Dimension of `s₁` read off its block description.
    pub fn expected_s1_dim(&self) -> usize {
        match self.family {
            Family::OSplit => {
                let r = 2 * self.n - 2;
                3 + 2 * r + r * r
            }
            _ => 2 * self.n * self.n - 2 * self.n + 1,
        }
    }

    /// For `O(2n,2n)`: `A = [[A11, A12], [0, A22]]` with `A11 ∈ sl₂`.
    /// For `GL(2n,R)`: first row of `A` and first column of `D` vanish off
    /// the corner and `a11 = d11`.
    pub fn in_s1_block_description(&self, x: &[Q]) -> bool {
        let m = self.to_matrix(x);
        match self.family {
            Family::OSplit => {
                let mm = 2 * self.n;
                let lower_left_zero = (2..mm).all(|i| (0..2).all(|j| m[i][j].is_zero()));
                lower_left_zero && (&m[0][0] + &m[1][1]).is_zero()
            }
            _ => {
                let n = self.n;
                (1..n).all(|j| m[0][j].is_zero())
                    && (n + 1..2 * n).all(|i| m[i][n].is_zero())
                    && m[0][0] == m[n][n]
            }
        }
    }
}

fn failed_tally() -> ExactTally {
    let mut t = ExactTally::new();
    t.record_bool(false);
    t
}

fn sorted_independent(v: &[Element]) -> Vec<Element> {
    let nonzero: Vec<Element> = v.iter().filter(|x| !linalg::is_zero(x)).cloned().collect();
    // Keep the original (sparse) vectors: greedily add those that raise the rank.
    let mut out: Vec<Element> = Vec::new();
    for x in nonzero {
        let mut trial = out.clone();
        trial.push(x.clone());
        if linalg::rank(&trial) == trial.len() {
            out.push(x);
        }
    }
    out
}

/// Symmetric positive definiteness through pivots of unpivoted elimination.
pub fn is_positive_definite(m: &[Vec<Q>]) -> bool {
    let mut a = m.to_vec();
    let n = a.len();
    for k in 0..n {
        if !a[k][k].is_positive() {
            return false;
        }
        let p = a[k][k].clone();
        let pivot_row = a[k].clone();
        for row in a.iter_mut().skip(k + 1) {
            if row[k].is_zero() {
                continue;
            }
            let f = &row[k] / &p;
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(k) {
                *x -= &f * y;
            }
        }
    }
    true
}

fn block_diag(a: &[Vec<Q>], b: &[Vec<Q>]) -> Matrix {
    let (n1, n2) = (a.len(), b.len());
    let mut m = linalg::zero_matrix(n1 + n2, n1 + n2);
    for i in 0..n1 {
        for j in 0..n1 {
            m[i][j] = a[i][j].clone();
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            m[n1 + i][n1 + j] = b[i][j].clone();
        }
    }
    m
}

fn small_rational<R: Rng + ?Sized>(rng: &mut R) -> Q {
    const VALUES: [(i64, i64); 8] = [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (3, 2), (2, 3), (5, 4)];
    let (n, d) = VALUES[rng.random_range(0..VALUES.len())];
    let s = if rng.random_bool(0.5) { 1 } else { -1 };
    qr(s * n, d)
}

/// A product of elementary and diagonal factors together with its inverse.
fn random_gl<R: Rng + ?Sized>(rng: &mut R, n: usize, factors: usize) -> (Matrix, Matrix) {
    let mut g = linalg::identity(n);
    let mut ginv = linalg::identity(n);
    for _ in 0..factors {
        let mut f = linalg::identity(n);
        let mut finv = linalg::identity(n);
        if rng.random_bool(0.25) {
            let i = rng.random_range(0..n);
            let c = small_rational(rng);
            finv[i][i] = c.recip();
            f[i][i] = c;
        } else {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let c = small_rational(rng);
            finv[i][j] = -c.clone();
            f[i][j] = c;
        }
        g = linalg::mat_mul(&g, &f);
        ginv = linalg::mat_mul(&finv, &ginv);
    }
    (g, ginv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn o(n: usize) -> GradedModel {
        build_model(Family::OSplit, n).unwrap()
    }

    fn gl(n: usize) -> GradedModel {
        build_model(Family::GlReal, n).unwrap()
    }

    #[test]
    fn dimensions() {
        let m = o(2);
        assert_eq!((m.dim_ambient(), m.dim()), (8, 28));
        assert_eq!((m.l_range().len(), m.n_range().len(), m.nbar_range().len()), (16, 6, 6));
        let g = gl(2);
        assert_eq!((g.dim_ambient(), g.dim()), (4, 16));
        assert_eq!((g.l_range().len(), g.n_range().len()), (8, 4));
    }

    #[test]
    fn form_scale_from_trace() {
        let m = o(2);
        let tr = linalg::mat_mul(&m.to_matrix(m.x(0)), &m.to_matrix(m.y(0)))
            .iter()
            .enumerate()
            .fold(Q::zero(), |s, (i, r)| s + &r[i]);
        assert_eq!(tr, q(2));
        assert_eq!(*m.form_scale(), qr(1, 2));
        assert_eq!(*gl(2).form_scale(), q(1));
    }

    #[test]
    fn y1_is_the_skew_block() {
        let m = o(2);
        let y = m.to_matrix(m.y(0));
        assert_eq!(y[0][5], q(-1));
        assert_eq!(y[1][4], q(1));
        let nonzero = y.iter().flatten().filter(|v| !v.is_zero()).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn theta_examples() {
        for m in [o(2), gl(2)] {
            assert_eq!(m.theta(m.y(0)), linalg::scale(&q(-1), m.x(0)));
            assert_eq!(m.theta(m.h(0)), linalg::scale(&q(-1), m.h(0)));
        }
        let m = o(2);
        // A skew element of l is θ-fixed.
        let a = m.index_of_pivot((0, 1)).unwrap();
        let b = m.index_of_pivot((1, 0)).unwrap();
        let mut k = m.zero();
        k[a] = q(1);
        k[b] = q(-1);
        assert_eq!(m.theta(&k), k);
    }

    #[test]
    fn bracket_examples() {
        let m = o(3);
        assert_eq!(m.bracket(m.x(0), m.y(0)), *m.h(0));
        assert_eq!(m.bracket(m.h(0), m.x(0)), linalg::scale(&q(2), m.x(0)));
        assert!(linalg::is_zero(&m.bracket(m.x(0), m.x(1))));
    }

    #[test]
    fn pairing_and_norm() {
        let m = o(2);
        assert_eq!(m.pair(m.x(0), m.y(0)), q(1));
        assert_eq!(m.pair(m.y(0), &m.theta(m.y(0))), q(-1));
        assert_eq!(m.pair(m.x(0), m.x(1)), q(0));
        assert_eq!(m.norm_nbar(m.y(0)).unwrap(), 1.0);
        assert_eq!(m.norm_nbar(&m.zero()).unwrap(), 0.0);
        assert_eq!(m.norm_nbar(&linalg::scale(&q(3), m.y(0))).unwrap(), 3.0);
        assert!(matches!(m.norm_nbar(m.x(0)), Err(Error::WrongGrade { .. })));
    }

    #[test]
    fn nu_is_half_trace_of_gl_block() {
        let m = o(2);
        assert_eq!(m.nu(&m.gl_block_identity()).unwrap(), q(2));
        assert_eq!(m.gl_block_identity(), m.h_total());
        for a in m.l_range() {
            let x = m.basis_vector(a);
            let mat = m.to_matrix(&x);
            let lower: Q = (4..8).map(|i| mat[i][i].clone()).sum();
            assert_eq!(m.nu(&x).unwrap(), lower * qr(1, 2));
        }
        assert_eq!(m.nu(m.h(0)).unwrap(), q(1));
    }

    #[test]
    fn center_of_gl_model() {
        assert!(o(2).center().is_empty());
        let g = gl(2);
        assert_eq!(g.center().len(), 1);
        assert_eq!(g.nu(&g.center()[0]).unwrap(), q(0));
    }

    #[test]
    fn casimir_gl2() {
        assert_eq!(gl(2).casimir_omega_scalar().unwrap(), q(2));
        assert_eq!(o(2).casimir_omega_scalar().unwrap(), q(2));
    }

    #[test]
    fn stabilizer_dims() {
        let m = o(2);
        assert_eq!(m.stabilizer_algebra(m.y(0)).unwrap().len(), 11);
        assert_eq!(m.stabilizer_algebra(&m.zero()).unwrap().len(), 16);
        let g = gl(2);
        assert_eq!(g.stabilizer_algebra(g.y(0)).unwrap().len(), 5);
    }

    #[test]
    fn levi_elements_invert() {
        let m = o(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (l, linv) = m.random_levi(&mut rng, 4);
        assert_eq!(linalg::mat_mul(&l, &linv), linalg::identity(8));
        let y = m.conjugate(&l, &linv, m.y(0)).unwrap();
        m.require_grade(&y, -1).unwrap();
    }

    #[test]
    fn rejects_other_families() {
        assert!(matches!(
            build_model(Family::E7Split, 3),
            Err(Error::UnsupportedFamily { .. })
        ));
        assert!(matches!(
            build_model(Family::OSplit, 7),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn matrix_round_trip_and_span_failure() {
        let m = gl(2);
        let x = m.h_total();
        assert_eq!(m.from_matrix(&m.to_matrix(&x)).unwrap(), x);
        let o2 = o(2);
        let mut bad = linalg::zero_matrix(8, 8);
        bad[0][4] = q(1);
        assert_eq!(o2.from_matrix(&bad), Err(Error::NotInSpan));
    }
}
