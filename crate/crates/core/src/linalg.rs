//! Exact integer linear algebra.
//!
//! Matrices are dense, row-major, over arbitrary-precision integers. The
//! central routine is [`diagonalize`], which returns unimodular `U`, `V`
//! (and `U⁻¹`) with `U·A·V` diagonal. Kernels, integer solutions, lattice
//! bases and abelian-group invariants are all read off from it.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(v));
            }
        }
        m
    }

    /// Build from columns of equal length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i * self.cols + j] += v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += self.get(i, j) * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// `[self | other]`.
    pub fn hconcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = IntMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// Stack `self` above `other`.
    pub fn vconcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, cols: impl IntoIterator<Item = usize>) -> IntMatrix {
        let cols: Vec<usize> = cols.into_iter().collect();
        let mut m = IntMatrix::zeros(self.rows, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for i in 0..self.rows {
                m.set(i, jj, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn select_rows(&self, rows: impl IntoIterator<Item = usize>) -> IntMatrix {
        let rows: Vec<usize> = rows.into_iter().collect();
        let mut m = IntMatrix::zeros(rows.len(), self.cols);
        for (ii, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                m.set(ii, j, self.get(i, j).clone());
            }
        }
        m
    }

    /// Dense row-major text encoding: `rows cols v00 v01 ...`.
    pub fn encode(&self) -> String {
        let mut s = format!("{} {}", self.rows, self.cols);
        for v in &self.data {
            s.push(' ');
            s.push_str(&v.to_string());
        }
        s
    }

    pub fn decode(s: &str) -> Option<IntMatrix> {
        let mut it = s.split_whitespace();
        let rows: usize = it.next()?.parse().ok()?;
        let cols: usize = it.next()?.parse().ok()?;
        let data: Option<Vec<BigInt>> = it.map(|t| t.parse().ok()).collect();
        let data = data?;
        (data.len() == rows * cols).then_some(IntMatrix { rows, cols, data })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * q;
            if !v.is_zero() {
                self.data[dst * self.cols + j] -= v;
            }
        }
    }

    /// col[dst] -= q * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * q;
            if !v.is_zero() {
                self.data[i * self.cols + dst] -= v;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -&self.data[r * self.cols + j];
            self.data[r * self.cols + j] = v;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -&self.data[i * self.cols + c];
            self.data[i * self.cols + c] = v;
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// `U·A·V = D` with `D` diagonal (nonzero entries first, positive).
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub diag: Vec<BigInt>,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
}

impl Diagonalization {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

/// Diagonalize by unimodular row and column operations.
///
/// The diagonal is not forced into a divisor chain here; [`normalize_divisors`]
/// does that on the extracted entries.
pub fn diagonalize(a: &IntMatrix) -> Diagonalization {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let x = d.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                    best = Some((i, j));
                    if x.abs().is_one() {
                        break;
                    }
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                d.row_axpy(i, t, &q);
                u.row_axpy(i, t, &q);
                // U' = E U with E = I - q e_i e_t^T, so U'^{-1} = U^{-1} (I + q e_i e_t^T)
                u_inv.col_axpy(t, i, &(-&q));
                if !d.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                d.col_axpy(j, t, &q);
                v.col_axpy(j, t, &q);
                if !d.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
            // move the smallest remaining entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t + 1..m {
                let x = d.get(i, t);
                if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                    best = (i, t);
                }
            }
            for j in t + 1..n {
                let x = d.get(t, j);
                if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                d.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                u_inv.swap_cols(t, best.0);
            } else if best.1 != t {
                d.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        diag.push(d.get(t, t).clone());
        t += 1;
    }
    Diagonalization { diag, u, u_inv, v }
}

/// Turn a list of nonzero diagonal entries into the canonical divisor chain.
pub fn normalize_divisors(entries: &[BigInt]) -> Vec<BigInt> {
    let mut d: Vec<BigInt> = entries.iter().map(|x| x.abs()).collect();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = if g.is_zero() {
                BigInt::zero()
            } else {
                &d[i] / &g * &d[j]
            };
            d[i] = g;
            d[j] = l;
        }
    }
    d.sort();
    d
}

/// Basis (as columns) of the integer kernel of `a`.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let dz = diagonalize(a);
    dz.v.select_columns(dz.rank()..a.cols)
}

/// An integer solution of `a·x = b`, if one exists.
pub fn solve(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    solve_with(&diagonalize(a), a.cols, b)
}

/// Solve against a precomputed diagonalization of a matrix with `cols` columns.
pub fn solve_with(dz: &Diagonalization, cols: usize, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let ub = dz.u.mul_vec(b);
    let r = dz.rank();
    if ub[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut y = vec![BigInt::zero(); cols];
    for i in 0..r {
        let (q, rem) = ub[i].div_rem(&dz.diag[i]);
        if !rem.is_zero() {
            return None;
        }
        y[i] = q;
    }
    Some(dz.v.mul_vec(&y))
}

/// A basis (as columns) of the lattice spanned by the columns of `gens`.
pub fn lattice_basis(gens: &IntMatrix) -> IntMatrix {
    let dz = diagonalize(gens);
    let cols: Vec<Vec<BigInt>> = (0..dz.rank())
        .map(|i| {
            dz.u_inv
                .column(i)
                .into_iter()
                .map(|x| x * &dz.diag[i])
                .collect()
        })
        .collect();
    IntMatrix::from_columns(gens.rows, &cols)
}

/// Isomorphism invariants of a finitely generated abelian group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Torsion coefficients `d_1 | d_2 | ...`, all `> 1`.
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn zero() -> Self {
        AbelianInvariants {
            free_rank: 0,
            torsion: vec![],
        }
    }

    pub fn free(rank: usize) -> Self {
        AbelianInvariants {
            free_rank: rank,
            torsion: vec![],
        }
    }

    pub fn new(free_rank: usize, torsion: &[i64]) -> Self {
        AbelianInvariants {
            free_rank,
            torsion: torsion.iter().map(|&t| BigInt::from(t)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        f.write_str(&parts.join("+"))
    }
}

/// `Z^gens / im(relations)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PresentedGroup {
    pub gens: usize,
    pub relations: IntMatrix,
}

impl PresentedGroup {
    pub fn free(n: usize) -> Self {
        PresentedGroup {
            gens: n,
            relations: IntMatrix::zeros(n, 0),
        }
    }

    pub fn cyclic(n: usize, order: i64) -> Self {
        PresentedGroup {
            gens: n,
            relations: IntMatrix::identity(n).scale(&BigInt::from(order)),
        }
    }

    pub fn invariants(&self) -> AbelianInvariants {
        let dz = diagonalize(&self.relations);
        let r = dz.rank();
        let torsion = normalize_divisors(&dz.diag)
            .into_iter()
            .filter(|d| !d.is_one())
            .collect();
        AbelianInvariants {
            free_rank: self.gens - r,
            torsion,
        }
    }

    /// Whether `x` is zero in the group.
    pub fn is_zero_element(&self, x: &[BigInt]) -> bool {
        x.iter().all(|v| v.is_zero()) || solve(&self.relations, x).is_some()
    }

    /// Direct sum of groups.
    pub fn direct_sum(parts: &[PresentedGroup]) -> PresentedGroup {
        let gens: usize = parts.iter().map(|p| p.gens).sum();
        let rels: usize = parts.iter().map(|p| p.relations.cols()).sum();
        let mut m = IntMatrix::zeros(gens, rels);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            for i in 0..p.gens {
                for j in 0..p.relations.cols() {
                    m.set(r0 + i, c0 + j, p.relations.get(i, j).clone());
                }
            }
            r0 += p.gens;
            c0 += p.relations.cols();
        }
        PresentedGroup { gens, relations: m }
    }
}

/// `L / S` where `l_basis` has full column rank and the columns of `s_gens`
/// lie in its span.
pub fn subquotient(l_basis: &IntMatrix, s_gens: &IntMatrix) -> PresentedGroup {
    let k = l_basis.cols();
    let dz = diagonalize(l_basis);
    let cols: Vec<Vec<BigInt>> = (0..s_gens.cols())
        .map(|j| {
            solve_with(&dz, k, &s_gens.column(j)).expect("subgroup generator outside lattice")
        })
        .collect();
    PresentedGroup {
        gens: k,
        relations: IntMatrix::from_columns(k, &cols),
    }
}

/// Cohomology of a cochain complex of presented groups at one degree,
/// with the cocycle lattice retained so that cochain maps can be pushed to
/// cohomology.
#[derive(Debug, Clone)]
pub struct CohomologyData {
    /// Columns are a basis of the cocycle lattice in `Z^{gens}` of `C^n`.
    pub cocycles: IntMatrix,
    /// The cohomology group, generated by the cocycle basis.
    pub group: PresentedGroup,
}

impl CohomologyData {
    pub fn invariants(&self) -> AbelianInvariants {
        self.group.invariants()
    }
}

/// `H^n` of `... -> C^{n-1} -d_prev-> C^n -d_next-> C^{n+1}`.
///
/// `d_prev` is `None` at the bottom of the complex; `c_next` is needed for its
/// relations (a cochain is a cocycle when its image vanishes in `C^{n+1}`).
pub fn cohomology_at(
    c_n: &PresentedGroup,
    d_prev: Option<&IntMatrix>,
    d_next: &IntMatrix,
    c_next: &PresentedGroup,
) -> CohomologyData {
    let a = c_n.gens;
    assert_eq!(d_next.cols(), a);
    assert_eq!(d_next.rows(), c_next.gens);
    let block = d_next.hconcat(&c_next.relations);
    let ker = kernel_basis(&block);
    let proj = ker.select_rows(0..a);
    let cocycles = lattice_basis(&proj);
    let mut bgens = c_n.relations.clone();
    if let Some(d) = d_prev {
        assert_eq!(d.rows(), a);
        bgens = d.hconcat(&bgens);
    }
    let group = subquotient(&cocycles, &bgens);
    CohomologyData { cocycles, group }
}

/// Matrix of the map induced on cohomology by a cochain map `phi` from the
/// complex of `src` to the complex of `tgt` (coordinates in cocycle bases).
pub fn induced_on_cohomology(
    src: &CohomologyData,
    tgt: &CohomologyData,
    phi: &IntMatrix,
) -> IntMatrix {
    let image = phi.mul(&src.cocycles);
    let dz = diagonalize(&tgt.cocycles);
    let k = tgt.cocycles.cols();
    let cols: Vec<Vec<BigInt>> = (0..image.cols())
        .map(|j| solve_with(&dz, k, &image.column(j)).expect("cochain map does not preserve cocycles"))
        .collect();
    IntMatrix::from_columns(k, &cols)
}

/// Colimit of a finite diagram of presented groups: `maps` lists
/// `(from, to, matrix)` with `matrix: Z^{gens(from)} -> Z^{gens(to)}`.
pub fn colimit(groups: &[PresentedGroup], maps: &[(usize, usize, IntMatrix)]) -> PresentedGroup {
    let mut sum = PresentedGroup::direct_sum(groups);
    let offsets: Vec<usize> = groups
        .iter()
        .scan(0, |acc, g| {
            let o = *acc;
            *acc += g.gens;
            Some(o)
        })
        .collect();
    let mut extra = Vec::new();
    for (from, to, m) in maps {
        for x in 0..groups[*from].gens {
            let mut col = vec![BigInt::zero(); sum.gens];
            col[offsets[*from] + x] += BigInt::one();
            for y in 0..groups[*to].gens {
                col[offsets[*to] + y] -= m.get(y, x);
            }
            extra.push(col);
        }
    }
    let extra = IntMatrix::from_columns(sum.gens, &extra);
    sum.relations = sum.relations.hconcat(&extra);
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn diagonalization_is_consistent() {
        let a = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let dz = diagonalize(&a);
        let d = dz.u.mul(&a).mul(&dz.v);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(d.get(i, j).is_zero());
                }
            }
        }
        assert_eq!(dz.u.mul(&dz.u_inv), IntMatrix::identity(3));
        assert_eq!(normalize_divisors(&dz.diag), big(&[2, 6, 12]));
    }

    #[test]
    fn kernel_and_solve() {
        let a = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 1);
        assert!(a.mul(&k).is_zero());
        let b = big(&[3, 5]);
        let x = solve(&a, &b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
        let two = IntMatrix::from_rows(&[vec![2]]);
        assert!(solve(&two, &big(&[1])).is_none());
    }

    #[test]
    fn invariants_of_presentations() {
        let g = PresentedGroup {
            gens: 3,
            relations: IntMatrix::from_rows(&[vec![2, 0], vec![0, 3], vec![0, 0]]),
        };
        assert_eq!(g.invariants(), AbelianInvariants::new(1, &[6]));
        assert_eq!(PresentedGroup::cyclic(2, 2).invariants().to_string(), "Z/2+Z/2");
        assert_eq!(PresentedGroup::free(0).invariants().to_string(), "0");
    }

    #[test]
    fn cohomology_of_small_complex() {
        // Z -2-> Z -> 0 : H^0 = 0, H^1 = Z/2
        let c0 = PresentedGroup::free(1);
        let c1 = PresentedGroup::free(1);
        let zero = PresentedGroup::free(0);
        let d0 = IntMatrix::from_rows(&[vec![2]]);
        let d1 = IntMatrix::zeros(0, 1);
        assert!(cohomology_at(&c0, None, &d0, &c1).invariants().is_zero());
        assert_eq!(
            cohomology_at(&c1, Some(&d0), &d1, &zero).invariants(),
            AbelianInvariants::new(0, &[2])
        );
    }

    #[test]
    fn colimit_of_chain() {
        // Z -×2-> Z : colimit Z ; Z/4 -> Z/2 (reduction) : colimit Z/2
        let m = IntMatrix::from_rows(&[vec![2]]);
        let g = colimit(&[PresentedGroup::free(1), PresentedGroup::free(1)], &[(0, 1, m)]);
        assert_eq!(g.invariants(), AbelianInvariants::free(1));
        let red = IntMatrix::from_rows(&[vec![1]]);
        let g = colimit(&[PresentedGroup::cyclic(1, 4), PresentedGroup::cyclic(1, 2)], &[(0, 1, red)]);
        assert_eq!(g.invariants(), AbelianInvariants::new(0, &[2]));
    }

    #[test]
    fn encode_roundtrip() {
        let a = IntMatrix::from_rows(&[vec![1, -2], vec![3, 4]]);
        assert_eq!(IntMatrix::decode(&a.encode()), Some(a));
    }
}
