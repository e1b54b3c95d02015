//! Exact integer, rational and F2 linear algebra on small dense matrices.

use crate::arith::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Row-major integer matrix.
pub type IMat = Vec<Vec<BigInt>>;

pub fn to_imat(rows: &[Vec<i64>]) -> IMat {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn mat_vec(a: &IMat, x: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn ncols(a: &IMat) -> usize {
    a.first().map_or(0, |r| r.len())
}

/// Column Hermite form `A U = H` with `U` unimodular.
///
/// `pivots[k] = r` means column `k` of `H` has its leading entry (positive)
/// in row `r`; columns past `pivots.len()` are zero, so the matching columns
/// of `U` span the integer kernel of `A`.
#[derive(Clone, Debug)]
pub struct ColumnHermite {
    pub h: IMat,
    pub u: IMat,
    pub pivots: Vec<usize>,
}

impl ColumnHermite {
    pub fn new(a: &IMat) -> Self {
        let rows = a.len();
        let n = ncols(a);
        let mut h = a.clone();
        let mut u: IMat = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut k = 0;
        for r in 0..rows {
            if k == n {
                break;
            }
            // gcd-combine columns k..n into column k at row r
            for c in k + 1..n {
                if h[r][c].is_zero() {
                    continue;
                }
                if h[r][k].is_zero() {
                    swap_cols(&mut h, k, c);
                    swap_cols(&mut u, k, c);
                    continue;
                }
                let (a0, b0) = (h[r][k].clone(), h[r][c].clone());
                let e = a0.extended_gcd(&b0);
                let (x, y, g) = (e.x, e.y, e.gcd);
                let (p, q) = (&a0 / &g, &b0 / &g);
                // [col_k, col_c] <- [x col_k + y col_c, -q col_k + p col_c]
                combine_cols(&mut h, k, c, &x, &y, &(-&q), &p);
                combine_cols(&mut u, k, c, &x, &y, &(-&q), &p);
            }
            if h[r][k].is_zero() {
                continue;
            }
            if h[r][k].is_negative() {
                negate_col(&mut h, k);
                negate_col(&mut u, k);
            }
            let piv = h[r][k].clone();
            for c in 0..k {
                let f = h[r][c].div_floor(&piv);
                if !f.is_zero() {
                    axpy_col(&mut h, c, k, &f);
                    axpy_col(&mut u, c, k, &f);
                }
            }
            pivots.push(r);
            k += 1;
        }
        ColumnHermite { h, u, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Kernel basis columns of `U`, returned as vectors.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        let n = self.u.len();
        (self.rank()..n)
            .map(|c| self.u.iter().map(|row| row[c].clone()).collect())
            .collect()
    }

    /// An integer solution of `A x = b` with all free coordinates set to zero.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let n = self.u.len();
        let mut y = vec![BigInt::zero(); n];
        for (k, &r) in self.pivots.iter().enumerate() {
            let mut s = b[r].clone();
            for j in 0..k {
                s -= &self.h[r][j] * &y[j];
            }
            let (q, rem) = s.div_rem(&self.h[r][k]);
            if !rem.is_zero() {
                return None;
            }
            y[k] = q;
        }
        if mat_vec(&self.h, &y) != b {
            return None;
        }
        Some(mat_vec(&self.u, &y))
    }
}

fn swap_cols(m: &mut IMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn negate_col(m: &mut IMat, c: usize) {
    for row in m.iter_mut() {
        row[c] = -&row[c];
    }
}

/// `col_c -= f * col_k`
fn axpy_col(m: &mut IMat, c: usize, k: usize, f: &BigInt) {
    for row in m.iter_mut() {
        if !row[k].is_zero() {
            let t = &row[k] * f;
            row[c] -= t;
        }
    }
}

fn combine_cols(m: &mut IMat, k: usize, c: usize, a: &BigInt, b: &BigInt, cc: &BigInt, d: &BigInt) {
    for row in m.iter_mut() {
        let (x, y) = (row[k].clone(), row[c].clone());
        if x.is_zero() && y.is_zero() {
            continue;
        }
        row[k] = a * &x + b * &y;
        row[c] = cc * &x + d * &y;
    }
}

/// Row Hermite normal form of the lattice spanned by `rows` (zero rows dropped).
pub fn row_hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let t: IMat = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect();
    let ch = ColumnHermite::new(&t);
    (0..ch.rank())
        .map(|c| ch.h.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Integer kernel of `a` in row Hermite normal form.
///
/// The rational kernel comes from the reduced row echelon form; when its
/// basis (identity on the free columns) is integral it is already saturated.
/// Otherwise the unimodular column reduction is used.
pub fn integer_kernel(a: &IMat, n: usize) -> Vec<Vec<BigInt>> {
    if a.is_empty() {
        return (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
    }
    let (r, pivots) = rref(a);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis: Option<Vec<Vec<BigInt>>> = free
        .iter()
        .map(|&j| {
            let mut v = vec![BigInt::zero(); n];
            v[j] = BigInt::one();
            for (i, &p) in pivots.iter().enumerate() {
                let x = -&r[i][j];
                if !x.is_integer() {
                    return None;
                }
                v[p] = x.to_integer();
            }
            Some(v)
        })
        .collect();
    match basis {
        Some(b) => row_hnf(&b),
        None => row_hnf(&ColumnHermite::new(a).kernel()),
    }
}

/// Reduced row echelon form over Q and its pivot columns.
pub fn rref(a: &IMat) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> =
        a.iter().map(|row| row.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
    let (rows, cols) = (m.len(), ncols(a));
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Nonzero Smith invariants by alternating row and column reduction.
pub fn smith_invariants(a: &IMat) -> Vec<BigInt> {
    let mut m = a.clone();
    let rows = m.len();
    let cols = ncols(&m);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);
        loop {
            let p = m[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_floor(&p);
                if !q.is_zero() {
                    for j in t..cols {
                        let v = &m[t][j] * &q;
                        m[i][j] -= v;
                    }
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = m[t][j].div_floor(&p);
                if !q.is_zero() {
                    for i in t..rows {
                        let v = &m[i][t] * &q;
                        m[i][j] -= v;
                    }
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // divisibility condition on the rest of the block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&m[i][j] % &p).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move the smallest remaining entry of row/column t to the pivot
            let mut bi = (t, t);
            for i in t..rows {
                if !m[i][t].is_zero() && m[i][t].abs() < m[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            m.swap(t, bi.0);
            swap_cols(&mut m, t, bi.1);
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out
}

/// Rank over Q by fraction-free elimination.
pub fn rank_q(a: &IMat) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    let cols = ncols(&m);
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Solve the square system `A x = b` over Q with Bareiss elimination.
pub fn solve_rational(a: &IMat, b: &[BigInt]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: IMat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut s = Rational::from_integer(m[k][n].clone());
        for j in k + 1..n {
            s -= Rational::from_integer(m[k][j].clone()) * &x[j];
        }
        x[k] = s / Rational::from_integer(m[k][k].clone());
    }
    Some(x)
}

/// Inverse of a square rational matrix by Gauss-Jordan, if invertible.
pub fn inverse_rational(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let inv = m[k][k].recip();
        for v in m[k].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone();
            for j in k..2 * n {
                let v = &f * &m[k][j];
                m[i][j] -= v;
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Bit vector over F2.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct F2Vec {
    pub len: usize,
    words: Vec<u64>,
}

impl F2Vec {
    pub fn zero(len: usize) -> Self {
        F2Vec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, o: &F2Vec) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        (0..self.len).find(|&i| self.get(i))
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

/// Rank of the row span and a basis of relations among the rows
/// (each relation lists row indices whose sum vanishes), in reduced form.
pub fn f2_relations(rows: &[F2Vec]) -> (usize, Vec<Vec<usize>>) {
    let k = rows.len();
    // augment every row with its identity tag
    let mut work: Vec<(F2Vec, F2Vec)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut tag = F2Vec::zero(k);
            tag.set(i, true);
            (r.clone(), tag)
        })
        .collect();
    let mut rank = 0;
    let cols = rows.first().map_or(0, |r| r.len);
    for c in 0..cols {
        let Some(p) = (rank..k).find(|&i| work[i].0.get(c)) else { continue };
        work.swap(rank, p);
        let (pv, pt) = work[rank].clone();
        for (i, w) in work.iter_mut().enumerate() {
            if i != rank && w.0.get(c) {
                w.0.xor_assign(&pv);
                w.1.xor_assign(&pt);
            }
        }
        rank += 1;
    }
    // reduce the relation tags among themselves to keep supports small
    let mut rels: Vec<F2Vec> = work[rank..].iter().map(|w| w.1.clone()).collect();
    let mut r = 0;
    for c in (0..k).rev() {
        let Some(p) = (r..rels.len()).find(|&i| rels[i].get(c)) else { continue };
        rels.swap(r, p);
        let pv = rels[r].clone();
        for (i, w) in rels.iter_mut().enumerate() {
            if i != r && w.get(c) {
                w.xor_assign(&pv);
            }
        }
        r += 1;
    }
    (rank, rels.iter().map(|v| v.ones()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_small_matrix() {
        let a = to_imat(&[vec![1, 2, 3], vec![4, 5, 6]]);
        let k = integer_kernel(&a, 3);
        assert_eq!(k.len(), 1);
        assert!(mat_vec(&a, &k[0]).iter().all(|x| x.is_zero()));
        assert_eq!(k[0], vec![BigInt::from(1), BigInt::from(-2), BigInt::from(1)]);
    }

    #[test]
    fn kernel_routes_agree() {
        // Non-integral rational basis forces the fallback.
        let a = to_imat(&[vec![2, 1, 0, 3], vec![0, 2, 1, 1]]);
        let k = integer_kernel(&a, 4);
        assert_eq!(k, row_hnf(&ColumnHermite::new(&a).kernel()));
        for m in [15u64, 21, 35] {
            let e = crate::mumford_tate::build_E_matrix(m).to_imat();
            let n = ncols(&e);
            assert_eq!(integer_kernel(&e, n), row_hnf(&ColumnHermite::new(&e).kernel()));
        }
    }

    #[test]
    fn smith_matches_known() {
        let a = to_imat(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith_invariants(&a);
        assert_eq!(s, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        assert_eq!(rank_q(&a), 3);
    }

    #[test]
    fn integer_solve() {
        let a = to_imat(&[vec![2, 0], vec![0, 3]]);
        let ch = ColumnHermite::new(&a);
        assert!(ch.solve(&[BigInt::from(4), BigInt::from(9)]).is_some());
        assert!(ch.solve(&[BigInt::from(3), BigInt::from(9)]).is_none());
    }

    #[test]
    fn bareiss() {
        let a = to_imat(&[vec![2, 1], vec![1, 3]]);
        let x = solve_rational(&a, &[BigInt::from(1), BigInt::from(2)]).unwrap();
        assert_eq!(x, vec![Rational::new(1.into(), 5.into()), Rational::new(3.into(), 5.into())]);
    }

    #[test]
    fn f2() {
        let mk = |bits: &[u8]| {
            let mut v = F2Vec::zero(bits.len());
            for (i, &b) in bits.iter().enumerate() {
                v.set(i, b == 1);
            }
            v
        };
        let rows = vec![mk(&[1, 0, 1]), mk(&[0, 1, 1]), mk(&[1, 1, 0])];
        let (r, rel) = f2_relations(&rows);
        assert_eq!(r, 2);
        assert_eq!(rel, vec![vec![0, 1, 2]]);
    }
}
