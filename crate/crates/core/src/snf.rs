//! Smith normal form over Z with the decreasing divisibility convention
//! d_{i+1} | d_i, HNF enumeration of subgroup lattices of finite abelian
//! groups, and explicit character construction for a subgroup with cyclic
//! quotient.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<i64>, // row-major n x n
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        Mat {
            n,
            a: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diag(d: &[i64]) -> Self {
        let mut m = Self::zero(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut r = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    r[(i, j)] += aik * o[(k, j)];
                }
            }
        }
        r
    }

    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn det_sign_is_unit(&self) -> bool {
        // determinant of a unimodular tracking matrix is +-1; cheap check via
        // fraction-free elimination
        let mut a = self.a.iter().map(|&x| x as i128).collect::<Vec<_>>();
        let n = self.n;
        let mut det: i128 = 1;
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r * n + col] != 0);
            let piv = match piv {
                Some(p) => p,
                None => return false,
            };
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            // Bareiss-style would avoid growth; sizes here are tiny
            for r in col + 1..n {
                while a[r * n + col] != 0 {
                    let q = a[col * n + col] / a[r * n + col];
                    for j in 0..n {
                        a[col * n + j] -= q * a[r * n + j];
                    }
                    for j in 0..n {
                        a.swap(col * n + j, r * n + j);
                    }
                    det = -det;
                }
            }
        }
        for i in 0..n {
            det *= a[i * n + i];
        }
        det == 1 || det == -1
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.a[i * self.n + j]
    }
}

/// U A V = D with U, V unimodular and the diagonal in decreasing divisibility
/// order: d_{i+1} | d_i, trailing zeroes forbidden (A nonsingular).
pub fn smith_normal_form(a: &Mat) -> Result<(Mat, Mat, Mat)> {
    let n = a.n;
    let mut d = a.clone();
    let mut u = Mat::identity(n);
    let mut v = Mat::identity(n);

    for t in 0..n {
        loop {
            // find pivot: smallest nonzero |entry| in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if d[(i, j)] != 0
                        && best.map_or(true, |(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = best.ok_or(Error::Singular)?;
            swap_rows(&mut d, &mut u, t, pi);
            swap_cols(&mut d, &mut v, t, pj);
            if d[(t, t)] < 0 {
                negate_row(&mut d, &mut u, t);
            }
            // eliminate column t and row t
            let mut dirty = false;
            for i in t + 1..n {
                let q = d[(i, t)].div_euclid(d[(t, t)]);
                if q != 0 {
                    row_sub(&mut d, &mut u, i, t, q);
                }
                if d[(i, t)] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                let q = d[(t, j)].div_euclid(d[(t, t)]);
                if q != 0 {
                    col_sub(&mut d, &mut v, j, t, q);
                }
                if d[(t, j)] != 0 {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility fix: pivot must divide every remaining entry
            let mut fixed = true;
            'scan: for i in t + 1..n {
                for j in t + 1..n {
                    if d[(i, j)] % d[(t, t)] != 0 {
                        // add row i to row t and restart elimination
                        row_add(&mut d, &mut u, t, i);
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    // ascending divisibility by construction; spec convention is decreasing
    let perm: Vec<usize> = (0..n).rev().collect();
    let mut d2 = Mat::zero(n);
    let mut u2 = Mat::zero(n);
    let mut v2 = Mat::zero(n);
    for (new_i, &old_i) in perm.iter().enumerate() {
        d2[(new_i, new_i)] = d[(old_i, old_i)];
        for j in 0..n {
            u2[(new_i, j)] = u[(old_i, j)];
            v2[(j, new_i)] = v[(j, old_i)];
        }
    }
    debug_assert!(u2.det_sign_is_unit() && v2.det_sign_is_unit());
    debug_assert_eq!(u2.mul(a).mul(&v2), d2);
    Ok((u2, v2, d2))
}

fn swap_rows(d: &mut Mat, u: &mut Mat, i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = d.n;
    for k in 0..n {
        d.a.swap(i * n + k, j * n + k);
        u.a.swap(i * n + k, j * n + k);
    }
}

fn swap_cols(d: &mut Mat, v: &mut Mat, i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = d.n;
    for k in 0..n {
        d.a.swap(k * n + i, k * n + j);
        v.a.swap(k * n + i, k * n + j);
    }
}

fn negate_row(d: &mut Mat, u: &mut Mat, i: usize) {
    let n = d.n;
    for k in 0..n {
        d.a[i * n + k] = -d.a[i * n + k];
        u.a[i * n + k] = -u.a[i * n + k];
    }
}

fn row_sub(d: &mut Mat, u: &mut Mat, i: usize, t: usize, q: i64) {
    let n = d.n;
    for k in 0..n {
        d.a[i * n + k] -= q * d.a[t * n + k];
        u.a[i * n + k] -= q * u.a[t * n + k];
    }
}

fn row_add(d: &mut Mat, u: &mut Mat, t: usize, i: usize) {
    let n = d.n;
    for k in 0..n {
        d.a[t * n + k] += d.a[i * n + k];
        u.a[t * n + k] += u.a[i * n + k];
    }
}

fn col_sub(d: &mut Mat, v: &mut Mat, j: usize, t: usize, q: i64) {
    let n = d.n;
    for k in 0..n {
        d.a[k * n + j] -= q * d.a[k * n + t];
        v.a[k * n + j] -= q * v.a[k * n + t];
    }
}

/// Minimal presentation of a finite abelian group: relations diag(d_1..d_s)
/// with d_{i+1} | d_i and no d_i = 1 (unless the whole group is trivial).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianPresentation {
    pub orders: Vec<i64>,
}

impl AbelianPresentation {
    pub fn group_order(&self) -> i64 {
        self.orders.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }
}

/// All subgroups, one upper-triangular HNF matrix per subgroup: the columns
/// of M generate the lattice between D_G Z^s and Z^s.
pub fn enumerate_subgroups(d_g: &AbelianPresentation) -> Vec<Mat> {
    let s = d_g.rank();
    if s == 0 {
        return vec![Mat::identity(0)];
    }
    let mut out = Vec::new();
    let divisor_lists: Vec<Vec<i64>> = d_g
        .orders
        .iter()
        .map(|&d| crate::arith::divisors(d as u64).into_iter().map(|x| x as i64).collect())
        .collect();
    let mut diag_choice = vec![0usize; s];
    loop {
        // fill off-diagonals column by column and test integrality of M^{-1}D
        let diag: Vec<i64> = (0..s).map(|i| divisor_lists[i][diag_choice[i]]).collect();
        collect_hnf(&diag, d_g, &mut out);
        // next diagonal choice
        let mut k = 0;
        loop {
            diag_choice[k] += 1;
            if diag_choice[k] < divisor_lists[k].len() {
                break;
            }
            diag_choice[k] = 0;
            k += 1;
            if k == s {
                return out;
            }
        }
    }
}

fn collect_hnf(diag: &[i64], d_g: &AbelianPresentation, out: &mut Vec<Mat>) {
    let s = diag.len();
    let mut m = Mat::diag(diag);
    // enumerate entries m[i][j] for i < j in 0..m[i][i]
    let positions: Vec<(usize, usize)> = (0..s)
        .flat_map(|i| ((i + 1)..s).map(move |j| (i, j)))
        .collect();
    fn rec(
        m: &mut Mat,
        positions: &[(usize, usize)],
        k: usize,
        d_g: &AbelianPresentation,
        out: &mut Vec<Mat>,
    ) {
        if k == positions.len() {
            if inv_times_diag_is_integral(m, &d_g.orders) {
                out.push(m.clone());
            }
            return;
        }
        let (i, j) = positions[k];
        let bound = m[(i, i)];
        for val in 0..bound {
            m[(i, j)] = val;
            rec(m, positions, k + 1, d_g, out);
        }
        m[(i, j)] = 0;
    }
    rec(&mut m, &positions, 0, d_g, out);
}

/// Exact test that M^{-1} diag(d) is integral, via back-substitution.
fn inv_times_diag_is_integral(m: &Mat, d: &[i64]) -> bool {
    let s = m.n;
    // solve M x = d_j e_j for each j
    for j in 0..s {
        let mut rhs = vec![0i64; s];
        rhs[j] = d[j];
        for i in (0..s).rev() {
            let mut v = rhs[i];
            for k in i + 1..s {
                v -= m[(i, k)] * rhs[k];
            }
            if v % m[(i, i)] != 0 {
                return false;
            }
            rhs[i] = v / m[(i, i)];
        }
    }
    true
}

/// Character data for the subgroup with HNF matrix M: if the quotient G/H is
/// cyclic of order n, returns n together with the exponent vector giving
/// chi(g_i) = zeta_n^{exps[i]} on the presentation generators. The kernel of
/// this character is exactly H.
#[derive(Clone, Debug)]
pub struct SubgroupCharacter {
    pub order: i64,
    pub exps: Vec<i64>,
}

pub fn character_for_subgroup(
    d_g: &AbelianPresentation,
    m: &Mat,
) -> Result<SubgroupCharacter> {
    let s = d_g.rank();
    if s == 0 {
        return Ok(SubgroupCharacter {
            order: 1,
            exps: vec![],
        });
    }
    let (u, _v, e) = smith_normal_form(m)?;
    let n = e[(0, 0)];
    if s > 1 && e[(1, 1)] != 1 {
        return Err(Error::NonCyclicQuotient);
    }
    // chi(G(X)) = zeta_n^{(U X)_1}; on generator g_i this is U[0][i]
    let exps = (0..s).map(|i| u[(0, i)].rem_euclid(n)).collect();
    Ok(SubgroupCharacter { order: n, exps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_diagonal_stays() {
        let a = Mat::diag(&[4, 2]);
        let (u, v, d) = smith_normal_form(&a).unwrap();
        assert_eq!(d.diagonal(), vec![4, 2]);
        assert_eq!(u.mul(&a).mul(&v), d);
    }

    #[test]
    fn snf_invariant_factors() {
        // [[2,1],[0,2]]: det 4, gcd of entries 1 -> diag(4, 1)
        let mut a = Mat::zero(2);
        a[(0, 0)] = 2;
        a[(0, 1)] = 1;
        a[(1, 1)] = 2;
        let (u, v, d) = smith_normal_form(&a).unwrap();
        assert_eq!(d.diagonal(), vec![4, 1]);
        assert_eq!(u.mul(&a).mul(&v), d);
    }

    #[test]
    fn snf_identity() {
        let a = Mat::identity(3);
        let (_, _, d) = smith_normal_form(&a).unwrap();
        assert_eq!(d.diagonal(), vec![1, 1, 1]);
    }

    #[test]
    fn snf_singular_rejected() {
        let a = Mat::zero(2);
        assert!(smith_normal_form(&a).is_err());
    }

    #[test]
    fn subgroup_counts() {
        // cyclic of prime order: 2 subgroups
        let g = AbelianPresentation { orders: vec![5] };
        assert_eq!(enumerate_subgroups(&g).len(), 2);
        // Klein four group: 5
        let g = AbelianPresentation { orders: vec![2, 2] };
        assert_eq!(enumerate_subgroups(&g).len(), 5);
        // cyclic of order 4: 3
        let g = AbelianPresentation { orders: vec![4] };
        assert_eq!(enumerate_subgroups(&g).len(), 3);
        // Z/4 x Z/2 has 8 subgroups
        let g = AbelianPresentation { orders: vec![4, 2] };
        assert_eq!(enumerate_subgroups(&g).len(), 8);
    }

    #[test]
    fn characters_from_subgroups() {
        // whole group -> trivial character
        let g = AbelianPresentation { orders: vec![2, 2] };
        let subs = enumerate_subgroups(&g);
        let whole = subs
            .iter()
            .find(|m| m.diagonal() == vec![1, 1])
            .expect("full group");
        let chi = character_for_subgroup(&g, whole).unwrap();
        assert_eq!(chi.order, 1);
        // trivial subgroup of Klein group -> non-cyclic quotient
        let triv = subs
            .iter()
            .find(|m| m.diagonal() == vec![2, 2])
            .expect("trivial subgroup");
        assert!(matches!(
            character_for_subgroup(&g, triv),
            Err(Error::NonCyclicQuotient)
        ));
        // order-2 subgroups -> order-2 characters with the right kernel
        let mut seen = 0;
        for m in &subs {
            let prod: i64 = m.diagonal().iter().product();
            if prod == 2 {
                // index-2 subgroup
                let chi = character_for_subgroup(&g, m).unwrap();
                assert_eq!(chi.order, 2);
                // kernel check by evaluation on all 4 elements
                let mut kernel = Vec::new();
                for x0 in 0..2i64 {
                    for x1 in 0..2i64 {
                        let exp = (chi.exps[0] * x0 + chi.exps[1] * x1).rem_euclid(2);
                        if exp == 0 {
                            kernel.push((x0, x1));
                        }
                    }
                }
                assert_eq!(kernel.len(), 2);
                // members of H: columns of m reduced mod orders
                for j in 0..2 {
                    let col = ((m[(0, j)]).rem_euclid(2), (m[(1, j)]).rem_euclid(2));
                    assert!(kernel.contains(&col), "column {col:?} not in kernel");
                }
                seen += 1;
            }
        }
        assert_eq!(seen, 3);
    }
}
