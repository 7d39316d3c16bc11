use num_integer::Integer;
use num_traits::Signed;

/// Smith normal form `U · M · V = D` with unimodular `U`, `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf<I> {
    pub u: Vec<Vec<I>>,
    pub d: Vec<Vec<I>>,
    pub v: Vec<Vec<I>>,
}

impl<I: Integer + Signed + Clone> Snf<I> {
    /// Nonzero diagonal entries, each dividing the next.
    pub fn invariant_factors(&self) -> Vec<I> {
        let k = self.d.len().min(self.d.first().map_or(0, |r| r.len()));
        (0..k)
            .map(|i| self.d[i][i].clone())
            .filter(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

fn ident<I: Integer + Clone>(n: usize) -> Vec<Vec<I>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { I::one() } else { I::zero() })
                .collect()
        })
        .collect()
}

struct Work<I> {
    a: Vec<Vec<I>>,
    u: Vec<Vec<I>>,
    v: Vec<Vec<I>>,
}

impl<I: Integer + Signed + Clone> Work<I> {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.a.iter_mut().chain(self.v.iter_mut()) {
            r.swap(i, j);
        }
    }

    /// row_i -= q * row_j
    fn row_axpy(&mut self, i: usize, j: usize, q: &I) {
        for m in [&mut self.a, &mut self.u] {
            for c in 0..m[i].len() {
                let x = m[j][c].clone() * q.clone();
                m[i][c] = m[i][c].clone() - x;
            }
        }
    }

    /// col_i -= q * col_j
    fn col_axpy(&mut self, i: usize, j: usize, q: &I) {
        for m in [&mut self.a, &mut self.v] {
            for r in m.iter_mut() {
                let x = r[j].clone() * q.clone();
                r[i] = r[i].clone() - x;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for x in m[i].iter_mut() {
                *x = -x.clone();
            }
        }
    }

    fn smallest_from(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.len() {
            for j in t..self.a[i].len() {
                if self.a[i][j].is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => self.a[i][j].abs() < self.a[bi][bj].abs(),
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        best
    }
}

/// Smith normal form by elementary row and column operations, always pivoting
/// on the nonzero entry of smallest absolute value.
pub fn smith_normal_form<I: Integer + Signed + Clone>(m: &[Vec<I>]) -> Snf<I> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = Work {
        a: m.to_vec(),
        u: ident(rows),
        v: ident(cols),
    };

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = w.smallest_from(t) else {
            break;
        };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !w.a[i][t].is_zero() {
                    let q = w.a[i][t].div_floor(&w.a[t][t]);
                    w.row_axpy(i, t, &q);
                    if !w.a[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !w.a[t][j].is_zero() {
                    let q = w.a[t][j].div_floor(&w.a[t][t]);
                    w.col_axpy(j, t, &q);
                    if !w.a[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // a remainder smaller than the pivot appeared in row/column t
                let (bi, bj) = (t..rows)
                    .map(|i| (i, t))
                    .chain((t..cols).map(|j| (t, j)))
                    .filter(|&(i, j)| !w.a[i][j].is_zero())
                    .min_by(|&(a, b), &(c, d)| w.a[a][b].abs().cmp(&w.a[c][d].abs()))
                    .unwrap();
                w.swap_rows(t, bi);
                w.swap_cols(t, bj);
                continue;
            }
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !w.a[i][j].is_multiple_of(&w.a[t][t]));
            match offender {
                Some((i, _)) => {
                    let minus_one = -I::one();
                    w.row_axpy(t, i, &minus_one);
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
    }
    Snf {
        u: w.u,
        d: w.a,
        v: w.v,
    }
}
