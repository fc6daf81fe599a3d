use std::collections::HashMap;
use std::sync::OnceLock;

/// Monomial bookkeeping for truncated Taylor polynomials in `nvars` variables.
///
/// Monomials are stored in graded order: every monomial of total degree `d`
/// precedes every monomial of degree `d + 1`, so a polynomial truncated at
/// order `k` is a prefix of length `len(k)` of one of higher order.
#[derive(Debug)]
pub struct Space {
    nvars: usize,
    max_order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `len[k]` = number of monomials of degree <= k.
    len: Vec<usize>,
    /// Product table (a, b, a*b), sorted by the degree of a*b.
    mul: Vec<(u32, u32, u32)>,
    /// `mul_len[k]` = number of products whose result has degree <= k.
    mul_len: Vec<usize>,
    /// Per variable: (source, target, factor) so that d/dv of the source
    /// monomial is `factor` times the target; sorted by target degree.
    diff: Vec<Vec<(u32, u32, f64)>>,
    /// Per variable: `diff_len[v][k]` = entries with target degree <= k.
    diff_len: Vec<Vec<usize>>,
    /// `factorial[m]` = prod of exps[m][v]! (turns coefficients into partials).
    factorial: Vec<f64>,
}

pub const FIELD_VARS: usize = 4;
const FIELD_MAX_ORDER: usize = 8;
const SERIES_MAX_ORDER: usize = 16;

static FIELD: OnceLock<Space> = OnceLock::new();
static SERIES: OnceLock<Space> = OnceLock::new();

impl Space {
    /// The joint (x¹, x², y¹, y²) space.
    pub fn field() -> &'static Space {
        FIELD.get_or_init(|| Space::build(FIELD_VARS, FIELD_MAX_ORDER))
    }

    /// The one-variable space used for univariate series (phi and friends).
    pub fn series() -> &'static Space {
        SERIES.get_or_init(|| Space::build(1, SERIES_MAX_ORDER))
    }

    fn build(nvars: usize, max_order: usize) -> Space {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut len = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            let mut level = Vec::new();
            compositions(nvars, d, &mut vec![0u8; nvars], 0, &mut level);
            // descending lexicographic within a degree: x1 before x2 ...
            level.sort_by(|a, b| b.cmp(a));
            exps.extend(level);
            len.push(exps.len());
        }
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut mul = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if degree[a] + degree[b] > max_order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(p, q)| p + q).collect();
                mul.push((a as u32, b as u32, index[&sum] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, c)| degree[c as usize]);
        let mul_len = (0..=max_order)
            .map(|k| mul.partition_point(|&(_, _, c)| degree[c as usize] <= k))
            .collect();

        let mut diff = Vec::with_capacity(nvars);
        let mut diff_len = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut table = Vec::new();
            for (t, et) in exps.iter().enumerate() {
                if degree[t] + 1 > max_order {
                    continue;
                }
                let mut es = et.clone();
                es[v] += 1;
                table.push((index[&es] as u32, t as u32, es[v] as f64));
            }
            table.sort_by_key(|&(_, t, _)| degree[t as usize]);
            let lens = (0..=max_order)
                .map(|k| table.partition_point(|&(_, t, _)| degree[t as usize] <= k))
                .collect();
            diff.push(table);
            diff_len.push(lens);
        }

        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&p| fact(p as usize)).product())
            .collect();

        Space {
            nvars,
            max_order,
            exps,
            degree,
            index,
            len,
            mul,
            mul_len,
            diff,
            diff_len,
            factorial,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of coefficients of a polynomial truncated at `order`.
    pub fn len(&self, order: usize) -> usize {
        self.len[order]
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.degree[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    pub(crate) fn products(&self, order: usize) -> &[(u32, u32, u32)] {
        &self.mul[..self.mul_len[order]]
    }

    pub(crate) fn derivative_table(&self, var: usize, order: usize) -> &[(u32, u32, f64)] {
        &self.diff[var][..self.diff_len[var][order]]
    }

    pub(crate) fn factorial(&self, idx: usize) -> f64 {
        self.factorial[idx]
    }
}

fn compositions(nvars: usize, remaining: usize, cur: &mut Vec<u8>, pos: usize, out: &mut Vec<Vec<u8>>) {
    if pos == nvars - 1 {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    for k in 0..=remaining {
        cur[pos] = k as u8;
        compositions(nvars, remaining - k, cur, pos + 1, out);
    }
}

pub(crate) fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
