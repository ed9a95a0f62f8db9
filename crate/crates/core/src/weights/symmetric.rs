//! Elementary symmetric polynomials and subset enumeration.

/// `σ_k(x)`, with `σ_0 = 1` and `σ_k = 0` for `k > n`.
pub fn elementary(x: &[f64], k: usize) -> f64 {
    if k > x.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, xi) in x.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] += xi * e[j - 1];
        }
    }
    e[k]
}

/// `σ_k` of `x` with coordinate `skip` removed, i.e. `∂σ_{k+1}/∂x_skip`.
pub fn elementary_without(x: &[f64], k: usize, skip: usize) -> f64 {
    let rest: Vec<f64> = x
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, v)| *v)
        .collect();
    elementary(&rest, k)
}

/// All `r`-element subsets of `{0, .., n-1}` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_matches_expansion() {
        let x = [2.0, 3.0, 5.0];
        assert_eq!(elementary(&x, 0), 1.0);
        assert_eq!(elementary(&x, 1), 10.0);
        assert_eq!(elementary(&x, 2), 6.0 + 10.0 + 15.0);
        assert_eq!(elementary(&x, 3), 30.0);
        assert_eq!(elementary(&x, 4), 0.0);
        assert_eq!(elementary_without(&x, 1, 0), 8.0);
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }
}
