/// Case-insensitive Levenshtein distance with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().flat_map(char::to_lowercase).collect();
    let b: Vec<char> = b.chars().flat_map(char::to_lowercase).collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// The candidate closest to `target`; ties go to the lexicographically smallest.
pub fn closest<'c, I: IntoIterator<Item = &'c str>>(target: &str, candidates: I) -> Option<&'c str> {
    candidates
        .into_iter()
        .min_by(|x, y| edit_distance(x, target).cmp(&edit_distance(y, target)).then(x.cmp(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    // full-matrix DP, written independently of the two-row version above
    fn oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.to_lowercase().chars().collect();
        let b: Vec<char> = b.to_lowercase().chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + c);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn examples() {
        assert_eq!(edit_distance("name", "name"), 0);
        assert_eq!(edit_distance("name", ""), 4);
        assert_eq!(edit_distance("documentation", "name"), oracle("documentation", "name"));
        assert_eq!(edit_distance("documentation", "name"), 11);
        assert_eq!(edit_distance("Name", "nAME"), 0);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
    }

    #[test]
    fn agrees_with_matrix_oracle() {
        let words = ["", "a", "name", "Language", "language", "body", "activities", "artifacts", "documentation", "id"];
        for a in words {
            for b in words {
                assert_eq!(edit_distance(a, b), oracle(a, b), "{a} {b}");
            }
        }
    }

    #[test]
    fn closest_breaks_ties_lexicographically() {
        assert_eq!(closest("ab", ["ac", "aa", "zz"]), Some("aa"));
        assert_eq!(closest("x", std::iter::empty()), None);
    }
}
