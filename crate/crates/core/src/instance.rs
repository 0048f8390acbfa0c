//! Random 1-in-k formulas and their text format.
//!
//! Variables are 0-based in memory and 1-based in the text format:
//!
//! ```text
//! # optional comments
//! p ec <n> <m> <k>
//! 1 2 3
//! ...
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::index;

use crate::error::{EcError, Result};
use crate::rng::{splitmix64, RngSpec};

/// Variable index, 0-based.
pub type Var = u32;

/// A multiset of k-subsets of `0..n`. Each clause is stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EcInstance {
    n: usize,
    k: usize,
    members: Vec<Var>,
}

impl EcInstance {
    /// Builds an instance from 0-based clauses. Clauses are sorted; they
    /// must hold exactly `k` distinct variables below `n`.
    pub fn new<C: AsRef<[usize]>>(n: usize, k: usize, clauses: &[C]) -> Result<Self> {
        if k < 3 {
            return Err(EcError::invalid(format!("clause width k={k} must be at least 3")));
        }
        if n == 0 {
            return Err(EcError::invalid("n must be positive"));
        }
        if n > Var::MAX as usize {
            return Err(EcError::invalid(format!("n={n} exceeds the variable index range")));
        }
        let mut members = Vec::with_capacity(clauses.len() * k);
        for (i, clause) in clauses.iter().enumerate() {
            let clause = clause.as_ref();
            if clause.len() != k {
                return Err(EcError::invalid(format!(
                    "clause {i} has {} members, expected {k}",
                    clause.len()
                )));
            }
            let mut sorted: Vec<usize> = clause.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(EcError::invalid(format!("clause {i} repeats a variable")));
            }
            if let Some(&v) = sorted.last() {
                if v >= n {
                    return Err(EcError::invalid(format!("clause {i} mentions variable {v} >= n={n}")));
                }
            }
            members.extend(sorted.into_iter().map(|v| v as Var));
        }
        Ok(EcInstance { n, k, members })
    }

    /// Same as [`EcInstance::new`] with 1-based variable indices.
    pub fn from_one_based<C: AsRef<[usize]>>(n: usize, k: usize, clauses: &[C]) -> Result<Self> {
        let shifted: Vec<Vec<usize>> = clauses
            .iter()
            .map(|c| {
                c.as_ref()
                    .iter()
                    .map(|&v| {
                        v.checked_sub(1)
                            .ok_or_else(|| EcError::invalid("variable index 0 in 1-based clause"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::new(n, k, &shifted)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of clauses.
    pub fn m(&self) -> usize {
        self.members.len() / self.k
    }

    pub fn clause(&self, i: usize) -> &[Var] {
        &self.members[i * self.k..(i + 1) * self.k]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Var]> + '_ {
        self.members.chunks_exact(self.k)
    }

    /// Stable 64-bit fingerprint of `(n, k, clauses)`.
    pub fn fingerprint(&self) -> u64 {
        let mut h = splitmix64(self.n as u64 ^ ((self.k as u64) << 48));
        for &v in &self.members {
            h = splitmix64(h ^ v as u64);
        }
        h
    }

    /// For each variable, the indices of the clauses containing it.
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.n];
        for (ci, clause) in self.clauses().enumerate() {
            for &v in clause {
                occ[v as usize].push(ci);
            }
        }
        occ
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.members.len() * 7);
        writeln!(s, "p ec {} {} {}", self.n, self.m(), self.k).unwrap();
        for clause in self.clauses() {
            let mut first = true;
            for &v in clause {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{}", v + 1).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut clauses: Vec<Vec<usize>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| EcError::Parse { line: line_no, message };
            match header {
                None => {
                    let fields: Vec<&str> = trimmed.split_whitespace().collect();
                    if fields.len() != 5 || fields[0] != "p" || fields[1] != "ec" {
                        return Err(parse_err(format!("expected `p ec <n> <m> <k>`, got `{trimmed}`")));
                    }
                    let num = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|e| parse_err(format!("bad integer `{s}`: {e}")))
                    };
                    header = Some((num(fields[2])?, num(fields[3])?, num(fields[4])?));
                }
                Some((_, _, k)) => {
                    let clause = trimmed
                        .split_whitespace()
                        .map(|s| {
                            s.parse::<usize>()
                                .map_err(|e| parse_err(format!("bad integer `{s}`: {e}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if clause.len() != k {
                        return Err(parse_err(format!("expected {k} indices, got {}", clause.len())));
                    }
                    clauses.push(clause);
                }
            }
        }
        let (n, m, k) = header.ok_or(EcError::Parse {
            line: 0,
            message: "missing `p ec` header".into(),
        })?;
        if clauses.len() != m {
            return Err(EcError::Parse {
                line: 0,
                message: format!("header announces {m} clauses, found {}", clauses.len()),
            });
        }
        Self::from_one_based(n, k, &clauses)
    }
}

/// Draws `m` clauses independently and uniformly from all k-subsets of `0..n`.
pub fn generate_instance(n: usize, m: usize, k: usize, rng: &RngSpec) -> Result<EcInstance> {
    if k < 3 {
        return Err(EcError::invalid(format!("clause width k={k} must be at least 3")));
    }
    if n == 0 || (m > 0 && k > n) {
        return Err(EcError::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if n > Var::MAX as usize {
        return Err(EcError::invalid(format!("n={n} exceeds the variable index range")));
    }
    let mut rng = rng.rng();
    let mut members = Vec::with_capacity(m * k);
    let mut buf: Vec<Var> = Vec::with_capacity(k);
    for _ in 0..m {
        buf.clear();
        buf.extend(index::sample(&mut rng, n, k).into_iter().map(|v| v as Var));
        buf.sort_unstable();
        members.extend_from_slice(&buf);
    }
    Ok(EcInstance { n, k, members })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_one_triple_on_three_variables() {
        let inst = generate_instance(3, 1, 3, &RngSpec::new(99, 0)).unwrap();
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.clause(0), &[0, 1, 2]);
    }

    #[test]
    fn empty_formula() {
        let inst = generate_instance(10, 0, 3, &RngSpec::new(1, 0)).unwrap();
        assert_eq!(inst.m(), 0);
        assert_eq!(inst.clauses().count(), 0);
    }

    #[test]
    fn k_larger_than_n_is_rejected() {
        assert!(matches!(
            generate_instance(2, 1, 3, &RngSpec::new(1, 0)),
            Err(EcError::InvalidParameters(_))
        ));
    }

    #[test]
    fn new_validates_clauses() {
        assert!(EcInstance::new(3, 3, &[[0, 1, 1]]).is_err());
        assert!(EcInstance::new(3, 3, &[[0, 1, 3]]).is_err());
        assert!(EcInstance::new(4, 3, &[vec![0, 1]]).is_err());
        let inst = EcInstance::new(4, 3, &[[3, 0, 2]]).unwrap();
        assert_eq!(inst.clause(0), &[0, 2, 3]);
    }

    #[test]
    fn duplicates_are_kept() {
        let inst = EcInstance::from_one_based(3, 3, &[[1, 2, 3], [3, 2, 1]]).unwrap();
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.clause(0), inst.clause(1));
    }

    #[test]
    fn text_format() {
        let inst = EcInstance::from_one_based(5, 3, &[[3, 1, 2], [5, 4, 1]]).unwrap();
        assert_eq!(inst.to_text(), "p ec 5 2 3\n1 2 3\n1 4 5\n");
        let parsed = EcInstance::parse_text("# comment\np ec 5 2 3\n1 2 3\n# mid\n5 4 1\n").unwrap();
        assert_eq!(parsed, inst);
    }

    #[test]
    fn text_errors() {
        assert!(matches!(EcInstance::parse_text("p cnf 3 1 3\n1 2 3\n"), Err(EcError::Parse { .. })));
        assert!(matches!(EcInstance::parse_text("p ec 3 2 3\n1 2 3\n"), Err(EcError::Parse { .. })));
        assert!(matches!(EcInstance::parse_text("p ec 3 1 3\n1 2\n"), Err(EcError::Parse { .. })));
        assert!(EcInstance::parse_text("p ec 3 1 3\n0 1 2\n").is_err());
        assert!(EcInstance::parse_text("").is_err());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_instance(50, 40, 3, &RngSpec::new(5, 2)).unwrap();
        let b = generate_instance(50, 40, 3, &RngSpec::new(5, 2)).unwrap();
        let c = generate_instance(50, 40, 3, &RngSpec::new(5, 3)).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a, c);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn triples_are_uniform() {
        // Chi-square over the C(10,3) = 120 cells; df = 119.
        let inst = generate_instance(10, 100_000, 3, &RngSpec::new(2024, 0)).unwrap();
        let mut counts = std::collections::HashMap::new();
        for c in inst.clauses() {
            *counts.entry(c.to_vec()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 120);
        let expected = 100_000.0 / 120.0;
        let chi2: f64 = counts
            .values()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        // mean 119, sd sqrt(238) ~ 15.4; allow 3 sd.
        assert!(chi2 < 119.0 + 3.0 * 238.0f64.sqrt(), "chi2 = {chi2}");
        for &o in counts.values() {
            let p: f64 = 1.0 / 120.0;
            let se = (100_000.0 * p * (1.0 - p)).sqrt();
            assert!(((o as f64) - expected).abs() <= 4.0 * se);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_roundtrip(n in 3usize..40, m in 0usize..30, seed in any::<u64>()) {
            let inst = generate_instance(n, m, 3, &RngSpec::new(seed, 0)).unwrap();
            let text = inst.to_text();
            let back = EcInstance::parse_text(&text).unwrap();
            prop_assert_eq!(&back, &inst);
            prop_assert_eq!(back.to_text(), text);
            for c in inst.clauses() {
                prop_assert!(c.windows(2).all(|w| w[0] < w[1]));
                prop_assert!((c[2] as usize) < n);
            }
        }
    }
}
