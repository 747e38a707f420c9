//! Reader and writer for the alist sparse-matrix format.
//!
//! ```text
//! n m_rows
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m_rows row degrees>
//! <n lines: 1-based row indices of each column, 0-padded to max_col_degree>
//! <m_rows lines: 1-based column indices of each row, 0-padded to max_row_degree>
//! ```

use std::fmt::Write as _;

use super::ParityCheckCode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Reject matrices that are not full row rank (dense GF(2) elimination).
    pub check_rank: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { check_rank: true }
    }
}

pub fn load_alist(text: &[u8]) -> Result<ParityCheckCode> {
    load_alist_with(text, LoadOptions::default())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            let lineno = i + 1;
            self.last = lineno;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("expected a non-negative integer, found {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((lineno, nums));
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn expect_count(line: usize, nums: &[usize], count: usize, what: &str) -> Result<()> {
    if nums.len() == count {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            msg: format!("expected {count} {what}, found {}", nums.len()),
        })
    }
}

/// Reads one adjacency line: `degree` 1-based indices, optionally followed by
/// zero padding up to `max_degree`.
fn read_entries(
    line: usize,
    nums: &[usize],
    degree: usize,
    max_degree: usize,
    bound: usize,
) -> Result<Vec<usize>> {
    if nums.len() != degree && nums.len() != max_degree {
        return Err(Error::Parse {
            line,
            msg: format!(
                "expected {degree} entries (or {max_degree} with padding), found {}",
                nums.len()
            ),
        });
    }
    let mut out = Vec::with_capacity(degree);
    for (pos, &v) in nums.iter().enumerate() {
        if pos < degree {
            if v == 0 || v > bound {
                return Err(Error::Parse {
                    line,
                    msg: format!("index {v} out of range 1..={bound}"),
                });
            }
            if out.contains(&(v - 1)) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate index {v}"),
                });
            }
            out.push(v - 1);
        } else if v != 0 {
            return Err(Error::Parse {
                line,
                msg: format!("entry {v} beyond declared degree {degree} (padding must be 0)"),
            });
        }
    }
    Ok(out)
}

pub fn load_alist_with(text: &[u8], opts: LoadOptions) -> Result<ParityCheckCode> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse {
        line: 1 + text[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        msg: "input is not valid ASCII".into(),
    })?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let (l, dims) = lines.next_numbers("\"n m_rows\"")?;
    expect_count(l, &dims, 2, "values (n m_rows)")?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 || m >= n {
        return Err(Error::Parse {
            line: l,
            msg: format!("need 0 < m_rows < n, got n = {n}, m_rows = {m}"),
        });
    }
    let (l, maxes) = lines.next_numbers("maximum degrees")?;
    expect_count(l, &maxes, 2, "values (max_col_degree max_row_degree)")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);

    let (l, col_deg) = lines.next_numbers("column degrees")?;
    expect_count(l, &col_deg, n, "column degrees")?;
    if let Some(&d) = col_deg.iter().find(|&&d| d > max_col) {
        return Err(Error::Parse {
            line: l,
            msg: format!("column degree {d} exceeds declared maximum {max_col}"),
        });
    }
    let (l, row_deg) = lines.next_numbers("row degrees")?;
    expect_count(l, &row_deg, m, "row degrees")?;
    if let Some(&d) = row_deg.iter().find(|&&d| d > max_row) {
        return Err(Error::Parse {
            line: l,
            msg: format!("row degree {d} exceeds declared maximum {max_row}"),
        });
    }
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(Error::Parse {
            line: l,
            msg: "column and row degrees describe different edge counts".into(),
        });
    }

    let mut cols = Vec::with_capacity(n);
    for &d in &col_deg {
        let (l, nums) = lines.next_numbers("column adjacency")?;
        cols.push(read_entries(l, &nums, d, max_col, m)?);
    }
    let mut rows = Vec::with_capacity(m);
    let mut row_lines = Vec::with_capacity(m);
    for &d in &row_deg {
        let (l, nums) = lines.next_numbers("row adjacency")?;
        rows.push(read_entries(l, &nums, d, max_row, n)?);
        row_lines.push(l);
    }

    // Both views must describe the same matrix.
    let mut transposed = vec![Vec::new(); m];
    for (c, col) in cols.iter().enumerate() {
        for &r in col {
            transposed[r].push(c);
        }
    }
    for (r, row) in rows.iter().enumerate() {
        let mut a = row.clone();
        a.sort_unstable();
        if a != transposed[r] {
            return Err(Error::Parse {
                line: row_lines[r],
                msg: format!("row {} disagrees with the column lists", r + 1),
            });
        }
    }

    let code = ParityCheckCode::from_rows(n, rows)?;
    if opts.check_rank {
        let rank = code.rank();
        if rank < m {
            return Err(Error::RankDeficient { rank, rows: m });
        }
    }
    Ok(code)
}

pub fn write_alist(code: &ParityCheckCode) -> String {
    let (max_col, max_row) = (code.max_col_degree(), code.max_row_degree());
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", code.n(), code.m_rows());
    let _ = writeln!(out, "{max_col} {max_row}");
    let join =
        |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{}", join(&mut code.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut code.rows().iter().map(Vec::len)));
    for (list, width) in code
        .cols()
        .iter()
        .map(|c| (c, max_col))
        .chain(code.rows().iter().map(|r| (r, max_row)))
    {
        let padded = list
            .iter()
            .map(|&i| i + 1)
            .chain(std::iter::repeat(0))
            .take(width);
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::generate_gallager;
    use proptest::prelude::*;

    const TINY: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn loads_hand_written_matrix() {
        let code = load_alist(TINY.as_bytes()).unwrap();
        assert_eq!(code.n(), 3);
        assert_eq!(code.m_rows(), 2);
        assert_eq!(code.rows(), &[vec![0, 1], vec![1, 2]]);
        assert_eq!(write_alist(&code), TINY);
    }

    #[test]
    fn accepts_unpadded_lines() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";
        let code = load_alist(text.as_bytes()).unwrap();
        assert_eq!(code.cols()[1], vec![0, 1]);
    }

    #[test]
    fn empty_input_fails() {
        assert!(matches!(load_alist(b""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn zero_index_inside_degree_fails() {
        // column 1 declares degree 1 but lists index 0
        let text = "3 2\n2 2\n1 2 1\n2 2\n0 0\n1 2\n2 0\n1 2\n2 3\n";
        assert!(matches!(
            load_alist(text.as_bytes()),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn out_of_range_and_mismatch_fail() {
        let bad_index = "3 2\n2 2\n1 2 1\n2 2\n3 0\n1 2\n2 0\n1 2\n2 3\n";
        assert!(matches!(
            load_alist(bad_index.as_bytes()),
            Err(Error::Parse { line: 5, .. })
        ));
        let disagree = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 3\n2 3\n";
        assert!(matches!(
            load_alist(disagree.as_bytes()),
            Err(Error::Parse { line: 8, .. })
        ));
        let bad_degree = "3 2\n2 2\n1 2\n2 2\n";
        assert!(matches!(
            load_alist(bad_degree.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let truncated = "3 2\n2 2\n1 2 1\n2 2\n1 0\n";
        assert!(matches!(
            load_alist(truncated.as_bytes()),
            Err(Error::Parse { line: 6, .. })
        ));
    }

    #[test]
    fn rank_deficient_rejected_unless_skipped() {
        // three rows, third = first + second
        let text = "4 3\n2 2\n2 2 2 0\n2 2 2\n1 3\n1 2\n2 3\n0 0\n1 2\n2 3\n1 3\n";
        assert_eq!(
            load_alist(text.as_bytes()),
            Err(Error::RankDeficient { rank: 2, rows: 3 })
        );
        let code = load_alist_with(text.as_bytes(), LoadOptions { check_rank: false }).unwrap();
        assert_eq!(code.m_rows(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn write_then_load_reproduces_adjacency(seed in any::<u64>()) {
            let code = generate_gallager(120, 3, 6, seed).unwrap();
            let text = write_alist(&code);
            let back = load_alist_with(text.as_bytes(), LoadOptions { check_rank: false }).unwrap();
            prop_assert_eq!(&back, &code);
            prop_assert_eq!(write_alist(&back), text);
        }
    }
}
