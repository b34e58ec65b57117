//! SDPA sparse (`.dat-s`) reader and writer.
//!
//! SDPA solves `minimize cᵀx s.t. Σ F_i x_i - F_0 ⪰ 0`. A problem
//! `maximize objᵀz s.t. G_0 + Σ z_i G_i ⪰ 0` is written with `c = -obj`,
//! `F_0 = -G_0` and `F_i = G_i`. PSD blocks come first; all scalar
//! inequalities share one trailing diagonal block of negative size.

use std::fmt::Write as _;

use super::problem::{AffineRow, LmiBlock, SdpProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpaError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unexpected end of file while reading {what}")]
    Truncated { what: &'static str },
}

fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// Serializes a problem in SDPA sparse format.
pub fn write(p: &SdpProblem) -> String {
    let mut s = String::new();
    let diag = !p.ineqs.is_empty();
    let nblocks = p.blocks.len() + usize::from(diag);
    let _ = writeln!(s, "{}", p.nvars);
    let _ = writeln!(s, "{nblocks}");
    let mut sizes: Vec<String> = p.blocks.iter().map(|b| b.dim.to_string()).collect();
    if diag {
        sizes.push(format!("-{}", p.ineqs.len()));
    }
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = p.objective.iter().map(|v| num(-v)).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    for (bi, b) in p.blocks.iter().enumerate() {
        for (i, j, v) in b.constant.upper() {
            let _ = writeln!(s, "0 {} {} {} {}", bi + 1, i + 1, j + 1, num(-v));
        }
        for (&k, m) in &b.coefs {
            for (i, j, v) in m.upper() {
                let _ = writeln!(s, "{} {} {} {} {}", k + 1, bi + 1, i + 1, j + 1, num(v));
            }
        }
    }
    if diag {
        let bno = p.blocks.len() + 1;
        for (r, row) in p.ineqs.iter().enumerate() {
            if row.constant != 0.0 {
                let _ = writeln!(s, "0 {bno} {} {} {}", r + 1, r + 1, num(-row.constant));
            }
        }
        // grouped by matrix number, as SDPA readers commonly expect
        for k in 0..p.nvars {
            for (r, row) in p.ineqs.iter().enumerate() {
                if let Some(&v) = row.coefs.get(&k) {
                    let _ = writeln!(s, "{} {bno} {} {} {}", k + 1, r + 1, r + 1, num(v));
                }
            }
        }
    }
    s
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), SdpaError> {
        let t = self.items.get(self.pos).copied().ok_or(SdpaError::Truncated { what })?;
        self.pos += 1;
        Ok(t)
    }

    fn int(&mut self, what: &'static str) -> Result<i64, SdpaError> {
        let (line, t) = self.next(what)?;
        t.parse::<i64>()
            .or_else(|_| t.parse::<f64>().map(|v| v as i64))
            .map_err(|_| SdpaError::Malformed {
                line,
                msg: format!("expected integer for {what}, found `{t}`"),
            })
    }

    fn float(&mut self, what: &'static str) -> Result<f64, SdpaError> {
        let (line, t) = self.next(what)?;
        t.parse::<f64>().map_err(|_| SdpaError::Malformed {
            line,
            msg: format!("expected number for {what}, found `{t}`"),
        })
    }

    fn done(&self) -> bool {
        self.pos >= self.items.len()
    }
}

/// Parses SDPA sparse text. Comment lines starting with `"` or `*` and the
/// punctuation `{ } ( ) ,` are ignored.
pub fn read(text: &str) -> Result<SdpProblem, SdpaError> {
    let mut items = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim_start();
        if t.starts_with('"') || t.starts_with('*') {
            continue;
        }
        for tok in line
            .split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
            .filter(|s| !s.is_empty())
        {
            items.push((ln + 1, tok));
        }
    }
    let mut t = Tokens { items, pos: 0 };
    let m = t.int("mDIM")?;
    let nblock = t.int("nBLOCK")?;
    if m < 0 || nblock < 0 {
        return Err(SdpaError::Malformed {
            line: 1,
            msg: "negative dimension".into(),
        });
    }
    let m = m as usize;
    let mut sizes = Vec::with_capacity(nblock as usize);
    for _ in 0..nblock {
        sizes.push(t.int("block structure")?);
    }
    let mut objective = Vec::with_capacity(m);
    for _ in 0..m {
        objective.push(-t.float("objective")?);
    }
    // block slot: Psd(index into blocks) or Diag(offset into ineqs)
    enum Slot {
        Psd(usize),
        Diag(usize, usize),
    }
    let mut blocks = Vec::new();
    let mut ineqs: Vec<AffineRow> = Vec::new();
    let mut slots = Vec::new();
    for &sz in &sizes {
        if sz >= 0 {
            slots.push(Slot::Psd(blocks.len()));
            blocks.push(LmiBlock::new(sz as usize));
        } else {
            let k = (-sz) as usize;
            slots.push(Slot::Diag(ineqs.len(), k));
            ineqs.extend((0..k).map(|_| AffineRow::default()));
        }
    }
    while !t.done() {
        let mat = t.int("matrix number")?;
        let (line, _) = t.items[t.pos];
        let blk = t.int("block number")?;
        let i = t.int("row")?;
        let j = t.int("column")?;
        let v = t.float("value")?;
        let bad = |msg: &str| SdpaError::Malformed {
            line,
            msg: msg.into(),
        };
        if mat < 0 || mat as usize > m {
            return Err(bad("matrix number out of range"));
        }
        if blk < 1 || blk as usize > slots.len() {
            return Err(bad("block number out of range"));
        }
        if i < 1 || j < 1 {
            return Err(bad("indices are 1-based"));
        }
        let (i, j) = (i as usize - 1, j as usize - 1);
        match slots[blk as usize - 1] {
            Slot::Psd(b) => {
                let dim = blocks[b].dim;
                if i >= dim || j >= dim {
                    return Err(bad("entry outside block"));
                }
                if mat == 0 {
                    blocks[b].add(None, i, j, -v);
                } else {
                    blocks[b].add(Some(mat as usize - 1), i, j, v);
                }
            }
            Slot::Diag(off, k) => {
                if i != j || i >= k {
                    return Err(bad("diagonal block entry must be on the diagonal"));
                }
                let row = &mut ineqs[off + i];
                if mat == 0 {
                    row.constant -= v;
                } else {
                    *row.coefs.entry(mat as usize - 1).or_insert(0.0) += v;
                }
            }
        }
    }
    Ok(SdpProblem {
        nvars: m,
        objective,
        blocks,
        ineqs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SdpProblem {
        let mut b = LmiBlock::new(2);
        b.add(None, 0, 0, 1.0);
        b.add(Some(0), 0, 1, 1.0);
        b.add(Some(1), 1, 1, 1.0);
        let mut p = SdpProblem::new(2);
        p.objective = vec![-1.0, 0.0];
        p.blocks.push(b);
        let mut r = AffineRow {
            constant: 1.0,
            ..Default::default()
        };
        r.coefs.insert(1, -1.0);
        p.ineqs.push(r);
        p
    }

    #[test]
    fn header_layout() {
        let text = write(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "2");
        assert_eq!(lines[1], "2");
        assert_eq!(lines[2], "2 -1");
        assert_eq!(lines[3], "1.0000000000000000e0 0.0000000000000000e0");
        assert_eq!(lines[4], "0 1 1 1 -1.0000000000000000e0");
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        assert_eq!(read(&write(&p)).unwrap(), p);
    }

    #[test]
    fn reads_punctuated_input() {
        let text = "\"comment\n1\n1\n{2}\n{-1.0}\n0 1 1 1 -1\n0 1 2 2 -1\n1 1 1 2 1\n";
        let p = read(text).unwrap();
        assert_eq!(p.nvars, 1);
        assert_eq!(p.objective, vec![1.0]);
        assert_eq!(p.blocks[0].constant.get(1, 1), 1.0);
    }

    #[test]
    fn malformed_reports_line() {
        let err = read("1\n1\n2\n1\n0 3 1 1 1\n").unwrap_err();
        assert!(matches!(err, SdpaError::Malformed { line: 5, .. }), "{err:?}");
        assert!(matches!(read("1\n1\n"), Err(SdpaError::Truncated { .. })));
    }
}
