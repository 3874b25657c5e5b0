use row_allocator::{ComputeRow, Decoder, Wordline};

use crate::op::{MicroOp, Operand};

fn wl_bit(w: Wordline) -> u16 {
    1 << (w.row.index() * 2 + w.negated as usize)
}

fn entry_mask(decoder: &Decoder, e: usize) -> u16 {
    decoder.entry(e).iter().map(|&w| wl_bit(w)).fold(0, |a, b| a | b)
}

fn row_mask(decoder: &Decoder, e: usize) -> u8 {
    decoder.entry(e).iter().map(|w| 1u8 << w.row.index()).fold(0, |a, b| a | b)
}

/// Smallest set of decoder entries whose wordlines partition `mask`.
pub fn exact_cover(decoder: &Decoder, mask: u16) -> Option<Vec<u8>> {
    let masks: Vec<u16> = (0..decoder.entries().len()).map(|e| entry_mask(decoder, e)).collect();
    let mut best: Vec<Option<(u8, u8)>> = vec![None; 1 << 12];
    best[0] = Some((0, 0));
    for m in 1u16..(1 << 12) {
        if m & !mask != 0 {
            continue;
        }
        let low = m & m.wrapping_neg();
        for (e, &em) in masks.iter().enumerate() {
            if em & low == 0 || em & !m != 0 {
                continue;
            }
            if let Some((c, _)) = best[(m & !em) as usize] {
                if best[m as usize].is_none_or(|b| c + 1 < b.0) {
                    best[m as usize] = Some((c + 1, e as u8));
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut m = mask;
    while m != 0 {
        let (_, e) = best[m as usize]?;
        out.push(e);
        m &= !masks[e as usize];
    }
    Some(out)
}

/// Merges a run of copies from one source into fewer multi-row copies.
fn merge_run(decoder: &Decoder, run: &[MicroOp]) -> Option<Vec<MicroOp>> {
    let MicroOp::Aap { src, .. } = run[0] else { return None };
    let src_rows = src.b_entry().map_or(0, |e| row_mask(decoder, e as usize));
    let mut others = Vec::new();
    let mut rows = 0u8;
    let mut wls = 0u16;
    let mut b_count = 0;
    for op in run {
        let MicroOp::Aap { dst, .. } = *op else { return None };
        match dst.b_entry() {
            Some(e) => {
                let r = row_mask(decoder, e as usize);
                if r & (rows | src_rows) != 0 {
                    return None;
                }
                rows |= r;
                wls |= entry_mask(decoder, e as usize);
                b_count += 1;
            }
            None => others.push(*op),
        }
    }
    let cover = exact_cover(decoder, wls)?;
    if cover.len() >= b_count {
        return None;
    }
    others.extend(cover.into_iter().map(|e| MicroOp::Aap { dst: Operand::Reg(e), src }));
    Some(others)
}

/// Merges same-source copies into multi-row copies and folds an
/// activation into the copy that immediately re-reads its triple.
pub fn coalesce(ops: &[MicroOp]) -> Vec<MicroOp> {
    coalesce_with(ops, &Decoder::default())
}

pub fn coalesce_with(ops: &[MicroOp], decoder: &Decoder) -> Vec<MicroOp> {
    let mut cur = ops.to_vec();
    loop {
        let mut out = Vec::with_capacity(cur.len());
        let mut i = 0;
        while i < cur.len() {
            if let MicroOp::Ap { src: e } = cur[i] {
                if let Some(MicroOp::Aap { src, .. }) = cur.get(i + 1) {
                    if *src == e {
                        i += 1;
                        continue;
                    }
                }
            }
            if let MicroOp::Aap { src, .. } = cur[i] {
                let mut j = i + 1;
                while matches!(cur.get(j), Some(MicroOp::Aap { src: s, .. }) if *s == src) {
                    j += 1;
                }
                if j - i > 1 {
                    if let Some(m) = merge_run(decoder, &cur[i..j]) {
                        out.extend(m);
                        i = j;
                        continue;
                    }
                }
                out.extend_from_slice(&cur[i..j]);
                i = j;
                continue;
            }
            out.push(cur[i]);
            i += 1;
        }
        if out == cur {
            return out;
        }
        cur = out;
    }
}

/// Rows a B-group operand touches.
pub(crate) fn operand_rows(decoder: &Decoder, o: Operand) -> Vec<ComputeRow> {
    o.b_entry().map(|e| decoder.entry(e as usize).iter().map(|w| w.row).collect()).unwrap_or_default()
}
