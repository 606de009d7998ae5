//! Cut-and-choose: splitting a bundle into two pieces that are EFX for two agents who
//! share the cutter's valuation, then letting a second agent pick.

use crate::error::{Error, Result};
use crate::multigraph::EdgeId;
use crate::valuation::{Bundle, Valuation, TABLE_MAX_EDGES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub piece1: Bundle,
    pub piece2: Bundle,
    /// 0 for `piece1`, 1 for `piece2`; 0 when indifferent.
    pub cutter_pref: usize,
    pub cutter_indifferent: bool,
}

impl CutResult {
    pub fn piece(&self, idx: usize) -> &Bundle {
        if idx == 0 {
            &self.piece1
        } else {
            &self.piece2
        }
    }
}

/// Neither piece is worth less to `val` than the other piece minus any single good.
pub fn is_efx_split(val: &Valuation, a: &Bundle, b: &Bundle) -> bool {
    let one_way = |own: &Bundle, other: &Bundle| {
        let mine = val.value(own);
        other
            .iter()
            .all(|&x| mine >= val.value_of(other.iter().copied().filter(|&g| g != x)))
    };
    one_way(a, b) && one_way(b, a)
}

/// Splits `bundle` into two pieces that are EFX for identical agents valuing like
/// `cutter`.
///
/// Cancellable cutters use the greedy split: the poorer piece (ties to `piece1`) takes
/// the remaining good of largest marginal value (ties to the lowest id). Table cutters
/// have no such guarantee, so the first EFX split in mask order is taken instead (bit
/// `i` set sends the `i`-th good to `piece2`).
pub fn cac(cutter: &Valuation, bundle: &Bundle) -> Result<CutResult> {
    let (piece1, piece2) = match cutter {
        Valuation::Table(_) => exhaustive_split(cutter, bundle)?,
        _ => greedy_split(cutter, bundle),
    };
    let (v1, v2) = (cutter.value(&piece1), cutter.value(&piece2));
    Ok(CutResult {
        cutter_pref: usize::from(v2 > v1),
        cutter_indifferent: v1 == v2,
        piece1,
        piece2,
    })
}

fn greedy_split(cutter: &Valuation, bundle: &Bundle) -> (Bundle, Bundle) {
    let mut pieces = [Bundle::new(), Bundle::new()];
    let mut worth = [0u64, 0u64];
    let mut remaining: Vec<EdgeId> = bundle.iter().copied().collect();
    while !remaining.is_empty() {
        let target = usize::from(worth[1] < worth[0]);
        let mut best: Option<(usize, u64)> = None;
        for (i, &g) in remaining.iter().enumerate() {
            let v = cutter.value_of(pieces[target].iter().copied().chain([g]));
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.expect("remaining is nonempty");
        pieces[target].insert(remaining.remove(i));
        worth[target] = v;
    }
    let [a, b] = pieces;
    (a, b)
}

fn exhaustive_split(cutter: &Valuation, bundle: &Bundle) -> Result<(Bundle, Bundle)> {
    let goods: Vec<EdgeId> = bundle.iter().copied().collect();
    if goods.len() > TABLE_MAX_EDGES {
        return Err(Error::Capacity {
            what: "goods in an exhaustive cut",
            actual: goods.len() as u128,
            limit: TABLE_MAX_EDGES as u128,
        });
    }
    for mask in 0..1usize << goods.len() {
        let (mut a, mut b) = (Bundle::new(), Bundle::new());
        for (i, &g) in goods.iter().enumerate() {
            if mask >> i & 1 == 1 {
                b.insert(g);
            } else {
                a.insert(g);
            }
        }
        if is_efx_split(cutter, &a, &b) {
            return Ok((a, b));
        }
    }
    // Monotone valuations always admit an EFX split for two identical agents.
    Err(Error::Precondition(
        "cutter valuation admits no EFX split; is it monotone?".into(),
    ))
}

/// Result of one agent cutting and another choosing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Choice {
    pub cut: CutResult,
    pub chooser_piece: Bundle,
    pub cutter_piece: Bundle,
    /// The chooser's pick is also the piece the cutter prefers.
    pub same_preference: bool,
}

impl Choice {
    /// The piece the cutter prefers, with ties broken away from the chooser's pick.
    pub fn cutter_preferred(&self) -> &Bundle {
        if self.same_preference {
            &self.chooser_piece
        } else {
            &self.cutter_piece
        }
    }
}

/// `cutter` splits `bundle` via [`cac`]; `chooser` takes its strictly preferred piece.
///
/// Ties: an indifferent chooser takes the piece the cutter does not prefer; when both
/// are indifferent the chooser takes `piece2`. When the cutter alone is indifferent, its
/// preferred piece is reported as the one the chooser did not take.
pub fn cut_and_choose(cutter: &Valuation, chooser: &Valuation, bundle: &Bundle) -> Result<Choice> {
    let cut = cac(cutter, bundle)?;
    let (h1, h2) = (chooser.value(&cut.piece1), chooser.value(&cut.piece2));
    let (pick, same) = if h1 != h2 {
        let pick = usize::from(h2 > h1);
        (pick, !cut.cutter_indifferent && cut.cutter_pref == pick)
    } else if !cut.cutter_indifferent {
        (1 - cut.cutter_pref, false)
    } else {
        (1, false)
    };
    Ok(Choice {
        chooser_piece: cut.piece(pick).clone(),
        cutter_piece: cut.piece(1 - pick).clone(),
        same_preference: same,
        cut,
    })
}
