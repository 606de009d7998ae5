//! Resolving one structure: a root, its neighbours to the right, and all goods between
//! them. Shared by the bipartite and the chromatic solver.

use crate::allocation::Allocation;
use crate::error::Result;
use crate::instance::Instance;
use crate::multigraph::Agent;
use crate::partition::cut_and_choose;
use crate::valuation::Bundle;

use super::trace::{Branch, TraceEvent, Transfer};

/// The loop between a root and one right neighbour, cut by the neighbour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighbourCut {
    pub neighbour: Agent,
    pub loop_goods: Bundle,
    /// The piece the root prefers.
    pub root_piece: Bundle,
    /// The piece the neighbour prefers; differs from `root_piece` whenever either side
    /// is indifferent.
    pub neighbour_piece: Bundle,
}

impl NeighbourCut {
    pub fn same_piece(&self) -> bool {
        self.root_piece == self.neighbour_piece
    }

    fn complement(&self, piece: &Bundle) -> Bundle {
        self.loop_goods.difference(piece).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub root: Agent,
    pub right_neighbours: Vec<Agent>,
    pub favourite: Agent,
    pub ordinary: Vec<Agent>,
    /// One cut per right neighbour, in the order of `right_neighbours`.
    pub cuts: Vec<NeighbourCut>,
    /// Goods left over from the ordinary neighbours' loops.
    pub leftover: Bundle,
}

impl Structure {
    /// Has every right neighbour cut its loop with the root, then picks the favourite:
    /// the neighbour whose cut offers the root the most (ties to the lowest index).
    /// Returns `None` when the root has no right neighbours.
    pub fn build(
        inst: &Instance,
        root: Agent,
        right_neighbours: Vec<Agent>,
    ) -> Result<Option<Self>> {
        if right_neighbours.is_empty() {
            return Ok(None);
        }
        let g = inst.graph();
        let root_val = inst.valuation(root);
        let mut cuts = Vec::with_capacity(right_neighbours.len());
        for &w in &right_neighbours {
            let loop_goods: Bundle = g.parallel_slice(root, w).iter().copied().collect();
            let choice = cut_and_choose(inst.valuation(w), root_val, &loop_goods)?;
            cuts.push(NeighbourCut {
                neighbour: w,
                neighbour_piece: choice.cutter_preferred().clone(),
                root_piece: choice.chooser_piece,
                loop_goods,
            });
        }
        let mut fav_idx = 0;
        let mut fav_value = root_val.value(&cuts[0].root_piece);
        for (i, c) in cuts.iter().enumerate().skip(1) {
            let v = root_val.value(&c.root_piece);
            if v > fav_value {
                fav_idx = i;
                fav_value = v;
            }
        }
        let favourite = right_neighbours[fav_idx];
        let mut leftover = Bundle::new();
        let mut ordinary = Vec::new();
        for (i, c) in cuts.iter().enumerate() {
            if i != fav_idx {
                ordinary.push(c.neighbour);
                leftover.extend(c.complement(&c.neighbour_piece));
            }
        }
        Ok(Some(Structure {
            root,
            right_neighbours,
            favourite,
            ordinary,
            cuts,
            leftover,
        }))
    }

    fn favourite_cut(&self) -> &NeighbourCut {
        self.cuts
            .iter()
            .find(|c| c.neighbour == self.favourite)
            .expect("favourite is a right neighbour")
    }
}

/// Allocates every good of the structure rooted at `root` into `alloc`, keeping
/// whatever the root already holds (it passes to the favourite when the root keeps the
/// contested piece). Returns the trace event for this step.
pub(crate) fn resolve_structure(
    inst: &Instance,
    alloc: &mut Allocation,
    root: Agent,
    right_neighbours: Vec<Agent>,
    phase: usize,
) -> Result<TraceEvent> {
    let Some(st) = Structure::build(inst, root, right_neighbours)? else {
        return Ok(TraceEvent::StructureResolved {
            phase,
            root,
            favourite: None,
            branch: Branch::NoRightNeighbours,
            snapshot: alloc.clone(),
            transfers: Vec::new(),
        });
    };
    for c in &st.cuts {
        if c.neighbour != st.favourite {
            alloc
                .bundle_mut(c.neighbour)
                .extend(c.neighbour_piece.iter().copied());
        }
    }
    let fav = st.favourite_cut();
    let f = st.favourite;
    let root_val = inst.valuation(root);
    let s = &fav.root_piece;
    let s_bar = fav.complement(s);
    let mut transfers = Vec::new();

    let branch = if fav.same_piece() {
        let rest = root_val.value_of_union([alloc.bundle(root), &s_bar, &st.leftover]);
        if root_val.value(s) > rest {
            let prior = std::mem::replace(alloc.bundle_mut(root), s.clone());
            transfers.extend(prior.iter().map(|&good| Transfer {
                good,
                from: root,
                to: f,
            }));
            let fb = alloc.bundle_mut(f);
            fb.extend(prior);
            fb.extend(s_bar);
            fb.extend(st.leftover.iter().copied());
            Branch::SameBundleKeep
        } else {
            let rb = alloc.bundle_mut(root);
            rb.extend(s_bar);
            rb.extend(st.leftover.iter().copied());
            alloc.bundle_mut(f).extend(s.iter().copied());
            Branch::SameBundleLeftovers
        }
    } else {
        let rb = alloc.bundle_mut(root);
        rb.extend(s.iter().copied());
        rb.extend(st.leftover.iter().copied());
        alloc
            .bundle_mut(f)
            .extend(fav.neighbour_piece.iter().copied());
        Branch::DifferentBundles
    };

    Ok(TraceEvent::StructureResolved {
        phase,
        root,
        favourite: Some(f),
        branch,
        snapshot: alloc.clone(),
        transfers,
    })
}
