//! The local view a particle observes during an activation.
//!
//! A view exposes exactly what the hardware model offers: which of the
//! twelve ports touch a particle, the announced label of each touched
//! neighbour, the label the neighbour gives to the shared link, and the
//! common-contact relation (for every two members of the closed
//! neighbourhood, which of their ports touch one same particle).  It
//! never contains absolute coordinates.
//!
//! All ports are the observing side's own current labels; a neighbour's
//! ports are that neighbour's current labels.

use std::collections::{BTreeMap, BTreeSet};

use crate::grid::{Coord, PortId};
use crate::orientation::Orientation;

/// A member of the closed neighbourhood: the particle itself or the
/// neighbour behind one of its ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Member {
    Here,
    At(PortId),
}

/// One fact of the common-contact relation: ports `ports.0` of
/// `members.0` and `ports.1` of `members.1` touch the same particle,
/// which announces `label`.
///
/// The shared particle is never one of the two members, but for a pair
/// of neighbours it may be the observer itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonEntry<L> {
    pub members: (Member, Member),
    pub ports: (PortId, PortId),
    pub label: L,
}

/// Everything a particle can observe locally.
#[derive(Clone, Debug)]
pub struct LocalView<L, E> {
    /// Which of the observer's ports touch a particle, by own label.
    pub occupied: [bool; 12],
    /// For each occupied port, the label the neighbour gives to its
    /// port on the shared link.
    pub peer_port: [Option<PortId>; 12],
    /// For each occupied port, the neighbour's announced label.
    pub neighbor_label: [Option<L>; 12],
    /// The common-contact relation over the closed neighbourhood.
    pub common: Vec<CommonEntry<L>>,
    /// Algorithm-specific extension data.
    pub ext: E,
}

impl<L: Clone, E> LocalView<L, E> {
    pub fn occupied_ports(&self) -> impl Iterator<Item = PortId> + '_ {
        PortId::ALL.into_iter().filter(|a| self.occupied[a.index()])
    }

    pub fn unoccupied_ports(&self) -> impl Iterator<Item = PortId> + '_ {
        PortId::ALL.into_iter().filter(|a| !self.occupied[a.index()])
    }

    pub fn degree(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Entries of the common-contact relation for one member pair, in
    /// either order.
    pub fn relation(&self, a: Member, b: Member) -> impl Iterator<Item = &CommonEntry<L>> {
        let key = (a.min(b), a.max(b));
        self.common.iter().filter(move |e| e.members == key)
    }
}

/// Builds the view of `center` from raw world data.
///
/// `occupied` lists every occupied vertex (at least those within two
/// steps of `center` matter); `orientation_of` gives each particle's
/// current port labelling and `label_of` its announced label.  The
/// occupancy is not required to be connected, which lets tests and
/// neighbourhood studies build views of arbitrary surroundings.
pub fn build_view<L: Clone + Ord, E>(
    center: Coord,
    occupied: &BTreeSet<Coord>,
    orientation_of: &impl Fn(Coord) -> Orientation,
    label_of: &impl Fn(Coord) -> L,
    ext: E,
) -> LocalView<L, E> {
    let own = orientation_of(center);
    let mut view = LocalView {
        occupied: [false; 12],
        peer_port: [None; 12],
        neighbor_label: [const { None }; 12],
        common: Vec::new(),
        ext,
    };

    let mut member_coords: Vec<(Member, Coord)> = vec![(Member::Here, center)];
    for l in PortId::ALL {
        let q = center.translate(own.port_direction(l)).expect("unit step");
        if occupied.contains(&q) {
            view.occupied[l.index()] = true;
            view.neighbor_label[l.index()] = Some(label_of(q));
            let q_orient = orientation_of(q);
            let back = q_orient
                .port_of_direction(center.delta_from(q))
                .expect("unit step");
            view.peer_port[l.index()] = Some(back);
            member_coords.push((Member::At(l), q));
        }
    }

    for (i, &(ma, pa)) in member_coords.iter().enumerate() {
        for &(mb, pb) in member_coords.iter().skip(i + 1) {
            // Shared contacts: particles touching both members.  For a
            // pair of neighbours this includes the observer itself.
            for x in pa.neighbors() {
                if x == pa || x == pb || !occupied.contains(&x) {
                    continue;
                }
                if !crate::grid::adjacent(x, pb) {
                    continue;
                }
                let port_a = orientation_of(pa)
                    .port_of_direction(x.delta_from(pa))
                    .expect("adjacent");
                let port_b = orientation_of(pb)
                    .port_of_direction(x.delta_from(pb))
                    .expect("adjacent");
                view.common.push(CommonEntry {
                    members: (ma, mb),
                    ports: (port_a, port_b),
                    label: label_of(x),
                });
            }
        }
    }
    view.common.sort_by(|a, b| {
        (a.members, a.ports)
            .cmp(&(b.members, b.ports))
            .then_with(|| a.label.cmp(&b.label))
    });
    view
}

/// Convenience map-based wrapper around [`build_view`].
pub fn build_view_from_maps<L: Clone + Ord, E>(
    center: Coord,
    orientations: &BTreeMap<Coord, Orientation>,
    labels: &BTreeMap<Coord, L>,
    ext: E,
) -> LocalView<L, E> {
    let occupied: BTreeSet<Coord> = labels.keys().copied().collect();
    build_view(
        center,
        &occupied,
        &|p| orientations.get(&p).copied().unwrap_or_default(),
        &|p| labels[&p].clone(),
        ext,
    )
}
