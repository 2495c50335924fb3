//! Narrowing operators: single projections, HC3 and HC4 revision, and the
//! directional consistency pass driven by a variable partition.

use crate::decompose::{Decomposition, Partition, Primitive, Slot, VarRef};
use crate::domain::IntervalBox;
use crate::expr::VarId;
use crate::interval::Interval;
use crate::propagate::Stats;

/// Current values of a primitive's variables: problem variables live in
/// `vars`, fresh variables in `fresh`.
pub struct Store<'a> {
    pub vars: &'a mut IntervalBox,
    pub fresh: &'a mut [Interval],
}

impl<'a> Store<'a> {
    pub fn new(vars: &'a mut IntervalBox, fresh: &'a mut [Interval]) -> Store<'a> {
        Store { vars, fresh }
    }

    pub fn get(&self, s: Slot) -> Interval {
        match s {
            Slot::Var(v) => self.vars[v],
            Slot::Fresh(i) => self.fresh[i],
            Slot::Const(c) => c,
        }
    }

    pub fn get_ref(&self, r: VarRef) -> Interval {
        self.get(r.into())
    }

    fn set(&mut self, s: Slot, v: Interval) {
        match s {
            Slot::Var(id) => self.vars[id] = v,
            Slot::Fresh(i) => self.fresh[i] = v,
            Slot::Const(_) => unreachable!("constants are never projected"),
        }
    }
}

fn values(prim: &Primitive, store: &Store) -> [Interval; 3] {
    let mut v = [Interval::EMPTY; 3];
    for (p, slot) in v.iter_mut().enumerate().take(prim.width()) {
        *slot = store.get(prim.slot(p));
    }
    v
}

/// Projection of `prim` onto the operand at position `pos` under the
/// current store, intersected with the operand's current value.
pub fn project(prim: &Primitive, pos: usize, store: &Store) -> Interval {
    prim.project(pos, &values(prim, store))
}

/// New value of the variable `x` after projecting `prim` onto every position
/// holding `x`. The store is left untouched.
pub fn hc3_revise_var(prim: &Primitive, x: VarRef, store: &Store) -> Interval {
    let mut vals = values(prim, store);
    let mut cur = store.get_ref(x);
    for pos in 0..prim.width() {
        if prim.slot(pos).var_ref() == Some(x) {
            vals[pos] = cur;
            cur = prim.project(pos, &vals);
            for (q, v) in vals.iter_mut().enumerate().take(prim.width()) {
                if prim.slot(q).var_ref() == Some(x) {
                    *v = cur;
                }
            }
        }
    }
    cur
}

/// Applies one projection. Returns `false` when it empties the target. A
/// changed problem variable is appended to `changed`.
pub fn apply_projection(
    prim: &Primitive,
    pos: usize,
    store: &mut Store,
    stats: &mut Stats,
    changed: &mut Vec<VarId>,
) -> bool {
    stats.projections += 1;
    let slot = prim.slot(pos);
    let old = store.get(slot);
    let vals = values(prim, store);
    let ground = prim.ground.get(pos).copied().unwrap_or(false);
    if !ground && prim.divisor(pos).is_some_and(|d| vals[d].lo() < 0.0 && vals[d].hi() > 0.0) {
        stats.split_divisions += 1;
    }
    let new = prim.project(pos, &vals);
    if new != old {
        store.set(slot, new);
        if let Slot::Var(v) = slot {
            changed.push(v);
        }
        if new.is_empty() {
            return false;
        }
    }
    true
}

/// One HC3 revision: projects `prim` onto each of its variable positions,
/// inputs left to right and then the output, reusing updated values.
pub fn hc3_revise(prim: &Primitive, store: &mut Store, stats: &mut Stats, changed: &mut Vec<VarId>) -> bool {
    stats.revise_calls += 1;
    for pos in 0..prim.width() {
        if prim.slot(pos).var_ref().is_some() && !apply_projection(prim, pos, store, stats, changed) {
            return false;
        }
    }
    true
}

/// One HC4revise pass over a decomposed constraint. Fresh variables are
/// reset to their initial values in `scratch` and the schedule is applied in
/// order. Returns `false` when a domain becomes empty.
pub fn hc4_revise(
    dec: &Decomposition,
    vars: &mut IntervalBox,
    scratch: &mut Vec<Interval>,
    stats: &mut Stats,
    changed: &mut Vec<VarId>,
) -> bool {
    stats.revise_calls += 1;
    scratch.clear();
    scratch.extend(dec.initial_fresh());
    let mut store = Store::new(vars, scratch);
    for &(pi, pos) in &dec.omega {
        if !apply_projection(&dec.primitives[pi], pos, &mut store, stats, changed) {
            return false;
        }
    }
    true
}

/// Result of HC4revise on a box, for callers that only need the new box.
pub fn hc4_revise_box(dec: &Decomposition, d: &IntervalBox) -> IntervalBox {
    let mut out = d.clone();
    let mut scratch = Vec::new();
    if !hc4_revise(dec, &mut out, &mut scratch, &mut Stats::default(), &mut Vec::new()) {
        return out.empty_like();
    }
    out
}

/// Directional bounds consistency with respect to the order induced by
/// `partition`. Blocks are processed last to first; for block `i` every
/// primitive whose scope contains block `i` and lies within blocks `0..=i`
/// is revised on its variables outside block `i`.
pub fn dbc(prims: &[Primitive], partition: &Partition, store: &mut Store, stats: &mut Stats) -> bool {
    let scopes: Vec<Vec<VarRef>> = prims.iter().map(Primitive::scope).collect();
    for i in (0..partition.blocks.len()).rev() {
        let block = &partition.blocks[i];
        for (prim, scope) in prims.iter().zip(&scopes) {
            let covers = block.iter().all(|v| scope.contains(v));
            let within = scope.iter().all(|v| partition.rank(*v).is_some_and(|r| r <= i));
            if !(covers && within) {
                continue;
            }
            for &x in scope.iter().filter(|v| !block.contains(v)) {
                stats.projections += 1;
                let new = hc3_revise_var(prim, x, store);
                store.set(x.into(), new);
                if new.is_empty() {
                    return false;
                }
            }
        }
    }
    true
}

/// Checks directional bounds consistency: for each primitive, every
/// variable with no predecessor in the primitive's scope is already bounds
/// consistent.
pub fn verify_directional(prims: &[Primitive], partition: &Partition, store: &Store) -> bool {
    prims.iter().all(|prim| {
        let scope = prim.scope();
        let ranks: Vec<Option<usize>> = scope.iter().map(|v| partition.rank(*v)).collect();
        let min = ranks.iter().flatten().min().copied();
        scope
            .iter()
            .zip(&ranks)
            .filter(|(_, r)| r.is_some() && *r == &min)
            .all(|(&x, _)| hc3_revise_var(prim, x, store) == store.get_ref(x))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::parser::parse;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn hc4revise_on_worked_example() {
        let p = parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let mut stats = Stats::default();
        let mut d = p.domains.clone();
        assert!(hc4_revise(&dec, &mut d, &mut Vec::new(), &mut stats, &mut Vec::new()));
        assert_eq!(d[VarId(0)], iv(-10.0, 8.0));
        assert_eq!(d[VarId(1)], iv(-6.0, 6.0));
        assert_eq!(d[VarId(2)], iv(0.0, 16.0));
        assert_eq!(stats.projections, dec.omega.len());
        assert_eq!(stats.revise_calls, 1);
    }

    #[test]
    fn dbc_on_gamma_then_gamma_prime_matches_hc4revise() {
        let p = parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let expected = hc4_revise_box(&dec, &p.domains);

        let mut d = p.domains.clone();
        let mut fresh = dec.initial_fresh();
        let mut store = Store::new(&mut d, &mut fresh);
        let mut stats = Stats::default();
        assert!(dbc(&dec.primitives, &dec.gamma, &mut store, &mut stats));
        assert!(dbc(&dec.primitives, &dec.gamma_prime, &mut store, &mut stats));
        assert_eq!(d, expected);
        assert_eq!(stats.projections, dec.omega.len());
    }

    #[test]
    fn hc4revise_leaves_directional_consistency() {
        let p = parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let mut d = p.domains.clone();
        let mut fresh = Vec::new();
        assert!(hc4_revise(&dec, &mut d, &mut fresh, &mut Stats::default(), &mut Vec::new()));
        let store = Store::new(&mut d, &mut fresh);
        assert!(verify_directional(&dec.primitives, &dec.gamma_prime, &store));
    }

    #[test]
    fn widened_variable_breaks_directional_consistency() {
        let p = parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let mut d = p.domains.clone();
        let mut fresh = Vec::new();
        assert!(hc4_revise(&dec, &mut d, &mut fresh, &mut Stats::default(), &mut Vec::new()));
        d[VarId(1)] = iv(-10.0, 10.0);
        let store = Store::new(&mut d, &mut fresh);
        assert!(!verify_directional(&dec.primitives, &dec.gamma_prime, &store));
    }

    #[test]
    fn dbc_single_primitive_follows_block_order() {
        let p = parse("var x in [0,10]; var y in [0,10]; var z in [0,5]; x + y = z;").unwrap();
        let x = VarRef::Var(VarId(0));
        let y = VarRef::Var(VarId(1));
        let z = VarRef::Var(VarId(2));
        let prim = Primitive::new(crate::decompose::PrimOp::Add, vec![Slot::Var(VarId(0)), Slot::Var(VarId(1))], Slot::Var(VarId(2)));
        let part = Partition::new(vec![vec![z], vec![x, y]]);
        let mut d = p.domains.clone();
        let mut stats = Stats::default();
        assert!(dbc(std::slice::from_ref(&prim), &part, &mut Store::new(&mut d, &mut []), &mut stats));
        assert_eq!(stats.projections, 1);
        assert_eq!(d[VarId(2)], iv(0.0, 5.0));
        assert!(dbc(&[], &part, &mut Store::new(&mut d, &mut []), &mut stats));
    }

    #[test]
    fn hc3_revise_examples() {
        let p = parse("var x in [0,10]; var y in [0,10]; var z in [0,5]; x + y = z;").unwrap();
        let prim = Primitive::new(crate::decompose::PrimOp::Add, vec![Slot::Var(VarId(0)), Slot::Var(VarId(1))], Slot::Var(VarId(2)));
        let mut d = p.domains.clone();
        let mut changed = Vec::new();
        assert!(hc3_revise(&prim, &mut Store::new(&mut d, &mut []), &mut Stats::default(), &mut changed));
        assert_eq!(d.as_slice(), &[iv(0.0, 5.0), iv(0.0, 5.0), iv(0.0, 5.0)]);
        assert_eq!(changed, vec![VarId(0), VarId(1)]);

        d[VarId(1)] = Interval::EMPTY;
        assert!(hc3_revise_var(&prim, VarRef::Var(VarId(0)), &Store::new(&mut d, &mut [])).is_empty());
    }

    #[test]
    fn hc3_revise_var_handles_repeated_variable() {
        // x * x = α with α in [4, 9]
        let p = parse("var x in [0,10]; x*x = 0;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let prim = &dec.primitives[0];
        let mut d = p.domains.clone();
        let mut fresh = vec![iv(4.0, 9.0), iv(4.0, 9.0)];
        let store = Store::new(&mut d, &mut fresh);
        let r = hc3_revise_var(prim, VarRef::Var(VarId(0)), &store);
        assert!(r.subset_of(iv(0.39, 10.0)) && r.lo() > 0.39);
        assert!(r.contains(2.0) && r.contains(3.0));
    }

    #[test]
    fn empty_projection_is_reported() {
        let p = parse("var x in [1,2]; var y in [5,6]; x = y;").unwrap();
        let dec = decompose(&p.constraints[0]);
        let mut d = p.domains.clone();
        assert!(!hc4_revise(&dec, &mut d, &mut Vec::new(), &mut Stats::default(), &mut Vec::new()));
    }
}
