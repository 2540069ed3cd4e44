use std::collections::HashMap;

use crate::kb_model::{AutomatonState, Concept, Path, RoleExpr, Side};
use crate::preprocess::{negate, ReducedKb, RoleAutomaton};

pub type ConceptId = u32;
/// Role name `k` is `2k`, its inverse `2k + 1`.
pub type RoleId = u32;
pub type CRoleId = u32;
pub type IndId = u32;
pub type CIndId = u32;

pub fn inv(r: RoleId) -> RoleId {
    r ^ 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CPath {
    pub role: Option<RoleId>,
    pub g: CRoleId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Top,
    Bottom,
    Atom,
    Nominal(IndId),
    Not(ConceptId),
    And(ConceptId, ConceptId),
    Or(ConceptId, ConceptId),
    Exists(RoleId, ConceptId),
    Forall(RoleId, ConceptId),
    AtLeast(u32, RoleId, ConceptId),
    AtMost(u32, RoleId, ConceptId),
    SelfR(RoleId),
    CAtLeast(u32, CRoleId),
    CAtMost(u32, CRoleId),
    CExists(CPath, CPath, usize),
    CForall(CPath, CPath, usize),
    CExistsInd(CPath, CIndId, Side, usize),
    CForallInd(CPath, CIndId, Side, usize),
    /// `∀B_S(q).C`: role of the automaton, state, body.
    AutForall(RoleId, u32, ConceptId),
}

/// Compiled automaton over role ids.
#[derive(Clone, Debug)]
pub struct Aut {
    pub initial: u32,
    /// Labelled moves reachable from each state after ε-moves.
    pub moves: Vec<Vec<(RoleId, u32)>>,
    pub accepts_empty: Vec<bool>,
}

/// Symbol tables shared by every branch of a run. Grows monotonically.
#[derive(Clone, Debug)]
pub struct Interner {
    concepts: Vec<Concept>,
    shapes: Vec<Shape>,
    index: HashMap<Concept, ConceptId>,
    complements: HashMap<ConceptId, ConceptId>,
    relations: Vec<String>,
    pub role_names: Vec<String>,
    role_index: HashMap<String, u32>,
    /// `sub[s][r]`: `s ⊑* r`.
    sub: Vec<Vec<bool>>,
    pub crole_names: Vec<String>,
    crole_index: HashMap<String, u32>,
    csub: Vec<Vec<bool>>,
    pub individuals: Vec<String>,
    ind_index: HashMap<String, IndId>,
    pub cindividuals: Vec<String>,
    cind_index: HashMap<String, CIndId>,
    automata: Vec<Aut>,
    fresh_counter: u32,
    pub top: ConceptId,
    pub bottom: ConceptId,
}

impl Interner {
    pub fn new(rkb: &ReducedKb) -> Self {
        let mut role_names: Vec<String> = rkb.roles.role_names().to_vec();
        role_names.sort();
        let role_index = role_names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let mut crole_names: Vec<String> = rkb.roles.concrete_role_names().to_vec();
        for g in &rkb.concrete_roles {
            if !crole_names.contains(g) {
                crole_names.push(g.clone());
            }
        }
        crole_names.sort();
        let crole_index = crole_names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let mut me = Interner {
            concepts: Vec::new(),
            shapes: Vec::new(),
            index: HashMap::new(),
            complements: HashMap::new(),
            relations: rkb.system.relations().to_vec(),
            role_names,
            role_index,
            sub: Vec::new(),
            crole_names,
            crole_index,
            csub: Vec::new(),
            individuals: Vec::new(),
            ind_index: HashMap::new(),
            cindividuals: Vec::new(),
            cind_index: HashMap::new(),
            automata: Vec::new(),
            fresh_counter: 0,
            top: 0,
            bottom: 0,
        };
        let n = me.role_names.len() * 2;
        me.sub = (0..n)
            .map(|s| (0..n).map(|r| rkb.roles.is_subrole(&me.role_expr(s as u32), &me.role_expr(r as u32))).collect())
            .collect();
        let m = me.crole_names.len();
        me.csub = (0..m)
            .map(|g| (0..m).map(|h| rkb.roles.is_concrete_subrole(&me.crole_names[g], &me.crole_names[h])).collect())
            .collect();
        for i in &rkb.individuals {
            me.individual(i);
        }
        for i in &rkb.constraint_individuals {
            me.cindividual(i);
        }
        me.automata = (0..n as u32).map(|r| me.compile(&rkb.automaton(&me.role_expr(r)))).collect();
        me.top = me.intern(&Concept::Top);
        me.bottom = me.intern(&Concept::Bottom);
        me
    }

    fn compile(&self, a: &RoleAutomaton) -> Aut {
        let states = a.state_count();
        let moves = (0..states).map(|p| a.moves_from(p).map(|(r, q)| (self.role_id(r), q)).collect()).collect();
        let accepts_empty = (0..states).map(|p| a.accepts_empty_from(p)).collect();
        Aut { initial: a.initial(), moves, accepts_empty }
    }


    pub fn role_id(&self, r: &RoleExpr) -> RoleId {
        match r {
            RoleExpr::Named(n) => self.role_index[n.as_str()] * 2,
            RoleExpr::Inverse(n) => self.role_index[n.as_str()] * 2 + 1,
            RoleExpr::Universal => panic!("the universal role is eliminated before the tableau"),
        }
    }

    pub fn role_expr(&self, r: RoleId) -> RoleExpr {
        let n = self.role_names[(r / 2) as usize].clone();
        if r.is_multiple_of(2) {
            RoleExpr::Named(n)
        } else {
            RoleExpr::Inverse(n)
        }
    }

    /// `s ⊑* r`.
    pub fn is_sub(&self, s: RoleId, r: RoleId) -> bool {
        self.sub[s as usize][r as usize]
    }

    pub fn crole_id(&self, g: &str) -> CRoleId {
        self.crole_index[g]
    }

    pub fn is_csub(&self, g: CRoleId, h: CRoleId) -> bool {
        self.csub[g as usize][h as usize]
    }

    pub fn automaton(&self, r: RoleId) -> &Aut {
        &self.automata[r as usize]
    }

    pub fn individual(&mut self, name: &str) -> IndId {
        if let Some(&i) = self.ind_index.get(name) {
            return i;
        }
        let id = self.individuals.len() as IndId;
        self.individuals.push(name.to_string());
        self.ind_index.insert(name.to_string(), id);
        id
    }

    pub fn cindividual(&mut self, name: &str) -> CIndId {
        if let Some(&i) = self.cind_index.get(name) {
            return i;
        }
        let id = self.cindividuals.len() as CIndId;
        self.cindividuals.push(name.to_string());
        self.cind_index.insert(name.to_string(), id);
        id
    }

    /// A nominal that cannot clash with any parsed name.
    pub fn fresh_nominal(&mut self) -> ConceptId {
        self.fresh_counter += 1;
        let name = format!("%n{}", self.fresh_counter);
        self.intern(&Concept::Nominal(name))
    }


    pub fn relation_index(&self, r: &str) -> usize {
        self.relations.iter().position(|x| x == r).expect("relations are validated during preprocessing")
    }

    fn cpath(&mut self, p: &Path) -> CPath {
        CPath { role: p.prefix.first().map(|r| self.role_id(r)), g: self.crole_id(p.concrete.as_str()) }
    }

    pub fn intern(&mut self, c: &Concept) -> ConceptId {
        if let Some(&id) = self.index.get(c) {
            return id;
        }
        let shape = match c {
            Concept::Top => Shape::Top,
            Concept::Bottom => Shape::Bottom,
            Concept::Atomic(_) => Shape::Atom,
            Concept::Nominal(a) => Shape::Nominal(self.individual(a)),
            Concept::Not(x) => Shape::Not(self.intern(x)),
            Concept::And(a, b) => Shape::And(self.intern(a), self.intern(b)),
            Concept::Or(a, b) => Shape::Or(self.intern(a), self.intern(b)),
            Concept::Exists(r, x) => Shape::Exists(self.role_id(r), self.intern(x)),
            Concept::Forall(r, x) => Shape::Forall(self.role_id(r), self.intern(x)),
            Concept::AtLeast(n, r, x) => Shape::AtLeast(*n, self.role_id(r), self.intern(x)),
            Concept::AtMost(n, r, x) => Shape::AtMost(*n, self.role_id(r), self.intern(x)),
            Concept::SelfRestriction(r) => Shape::SelfR(self.role_id(r)),
            Concept::CAtLeast(n, g) => Shape::CAtLeast(*n, self.crole_id(g.as_str())),
            Concept::CAtMost(n, g) => Shape::CAtMost(*n, self.crole_id(g.as_str())),
            Concept::CExists(p, q, r) => Shape::CExists(self.cpath(p), self.cpath(q), self.relation_index(r)),
            Concept::CForall(p, q, r) => Shape::CForall(self.cpath(p), self.cpath(q), self.relation_index(r)),
            Concept::CExistsInd(p, i, s, r) => {
                Shape::CExistsInd(self.cpath(p), self.cindividual(i), *s, self.relation_index(r))
            }
            Concept::CForallInd(p, i, s, r) => {
                Shape::CForallInd(self.cpath(p), self.cindividual(i), *s, self.relation_index(r))
            }
            Concept::AutomatonForall(q, x) => Shape::AutForall(self.role_id(&q.role), q.state, self.intern(x)),
        };
        let id = self.concepts.len() as ConceptId;
        self.concepts.push(c.clone());
        self.shapes.push(shape);
        self.index.insert(c.clone(), id);
        id
    }

    pub fn shape(&self, id: ConceptId) -> &Shape {
        &self.shapes[id as usize]
    }

    pub fn concept(&self, id: ConceptId) -> &Concept {
        &self.concepts[id as usize]
    }

    /// `¬̇C`: the NNF of the negation.
    pub fn complement(&mut self, id: ConceptId) -> ConceptId {
        if let Some(&c) = self.complements.get(&id) {
            return c;
        }
        let neg = negate(&self.concepts[id as usize], &self.relations);
        let c = self.intern(&neg);
        self.complements.insert(id, c);
        self.complements.insert(c, id);
        c
    }

    /// `∀B_S(q).C` as a concept id.
    pub fn aut_forall(&mut self, role: RoleId, state: u32, body: ConceptId) -> ConceptId {
        let c = Concept::AutomatonForall(
            AutomatonState { role: self.role_expr(role), state },
            Box::new(self.concepts[body as usize].clone()),
        );
        self.intern(&c)
    }

    pub fn at_most(&mut self, n: u32, role: RoleId, body: ConceptId) -> ConceptId {
        let c = Concept::at_most(n, self.role_expr(role), self.concepts[body as usize].clone());
        self.intern(&c)
    }

}
