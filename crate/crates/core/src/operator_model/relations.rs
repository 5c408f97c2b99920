//! The relation families verified by `check`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    build_generators, word_fits, Counterexample, Evaluator, Letter, ModelError, OpSum, OpWord,
    RelationReport, TruncatedModel, TruncatedOperator, MAX_COUNTEREXAMPLES,
};
use crate::diagram::{Diagram, EdgeId};
use crate::dynamics::{
    enumerate_paths, is_path, iterate, n_n_report, vershik, vershik_inv, Path, Word,
};

/// Accumulates the outcome of many instances of one relation.
pub(crate) struct Family {
    id: String,
    interior: usize,
    instances: usize,
    failures: usize,
    empty: usize,
    counterexamples: Vec<Counterexample>,
    note: Option<String>,
}

impl Family {
    pub(crate) fn new(id: &str) -> Self {
        Self {
            id: id.to_owned(),
            interior: 0,
            instances: 0,
            failures: 0,
            empty: 0,
            counterexamples: Vec::new(),
            note: None,
        }
    }

    /// Evaluates both sides on every basis vector in the common interior of
    /// all words involved.
    pub(crate) fn check(
        &mut self,
        eval: &mut Evaluator<'_>,
        instance: &str,
        lhs: &OpSum,
        rhs: &OpSum,
    ) {
        let model = eval.model();
        let depth = model.depth();
        let words: Vec<&OpWord> = lhs.0.iter().chain(&rhs.0).map(|(_, w)| w).collect();
        let fits: Vec<bool> = (0..=depth)
            .map(|len| len > 0 && words.iter().all(|w| word_fits(w, len as i64, depth as i64)))
            .collect();
        self.instances += 1;
        if !fits.contains(&true) {
            self.empty += 1;
            return;
        }
        let (lc, rc) = (eval.compile(lhs), eval.compile(rhs));
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for i in 0..model.space().dim() {
            if !fits[model.space().path(i).len()] {
                continue;
            }
            self.interior += 1;
            eval.eval(&lc, i, &mut l);
            eval.eval(&rc, i, &mut r);
            if l != r {
                let render = |v: &[(usize, i64)]| {
                    v.iter()
                        .map(|(j, c)| {
                            (
                                model.space().path(*j).display(model.diagram()).to_string(),
                                *c,
                            )
                        })
                        .collect()
                };
                self.fail(Counterexample {
                    instance: instance.to_owned(),
                    path: model.space().path(i).display(model.diagram()).to_string(),
                    lhs: render(&l),
                    rhs: render(&r),
                    detail: None,
                });
            }
        }
    }

    fn fail(&mut self, c: Counterexample) {
        self.failures += 1;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(c);
        }
    }

    fn note(&mut self, text: String) {
        self.note = Some(text);
    }

    pub(crate) fn finish(self) -> RelationReport {
        let mut note = self.note;
        if self.instances == 0 && note.is_none() {
            note = Some("vacuous: the diagram has no instance of this relation".into());
        }
        if self.empty > 0 {
            let extra = format!("{} instances with empty interior", self.empty);
            note = Some(match note {
                Some(n) => format!("{n}; {extra}"),
                None => extra,
            });
        }
        RelationReport {
            relation: self.id,
            interior: self.interior,
            pass: self.counterexamples.is_empty(),
            counterexamples: self.counterexamples,
            instances: self.instances,
            failures: self.failures,
            note,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CkPartition,
    CkSource,
    GeneratorPartialIsometry,
    SuccessorIntertwining,
    ExtremalExchange,
    UPowerPartialIsometry,
    WordLemma,
    ProjectionProducts,
    ProjectionRefinement,
    ProjectionConjugation,
    PartialRepresentation,
    RangeProjectionsCommute,
    Covariance,
}

const KINDS: [Kind; 13] = [
    Kind::CkPartition,
    Kind::CkSource,
    Kind::GeneratorPartialIsometry,
    Kind::SuccessorIntertwining,
    Kind::ExtremalExchange,
    Kind::UPowerPartialIsometry,
    Kind::WordLemma,
    Kind::ProjectionProducts,
    Kind::ProjectionRefinement,
    Kind::ProjectionConjugation,
    Kind::PartialRepresentation,
    Kind::RangeProjectionsCommute,
    Kind::Covariance,
];

impl Kind {
    fn id(self) -> &'static str {
        match self {
            Kind::CkPartition => "ck-partition-of-unity",
            Kind::CkSource => "ck-source-projection",
            Kind::GeneratorPartialIsometry => "generator-partial-isometry",
            Kind::SuccessorIntertwining => "successor-intertwining",
            Kind::ExtremalExchange => "extremal-exchange",
            Kind::UPowerPartialIsometry => "u-power-partial-isometry",
            Kind::WordLemma => "word-nonzero-iff-path",
            Kind::ProjectionProducts => "projection-products",
            Kind::ProjectionRefinement => "projection-refinement",
            Kind::ProjectionConjugation => "projection-conjugation",
            Kind::PartialRepresentation => "partial-representation",
            Kind::RangeProjectionsCommute => "range-projections-commute",
            Kind::Covariance => "covariance",
        }
    }
}

/// `n_sup` at depth `M` plus one, so that the `π` laws reach a power that
/// vanishes.
pub fn default_n_max(d: &Diagram, depth: usize) -> u64 {
    n_n_report(d, depth).n_sup + 1
}

/// Every relation family at depth `M`, in a fixed order.
pub fn check_all(
    d: &Diagram,
    depth: usize,
    n_max: Option<u64>,
) -> Result<Vec<RelationReport>, ModelError> {
    let (model, n_max) = prepare(d, depth, n_max)?;
    Ok(KINDS.iter().map(|k| run(*k, &model, n_max)).collect())
}

/// As [`check_all`], with the families evaluated concurrently.
pub fn check_all_parallel(
    d: &Diagram,
    depth: usize,
    n_max: Option<u64>,
) -> Result<Vec<RelationReport>, ModelError> {
    let (model, n_max) = prepare(d, depth, n_max)?;
    Ok(KINDS.par_iter().map(|k| run(*k, &model, n_max)).collect())
}

fn prepare(
    d: &Diagram,
    depth: usize,
    n_max: Option<u64>,
) -> Result<(TruncatedModel, i64), ModelError> {
    if depth < 3 {
        return Err(ModelError::DepthTooSmall(depth, 3));
    }
    let n_max = n_max.unwrap_or_else(|| default_n_max(d, depth)).max(1);
    Ok((build_generators(d, depth)?, n_max as i64))
}

fn run(kind: Kind, model: &TruncatedModel, n_max: i64) -> RelationReport {
    let mut family = Family::new(kind.id());
    let mut eval = Evaluator::new(model);
    let d = model.diagram();
    let depth = model.depth();
    let name = |e: EdgeId| d.edge_name(e).to_owned();
    let paths_upto = |max_len: usize| -> Vec<Path> {
        (1..=max_len)
            .flat_map(|l| enumerate_paths(d, l, None))
            .collect()
    };
    match kind {
        Kind::CkPartition => {
            let lhs = OpSum::sum(
                d.edge_ids()
                    .map(|e| OpWord::new([Letter::S(e), Letter::SAdj(e)])),
            );
            family.check(&mut eval, "", &lhs, &OpSum::word(OpWord::identity()));
        }
        Kind::CkSource => {
            for g in d.edge_ids() {
                let lhs = OpSum::letters([Letter::SAdj(g), Letter::S(g)]);
                let rhs = OpSum::sum(
                    d.outgoing(d.target(g))
                        .iter()
                        .map(|&e| OpWord::new([Letter::S(e), Letter::SAdj(e)])),
                );
                family.check(&mut eval, &name(g), &lhs, &rhs);
            }
        }
        Kind::GeneratorPartialIsometry => {
            for e in d.edge_ids() {
                let lhs = OpSum::letters([Letter::S(e), Letter::SAdj(e), Letter::S(e)]);
                family.check(
                    &mut eval,
                    &format!("s[{}]", name(e)),
                    &lhs,
                    &OpSum::letters([Letter::S(e)]),
                );
            }
            let lhs = OpSum::letters([Letter::U, Letter::UAdj, Letter::U]);
            family.check(&mut eval, "u", &lhs, &OpSum::letters([Letter::U]));
        }
        Kind::SuccessorIntertwining => {
            for e in d.edge_ids() {
                let Some(next) = d.successor_edge(e) else {
                    continue;
                };
                family.check(
                    &mut eval,
                    &format!("u s[{}] = s[{}]", name(e), name(next)),
                    &OpSum::letters([Letter::U, Letter::S(e)]),
                    &OpSum::letters([Letter::S(next)]),
                );
                family.check(
                    &mut eval,
                    &format!("u* s[{}] = s[{}]", name(next), name(e)),
                    &OpSum::letters([Letter::UAdj, Letter::S(next)]),
                    &OpSum::letters([Letter::S(e)]),
                );
            }
        }
        Kind::ExtremalExchange => {
            let ext = d.extremal_edges();
            let lhs = OpSum::sum(
                ext.maximal
                    .iter()
                    .map(|&e| OpWord::new([Letter::U, Letter::S(e)])),
            );
            let rhs = OpSum::sum(
                ext.minimal
                    .iter()
                    .map(|&e| OpWord::new([Letter::S(e), Letter::U])),
            );
            family.check(&mut eval, "", &lhs, &rhs);
        }
        Kind::UPowerPartialIsometry => {
            for n in -n_max..=n_max {
                let lhs = OpSum::letters([Letter::Pi(n), Letter::Pi(-n), Letter::Pi(n)]);
                family.check(
                    &mut eval,
                    &format!("n={n}"),
                    &lhs,
                    &OpSum::letters([Letter::Pi(n)]),
                );
            }
            let reach = (1..=n_max)
                .take_while(|&n| !model.pi(n).is_zero())
                .last()
                .unwrap_or(0);
            family.note(format!(
                "checked |n| <= {n_max}; u^n is nonzero exactly for n <= {reach} and zero beyond"
            ));
        }
        Kind::WordLemma => word_lemma(&mut family, model),
        Kind::ProjectionProducts => {
            let ps = paths_upto(depth - 1);
            for f in &ps {
                for g in ps.iter().filter(|g| g.len() >= f.len()) {
                    let (ef, eg) = (Letter::Proj(f.clone()), Letter::Proj(g.clone()));
                    let label = format!("f={} g={}", f.display(d), g.display(d));
                    let expected = if g.starts_with(f) {
                        OpSum::letters([eg.clone()])
                    } else {
                        OpSum::zero()
                    };
                    family.check(
                        &mut eval,
                        &label,
                        &OpSum::letters([ef.clone(), eg.clone()]),
                        &expected,
                    );
                    family.check(&mut eval, &label, &OpSum::letters([eg, ef]), &expected);
                }
            }
        }
        Kind::ProjectionRefinement => {
            let total = OpSum::sum(
                d.edge_ids()
                    .map(|e| OpWord::new([Letter::Proj(Path::single(e))])),
            );
            family.check(
                &mut eval,
                "sum e_f = 1",
                &total,
                &OpSum::word(OpWord::identity()),
            );
            for g in paths_upto(depth - 2) {
                let rhs = OpSum::sum(
                    d.outgoing(g.target(d))
                        .iter()
                        .filter_map(|&h| g.extend(d, h))
                        .map(|gh| OpWord::new([Letter::Proj(gh)])),
                );
                family.check(
                    &mut eval,
                    &format!("g={}", g.display(d)),
                    &OpSum::letters([Letter::Proj(g.clone())]),
                    &rhs,
                );
            }
        }
        Kind::ProjectionConjugation => {
            for f in paths_upto(depth - 1) {
                let ef = Letter::Proj(f.clone());
                if let Some(next) = vershik(d, &f) {
                    family.check(
                        &mut eval,
                        &format!("u e[{}] u*", f.display(d)),
                        &OpSum::letters([Letter::U, ef.clone(), Letter::UAdj]),
                        &OpSum::letters([Letter::Proj(next)]),
                    );
                }
                if let Some(prev) = vershik_inv(d, &f) {
                    family.check(
                        &mut eval,
                        &format!("u* e[{}] u", f.display(d)),
                        &OpSum::letters([Letter::UAdj, ef, Letter::U]),
                        &OpSum::letters([Letter::Proj(prev)]),
                    );
                }
            }
        }
        Kind::PartialRepresentation => {
            for n in -n_max..=n_max {
                for m in -n_max..=n_max {
                    family.check(
                        &mut eval,
                        &format!("n={n} m={m}"),
                        &OpSum::letters([Letter::Pi(-n), Letter::Pi(n), Letter::Pi(m)]),
                        &OpSum::letters([Letter::Pi(-n), Letter::Pi(n + m)]),
                    );
                }
            }
            family.check(
                &mut eval,
                "pi(0) = 1",
                &OpSum::letters([Letter::Pi(0)]),
                &OpSum::word(OpWord::identity()),
            );
            family.note(format!("|n|, |m| <= {n_max}"));
        }
        Kind::RangeProjectionsCommute => range_projections(&mut family, model, n_max),
        Kind::Covariance => {
            for f in paths_upto(depth - 1) {
                let ef = Letter::Proj(f.clone());
                for n in -n_max..=n_max {
                    let Some(image) = iterate(d, &f, n) else {
                        continue;
                    };
                    let label = format!("n={n} f={}", f.display(d));
                    family.check(
                        &mut eval,
                        &label,
                        &OpSum::letters([Letter::Pi(n), ef.clone(), Letter::Pi(-n)]),
                        &OpSum::letters([Letter::Proj(image)]),
                    );
                    family.check(
                        &mut eval,
                        &label,
                        &OpSum::letters([Letter::Pi(-n), Letter::Pi(n), ef.clone()]),
                        &OpSum::letters([ef.clone()]),
                    );
                    family.check(
                        &mut eval,
                        &label,
                        &OpSum::letters([ef.clone(), Letter::Pi(-n), Letter::Pi(n)]),
                        &OpSum::letters([ef.clone()]),
                    );
                }
            }
        }
    }
    family.finish()
}

/// `s_w` is nonzero exactly when `w` is a path, for every word of length up
/// to `min(3, M - 1)`.
fn word_lemma(family: &mut Family, model: &TruncatedModel) {
    let d = model.diagram();
    let max_len = 3.min(model.depth() - 1);
    let mut words: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for _ in 0..max_len {
        words = words
            .into_iter()
            .flat_map(|w| {
                d.edge_ids().map(move |e| {
                    let mut w = w.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
        for w in &words {
            check_word(family, model, w);
        }
    }
    family.note(format!("all words of length <= {max_len}"));
}

fn check_word(family: &mut Family, model: &TruncatedModel, w: &[EdgeId]) {
    let d = model.diagram();
    family.instances += 1;
    family.interior += 1;
    let m = model.word_matrix(w);
    let path = is_path(d, &Word(w.to_vec()));
    let nonzero = !m.is_zero();
    let isometry = m.is_partial_isometry();
    if path != nonzero || !isometry {
        let label: Vec<&str> = w.iter().map(|e| d.edge_name(*e)).collect();
        let detail = if !isometry {
            "s_w is not a partial isometry".to_owned()
        } else if path {
            "w is a path but s_w = 0".to_owned()
        } else {
            "w is not a path but s_w != 0".to_owned()
        };
        family.fail(Counterexample {
            instance: label.join(","),
            path: String::new(),
            lhs: BTreeMap::new(),
            rhs: BTreeMap::new(),
            detail: Some(detail),
        });
    }
}

/// `π(n)π(-n)` is a diagonal 0/1 matrix for each `n`, and any two of them
/// commute.
fn range_projections(family: &mut Family, model: &TruncatedModel, n_max: i64) {
    let space = model.space();
    let d = model.diagram();
    let projections: Vec<(i64, TruncatedOperator)> = (-n_max..=n_max)
        .map(|n| (n, model.pi(n).mul(&model.pi(-n))))
        .collect();
    for (n, p) in &projections {
        family.instances += 1;
        family.interior += space.dim();
        if !p.is_diagonal() || p.entries().any(|(_, _, x)| *x != 1) {
            family.fail(Counterexample {
                instance: format!("n={n}"),
                path: String::new(),
                lhs: BTreeMap::new(),
                rhs: BTreeMap::new(),
                detail: Some("pi(n) pi(-n) is not a diagonal 0/1 matrix".into()),
            });
        }
    }
    for (i, (n, p)) in projections.iter().enumerate() {
        for (m, q) in &projections[i + 1..] {
            family.instances += 1;
            family.interior += space.dim();
            let (pq, qp) = (p.mul(q), q.mul(p));
            if pq != qp {
                let col = (0..space.dim())
                    .find(|&j| pq.column(j) != qp.column(j))
                    .unwrap_or(0);
                let render = |op: &TruncatedOperator| {
                    op.column(col)
                        .iter()
                        .map(|(r, x)| (space.path(*r).display(d).to_string(), *x))
                        .collect()
                };
                family.fail(Counterexample {
                    instance: format!("n={n} m={m}"),
                    path: space.path(col).display(d).to_string(),
                    lhs: render(&pq),
                    rhs: render(&qp),
                    detail: None,
                });
            }
        }
    }
}
