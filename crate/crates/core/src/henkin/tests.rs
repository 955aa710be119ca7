use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::syntax::{first_stage_for, parse, Predicate, Signature};

fn pq() -> Signature {
    Signature::propositional(&["p", "q"]).unwrap()
}

fn f(s: &str) -> Formula {
    parse(s, &pq()).unwrap()
}

fn theory(axioms: &[&str]) -> Theory {
    Theory::new(pq(), axioms.iter().map(|a| f(a)).collect()).unwrap()
}

fn fo() -> Signature {
    Signature::new(vec![Predicate { name: "P".into(), arity: 1 }], vec![], "c").unwrap()
}

fn index(s: &mut ConstructionState, g: &Formula) -> u64 {
    s.enumerator().index_of(&g.canonical()).unwrap() as u64
}

fn conservative() -> ConstructionConfig {
    ConstructionConfig { placement: Placement::Conservative, ..ConstructionConfig::default() }
}

#[test]
fn init_examples() {
    let s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    assert_eq!(s.fkd(), &LinearFkd::new());
    assert_eq!(s.stage(), 0);
    assert!(s.decided().is_empty());
    assert!(ConstructionState::init(theory(&["[]p"]), ConstructionConfig::default()).is_ok());
    assert_eq!(
        ConstructionState::init(theory(&["p & ~p"]), ConstructionConfig::default()).unwrap_err(),
        HenkinError::InconsistentTheory
    );
}

#[test]
fn diamond_witness_goes_to_the_same_world() {
    let mut s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    let e = index(&mut s, &f("<>p"));
    let r = s.run_pair(0, e).unwrap();
    assert_eq!(r.branch, Branch::Diamond);
    assert_eq!(r.chosen, Some(Candidate::Here));
    assert_eq!(s.fkd().world(0).unwrap().sentences, vec![f("<>p"), f("p")]);
    assert_eq!(s.decision(WorldId(0), e), Some(true));
}

#[test]
fn contradiction_is_negated() {
    let mut s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    let e = index(&mut s, &f("p & ~p"));
    let r = s.run_pair(0, e).unwrap();
    assert_eq!(r.branch, Branch::Negate);
    assert_eq!(r.tests, vec![Test { candidate: None, verdict: TestVerdict::Inconsistent }]);
    assert_eq!(s.fkd().world(0).unwrap().sentences, vec![f("~(p & ~p)")]);
    assert_eq!(s.decision(WorldId(0), e), Some(false));
}

#[test]
fn existential_gets_a_fresh_constant() {
    let sig = fo();
    let g = |t: &str| parse(t, &sig).unwrap();
    let mut s = ConstructionState::init(Theory::empty(sig.clone()), ConstructionConfig::default()).unwrap();
    let e = index(&mut s, &g("exists x. P(x)"));
    s.run_pair(0, e).unwrap();
    assert_eq!(s.fkd().world(0).unwrap().sentences, vec![g("exists x0. P(x0)"), g("P(c0)")]);
    assert_eq!(s.next_henkin(), 1);

    // A constant already mentioned is skipped.
    let e2 = index(&mut s, &g("exists x. P(x) & ~P(c1)"));
    let r = s.run_pair(0, e2).unwrap();
    assert_eq!(r.branch, Branch::Exists);
    assert!(r.effects.contains(&Effect::Fresh { index: 2 }));
    assert!(s.fkd().world(0).unwrap().sentences.contains(&g("P(c2) & ~P(c1)")));
}

#[test]
fn splices_under_default_order() {
    let mut s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    let at = |s: &mut ConstructionState, i: u64, t: &str| {
        let e = index(s, &f(t));
        s.run_pair(i, e).unwrap()
    };
    s.fkd.insert_world(1).unwrap();
    at(&mut s, 1, "[]~q");
    let r = at(&mut s, 0, "<>q");
    assert_eq!(r.chosen, Some(Candidate::Here));

    let mut s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    s.fkd.insert_world(1).unwrap();
    at(&mut s, 0, "~q");
    at(&mut s, 1, "[]~q");
    let r = at(&mut s, 0, "<>q");
    assert_eq!(r.chosen, Some(Candidate::Splice(1)));
    assert_eq!(r.tests[1], Test { candidate: Some(Candidate::Here), verdict: TestVerdict::Inconsistent });

    let mut s = ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    s.fkd.insert_world(1).unwrap();
    at(&mut s, 0, "~q");
    at(&mut s, 1, "~q");
    let r = at(&mut s, 0, "<>q");
    assert_eq!(r.chosen, Some(Candidate::Splice(1)));
    assert_eq!(r.tests.iter().filter(|t| t.verdict == TestVerdict::Consistent).count(), 2);
    assert_eq!(s.fkd().world_count(), 3);
    assert_eq!(s.position_changes()[1], 1);

    let mut s = ConstructionState::init(theory(&[]), conservative()).unwrap();
    s.fkd.insert_world(1).unwrap();
    at(&mut s, 0, "~q");
    at(&mut s, 1, "~q");
    let r = at(&mut s, 0, "<>q");
    assert_eq!(r.chosen, Some(Candidate::Append));
    assert_eq!(r.skipped, 0);
    assert_eq!(s.position_changes()[1], 0);
}

#[test]
fn interior_splice_after_rejections() {
    // ◇(q & <>p) from w0 = {~q} with w1 = {[]~p}: q must come before w1.
    for placement in [Placement::Paper, Placement::Conservative] {
        let cfg = ConstructionConfig { placement, ..ConstructionConfig::default() };
        let mut s = ConstructionState::init(theory(&[]), cfg).unwrap();
        s.fkd.insert_world(1).unwrap();
        for (i, t) in [(0, "~q"), (1, "[]~p"), (1, "~q")] {
            let e = index(&mut s, &f(t));
            s.run_pair(i, e).unwrap();
        }
        let e = index(&mut s, &f("<>(q & <>p)"));
        let r = s.run_pair(0, e).unwrap();
        assert_eq!(r.chosen, Some(Candidate::Splice(1)), "{placement:?}");
        let (last, earlier) = r.tests.split_last().unwrap();
        assert_eq!(last.verdict, TestVerdict::Consistent);
        assert!(earlier[1..].iter().all(|t| t.verdict == TestVerdict::Inconsistent));
        assert_eq!(s.fkd().world(1).unwrap().sentences, vec![f("q & <>p")]);
        assert!(s.check_consistency().unwrap().holds(true).unwrap());
    }
}

#[test]
fn runs_are_deterministic_and_replayable() {
    for cfg in [ConstructionConfig::default(), conservative()] {
        let (a, ta) = ConstructionState::run(theory(&["<>q -> []<>q"]), cfg, 150).unwrap();
        let (b, tb) = ConstructionState::run(theory(&["<>q -> []<>q"]), cfg, 150).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a.fkd(), b.fkd());
        let c = ConstructionState::replay(theory(&["<>q -> []<>q"]), cfg, &ta).unwrap();
        assert_eq!(c.fkd(), a.fkd());
        assert_eq!(c.decided(), a.decided());
        assert_eq!(c.position_changes(), a.position_changes());
        let mut d = c.clone();
        assert_eq!(d.step().unwrap(), a.clone().step().unwrap());
    }
}

#[test]
fn replay_rejects_foreign_records() {
    let (_, trace) = ConstructionState::run(theory(&[]), ConstructionConfig::default(), 20).unwrap();
    let err = ConstructionState::replay(theory(&[]), ConstructionConfig::default(), &trace[1..]).unwrap_err();
    assert!(matches!(err, HenkinError::Replay { stage: 1, .. }));
    let mut bad = trace.clone();
    bad[0].e += 1;
    assert!(ConstructionState::replay(theory(&[]), ConstructionConfig::default(), &bad).is_err());
}

#[test]
fn every_stage_stays_consistent() {
    for t in [theory(&[]), theory(&["[]p"])] {
        let mut s = ConstructionState::init(t, ConstructionConfig::default()).unwrap();
        for _ in 0..120 {
            s.step().unwrap();
            assert!(s.check_consistency().unwrap().holds(true).unwrap(), "stage {}", s.stage());
        }
        let report = s.closure_report();
        assert!(report.holds(), "{:?}", report.violations);
        assert!(report.checked[0] > 0);
    }
}

#[test]
fn closure_holds_with_quantifiers() {
    let sig = fo();
    let (mut s, _) = ConstructionState::run(Theory::empty(sig), ConstructionConfig::default(), 260).unwrap();
    let r = s.closure_report();
    assert!(r.holds(), "{:?}", r.violations);
    assert!(r.checked[2] > 0);
}

#[test]
fn empty_worlds_are_appended_on_idle_stages() {
    let (s, trace) = ConstructionState::run(theory(&[]), ConstructionConfig::default(), 200).unwrap();
    let idle = trace.iter().filter(|r| r.branch == Branch::Idle).count();
    assert!(s.fkd().world_count() > idle / 4);
    let off = ConstructionConfig { append_every: 0, ..ConstructionConfig::default() };
    let (t, _) = ConstructionState::run(theory(&[]), off, 200).unwrap();
    assert!(t.fkd().world_count() < s.fkd().world_count());
}

#[test]
fn query_examples() {
    let s = ConstructionState::init(theory(&["[]p"]), ConstructionConfig::default()).unwrap();
    let mut m = ConstructedModel::new(s);
    assert!(m.query_truth(0, &f("p")).unwrap());
    assert!(m.query_truth(2, &f("[]p")).unwrap());

    let mut m = ConstructedModel::new(ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap());
    for i in 0..=3 {
        assert!(m.query_truth(i, &f("true")).unwrap());
    }
    for g in ["p", "q", "<>p", "~p", "[]q"] {
        let a = m.query_truth(0, &f(g)).unwrap();
        let b = m.query_truth(0, &Formula::not(f(g))).unwrap();
        assert_ne!(a, b, "{g}");
        assert_eq!(m.query_truth(0, &f(g)).unwrap(), a);
    }
    assert!(m.accessible(1, 3) && !m.accessible(3, 1));
    assert_eq!(m.domain_element(4), "c4");
    let other = Signature::propositional(&["s"]).unwrap();
    assert!(matches!(m.query_truth(0, &parse("s", &other).unwrap()), Err(HenkinError::NotInLanguage(_))));
}

#[test]
fn queries_can_be_cancelled() {
    let mut m = ConstructedModel::new(ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap());
    let far = f("<>(p & <>(q & <>(p & q)))");
    let err = m.query_truth_until(0, &far, &mut |s| s.stage() >= 100).unwrap_err();
    assert_eq!(err, HenkinError::Cancelled { stage: 100 });
    assert_eq!(m.query_truth_until(0, &f("true"), &mut |_| false), Ok(true));
}

#[test]
fn query_stages_are_recorded() {
    let init = || ConstructionState::init(theory(&[]), ConstructionConfig::default()).unwrap();
    let mut m = ConstructedModel::new(init()).recording(true);
    m.query_truth(1, &f("q")).unwrap();
    let recs = m.take_records();
    assert_eq!(recs.len() as u64, m.state().stage());
    assert_eq!(m.pinned().len(), 2);
    let e = m.state().clone().enumerator().index_of(&f("q")).unwrap() as u64;
    assert!(m.state().stage() > first_stage_for(1, e) || m.pinned()[1] != WorldId(1));
    let again = ConstructionState::replay(theory(&[]), ConstructionConfig::default(), &recs).unwrap();
    assert_eq!(again.fkd(), m.state().fkd());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    // Interior splices are only chosen after every earlier candidate was
    // rejected, and positions only move forward.
    #[test]
    fn splice_justification(stages in 40u64..160, default_order in any::<bool>(), ax in 0usize..3) {
        let t = [theory(&[]), theory(&["[]p"]), theory(&["<>q -> []<>q"])][ax].clone();
        let cfg = if default_order { ConstructionConfig::default() } else { conservative() };
        let (s, trace) = ConstructionState::run(t, cfg, stages).unwrap();
        let mut count = 1usize;
        for r in &trace {
            if let Some(Candidate::Splice(k)) = r.chosen {
                prop_assert!(k < count);
                let (last, earlier) = r.tests.split_last().unwrap();
                prop_assert_eq!(last.verdict, TestVerdict::Consistent);
                prop_assert_eq!(earlier[0].verdict, TestVerdict::Consistent);
                prop_assert!(earlier[1..].iter().all(|t| t.verdict != TestVerdict::Consistent));
            }
            count += r.effects.iter().filter(|e| matches!(e, Effect::Insert { .. })).count();
        }
        prop_assert_eq!(count, s.fkd().world_count());
        let decided: Vec<_> = trace.iter().filter(|r| r.branch != Branch::Idle).map(|r| (r.world, r.e)).collect();
        let mut uniq = decided.clone();
        uniq.sort();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), decided.len());
    }
}
