mod common;

use common::{f, w, SAMPLE_P};
use patgen::*;

#[test]
fn sample_library_parses_verbatim() {
    let lib = PatternLibrary::parse(SAMPLE_P).unwrap();
    assert_eq!(lib.names().collect::<Vec<_>>(), ["Seq", "Concur", "Branch"]);
    let arities: Vec<_> = lib.iter().map(|d| d.arity()).collect();
    let basics: Vec<_> = lib.iter().map(|d| d.basic_formulas().len()).collect();
    assert_eq!(arities, [2, 3, 3]);
    assert_eq!(basics, [3, 3, 4]);

    let seq = lib.get("Seq").unwrap();
    assert_eq!(
        seq.basic_formulas(),
        [f("f1 => <>f2"), f("~f1 => ~<>f2"), f("[]~(f1 & f2)")]
    );
    let branch = lib.get("Branch").unwrap();
    assert_eq!(branch.ini().as_formula(), &f("f1"));
    assert_eq!(
        branch.fin().as_formula(),
        &Formula::or(
            Formula::and(f("f2"), f("~f3")),
            Formula::and(f("~f2"), f("f3"))
        )
    );
    // Kept exactly as written in the file.
    assert_eq!(branch.basic_formulas()[1], f("~f1 => ~<>(f1 | f2)"));
}

#[test]
fn roles_partition_formals() {
    for lib in [PatternLibrary::parse(SAMPLE_P).unwrap(), PatternLibrary::standard()] {
        for def in lib.iter() {
            let roles = def.arg_roles();
            assert_eq!(roles.len(), def.arity());
            assert!(roles.values().any(|r| *r == ArgRole::Ini));
            assert!(roles.values().any(|r| *r == ArgRole::Fin));
            for (arg, role) in roles {
                let in_ini = def.ini().atoms().contains(arg);
                let in_fin = def.fin().atoms().contains(arg);
                assert!(!(in_ini && in_fin));
                assert_eq!(role == ArgRole::Ini, in_ini);
                assert_eq!(role == ArgRole::Fin, in_fin);
            }
        }
    }
}

#[test]
fn identity_instantiation() {
    let lib = PatternLibrary::standard();
    for def in lib.iter() {
        let actuals: Vec<_> = def.formal_args().iter().map(PropExpr::atom).collect();
        let inst = def.instantiate(&actuals).unwrap();
        assert_eq!(&inst.ini, def.ini());
        assert_eq!(&inst.fin, def.fin());
        assert_eq!(inst.formulas, def.basic_formulas());
    }
}

fn branch_abc() -> Vec<Formula> {
    vec![
        f("a => (<>b & ~<>c) | (~<>b & <>c)"),
        f("~a => ~<>(b | c)"),
        f("[]~(b & c)"),
        f("[]~((a & b) | (a & c))"),
    ]
}

fn concur_seq_abcd() -> Vec<Formula> {
    vec![
        f("a => <>b"),
        f("~a => ~<>b"),
        f("[]~(a & b)"),
        f("a => <>c & <>d"),
        f("~a => ~<>c & ~<>d"),
        f("[]~(a & (c | d))"),
        f("b => <>c & <>d"),
        f("~b => ~<>c & ~<>d"),
        f("[]~(b & (c | d))"),
    ]
}

#[test]
fn branch_instantiation_and_generation() {
    let lib = PatternLibrary::standard();
    let inst = lib
        .get("Branch")
        .unwrap()
        .instantiate(&[PropExpr::atom("a"), PropExpr::atom("b"), PropExpr::atom("c")])
        .unwrap();
    assert_eq!(inst.formulas, branch_abc());

    let spec = generate(&w("Branch(a,b,c)"), &lib).unwrap();
    assert_eq!(spec.formulas().cloned().collect::<Vec<_>>(), branch_abc());
}

#[test]
fn verbatim_branch_formula_differs_only_in_second_formula() {
    let lib = PatternLibrary::parse(SAMPLE_P).unwrap();
    let got: Vec<_> = generate(&w("Branch(a,b,c)"), &lib).unwrap().formulas().cloned().collect();
    let mut expected = branch_abc();
    expected[1] = f("~a => ~<>(a | b)");
    assert_eq!(got, expected);
}

#[test]
fn concur_seq_generation_in_order() {
    let lib = PatternLibrary::standard();
    let spec = generate(&w("Concur(Seq(a,b),c,d)"), &lib).unwrap();
    assert_eq!(spec.formulas().cloned().collect::<Vec<_>>(), concur_seq_abcd());
    assert_eq!(
        spec.to_string(),
        "a => <>b\n~a => ~<>b\n[]~(a & b)\n\
         a => <>c & <>d\n~a => ~<>c & ~<>d\n[]~(a & (c | d))\n\
         b => <>c & <>d\n~b => ~<>c & ~<>d\n[]~(b & (c | d))\n"
    );
}

#[test]
fn four_combinations_for_two_nested_arguments() {
    let lib = PatternLibrary::parse("p(f1,f2,f3,f4):\nini= f1 / fin= f4\nf1 => <>f2 & <>f3 & <>f4\nq(x,y):\nini= x / fin= y\nx => <>y\nr(x,y):\nini= x / fin= y\nx => <>y\n").unwrap();
    let node = w("p(a,q(q1,q2),r(r1,r2),d)");
    let combos = expand_combinations(&node, &lib).unwrap();
    let shapes: Vec<(Side, Side)> = combos.iter().map(|(c, _)| (c.binding[&1], c.binding[&2])).collect();
    assert_eq!(
        shapes,
        [
            (Side::Ini, Side::Ini),
            (Side::Ini, Side::Fin),
            (Side::Fin, Side::Ini),
            (Side::Fin, Side::Fin)
        ]
    );
    let actuals: Vec<String> = combos
        .iter()
        .map(|(_, a)| a.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(actuals, ["a,q1,r1,d", "a,q1,r2,d", "a,q2,r1,d", "a,q2,r2,d"]);
}

#[test]
fn consolidated_examples() {
    let lib = PatternLibrary::standard();
    let c = |e: &str, s| consolidated_expression(&w(e), s, &lib).unwrap();
    assert_eq!(c("Seq(a,b)", Side::Ini).as_formula(), &f("a"));
    assert_eq!(c("Seq(a,b)", Side::Fin).as_formula(), &f("b"));
    assert_eq!(c("Concur(a,Seq(b,c),d)", Side::Fin).as_formula(), &f("c | d"));
    assert_eq!(
        c("Concur(a,Seq(b,Concur(c,d,e)),f)", Side::Fin).as_formula(),
        &Formula::or(Formula::or(f("d"), f("e")), f("f"))
    );
    assert_eq!(c("Concur(a,Seq(b,Concur(c,d,e)),f)", Side::Ini).as_formula(), &f("a"));
}

#[test]
fn labeled_expression_example() {
    let lw = label_expression(&w("Seq(a,Seq(ParalSplit(b,c,d),Synchron(e,f,g)))"));
    assert_eq!(
        lw.to_string(),
        "Seq(1]a,Seq(2]ParalSplit(3]b,c,d[3),Synchron(3]e,f,g[3)[2)[1)"
    );
    assert_eq!(max_label(&lw), 3);
}

#[test]
fn pattern_consistency() {
    let lib = PatternLibrary::standard();
    for name in ["Seq", "Concur", "Branch"] {
        let r = check_pattern(lib.get(name).unwrap(), Bounds::default()).unwrap();
        assert!(r.is_sat(), "{name}: {r}");
    }
    let r = check_pattern(lib.get("Seq").unwrap(), Bounds::default()).unwrap();
    assert_eq!(r.witness().unwrap().to_string(), "prefix: {f1} {f2} | loop: {}");

    let one = PatternDefinition::unchecked("One", vec!["a".into()], PropExpr::atom("a"), PropExpr::atom("a"), vec![]);
    assert!(matches!(
        check_pattern(&one, Bounds::default()).unwrap(),
        CheckResult::Unsatisfiable { exhaustive: true, .. }
    ));
}

#[test]
fn specification_checks() {
    let lib = PatternLibrary::standard();
    for e in ["Branch(a,b,c)", "Concur(Seq(a,b),c,d)"] {
        let spec = generate(&w(e), &lib).unwrap();
        let r = check_specification(&spec, Bounds::default()).unwrap();
        assert_eq!(r.witness(), Some(&LassoModel::all_false()), "{e}");
    }

    let mut fs: Vec<Formula> = generate(&w("Seq(a,b)"), &lib).unwrap().formulas().cloned().collect();
    fs.extend([f("<>a"), f("a => <>b")]);
    let r = check_sat(&fs, Bounds::default()).unwrap();
    // Anchored reading: `a` may start later, so `a => <>b` is vacuous at 0.
    assert_eq!(r.witness().unwrap().to_string(), "prefix: {} {a} | loop: {}");
    let expected = LassoModel::new(
        vec![["a".to_string()].into(), ["b".to_string()].into()],
        vec![State::new()],
    );
    assert!(fs.iter().all(|g| eval_at(g, &expected, 0).unwrap()));
}

#[test]
fn all_false_model_on_concur_seq() {
    let m = LassoModel::all_false();
    for g in concur_seq_abcd() {
        assert!(eval_at(&g, &m, 0).unwrap(), "{g}");
    }
}

#[test]
fn anchored_initial_activity_is_contradictory() {
    // `a` at 0 forces `<>c`, while `~b` at 0 (from `[]~(a & b)`) forbids it.
    let lib = PatternLibrary::standard();
    let mut fs: Vec<Formula> = generate(&w("Concur(Seq(a,b),c,d)"), &lib).unwrap().formulas().cloned().collect();
    fs.push(f("a"));
    assert_eq!(check_sat(&fs, Bounds::default()).unwrap(), CheckResult::Unknown { bounds: Bounds::default() });
    let r = check_sat(&fs, Bounds::new(8, 16)).unwrap();
    assert!(r.is_unsat(), "{r}");
}
