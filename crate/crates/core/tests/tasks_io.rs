use ltl_dmp::ltl::{eval_qualitative, parse_formula, InputSchema, Trace};
use ltl_dmp::quantloss::{trace_loss, LossConfig};
use ltl_dmp::tasks::{
    builtin_spec, compose_specs, dataset_from_str, dataset_to_string, gen_dataset, gen_demo, load_dataset, load_trace,
    save_dataset, save_trace, TaskError, TraceFile,
};

fn manifest(rel: &str) -> String {
    format!("{}/{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn generated_scenes_stay_in_the_overshoot_box() {
    for seed in 0..10_000 {
        let demo = gen_demo(seed);
        let inside = |p: &[f64]| p.iter().all(|x| (-0.5..=1.5).contains(x));
        assert!(demo.trajectory.points().iter().all(|p| inside(p)), "seed {seed}");
        assert!(demo.input.iter().all(|x| (0.0..=1.0).contains(x)), "seed {seed}");
        for w in demo.trajectory.points().windows(2) {
            assert!(w[0] != w[1], "seed {seed}: repeated sample");
        }
    }
}

#[test]
fn demos_are_deterministic_and_consistent() {
    let a = gen_demo(42);
    assert_eq!(a, gen_demo(42));
    assert_ne!(a, gen_demo(43));
    assert_eq!(a.trajectory.len(), 100);
    assert_eq!(a.trajectory.point(0), &a.input[0..2]);
    assert_eq!(a.trajectory.point(99), &a.input[2..4]);
}

#[test]
fn raw_demos_often_violate_avoid() {
    let spec = builtin_spec("avoid").unwrap();
    let violations = (0..100)
        .filter(|&seed| {
            let d = gen_demo(seed);
            let objects = d.input[4..].chunks(2).map(|c| c.to_vec()).collect::<Vec<_>>();
            !eval_qualitative(&spec, &d.trajectory, 0, &objects).unwrap()
        })
        .count();
    assert!(violations >= 10, "{violations}");
}

#[test]
fn task_datasets_respect_endpoint_feasibility() {
    let data = gen_dataset("steady", 50, 1);
    assert_eq!(data.len(), 50);
    for d in &data.demos {
        assert!((0.25..=0.75).contains(&d.input[1]) && (0.25..=0.75).contains(&d.input[3]));
        assert_eq!(d.task, "steady");
    }
    assert_eq!(data, gen_dataset("steady", 50, 1));
}

#[test]
fn builtin_asts() {
    use ltl_dmp::ltl::{Cmp, Formula, Term};
    assert_eq!(
        builtin_spec("avoid").unwrap(),
        Formula::always(Formula::atom(Term::Pos.minus(Term::Object(1)).sqnorm(), Cmp::Ge, Term::Scalar(0.1)))
    );
    assert_eq!(
        builtin_spec("slow").unwrap(),
        Formula::always(Formula::atom(Term::Vel.norm(), Cmp::Le, Term::Scalar(0.015)))
    );
    assert!(matches!(builtin_spec("dance"), Err(TaskError::UnknownSpec(_))));
}

#[test]
fn steady_holds_inside_the_band() {
    let tr = Trace::new((0..10).map(|i| vec![i as f64 / 10.0, 0.5]).collect(), 0.1).unwrap();
    let objects = vec![vec![0.0, 0.0]; 3];
    let spec = builtin_spec("steady").unwrap();
    assert!(eval_qualitative(&spec, &tr, 0, &objects).unwrap());
    assert_eq!(trace_loss(&spec, &tr, &objects, &LossConfig::hard()).unwrap(), 0.0);
}

#[test]
fn compose_fold_shape() {
    use ltl_dmp::ltl::Formula;
    let [a, s, p] = ["avoid", "steady", "patrol"].map(|n| builtin_spec(n).unwrap());
    assert_eq!(compose_specs(vec![a.clone()]).unwrap(), a);
    assert_eq!(
        compose_specs(vec![a.clone(), s.clone(), p.clone()]).unwrap(),
        Formula::and(a, Formula::and(s, p))
    );
    assert!(compose_specs(vec![]).is_none());
}

#[test]
fn dataset_round_trip_and_errors() {
    let data = gen_dataset("avoid", 5, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    save_dataset(&data, &path).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), data);
    let text = dataset_to_string(&data);
    assert_eq!(dataset_from_str(&text).unwrap(), data);

    assert!(matches!(dataset_from_str(&text[..text.len() / 2]), Err(TaskError::Malformed(_))));
    let v2 = text.replacen("\"version\": 1", "\"version\": 2", 1).replacen("\"version\":1", "\"version\":2", 1);
    assert!(matches!(dataset_from_str(&v2), Err(TaskError::Version { found: 2, expected: 1 })));
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["schema"]["d"], 2);
    assert_eq!(json["schema"]["k_objects"], 3);
    assert_eq!(json["schema"]["t"], 100);
    assert!(json["demos"][0]["trajectory"][0].is_array());
}

#[test]
fn recorded_robot_specs_have_finite_losses() {
    let schema = InputSchema::new(6, 3);
    for (name, spec) in [("pour", "pour"), ("reach", "reach")] {
        let file = load_trace(manifest(&format!("data/{name}.json"))).unwrap();
        assert_eq!(file.schema.d, 6);
        let f = parse_formula(&std::fs::read_to_string(manifest(&format!("specs/{spec}.ltl"))).unwrap(), &schema).unwrap();
        let tr = file.trace().unwrap();
        for cfg in [LossConfig::hard(), LossConfig::default()] {
            assert!(trace_loss(&f, &tr, &file.objects, &cfg).unwrap().is_finite());
        }

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        save_trace(&file, &path).unwrap();
        assert_eq!(load_trace(&path).unwrap(), file);
        let again = TraceFile::new(&tr, file.objects.clone(), &file.task);
        assert_eq!(again, file);
    }
}
