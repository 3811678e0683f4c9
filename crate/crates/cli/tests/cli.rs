use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn kmfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmfold")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PENGUIN: &str = "fly(X) :- bird(X), not ab0(X).\nab0(X) :- penguin(X).\n";

#[test]
fn learn_penguin_csv() {
    let csv = data("penguin.csv");
    let o = kmfold(&["learn", "--algo", "fold", path(&csv), "--target", "fly"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), PENGUIN);
}

#[test]
fn learn_penguin_program() {
    let lp = data("penguin.lp");
    let o = kmfold(&["learn", path(&lp), "--target", "fly"]);
    assert_eq!(stdout(&o), PENGUIN);
    let wrong = kmfold(&["learn", path(&lp), "--target", "swim"]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let csv = data("penguin.csv");
    assert_eq!(kmfold(&["learn", path(&csv)]).status.code(), Some(1));
    assert_eq!(kmfold(&["learn", "--algo", "fold", "--k", "2", path(&csv), "--target", "fly"]).status.code(), Some(1));
    assert_eq!(kmfold(&["eval", "--folds", "1", path(&csv), "--target", "fly"]).status.code(), Some(1));
    assert_eq!(kmfold(&["eval", "--sweep-k", "1..3", path(&csv), "--target", "fly"]).status.code(), Some(1));
    assert_eq!(kmfold(&["learn", "--f", "2", path(&csv), "--target", "fly"]).status.code(), Some(1));
    assert_eq!(kmfold(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kmfold(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let o = kmfold(&["learn", "missing.csv", "--target", "y"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = data("penguin.csv");
    assert_eq!(kmfold(&["learn", path(&csv), "--target", "nope"]).status.code(), Some(2));
}

#[test]
fn learn_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = data("wine.csv");
    let mut outputs = Vec::new();
    for name in ["a.lp", "b.lp"] {
        let out = dir.path().join(name);
        let o = kmfold(&[
            "learn", "--algo", "kmeans-foldr", "--k", "3", "--seed", "7", path(&csv), "--target", "Wine",
            "--positive-label", "1", "--out", path(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with("wine(X) :- "));
    let manifest = std::fs::read_to_string(dir.path().join("a.lp.manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["command"], "learn");
    assert_eq!(json["args"]["model"]["seed"], 7);
    assert_eq!(json["args"]["model"]["algo"], "kmeans-foldr");
    assert_eq!(json["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn eval_rows_match_grid() {
    let csv = data("wine.csv");
    let o = kmfold(&[
        "eval", "--algo", "kmeans-fold", "--sweep-k", "1..3", "--repeats", "2", "--folds", "3", path(&csv), "--target",
        "Wine", "--positive-label", "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[0].starts_with("dataset,algorithm,k,f,repeat,fold,"));
    assert!(lines[1].starts_with("wine,kmeans-fold,1,0.5,0,mean,"));

    let plain = kmfold(&["eval", "--algo", "foldr", path(&csv), "--target", "Wine", "--positive-label", "1", "--with-folds"]);
    assert_eq!(stdout(&plain).lines().count(), 1 + 1 + 5);
}

#[test]
fn eval_saved_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = dir.path().join("h.lp");
    std::fs::write(&hyp, PENGUIN).unwrap();
    let csv = data("penguin.csv");
    let o = kmfold(&["eval", "--hypothesis", path(&hyp), path(&csv), "--target", "fly"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("penguin,hypothesis,1.0000,1.0000,1.0000,1.0000,2.0,3.0"));
    std::fs::write(&hyp, "fly(X) :- ").unwrap();
    assert_eq!(kmfold(&["eval", "--hypothesis", path(&hyp), path(&csv), "--target", "fly"]).status.code(), Some(2));
}

const RULES: &str = "\
mt(X) :- clump_thickness(X, N1), N1 > 3, N1 =< 4, not ab1(X), not ab2(X).
ab1(X) :- cell_shape_uniformity(X, N2), N2 > 1, N2 =< 2, normal_nucleoli(X, N3), N3 > 1, N3 =< 2.
ab2(X) :- marginal_adhesion(X, N4), N4 =< 1.
";

const PREDS: &str = "\
#pred mt(X): Tumor @X is malignant
#pred clump_thickness(X, N): the clump thickness of @X is @N
#pred cell_shape_uniformity(X, N): cell shape uniformity of @X is @N
#pred normal_nucleoli(X, N): normal nucleoli level of @X is @N
#pred marginal_adhesion(X, N): marginal adhesion level of @X is @N
";

#[test]
fn translate_breast_rules() {
    let dir = tempfile::tempdir().unwrap();
    let (hyp, preds) = (dir.path().join("h.lp"), dir.path().join("p.txt"));
    std::fs::write(&hyp, RULES).unwrap();
    std::fs::write(&preds, PREDS).unwrap();
    let o = kmfold(&["translate", path(&hyp), "--preds", path(&preds)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with(
        "tumor X is malignant if:\n    the clump thickness of X is larger than 3 and less than or equal to 4\n    \
         unless abnormal condition 1 applies and abnormal condition 2 applies.\n"
    ));
    assert_eq!(text.matches(" if:").count(), 3);

    std::fs::write(&preds, &PREDS[PREDS.find('\n').unwrap() + 1..]).unwrap();
    let o = kmfold(&["translate", path(&hyp), "--preds", path(&preds)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mt/1"));
}

#[test]
fn translate_empty_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let (hyp, preds) = (dir.path().join("h.lp"), dir.path().join("p.txt"));
    std::fs::write(&hyp, "").unwrap();
    std::fs::write(&preds, "").unwrap();
    let o = kmfold(&["translate", path(&hyp), "--preds", path(&preds)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}
