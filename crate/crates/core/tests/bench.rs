use std::time::{Duration, Instant};

use hamon::bench::{emit_plot_data, run_bench, BenchMethod, BenchModel, BenchPlan, PlanFile, PlotAxis};
use hamon::model::BuiltinSelector;

fn model(name: &str) -> BenchModel {
    BenchModel::builtin(&name.parse::<BuiltinSelector>().unwrap()).unwrap()
}

fn plan(models: Vec<BenchModel>, lengths: Vec<usize>, seeds: u64, method: BenchMethod) -> BenchPlan {
    BenchPlan { lengths, seeds, method, ..BenchPlan::desk_scale(models) }
}

#[test]
fn cells_follow_the_plan() {
    let r = run_bench(&plan(vec![model("ACCI")], vec![10, 30], 5, BenchMethod::Direct));
    assert_eq!(r.cells.len(), 2);
    for (cell, len) in r.cells.iter().zip([10, 30]) {
        assert_eq!(cell.length, len);
        assert_eq!(cell.runs, 5);
        assert_eq!(cell.methods.len(), 1);
        assert_eq!(cell.methods[0].seconds.len(), 5);
        assert_eq!(cell.methods[0].acceptance_rates.len(), len);
        let v = &cell.methods[0].verdicts;
        assert_eq!(v.accepted + v.rejected + v.inconclusive, 5 * len);
        assert!(cell.disagreements.is_none());
    }
    let json = r.to_json();
    assert_eq!(json["cells"][1]["length"], 30);
    assert!(run_bench(&plan(vec![model("ACCI")], vec![], 5, BenchMethod::Direct)).cells.is_empty());
}

#[test]
fn generation_is_deterministic() {
    let p = plan(vec![model("ACCI")], vec![15], 3, BenchMethod::Direct);
    let a = run_bench(&p);
    let b = run_bench(&p);
    assert_eq!(a.cells[0].methods[0].verdicts, b.cells[0].methods[0].verdicts);
    assert_eq!(a.cells[0].methods[0].acceptance_rates, b.cells[0].methods[0].acceptance_rates);
}

#[test]
fn methods_agree_across_dimensions() {
    let models = (2..=4).map(|d| model(&format!("ACCD:{d}:9/10"))).collect();
    let r = run_bench(&plan(models, vec![20], 2, BenchMethod::Both));
    assert_eq!(r.cells.len(), 3);
    for c in &r.cells {
        assert_eq!(c.disagreements, Some(0), "{}", c.model);
        assert_eq!(c.methods.len(), 2);
    }
    let (text, warnings) = emit_plot_data(&r, PlotAxis::Dimension).unwrap();
    assert_eq!(warnings, Vec::<String>::new());
    let blocks: Vec<&str> = text.split("# series: ").skip(1).collect();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        let rows: Vec<&str> = b.lines().skip(1).filter(|l| !l.is_empty()).collect();
        let xs: Vec<&str> = rows.iter().map(|r| r.split_whitespace().next().unwrap()).collect();
        assert_eq!(xs, ["2", "3", "4"]);
    }
}

#[test]
fn plot_rows_and_sentinels() {
    let r = run_bench(&plan(vec![model("ACCI")], vec![10, 20, 40], 2, BenchMethod::Direct));
    let (text, warnings) = emit_plot_data(&r, PlotAxis::Length).unwrap();
    assert!(warnings.is_empty());
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
    assert_eq!(rows.len(), 3);
    for (row, x) in rows.iter().zip(["10", "20", "40"]) {
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols[0], x);
        assert!(cols[1].parse::<f64>().unwrap() >= 0.0);
    }

    let mut p = plan(vec![model("ACCI")], vec![10], 2, BenchMethod::Direct);
    p.timeout = Some(Duration::ZERO);
    let r = run_bench(&p);
    assert!(r.cells[0].methods[0].timed_out);
    let (text, warnings) = emit_plot_data(&r, PlotAxis::Length).unwrap();
    assert!(text.contains("10 NaN # timeout"), "{text}");
    assert_eq!(warnings.len(), 1);

    assert!(emit_plot_data(&Default::default(), PlotAxis::Length).is_err());
}

#[test]
fn plan_files_resolve() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/platooning");
    let p = PlanFile::parse(
        r#"{"models": ["ACCI", {"model": "model.json", "spec": "spec.json"}],
            "lengths": [3], "seeds": 2, "interval": ["1", "5/2"], "method": "both", "timeout_secs": 30}"#,
    )
    .unwrap()
    .resolve(&dir)
    .unwrap();
    assert_eq!(p.models.len(), 2);
    assert_eq!(p.models[1].monitored.locations.len(), 4);
    assert_eq!(p.method, BenchMethod::Both);
    assert_eq!(p.timeout, Some(Duration::from_secs(30)));
    let r = run_bench(&p);
    assert_eq!(r.cells.len(), 2);
    assert!(r.cells.iter().all(|c| c.disagreements == Some(0)));

    assert!(PlanFile::parse(r#"{"lengths": [3]}"#).is_err());
    let bad = PlanFile::parse(r#"{"models": ["ACCX"]}"#).unwrap();
    assert!(bad.resolve(&dir).is_err());
    let bad = PlanFile::parse(r#"{"models": ["ACCI"], "interval": ["3", "1"]}"#).unwrap();
    assert!(bad.resolve(&dir).is_err());
}

#[test]
#[ignore]
fn timing_probe() {
    for len in [100, 1000] {
        let t = Instant::now();
        let r = run_bench(&plan(vec![model("ACCI")], vec![len], 3, BenchMethod::Both));
        println!("{len}: {:?} {:?}", t.elapsed(), r.cells[0].methods.iter().map(|m| m.mean).collect::<Vec<_>>());
    }
}
