use cli::config::RunConfig;
use cli::error::{CliError, EXIT_USAGE};
use cli::metrics::{last_value, parse_metrics, MetricsTable, METRICS_SCHEMA};

#[test]
fn default_config_round_trips_through_its_own_echo() {
    let cfg = RunConfig::default();
    let echoed = RunConfig::parse_str(&cfg.to_text()).expect("echo parses");
    assert_eq!(cfg, echoed);
}

#[test]
fn edited_config_round_trips_including_lists() {
    let mut cfg = RunConfig::default();
    cfg.set("world", "point-reach").unwrap();
    cfg.set("seeds", "3,4,5").unwrap();
    cfg.set("hidden", "8, 8, 4").unwrap();
    cfg.set("lr", "0.001").unwrap();
    cfg.set("variant", "onestep").unwrap();
    cfg.set("dataset", "runs/datasets/point-reach-e30-s5.ds").unwrap();
    assert_eq!(cfg.seeds, vec![3, 4, 5]);
    assert_eq!(cfg.hidden, vec![8, 8, 4]);
    let echoed = RunConfig::parse_str(&cfg.to_text()).expect("echo parses");
    assert_eq!(cfg, echoed);
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let err = RunConfig::parse_str("learning_rate = 0.1").unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
    assert!(err.to_string().contains("learning_rate"), "{err}");
}

#[test]
fn bad_values_name_the_key_and_the_value() {
    let err = RunConfig::parse_str("gamma = fast").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("gamma") && msg.contains("fast"), "{msg}");

    let err = RunConfig::parse_str("seeds = 1,two,3").unwrap_err();
    assert!(err.to_string().contains("seeds"), "{err}");
}

#[test]
fn later_lines_override_earlier_ones() {
    let cfg = RunConfig::parse_str("gamma = 0.5\ngamma = 0.7").unwrap();
    assert_eq!(cfg.gamma, 0.7);
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "# experiment knobs\n\n  # indented comment\nhorizon = 25\n";
    let cfg = RunConfig::parse_str(text).unwrap();
    assert_eq!(cfg.horizon, 25);
}

#[test]
fn lines_without_an_equals_sign_report_their_number() {
    let err = RunConfig::parse_str("gamma = 0.9\nnot a pair\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 2"), "{msg}");
}

#[test]
fn variant_strings_map_to_loop_variants() {
    let mut cfg = RunConfig::default();
    for (name, tag) in [
        ("replacement", "replacement"),
        ("onestep", "onestep"),
        ("iterative", "iterative"),
    ] {
        cfg.variant = name.to_string();
        let tc = cfg.train_config(0).expect("known variant");
        assert_eq!(tc.variant.tag(), tag);
    }
    cfg.variant = "ppo".to_string();
    let err = cfg.train_config(0).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)), "{err}");
}

#[test]
fn iterative_variant_carries_the_refit_budget() {
    let mut cfg = RunConfig::default();
    cfg.variant = "iterative".to_string();
    cfg.refit_steps = 7;
    match cfg.train_config(0).unwrap().variant {
        bppo_train::Variant::Iterative { refit_steps } => assert_eq!(refit_steps, 7),
        other => panic!("expected iterative, got {}", other.tag()),
    }
}

#[test]
fn metrics_csv_round_trips_with_full_precision() {
    let mut table = MetricsTable::new("demo-run", 3);
    table.push(0, "loss", 1.5);
    table.push(0, "j_mean", -0.125);
    table.push(1, "loss", std::f64::consts::PI);
    let csv = table.to_csv();
    assert!(csv.starts_with(METRICS_SCHEMA));
    assert!(csv.contains("run,seed,step,metric,value"));
    assert!(csv.contains("1.5000000000000000e0"), "{csv}");

    let rows = parse_metrics(&csv).expect("own output parses");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].run, "demo-run");
    assert_eq!(rows[0].seed, 3);
    assert_eq!(rows[2].step, 1);
    assert_eq!(rows[2].value, std::f64::consts::PI);
}

#[test]
fn metrics_parser_rejects_foreign_files() {
    let err = parse_metrics("loss,0.5\n").unwrap_err();
    assert!(err.to_string().contains("schema"), "{err}");

    let err = parse_metrics("# bppo-metrics v1\nwrong,header\n").unwrap_err();
    assert!(err.to_string().contains("header"), "{err}");

    let bad_row = "# bppo-metrics v1\nrun,seed,step,metric,value\nr,1,0,loss\n";
    assert!(parse_metrics(bad_row).is_err());
}

#[test]
fn last_value_prefers_the_newest_row() {
    let mut table = MetricsTable::new("r", 0);
    table.push(0, "j_mean", 1.0);
    table.push(5, "j_mean", 2.0);
    let rows = parse_metrics(&table.to_csv()).unwrap();
    assert_eq!(last_value(&rows, "j_mean"), Some(2.0));
    assert_eq!(last_value(&rows, "missing"), None);
}
