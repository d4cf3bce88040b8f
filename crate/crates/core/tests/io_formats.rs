use std::path::PathBuf;

use proptest::prelude::*;
use qgraph::amo::{butterfly, ButterflyDataset};
use qgraph::chain::chain_graph;
use qgraph::graph_file::{load_graph, parse_graph};
use qgraph::output::*;
use qgraph::par::Execution;
use qgraph::secular::{ScanOptions, SecularSystem};
use qgraph::trv::{square_lattice_graph, hex_lattice_graph, StarGraph};
use qgraph::{Error, FlatBand, Interval, SpectralSet};

fn graph_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

fn same_matrices(a: &SecularSystem, b: &SecularSystem, d: usize) {
    for (e, t) in [(-2.0, 0.4), (0.7, -1.1), (5.3, 2.9), (40.0, 0.0)] {
        let th = vec![t; d];
        let diff = (a.matrix(e, &th) - b.matrix(e, &th)).norm();
        assert!(diff < 1e-12, "E={e}: {diff}");
    }
}

#[test]
fn files_reproduce_built_in_graphs() {
    let chain = SecularSystem::new(load_graph(graph_dir().join("chain.toml")).unwrap()).unwrap();
    same_matrices(&chain, &SecularSystem::new(chain_graph(2.0, &[0.3]).unwrap()).unwrap(), 1);
    let sq = SecularSystem::new(load_graph(graph_dir().join("square_trv.toml")).unwrap()).unwrap();
    same_matrices(&sq, &SecularSystem::new(square_lattice_graph(1.5).unwrap()).unwrap(), 2);
    let hex = SecularSystem::new(load_graph(graph_dir().join("hex_trv.toml")).unwrap()).unwrap();
    same_matrices(&hex, &SecularSystem::new(hex_lattice_graph(1.5).unwrap()).unwrap(), 2);
    let star = SecularSystem::new(load_graph(graph_dir().join("star3.toml")).unwrap()).unwrap();
    same_matrices(&star, &SecularSystem::new(StarGraph::new(3).unwrap().graph().unwrap()).unwrap(), 0);
}

#[test]
fn slot_order_matters() {
    // swapping two ends of a circulant vertex reverses the cyclic order
    let text = std::fs::read_to_string(graph_dir().join("square_trv.toml")).unwrap();
    let swapped = text.replace(r#"["x.tail", "y.tail", "x.head", "y.head"]"#, r#"["y.tail", "x.tail", "x.head", "y.head"]"#);
    let a = SecularSystem::new(parse_graph(&text).unwrap()).unwrap();
    let b = SecularSystem::new(parse_graph(&swapped).unwrap()).unwrap();
    assert!((a.matrix(3.0, &[0.2, 0.5]) - b.matrix(3.0, &[0.2, 0.5])).norm() > 1e-3);
}

fn expect_error(text: &str, want_line: usize, want_field: &str) {
    match parse_graph(text) {
        Err(Error::GraphFile { line, field, message }) => {
            assert_eq!((line, field.as_str()), (want_line, want_field), "{message}");
        }
        other => panic!("expected a graph-file error, got {other:?}"),
    }
}

#[test]
fn malformed_files() {
    let head = "dimension = 1\n\n[[vertex]]\nname = \"v\"\ncoupling = { kind = \"kirchhoff\" }\n\n";
    expect_error(&format!("{head}[[edge]]\ntail = \"v\"\nhead = \"v\"\nlength = \"two\"\nshift = [1]\n"), 10, "edge.length");
    expect_error(&format!("{head}[[edge]]\ntail = \"v\"\nhead = \"v\"\nlength = 1\nshift = [1, 0]\n"), 11, "edge.shift");
    expect_error(&format!("{head}[[edge]]\ntail = \"u\"\nhead = \"v\"\nlength = 1\nshift = [1]\n"), 8, "edge.tail");
    let bad_matrix = "dimension = 0\n[[vertex]]\nname = \"v\"\ncoupling = { kind = \"matrix\", rows = [[[1, 0], [1, 0]], [[0, 0], [1, 0]]] }\n[[lead]]\nvertex = \"v\"\n[[lead]]\nvertex = \"v\"\n";
    let r = parse_graph(bad_matrix);
    assert!(matches!(r, Err(Error::GraphFile { line: 4, .. })), "{r:?}");
    assert!(parse_graph("dimension = ").is_err());
    assert!(load_graph(graph_dir().join("missing.toml")).is_err());
}

#[test]
fn scan_csv_roundtrip() {
    let sys = SecularSystem::new(chain_graph(1.0, &[0.2]).unwrap()).unwrap();
    let scan = sys.spectrum_scan(Interval::new(-1.0, 6.0), &ScanOptions::new(0.05)).unwrap();
    let text = write_scan_csv(&scan.samples, scan.rank_tol);
    assert!(text.starts_with("k,in_spectrum,sigma_min\n"));
    let rows = read_scan_csv(&text).unwrap();
    assert_eq!(rows.len(), scan.samples.len());
    for (r, s) in rows.iter().zip(&scan.samples) {
        assert!((r.0 - s.momentum).abs() <= 1e-11 * s.momentum.abs().max(1e-300));
        assert_eq!(r.1, s.singular_value <= scan.rank_tol);
    }
    assert_eq!(write_scan_csv(&scan.samples, scan.rank_tol), text);
}

#[test]
fn butterfly_csv_roundtrip() {
    let data = butterfly(6, 64, Execution::Sequential).unwrap();
    let text = write_butterfly_csv(&data);
    let rows = read_butterfly_csv(&text).unwrap();
    let back = ButterflyDataset { lambda: data.lambda, theta: data.theta, rows };
    assert_eq!(back.rows.len(), data.rows.len());
    for (a, b) in back.rows.iter().zip(&data.rows) {
        assert_eq!((a.p, a.q, a.bands.len()), (b.p, b.q, b.bands.len()));
        for (x, y) in a.bands.iter().zip(&b.bands) {
            assert!((x.lo - y.lo).abs() <= 1e-11 * y.lo.abs().max(1e-3));
        }
    }
}

#[test]
fn readers_report_lines() {
    let err = read_spectral_set("domain 0 1\nband 0 x\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = read_gap_csv("index,e_lo,e_hi,k_lo,k_hi\n1,2,3\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(read_spectral_set("band 0 1\n").is_err());
}

fn arb_set() -> impl Strategy<Value = SpectralSet> {
    (
        proptest::collection::vec((-1e3f64..1e3, 0.0f64..50.0), 0..8),
        proptest::collection::vec((-1e3f64..1e3, any::<bool>()), 0..4),
    )
        .prop_map(|(bands, flats)| {
            let bands: Vec<(f64, f64)> = bands.into_iter().map(|(lo, w)| (lo, lo + w)).collect();
            let flats: Vec<FlatBand> = flats.into_iter().map(|(e, inf)| FlatBand { energy: e, infinite_multiplicity: inf }).collect();
            SpectralSet::from_parts(Interval::new(-2e3, 2e3), bands, flats, 0.0)
        })
}

proptest! {
    #[test]
    fn spectral_text_roundtrip(set in arb_set()) {
        let text = write_spectral_set(&set);
        let back = read_spectral_set(&text).unwrap();
        prop_assert_eq!(back.bands.len(), set.bands.len());
        prop_assert_eq!(back.flat_bands.len(), set.flat_bands.len());
        for (a, b) in back.bands.iter().zip(&set.bands) {
            prop_assert!((a.lo - b.lo).abs() <= 1e-11 * b.lo.abs().max(1e-300));
            prop_assert!((a.hi - b.hi).abs() <= 1e-11 * b.hi.abs().max(1e-300));
            prop_assert_eq!(a.degenerate, b.degenerate);
        }
        // writing is a fixed point after one pass
        prop_assert_eq!(write_spectral_set(&back), text);
    }

    #[test]
    fn gap_csv_roundtrip(gaps in proptest::collection::vec((0.0f64..1e4, 0.0f64..10.0), 0..10)) {
        let gaps: Vec<Interval> = gaps.into_iter().map(|(lo, w)| Interval::new(lo, lo + w)).collect();
        let back = read_gap_csv(&write_gap_csv(&gaps)).unwrap();
        prop_assert_eq!(back.len(), gaps.len());
        for (a, b) in back.iter().zip(&gaps) {
            prop_assert!((a.lo - b.lo).abs() <= 1e-11 * b.lo.max(1e-300));
        }
    }
}

#[test]
fn degree_mismatch_points_at_the_vertex() {
    // a 2×2 matrix on a degree-1 vertex
    let text = "dimension = 0\n\n[[vertex]]\nname = \"v\"\ncoupling = { kind = \"matrix\", rows = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]] }\n\n[[lead]]\nvertex = \"v\"\n";
    let r = parse_graph(text);
    assert!(matches!(r, Err(Error::GraphFile { line: 5, .. })), "{r:?}");
}
