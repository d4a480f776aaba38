use proptest::prelude::*;
use sphmean::corpus;
use sphmean::sinogram_io::{check_against_config, format_sinogram, parse_sinogram, read_sinogram, write_sinogram};
use sphmean::{Error, RunConfig};
use sphmean_core::transform::forward_sinogram;
use sphmean_core::{Geometry, Sinogram};

fn small(geometry: Geometry) -> Sinogram {
    let mut g = Sinogram::zeros(geometry, 0.7, 3, 4, 1.4).unwrap();
    for (i, v) in g.values.iter_mut().enumerate() {
        *v = (i as f64 * 0.37).sin() * 10f64.powi(i as i32 - 6);
    }
    g
}

fn format_error(text: &str) -> String {
    match parse_sinogram(text) {
        Err(Error::Format(msg)) => msg,
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn layout_matches_the_documented_format() {
    let text = format_sinogram(&small(Geometry::S2), &[]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..5], ["# geometry=S2", "# R=0.7", "# n_theta=3", "# n_r=4", "# r_max=1.4"]);
    assert_eq!(lines.len(), 5 + 12);
    assert_eq!(lines[5], "0,0,0.0");
    assert!(lines[6].starts_with("0,1,"));
    assert!(lines[9].starts_with("1,0,"));
}

#[test]
fn corpus_files_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (geometry, r) in [(Geometry::H2, 1.0), (Geometry::S2, 0.7)] {
        for (i, p) in corpus::compliant(geometry, r).iter().enumerate() {
            let g = forward_sinogram(p, r, 16, 64, 2.0 * r).unwrap();
            let extra = vec![("tool".to_string(), "sphmean test".to_string()), ("note".to_string(), format!("corpus {i}"))];
            let path = dir.path().join(format!("{}-{i}.csv", geometry.name()));
            write_sinogram(&path, &g, &extra).unwrap();
            let bytes = std::fs::read(&path).unwrap();
            let back = read_sinogram(&path).unwrap();
            assert_eq!(back.sinogram, g);
            assert_eq!(back.extra, extra);
            assert!(back.sinogram.values.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));
            assert_eq!(format_sinogram(&back.sinogram, &back.extra).into_bytes(), bytes);
        }
    }
}

#[test]
fn header_must_match_config() {
    let g = small(Geometry::S2);
    let mut config = RunConfig::new(Geometry::H2, 0.7);
    config.grids.n_theta = 3;
    config.grids.n_r = 4;
    let err = check_against_config(&g, &config).unwrap_err();
    assert!(err.to_string().contains("geometry=S2"), "{err}");
    config.geometry = Geometry::S2;
    assert!(check_against_config(&g, &config).is_ok());
    config.r = 0.6;
    config.grids.r_max = Some(1.4);
    assert!(check_against_config(&g, &config).unwrap_err().to_string().contains("R=0.7"));
    config.r = 0.7;
    config.grids.n_r = 5;
    assert!(check_against_config(&g, &config).unwrap_err().to_string().contains("n_r=4"));
}

#[test]
fn row_count_mismatch_names_both_counts() {
    let text = format_sinogram(&small(Geometry::H2), &[]);
    let short: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    let msg = format_error(&short);
    assert!(msg.contains("11 rows") && msg.contains("3 * 4 = 12"), "{msg}");
}

#[test]
fn malformed_files_rejected() {
    let good = format_sinogram(&small(Geometry::H2), &[]);
    let cases = [
        (good.replace("# n_r=4\n", ""), "expected header `n_r`"),
        (good.replace("# geometry=H2", "# geometry=E2"), "unknown geometry"),
        (good.replace("# R=0.7", "# R=seven"), "cannot parse R"),
        (good.replace("# n_theta=3", "n_theta 3"), "missing header `n_theta`"),
        (good.replace("# n_theta=3", "# n_theta 3"), "is not `# key=value`"),
        (good.replace("0,0,0.0", "0,0,NaN"), "non-finite"),
        (good.replace("0,0,0.0", "0,0,inf"), "non-finite"),
        (good.replace("0,0,0.0", "0,0,x"), "cannot parse value"),
        (good.replace("0,0,0.0", "0,1,0.0"), "duplicate row"),
        (good.replace("0,0,0.0", "3,0,0.0"), "outside the 3 x 4 grid"),
        (good.replace("0,0,0.0", "0,0"), "found 2 fields"),
        (format!("{good}# R=1.0\n"), "fields"),
    ];
    for (text, want) in cases {
        let msg = format_error(&text);
        assert!(msg.contains(want), "{want}: {msg}");
    }
    let dup = good.replace("# r_max=1.4\n", "# r_max=1.4\n# R=2.0\n");
    assert!(format_error(&dup).contains("duplicate header `R`"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn write_then_read_is_bit_exact(
        values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 12),
        r in 0.01f64..1.5,
    ) {
        let g = Sinogram::new(Geometry::S2, r, 3, 4, 2.0 * r, values).unwrap();
        let text = format_sinogram(&g, &[("k".into(), "v = w".into())]);
        let back = parse_sinogram(&text).unwrap();
        prop_assert!(back.sinogram.values.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.sinogram.r.to_bits(), r.to_bits());
        prop_assert_eq!(format_sinogram(&back.sinogram, &back.extra), text);
    }
}
