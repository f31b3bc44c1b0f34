use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corrsist::bell::facet4_closed_max;
use corrsist::entdetect::{cond_max_persistency, cond_persist_e, cond_persist_ge, s_values};
use corrsist::families::TauMinCoords;
use corrsist::scan::{scan_tau_min, write_csv};
use corrsist::steering::appendix_b_conditions;

fn csv_with_threads(n: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let rows = pool.install(|| scan_tau_min(31, (-1.0, 1.0), true)).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    buf
}

#[test]
fn output_independent_of_thread_count() {
    let serial = csv_with_threads(1);
    assert_eq!(serial, csv_with_threads(4));
    assert_eq!(serial, csv_with_threads(1));
}

#[test]
fn rows_match_direct_calls() {
    let rows = scan_tau_min(41, (-1.0, 1.0), true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let r = &rows[rng.random_range(0..rows.len())];
        let c = TauMinCoords::normalized(r.x).unwrap();
        let s = s_values(&c);
        let m = cond_max_persistency(&c);
        let (b1, b2, b3) = appendix_b_conditions(&c);
        let f = (1..=4).map(|w| facet4_closed_max(&c, w).unwrap()).fold(f64::INFINITY, f64::min);
        assert_eq!(r.cond1, cond_persist_ge(&c));
        assert_eq!(r.cond2, cond_persist_e(&c));
        assert_eq!((r.s1, r.s2, r.s3), (s.s1, s.s2, s.s3));
        assert_eq!((r.pge_max, r.pe_max), (m.pge_max, m.pe_max));
        assert_eq!(r.ps_max, b1 > 0.0 && b2 > 0.0 && b3 > 0.0);
        assert_eq!(r.facet4_min, f);
        let norm: f64 = r.x.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn upper_sheet_only_by_default() {
    let rows = scan_tau_min(11, (-1.0, 1.0), false).unwrap();
    assert!(rows.iter().all(|r| r.x[3] >= 0.0));
    let both = scan_tau_min(11, (-1.0, 1.0), true).unwrap();
    assert!(both.iter().any(|r| r.x[3] < 0.0));
    assert!(both.windows(2).all(|w| w[0].x[..3] <= w[1].x[..3]));
}
