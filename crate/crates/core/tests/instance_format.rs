//! Instance file export/import round trips.

use proptest::prelude::*;
use risbc::instance::{InstanceFile, LinkMatrices};
use risbc::CMat64;

type Cx = nalgebra::Complex<f64>;

fn mat(rows: usize, cols: usize, values: &[(f64, f64)], offset: usize) -> CMat64 {
    CMat64::from_fn(rows, cols, |i, j| {
        let (re, im) = values[(offset + i * cols + j) % values.len()];
        Cx::new(re, im)
    })
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>(),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 8.0),
        Just(f64::MAX),
    ]
}

prop_compose! {
    fn instance()(
        users in 1usize..4,
        n_t in 1usize..5,
        n_ris in 0usize..5,
        rx in proptest::collection::vec(1usize..3, 3),
        values in proptest::collection::vec((number(), number()), 1..64),
        power in number(),
        with_covs in any::<bool>(),
        scalars in proptest::collection::btree_map("[a-z_]{1,12}", number(), 0..4),
    ) -> InstanceFile {
        let rx: Vec<usize> = rx[..users].to_vec();
        let channels = rx.iter().enumerate().map(|(k, &n)| mat(n, n_t, &values, k)).collect();
        let covariances = with_covs.then(|| rx.iter().enumerate().map(|(k, &n)| mat(n, n, &values, 7 * k)).collect());
        let (phases, links) = if n_ris > 0 {
            let phases = (0..n_ris).map(|l| { let (a, b) = values[l % values.len()]; Cx::new(a, b) }).collect();
            let links = LinkMatrices {
                direct: rx.iter().enumerate().map(|(k, &n)| mat(n, n_t, &values, 3 + k)).collect(),
                bs_ris: mat(n_ris, n_t, &values, 5),
                ris_user: rx.iter().enumerate().map(|(k, &n)| mat(n, n_ris, &values, 11 + k)).collect(),
            };
            (Some(phases), Some(links))
        } else {
            (None, None)
        };
        InstanceFile { tx_antennas: n_t, rx_antennas: rx, ris_elements: n_ris, power, channels, covariances, phases, links, scalars }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn export_import_export_is_byte_identical(file in instance()) {
        let text = file.to_text();
        let back = InstanceFile::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn finite_values_survive_exactly(file in instance()) {
        let all_finite = file.channels.iter().all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            && file.power.is_finite();
        prop_assume!(all_finite);
        let back = InstanceFile::parse(&file.to_text()).unwrap();
        for (a, b) in back.channels.iter().zip(&file.channels) {
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        prop_assert_eq!(back.power.to_bits(), file.power.to_bits());
    }
}

#[test]
fn file_round_trip() {
    let file = InstanceFile {
        tx_antennas: 2,
        rx_antennas: vec![2],
        ris_elements: 0,
        power: 2.0,
        channels: vec![CMat64::identity(2, 2)],
        covariances: None,
        phases: None,
        links: None,
        scalars: [("sum_rate_bits".to_string(), 2.0)].into_iter().collect(),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.txt");
    file.write(&path).unwrap();
    assert_eq!(InstanceFile::read(&path).unwrap(), file);
    assert!(std::fs::read_to_string(&path).unwrap().contains("matrix H 0 2 2\n1.00000000000000000e0 0.00000000000000000e0 0.00000000000000000e0 0.00000000000000000e0\n"));
}
