use hubopt::lp::{annualize_capex, AnnuityError};

/// Level payment whose present value over `lifetime` years equals `capex`,
/// from the discount-factor sum rather than the closed form.
fn series_oracle(capex: f64, lifetime: u32, wacc: f64) -> f64 {
    let mut pv = 0.0;
    let mut discount = 1.0;
    for _ in 0..lifetime {
        discount /= 1.0 + wacc;
        pv += discount;
    }
    capex / pv
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn pccc_annuity_matches_oracle() {
    let got = annualize_capex(3150.0, 20.0, 0.07).unwrap();
    assert!(rel(got, series_oracle(3150.0, 20, 0.07)) <= 1e-9);
    // 50-digit decimal evaluation of the closed form
    assert!(rel(got, 297.337_716_091_255_44) <= 1e-12);
}

#[test]
fn dac_annuity_matches_oracle() {
    let got = annualize_capex(4801.4, 30.0, 0.07).unwrap();
    assert!(rel(got, series_oracle(4801.4, 30, 0.07)) <= 1e-9);
    assert!((got - 386.9).abs() < 0.05);
}

#[test]
fn single_period_is_principal_plus_interest() {
    for c in [1.0, 37.5, 1e4] {
        assert!(rel(annualize_capex(c, 1.0, 0.07).unwrap(), 1.07 * c) <= 1e-12);
    }
}

#[test]
fn oracle_agreement_over_a_grid() {
    for lifetime in [1, 2, 5, 15, 20, 25, 30, 40, 60] {
        for wacc in [0.001, 0.03, 0.07, 0.12, 0.5] {
            let got = annualize_capex(1000.0, lifetime as f64, wacc).unwrap();
            assert!(rel(got, series_oracle(1000.0, lifetime, wacc)) <= 1e-9, "L={lifetime} w={wacc}");
        }
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert_eq!(annualize_capex(100.0, 20.0, 0.0), Err(AnnuityError::Wacc(0.0)));
    assert_eq!(annualize_capex(100.0, 20.0, 1.0), Err(AnnuityError::Wacc(1.0)));
    assert_eq!(annualize_capex(100.0, 0.5, 0.07), Err(AnnuityError::Lifetime(0.5)));
    assert!(matches!(annualize_capex(f64::NAN, 20.0, 0.07), Err(AnnuityError::Capex(_))));
}
