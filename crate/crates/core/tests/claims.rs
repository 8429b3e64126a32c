use netform::oracle::claims::{check_presets, Claim, Verdict};

#[test]
fn every_preset_is_confirmed() {
    for claim in Claim::ALL.into_iter().chain([Claim::T1]) {
        for report in check_presets(claim, 30, 11).unwrap() {
            assert_eq!(report.verdict, Verdict::Confirmed, "{}", serde_json::to_string_pretty(&report).unwrap());
            assert!(report.checks > 0, "{claim} {}", report.params.scenario);
        }
    }
}
