//! Randomized property checks, with and without an injected data fault.

use ddgp::experiments::{run_property_campaign, CampaignConfig};

fn main() {
    let cfg = CampaignConfig {
        instances: 10,
        ..CampaignConfig::default()
    };
    println!("{}", run_property_campaign(&cfg));
    let faulty = CampaignConfig {
        fault_injection: true,
        ..cfg
    };
    println!("with fault injection:\n{}", run_property_campaign(&faulty));
}
