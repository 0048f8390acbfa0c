use overlap_ec::{generate_instance, RngSpec};

use crate::args::{GenArgs, GlobalArgs};
use crate::error::CliResult;
use crate::manifest::{instance_digest, manifest_for, DerivedSeed, Outputs};

/// Stream 0 of the master seed draws the clauses.
pub fn run(global: &GlobalArgs, args: &GenArgs) -> CliResult<()> {
    let spec = RngSpec::new(global.seed, 0);
    let inst = generate_instance(args.n, args.m, args.k, &spec)?;
    let mut out = Outputs::new(global.seed, global.threads);
    out.instance_digest = Some(instance_digest(&inst));
    out.derived_seeds.push(DerivedSeed {
        label: "instance".into(),
        instance: Some(spec),
        algorithm: None,
        campaign_seed: None,
        instance_digest: out.instance_digest.clone(),
    });
    out.emit(args.out.as_deref(), inst.to_text().as_bytes())?;
    out.finish(args.out.as_deref().map(manifest_for).as_deref())?;
    Ok(())
}
