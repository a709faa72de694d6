"""A full coupled simulation at desk scale.

Disk-shaped tumour in the unit square, trait distribution initially
concentrated at y = 1.75, nutrient at its steady state.  Runs one second of
model time on a 32 x 32 mesh (a couple of minutes) and prints the growth
curve; the same run through the command line would be

    simulate run --config <file> --out results/

with the configuration printed by ``simulate print-defaults`` (adjust nx and
t_end for desk scale).
"""

from dataclasses import replace

from phenofield import config_to_text, default_config, run

cfg = replace(default_config(), nx=32, t_end=1.0)
cfg = replace(cfg, output=replace(cfg.output, snapshot_stride=500))
print(config_to_text(cfg))

result = run(cfg)

print("time   measure   phi_mass   energy     sigma_min   probeA_mean  probeA_var")
for rec in result.records[::100]:
    print(f"{rec.time:5.2f}  {rec.tumour_measure:.5f}  {rec.phi_mass:+.5f}  "
          f"{rec.energy:9.4f}  {rec.sigma_min:.7f}  {rec.probe_a_mean:.5f}     "
          f"{rec.probe_a_var:.5f}")

print("\nmonitors:", {k: f"{v:.3e}" for k, v in result.monitors.items()})
print("snapshots kept at steps:", sorted(result.snapshots))
