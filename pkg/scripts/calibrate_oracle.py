"""Pre-build sweep: verify oracle_label(render(spec)) == spec.attributes and
report per-measure margins so thresholds sit midway between populations."""
import numpy as np
from styledit.synthetic import RenderSpec, render, oracle_label, oracle_measures, NUM_ATTRIBUTES

rng = np.random.default_rng(0)
for res in (16, 32, 64):
    n = 400 if res != 32 else 1000
    fails = 0
    stats = {name: {0: [], 1: []} for name in
             ("smile_curvature", "glass_drop", "hair_lum", "must_drop", "jaw_area")}
    keymap = dict(zip(("smile", "glasses", "dark_hair", "mustache", "wide_jaw"),
                      ("smile_curvature", "glass_drop", "hair_lum", "must_drop", "jaw_area")))
    names = ("smile", "glasses", "dark_hair", "mustache", "wide_jaw")
    for i in range(n):
        bits = rng.integers(0, 2, NUM_ATTRIBUTES).astype(np.uint8)
        seed = int(rng.integers(0, 2**63))
        img = render(RenderSpec(bits, seed, res))
        m = oracle_measures(img)
        got = oracle_label(img)
        if not np.array_equal(got, bits):
            fails += 1
            if fails <= 5:
                print(f"  res{res} FAIL bits={bits} got={got} measures={ {k: round(v,4) for k,v in m.items()} }")
        for j, nm in enumerate(names):
            stats[keymap[nm]][int(bits[j])].append(m[keymap[nm]])
    print(f"res {res}: {n-fails}/{n} exact oracle matches")
    for meas, d in stats.items():
        lo0, hi0 = (min(d[0]), max(d[0])) if d[0] else (float('nan'),)*2
        lo1, hi1 = (min(d[1]), max(d[1])) if d[1] else (float('nan'),)*2
        print(f"   {meas:18s} bit0=[{lo0:+.4f},{hi0:+.4f}]  bit1=[{lo1:+.4f},{hi1:+.4f}]")
