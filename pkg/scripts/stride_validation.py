"""Native-rate vs strided GALT detection on a synthetic corpus.

    python scripts/stride_validation.py --n 800 --stride 3 --seeds 0 1 2

Prints one row per (seed, rate) plus the pooled median difference.
"""

import argparse
import math

from galtkit.detector import detect_galt_batch
from galtkit.stats import median_delta, summarize_galt
from galtkit.synthetic import CorpusDistribution, NoiseSpec, generate_corpus
from galtkit.trajectory import downsample_stride


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--stride", type=int, default=3)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--pos-sigma-m", type=float, default=0.0)
    ap.add_argument("--neck-sigma-deg", type=float, default=0.0)
    args = ap.parse_args()

    dist = CorpusDistribution(noise=NoiseSpec(args.pos_sigma_m, math.radians(args.neck_sigma_deg)))
    print(f"{'seed':>4} {'rate':>6} {'det %':>6} {'median s':>9} {'|diff| ms':>9} dropped")
    for seed in args.seeds:
        corpus = generate_corpus(args.n, dist, seed)
        native = detect_galt_batch([(e.episode_id, e.trajectory) for e in corpus])
        coarse = detect_galt_batch([(e.episode_id, downsample_stride(e.trajectory, args.stride)) for e in corpus])
        a, b = summarize_galt(native), summarize_galt(coarse)
        dropped = sorted({c.skip_code for o, c in zip(native, coarse) if o.ok and not c.ok})
        diff = median_delta(a, b).abs_delta_s * 1000
        rate = dist.rate_hz
        print(f"{seed:>4} {rate:>6g} {100 * a.detection_rate:>6.1f} {a.median_s:>9.4f}")
        print(f"{seed:>4} {rate / args.stride:>6g} {100 * b.detection_rate:>6.1f} {b.median_s:>9.4f} {diff:>9.1f} {dropped}")


if __name__ == "__main__":
    main()
