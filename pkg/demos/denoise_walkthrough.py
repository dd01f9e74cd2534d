"""End-to-end walkthrough: make a phantom, corrupt it, denoise it four ways.

The mixed noise model scales the image by eta, draws Poisson counts, scales
back, and adds Gaussian read noise -- so small eta means strong
signal-dependent noise.  The two bilinear-split solvers handle the mixed
fidelity directly; the TV+L2 and TV+KL baselines each assume only one of the
two noise sources.

Run:  python demos/denoise_walkthrough.py
"""

import numpy as np

from mpgdenoise import (
    NoiseSpec,
    SolverConfig,
    bca_solve,
    bcaf_solve,
    corrupt,
    make_phantom,
    snr,
    ssim,
    tv_kl_solve,
    tv_l2_solve,
)


def main():
    truth = make_phantom("circles", 64, 64)
    spec = NoiseSpec(eta=4.0, sigma=1e-4, seed=11)
    noisy = corrupt(truth, spec)
    print(f"phantom 64x64 'circles', noise eta={spec.eta} sigma={spec.sigma}")
    print(f"noisy input:   snr {snr(noisy, truth):6.2f} dB   "
          f"ssim {ssim(np.clip(noisy, 0.0, 1.0), truth):.4f}")
    print()

    cfg = SolverConfig(lambda1=8.0, lambda2=2.5, alpha=200.0,
                       alpha_w=200.0, alpha_p=10.0)
    runs = [
        ("bca  (bilinear split)", lambda: bca_solve(noisy, cfg, truth=truth)),
        ("bcaf (flux split)", lambda: bcaf_solve(noisy, cfg, truth=truth)),
        ("tv+l2 baseline", lambda: tv_l2_solve(noisy, 3.0, cfg, truth=truth)),
        ("tv+kl baseline",
         lambda: tv_kl_solve(np.maximum(noisy, 0.0), 18.0, cfg, truth=truth)),
    ]
    print(f"{'method':<22} {'snr dB':>8} {'ssim':>8} {'iters':>6} {'secs':>7}")
    for name, run in runs:
        u, trace = run()
        last = trace[-1]
        print(f"{name:<22} {snr(u, truth):8.2f} {ssim(u, truth):8.4f} "
              f"{last.iter:6d} {last.seconds:7.3f}")

    print()
    print("The mixed-fidelity solvers recover the most SNR; the single-")
    print("fidelity baselines give away part of the noise model.")


if __name__ == "__main__":
    main()
