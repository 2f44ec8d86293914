"""Small runs of the two lab experiments."""
from sturmspec.lab import run_smoothing, run_stability

rep = run_stability(theta=1.0, r=1.0, h=0.3, n_pairs=10, seed=7)
print(f"stability: {len(rep.samples)} ratios in [{rep.C1_emp:.3f}, {rep.C2_emp:.3f}]")
for theta in (0.5, 1.0):
    sm = run_smoothing(theta, n_samples=2, N=32, M=512)
    print(f"smoothing theta={theta}: slopes {[round(s, 2) for s in sm.slopes]}, "
          f"threshold {sm.threshold:.2f}")
