from fraccable.model import GammaSpec, HurstPair, ModelParams

BASE = ModelParams(alpha=0.5, beta=0.5, s=0.8, lam=1.0, mu=1.0,
                   hurst=HurstPair(0.5, 0.5), gamma=GammaSpec("poly_t", 1.0))


def print_rates(rep):
    print(f"{'mesh':>12} {'rms_error':>12} {'stderr':>10}")
    for h, e, se in zip(rep.meshes, rep.rms_errors, rep.stderr):
        print(f"{h:12.4e} {e:12.4e} {se:10.2e}")
    print(f"slope {rep.slope:.4f} +- {rep.slope_stderr:.4f}, theoretical {rep.theoretical:.4f}")
