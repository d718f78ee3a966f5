"""The bundled synthetic benchmark used by the acceptance checks."""
from __future__ import annotations

from .dataset import SplitMode, SplitSpec
from .pipeline import PreparedSplit, prepare_split
from .preprocess import TextFeatureMode
from .synth import SynthConfig, generate_synthetic

BENCH_N = 5000
BENCH_TAIL_FRAC = 0.05
BENCH_SEEDS = (0, 1, 2, 3, 4)
BENCH_TEST_COUNT = 1000


def benchmark_split(seed: int, n: int = BENCH_N, tail_frac: float = BENCH_TAIL_FRAC,
                    test_count: int = BENCH_TEST_COUNT,
                    mode: SplitMode = SplitMode.RANDOM,
                    text_mode: TextFeatureMode = TextFeatureMode.TEXT_LENGTH) -> PreparedSplit:
    """Seeded synthetic corpus, split and digitized; same seed for data and split."""
    data = generate_synthetic(SynthConfig(n=n, seed=seed, tail_frac=tail_frac))
    return prepare_split(data, SplitSpec(mode, test_count, seed), text_mode)
